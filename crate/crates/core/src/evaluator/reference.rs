//! Python sources of the classical baselines, written so that a snippet worker
//! reproduces the native tie-breaking exactly.

pub const TSP_NEAREST_GREEDY: &str = "\
def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):
    best = None
    for node in unvisited_nodes:
        if best is None or distance_matrix[current_node][node] < distance_matrix[current_node][best]:
            best = node
    return best";

pub const KP_RATIO_GREEDY: &str = "\
def select_next_item(remaining_capacity, weights, values):
    best = None
    best_ratio = None
    for i in range(len(weights)):
        ratio = values[i] / weights[i]
        if best is None or ratio > best_ratio:
            best, best_ratio = i, ratio
    return best";

pub const BPP_BEST_FIT: &str = "\
def score(item, bins):
    return [-(float(b) - float(item)) for b in bins]";

pub const BPP_FIRST_FIT: &str = "\
def score(item, bins):
    return [-float(i) for i in range(len(bins))]";

pub const ASP_CONSTANT: &str = "\
def priority(el, n, w):
    return 0.0";
