use crate::ProblemKind;

/// Problem fields slotted into every prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    pub task_description: String,
    pub function_name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Sentence explaining the key function's arguments and result.
    pub function_description: String,
}

/// Task sentence used when the problem must not be revealed.
pub const BLACK_BOX_TASK: &str =
    "Solving an optimization problem by designing a key heuristic function inside a fixed algorithm framework.";

fn owned(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

impl PromptSpec {
    pub fn for_problem(problem: ProblemKind) -> Self {
        match problem {
            ProblemKind::Tsp => Self {
                task_description: "Solving Traveling Salesman Problem (TSP) with constructive heuristics. TSP requires finding the shortest path that visits all given nodes and returns to the starting node.".into(),
                function_name: "select_next_node".into(),
                inputs: owned(&["current_node", "destination_node", "unvisited_nodes", "distance_matrix"]),
                outputs: owned(&["next_node"]),
                function_description: "The select_next_node function takes as input the current node, the destination_node, a set of unvisited nodes, and a distance matrix, and returns the next node to visit.".into(),
            },
            ProblemKind::Kp => Self {
                task_description: "Solving Knapsack Problem (KP) with constructive heuristics. KP requires selecting a subset of items with the largest total value whose total weight does not exceed the knapsack capacity.".into(),
                function_name: "select_next_item".into(),
                inputs: owned(&["remaining_capacity", "weights", "values"]),
                outputs: owned(&["next_item"]),
                function_description: "The select_next_item function takes as input the remaining capacity and the weights and values of the items that still fit, and returns the index, within those arrays, of the next item to add.".into(),
            },
            ProblemKind::Bpp => Self {
                task_description: "Solving online Bin Packing Problem (BPP) with constructive heuristics. Items arrive one by one and each must be placed at once into a bin of fixed capacity, using as few bins as possible.".into(),
                function_name: "score".into(),
                inputs: owned(&["item", "bins"]),
                outputs: owned(&["scores"]),
                function_description: "The score function takes as input the size of the current item and an array of the remaining capacities of the bins that can hold it, and returns an array with one preference score per bin; the item is placed into the bin with the highest score.".into(),
            },
            ProblemKind::Asp => Self {
                task_description: "Solving Admissible Set Problem (ASP) with constructive heuristics. ASP requires building the largest set of vectors in {0, 1, 2}^n with exactly w nonzero entries such that any three vectors share a coordinate whose values are {0, 0, 1}, {0, 0, 2} or {0, 1, 2}.".into(),
                function_name: "priority".into(),
                inputs: owned(&["el", "n", "w"]),
                outputs: owned(&["priority"]),
                function_description: "The priority function takes as input a candidate vector el, the dimension n and the number of nonzero entries w, and returns a priority score; vectors with higher scores are tried first when growing the set.".into(),
            },
        }
    }

    /// Generic task sentence, no function description, inputs and outputs
    /// renamed `input_1`, `output_1`, and so on.
    pub fn black_box(&self) -> Self {
        Self {
            task_description: BLACK_BOX_TASK.into(),
            function_name: self.function_name.clone(),
            inputs: (1..=self.inputs.len()).map(|i| format!("input_{i}")).collect(),
            outputs: (1..=self.outputs.len()).map(|i| format!("output_{i}")).collect(),
            function_description: String::new(),
        }
    }
}
