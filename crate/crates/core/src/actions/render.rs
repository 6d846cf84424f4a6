use std::sync::OnceLock;

use minijinja::syntax::SyntaxConfig;
use minijinja::{context, AutoEscape, Environment, UndefinedBehavior, Value};
use serde::Serialize;

use super::{ActionError, PromptSpec};
use crate::ActionKind;

/// One in-context heuristic. `objective` is the value shown to the model
/// (lower is better), absent for candidates never evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextCandidate {
    pub code: String,
    pub description: String,
    pub objective: Option<f64>,
}

impl ContextCandidate {
    /// Builds the prompt view of a candidate whose performance `g` is maximized:
    /// the objective shown is `-g`.
    pub fn from_performance(code: &str, description: &str, performance: Option<f64>) -> Self {
        Self {
            code: code.to_string(),
            description: description.to_string(),
            objective: performance.map(|g| -g + 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptBundle {
    pub system_text: Option<String>,
    pub user_text: String,
    pub action: ActionKind,
    pub context_candidates: Vec<ContextCandidate>,
}

fn environment() -> &'static Environment<'static> {
    static ENV: OnceLock<Environment<'static>> = OnceLock::new();
    ENV.get_or_init(|| {
        let mut env = Environment::new();
        env.set_syntax(
            SyntaxConfig::builder()
                .trim_blocks(true)
                .lstrip_blocks(true)
                .build()
                .expect("default delimiters are valid"),
        );
        env.set_undefined_behavior(UndefinedBehavior::Strict);
        env.set_auto_escape_callback(|_| AutoEscape::None);
        let templates = [
            ("i1", include_str!("../../templates/i1.txt")),
            ("e1", include_str!("../../templates/e1.txt")),
            ("e2", include_str!("../../templates/e2.txt")),
            ("m1", include_str!("../../templates/m1.txt")),
            ("m2", include_str!("../../templates/m2.txt")),
            ("s1", include_str!("../../templates/s1.txt")),
            ("align", include_str!("../../templates/align.txt")),
        ];
        for (name, source) in templates {
            env.add_template(name, source).expect("bundled template parses");
        }
        env
    })
}

fn quoted_list(names: &[String]) -> String {
    names.iter().map(|n| format!("'{n}'")).collect::<Vec<_>>().join(", ")
}

fn check_arity(action: ActionKind, count: usize) -> Result<(), ActionError> {
    let ok = match action {
        ActionKind::I1 => count == 0,
        ActionKind::M1 | ActionKind::M2 => count == 1,
        ActionKind::E2 => count == 2,
        // A single context occurs only while growing the initial layer.
        ActionKind::E1 => (1..=5).contains(&count),
        ActionKind::S1 => count >= 2,
        ActionKind::Align => false,
    };
    if ok {
        Ok(())
    } else {
        Err(ActionError::Arity { action, got: count })
    }
}

/// Renders the prompt of `action` for `spec`. With `black_box`, the problem is
/// described only by a generic sentence and anonymous argument names.
pub fn render_prompt(
    action: ActionKind,
    spec: &PromptSpec,
    context: &[ContextCandidate],
    black_box: bool,
) -> Result<PromptBundle, ActionError> {
    check_arity(action, context.len())?;
    if action == ActionKind::S1 {
        let mut codes: Vec<&str> = context.iter().map(|c| c.code.as_str()).collect();
        codes.sort_unstable();
        codes.dedup();
        if codes.len() < 2 {
            return Err(ActionError::Arity { action, got: codes.len() });
        }
    }
    let needs_objective = matches!(action, ActionKind::E2 | ActionKind::S1);
    if needs_objective && context.iter().any(|c| c.objective.is_none()) {
        return Err(ActionError::MissingObjective(action));
    }
    let spec = if black_box { spec.black_box() } else { spec.clone() };
    let slots: Vec<Value> = context
        .iter()
        .map(|c| {
            context! {
                code => c.code.as_str(),
                description => c.description.as_str(),
                objective => c.objective.map(|o| o.to_string()),
            }
        })
        .collect();
    let template = environment().get_template(action.tag()).expect("template registered");
    let user_text = template
        .render(context! {
            task_description => spec.task_description,
            function_name => spec.function_name,
            input_count => spec.inputs.len(),
            input_names => quoted_list(&spec.inputs),
            output_count => spec.outputs.len(),
            output_names => quoted_list(&spec.outputs),
            function_description => spec.function_description,
            candidates => slots,
        })
        .map_err(|e| ActionError::Template(e.to_string()))?;
    Ok(PromptBundle {
        system_text: None,
        user_text,
        action,
        context_candidates: context.to_vec(),
    })
}

/// Renders the description-rewrite prompt for a freshly generated candidate.
pub fn render_alignment_prompt(
    spec: &PromptSpec,
    design_idea: &str,
    code: &str,
    black_box: bool,
) -> Result<PromptBundle, ActionError> {
    if design_idea.trim().is_empty() {
        return Err(ActionError::EmptyInput("design idea"));
    }
    if code.trim().is_empty() {
        return Err(ActionError::EmptyInput("code"));
    }
    let spec = if black_box { spec.black_box() } else { spec.clone() };
    let template = environment().get_template("align").expect("template registered");
    let user_text = template
        .render(context! {
            task_description => spec.task_description,
            function_name => spec.function_name,
            function_description => spec.function_description,
            design_idea => design_idea,
            code => code,
        })
        .map_err(|e| ActionError::Template(e.to_string()))?;
    Ok(PromptBundle {
        system_text: None,
        user_text,
        action: ActionKind::Align,
        context_candidates: vec![ContextCandidate {
            code: code.to_string(),
            description: design_idea.to_string(),
            objective: None,
        }],
    })
}
