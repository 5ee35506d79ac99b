use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::DomainId;
use crate::pddl::sexpr::{self, SExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptMode {
    ZeroShot,
    FewShot,
}

/// A solved problem shown to the model before the query problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptExample {
    pub problem_text: String,
    pub plan: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub mode: PromptMode,
    pub example: Option<PromptExample>,
}

impl PromptTemplate {
    pub fn zero_shot() -> Self {
        PromptTemplate {
            mode: PromptMode::ZeroShot,
            example: None,
        }
    }

    pub fn few_shot(example: PromptExample) -> Self {
        PromptTemplate {
            mode: PromptMode::FewShot,
            example: Some(example),
        }
    }
}

pub const ZERO_SHOT_INSTRUCTION: &str = "Generate the plan for this PDDL domain and problem:";
pub const FEW_SHOT_INSTRUCTION: &str =
    "Generate the plan for this new problem from the same domain:";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("few-shot prompt needs an example")]
    MissingExample,
    #[error("example problem is for domain `{example}` but the query is for `{query}`")]
    DomainMismatch { example: String, query: String },
    #[error("cannot read {what}: {message}")]
    Unreadable { what: &'static str, message: String },
}

/// Reads `(define (domain X) ...)` or the `(:domain X)` of a problem.
fn declared_domain(text: &str, what: &'static str) -> Result<String, PromptError> {
    let unreadable = |message: String| PromptError::Unreadable { what, message };
    let expr = sexpr::parse(text).map_err(|e| unreadable(e.to_string()))?;
    let items = expr
        .as_list()
        .ok_or_else(|| unreadable("not a list".into()))?;
    for item in items.iter().skip(1) {
        if let Some([SExpr::Atom(head, _), SExpr::Atom(name, _), ..]) = item.as_list() {
            if head == "domain" || head == ":domain" {
                return Ok(name.clone());
            }
        }
    }
    Err(unreadable("no domain name".into()))
}

fn display_name(domain: &str) -> String {
    match DomainId::from_domain_name(domain) {
        Some(d) => d.display_name().to_owned(),
        None => {
            let mut c = domain.chars();
            c.next()
                .map(|f| f.to_uppercase().chain(c).collect())
                .unwrap_or_default()
        }
    }
}

/// Renders a prompt from verbatim domain and problem PDDL text.
pub fn render_prompt(
    template: &PromptTemplate,
    domain_text: &str,
    problem_text: &str,
) -> Result<String, PromptError> {
    let domain = declared_domain(domain_text, "domain")?;
    let name = display_name(&domain);
    let (d, p) = (domain_text.trim_end(), problem_text.trim_end());
    match template.mode {
        PromptMode::ZeroShot => Ok(format!(
            "The following are the PDDL Domain and Problem files for a classical planning domain - {name}.\n\n\
             PDDL Domain:\n{d}\n\nPDDL Problem:\n{p}\n{ZERO_SHOT_INSTRUCTION}"
        )),
        PromptMode::FewShot => {
            let ex = template.example.as_ref().ok_or(PromptError::MissingExample)?;
            let example = declared_domain(&ex.problem_text, "example problem")?;
            let query = declared_domain(problem_text, "problem")?;
            if example != query || query != domain {
                return Err(PromptError::DomainMismatch { example, query });
            }
            let ex_problem = ex.problem_text.trim_end();
            let plan = ex.plan.join(", ");
            Ok(format!(
                "The following is a plan generated for the PDDL Domain and Problem of a classical planning domain - {name}.\n\n\
                 PDDL Domain:\n{d}\n\nPDDL Problem:\n{ex_problem}\n\nPlan:\n{plan}\n\n\
                 {FEW_SHOT_INSTRUCTION}\n\nNew PDDL Problem:\n{p}\n\nPlan:\n"
            ))
        }
    }
}
