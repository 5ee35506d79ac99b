//! VAL-style plan verification and per-plan scoring.
//!
//! Execution stops at the first unknown or inapplicable action; the degree
//! of correctness is measured on the state reached by the executable prefix.

use serde::{Deserialize, Serialize};

use crate::pddl::{FactId, GroundAtom, GroundTask};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepFailure {
    /// The step does not name a ground action of the task (unknown schema,
    /// wrong arity, undeclared object, or relaxed-unreachable instance).
    UnknownAction { step: usize, name: String },
    PreconditionUnmet {
        step: usize,
        action: String,
        missing: GroundAtom,
    },
}

impl StepFailure {
    pub fn step(&self) -> usize {
        match self {
            StepFailure::UnknownAction { step, .. }
            | StepFailure::PreconditionUnmet { step, .. } => *step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub plan_length: usize,
    pub executable_prefix_len: usize,
    pub satisficing: bool,
    pub failure: Option<StepFailure>,
    pub final_state: Vec<FactId>,
    pub goals_achieved: usize,
    pub goals_total: usize,
    pub degree_of_correctness: f64,
    pub optimal: Option<bool>,
}

impl ValidationReport {
    /// Records optimality against a known optimal cost.
    pub fn with_optimal_cost(mut self, optimal_cost: u32) -> Self {
        self.optimal = Some(is_optimal(&self, optimal_cost));
        self
    }
}

/// Executes `plan` from the initial state of `task` and scores the result.
pub fn validate<S: AsRef<str>>(plan: &[S], task: &GroundTask) -> ValidationReport {
    let mut state = task.initial_state();
    let mut failure = None;
    let mut executed = 0;
    for (step, name) in plan.iter().enumerate() {
        let name = name.as_ref();
        let Some(id) = task.action_id(name) else {
            failure = Some(StepFailure::UnknownAction {
                step,
                name: name.to_owned(),
            });
            break;
        };
        let action = task.action(id);
        if let Some(&missing) = action.precondition.iter().find(|f| !state.contains(**f)) {
            failure = Some(StepFailure::PreconditionUnmet {
                step,
                action: action.name.clone(),
                missing: task.fact(missing).clone(),
            });
            break;
        }
        for &f in &action.del {
            state.remove(f);
        }
        for &f in &action.add {
            state.insert(f);
        }
        executed += 1;
    }
    let goals_total = task.goal().len();
    let goals_achieved = task.goal().iter().filter(|g| state.contains(**g)).count();
    let degree_of_correctness = if goals_total == 0 {
        1.0
    } else {
        goals_achieved as f64 / goals_total as f64
    };
    ValidationReport {
        plan_length: plan.len(),
        executable_prefix_len: executed,
        satisficing: failure.is_none() && goals_achieved == goals_total,
        failure,
        final_state: state.to_vec(),
        goals_achieved,
        goals_total,
        degree_of_correctness,
        optimal: None,
    }
}

/// True iff the plan is satisficing and its length equals the optimal cost.
pub fn is_optimal(report: &ValidationReport, optimal_cost: u32) -> bool {
    report.satisficing && report.plan_length == optimal_cost as usize
}
