//! Optimal planning: A* with LM-Cut, h_max or blind heuristics, and a
//! breadth-first oracle for cross-checking.

mod astar;
mod bfs;
mod relaxed;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pddl::{ActionId, GroundTask, State};

pub use bfs::{bfs_oracle, OracleError, OracleOutcome};
pub use relaxed::{HValue, RelaxedTask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    Lmcut,
    Hmax,
    Blind,
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lmcut" | "lm-cut" => Ok(Heuristic::Lmcut),
            "hmax" | "h_max" => Ok(Heuristic::Hmax),
            "blind" => Ok(Heuristic::Blind),
            other => Err(format!(
                "unknown heuristic `{other}` (expected lmcut, hmax or blind)"
            )),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::Lmcut => "lmcut",
            Heuristic::Hmax => "hmax",
            Heuristic::Blind => "blind",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("search limits must be strictly positive: {0}")]
pub struct InvalidLimits(&'static str);

/// Resource bounds for one search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_generated: u64,
    pub time_budget: Duration,
    /// Soft bound on memory spent on stored states, in MiB.
    pub memory_hint_mb: u64,
}

impl SearchLimits {
    pub fn new(
        max_generated: u64,
        time_budget: Duration,
        memory_hint_mb: u64,
    ) -> Result<Self, InvalidLimits> {
        if max_generated == 0 {
            return Err(InvalidLimits("max_generated"));
        }
        if time_budget.is_zero() {
            return Err(InvalidLimits("time_budget"));
        }
        if memory_hint_mb == 0 {
            return Err(InvalidLimits("memory_hint_mb"));
        }
        Ok(SearchLimits {
            max_generated,
            time_budget,
            memory_hint_mb,
        })
    }

    pub(crate) fn max_stored_states(&self, num_facts: usize) -> usize {
        // bitset + map entry + node bookkeeping
        let per_state = 2 * num_facts.div_ceil(64) * 8 + 96;
        ((self.memory_hint_mb as usize) << 20) / per_state
    }
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_generated: 5_000_000,
            time_budget: Duration::from_secs(120),
            memory_hint_mb: 2048,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Solved,
    Unsolvable,
    LimitExceeded,
}

/// Outcome of a search with its statistics. The plan is empty unless solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub status: SearchStatus,
    pub plan: Vec<String>,
    #[serde(skip)]
    pub actions: Vec<ActionId>,
    pub cost: u32,
    pub generated: u64,
    pub evaluated: u64,
    pub expanded: u64,
    pub seconds: f64,
}

impl PlanResult {
    fn new(
        task: &GroundTask,
        status: SearchStatus,
        actions: Vec<ActionId>,
        generated: u64,
        evaluated: u64,
        expanded: u64,
        elapsed: Duration,
    ) -> Self {
        let cost = actions.iter().map(|a| task.action(*a).cost).sum();
        PlanResult {
            status,
            plan: actions
                .iter()
                .map(|a| task.action(*a).name.clone())
                .collect(),
            actions,
            cost,
            generated,
            evaluated,
            expanded,
            seconds: elapsed.as_secs_f64(),
        }
    }

    pub fn is_solved(&self) -> bool {
        self.status == SearchStatus::Solved
    }
}

/// A* search. With `lmcut` or `hmax` (both admissible) a solved result is optimal.
pub fn solve(task: &GroundTask, heuristic: Heuristic, limits: &SearchLimits) -> PlanResult {
    astar::astar(task, heuristic, limits)
}

/// h_max of `state` under unit costs; `None` is infinity.
pub fn hmax(task: &GroundTask, state: &State) -> HValue {
    RelaxedTask::new(task).hmax(state)
}

/// LM-Cut value of `state`; `None` is infinity.
pub fn lmcut(task: &GroundTask, state: &State) -> HValue {
    RelaxedTask::new(task).lmcut(state)
}
