use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pddl::{ActionId, GroundTask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleOutcome {
    Optimal(u32),
    Unsolvable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("breadth-first oracle exceeded its cap of {cap} states")]
pub struct OracleError {
    pub cap: usize,
}

/// Exhaustive breadth-first search over the reachable state space.
///
/// Only valid for unit-cost tasks, which is all this crate produces.
pub fn bfs_oracle(task: &GroundTask, cap: usize) -> Result<OracleOutcome, OracleError> {
    let init = task.initial_state();
    if task.is_goal(&init) {
        return Ok(OracleOutcome::Optimal(0));
    }
    let mut seen = HashSet::new();
    seen.insert(init.clone());
    let mut frontier = VecDeque::from([(init, 0u32)]);
    while let Some((state, depth)) = frontier.pop_front() {
        for ai in 0..task.actions().len() {
            let Ok(next) = task.apply(&state, ActionId(ai as u32)) else {
                continue;
            };
            if task.is_goal(&next) {
                return Ok(OracleOutcome::Optimal(depth + 1));
            }
            if seen.insert(next.clone()) {
                if seen.len() > cap {
                    return Err(OracleError { cap });
                }
                frontier.push_back((next, depth + 1));
            }
        }
    }
    Ok(OracleOutcome::Unsolvable)
}
