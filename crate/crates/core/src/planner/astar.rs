use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use super::relaxed::{HValue, RelaxedTask};
use super::{Heuristic, PlanResult, SearchLimits, SearchStatus};
use crate::pddl::{ActionId, GroundTask, State};

struct Node {
    g: u32,
    h: u32,
    parent: Option<(u32, ActionId)>,
    closed: bool,
}

/// Open-list key: lowest f, then highest g, then oldest insertion.
type OpenKey = Reverse<(u32, Reverse<u32>, u64)>;

/// A* with reopening of closed nodes.
pub(super) fn astar(task: &GroundTask, heuristic: Heuristic, limits: &SearchLimits) -> PlanResult {
    let started = Instant::now();
    let relaxed = match heuristic {
        Heuristic::Blind => None,
        _ => Some(RelaxedTask::new(task)),
    };
    let evaluate = |s: &State| -> HValue {
        match (&relaxed, heuristic) {
            (None, _) => Some(0),
            (Some(r), Heuristic::Hmax) => r.hmax(s),
            (Some(r), _) => r.lmcut(s),
        }
    };
    let max_nodes = limits.max_stored_states(task.num_facts());

    let mut states: Vec<State> = Vec::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut index: HashMap<State, u32> = HashMap::new();
    let mut open: BinaryHeap<(OpenKey, u32)> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut generated = 1u64;
    let mut evaluated = 1u64;
    let mut expanded = 0u64;

    let finish = |status, plan: Vec<ActionId>, generated, evaluated, expanded| {
        PlanResult::new(
            task,
            status,
            plan,
            generated,
            evaluated,
            expanded,
            started.elapsed(),
        )
    };

    let init = task.initial_state();
    let h0 = match evaluate(&init) {
        Some(h) => h,
        None => {
            return finish(
                SearchStatus::Unsolvable,
                vec![],
                generated,
                evaluated,
                expanded,
            )
        }
    };
    index.insert(init.clone(), 0);
    states.push(init);
    nodes.push(Node {
        g: 0,
        h: h0,
        parent: None,
        closed: false,
    });
    open.push((Reverse((h0, Reverse(0), seq)), 0));

    while let Some((Reverse((_, Reverse(g), _)), id)) = open.pop() {
        let node = &nodes[id as usize];
        if node.closed || g != node.g {
            continue;
        }
        nodes[id as usize].closed = true;
        let state = states[id as usize].clone();
        if task.is_goal(&state) {
            let mut plan = Vec::new();
            let mut cur = id;
            while let Some((p, a)) = nodes[cur as usize].parent {
                plan.push(a);
                cur = p;
            }
            plan.reverse();
            return finish(SearchStatus::Solved, plan, generated, evaluated, expanded);
        }
        expanded += 1;
        if expanded.is_multiple_of(256) && started.elapsed() > limits.time_budget {
            return finish(
                SearchStatus::LimitExceeded,
                vec![],
                generated,
                evaluated,
                expanded,
            );
        }
        for (ai, action) in task.actions().iter().enumerate() {
            if !state.is_superset_of(&action.precondition) {
                continue;
            }
            let aid = ActionId(ai as u32);
            let succ = task.apply_unchecked(&state, aid);
            generated += 1;
            let new_g = g + action.cost;
            match index.entry(succ) {
                Entry::Occupied(e) => {
                    let sid = *e.get();
                    let n = &mut nodes[sid as usize];
                    if n.h != u32::MAX && new_g < n.g {
                        n.g = new_g;
                        n.parent = Some((id, aid));
                        n.closed = false;
                        seq += 1;
                        open.push((Reverse((new_g + n.h, Reverse(new_g), seq)), sid));
                    }
                }
                Entry::Vacant(e) => {
                    let h = evaluate(e.key());
                    evaluated += 1;
                    let sid = states.len() as u32;
                    states.push(e.key().clone());
                    e.insert(sid);
                    nodes.push(Node {
                        g: new_g,
                        h: h.unwrap_or(u32::MAX),
                        parent: Some((id, aid)),
                        closed: h.is_none(),
                    });
                    if let Some(h) = h {
                        seq += 1;
                        open.push((Reverse((new_g + h, Reverse(new_g), seq)), sid));
                    }
                }
            }
            if generated >= limits.max_generated || states.len() >= max_nodes {
                return finish(
                    SearchStatus::LimitExceeded,
                    vec![],
                    generated,
                    evaluated,
                    expanded,
                );
            }
        }
    }
    finish(
        SearchStatus::Unsolvable,
        vec![],
        generated,
        evaluated,
        expanded,
    )
}
