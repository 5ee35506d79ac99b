//! Delete-relaxation heuristics: h_max and LM-Cut.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::pddl::{GroundTask, State};

/// Heuristic value; `None` stands for infinity (dead end).
pub type HValue = Option<u32>;

const INF: u32 = u32::MAX;

struct RelaxedOp {
    pre: Vec<u32>,
    eff: Vec<u32>,
    cost: u32,
}

/// Relaxed view of a task, with an artificial precondition fact (for
/// actions without preconditions) and an artificial goal fact reached by a
/// zero-cost goal operator.
pub struct RelaxedTask {
    ops: Vec<RelaxedOp>,
    num_facts: usize,
    pre_of: Vec<Vec<u32>>,
    achievers: Vec<Vec<u32>>,
    artificial_pre: u32,
    goal_fact: u32,
}

/// Scratch result of one h_max exploration.
struct Exploration {
    fact_cost: Vec<u32>,
    supporter: Vec<Option<u32>>,
}

impl RelaxedTask {
    pub fn new(task: &GroundTask) -> Self {
        let n = task.num_facts();
        let artificial_pre = n as u32;
        let goal_fact = n as u32 + 1;
        let num_facts = n + 2;
        let mut ops: Vec<RelaxedOp> = task
            .actions()
            .iter()
            .map(|a| {
                let mut pre: Vec<u32> = a.precondition.iter().map(|f| f.0).collect();
                if pre.is_empty() {
                    pre.push(artificial_pre);
                }
                RelaxedOp {
                    pre,
                    eff: a.add.iter().map(|f| f.0).collect(),
                    cost: a.cost,
                }
            })
            .collect();
        let mut goal_pre: Vec<u32> = task.goal().iter().map(|f| f.0).collect();
        if goal_pre.is_empty() {
            goal_pre.push(artificial_pre);
        }
        ops.push(RelaxedOp {
            pre: goal_pre,
            eff: vec![goal_fact],
            cost: 0,
        });
        let mut pre_of = vec![Vec::new(); num_facts];
        let mut achievers = vec![Vec::new(); num_facts];
        for (i, op) in ops.iter().enumerate() {
            for &p in &op.pre {
                pre_of[p as usize].push(i as u32);
            }
            for &e in &op.eff {
                achievers[e as usize].push(i as u32);
            }
        }
        RelaxedTask {
            ops,
            num_facts,
            pre_of,
            achievers,
            artificial_pre,
            goal_fact,
        }
    }

    fn base_costs(&self) -> Vec<u32> {
        self.ops.iter().map(|o| o.cost).collect()
    }

    /// Dijkstra-style h_max fixpoint under `costs`. Each reached operator's
    /// supporter is its most expensive precondition, lowest fact id on ties.
    fn explore(&self, state: &State, costs: &[u32]) -> Exploration {
        let mut fact_cost = vec![INF; self.num_facts];
        let mut settled = vec![false; self.num_facts];
        let mut unsatisfied: Vec<u32> = self.ops.iter().map(|o| o.pre.len() as u32).collect();
        let mut supporter = vec![None; self.ops.len()];
        let mut heap = BinaryHeap::new();

        for f in state
            .iter()
            .map(|f| f.0)
            .chain(std::iter::once(self.artificial_pre))
        {
            if (f as usize) < self.num_facts && fact_cost[f as usize] != 0 {
                fact_cost[f as usize] = 0;
                heap.push(Reverse((0u32, f)));
            }
        }
        while let Some(Reverse((c, f))) = heap.pop() {
            let fi = f as usize;
            if settled[fi] || c > fact_cost[fi] {
                continue;
            }
            settled[fi] = true;
            for &oi in &self.pre_of[fi] {
                let o = oi as usize;
                unsatisfied[o] -= 1;
                if unsatisfied[o] > 0 {
                    continue;
                }
                let op = &self.ops[o];
                let mut best = op.pre[0];
                for &p in &op.pre[1..] {
                    let (cp, cb) = (fact_cost[p as usize], fact_cost[best as usize]);
                    if cp > cb || (cp == cb && p < best) {
                        best = p;
                    }
                }
                supporter[o] = Some(best);
                let reach = fact_cost[best as usize] + costs[o];
                for &e in &op.eff {
                    if reach < fact_cost[e as usize] {
                        fact_cost[e as usize] = reach;
                        heap.push(Reverse((reach, e)));
                    }
                }
            }
        }
        Exploration {
            fact_cost,
            supporter,
        }
    }

    /// h_max of `state` under unit action costs.
    pub fn hmax(&self, state: &State) -> HValue {
        let ex = self.explore(state, &self.base_costs());
        match ex.fact_cost[self.goal_fact as usize] {
            INF => None,
            c => Some(c),
        }
    }

    /// LM-Cut value of `state`.
    pub fn lmcut(&self, state: &State) -> HValue {
        let mut costs = self.base_costs();
        let mut total = 0u32;
        let mut zone = vec![false; self.num_facts];
        let mut before = vec![false; self.num_facts];
        let mut in_cut = vec![false; self.ops.len()];
        let mut first = true;
        loop {
            let ex = self.explore(state, &costs);
            let goal_cost = ex.fact_cost[self.goal_fact as usize];
            if goal_cost == INF {
                debug_assert!(first, "cost reduction cannot make the goal unreachable");
                return None;
            }
            first = false;
            if goal_cost == 0 {
                return Some(total);
            }

            // Goal zone: facts from which the goal is reached through
            // zero-cost supporter edges.
            zone.iter_mut().for_each(|z| *z = false);
            let mut stack = vec![self.goal_fact];
            zone[self.goal_fact as usize] = true;
            while let Some(f) = stack.pop() {
                for &oi in &self.achievers[f as usize] {
                    let o = oi as usize;
                    if costs[o] != 0 {
                        continue;
                    }
                    if let Some(s) = ex.supporter[o] {
                        if !zone[s as usize] {
                            zone[s as usize] = true;
                            stack.push(s);
                        }
                    }
                }
            }

            // Forward sweep from the state along supporter edges, stopping
            // at operators that enter the goal zone; those form the cut.
            before.iter_mut().for_each(|b| *b = false);
            let mut cut = Vec::new();
            let mut queue: Vec<u32> = Vec::new();
            for f in state
                .iter()
                .map(|f| f.0)
                .chain(std::iter::once(self.artificial_pre))
            {
                if !before[f as usize] {
                    before[f as usize] = true;
                    queue.push(f);
                }
            }
            while let Some(f) = queue.pop() {
                for &oi in &self.pre_of[f as usize] {
                    let o = oi as usize;
                    if ex.supporter[o] != Some(f) {
                        continue;
                    }
                    let op = &self.ops[o];
                    if op.eff.iter().any(|&e| zone[e as usize]) {
                        if !in_cut[o] {
                            in_cut[o] = true;
                            cut.push(o);
                        }
                    } else {
                        for &e in &op.eff {
                            if !before[e as usize] {
                                before[e as usize] = true;
                                queue.push(e);
                            }
                        }
                    }
                }
            }

            let landmark_cost = cut.iter().map(|&o| costs[o]).min().expect("nonempty cut");
            debug_assert!(landmark_cost > 0);
            total += landmark_cost;
            for &o in &cut {
                costs[o] -= landmark_cost;
                in_cut[o] = false;
            }
        }
    }
}
