//! Grounding of a domain/problem pair into a propositional STRIPS task.
//!
//! Instantiation is driven by delete-relaxed reachability from the initial
//! state: an instantiation is kept once all its preconditions are reachable,
//! so relaxed-unreachable actions and facts never enter the task.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{Atom, Domain, GroundAtom, Problem, Term};
use super::parser::validate_problem;
use super::state::{ActionId, FactId, State};
use super::PddlError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundAction {
    /// Lower-case `schema obj1 obj2 ...`.
    pub name: String,
    pub precondition: Vec<FactId>,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
    pub cost: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("action `{action}` is not applicable: missing {missing}")]
pub struct PreconditionViolation {
    pub action: String,
    pub missing: GroundAtom,
    pub missing_id: FactId,
}

/// Grounded task: fact table, ground actions, initial state and goal.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct GroundTask {
    facts: Vec<GroundAtom>,
    fact_ids: HashMap<GroundAtom, FactId>,
    actions: Vec<GroundAction>,
    action_ids: HashMap<String, ActionId>,
    init: Vec<FactId>,
    goal: Vec<FactId>,
    relaxed_solvable: bool,
}

/// Lower-cases an action name and collapses internal whitespace.
pub fn normalize_action_name(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

impl GroundTask {
    /// Builds a task directly from its parts. Ids must index `facts`.
    pub fn from_parts(
        facts: Vec<GroundAtom>,
        actions: Vec<GroundAction>,
        init: Vec<FactId>,
        goal: Vec<FactId>,
    ) -> Self {
        let fact_ids = facts
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), FactId(i as u32)))
            .collect();
        let action_ids = actions
            .iter()
            .enumerate()
            .map(|(i, a)| (normalize_action_name(&a.name), ActionId(i as u32)))
            .collect();
        let mut init = init;
        init.sort();
        init.dedup();
        let mut goal = goal;
        goal.sort();
        goal.dedup();
        let mut task = GroundTask {
            facts,
            fact_ids,
            actions,
            action_ids,
            init,
            goal,
            relaxed_solvable: true,
        };
        task.relaxed_solvable = task.compute_relaxed_solvable();
        task
    }

    fn compute_relaxed_solvable(&self) -> bool {
        let mut reached = self.initial_state();
        loop {
            let mut changed = false;
            for a in &self.actions {
                if reached.is_superset_of(&a.precondition) {
                    for &f in &a.add {
                        if !reached.contains(f) {
                            reached.insert(f);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return reached.is_superset_of(&self.goal);
            }
        }
    }

    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }

    pub fn facts(&self) -> &[GroundAtom] {
        &self.facts
    }

    pub fn fact(&self, id: FactId) -> &GroundAtom {
        &self.facts[id.index()]
    }

    pub fn fact_id(&self, atom: &GroundAtom) -> Option<FactId> {
        self.fact_ids.get(atom).copied()
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id.index()]
    }

    /// Looks up a ground action by name, case- and spacing-insensitively.
    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.action_ids.get(&normalize_action_name(name)).copied()
    }

    pub fn init(&self) -> &[FactId] {
        &self.init
    }

    pub fn goal(&self) -> &[FactId] {
        &self.goal
    }

    /// False when some goal fact is unreachable even ignoring deletes.
    pub fn relaxed_solvable(&self) -> bool {
        self.relaxed_solvable
    }

    pub fn initial_state(&self) -> State {
        State::from_facts(self.facts.len(), self.init.iter().copied())
    }

    pub fn is_goal(&self, state: &State) -> bool {
        state.is_superset_of(&self.goal)
    }

    pub fn is_applicable(&self, state: &State, action: ActionId) -> bool {
        state.is_superset_of(&self.actions[action.index()].precondition)
    }

    /// Successor state `(state \ del) ∪ add`.
    pub fn apply(&self, state: &State, action: ActionId) -> Result<State, PreconditionViolation> {
        let a = &self.actions[action.index()];
        if let Some(&missing) = a.precondition.iter().find(|f| !state.contains(**f)) {
            return Err(PreconditionViolation {
                action: a.name.clone(),
                missing: self.fact(missing).clone(),
                missing_id: missing,
            });
        }
        Ok(self.apply_unchecked(state, action))
    }

    pub(crate) fn apply_unchecked(&self, state: &State, action: ActionId) -> State {
        let a = &self.actions[action.index()];
        let mut next = state.clone();
        for &f in &a.del {
            next.remove(f);
        }
        for &f in &a.add {
            next.insert(f);
        }
        next
    }

    /// Maps a set of ground atoms to a state, failing on atoms outside the table.
    pub fn state_from_atoms<'a>(
        &self,
        atoms: impl IntoIterator<Item = &'a GroundAtom>,
    ) -> Option<State> {
        let mut s = State::empty(self.facts.len());
        for a in atoms {
            s.insert(self.fact_id(a)?);
        }
        Some(s)
    }
}

#[derive(Clone, Copy)]
enum Arg {
    Param(usize),
    Obj(u32),
}

struct CompiledAtom {
    pred: usize,
    args: Vec<Arg>,
}

struct CompiledSchema {
    num_params: usize,
    candidates: Vec<Vec<u32>>,
    allowed: Vec<Vec<bool>>,
    pre: Vec<CompiledAtom>,
    add: Vec<CompiledAtom>,
    del: Vec<CompiledAtom>,
}

type Tuple = Vec<u32>;

struct Reached {
    sets: Vec<HashSet<Tuple>>,
    lists: Vec<Vec<Tuple>>,
}

impl Reached {
    fn insert(&mut self, pred: usize, t: Tuple) -> bool {
        if self.sets[pred].insert(t.clone()) {
            self.lists[pred].push(t);
            true
        } else {
            false
        }
    }
}

fn instantiate(atom: &CompiledAtom, binding: &[u32]) -> Tuple {
    atom.args
        .iter()
        .map(|a| match *a {
            Arg::Param(p) => binding[p],
            Arg::Obj(o) => o,
        })
        .collect()
}

fn enumerate_bindings(
    schema: &CompiledSchema,
    depth: usize,
    binding: &mut Vec<Option<u32>>,
    reached: &Reached,
    out: &mut Vec<Tuple>,
) {
    if depth == schema.pre.len() {
        enumerate_free(schema, 0, binding, out);
        return;
    }
    let atom = &schema.pre[depth];
    'tuples: for t in &reached.lists[atom.pred] {
        let mut newly_bound = Vec::new();
        for (arg, &obj) in atom.args.iter().zip(t) {
            let ok = match *arg {
                Arg::Obj(o) => o == obj,
                Arg::Param(p) => match binding[p] {
                    Some(b) => b == obj,
                    None if schema.allowed[p][obj as usize] => {
                        binding[p] = Some(obj);
                        newly_bound.push(p);
                        true
                    }
                    None => false,
                },
            };
            if !ok {
                for p in newly_bound {
                    binding[p] = None;
                }
                continue 'tuples;
            }
        }
        enumerate_bindings(schema, depth + 1, binding, reached, out);
        for p in newly_bound {
            binding[p] = None;
        }
    }
}

fn enumerate_free(
    schema: &CompiledSchema,
    p: usize,
    binding: &mut Vec<Option<u32>>,
    out: &mut Vec<Tuple>,
) {
    if p == schema.num_params {
        out.push(binding.iter().map(|b| b.expect("bound")).collect());
        return;
    }
    if binding[p].is_some() {
        enumerate_free(schema, p + 1, binding, out);
        return;
    }
    for &o in &schema.candidates[p] {
        binding[p] = Some(o);
        enumerate_free(schema, p + 1, binding, out);
    }
    binding[p] = None;
}

/// Grounds `problem` against `domain`.
pub fn ground(domain: &Domain, problem: &Problem) -> Result<GroundTask, PddlError> {
    validate_problem(problem, domain)?;

    let objects: Vec<(&str, &str)> = domain
        .constants
        .iter()
        .chain(&problem.objects)
        .map(|o| (o.name.as_str(), o.type_or_object()))
        .collect();
    let obj_index: HashMap<&str, u32> = objects
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (*n, i as u32))
        .collect();
    let pred_index: HashMap<&str, usize> = domain
        .predicates
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), i))
        .collect();

    let schemas: Vec<CompiledSchema> = domain
        .actions
        .iter()
        .map(|a| {
            let param_index: HashMap<&str, usize> = a
                .parameters
                .iter()
                .enumerate()
                .map(|(i, p)| (p.name.as_str(), i))
                .collect();
            let compile = |atom: &Atom| CompiledAtom {
                pred: pred_index[atom.predicate.as_str()],
                args: atom
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Arg::Param(param_index[v.as_str()]),
                        Term::Const(c) => Arg::Obj(obj_index[c.as_str()]),
                    })
                    .collect(),
            };
            let allowed: Vec<Vec<bool>> = a
                .parameters
                .iter()
                .map(|p| {
                    objects
                        .iter()
                        .map(|(_, t)| domain.is_subtype(t, p.type_or_object()))
                        .collect()
                })
                .collect();
            let candidates = allowed
                .iter()
                .map(|row| (0..row.len() as u32).filter(|&o| row[o as usize]).collect())
                .collect();
            CompiledSchema {
                num_params: a.parameters.len(),
                candidates,
                allowed,
                pre: a.precondition.iter().map(compile).collect(),
                add: a.add_effects().map(compile).collect(),
                del: a.del_effects().map(compile).collect(),
            }
        })
        .collect();

    let to_tuple = |atom: &GroundAtom| -> (usize, Tuple) {
        (
            pred_index[atom.predicate.as_str()],
            atom.args.iter().map(|a| obj_index[a.as_str()]).collect(),
        )
    };

    let mut reached = Reached {
        sets: vec![HashSet::new(); domain.predicates.len()],
        lists: vec![Vec::new(); domain.predicates.len()],
    };
    for atom in &problem.init {
        let (p, t) = to_tuple(atom);
        reached.insert(p, t);
    }

    let mut seen: HashSet<(usize, Tuple)> = HashSet::new();
    let mut instantiations: Vec<(usize, Tuple)> = Vec::new();
    loop {
        let mut fresh = Vec::new();
        for (si, schema) in schemas.iter().enumerate() {
            let mut out = Vec::new();
            let mut binding = vec![None; schema.num_params];
            enumerate_bindings(schema, 0, &mut binding, &reached, &mut out);
            for b in out {
                if seen.insert((si, b.clone())) {
                    fresh.push((si, b));
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        for (si, b) in &fresh {
            for atom in &schemas[*si].add {
                reached.insert(atom.pred, instantiate(atom, b));
            }
        }
        instantiations.extend(fresh);
    }

    let name_of = |pred: usize, t: &Tuple| GroundAtom {
        predicate: domain.predicates[pred].name.clone(),
        args: t
            .iter()
            .map(|&o| objects[o as usize].0.to_owned())
            .collect(),
    };
    let mut facts: Vec<GroundAtom> = reached
        .lists
        .iter()
        .enumerate()
        .flat_map(|(p, ts)| ts.iter().map(move |t| (p, t)))
        .map(|(p, t)| name_of(p, t))
        .collect();
    for g in &problem.goal {
        let (p, t) = to_tuple(g);
        if !reached.sets[p].contains(&t) {
            facts.push(g.clone());
        }
    }
    facts.sort();
    facts.dedup();
    let fact_ids: HashMap<GroundAtom, FactId> = facts
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), FactId(i as u32)))
        .collect();
    let lookup = |pred: usize, t: &Tuple| fact_ids.get(&name_of(pred, t)).copied();

    let mut keyed: Vec<(usize, Vec<&str>, GroundAction)> = instantiations
        .into_iter()
        .map(|(si, b)| {
            let schema = &schemas[si];
            let ids = |atoms: &[CompiledAtom]| -> Vec<FactId> {
                let mut v: Vec<FactId> = atoms
                    .iter()
                    .filter_map(|a| lookup(a.pred, &instantiate(a, &b)))
                    .collect();
                v.sort();
                v.dedup();
                v
            };
            let precondition = ids(&schema.pre);
            let add = ids(&schema.add);
            let del: Vec<FactId> = ids(&schema.del)
                .into_iter()
                .filter(|f| add.binary_search(f).is_err())
                .collect();
            let arg_names: Vec<&str> = b.iter().map(|&o| objects[o as usize].0).collect();
            let mut name = domain.actions[si].name.clone();
            for n in &arg_names {
                name.push(' ');
                name.push_str(n);
            }
            (
                si,
                arg_names,
                GroundAction {
                    name,
                    precondition,
                    add,
                    del,
                    cost: 1,
                },
            )
        })
        .collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let actions = keyed.into_iter().map(|(_, _, a)| a).collect();

    let init = problem.init.iter().map(|a| fact_ids[a]).collect();
    let goal = problem.goal.iter().map(|a| fact_ids[a]).collect();
    Ok(GroundTask::from_parts(facts, actions, init, goal))
}
