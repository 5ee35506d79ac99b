//! Shared fixtures and independent oracles for integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::path::PathBuf;

use planbench::generators::{generate_labeled, DomainId, GeneratorParams, LabeledProblem};
use planbench::pddl::{
    ground, parse_domain, parse_problem, Domain, GroundAtom, GroundTask, Problem, Term,
};
use planbench::planner::SearchLimits;
use rand::Rng;

pub fn data(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn load(domain: &str, problem: &str) -> (Domain, Problem, GroundTask) {
    let d = parse_domain(&data(domain)).unwrap();
    let p = parse_problem(&data(problem), &d).unwrap();
    let t = ground(&d, &p).unwrap();
    (d, p, t)
}

/// Parameters small enough for exhaustive search.
pub fn small_params<R: Rng>(domain: DomainId, rng: &mut R) -> GeneratorParams {
    use GeneratorParams as G;
    match domain {
        DomainId::Ferry => G::Ferry {
            cars: rng.gen_range(1..=3),
            locations: rng.gen_range(2..=3),
        },
        DomainId::Blocksworld => G::Blocksworld {
            blocks: rng.gen_range(2..=4),
        },
        DomainId::Miconic => G::Miconic {
            floors: rng.gen_range(2..=4),
            passengers: rng.gen_range(1..=3),
        },
        DomainId::Hanoi => G::Hanoi {
            disks: rng.gen_range(1..=4),
            pegs: 3,
            scrambled: rng.gen_bool(0.5),
        },
        DomainId::Grippers => G::Grippers {
            balls: rng.gen_range(1..=3),
            robots: 1,
            rooms: rng.gen_range(2..=3),
        },
        DomainId::Driverlog => G::Driverlog {
            locations: rng.gen_range(2..=3),
            drivers: 1,
            trucks: 1,
            packages: rng.gen_range(1..=2),
        },
    }
}

pub fn labeled(params: &GeneratorParams, seed: u64) -> LabeledProblem {
    generate_labeled(params, seed, &SearchLimits::default()).unwrap()
}

pub type AtomSet = BTreeSet<GroundAtom>;

/// Outcome of the reference simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub prefix: usize,
    pub failed: bool,
    pub satisficing: bool,
    pub degree: f64,
}

/// Executes a plan directly on the lifted model, with atom sets as states.
/// Steps are matched to schemas by name and arity, and arguments must be
/// declared objects of a compatible type.
pub fn simulate<S: AsRef<str>>(domain: &Domain, problem: &Problem, plan: &[S]) -> SimOutcome {
    let mut types: HashMap<&str, &str> = HashMap::new();
    for o in domain.constants.iter().chain(&problem.objects) {
        types.insert(&o.name, o.type_or_object());
    }
    let mut state: AtomSet = problem.init.iter().cloned().collect();
    let mut prefix = 0;
    let mut failed = false;
    'steps: for step in plan {
        let words: Vec<String> = step
            .as_ref()
            .split_whitespace()
            .map(str::to_lowercase)
            .collect();
        let Some(schema) = words.first().and_then(|n| domain.action(n)) else {
            failed = true;
            break;
        };
        let args = &words[1..];
        if args.len() != schema.parameters.len() {
            failed = true;
            break;
        }
        for (a, p) in args.iter().zip(&schema.parameters) {
            match types.get(a.as_str()) {
                Some(t) if domain.is_subtype(t, p.type_or_object()) => {}
                _ => {
                    failed = true;
                    break 'steps;
                }
            }
        }
        let bind = |atom: &planbench::pddl::Atom| GroundAtom {
            predicate: atom.predicate.clone(),
            args: atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => {
                        let i = schema.parameters.iter().position(|p| &p.name == v).unwrap();
                        args[i].clone()
                    }
                    Term::Const(c) => c.clone(),
                })
                .collect(),
        };
        if !schema.precondition.iter().all(|p| state.contains(&bind(p))) {
            failed = true;
            break;
        }
        let adds: Vec<GroundAtom> = schema.add_effects().map(bind).collect();
        for d in schema.del_effects() {
            state.remove(&bind(d));
        }
        state.extend(adds);
        prefix += 1;
    }
    let achieved = problem.goal.iter().filter(|g| state.contains(*g)).count();
    let degree = if problem.goal.is_empty() {
        1.0
    } else {
        achieved as f64 / problem.goal.len() as f64
    };
    SimOutcome {
        prefix,
        failed,
        satisficing: !failed && achieved == problem.goal.len(),
        degree,
    }
}

/// Optimal plan length by breadth-first search on the lifted model's
/// successor function (via the ground task), starting from `start`.
pub fn bfs_distance(
    task: &GroundTask,
    start: &planbench::pddl::State,
    cap: usize,
) -> Option<Option<u32>> {
    if task.is_goal(start) {
        return Some(Some(0));
    }
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start.clone(), 0u32)]);
    while let Some((s, d)) = queue.pop_front() {
        for a in task.actions() {
            if !a.precondition.iter().all(|f| s.contains(*f)) {
                continue;
            }
            let mut n = s.clone();
            for f in &a.del {
                n.remove(*f);
            }
            for f in &a.add {
                n.insert(*f);
            }
            if task.is_goal(&n) {
                return Some(Some(d + 1));
            }
            if seen.insert(n.clone()) {
                if seen.len() > cap {
                    return None;
                }
                queue.push_back((n, d + 1));
            }
        }
    }
    Some(None)
}

/// h_max by plain Bellman-Ford relaxation, independent of the planner's
/// priority-queue implementation. `None` is infinity.
pub fn hmax_fixpoint(task: &GroundTask, state: &planbench::pddl::State) -> Option<u32> {
    let mut cost: Vec<Option<u32>> = (0..task.num_facts())
        .map(|i| {
            state
                .contains(planbench::pddl::FactId(i as u32))
                .then_some(0)
        })
        .collect();
    loop {
        let mut changed = false;
        for a in task.actions() {
            let pre = a
                .precondition
                .iter()
                .try_fold(0u32, |m, f| cost[f.index()].map(|c| m.max(c)));
            let Some(pre) = pre else { continue };
            let c = pre + a.cost;
            for f in &a.add {
                if cost[f.index()].is_none_or(|old| c < old) {
                    cost[f.index()] = Some(c);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    task.goal()
        .iter()
        .try_fold(0u32, |m, g| cost[g.index()].map(|c| m.max(c)))
}

/// Every type-consistent instantiation of every schema, filtered to those
/// whose preconditions are reachable under the delete relaxation.
pub fn naive_grounding(domain: &Domain, problem: &Problem) -> (BTreeSet<String>, AtomSet) {
    let objects: Vec<(&str, &str)> = domain
        .constants
        .iter()
        .chain(&problem.objects)
        .map(|o| (o.name.as_str(), o.type_or_object()))
        .collect();
    let mut candidates = Vec::new();
    for schema in &domain.actions {
        let domains: Vec<Vec<&str>> = schema
            .parameters
            .iter()
            .map(|p| {
                objects
                    .iter()
                    .filter(|(_, t)| domain.is_subtype(t, p.type_or_object()))
                    .map(|(n, _)| *n)
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; domains.len()];
        if domains.iter().any(Vec::is_empty) {
            continue;
        }
        loop {
            let args: Vec<String> = idx
                .iter()
                .zip(&domains)
                .map(|(i, d)| d[*i].to_owned())
                .collect();
            let bind = |atom: &planbench::pddl::Atom| GroundAtom {
                predicate: atom.predicate.clone(),
                args: atom
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => args
                            [schema.parameters.iter().position(|p| &p.name == v).unwrap()]
                        .clone(),
                        Term::Const(c) => c.clone(),
                    })
                    .collect(),
            };
            let pre: Vec<GroundAtom> = schema.precondition.iter().map(bind).collect();
            let add: Vec<GroundAtom> = schema.add_effects().map(bind).collect();
            let name = std::iter::once(schema.name.clone())
                .chain(args.clone())
                .collect::<Vec<_>>()
                .join(" ");
            candidates.push((name, pre, add));
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break;
                }
                idx[k] += 1;
                if idx[k] < domains[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    let mut reached: AtomSet = problem.init.iter().cloned().collect();
    let mut names = BTreeSet::new();
    loop {
        let mut changed = false;
        for (name, pre, add) in &candidates {
            if pre.iter().all(|p| reached.contains(p)) {
                changed |= names.insert(name.clone());
                for a in add {
                    changed |= reached.insert(a.clone());
                }
            }
        }
        if !changed {
            return (names, reached);
        }
    }
}

/// A plan mutated by one swap, drop or duplicate of a random step, or left
/// as is when `kind` is 3.
pub fn perturb<R: Rng>(plan: &[String], kind: u8, rng: &mut R) -> Vec<String> {
    let mut p = plan.to_vec();
    if p.is_empty() {
        return p;
    }
    let i = rng.gen_range(0..p.len());
    match kind % 4 {
        0 => {
            let j = rng.gen_range(0..p.len());
            p.swap(i, j);
        }
        1 => {
            p.remove(i);
        }
        2 => {
            let s = p[i].clone();
            p.insert(i, s);
        }
        _ => {}
    }
    p
}
