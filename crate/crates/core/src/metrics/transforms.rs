use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{
    canonical_hash, derive_seed, generate_labeled, DatasetRecord, DomainId, Split,
};
use crate::pddl::{Domain, GroundAtom, Problem, TypedName};
use crate::planner::SearchLimits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthTarget {
    AtLeast(usize),
    AtMost(usize),
}

impl LengthTarget {
    fn accepts(self, len: usize) -> bool {
        match self {
            LengthTarget::AtLeast(l) => len >= l,
            LengthTarget::AtMost(l) => len <= l,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LengthGenError {
    #[error("no training records for {0}")]
    NoTrainingData(DomainId),
    #[error("length {length} lies inside the training range [{min}, {max}]")]
    InsideTrainingRange {
        length: usize,
        min: usize,
        max: usize,
    },
    #[error(
        "found only {found} of {requested} problems with the target length within parameter bounds"
    )]
    Unreachable { found: usize, requested: usize },
}

/// Count that grows plan length fastest, by position in `counts()`.
fn growth_index(domain: DomainId) -> usize {
    match domain {
        DomainId::Miconic => 1,
        DomainId::Driverlog => 3,
        _ => 0,
    }
}

const LEVELS: i64 = 16;
const TRIES_PER_LEVEL: usize = 48;

/// Emits `count` problems whose optimal plan length lies outside the
/// training range: `≥ length` above it, `≤ length` below it.
///
/// The search starts at the training parameter bound and moves the
/// domain's main size count one step per level (up or down), trying a
/// fixed number of seeds per level. Problems seen in training are skipped.
pub fn length_generalization_split(
    train: &[DatasetRecord],
    domain: DomainId,
    length: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<DatasetRecord>, LengthGenError> {
    let own: Vec<&DatasetRecord> = train.iter().filter(|r| r.domain == domain).collect();
    let (Some(min), Some(max)) = (
        own.iter().map(|r| r.plan_length).min(),
        own.iter().map(|r| r.plan_length).max(),
    ) else {
        return Err(LengthGenError::NoTrainingData(domain));
    };
    let target = if length > max {
        LengthTarget::AtLeast(length)
    } else if length < min {
        LengthTarget::AtMost(length)
    } else {
        return Err(LengthGenError::InsideTrainingRange { length, min, max });
    };
    let up = matches!(target, LengthTarget::AtLeast(_));
    let width = own[0].params.counts().len();
    let base: Vec<u32> = (0..width)
        .map(|i| {
            let it = own.iter().map(|r| r.params.counts()[i]);
            if up {
                it.max().unwrap()
            } else {
                it.min().unwrap()
            }
        })
        .collect();
    let template = own[0].params;
    let seen: HashSet<&str> = own.iter().map(|r| r.canonical_hash.as_str()).collect();
    let mut fresh = HashSet::new();
    let limits =
        SearchLimits::new(2_000_000, Duration::from_secs(60), 1024).expect("positive limits");
    let gi = growth_index(domain);
    let mut out = Vec::new();

    for level in 0..LEVELS {
        let mut counts = base.clone();
        let grown = counts[gi] as i64 + if up { level } else { -level };
        if grown < 1 {
            break;
        }
        counts[gi] = grown as u32;
        let params = template.with_counts(&counts);
        if params.validate_for_generation().is_err() {
            break;
        }
        let level_seed = derive_seed(seed, level as u64);
        let found: Vec<_> = (0..TRIES_PER_LEVEL)
            .into_par_iter()
            .map(|i| {
                let s = derive_seed(level_seed, i as u64);
                (s, generate_labeled(&params, s, &limits).ok())
            })
            .collect();
        for (s, labeled) in found {
            let Some(l) = labeled else { continue };
            if !target.accepts(l.solution.plan.len()) {
                continue;
            }
            let hash = canonical_hash(&l.problem);
            if seen.contains(hash.as_str()) || !fresh.insert(hash.clone()) {
                continue;
            }
            let id = format!("{domain}-len{length}-{:03}", out.len());
            out.push(DatasetRecord::from_labeled(
                id,
                params,
                s,
                l,
                hash,
                Split::Test,
            ));
            if out.len() == count {
                return Ok(out);
            }
        }
    }
    Err(LengthGenError::Unreachable {
        found: out.len(),
        requested: count,
    })
}

/// Bijection between a problem's original object names and randomized ones.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolTable {
    to_randomized: BTreeMap<String, String>,
    to_original: BTreeMap<String, String>,
}

impl SymbolTable {
    pub fn from_pairs<I, A, B>(pairs: I) -> Option<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut t = SymbolTable::default();
        for (o, r) in pairs {
            let (o, r) = (o.into(), r.into());
            if t.to_randomized.contains_key(&o) || t.to_original.contains_key(&r) {
                return None;
            }
            t.to_randomized.insert(o.clone(), r.clone());
            t.to_original.insert(r, o);
        }
        Some(t)
    }

    pub fn randomized(&self, original: &str) -> Option<&str> {
        self.to_randomized.get(original).map(String::as_str)
    }

    pub fn original(&self, randomized: &str) -> Option<&str> {
        self.to_original.get(randomized).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.to_randomized.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_randomized.is_empty()
    }

    /// `(original, randomized)` pairs sorted by original name.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.to_randomized
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RandomizeError {
    #[error("randomization version must be 1, 2 or 3, got {0}")]
    InvalidVersion(u8),
    #[error("version 1 supports at most 10 objects, problem has {0}")]
    TooManyObjects(usize),
    #[error("not enough unused names for {needed} objects")]
    VocabularyExhausted { needed: usize },
}

/// Object names used anywhere in the given records.
pub fn training_vocabulary(records: &[DatasetRecord]) -> BTreeSet<String> {
    records
        .iter()
        .filter_map(|r| r.parsed_problem().ok())
        .flat_map(|p| p.objects.into_iter().map(|o| o.name))
        .collect()
}

fn domain_symbols(domain: &Domain) -> HashSet<String> {
    let mut s: HashSet<String> = ["and", "not", "or", "object", "either"]
        .map(String::from)
        .into();
    s.extend(domain.predicates.iter().map(|p| p.name.clone()));
    s.extend(domain.actions.iter().map(|a| a.name.clone()));
    s.extend(domain.types.iter().map(|t| t.name.clone()));
    s.extend(domain.constants.iter().map(|c| c.name.clone()));
    s
}

fn pick_names(
    version: u8,
    n: usize,
    rng: &mut ChaCha8Rng,
    banned: &HashSet<String>,
    vocabulary: &BTreeSet<String>,
) -> Result<Vec<String>, RandomizeError> {
    let usable = |s: &String| !banned.contains(s) && !vocabulary.contains(s);
    let mut pool: Vec<String> = match version {
        1 => {
            if n > 10 {
                return Err(RandomizeError::TooManyObjects(n));
            }
            (0..10).map(|d| d.to_string()).collect()
        }
        2 => (b'a'..=b'z')
            .flat_map(|c| (0..10).map(move |d| format!("{}{d}", c as char)))
            .filter(usable)
            .collect(),
        3 => {
            let mut chosen = Vec::with_capacity(n);
            let mut taken = HashSet::new();
            for _ in 0..n * 64 + 1024 {
                if chosen.len() == n {
                    break;
                }
                let s: String = (0..3).map(|_| rng.gen_range(b'a'..=b'z') as char).collect();
                if usable(&s) && taken.insert(s.clone()) {
                    chosen.push(s);
                }
            }
            return if chosen.len() == n {
                Ok(chosen)
            } else {
                Err(RandomizeError::VocabularyExhausted { needed: n })
            };
        }
        v => return Err(RandomizeError::InvalidVersion(v)),
    };
    if pool.len() < n {
        return Err(RandomizeError::VocabularyExhausted { needed: n });
    }
    pool.shuffle(rng);
    pool.truncate(n);
    Ok(pool)
}

/// Renames every object of `problem`.
///
/// Version 1 uses single digits, version 2 a letter followed by a digit, and
/// version 3 three lowercase letters. Version 2 and 3 names avoid
/// `vocabulary` (the training object names); no version reuses a domain
/// symbol.
pub fn randomize_object_names(
    problem: &Problem,
    domain: &Domain,
    version: u8,
    seed: u64,
    vocabulary: &BTreeSet<String>,
) -> Result<(Problem, SymbolTable), RandomizeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, version as u64));
    let banned = domain_symbols(domain);
    let empty = BTreeSet::new();
    let vocab = if version == 1 { &empty } else { vocabulary };
    let names = pick_names(version, problem.objects.len(), &mut rng, &banned, vocab)?;
    let table = SymbolTable::from_pairs(problem.objects.iter().map(|o| o.name.clone()).zip(names))
        .expect("object names are distinct");
    let rename = |s: &String| table.randomized(s).map_or_else(|| s.clone(), str::to_owned);
    let atom = |a: &GroundAtom| GroundAtom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(rename).collect(),
    };
    let renamed = Problem {
        name: problem.name.clone(),
        domain_name: problem.domain_name.clone(),
        objects: problem
            .objects
            .iter()
            .map(|o| TypedName {
                name: rename(&o.name),
                ty: o.ty.clone(),
            })
            .collect(),
        init: problem.init.iter().map(atom).collect(),
        goal: problem.goal.iter().map(atom).collect(),
    };
    Ok((renamed, table))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    ToRandomized,
    ToOriginal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappedPlan {
    pub plan: Vec<String>,
    /// Argument tokens absent from the table, left unchanged.
    pub unknown: Vec<String>,
}

/// Substitutes action arguments through the table; action names are kept.
pub fn map_plan_through_table<S: AsRef<str>>(
    plan: &[S],
    table: &SymbolTable,
    direction: Direction,
) -> MappedPlan {
    let mut unknown = Vec::new();
    let plan = plan
        .iter()
        .map(|step| {
            let mut words = step.as_ref().split_whitespace();
            let mut out: Vec<String> = words.next().map(str::to_owned).into_iter().collect();
            for w in words {
                let mapped = match direction {
                    Direction::ToRandomized => table.randomized(w),
                    Direction::ToOriginal => table.original(w),
                };
                match mapped {
                    Some(m) => out.push(m.to_owned()),
                    None => {
                        unknown.push(w.to_owned());
                        out.push(w.to_owned());
                    }
                }
            }
            out.join(" ")
        })
        .collect();
    MappedPlan { plan, unknown }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{build_dataset, DatasetSpec};
    use crate::pddl::{parse_domain, parse_problem};

    fn bw() -> (Domain, Problem) {
        let d = parse_domain(include_str!("../../data/blocksworld-domain.pddl")).unwrap();
        let p = parse_problem(include_str!("../../data/bw-prob1.pddl"), &d).unwrap();
        (d, p)
    }

    #[test]
    fn v1_uses_distinct_digits() {
        let (d, p) = bw();
        let (r, t) = randomize_object_names(&p, &d, 1, 3, &BTreeSet::new()).unwrap();
        let names: HashSet<&str> = r.objects.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(names.len(), 2);
        assert!(names
            .iter()
            .all(|n| n.len() == 1 && n.chars().all(|c| c.is_ascii_digit())));
        assert_eq!(t.len(), 2);
        assert_eq!(r.init[1].args[0], t.randomized("b1").unwrap());
    }

    #[test]
    fn v2_avoids_vocabulary() {
        let (d, p) = bw();
        let vocab: BTreeSet<String> = (b'a'..=b'y')
            .flat_map(|c| (0..10).map(move |i| format!("{}{i}", c as char)))
            .collect();
        let (r, _) = randomize_object_names(&p, &d, 2, 9, &vocab).unwrap();
        for o in &r.objects {
            assert!(o.name.starts_with('z') && o.name.len() == 2, "{}", o.name);
        }
    }

    #[test]
    fn v3_uses_three_letters() {
        let (d, p) = bw();
        let (r, _) = randomize_object_names(&p, &d, 3, 1, &BTreeSet::new()).unwrap();
        for o in &r.objects {
            assert_eq!(o.name.len(), 3);
            assert!(o.name.chars().all(|c| c.is_ascii_lowercase()));
            assert!(!["and", "not", "or"].contains(&o.name.as_str()));
        }
    }

    #[test]
    fn invalid_versions_and_sizes() {
        let (d, mut p) = bw();
        assert_eq!(
            randomize_object_names(&p, &d, 4, 0, &BTreeSet::new()),
            Err(RandomizeError::InvalidVersion(4))
        );
        p.objects = (0..11)
            .map(|i| TypedName::untyped(format!("b{i}")))
            .collect();
        assert_eq!(
            randomize_object_names(&p, &d, 1, 0, &BTreeSet::new()),
            Err(RandomizeError::TooManyObjects(11))
        );
        let all: BTreeSet<String> = (b'a'..=b'z')
            .flat_map(|c| (0..10).map(move |i| format!("{}{i}", c as char)))
            .collect();
        assert!(matches!(
            randomize_object_names(&p, &d, 2, 0, &all),
            Err(RandomizeError::VocabularyExhausted { .. })
        ));
    }

    #[test]
    fn plan_mapping() {
        let t = SymbolTable::from_pairs([("b1", "3"), ("b2", "7")]).unwrap();
        let m = map_plan_through_table(&["pick-up 3"], &t, Direction::ToOriginal);
        assert_eq!(m.plan, ["pick-up b1"]);
        assert!(m.unknown.is_empty());
        let plan = ["pick-up b1", "stack b1 b2"];
        let there = map_plan_through_table(&plan, &t, Direction::ToRandomized);
        assert_eq!(there.plan, ["pick-up 3", "stack 3 7"]);
        let back = map_plan_through_table(&there.plan, &t, Direction::ToOriginal);
        assert_eq!(back.plan, plan);
        let odd = map_plan_through_table(&["pick-up zz"], &t, Direction::ToOriginal);
        assert_eq!(odd.plan, ["pick-up zz"]);
        assert_eq!(odd.unknown, ["zz"]);
    }

    #[test]
    fn symbol_table_rejects_collisions() {
        assert!(SymbolTable::from_pairs([("a", "x"), ("b", "x")]).is_none());
        assert!(SymbolTable::from_pairs([("a", "x"), ("a", "y")]).is_none());
    }

    #[test]
    fn length_split_goes_beyond_training() {
        let spec = DatasetSpec::new(DomainId::Blocksworld, 40, 5);
        let train = build_dataset(&spec).unwrap().records;
        let max = train.iter().map(|r| r.plan_length).max().unwrap();
        let min = train.iter().map(|r| r.plan_length).min().unwrap();
        let target = max + 2;
        let out = length_generalization_split(&train, DomainId::Blocksworld, target, 3, 1).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|r| r.plan_length >= target));
        assert_eq!(
            length_generalization_split(&train, DomainId::Blocksworld, min, 3, 1),
            Err(LengthGenError::InsideTrainingRange {
                length: min,
                min,
                max
            })
        );
        assert_eq!(
            length_generalization_split(&train, DomainId::Ferry, 99, 3, 1),
            Err(LengthGenError::NoTrainingData(DomainId::Ferry))
        );
    }
}
