use std::collections::HashSet;
use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{
    classify_difficulty, derive_seed, generate_labeled, DifficultyClass, DomainId, GeneratorError,
    GeneratorParams, LabeledProblem,
};
use crate::encoding::to_compact;
use crate::pddl::{parse_problem, PddlError, Problem};
use crate::planner::SearchLimits;

/// Inclusive per-count bounds; both ends must be the same domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamRange {
    pub min: GeneratorParams,
    pub max: GeneratorParams,
}

impl ParamRange {
    pub fn new(min: GeneratorParams, max: GeneratorParams) -> Result<Self, DatasetError> {
        if min.domain() != max.domain() {
            return Err(DatasetError::BadRange(
                "bounds name different domains".into(),
            ));
        }
        if min.counts().iter().zip(max.counts()).any(|(a, b)| *a > b) {
            return Err(DatasetError::BadRange("min exceeds max".into()));
        }
        min.validate_for_generation()?;
        Ok(ParamRange { min, max })
    }

    pub fn fixed(params: GeneratorParams) -> Self {
        ParamRange {
            min: params,
            max: params,
        }
    }

    pub fn domain(&self) -> DomainId {
        self.min.domain()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> GeneratorParams {
        let counts: Vec<u32> = self
            .min
            .counts()
            .into_iter()
            .zip(self.max.counts())
            .map(|(lo, hi)| rng.gen_range(lo..=hi))
            .collect();
        let mut p = self.min.with_counts(&counts);
        if let (
            GeneratorParams::Hanoi { scrambled: a, .. },
            GeneratorParams::Hanoi { scrambled: b, .. },
            GeneratorParams::Hanoi { scrambled, .. },
        ) = (self.min, self.max, &mut p)
        {
            *scrambled = if a == b { a } else { rng.gen_bool(0.5) };
        }
        p
    }
}

/// Calibrated default parameter range of a domain.
pub fn default_range(domain: DomainId) -> ParamRange {
    use GeneratorParams as G;
    let (min, max) = match domain {
        DomainId::Ferry => (
            G::Ferry {
                cars: 1,
                locations: 5,
            },
            G::Ferry {
                cars: 3,
                locations: 8,
            },
        ),
        DomainId::Blocksworld => (G::Blocksworld { blocks: 3 }, G::Blocksworld { blocks: 7 }),
        DomainId::Miconic => (
            G::Miconic {
                floors: 4,
                passengers: 3,
            },
            G::Miconic {
                floors: 10,
                passengers: 6,
            },
        ),
        DomainId::Hanoi => (
            G::Hanoi {
                disks: 3,
                pegs: 3,
                scrambled: true,
            },
            G::Hanoi {
                disks: 5,
                pegs: 3,
                scrambled: true,
            },
        ),
        DomainId::Grippers => (
            G::Grippers {
                balls: 3,
                robots: 1,
                rooms: 2,
            },
            G::Grippers {
                balls: 6,
                robots: 2,
                rooms: 4,
            },
        ),
        DomainId::Driverlog => (
            G::Driverlog {
                locations: 4,
                drivers: 1,
                trucks: 1,
                packages: 2,
            },
            G::Driverlog {
                locations: 6,
                drivers: 2,
                trucks: 2,
                packages: 5,
            },
        ),
    };
    ParamRange { min, max }
}

impl DomainId {
    pub fn default_range(self) -> ParamRange {
        default_range(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub domain: DomainId,
    pub count: usize,
    pub range: ParamRange,
    pub master_seed: u64,
}

impl DatasetSpec {
    pub fn new(domain: DomainId, count: usize, master_seed: u64) -> Self {
        DatasetSpec {
            domain,
            count,
            range: default_range(domain),
            master_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// One labeled problem. Field order is the JSON-lines column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub domain: DomainId,
    pub params: GeneratorParams,
    pub seed: u64,
    pub problem: String,
    pub compact: String,
    pub plan: Vec<String>,
    pub plan_length: usize,
    pub split: Split,
    pub canonical_hash: String,
    pub generated: u64,
    pub evaluated: u64,
}

impl DatasetRecord {
    pub(crate) fn from_labeled(
        id: String,
        params: GeneratorParams,
        seed: u64,
        labeled: LabeledProblem,
        canonical_hash: String,
        split: Split,
    ) -> Self {
        let domain = params.domain();
        let mut problem = labeled.problem;
        problem.name = id.clone();
        DatasetRecord {
            compact: to_compact(domain.domain(), &problem).text,
            problem: problem.to_string(),
            id,
            domain,
            params,
            seed,
            plan_length: labeled.solution.plan.len(),
            plan: labeled.solution.plan,
            split,
            canonical_hash,
            generated: labeled.solution.generated,
            evaluated: labeled.solution.evaluated,
        }
    }

    /// Parses the stored PDDL against the built-in domain.
    pub fn parsed_problem(&self) -> Result<Problem, PddlError> {
        parse_problem(&self.problem, self.domain.domain())
    }
}

/// Two-sample Kolmogorov-Smirnov check of train vs test plan lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCheck {
    pub statistic: f64,
    pub critical_value: f64,
    pub alpha: f64,
    pub similar: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub toolkit_version: String,
    pub spec: DatasetSpec,
    pub records: usize,
    pub train: usize,
    pub test: usize,
    pub draws: usize,
    pub duplicates_skipped: usize,
    pub mean_generated: f64,
    pub mean_evaluated: f64,
    pub difficulty: DifficultyClass,
    pub split_check: SplitCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<DatasetRecord>,
    pub manifest: DatasetManifest,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("count must be at least 1")]
    EmptyCount,
    #[error("bad parameter range: {0}")]
    BadRange(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("parameter range yields only {achieved} distinct problems of {requested} requested after {draws} draws")]
    Exhausted {
        requested: usize,
        achieved: usize,
        draws: usize,
    },
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// SHA-256 over the domain name, sorted typed objects, and sorted init and
/// goal atoms. Problem names and source order do not matter.
pub fn canonical_hash(problem: &Problem) -> String {
    let mut objects: Vec<String> = problem
        .objects
        .iter()
        .map(|o| format!("{}:{}", o.name.to_lowercase(), o.type_or_object()))
        .collect();
    objects.sort();
    let sorted = |atoms: &[crate::pddl::GroundAtom]| {
        let mut v: Vec<String> = atoms.iter().map(|a| a.plain().to_lowercase()).collect();
        v.sort();
        v.dedup();
        v.join(";")
    };
    let mut h = Sha256::new();
    h.update(problem.domain_name.as_bytes());
    h.update(b"\nobjects ");
    h.update(objects.join(" ").as_bytes());
    h.update(b"\ninit ");
    h.update(sorted(&problem.init).as_bytes());
    h.update(b"\ngoal ");
    h.update(sorted(&problem.goal).as_bytes());
    hex::encode(h.finalize())
}

/// Largest distance between the two empirical CDFs.
pub fn ks_statistic(a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

const KS_ALPHA: f64 = 0.05;
const KS_C_ALPHA: f64 = 1.358;

fn split_check(train: &[usize], test: &[usize]) -> SplitCheck {
    let statistic = ks_statistic(train, test);
    let (n, m) = (train.len() as f64, test.len() as f64);
    let critical_value = if n == 0.0 || m == 0.0 {
        1.0
    } else {
        KS_C_ALPHA * ((n + m) / (n * m)).sqrt()
    };
    SplitCheck {
        statistic,
        critical_value,
        alpha: KS_ALPHA,
        similar: statistic <= critical_value,
    }
}

fn id_hash(id: &str) -> [u8; 32] {
    Sha256::digest(id.as_bytes()).into()
}

/// Number of test records for an 80/20 split.
pub fn test_share(count: usize) -> usize {
    (count + 2) / 5
}

struct Candidate {
    params: GeneratorParams,
    seed: u64,
    labeled: Option<LabeledProblem>,
}

fn draw_candidate(range: &ParamRange, seed: u64, limits: &SearchLimits) -> Candidate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = range.sample(&mut rng);
    Candidate {
        params,
        seed,
        labeled: generate_labeled(&params, seed, limits).ok(),
    }
}

/// Generates, deduplicates, labels and splits `spec.count` problems.
/// Candidates are solved in parallel but accepted strictly in draw order,
/// so the output depends only on the spec.
pub fn build_dataset(spec: &DatasetSpec) -> Result<Dataset, DatasetError> {
    if spec.count == 0 {
        return Err(DatasetError::EmptyCount);
    }
    let range = ParamRange::new(spec.range.min, spec.range.max)?;
    if range.domain() != spec.domain {
        return Err(DatasetError::BadRange(
            "range does not match the dataset domain".into(),
        ));
    }
    let limits = SearchLimits::default();
    let max_draws = spec.count * 20 + 100;
    let mut seen = HashSet::new();
    let mut records = Vec::with_capacity(spec.count);
    let mut draws = 0;
    let mut duplicates = 0;
    while records.len() < spec.count && draws < max_draws {
        let need = spec.count - records.len();
        let batch = (need + need / 4 + 8).min(max_draws - draws);
        let candidates: Vec<Candidate> = (draws..draws + batch)
            .into_par_iter()
            .map(|i| draw_candidate(&range, derive_seed(spec.master_seed, i as u64), &limits))
            .collect();
        draws += batch;
        for c in candidates {
            if records.len() == spec.count {
                break;
            }
            let Some(l) = c.labeled else { continue };
            let hash = canonical_hash(&l.problem);
            if !seen.insert(hash.clone()) {
                duplicates += 1;
                continue;
            }
            let id = format!("{}-{:05}", spec.domain, records.len());
            records.push(DatasetRecord::from_labeled(
                id,
                c.params,
                c.seed,
                l,
                hash,
                Split::Train,
            ));
        }
    }
    if records.len() < spec.count {
        return Err(DatasetError::Exhausted {
            requested: spec.count,
            achieved: records.len(),
            draws,
        });
    }

    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by_key(|&i| id_hash(&records[i].id));
    for &i in &order[..test_share(records.len())] {
        records[i].split = Split::Test;
    }
    let lengths = |s: Split| -> Vec<usize> {
        records
            .iter()
            .filter(|r| r.split == s)
            .map(|r| r.plan_length)
            .collect()
    };
    let (train, test) = (lengths(Split::Train), lengths(Split::Test));
    let n = records.len() as f64;
    let mean_generated = records.iter().map(|r| r.generated as f64).sum::<f64>() / n;
    let mean_evaluated = records.iter().map(|r| r.evaluated as f64).sum::<f64>() / n;
    let manifest = DatasetManifest {
        toolkit_version: crate::VERSION.to_owned(),
        spec: spec.clone(),
        records: records.len(),
        train: train.len(),
        test: test.len(),
        draws,
        duplicates_skipped: duplicates,
        mean_generated,
        mean_evaluated,
        difficulty: classify_difficulty(mean_generated, mean_evaluated),
        split_check: split_check(&train, &test),
    };
    Ok(Dataset { records, manifest })
}

/// Writes one record per line.
pub fn write_jsonl<W: Write>(records: &[DatasetRecord], mut out: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Reads records written by `write_jsonl`, skipping blank lines.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<DatasetRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| DatasetError::Json {
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(out)
}
