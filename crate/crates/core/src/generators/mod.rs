//! Seeded problem generators for the six benchmark domains, difficulty
//! formulas, and dataset construction.

mod dataset;
mod domains;
mod problems;

use std::fmt;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pddl::{ground, GroundTask, Problem};
use crate::planner::{solve, Heuristic, PlanResult, SearchLimits};

pub use dataset::{
    build_dataset, canonical_hash, default_range, ks_statistic, read_jsonl, test_share,
    write_jsonl, Dataset, DatasetError, DatasetManifest, DatasetRecord, DatasetSpec, ParamRange,
    Split, SplitCheck,
};
pub use domains::DomainId;

/// Per-domain instance size. Driverlog uses every location as a possible
/// package destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "lowercase")]
pub enum GeneratorParams {
    Ferry {
        cars: u32,
        locations: u32,
    },
    Blocksworld {
        blocks: u32,
    },
    Miconic {
        floors: u32,
        passengers: u32,
    },
    Hanoi {
        disks: u32,
        pegs: u32,
        /// Random start and goal configurations instead of a full tower move.
        #[serde(default)]
        scrambled: bool,
    },
    Grippers {
        balls: u32,
        robots: u32,
        rooms: u32,
    },
    Driverlog {
        locations: u32,
        drivers: u32,
        trucks: u32,
        packages: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("invalid parameters for {domain}: {reason}")]
    InvalidParams { domain: DomainId, reason: String },
    #[error("no solvable {domain} instance found for seed {seed} after {attempts} draws")]
    NoSolvableDraw {
        domain: DomainId,
        seed: u64,
        attempts: u32,
    },
}

/// Redraws allowed before a seed is declared unusable.
pub const MAX_ATTEMPTS: u32 = 64;

impl GeneratorParams {
    pub fn domain(&self) -> DomainId {
        match self {
            GeneratorParams::Ferry { .. } => DomainId::Ferry,
            GeneratorParams::Blocksworld { .. } => DomainId::Blocksworld,
            GeneratorParams::Miconic { .. } => DomainId::Miconic,
            GeneratorParams::Hanoi { .. } => DomainId::Hanoi,
            GeneratorParams::Grippers { .. } => DomainId::Grippers,
            GeneratorParams::Driverlog { .. } => DomainId::Driverlog,
        }
    }

    /// Count parameters in declaration order.
    pub fn counts(&self) -> Vec<u32> {
        match *self {
            GeneratorParams::Ferry { cars, locations } => vec![cars, locations],
            GeneratorParams::Blocksworld { blocks } => vec![blocks],
            GeneratorParams::Miconic { floors, passengers } => vec![floors, passengers],
            GeneratorParams::Hanoi { disks, pegs, .. } => vec![disks, pegs],
            GeneratorParams::Grippers {
                balls,
                robots,
                rooms,
            } => vec![balls, robots, rooms],
            GeneratorParams::Driverlog {
                locations,
                drivers,
                trucks,
                packages,
            } => vec![locations, drivers, trucks, packages],
        }
    }

    /// Rebuilds params of the same domain from `counts()`-ordered values.
    pub fn with_counts(&self, c: &[u32]) -> GeneratorParams {
        match *self {
            GeneratorParams::Ferry { .. } => GeneratorParams::Ferry {
                cars: c[0],
                locations: c[1],
            },
            GeneratorParams::Blocksworld { .. } => GeneratorParams::Blocksworld { blocks: c[0] },
            GeneratorParams::Miconic { .. } => GeneratorParams::Miconic {
                floors: c[0],
                passengers: c[1],
            },
            GeneratorParams::Hanoi { scrambled, .. } => GeneratorParams::Hanoi {
                disks: c[0],
                pegs: c[1],
                scrambled,
            },
            GeneratorParams::Grippers { .. } => GeneratorParams::Grippers {
                balls: c[0],
                robots: c[1],
                rooms: c[2],
            },
            GeneratorParams::Driverlog { .. } => GeneratorParams::Driverlog {
                locations: c[0],
                drivers: c[1],
                trucks: c[2],
                packages: c[3],
            },
        }
    }

    /// Checks the count invariants (all ≥ 1, hanoi pegs ≥ 3).
    pub fn validate(&self) -> Result<(), GeneratorError> {
        let invalid = |reason: &str| GeneratorError::InvalidParams {
            domain: self.domain(),
            reason: reason.to_owned(),
        };
        if self.counts().contains(&0) {
            return Err(invalid("all counts must be at least 1"));
        }
        if let GeneratorParams::Hanoi { pegs, .. } = self {
            if *pegs < 3 {
                return Err(invalid("hanoi needs at least 3 pegs"));
            }
        }
        Ok(())
    }

    /// Like `validate`, and also rejects sizes for which every draw is
    /// trivially solved (a single location, block, floor or room).
    pub fn validate_for_generation(&self) -> Result<(), GeneratorError> {
        self.validate()?;
        let too_small = match *self {
            GeneratorParams::Ferry { locations, .. } => {
                (locations < 2).then_some("ferry needs 2 locations")
            }
            GeneratorParams::Blocksworld { blocks } => {
                (blocks < 2).then_some("blocksworld needs 2 blocks")
            }
            GeneratorParams::Miconic { floors, .. } => {
                (floors < 2).then_some("miconic needs 2 floors")
            }
            GeneratorParams::Grippers { rooms, .. } => {
                (rooms < 2).then_some("grippers needs 2 rooms")
            }
            GeneratorParams::Driverlog { locations, .. } => {
                (locations < 2).then_some("driverlog needs 2 locations")
            }
            GeneratorParams::Hanoi { .. } => None,
        };
        match too_small {
            Some(reason) => Err(GeneratorError::InvalidParams {
                domain: self.domain(),
                reason: reason.to_owned(),
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for GeneratorParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GeneratorParams::Ferry { cars, locations } => {
                write!(f, "ferry(n={cars}, m={locations})")
            }
            GeneratorParams::Blocksworld { blocks } => write!(f, "blocksworld(n={blocks})"),
            GeneratorParams::Miconic { floors, passengers } => {
                write!(f, "miconic(n={floors}, m={passengers})")
            }
            GeneratorParams::Hanoi {
                disks,
                pegs,
                scrambled,
            } => {
                write!(f, "hanoi(n={disks}, k={pegs}")?;
                if scrambled {
                    f.write_str(", scrambled")?;
                }
                f.write_str(")")
            }
            GeneratorParams::Grippers {
                balls,
                robots,
                rooms,
            } => {
                write!(f, "grippers(n={balls}, r={robots}, rooms={rooms})")
            }
            GeneratorParams::Driverlog {
                locations,
                drivers,
                trucks,
                packages,
            } => write!(
                f,
                "driverlog(L={locations}, D={drivers}, T={trucks}, P={packages})"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DifficultyClass {
    Easy,
    Medium,
    Hard,
}

impl fmt::Display for DifficultyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Classifies by mean generated states: ≤ 100 Easy, ≤ 300 Medium, else Hard.
/// The evaluated count is accepted for reporting symmetry but does not
/// affect the class.
pub fn classify_difficulty(avg_generated: f64, _avg_evaluated: f64) -> DifficultyClass {
    if avg_generated <= 100.0 {
        DifficultyClass::Easy
    } else if avg_generated <= 300.0 {
        DifficultyClass::Medium
    } else {
        DifficultyClass::Hard
    }
}

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::from(1u32), |acc, i| acc * i)
}

fn pow(base: u32, exp: u32) -> BigUint {
    BigUint::from(base).pow(exp)
}

/// State-space size formula of the domain, evaluated exactly.
pub fn state_space_size(params: &GeneratorParams) -> BigUint {
    match *params {
        GeneratorParams::Ferry { cars, locations } => {
            pow(2, cars) * 2u32 * locations * factorial(cars)
        }
        GeneratorParams::Blocksworld { blocks } => pow(3, blocks),
        GeneratorParams::Miconic { floors, passengers } => {
            pow(floors, passengers + 1) * pow(2, passengers) * factorial(passengers)
        }
        GeneratorParams::Hanoi { disks, .. } => pow(3, disks),
        GeneratorParams::Grippers { balls, robots, .. } => pow(2, balls) * pow(3, balls * robots),
        GeneratorParams::Driverlog {
            locations,
            drivers,
            trucks,
            packages,
        } => {
            pow(locations, drivers + trucks + packages)
                * pow(locations, packages)
                * drivers
                * trucks
                * pow(2, trucks)
        }
    }
}

/// Branching-factor formula of the domain, evaluated exactly.
pub fn branching_factor(params: &GeneratorParams) -> u64 {
    match *params {
        GeneratorParams::Ferry { cars, .. } => cars as u64 + 1,
        GeneratorParams::Blocksworld { blocks } => 4 * blocks as u64 / 2 + 1,
        GeneratorParams::Miconic { passengers, .. } => passengers as u64 + 1,
        GeneratorParams::Hanoi { pegs, .. } => (pegs as u64 - 1) * pegs as u64 / 2,
        GeneratorParams::Grippers { balls, robots, .. } => {
            3 * balls as u64 * robots as u64 + robots as u64
        }
        GeneratorParams::Driverlog {
            locations,
            drivers,
            trucks,
            packages,
        } => {
            let (l, d, t, p) = (
                locations as u64,
                drivers as u64,
                trucks as u64,
                packages as u64,
            );
            l * (d + t + p + 2 * d * t)
        }
    }
}

/// Mixes a seed with a stream index (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A generated problem together with its grounding and optimal plan.
#[derive(Debug, Clone)]
pub struct LabeledProblem {
    pub problem: Problem,
    pub task: GroundTask,
    pub solution: PlanResult,
    /// Number of draws taken, starting at 1.
    pub attempts: u32,
}

/// Generates a solvable, non-trivial instance and its optimal plan.
pub fn generate_labeled(
    params: &GeneratorParams,
    seed: u64,
    limits: &SearchLimits,
) -> Result<LabeledProblem, GeneratorError> {
    params.validate_for_generation()?;
    let domain = params.domain();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, attempt as u64));
        let problem = problems::draw(params, format!("{domain}-{seed}"), &mut rng);
        let task = ground(domain.domain(), &problem).expect("generated problems ground");
        if task.is_goal(&task.initial_state()) || !task.relaxed_solvable() {
            continue;
        }
        let solution = solve(&task, Heuristic::Lmcut, limits);
        if solution.is_solved() {
            return Ok(LabeledProblem {
                problem,
                task,
                solution,
                attempts: attempt + 1,
            });
        }
    }
    Err(GeneratorError::NoSolvableDraw {
        domain,
        seed,
        attempts: MAX_ATTEMPTS,
    })
}

/// Generates a solvable instance; deterministic in `(params, seed)`.
pub fn generate_problem(params: &GeneratorParams, seed: u64) -> Result<Problem, GeneratorError> {
    generate_labeled(params, seed, &SearchLimits::default()).map(|l| l.problem)
}
