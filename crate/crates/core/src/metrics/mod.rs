//! Plan generalization error, aggregate reports, and the generalization
//! dataset transforms.

mod transforms;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::DifficultyClass;
use crate::pddl::GroundTask;
use crate::validate::validate;

pub use transforms::{
    length_generalization_split, map_plan_through_table, randomize_object_names,
    training_vocabulary, Direction, LengthGenError, LengthTarget, MappedPlan, RandomizeError,
    SymbolTable,
};

/// Mismatching positions, with the shorter plan padded by mismatches.
pub fn hamming_distance<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> usize {
    let common = a
        .iter()
        .zip(b)
        .filter(|(x, y)| x.as_ref() != y.as_ref())
        .count();
    common + a.len().abs_diff(b.len())
}

/// Reference (optimal) plan and candidate (generated) plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanPair {
    pub reference: Vec<String>,
    pub candidate: Vec<String>,
}

impl PlanPair {
    pub fn new<S: Into<String>>(
        reference: impl IntoIterator<Item = S>,
        candidate: impl IntoIterator<Item = S>,
    ) -> Self {
        PlanPair {
            reference: reference.into_iter().map(Into::into).collect(),
            candidate: candidate.into_iter().map(Into::into).collect(),
        }
    }

    pub fn error(&self) -> f64 {
        pair_error(&self.reference, &self.candidate)
    }
}

/// Hamming distance normalized by the longer plan; 0 when both are empty.
pub fn pair_error<S: AsRef<str>, T: AsRef<str>>(reference: &[S], candidate: &[T]) -> f64 {
    let n = reference.len().max(candidate.len());
    if n == 0 {
        return 0.0;
    }
    hamming_distance(reference, candidate) as f64 / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("plan generalization error needs at least one plan pair")]
pub struct EmptyInput;

/// Mean normalized Hamming distance over the pairs, in [0, 1].
pub fn plan_generalization_error(pairs: &[PlanPair]) -> Result<f64, EmptyInput> {
    if pairs.is_empty() {
        return Err(EmptyInput);
    }
    Ok(pairs.iter().map(PlanPair::error).sum::<f64>() / pairs.len() as f64)
}

pub const STRONG_GENERALIZATION_THRESHOLD: f64 = 0.5;

pub fn strong_generalization(epg: f64) -> bool {
    epg <= STRONG_GENERALIZATION_THRESHOLD
}

/// Verdicts for one model output on one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub model: String,
    pub domain: String,
    pub difficulty: DifficultyClass,
    pub satisficing: bool,
    pub optimal: bool,
    pub degree_of_correctness: f64,
    pub plan_error: f64,
    pub inference_seconds: Option<f64>,
}

impl EvalRecord {
    /// Validates `candidate` on `task` and compares it with `reference`,
    /// whose length is taken as the optimal cost.
    #[allow(clippy::too_many_arguments)]
    pub fn score(
        id: impl Into<String>,
        model: impl Into<String>,
        domain: impl Into<String>,
        difficulty: DifficultyClass,
        task: &GroundTask,
        reference: &[String],
        candidate: &[String],
        inference_seconds: Option<f64>,
    ) -> Self {
        let report = validate(candidate, task).with_optimal_cost(reference.len() as u32);
        EvalRecord {
            id: id.into(),
            model: model.into(),
            domain: domain.into(),
            difficulty,
            satisficing: report.satisficing,
            optimal: report.optimal == Some(true),
            degree_of_correctness: report.degree_of_correctness,
            plan_error: pair_error(reference, candidate),
            inference_seconds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub model: String,
    pub difficulty: DifficultyClass,
    pub count: usize,
    pub satisficing_pct: f64,
    pub optimal_pct: f64,
    pub invalid_pct: f64,
    pub mean_degree_of_correctness: f64,
    pub mean_plan_error: f64,
    pub mean_inference_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    /// Sorted by model, then difficulty.
    pub rows: Vec<AggregateRow>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Groups records by model and difficulty class.
pub fn aggregate(records: &[EvalRecord]) -> AggregateReport {
    let mut groups: BTreeMap<(&str, DifficultyClass), Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.model, r.difficulty)).or_default().push(r);
    }
    let rows = groups
        .into_iter()
        .map(|((model, difficulty), rs)| {
            let n = rs.len() as f64;
            let pct =
                |f: fn(&EvalRecord) -> bool| 100.0 * rs.iter().filter(|r| f(r)).count() as f64 / n;
            let satisficing_pct = pct(|r| r.satisficing);
            AggregateRow {
                model: model.to_owned(),
                difficulty,
                count: rs.len(),
                satisficing_pct,
                optimal_pct: pct(|r| r.optimal),
                invalid_pct: 100.0 - satisficing_pct,
                mean_degree_of_correctness: mean(rs.iter().map(|r| r.degree_of_correctness))
                    .unwrap_or(0.0),
                mean_plan_error: mean(rs.iter().map(|r| r.plan_error)).unwrap_or(0.0),
                mean_inference_seconds: mean(rs.iter().filter_map(|r| r.inference_seconds)),
            }
        })
        .collect();
    AggregateReport { rows }
}

impl AggregateReport {
    pub fn row(&self, model: &str, difficulty: DifficultyClass) -> Option<&AggregateRow> {
        self.rows
            .iter()
            .find(|r| r.model == model && r.difficulty == difficulty)
    }

    /// Aligned text table: one line per model with E/M/H sub-columns for
    /// satisficing %, optimal %, degree of correctness and E_pg.
    pub fn to_table(&self) -> String {
        const CLASSES: [DifficultyClass; 3] = [
            DifficultyClass::Easy,
            DifficultyClass::Medium,
            DifficultyClass::Hard,
        ];
        let mut models: Vec<&str> = self.rows.iter().map(|r| r.model.as_str()).collect();
        models.dedup();
        let width = models.iter().map(|m| m.len()).max().unwrap_or(0).max(5);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:^26}  {:^26}  {:^20}  {:^20}",
            "Model", "Inf. Time", "Sat. Plans (%)", "Opt. Plans (%)", "Deg. Corr.", "E_pg"
        );
        let sub = |w: usize| format!("{:>w$} {:>w$} {:>w$}", "E", "M", "H");
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>26}  {:>26}  {:>20}  {:>20}",
            "",
            "",
            sub(8),
            sub(8),
            sub(6),
            sub(6)
        );
        for m in models {
            let cell =
                |c: DifficultyClass, w: usize, prec: usize, f: fn(&AggregateRow) -> f64| match self
                    .row(m, c)
                {
                    Some(r) => format!("{:>w$.prec$}", f(r)),
                    None => format!("{:>w$}", "-"),
                };
            let cols = |w: usize, prec: usize, f: fn(&AggregateRow) -> f64| {
                CLASSES
                    .iter()
                    .map(|c| cell(*c, w, prec, f))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let time = mean(
                self.rows
                    .iter()
                    .filter(|r| r.model == m)
                    .filter_map(|r| r.mean_inference_seconds),
            )
            .map_or("-".to_owned(), |t| format!("{t:.2}s"));
            let _ = writeln!(
                out,
                "{m:<width$}  {time:>9}  {}  {}  {}  {}",
                cols(8, 2, |r| r.satisficing_pct),
                cols(8, 2, |r| r.optimal_pct),
                cols(6, 2, |r| r.mean_degree_of_correctness),
                cols(6, 2, |r| r.mean_plan_error),
            );
        }
        out
    }
}
