//! Batch evaluation over a dataset's test split.
//!
//! Records are appended to a JSON-lines file in test-split order through a
//! single writer, so an interrupted run leaves a prefix and a rerun picks up
//! where it stopped.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::{SystemTime, UNIX_EPOCH};

use planbench::encoding::{parse_plan_text, render_prompt, PromptExample, PromptTemplate};
use planbench::generators::{derive_seed, DatasetRecord, DifficultyClass, DomainId, Split};
use planbench::metrics::{aggregate, hamming_distance, pair_error, AggregateReport, EvalRecord};
use planbench::pddl::ground;
use planbench::validate::{validate, StepFailure};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::client::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    ZeroShot,
    FewShot,
    /// Compact form as the whole prompt, as given to fine-tuned models.
    Compact,
}

/// Wall-clock facts about a record. Excluded when comparing runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub inference_seconds: Option<f64>,
    pub finished_unix_ms: u128,
}

/// One model answer and its verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub model: String,
    pub domain: DomainId,
    pub difficulty: DifficultyClass,
    pub mode: EvalMode,
    pub raw_output: String,
    pub plan: Vec<String>,
    pub executable_prefix_len: usize,
    pub failure: Option<StepFailure>,
    pub satisficing: bool,
    pub optimal: bool,
    pub goals_achieved: usize,
    pub goals_total: usize,
    pub degree_of_correctness: f64,
    pub hamming: usize,
    pub plan_error: f64,
    /// Endpoint failure, scored as an empty answer.
    pub error: Option<String>,
    pub timing: Timing,
}

impl RunRecord {
    /// Scores `raw_output` against the record's problem and reference plan.
    pub fn score(
        record: &DatasetRecord,
        model: &str,
        mode: EvalMode,
        raw_output: String,
        error: Option<String>,
        inference_seconds: Option<f64>,
    ) -> Result<Self, RunError> {
        let problem = record
            .parsed_problem()
            .map_err(|e| RunError::BadRecord(record.id.clone(), e.to_string()))?;
        let task = ground(record.domain.domain(), &problem)
            .map_err(|e| RunError::BadRecord(record.id.clone(), e.to_string()))?;
        let plan = parse_plan_text(&raw_output);
        let report = validate(&plan, &task).with_optimal_cost(record.plan_length as u32);
        Ok(RunRecord {
            id: record.id.clone(),
            model: model.to_owned(),
            domain: record.domain,
            difficulty: record.domain.difficulty(),
            mode,
            raw_output,
            executable_prefix_len: report.executable_prefix_len,
            failure: report.failure,
            satisficing: report.satisficing,
            optimal: report.optimal == Some(true),
            goals_achieved: report.goals_achieved,
            goals_total: report.goals_total,
            degree_of_correctness: report.degree_of_correctness,
            hamming: hamming_distance(&record.plan, &plan),
            plan_error: pair_error(&record.plan, &plan),
            plan,
            error,
            timing: Timing {
                inference_seconds,
                finished_unix_ms: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map_or(0, |d| d.as_millis()),
            },
        })
    }

    pub fn to_eval_record(&self) -> EvalRecord {
        EvalRecord {
            id: self.id.clone(),
            model: self.model.clone(),
            domain: self.domain.to_string(),
            difficulty: self.difficulty,
            satisficing: self.satisficing,
            optimal: self.optimal,
            degree_of_correctness: self.degree_of_correctness,
            plan_error: self.plan_error,
            inference_seconds: self.timing.inference_seconds,
        }
    }

    /// The record with its timing cleared, for run-to-run comparison.
    pub fn without_timing(&self) -> RunRecord {
        RunRecord {
            timing: Timing::default(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub model: String,
    pub mode: EvalMode,
    pub seed: u64,
    pub concurrency: usize,
    /// Hash of the endpoint config; absent for mock models.
    pub config_hash: Option<String>,
    /// Hash over the ids and canonical hashes of the evaluated records.
    pub dataset_hash: String,
    pub problems: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub mode: EvalMode,
    /// Upper bound on requests in flight.
    pub concurrency: usize,
    /// Picks the few-shot example among a domain's training records.
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            mode: EvalMode::ZeroShot,
            concurrency: 4,
            seed: 0,
        }
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub manifest: RunManifest,
    /// Every record in the output file, in test-split order.
    pub records: Vec<RunRecord>,
    /// Records produced by this invocation, as opposed to resumed ones.
    pub fresh: usize,
    pub report: AggregateReport,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("concurrency must be at least 1")]
    ZeroConcurrency,
    #[error("dataset has no test records")]
    NoTestRecords,
    #[error("few-shot mode needs a training record for {0}")]
    NoExample(DomainId),
    #[error("record {0}: {1}")]
    BadRecord(String, String),
    #[error("cannot render prompt for {0}: {1}")]
    Prompt(String, String),
    #[error("{path}: existing run differs in {field}")]
    ManifestMismatch { path: PathBuf, field: &'static str },
    #[error("{path} line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Path of the manifest written next to a run's record file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn dataset_hash<'a>(records: impl IntoIterator<Item = &'a DatasetRecord>) -> String {
    let mut h = Sha256::new();
    for r in records {
        h.update(r.id.as_bytes());
        h.update(b"\0");
        h.update(r.canonical_hash.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

fn few_shot_examples(records: &[DatasetRecord], seed: u64) -> HashMap<DomainId, PromptExample> {
    let mut by_domain: BTreeMap<DomainId, Vec<&DatasetRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.split == Split::Train) {
        by_domain.entry(r.domain).or_default().push(r);
    }
    by_domain
        .into_iter()
        .map(|(d, rs)| {
            let ex = rs[(derive_seed(seed, d as u64) % rs.len() as u64) as usize];
            (
                d,
                PromptExample {
                    problem_text: ex.problem.clone(),
                    plan: ex.plan.clone(),
                },
            )
        })
        .collect()
}

/// Prompt for one record under `mode`.
pub fn build_prompt(
    record: &DatasetRecord,
    mode: EvalMode,
    example: Option<&PromptExample>,
) -> Result<String, RunError> {
    let template = match mode {
        EvalMode::Compact => return Ok(record.compact.clone()),
        EvalMode::ZeroShot => PromptTemplate::zero_shot(),
        EvalMode::FewShot => {
            PromptTemplate::few_shot(example.ok_or(RunError::NoExample(record.domain))?.clone())
        }
    };
    render_prompt(&template, record.domain.domain_text(), &record.problem)
        .map_err(|e| RunError::Prompt(record.id.clone(), e.to_string()))
}

/// Reads the complete lines of a record file, cutting off a torn last line.
fn load_existing(out: &Path) -> Result<Vec<RunRecord>, RunError> {
    let file = match File::open(out) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut good_bytes = 0u64;
    let mut line = String::new();
    let mut n = 0;
    loop {
        line.clear();
        let read = reader.read_line(&mut line)?;
        if read == 0 {
            break;
        }
        n += 1;
        // A crash mid-write leaves at most one torn line, always the last.
        if !line.ends_with('\n') {
            break;
        }
        let r = serde_json::from_str(line.trim_end()).map_err(|e| RunError::Corrupt {
            path: out.to_owned(),
            line: n,
            message: e.to_string(),
        })?;
        records.push(r);
        good_bytes += read as u64;
    }
    OpenOptions::new()
        .write(true)
        .open(out)?
        .set_len(good_bytes)?;
    Ok(records)
}

fn check_manifest(out: &Path, manifest: &RunManifest) -> Result<(), RunError> {
    let path = manifest_path(out);
    let Ok(text) = fs::read_to_string(&path) else {
        return Ok(());
    };
    let old: RunManifest = serde_json::from_str(&text).map_err(|e| RunError::Corrupt {
        path: path.clone(),
        line: 1,
        message: e.to_string(),
    })?;
    let mismatch = |field| {
        Err(RunError::ManifestMismatch {
            path: path.clone(),
            field,
        })
    };
    if old.model != manifest.model {
        return mismatch("model");
    }
    if old.mode != manifest.mode {
        return mismatch("mode");
    }
    if old.seed != manifest.seed {
        return mismatch("seed");
    }
    if old.dataset_hash != manifest.dataset_hash {
        return mismatch("dataset");
    }
    if old.config_hash != manifest.config_hash {
        return mismatch("endpoint config");
    }
    Ok(())
}

/// Evaluates `model` on the test records of `records`, writing to `out`.
///
/// Records already present in `out` are kept and skipped. Endpoint errors
/// are stored on the record and scored as empty answers.
pub fn run_evaluation(
    records: &[DatasetRecord],
    model: &dyn Model,
    options: &RunOptions,
    out: &Path,
) -> Result<RunSummary, RunError> {
    if options.concurrency == 0 {
        return Err(RunError::ZeroConcurrency);
    }
    let test: Vec<&DatasetRecord> = records.iter().filter(|r| r.split == Split::Test).collect();
    if test.is_empty() {
        return Err(RunError::NoTestRecords);
    }
    let manifest = RunManifest {
        toolkit_version: planbench::VERSION.to_owned(),
        model: model.name().to_owned(),
        mode: options.mode,
        seed: options.seed,
        concurrency: options.concurrency,
        config_hash: model.config().map(|c| c.config_hash()),
        dataset_hash: dataset_hash(test.iter().copied()),
        problems: test.len(),
    };
    check_manifest(out, &manifest)?;
    let examples = match options.mode {
        EvalMode::FewShot => few_shot_examples(records, options.seed),
        _ => HashMap::new(),
    };
    let prompts: Vec<String> = test
        .iter()
        .map(|r| build_prompt(r, options.mode, examples.get(&r.domain)))
        .collect::<Result<_, _>>()?;

    let existing = load_existing(out)?;
    let wanted: HashSet<&str> = test.iter().map(|r| r.id.as_str()).collect();
    if let Some(r) = existing.iter().find(|r| !wanted.contains(r.id.as_str())) {
        return Err(RunError::BadRecord(
            r.id.clone(),
            "not in this run's test split".into(),
        ));
    }
    let done: HashSet<&str> = existing.iter().map(|r| r.id.as_str()).collect();
    let pending: Vec<usize> = (0..test.len())
        .filter(|&i| !done.contains(test[i].id.as_str()))
        .collect();

    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(
        manifest_path(out),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )?;
    let mut file = OpenOptions::new().create(true).append(true).open(out)?;

    let next = AtomicUsize::new(0);
    let workers = options.concurrency.min(pending.len());
    let written = thread::scope(|s| -> Result<usize, RunError> {
        let (tx, rx) = mpsc::channel::<(usize, Result<RunRecord, RunError>)>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, pending, test, prompts) = (&next, &pending, &test, &prompts);
            s.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(&i) = pending.get(k) else { break };
                let record = test[i];
                let scored = match model.complete(record, &prompts[i]) {
                    Ok(c) => RunRecord::score(
                        record,
                        model.name(),
                        options.mode,
                        c.text,
                        None,
                        Some(c.seconds),
                    ),
                    Err(e) => RunRecord::score(
                        record,
                        model.name(),
                        options.mode,
                        String::new(),
                        Some(e.to_string()),
                        None,
                    ),
                };
                if tx.send((k, scored)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut buffer = BTreeMap::new();
        let mut cursor = 0;
        for (k, scored) in rx {
            buffer.insert(k, scored);
            while let Some(scored) = buffer.remove(&cursor) {
                let record = match scored {
                    Ok(r) => r,
                    Err(e) => {
                        // Stop handing out work; finished lines stay on disk.
                        next.store(pending.len(), Ordering::SeqCst);
                        return Err(e);
                    }
                };
                let line = serde_json::to_string(&record).expect("record serializes");
                writeln!(file, "{line}")?;
                file.flush()?;
                cursor += 1;
            }
        }
        Ok(cursor)
    })?;

    let mut by_id: HashMap<String, RunRecord> = load_existing(out)?
        .into_iter()
        .map(|r| (r.id.clone(), r))
        .collect();
    let all: Vec<RunRecord> = test.iter().filter_map(|r| by_id.remove(&r.id)).collect();
    let report = aggregate(
        &all.iter()
            .map(RunRecord::to_eval_record)
            .collect::<Vec<_>>(),
    );
    Ok(RunSummary {
        manifest,
        records: all,
        fresh: written,
        report,
    })
}

/// Reads a record file written by [`run_evaluation`].
pub fn read_run_records(path: &Path) -> Result<Vec<RunRecord>, RunError> {
    let file = File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| RunError::Corrupt {
            path: path.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
