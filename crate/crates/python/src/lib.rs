//! Python bindings: grounded tasks, search, validation, generation,
//! encodings and metrics.

use std::collections::{BTreeSet, HashMap};

use ::planbench as core;
use core::encoding::{PromptExample, PromptTemplate};
use core::generators::{DatasetSpec, DomainId, GeneratorParams};
use core::metrics::{Direction, PlanPair, SymbolTable};
use core::pddl::{GroundTask, Problem};
use core::planner::{Heuristic, SearchLimits};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, v: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse(domain_text: &str, problem_text: &str) -> PyResult<(core::pddl::Domain, Problem)> {
    let domain = core::pddl::parse_domain(domain_text).map_err(err)?;
    let problem = core::pddl::parse_problem(problem_text, &domain).map_err(err)?;
    Ok((domain, problem))
}

fn domain_id(name: &str) -> PyResult<DomainId> {
    name.parse().map_err(PyValueError::new_err)
}

#[pyclass(module = "planbench", get_all, frozen)]
pub struct PlanResult {
    pub status: String,
    pub plan: Vec<String>,
    pub cost: u32,
    pub generated: u64,
    pub evaluated: u64,
    pub expanded: u64,
    pub seconds: f64,
}

#[pymethods]
impl PlanResult {
    fn __repr__(&self) -> String {
        format!(
            "PlanResult(status={:?}, cost={}, generated={})",
            self.status, self.cost, self.generated
        )
    }
}

#[pyclass(module = "planbench", get_all, frozen)]
pub struct ValidationReport {
    pub plan_length: usize,
    pub executable_prefix_len: usize,
    pub satisficing: bool,
    pub optimal: Option<bool>,
    pub goals_achieved: usize,
    pub goals_total: usize,
    pub degree_of_correctness: f64,
    pub failure: Option<String>,
}

#[pymethods]
impl ValidationReport {
    fn __repr__(&self) -> String {
        format!(
            "ValidationReport(satisficing={}, prefix={}/{}, degree={})",
            self.satisficing,
            self.executable_prefix_len,
            self.plan_length,
            self.degree_of_correctness
        )
    }
}

/// A grounded planning task.
#[pyclass(module = "planbench", frozen)]
pub struct Task {
    inner: GroundTask,
    domain_name: String,
    problem: Problem,
}

#[pymethods]
impl Task {
    /// Parses and grounds PDDL text. `domain` may also be a built-in name.
    #[new]
    fn new(domain: &str, problem: &str) -> PyResult<Self> {
        let domain_text = match domain.parse::<DomainId>() {
            Ok(id) => id.domain_text().to_owned(),
            Err(_) => domain.to_owned(),
        };
        let (d, p) = parse(&domain_text, problem)?;
        let inner = core::pddl::ground(&d, &p).map_err(err)?;
        Ok(Task {
            inner,
            domain_name: d.name,
            problem: p,
        })
    }

    #[getter]
    fn num_facts(&self) -> usize {
        self.inner.num_facts()
    }

    #[getter]
    fn num_actions(&self) -> usize {
        self.inner.actions().len()
    }

    #[getter]
    fn domain_name(&self) -> &str {
        &self.domain_name
    }

    #[getter]
    fn problem_pddl(&self) -> String {
        self.problem.to_string()
    }

    fn action_names(&self) -> Vec<String> {
        self.inner
            .actions()
            .iter()
            .map(|a| a.name.clone())
            .collect()
    }

    #[pyo3(signature = (heuristic = "lmcut", max_generated = 5_000_000, time_limit = 120.0))]
    fn solve(
        &self,
        py: Python<'_>,
        heuristic: &str,
        max_generated: u64,
        time_limit: f64,
    ) -> PyResult<PlanResult> {
        let h: Heuristic = heuristic.parse().map_err(PyValueError::new_err)?;
        if !(time_limit > 0.0 && time_limit.is_finite()) {
            return Err(PyValueError::new_err("time_limit must be positive"));
        }
        let limits = SearchLimits::new(
            max_generated,
            std::time::Duration::from_secs_f64(time_limit),
            2048,
        )
        .map_err(err)?;
        let r = py.detach(|| core::planner::solve(&self.inner, h, &limits));
        Ok(PlanResult {
            status: serde_json::to_value(r.status)
                .map_err(err)?
                .as_str()
                .unwrap_or_default()
                .to_owned(),
            plan: r.plan,
            cost: r.cost,
            generated: r.generated,
            evaluated: r.evaluated,
            expanded: r.expanded,
            seconds: r.seconds,
        })
    }

    /// Plan as a list of actions or as model output text.
    #[pyo3(signature = (plan, optimal_cost = None))]
    fn validate(
        &self,
        plan: &Bound<'_, PyAny>,
        optimal_cost: Option<u32>,
    ) -> PyResult<ValidationReport> {
        let steps: Vec<String> = match plan.extract::<String>() {
            Ok(text) => core::encoding::parse_plan_text(&text),
            Err(_) => plan.extract()?,
        };
        let mut r = core::validate::validate(&steps, &self.inner);
        if let Some(c) = optimal_cost {
            r = r.with_optimal_cost(c);
        }
        Ok(ValidationReport {
            plan_length: r.plan_length,
            executable_prefix_len: r.executable_prefix_len,
            satisficing: r.satisficing,
            optimal: r.optimal,
            goals_achieved: r.goals_achieved,
            goals_total: r.goals_total,
            degree_of_correctness: r.degree_of_correctness,
            failure: r
                .failure
                .map(|f| serde_json::to_string(&f).unwrap_or_default()),
        })
    }

    /// h_max of the initial state; `None` when the goal is relaxed-unreachable.
    fn hmax(&self) -> Option<u32> {
        core::planner::hmax(&self.inner, &self.inner.initial_state())
    }

    fn lmcut(&self) -> Option<u32> {
        core::planner::lmcut(&self.inner, &self.inner.initial_state())
    }

    /// Optimal cost by breadth-first search, `None` if unsolvable.
    #[pyo3(signature = (cap = 2_000_000))]
    fn bfs_oracle(&self, py: Python<'_>, cap: usize) -> PyResult<Option<u32>> {
        match py
            .detach(|| core::planner::bfs_oracle(&self.inner, cap))
            .map_err(err)?
        {
            core::planner::OracleOutcome::Optimal(c) => Ok(Some(c)),
            core::planner::OracleOutcome::Unsolvable => Ok(None),
        }
    }

    fn compact(&self) -> PyResult<String> {
        let id = DomainId::from_domain_name(&self.domain_name).ok_or_else(|| {
            PyValueError::new_err("compact() on a task needs a built-in domain; use to_compact()")
        })?;
        Ok(core::encoding::to_compact(id.domain(), &self.problem).text)
    }

    fn __repr__(&self) -> String {
        format!(
            "Task(domain={:?}, facts={}, actions={})",
            self.domain_name,
            self.inner.num_facts(),
            self.inner.actions().len()
        )
    }
}

fn params_from(domain: DomainId, counts: &[u32], scrambled: bool) -> PyResult<GeneratorParams> {
    let base = domain.default_range().min;
    if counts.len() != base.counts().len() {
        return Err(PyValueError::new_err(format!(
            "{domain} takes {} counts, got {}",
            base.counts().len(),
            counts.len()
        )));
    }
    Ok(match base.with_counts(counts) {
        GeneratorParams::Hanoi { disks, pegs, .. } => GeneratorParams::Hanoi {
            disks,
            pegs,
            scrambled,
        },
        p => p,
    })
}

/// PDDL text of a solvable generated problem.
#[pyfunction]
#[pyo3(signature = (domain, counts, seed = 0, scrambled = false))]
fn generate_problem(
    domain: &str,
    counts: Vec<u32>,
    seed: u64,
    scrambled: bool,
) -> PyResult<String> {
    let params = params_from(domain_id(domain)?, &counts, scrambled)?;
    Ok(core::generators::generate_problem(&params, seed)
        .map_err(err)?
        .to_string())
}

/// Dataset records as dicts, with the manifest.
#[pyfunction]
#[pyo3(signature = (domain, count, seed = 0))]
fn build_dataset(
    py: Python<'_>,
    domain: &str,
    count: usize,
    seed: u64,
) -> PyResult<(Py<PyAny>, Py<PyAny>)> {
    let spec = DatasetSpec::new(domain_id(domain)?, count, seed);
    let ds = py
        .detach(|| core::generators::build_dataset(&spec))
        .map_err(err)?;
    Ok((to_py(py, &ds.records)?, to_py(py, &ds.manifest)?))
}

#[pyfunction]
fn domain_pddl(domain: &str) -> PyResult<&'static str> {
    Ok(domain_id(domain)?.domain_text())
}

#[pyfunction]
fn state_space_size(domain: &str, counts: Vec<u32>) -> PyResult<String> {
    let params = params_from(domain_id(domain)?, &counts, false)?;
    Ok(core::generators::state_space_size(&params).to_string())
}

#[pyfunction]
fn to_compact(domain: &str, problem: &str) -> PyResult<String> {
    let (d, p) = parse(domain, problem)?;
    Ok(core::encoding::to_compact(&d, &p).text)
}

#[pyfunction]
#[pyo3(signature = (domain, problem, example_problem = None, example_plan = None))]
fn render_prompt(
    domain: &str,
    problem: &str,
    example_problem: Option<String>,
    example_plan: Option<Vec<String>>,
) -> PyResult<String> {
    let template = match (example_problem, example_plan) {
        (Some(problem_text), Some(plan)) => {
            PromptTemplate::few_shot(PromptExample { problem_text, plan })
        }
        (None, None) => PromptTemplate::zero_shot(),
        _ => {
            return Err(PyValueError::new_err(
                "example_problem and example_plan go together",
            ))
        }
    };
    core::encoding::render_prompt(&template, domain, problem).map_err(err)
}

#[pyfunction]
fn parse_plan_text(text: &str) -> Vec<String> {
    core::encoding::parse_plan_text(text)
}

#[pyfunction]
fn token_count(text: &str) -> usize {
    core::encoding::token_count(text)
}

#[pyfunction]
fn hamming_distance(a: Vec<String>, b: Vec<String>) -> usize {
    core::metrics::hamming_distance(&a, &b)
}

/// Mean normalized Hamming distance over `(reference, candidate)` pairs.
#[pyfunction]
fn plan_generalization_error(pairs: Vec<(Vec<String>, Vec<String>)>) -> PyResult<f64> {
    let pairs: Vec<PlanPair> = pairs
        .into_iter()
        .map(|(reference, candidate)| PlanPair {
            reference,
            candidate,
        })
        .collect();
    core::metrics::plan_generalization_error(&pairs).map_err(err)
}

#[pyfunction]
fn strong_generalization(epg: f64) -> bool {
    core::metrics::strong_generalization(epg)
}

/// Renamed problem PDDL and the original-to-randomized name map.
#[pyfunction]
#[pyo3(signature = (domain, problem, version, seed = 0, vocabulary = None))]
fn randomize_object_names(
    domain: &str,
    problem: &str,
    version: u8,
    seed: u64,
    vocabulary: Option<Vec<String>>,
) -> PyResult<(String, HashMap<String, String>)> {
    let (d, p) = parse(domain, problem)?;
    let vocab: BTreeSet<String> = vocabulary.unwrap_or_default().into_iter().collect();
    let (renamed, table) =
        core::metrics::randomize_object_names(&p, &d, version, seed, &vocab).map_err(err)?;
    let map = table
        .iter()
        .map(|(o, r)| (o.to_owned(), r.to_owned()))
        .collect();
    Ok((renamed.to_string(), map))
}

/// Maps plan arguments through an original-to-randomized name map.
/// Returns the plan and the arguments that were not in the map.
#[pyfunction]
#[pyo3(signature = (plan, table, to_original = false))]
fn map_plan(
    plan: Vec<String>,
    table: HashMap<String, String>,
    to_original: bool,
) -> PyResult<(Vec<String>, Vec<String>)> {
    let table = SymbolTable::from_pairs(table)
        .ok_or_else(|| PyValueError::new_err("name map is not one-to-one"))?;
    let dir = if to_original {
        Direction::ToOriginal
    } else {
        Direction::ToRandomized
    };
    let m = core::metrics::map_plan_through_table(&plan, &table, dir);
    Ok((m.plan, m.unknown))
}

#[pymodule]
fn planbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", core::VERSION)?;
    m.add(
        "DOMAINS",
        DomainId::ALL.iter().map(|d| d.as_str()).collect::<Vec<_>>(),
    )?;
    m.add_class::<Task>()?;
    m.add_class::<PlanResult>()?;
    m.add_class::<ValidationReport>()?;
    m.add_function(wrap_pyfunction!(generate_problem, m)?)?;
    m.add_function(wrap_pyfunction!(build_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(domain_pddl, m)?)?;
    m.add_function(wrap_pyfunction!(state_space_size, m)?)?;
    m.add_function(wrap_pyfunction!(to_compact, m)?)?;
    m.add_function(wrap_pyfunction!(render_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(parse_plan_text, m)?)?;
    m.add_function(wrap_pyfunction!(token_count, m)?)?;
    m.add_function(wrap_pyfunction!(hamming_distance, m)?)?;
    m.add_function(wrap_pyfunction!(plan_generalization_error, m)?)?;
    m.add_function(wrap_pyfunction!(strong_generalization, m)?)?;
    m.add_function(wrap_pyfunction!(randomize_object_names, m)?)?;
    m.add_function(wrap_pyfunction!(map_plan, m)?)?;
    Ok(())
}
