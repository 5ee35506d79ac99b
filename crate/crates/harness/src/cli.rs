//! `planbench` command line.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use planbench::encoding::{
    format_plan, parse_plan_text, render_prompt, to_compact, token_count, PromptExample,
    PromptTemplate,
};
use planbench::generators::{
    build_dataset, read_jsonl, write_jsonl, DatasetSpec, DomainId, ParamRange,
};
use planbench::metrics::{
    aggregate, length_generalization_split, plan_generalization_error, randomize_object_names,
    strong_generalization, training_vocabulary, PlanPair,
};
use planbench::pddl::{ground, parse_domain, parse_problem, Domain, Problem};
use planbench::planner::{solve, Heuristic, SearchLimits, SearchStatus};
use planbench::validate::validate;
use serde::Serialize;

use crate::client::{EndpointConfig, HttpModel, MockModel, Model, RetryPolicy, DEFAULT_TOKEN_ENV};
use crate::run::{read_run_records, run_evaluation, EvalMode, RunOptions};

#[derive(Debug, Parser)]
#[command(name = "planbench", version, about = "Planning benchmark toolkit")]
pub struct Cli {
    /// Seed for generation, randomization and example selection.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

/// A PDDL domain and problem. The domain may also be a built-in name.
#[derive(Debug, Args)]
pub struct TaskArgs {
    #[arg(long)]
    pub domain: String,
    #[arg(long)]
    pub problem: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a labeled dataset as JSON lines.
    Generate {
        #[arg(long)]
        domain: DomainId,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Smallest counts, comma separated in parameter order.
        #[arg(long, value_delimiter = ',')]
        min: Option<Vec<u32>>,
        /// Largest counts, comma separated in parameter order.
        #[arg(long, value_delimiter = ',')]
        max: Option<Vec<u32>>,
    },
    /// Find an optimal plan.
    Solve {
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long, default_value = "lmcut")]
        heuristic: Heuristic,
        #[arg(long, default_value_t = 5_000_000)]
        max_generated: u64,
        #[arg(long, default_value_t = 120)]
        time_limit: u64,
    },
    /// Check a plan file (comma or newline separated actions).
    Validate {
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        optimal_cost: Option<u32>,
    },
    /// Render the compact form or a prompt.
    Encode {
        #[command(subcommand)]
        what: EncodeCommand,
    },
    /// Plan generalization error and aggregate tables.
    Metrics {
        #[command(subcommand)]
        what: MetricsCommand,
    },
    /// Rename the objects of a problem.
    Randomize {
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        version: u8,
        /// Dataset whose object names must be avoided.
        #[arg(long)]
        vocabulary: Option<PathBuf>,
    },
    /// Problems with optimal plan lengths outside a dataset's range.
    LengthSplit {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        domain: DomainId,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Run a model over a dataset's test split.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        /// `mock-optimal-echo`, `mock-empty`, or a model id served at `--endpoint`.
        #[arg(long)]
        model: String,
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long, default_value = DEFAULT_TOKEN_ENV)]
        token_env: String,
        #[arg(long, default_value_t = 0.2)]
        temperature: f64,
        #[arg(long, default_value_t = 512)]
        max_tokens: u32,
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
        #[arg(long, default_value_t = 3)]
        attempts: u32,
        #[arg(long, value_enum, default_value_t = EvalMode::ZeroShot)]
        mode: EvalMode,
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum EncodeCommand {
    Compact {
        #[command(flatten)]
        task: TaskArgs,
    },
    Prompt {
        #[command(flatten)]
        task: TaskArgs,
        /// Solved example problem; makes the prompt few-shot.
        #[arg(long, requires = "example_plan")]
        example_problem: Option<PathBuf>,
        #[arg(long, requires = "example_problem")]
        example_plan: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum MetricsCommand {
    /// Mean normalized Hamming distance over `{"reference", "candidate"}` lines.
    Epg {
        #[arg(long)]
        pairs: PathBuf,
    },
    /// Table over the records of an `evaluate` run.
    Aggregate {
        #[arg(long)]
        records: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_domain(arg: &str) -> Result<Domain> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Ok(id) = arg.parse::<DomainId>() {
            return Ok(id.domain().clone());
        }
    }
    parse_domain(&read(path)?).with_context(|| format!("parsing {arg}"))
}

fn load_task(args: &TaskArgs) -> Result<(Domain, Problem)> {
    let domain = load_domain(&args.domain)?;
    let problem = parse_problem(&read(&args.problem)?, &domain)
        .with_context(|| format!("parsing {}", args.problem.display()))?;
    Ok((domain, problem))
}

fn domain_text(arg: &str) -> Result<String> {
    match (Path::new(arg).exists(), arg.parse::<DomainId>()) {
        (false, Ok(id)) => Ok(id.domain_text().to_owned()),
        _ => read(Path::new(arg)),
    }
}

fn lines(path: &Path) -> Result<Vec<String>> {
    Ok(read(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_owned)
        .collect())
}

struct Output {
    format: Format,
    sink: Box<dyn Write>,
}

impl Output {
    fn emit<T: Serialize>(&mut self, value: &T, table: impl FnOnce() -> String) -> Result<()> {
        let text = match self.format {
            Format::Json => serde_json::to_string_pretty(value)? + "\n",
            Format::Table => table(),
        };
        self.sink.write_all(text.as_bytes())?;
        Ok(self.sink.flush()?)
    }
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let sink: Box<dyn Write> = match (&cli.out, &cli.command) {
        // These write their own files at --out.
        (_, Command::Evaluate { .. }) | (_, Command::Generate { .. }) | (None, _) => {
            Box::new(io::stdout())
        }
        (Some(p), _) => {
            Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
    };
    let mut out = Output {
        format: cli.format,
        sink,
    };
    match cli.command {
        Command::Generate {
            domain,
            count,
            min,
            max,
        } => {
            let mut spec = DatasetSpec::new(domain, count, cli.seed);
            if min.is_some() || max.is_some() {
                let d = spec.range;
                let lo = min.map_or(d.min, |c| d.min.with_counts(&c));
                let hi = max.map_or(d.max, |c| d.max.with_counts(&c));
                spec.range = ParamRange::new(lo, hi)?;
            }
            let ds = build_dataset(&spec)?;
            match &cli.out {
                Some(path) => {
                    write_jsonl(&ds.records, io::BufWriter::new(fs::File::create(path)?))?;
                    fs::write(
                        crate::run::manifest_path(path),
                        serde_json::to_string_pretty(&ds.manifest)? + "\n",
                    )?;
                    let m = &ds.manifest;
                    out.emit(m, || {
                        format!(
                            "{}: {} problems ({} train, {} test), mean generated {:.1}, class {}\n",
                            domain, m.records, m.train, m.test, m.mean_generated, m.difficulty
                        )
                    })?;
                }
                None => write_jsonl(&ds.records, &mut out.sink)?,
            }
        }
        Command::Solve {
            task,
            heuristic,
            max_generated,
            time_limit,
        } => {
            let (domain, problem) = load_task(&task)?;
            let ground_task = ground(&domain, &problem)?;
            let limits = SearchLimits::new(max_generated, Duration::from_secs(time_limit), 2048)?;
            let r = solve(&ground_task, heuristic, &limits);
            out.emit(&r, || {
                let mut s: String = r.plan.iter().map(|a| format!("({a})\n")).collect();
                s += &match r.status {
                    SearchStatus::Solved => format!("; cost = {} (unit cost)\n", r.cost),
                    SearchStatus::Unsolvable => "; unsolvable\n".to_owned(),
                    SearchStatus::LimitExceeded => "; search limit reached\n".to_owned(),
                };
                s + &format!(
                    "; generated {} evaluated {} expanded {}\n",
                    r.generated, r.evaluated, r.expanded
                )
            })?;
            if r.status == SearchStatus::LimitExceeded {
                bail!("search limit reached without a plan");
            }
        }
        Command::Validate {
            task,
            plan,
            optimal_cost,
        } => {
            let (domain, problem) = load_task(&task)?;
            let ground_task = ground(&domain, &problem)?;
            let steps = parse_plan_text(&read(&plan)?);
            let mut report = validate(&steps, &ground_task);
            if let Some(c) = optimal_cost {
                report = report.with_optimal_cost(c);
            }
            out.emit(&report, || {
                let mut s = format!(
                    "satisficing: {}\nexecutable: {}/{}\ngoals: {}/{} (degree {:.3})\n",
                    report.satisficing,
                    report.executable_prefix_len,
                    report.plan_length,
                    report.goals_achieved,
                    report.goals_total,
                    report.degree_of_correctness
                );
                if let Some(f) = &report.failure {
                    s += &format!(
                        "failure: {}\n",
                        serde_json::to_string(f).unwrap_or_default()
                    );
                }
                if let Some(o) = report.optimal {
                    s += &format!("optimal: {o}\n");
                }
                s
            })?;
        }
        Command::Encode { what } => match what {
            EncodeCommand::Compact { task } => {
                let (domain, problem) = load_task(&task)?;
                let form = to_compact(&domain, &problem);
                let pddl = format!("{}\n{}", domain_text(&task.domain)?, read(&task.problem)?);
                #[derive(Serialize)]
                struct Encoded<'a> {
                    compact: &'a str,
                    compact_tokens: usize,
                    pddl_tokens: usize,
                }
                let enc = Encoded {
                    compact: &form.text,
                    compact_tokens: token_count(&form.text),
                    pddl_tokens: token_count(&pddl),
                };
                out.emit(&enc, || format!("{}\n", form.text))?;
            }
            EncodeCommand::Prompt {
                task,
                example_problem,
                example_plan,
            } => {
                let template = match (example_problem, example_plan) {
                    (Some(p), Some(plan)) => PromptTemplate::few_shot(PromptExample {
                        problem_text: read(&p)?,
                        plan: parse_plan_text(&read(&plan)?),
                    }),
                    _ => PromptTemplate::zero_shot(),
                };
                let prompt = render_prompt(
                    &template,
                    &domain_text(&task.domain)?,
                    &read(&task.problem)?,
                )?;
                out.emit(&serde_json::json!({ "prompt": prompt }), || {
                    prompt.clone() + "\n"
                })?;
            }
        },
        Command::Metrics { what } => match what {
            MetricsCommand::Epg { pairs } => {
                let pairs: Vec<PlanPair> = lines(&pairs)?
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        serde_json::from_str(l).with_context(|| format!("pairs line {}", i + 1))
                    })
                    .collect::<Result<_>>()?;
                let e = plan_generalization_error(&pairs)?;
                let v = serde_json::json!({ "epg": e, "pairs": pairs.len(), "strong_generalization": strong_generalization(e) });
                out.emit(&v, || format!("{e:?}\n"))?;
            }
            MetricsCommand::Aggregate { records } => {
                let rs = read_run_records(&records)?;
                let report = aggregate(&rs.iter().map(|r| r.to_eval_record()).collect::<Vec<_>>());
                out.emit(&report, || report.to_table())?;
            }
        },
        Command::Randomize {
            task,
            version,
            vocabulary,
        } => {
            let (domain, problem) = load_task(&task)?;
            let vocab = match vocabulary {
                Some(p) => training_vocabulary(&read_jsonl(BufReader::new(fs::File::open(&p)?))?),
                None => Default::default(),
            };
            let (renamed, table) =
                randomize_object_names(&problem, &domain, version, cli.seed, &vocab)?;
            let v = serde_json::json!({ "problem": renamed.to_string(), "table": table });
            out.emit(&v, || {
                let mut s = format!("{renamed}\n");
                for (o, r) in table.iter() {
                    s += &format!("; {o} -> {r}\n");
                }
                s
            })?;
        }
        Command::LengthSplit {
            dataset,
            domain,
            length,
            count,
        } => {
            let records = read_jsonl(BufReader::new(fs::File::open(&dataset)?))?;
            let split = length_generalization_split(&records, domain, length, count, cli.seed)?;
            match out.format {
                Format::Json => write_jsonl(&split, &mut out.sink)?,
                Format::Table => {
                    for r in &split {
                        writeln!(
                            out.sink,
                            "{}\t{}\t{}",
                            r.id,
                            r.plan_length,
                            format_plan(&r.plan)
                        )?;
                    }
                }
            }
        }
        Command::Evaluate {
            dataset,
            model,
            endpoint,
            token_env,
            temperature,
            max_tokens,
            timeout,
            attempts,
            mode,
            concurrency,
        } => {
            let path = cli
                .out
                .ok_or_else(|| anyhow!("evaluate needs --out for its record file"))?;
            let records = read_jsonl(BufReader::new(fs::File::open(&dataset)?))?;
            let model: Box<dyn Model> = match (model.as_str(), endpoint) {
                ("mock-optimal-echo", _) => Box::new(MockModel::OptimalEcho),
                ("mock-empty", _) => Box::new(MockModel::Empty),
                (name, Some(url)) => {
                    let config = EndpointConfig {
                        token_env: (!token_env.is_empty()).then_some(token_env),
                        temperature,
                        max_tokens,
                        timeout_secs: timeout,
                        retry: RetryPolicy {
                            max_attempts: attempts,
                            ..RetryPolicy::default()
                        },
                        ..EndpointConfig::new(url, name)
                    };
                    config.validate()?;
                    Box::new(HttpModel { config })
                }
                (name, None) => bail!("model `{name}` needs --endpoint"),
            };
            let options = RunOptions {
                mode,
                concurrency,
                seed: cli.seed,
            };
            let summary = run_evaluation(&records, model.as_ref(), &options, &path)?;
            out.emit(&summary.report, || summary.report.to_table())?;
        }
    }
    Ok(())
}
