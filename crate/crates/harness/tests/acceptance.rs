//! Acceptance criteria 1-10 at full size. Prints one line per criterion and
//! exits nonzero if any fails.
//!
//!     cargo test --release -p planbench-harness --test acceptance

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::HashSet;
use std::time::Instant;

use common::{bfs_distance, labeled, perturb, simulate, small_params};
use planbench::encoding::token_count;
use planbench::generators::{
    build_dataset, canonical_hash, generate_labeled, write_jsonl, Dataset, DatasetRecord,
    DatasetSpec, DomainId, GeneratorParams, LabeledProblem, Split,
};
use planbench::metrics::{
    map_plan_through_table, plan_generalization_error, randomize_object_names,
    strong_generalization, training_vocabulary, Direction, PlanPair,
};
use planbench::pddl::{ground, ActionId, GroundTask, State};
use planbench::planner::{bfs_oracle, hmax, lmcut, solve, Heuristic, OracleOutcome, SearchLimits};
use planbench::validate::validate;
use planbench_harness::{run_evaluation, MockModel, RunOptions};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 2024;
const SMALL_PER_DOMAIN: usize = 200;
const ORACLE_CAP: usize = 200_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Small problems shared by criteria 1, 3 and 4.
fn small_problems() -> Vec<(DomainId, LabeledProblem)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();
    for domain in DomainId::ALL {
        for _ in 0..SMALL_PER_DOMAIN {
            let params = small_params(domain, &mut rng);
            out.push((domain, labeled(&params, rng.gen())));
        }
    }
    out
}

fn criterion_1(problems: &[(DomainId, LabeledProblem)], start: Instant) -> Outcome {
    let mut bad = Vec::new();
    for (domain, l) in problems {
        match bfs_oracle(&l.task, ORACLE_CAP) {
            Ok(OracleOutcome::Optimal(c)) if c == l.solution.cost => {}
            other => bad.push(format!(
                "{domain} {}: lmcut {} vs {other:?}",
                l.problem.name, l.solution.cost
            )),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs <= 600.0,
        format!(
            "{}/{} agree with BFS, {secs:.1}s {}",
            problems.len() - bad.len(),
            problems.len(),
            bad.join("; ")
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut costs = Vec::new();
    let mut pass = true;
    for n in 1..=7u32 {
        let params = GeneratorParams::Hanoi {
            disks: n,
            pegs: 3,
            scrambled: false,
        };
        let l = generate_labeled(&params, SEED, &SearchLimits::default()).unwrap();
        pass &= l.solution.cost == (1 << n) - 1;
        costs.push(l.solution.cost.to_string());
    }
    outcome(pass, format!("costs for n=1..7: {}", costs.join(" ")))
}

fn walk(task: &GroundTask, rng: &mut ChaCha8Rng, steps: usize) -> Vec<State> {
    let mut s = task.initial_state();
    let mut out = vec![s.clone()];
    for _ in 0..steps {
        let ok: Vec<u32> = (0..task.actions().len() as u32)
            .filter(|&a| task.is_applicable(&s, ActionId(a)))
            .collect();
        let Some(&a) = ok.choose(rng) else { break };
        s = task.apply(&s, ActionId(a)).unwrap();
        out.push(s.clone());
    }
    out
}

fn criterion_3(problems: &[(DomainId, LabeledProblem)]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    let (mut states, mut unsolvable, mut skipped) = (0, 0, 0);
    let mut bad = Vec::new();
    for (domain, l) in problems {
        let task = &l.task;
        for s in walk(task, &mut rng, 6) {
            let Some(exact) = bfs_distance(task, &s, ORACLE_CAP) else {
                skipped += 1;
                continue;
            };
            states += 1;
            let (hm, lm) = (hmax(task, &s), lmcut(task, &s));
            let ok = match (exact, hm, lm) {
                (Some(d), Some(hm), Some(lm)) => hm <= lm && lm <= d,
                (None, None, None) => {
                    unsolvable += 1;
                    true
                }
                _ => false,
            };
            if !ok {
                bad.push(format!(
                    "{domain} {}: hmax {hm:?} lmcut {lm:?} exact {exact:?}",
                    l.problem.name
                ));
            }
        }
        let mut goal = task.initial_state();
        for a in &l.solution.actions {
            goal = task.apply(&goal, *a).unwrap();
        }
        if lmcut(task, &goal) != Some(0) {
            bad.push(format!(
                "{domain} {}: lmcut at goal {:?}",
                l.problem.name,
                lmcut(task, &goal)
            ));
        }
    }
    outcome(
        bad.is_empty() && skipped == 0,
        format!(
            "{states} states ({unsolvable} dead ends), {skipped} over the oracle cap, {} violations {}",
            bad.len(),
            bad.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
        ),
    )
}

fn criterion_4(problems: &[(DomainId, LabeledProblem)]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let mut per_domain = std::collections::BTreeMap::new();
    let mut bad = Vec::new();
    for (domain, l) in problems {
        let opt = &l.solution.plan;
        let twice = {
            let k = rng.gen_range(0..3);
            let once = perturb(opt, k, &mut rng);
            perturb(&once, rng.gen_range(0..3), &mut rng)
        };
        let plans = [
            opt.clone(),
            perturb(opt, 0, &mut rng),
            perturb(opt, 1, &mut rng),
            perturb(opt, 2, &mut rng),
            twice,
        ];
        for plan in plans {
            *per_domain.entry(*domain).or_insert(0) += 1;
            let r = validate(&plan, &l.task);
            let sim = simulate(domain.domain(), &l.problem, &plan);
            let same = r.executable_prefix_len == sim.prefix
                && r.failure.is_some() == sim.failed
                && r.satisficing == sim.satisficing
                && r.degree_of_correctness == sim.degree;
            if !same {
                bad.push(format!("{domain} {}: {plan:?}", l.problem.name));
            }
        }
    }
    let enough = per_domain.values().all(|&n| n >= 1000);
    outcome(
        bad.is_empty() && enough,
        format!(
            "{} plans per domain, {} disagreements {}",
            per_domain.values().min().unwrap(),
            bad.len(),
            bad.join("; ")
        ),
    )
}

fn criterion_5(ferry: &mut Vec<DatasetRecord>) -> Outcome {
    let start = Instant::now();
    let order = [
        DomainId::Ferry,
        DomainId::Blocksworld,
        DomainId::Hanoi,
        DomainId::Miconic,
        DomainId::Driverlog,
        DomainId::Grippers,
    ];
    let sets: Vec<Dataset> = order
        .iter()
        .map(|d| build_dataset(&DatasetSpec::new(*d, 500, SEED)).unwrap())
        .collect();
    let means: Vec<f64> = sets.iter().map(|s| s.manifest.mean_generated).collect();
    let ratios: Vec<f64> = means.windows(2).map(|w| w[1] / w[0]).collect();
    let secs = start.elapsed().as_secs_f64();
    *ferry = sets[0].records.clone();
    outcome(
        ratios.iter().all(|&r| r >= 1.1) && secs <= 1800.0,
        format!(
            "{} | ratios {} | {secs:.1}s",
            order
                .iter()
                .zip(&means)
                .map(|(d, m)| format!("{d} {m:.1}"))
                .collect::<Vec<_>>()
                .join(" < "),
            ratios
                .iter()
                .map(|r| format!("{r:.2}"))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    )
}

fn criterion_6(ferry: &[DatasetRecord]) -> Outcome {
    let text = DomainId::Ferry.domain_text();
    let reduction = ferry
        .iter()
        .map(|r| {
            1.0 - token_count(&r.compact) as f64
                / token_count(&format!("{text}\n{}", r.problem)) as f64
        })
        .sum::<f64>()
        / ferry.len() as f64;
    outcome(
        ferry.len() == 500 && (0.25..=0.55).contains(&reduction),
        format!(
            "mean reduction {:.1}% over {} ferry problems",
            100.0 * reduction,
            ferry.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let vocab = ["a x", "b y", "c", "d z", "e"];
    let plan = |rng: &mut ChaCha8Rng, n: usize| -> Vec<String> {
        (0..n)
            .map(|_| vocab.choose(rng).unwrap().to_string())
            .collect()
    };
    let mut checks = Vec::new();

    let same: Vec<PlanPair> = (0..50)
        .map(|_| {
            let p = plan(&mut rng, 6);
            PlanPair::new(p.clone(), p)
        })
        .collect();
    checks.push((
        "identical",
        plan_generalization_error(&same).unwrap() == 0.0,
    ));
    let empty: Vec<PlanPair> = (0..50)
        .map(|_| PlanPair {
            reference: plan(&mut rng, 5),
            candidate: vec![],
        })
        .collect();
    checks.push((
        "all empty",
        plan_generalization_error(&empty).unwrap() == 1.0,
    ));

    let (mut bounded, mut grows) = (true, true);
    for _ in 0..1000 {
        let k = rng.gen_range(1..5);
        let mut pairs: Vec<PlanPair> = (0..k)
            .map(|_| {
                let (a, b) = (rng.gen_range(0..8), rng.gen_range(0..8));
                PlanPair {
                    reference: plan(&mut rng, a),
                    candidate: plan(&mut rng, b),
                }
            })
            .collect();
        let e = plan_generalization_error(&pairs).unwrap();
        bounded &= (0.0..=1.0).contains(&e);
        let matching: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .flat_map(|(i, p)| {
                (0..p.reference.len().min(p.candidate.len()))
                    .filter(move |&j| p.reference[j] == p.candidate[j])
                    .map(move |j| (i, j))
            })
            .collect();
        if let Some(&(i, j)) = matching.choose(&mut rng) {
            pairs[i].candidate[j] = "corrupted".into();
            grows &= plan_generalization_error(&pairs).unwrap() > e;
        }
    }
    checks.push(("bounded", bounded));
    checks.push(("corruption increases", grows));
    checks.push((
        "threshold",
        strong_generalization(0.5) && !strong_generalization(0.5f64.next_up()),
    ));
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(
        failed.is_empty(),
        format!("{} checks, failing: {failed:?}", checks.len()),
    )
}

fn jsonl(records: &[DatasetRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    write_jsonl(records, &mut out).unwrap();
    out
}

fn criterion_8(sets: &[Dataset]) -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    for ds in sets {
        let d = ds.manifest.spec.domain;
        let hashes: HashSet<String> = ds
            .records
            .iter()
            .map(|r| canonical_hash(&r.parsed_problem().unwrap()))
            .collect();
        let unique = hashes.len() == ds.records.len();
        let rebuilt = build_dataset(&ds.manifest.spec).unwrap();
        let identical = jsonl(&rebuilt.records) == jsonl(&ds.records);
        let test = ds.records.iter().filter(|r| r.split == Split::Test).count();
        let split_ok = (test as f64 - 0.2 * ds.records.len() as f64).abs() <= 1.0;
        let mut tasks = Vec::new();
        let mut valid = true;
        for r in &ds.records {
            let task = ground(d.domain(), &r.parsed_problem().unwrap()).unwrap();
            let rep = validate(&r.plan, &task);
            valid &= rep.satisficing && rep.degree_of_correctness == 1.0;
            tasks.push(task);
        }
        let mut idx: Vec<usize> = (0..ds.records.len()).collect();
        idx.shuffle(&mut rng);
        let sample = &idx[..ds.records.len().div_ceil(20)];
        let optimal = sample.iter().all(|&i| {
            bfs_oracle(&tasks[i], 20_000_000)
                == Ok(OracleOutcome::Optimal(ds.records[i].plan_length as u32))
        });
        let ok = unique && identical && split_ok && valid && optimal && ds.records.len() == 1000;
        pass &= ok;
        notes.push(format!(
            "{d}: {} records{}{}{}{}{}",
            ds.records.len(),
            if unique { "" } else { " DUPLICATES" },
            if identical { "" } else { " NOT-REPRODUCIBLE" },
            if split_ok {
                format!(" test {test}")
            } else {
                format!(" BAD-SPLIT {test}")
            },
            if valid { "" } else { " INVALID-PLAN" },
            if optimal {
                format!(" bfs-checked {}", sample.len())
            } else {
                " NOT-OPTIMAL".into()
            },
        ));
    }
    outcome(
        pass,
        format!(
            "{} | {:.1}s",
            notes.join("; "),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_9(sets: &[Dataset]) -> Outcome {
    let train: Vec<DatasetRecord> = sets
        .iter()
        .flat_map(|s| {
            s.records
                .iter()
                .filter(|r| r.split == Split::Train)
                .cloned()
        })
        .collect();
    let vocabulary = training_vocabulary(&train);
    let mut notes = Vec::new();
    let mut pass = true;
    for version in 1..=3u8 {
        let pool: Vec<&DatasetRecord> = (0..200)
            .flat_map(|i| {
                sets.iter()
                    .filter_map(move |s| s.records.iter().filter(|r| r.split == Split::Test).nth(i))
            })
            .filter(|r| version != 1 || r.parsed_problem().unwrap().objects.len() <= 10)
            .take(100)
            .collect();
        let mut good = 0;
        for r in &pool {
            let problem = r.parsed_problem().unwrap();
            let (renamed, table) =
                randomize_object_names(&problem, r.domain.domain(), version, SEED, &vocabulary)
                    .unwrap();
            let task = ground(r.domain.domain(), &renamed).unwrap();
            let cost = solve(&task, Heuristic::Lmcut, &SearchLimits::default()).cost;
            let mapped = map_plan_through_table(&r.plan, &table, Direction::ToRandomized);
            let rep = validate(&mapped.plan, &task).with_optimal_cost(cost);
            if cost as usize == r.plan_length
                && mapped.unknown.is_empty()
                && rep.optimal == Some(true)
            {
                good += 1;
            }
        }
        pass &= pool.len() == 100 && good == 100;
        notes.push(format!("v{version} {good}/{}", pool.len()));
    }
    outcome(pass, notes.join(", "))
}

fn criterion_10(sets: &[Dataset]) -> Outcome {
    let records: Vec<DatasetRecord> = sets
        .iter()
        .flat_map(|s| {
            s.records
                .iter()
                .filter(|r| r.split == Split::Test)
                .take(50)
                .cloned()
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let options = RunOptions::default();
    let echo = run_evaluation(
        &records,
        &MockModel::OptimalEcho,
        &options,
        &dir.path().join("echo.jsonl"),
    )
    .unwrap();
    let empty = run_evaluation(
        &records,
        &MockModel::Empty,
        &options,
        &dir.path().join("empty.jsonl"),
    )
    .unwrap();
    let epg = |s: &planbench_harness::RunSummary| {
        let pairs: Vec<PlanPair> = s
            .records
            .iter()
            .map(|r| PlanPair {
                reference: records.iter().find(|d| d.id == r.id).unwrap().plan.clone(),
                candidate: r.plan.clone(),
            })
            .collect();
        plan_generalization_error(&pairs).unwrap()
    };
    let (e_echo, e_empty) = (epg(&echo), epg(&empty));
    let classes: HashSet<_> = echo.report.rows.iter().map(|r| r.difficulty).collect();
    let echo_ok = echo.records.len() == 300
        && classes.len() == 3
        && echo.report.rows.iter().all(|r| {
            r.satisficing_pct == 100.0
                && r.optimal_pct == 100.0
                && r.mean_degree_of_correctness == 1.0
                && r.mean_plan_error == 0.0
        })
        && e_echo == 0.0;
    let empty_ok = empty.records.len() == 300
        && empty.report.rows.iter().all(|r| r.satisficing_pct == 0.0)
        && e_empty == 1.0;
    outcome(
        echo_ok && empty_ok,
        format!(
            "{} problems over {} classes; echo E_pg {e_echo}, empty E_pg {e_empty}\n{}",
            echo.records.len(),
            classes.len(),
            echo.report.to_table()
        ),
    )
}

fn main() {
    let total = Instant::now();
    let mut results: Vec<(u8, Outcome, f64)> = Vec::new();
    let mut timed = |n: u8, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "criterion {n}: {} ({secs:.1}s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, o, secs));
    };

    let start = Instant::now();
    let small = small_problems();
    timed(1, &mut || criterion_1(&small, start));
    timed(2, &mut criterion_2);
    timed(3, &mut || criterion_3(&small));
    timed(4, &mut || criterion_4(&small));
    let mut ferry = Vec::new();
    timed(5, &mut || criterion_5(&mut ferry));
    timed(6, &mut || criterion_6(&ferry));
    timed(7, &mut criterion_7);
    let sets: Vec<Dataset> = DomainId::ALL
        .iter()
        .map(|d| build_dataset(&DatasetSpec::new(*d, 1000, SEED)).unwrap())
        .collect();
    timed(8, &mut || criterion_8(&sets));
    timed(9, &mut || criterion_9(&sets));
    timed(10, &mut || criterion_10(&sets));

    let failed: Vec<u8> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        results.len() - failed.len(),
        results.len(),
        total.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
