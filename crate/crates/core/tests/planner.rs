mod common;

use std::time::Duration;

use common::{bfs_distance, hmax_fixpoint, labeled, load, small_params};
use planbench::generators::{generate_labeled, DomainId, GeneratorParams};
use planbench::pddl::{ground, ActionId, GroundTask, State};
use planbench::planner::{
    bfs_oracle, hmax, lmcut, solve, Heuristic, OracleOutcome, SearchLimits, SearchStatus,
};
use planbench::validate::validate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tower(disks: u32) -> GroundTask {
    let params = GeneratorParams::Hanoi {
        disks,
        pegs: 3,
        scrambled: false,
    };
    labeled(&params, 1).task
}

#[test]
fn hanoi_tower_costs_two_to_the_n_minus_one() {
    for n in 1..=5 {
        let r = solve(&tower(n), Heuristic::Lmcut, &SearchLimits::default());
        assert_eq!(r.status, SearchStatus::Solved);
        assert_eq!(r.cost, (1 << n) - 1, "n = {n}");
    }
}

#[test]
fn ferry_1_costs_eight_under_every_heuristic() {
    let (_, _, task) = load("ferry-domain.pddl", "ferry-1.pddl");
    for h in [Heuristic::Lmcut, Heuristic::Hmax, Heuristic::Blind] {
        let r = solve(&task, h, &SearchLimits::default());
        assert_eq!(r.cost, 8, "{h}");
        assert!(validate(&r.plan, &task).satisficing);
    }
    assert_eq!(
        bfs_oracle(&task, 100_000).unwrap(),
        OracleOutcome::Optimal(8)
    );
}

#[test]
fn bw_prob1_plan() {
    let (_, _, task) = load("blocksworld-domain.pddl", "bw-prob1.pddl");
    let r = solve(&task, Heuristic::Lmcut, &SearchLimits::default());
    assert_eq!(r.plan, ["pick-up b1", "stack b1 b2"]);
    assert!(r.generated >= r.expanded);
    assert!(r.evaluated >= 1);
}

#[test]
fn few_shot_query_problem_is_optimal() {
    // b3 has to come off b1 before b2 can go under it.
    let (_, _, task) = load("blocksworld-domain.pddl", "bw-problem_3_1.pddl");
    let r = solve(&task, Heuristic::Lmcut, &SearchLimits::default());
    assert_eq!(r.cost, 6);
    assert_eq!(
        bfs_oracle(&task, 100_000).unwrap(),
        OracleOutcome::Optimal(6)
    );
    assert!(validate(&r.plan, &task).satisficing);
}

#[test]
fn unsolvable_and_goal_states() {
    let (_, _, task) = load("ferry-domain.pddl", "ferry-listing.pddl");
    let r = solve(&task, Heuristic::Lmcut, &SearchLimits::default());
    assert_eq!(r.status, SearchStatus::Unsolvable);
    assert!(r.plan.is_empty());

    let (_, _, bw) = load("blocksworld-domain.pddl", "bw-prob1.pddl");
    let goal_state = bw
        .apply(
            &bw.apply(&bw.initial_state(), bw.action_id("pick-up b1").unwrap())
                .unwrap(),
            bw.action_id("stack b1 b2").unwrap(),
        )
        .unwrap();
    assert!(bw.is_goal(&goal_state));
    assert_eq!(lmcut(&bw, &goal_state), Some(0));
    assert_eq!(hmax(&bw, &goal_state), Some(0));
}

#[test]
fn limits_are_enforced() {
    assert!(SearchLimits::new(0, Duration::from_secs(1), 1).is_err());
    assert!(SearchLimits::new(1, Duration::ZERO, 1).is_err());
    assert!(SearchLimits::new(1, Duration::from_secs(1), 0).is_err());
    let limits = SearchLimits::new(3, Duration::from_secs(10), 64).unwrap();
    let r = solve(&tower(4), Heuristic::Blind, &limits);
    assert_eq!(r.status, SearchStatus::LimitExceeded);
    assert!(r.plan.is_empty());
}

#[test]
fn heuristics_agree_on_optimal_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for domain in DomainId::ALL {
        for seed in 0..6 {
            let params = small_params(domain, &mut rng);
            let task = labeled(&params, seed).task;
            let costs: Vec<u32> = [Heuristic::Lmcut, Heuristic::Hmax, Heuristic::Blind]
                .iter()
                .map(|h| solve(&task, *h, &SearchLimits::default()).cost)
                .collect();
            assert!(
                costs.windows(2).all(|w| w[0] == w[1]),
                "{params}: {costs:?}"
            );
        }
    }
}

fn random_walk_states(task: &GroundTask, rng: &mut ChaCha8Rng, n: usize) -> Vec<State> {
    let mut out = vec![task.initial_state()];
    let mut s = task.initial_state();
    for _ in 0..n {
        let applicable: Vec<usize> = (0..task.actions().len())
            .filter(|&i| task.is_applicable(&s, ActionId(i as u32)))
            .collect();
        let Some(&a) = applicable.choose(rng) else {
            break;
        };
        s = task.apply(&s, ActionId(a as u32)).unwrap();
        out.push(s.clone());
    }
    out
}

#[test]
fn hmax_matches_bellman_ford_fixpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for domain in DomainId::ALL {
        for seed in 0..4 {
            let params = small_params(domain, &mut rng);
            let task = labeled(&params, seed).task;
            for s in random_walk_states(&task, &mut rng, 12) {
                assert_eq!(hmax(&task, &s), hmax_fixpoint(&task, &s), "{params}");
            }
        }
    }
}

#[test]
fn lmcut_is_sandwiched_between_hmax_and_true_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for domain in DomainId::ALL {
        for seed in 0..4 {
            let params = small_params(domain, &mut rng);
            let task = labeled(&params, seed).task;
            for s in random_walk_states(&task, &mut rng, 10) {
                let hm = hmax(&task, &s);
                let lm = lmcut(&task, &s);
                let Some(exact) = bfs_distance(&task, &s, 200_000) else {
                    continue;
                };
                match exact {
                    Some(d) => {
                        let (hm, lm) = (hm.unwrap(), lm.unwrap());
                        assert!(hm <= lm && lm <= d, "{params}: {hm} {lm} {d}");
                    }
                    None => assert_eq!(hm.is_none(), lm.is_none()),
                }
            }
        }
    }
}

#[test]
fn optimal_cost_matches_breadth_first_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for domain in DomainId::ALL {
        for _ in 0..10 {
            let params = small_params(domain, &mut rng);
            let seed = rng.gen();
            let l = generate_labeled(&params, seed, &SearchLimits::default()).unwrap();
            let oracle = bfs_oracle(&l.task, 200_000).unwrap();
            assert_eq!(
                oracle,
                OracleOutcome::Optimal(l.solution.cost),
                "{params} seed {seed}"
            );
        }
    }
}

#[test]
fn search_counts_are_reproducible() {
    let (d, p, _) = load("grippers-domain.pddl", "grippers-listing.pddl");
    let a = solve(
        &ground(&d, &p).unwrap(),
        Heuristic::Lmcut,
        &SearchLimits::default(),
    );
    let b = solve(
        &ground(&d, &p).unwrap(),
        Heuristic::Lmcut,
        &SearchLimits::default(),
    );
    assert_eq!(
        (a.plan, a.generated, a.evaluated),
        (b.plan, b.generated, b.evaluated)
    );
}
