mod common;

use common::{data, load};
use planbench::encoding::{
    parse_compact, parse_plan_text, render_prompt, to_compact, token_count, PromptExample,
    PromptTemplate, FEW_SHOT_INSTRUCTION, ZERO_SHOT_INSTRUCTION,
};
use planbench::generators::{build_dataset, DatasetSpec, DomainId};
use planbench::validate::validate;

#[test]
fn compact_form_is_shorter_on_every_listing() {
    for (d, p) in [
        ("ferry-domain.pddl", "ferry-1.pddl"),
        ("blocksworld-domain.pddl", "bw-problem_3_1.pddl"),
        ("miconic-domain.pddl", "miconic-listing.pddl"),
        ("grippers-domain.pddl", "grippers-listing.pddl"),
        ("driverlog-domain.pddl", "driverlog-listing.pddl"),
    ] {
        let (domain, problem, _) = load(d, p);
        let form = to_compact(&domain, &problem);
        let pddl = format!("{}\n{}", data(d), data(p));
        let (c, full) = (token_count(&form.text), token_count(&pddl));
        assert!(c < full, "{p}: {c} vs {full}");
        assert_eq!(parse_compact(&form.text).unwrap(), form);
    }
}

#[test]
fn ferry_reduction_is_moderate() {
    let ds = build_dataset(&DatasetSpec::new(DomainId::Ferry, 40, 9)).unwrap();
    let text = DomainId::Ferry.domain_text();
    let mean = ds
        .records
        .iter()
        .map(|r| {
            1.0 - token_count(&r.compact) as f64
                / token_count(&format!("{text}\n{}", r.problem)) as f64
        })
        .sum::<f64>()
        / ds.records.len() as f64;
    assert!((0.25..=0.55).contains(&mean), "{mean}");
}

#[test]
fn prompts_from_files() {
    let domain = data("blocksworld-domain.pddl");
    let query = data("bw-problem_3_1.pddl");
    let zero = render_prompt(&PromptTemplate::zero_shot(), &domain, &query).unwrap();
    assert!(zero.ends_with(ZERO_SHOT_INSTRUCTION));
    assert!(zero.contains(query.trim_end()));

    let example = PromptExample {
        problem_text: data("bw-prob1.pddl"),
        plan: vec!["pick-up b1".into(), "stack b1 b2".into()],
    };
    let few = render_prompt(&PromptTemplate::few_shot(example), &domain, &query).unwrap();
    assert_eq!(few.matches("Plan:").count(), 2);
    assert!(few.contains("\nPlan:\npick-up b1, stack b1 b2\n"));
    assert!(few.contains(FEW_SHOT_INSTRUCTION));
    assert!(few.ends_with("Plan:\n"));
}

#[test]
fn model_style_output_parses_and_validates() {
    let (_, _, task) = load("blocksworld-domain.pddl", "bw-prob1.pddl");
    for raw in [
        "pick-up b1, stack b1 b2",
        "Plan: (pick-up b1), (stack b1 b2)",
        "PICK-UP B1\nstack  b1 b2\n",
    ] {
        let plan = parse_plan_text(raw);
        assert!(validate(&plan, &task).satisficing, "{raw:?}");
    }
    let truncated = parse_plan_text("pick-up b1, stack b1");
    let report = validate(&truncated, &task);
    assert_eq!(report.executable_prefix_len, 1);
    assert!(!report.satisficing);
}
