"""Smoke test for the planbench extension module.

Build first:  pip install --no-build-isolation -e crates/python
"""

from pathlib import Path

import planbench as pb

DATA = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"


def main():
    domain = (DATA / "ferry-domain.pddl").read_text()
    problem = (DATA / "ferry-1.pddl").read_text()

    task = pb.Task(domain, problem)
    assert task.num_actions > 0
    assert task.hmax() <= task.lmcut() <= 8

    result = task.solve()
    assert result.status == "solved", result
    assert result.cost == 8 and len(result.plan) == 8
    assert task.bfs_oracle() == 8

    report = task.validate(result.plan, optimal_cost=8)
    assert report.satisficing and report.optimal
    assert report.degree_of_correctness == 1.0

    broken = task.validate(result.plan[1:])
    assert not broken.satisficing

    text = "\n".join(f"({a})" for a in result.plan)
    assert pb.parse_plan_text(text) == result.plan
    assert task.validate(text).satisficing

    compact = pb.to_compact(domain, problem)
    assert compact.startswith("<GOAL>")
    assert pb.token_count(compact) < pb.token_count(problem)
    prompt = pb.render_prompt(domain, problem)
    assert "(define (problem ferry-1)" in prompt

    assert pb.hamming_distance(["a", "b"], ["a", "c", "d"]) == 2
    assert pb.plan_generalization_error([(result.plan, result.plan)]) == 0.0
    assert pb.plan_generalization_error([(result.plan, [])]) == 1.0
    assert pb.strong_generalization(0.5)

    generated = pb.generate_problem("blocksworld", [4], seed=3)
    bw = pb.Task("blocksworld", generated)
    assert bw.solve().status == "solved"

    records, manifest = pb.build_dataset("hanoi", 10, seed=1)
    assert len(records) == 10
    assert manifest["records"] == 10
    assert manifest["train"] + manifest["test"] == 10
    assert {r["split"] for r in records} <= {"train", "test"}

    renamed, table = pb.randomize_object_names(domain, problem, 2, seed=5)
    shuffled = pb.Task(domain, renamed)
    mapped, unknown = pb.map_plan(result.plan, table)
    assert not unknown
    assert shuffled.validate(mapped).satisficing
    back, _ = pb.map_plan(mapped, table, to_original=True)
    assert back == result.plan

    print(f"planbench {pb.__version__}: ok ({len(pb.DOMAINS)} domains)")


if __name__ == "__main__":
    main()
