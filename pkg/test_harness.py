import json
import math

import numpy as np
import pandas as pd
import pytest

from src.harness import (
    CHECKPOINT_FILE,
    COLUMNS,
    ConfigHashMismatch,
    ExperimentConfig,
    IntervalStats,
    SuiteFormatError,
    benchmark_layout,
    build_parser,
    closed_loop,
    evaluate_skills,
    feasibility_set,
    learned_actor,
    load_benchmarks,
    load_checkpoint,
    load_config,
    main,
    mode_means,
    new_training_state,
    oracle_actor,
    ordering_holds,
    parameter_digest,
    random_actor,
    read_metrics,
    read_summary,
    roc_auc,
    run_comparison,
    run_gradcheck,
    run_sequential_eval,
    run_training,
    run_value_check,
    save_checkpoint,
    screen_layout,
    write_metrics,
)
from src.harness.metrics import METRICS_FILE
from src.harness.suites import load_eval_suites
from src.harness.training import EPISODES_FILE, SELECTION_FILE, episode_seed
from src.sampler import SamplerConfig, SamplerMode
from src.taskspace import SKILL_KINDS, EnvContext, ObjectKind, SkillKind, inworkspace, on, under
from src.world import ObjectState, WorldConfig, WorldState, check_invariants, replay_log, table_state
from src.utils.helpers import delete_run, list_runs, load_run, plan_benchmark, sample_tasks


def tiny_config(**overrides):
    fields = dict(
        seed=0,
        iterations=6,
        eval_interval=3,
        eval_episodes=2,
        batch_size=4,
        sampler=SamplerConfig(m=8, k=2, warmup=3, n_candidates=8),
    )
    fields.update(overrides)
    return ExperimentConfig(**fields)


@pytest.fixture(scope="module")
def suites():
    return load_eval_suites()


@pytest.fixture(scope="module")
def small_suites(suites):
    return {k: tasks[:1] for k, tasks in suites.items()}


def hook_world():
    return WorldState(objects=(
        table_state(WorldConfig()),
        ObjectState(1, ObjectKind.CAN, (0.07, 0.07, 0.12), (1.0, 0.4, 0.05, 0.0)),
        ObjectState(2, ObjectKind.HOOK, (0.4, 0.05, 0.04), (0.5, 0.0, 0.05, 0.0)),
    ))


# config and metrics


def test_config_hash_ignores_output_directory():
    a = ExperimentConfig(out="runs/a")
    assert a.config_hash() == ExperimentConfig(out="runs/b").config_hash()
    assert a.config_hash() != ExperimentConfig(seed=1).config_hash()


def test_load_config_applies_overrides(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"seed": 4, "iterations": 10}), encoding="utf-8")
    cfg = load_config(path, iterations=None, mode="uniform")
    assert cfg.seed == 4 and cfg.iterations == 10
    assert cfg.mode is SamplerMode.UNIFORM
    assert load_config(tmp_path / "missing.json").iterations == 10_000


def test_metrics_rows_and_table(tmp_path):
    rates = {k: 0.5 for k in SKILL_KINDS}
    row = IntervalStats(rewards=[1, 0]).row(3, rates)
    assert list(row) == COLUMNS
    assert row["reward_fraction"] == 0.5
    assert math.isnan(row["value_loss"])
    with pytest.raises(ValueError):
        IntervalStats().row(3, {**rates, SkillKind.PULL_WITH: 1.5})

    write_metrics(tmp_path, [row])
    df = read_metrics(tmp_path)
    assert list(df.columns) == COLUMNS
    assert df["iteration"].tolist() == [3]

    df["schema_version"] = 2
    df.to_csv(tmp_path / METRICS_FILE, index=False)
    with pytest.raises(ValueError):
        read_metrics(tmp_path)


def test_suites_and_benchmarks_load(suites, tmp_path):
    assert all(len(suites[k]) == 5 for k in SKILL_KINDS)
    assert {b.name for b in load_benchmarks()} == {"hook-then-rack", "container-under-rack", "rack-and-container"}
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"suites": {}}), encoding="utf-8")
    with pytest.raises(SuiteFormatError):
        load_eval_suites(bad)


# evaluation


def test_oracle_solves_every_suite(suites):
    rates = evaluate_skills(oracle_actor(), suites, episodes=5)
    assert rates == {k: 1.0 for k in SKILL_KINDS}


def test_random_and_learned_actors_give_rates(small_suites):
    rates = evaluate_skills(random_actor(), small_suites, episodes=2)
    assert all(0.0 <= r <= 1.0 for r in rates.values())

    state = new_training_state(tiny_config())
    before = parameter_digest(state)
    evaluate_skills(learned_actor(state.policies), small_suites, episodes=2, skills=[SkillKind.PLACE_ONTO])
    assert parameter_digest(state) == before
    assert len(state.buffer) == 0


def test_closed_loop_edge_cases():
    world = hook_world()
    rng = np.random.default_rng(0)
    done = closed_loop(world, frozenset({on(1, 0)}), EnvContext(), oracle_actor(), rng)
    assert done.success and done.steps == []

    capped = closed_loop(world, frozenset({inworkspace(1)}), EnvContext(), oracle_actor(), rng, max_steps=0)
    assert not capped.success and capped.reason == "step cap"

    stuck = closed_loop(world, frozenset({under(1, 2)}), EnvContext(), oracle_actor(), rng)
    assert not stuck.success and stuck.reason == "no plan"

    pulled = closed_loop(world, frozenset({inworkspace(1)}), EnvContext(), oracle_actor(), rng)
    assert pulled.success and len(pulled.steps) == 1 and pulled.failures == 0


def test_sequential_eval_with_oracle():
    family = [b for b in load_benchmarks() if b.name == "hook-then-rack"]
    assert run_sequential_eval(oracle_actor(), family, trials=2) == {"hook-then-rack": 1.0}


def hook_rack_world(hook_xy, rack_xy):
    return WorldState(objects=(
        table_state(WorldConfig()),
        ObjectState(1, ObjectKind.CAN, (0.06, 0.06, 0.10), (1.0, 0.0, 0.05, 0.0)),
        ObjectState(2, ObjectKind.HOOK, (0.40, 0.06, 0.04), (*hook_xy, 0.05, 0.0)),
        ObjectState(3, ObjectKind.RACK, (0.32, 0.28, 0.24), (*rack_xy, 0.05, 0.0)),
    ))


def test_screen_rejects_a_hook_in_the_push_path():
    goal = frozenset({under(1, 3)})
    clear = hook_rack_world((0.5, -0.3), (0.5, 0.35))
    report = screen_layout(clear, goal)
    assert report.ok and [c.skill for c in report.steps] == [SkillKind.PULL_WITH, SkillKind.PUSH_UNDER]
    assert closed_loop(clear, goal, EnvContext(), oracle_actor(), np.random.default_rng(0)).success

    blocked = hook_rack_world((0.62, 0.17), (0.45, 0.42))
    report = screen_layout(blocked, goal)
    assert not report.ok and "blocked by object 2" in report.reason
    outcome = closed_loop(blocked, goal, EnvContext(), oracle_actor(), np.random.default_rng(0))
    assert not outcome.success and outcome.reason == "step cap"


def test_benchmark_layouts_never_consult_the_analytic_actors(monkeypatch):
    def refuse(*args, **kwargs):
        raise AssertionError("layout selection ran an analytic actor")

    monkeypatch.setattr("src.policy.oracle.oracle_action", refuse)
    monkeypatch.setattr("src.harness.evaluation.oracle_action", refuse)
    for bench in load_benchmarks():
        world = benchmark_layout(bench, 0)
        assert screen_layout(world, bench.goal).ok
        raw = benchmark_layout(bench, 0, screened=False)
        assert check_invariants(raw) == []


def test_raw_layouts_report_a_rate():
    family = [b for b in load_benchmarks() if b.name == "hook-then-rack"]
    rates = run_sequential_eval(random_actor(), family, trials=2, screened=False, max_steps=2)
    assert 0.0 <= rates["hook-then-rack"] <= 1.0


# training


def test_training_is_deterministic(tmp_path, small_suites):
    cfg = tiny_config()
    first = run_training(cfg, tmp_path / "a", suites=small_suites)
    second = run_training(cfg, tmp_path / "b", suites=small_suites)
    assert (tmp_path / "a" / METRICS_FILE).read_bytes() == (tmp_path / "b" / METRICS_FILE).read_bytes()
    assert (tmp_path / "a" / EPISODES_FILE).read_bytes() == (tmp_path / "b" / EPISODES_FILE).read_bytes()
    assert parameter_digest(first.state) == parameter_digest(second.state)

    assert first.metrics["iteration"].tolist() == [3, 6]
    assert first.state.env_steps == first.state.iteration == 6
    assert len((tmp_path / "a" / SELECTION_FILE).read_text().splitlines()) == 6
    assert replay_log(tmp_path / "a" / EPISODES_FILE).ok

    summary = read_summary(tmp_path / "a")
    assert summary["status"] == "complete"
    assert summary["config_hash"] == cfg.config_hash()
    assert set(summary["final_success"]) == {k.value for k in SKILL_KINDS}


def test_episode_seeds_are_distinct():
    seeds = {episode_seed(0, it) for it in range(1000)}
    assert len(seeds) == 1000
    assert episode_seed(0, 5) != episode_seed(1, 5)
    assert all(type(s) is int and 0 <= s < 2**63 for s in seeds)


def test_checkpoint_round_trip_is_byte_identical(tmp_path, small_suites):
    cfg = tiny_config(iterations=3)
    result = run_training(cfg, tmp_path / "run", suites=small_suites)
    original = result.checkpoint.read_bytes()

    state = load_checkpoint(result.checkpoint, cfg)
    assert state.iteration == 3
    assert parameter_digest(state) == parameter_digest(result.state)
    again = save_checkpoint(tmp_path / "again.bin", state)
    assert again.read_bytes() == original

    with pytest.raises(ConfigHashMismatch):
        load_checkpoint(result.checkpoint, tiny_config(iterations=3, seed=1))


def test_resume_matches_uninterrupted_run(tmp_path, small_suites):
    cfg = tiny_config()
    straight = run_training(cfg, tmp_path / "straight", suites=small_suites)

    out = tmp_path / "resumed"
    partial = run_training(cfg, out, stop_after=3, suites=small_suites)
    assert read_summary(out)["status"] == "stopped"
    resumed = run_training(cfg, out, resume=partial.checkpoint, suites=small_suites)

    assert (out / METRICS_FILE).read_bytes() == (tmp_path / "straight" / METRICS_FILE).read_bytes()
    assert parameter_digest(resumed.state) == parameter_digest(straight.state)
    assert resumed.state.buffer.digest() == straight.state.buffer.digest()
    assert (out / CHECKPOINT_FILE).read_bytes() == (tmp_path / "straight" / CHECKPOINT_FILE).read_bytes()


def test_comparison_table(tmp_path, small_suites):
    base = tiny_config(iterations=2, eval_interval=2, eval_episodes=1)
    table = run_comparison(base, [SamplerMode.ATR, SamplerMode.UNIFORM], [0], tmp_path, suites=small_suites)
    assert list(table["mode"]) == ["atr", "uniform"]
    assert set(mode_means(table).index) == {"atr", "uniform"}
    assert isinstance(ordering_holds(table), bool)


def test_ordering_on_a_fixed_table():
    rows = []
    for mode, score in (("atr", 0.8), ("uniform", 0.5), ("feasibility-only", 0.6)):
        for seed in range(2):
            rows.append({"mode": mode, "seed": seed, **{k.value: score for k in SKILL_KINDS}, "mean": score})
    table = pd.DataFrame(rows)
    assert ordering_holds(table)
    assert not ordering_holds(table, winner="uniform")


def test_gradients_check_out():
    summary = run_gradcheck(instances=4, coords_per_instance=8)
    assert summary.checked > 0
    assert summary.passed()


# value check


def test_roc_auc_matches_pairwise_counting():
    assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)
    assert roc_auc([0.2, 0.9], [0, 1]) == 1.0
    assert roc_auc([0.9, 0.2], [0, 1]) == 0.0
    assert roc_auc([0.5] * 6, [0, 1, 0, 1, 1, 0]) == pytest.approx(0.5)

    rng = np.random.default_rng(31)
    scores = rng.integers(0, 5, size=60).astype(float)
    labels = rng.integers(0, 2, size=60)
    pos, neg = scores[labels == 1], scores[labels == 0]
    pairwise = np.mean([(p > q) + 0.5 * (p == q) for p in pos for q in neg])
    assert roc_auc(scores, labels) == pytest.approx(pairwise)

    with pytest.raises(ValueError):
        roc_auc([0.1, 0.2], [1, 1])
    with pytest.raises(ValueError):
        roc_auc([0.1, 0.2, 0.3], [0, 1])


def test_feasibility_labels_follow_the_analytic_actors():
    tasks, labels = feasibility_set(40, seed=2)
    again, relabelled = feasibility_set(40, seed=2)
    assert tasks == again and np.array_equal(labels, relabelled)
    assert set(labels.tolist()) == {0, 1}
    assert len(tasks) == len(labels) == 40


def test_value_head_learns_to_rank_feasible_tasks():
    result = run_value_check(n_tasks=150, updates=300, batch=32, seed=4, lr=1e-3, heldout=0.3)
    assert result.n_train + result.n_heldout == 150
    assert 0.0 < result.feasible_fraction < 1.0
    assert result.train_auc > max(result.initial_auc, 0.7)
    assert result.passed(target=0.0)
    assert not result.passed(target=1.0)


def test_cli_value_check_parses():
    args = build_parser().parse_args(["value-check", "--tasks", "12", "--updates", "3"])
    assert (args.command, args.tasks, args.updates) == ("value-check", 12, 3)


# command line


def test_cli_rejects_unknown_commands():
    assert main(["fly"]) == 2


def test_cli_sample_prints_tasks(capsys):
    assert main(["sample", "--count", "2", "--seed", "3"]) == 0
    lines = [line for line in capsys.readouterr().out.splitlines() if line.strip()]
    assert len(lines) == 2
    assert all("contexts" in json.loads(line) for line in lines)


def test_cli_plans_benchmarks_and_files(capsys, tmp_path):
    assert main(["plan", "--benchmark", "hook-then-rack"]) == 0
    out = capsys.readouterr().out
    assert "pull-with" in out

    scene = {
        "scene": {
            "objects": [{"id": 0, "kind": "table"}, {"id": 1, "kind": "box"}, {"id": 2, "kind": "rack"}],
            "edges": [on(1, 0).to_dict(), on(2, 0).to_dict(), inworkspace(1).to_dict(), inworkspace(2).to_dict()],
        },
        "goal": [on(1, 2).to_dict()],
    }
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(scene), encoding="utf-8")
    assert main(["plan", "--file", str(path)]) == 0
    assert "place-onto(1, 2)" in capsys.readouterr().out

    assert main(["plan", "--benchmark", "no-such-family"]) == 1


# dashboard helpers


def test_dashboard_helpers_report_instead_of_raising(tmp_path):
    rates = {k: 0.5 for k in SKILL_KINDS}
    (tmp_path / "atr-seed0").mkdir()
    write_metrics(tmp_path / "atr-seed0", [IntervalStats(rewards=[1]).row(1, rates)])
    listed = list_runs(tmp_path)
    assert listed["success"] and [r["name"] for r in listed["runs"]] == ["atr-seed0"]
    assert load_run(str(tmp_path / "atr-seed0"))["success"]
    assert not load_run(str(tmp_path / "missing"))["success"]

    sampled = sample_tasks(3, count=2)
    assert sampled["success"] and len(sampled["tasks"]) == 2

    planned = plan_benchmark("hook-then-rack")
    assert planned["success"] and any("pull-with" in step for step in planned["plan"])
    assert not plan_benchmark("no-such-family")["success"]

    assert not delete_run(str(tmp_path / "atr-seed0"))["success"]
    assert (tmp_path / "atr-seed0").exists()
