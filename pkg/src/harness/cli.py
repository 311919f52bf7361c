import argparse
import json
import logging
import subprocess
import sys
import traceback
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ..config import BASE_DIR, RUNS_DIR, configure_logging
from ..errors import ActiveTaskError
from ..sampler import SamplerMode
from ..symbolic import NoPlanFound, SceneGraph, extract_scene_graph, plan
from ..taskspace import Relation, sample_prior
from ..world import replay_log
from .checkpoint import CHECKPOINT_FILE, load_checkpoint
from .compare import mode_means, run_comparison
from .evaluation import (
    Actor,
    benchmark_layout,
    evaluate_skills,
    learned_actor,
    oracle_actor,
    random_actor,
    run_sequential_eval,
)
from .experiment import ExperimentConfig, load_config
from .gradients import TOLERANCE, run_gradcheck
from .suites import load_benchmarks, load_eval_suites
from .training import EPISODES_FILE, default_out_dir, run_training
from .value_check import run_value_check

logger = logging.getLogger(__name__)

MODES = [m.value for m in SamplerMode]


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config (default configs/default.json)")
    common.add_argument("--seed", type=int, help="overrides the config seed")
    common.add_argument("--mode", choices=MODES, help="task sampler")
    common.add_argument("--out", help="run directory")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="activetask", description="Active task randomization experiments")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("train", parents=[common], help="train skills with the configured sampler")
    p.add_argument("--iterations", type=int)
    p.add_argument("--resume", help="checkpoint to continue from")
    p.add_argument("--stop-after", type=int, help="stop once this many iterations are done")

    for name, text in (("eval", "per-skill evaluation"), ("seq-eval", "closed-loop sequential evaluation")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--checkpoint", help="learned policies to evaluate (default <out>/checkpoint.bin)")
        p.add_argument("--actor", choices=["learned", "oracle", "random"], default="learned")
        if name == "eval":
            p.add_argument("--episodes", type=int, help="episodes per skill")
        else:
            p.add_argument("--trials", type=int, default=200, help="randomized trials per family")
            p.add_argument("--raw-layouts", action="store_true", help="skip the footprint screen on benchmark layouts")

    p = sub.add_parser("sample", parents=[common], help="print tasks drawn from the prior")
    p.add_argument("--count", type=int, default=5)

    p = sub.add_parser("plan", parents=[common], help="plan from a scene file or a benchmark layout")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--file", help='JSON {"scene": {...}, "goal": [...]}')
    src.add_argument("--benchmark", help="benchmark family name")

    p = sub.add_parser("replay", parents=[common], help="re-execute an episode log and compare")
    p.add_argument("--log", help="episodes.jsonl (default <out>/episodes.jsonl)")

    p = sub.add_parser("gradcheck", parents=[common], help="finite-difference gradient check")
    p.add_argument("--instances", type=int, default=100)

    p = sub.add_parser("value-check", parents=[common], help="ROC-AUC of the value head on oracle-labelled tasks")
    p.add_argument("--tasks", type=int, default=2000)
    p.add_argument("--updates", type=int, default=3000)

    p = sub.add_parser("compare", parents=[common], help="train modes x seeds and tabulate final success")
    p.add_argument("--modes", nargs="+", choices=MODES, default=MODES)
    p.add_argument("--seeds", nargs="+", type=int, default=[0, 1, 2])
    p.add_argument("--iterations", type=int)

    sub.add_parser("dashboard", parents=[common], help="open the Streamlit run viewer")
    return parser


def _config(args: argparse.Namespace, **extra) -> ExperimentConfig:
    return load_config(args.config, seed=args.seed, mode=args.mode, out=args.out, **extra)


def _actor(args: argparse.Namespace, cfg: ExperimentConfig) -> Actor:
    if args.actor == "oracle":
        return oracle_actor()
    if args.actor == "random":
        return random_actor()
    path = Path(args.checkpoint) if args.checkpoint else default_out_dir(cfg) / CHECKPOINT_FILE
    state = load_checkpoint(path)
    return learned_actor(state.policies)


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def cmd_train(args) -> int:
    cfg = _config(args, iterations=args.iterations)
    result = run_training(cfg, default_out_dir(cfg), resume=args.resume, stop_after=args.stop_after)
    print(f"Run directory: {result.out_dir}")
    if not result.metrics.empty:
        print(result.metrics.tail(1).to_string(index=False))
    return 0


def cmd_eval(args) -> int:
    cfg = _config(args)
    rates = evaluate_skills(_actor(args, cfg), load_eval_suites(), args.episodes or cfg.eval_episodes,
                            cfg.seed, 0, cfg.world)
    _print_json({k.value: v for k, v in rates.items()})
    return 0


def cmd_seq_eval(args) -> int:
    cfg = _config(args)
    rates = run_sequential_eval(_actor(args, cfg), load_benchmarks(), args.trials, cfg.seed, cfg.world,
                                screened=not args.raw_layouts)
    _print_json(rates)
    return 0


def cmd_sample(args) -> int:
    cfg = _config(args)
    rng = np.random.default_rng(cfg.seed)
    for _ in range(args.count):
        print(json.dumps(sample_prior(rng, cfg.prior).to_dict(), sort_keys=True))
    return 0


def _plan_inputs(args, cfg: ExperimentConfig):
    if args.file:
        data = json.loads(Path(args.file).read_text(encoding="utf-8"))
        return SceneGraph.from_dict(data["scene"]), frozenset(Relation.from_dict(r) for r in data["goal"])
    families: Dict[str, object] = {b.name: b for b in load_benchmarks()}
    if args.benchmark not in families:
        raise ActiveTaskError(f"unknown benchmark {args.benchmark!r}; choose from {sorted(families)}")
    bench = families[args.benchmark]
    world = benchmark_layout(bench, cfg.seed, cfg.world)
    return extract_scene_graph(world), bench.goal


def cmd_plan(args) -> int:
    cfg = _config(args)
    g, goal = _plan_inputs(args, cfg)
    try:
        steps = plan(g, goal)
    except NoPlanFound as e:
        print(f"No plan: {e}")
        return 1
    for n, c in enumerate(steps, 1):
        print(f"{n}. {c}")
    if not steps:
        print("Goal already satisfied")
    return 0


def cmd_replay(args) -> int:
    cfg = _config(args)
    path = Path(args.log) if args.log else default_out_dir(cfg) / EPISODES_FILE
    report = replay_log(path, cfg.world)
    print(f"Replayed {report.episodes} episodes, {len(report.mismatches)} mismatches")
    for line in report.mismatches[:20]:
        print(f"  {line}")
    return 0 if report.ok else 1


def cmd_gradcheck(args) -> int:
    cfg = _config(args)
    summary = run_gradcheck(args.instances, cfg.seed)
    print(f"max relative error {summary.max_rel_err:.3e} over {summary.checked} coordinates "
          f"({summary.skipped} skipped near kinks)")
    return 0 if summary.passed(TOLERANCE) else 1


def cmd_value_check(args) -> int:
    cfg = _config(args)
    result = run_value_check(args.tasks, args.updates, seed=cfg.seed, lr=cfg.lr, prior=cfg.prior, config=cfg.world)
    _print_json(result.to_dict())
    return 0 if result.passed() else 1


def cmd_compare(args) -> int:
    cfg = _config(args, iterations=args.iterations)
    out_root = Path(args.out) if args.out else RUNS_DIR / "compare"
    table = run_comparison(cfg, [SamplerMode(m) for m in args.modes], args.seeds, out_root)
    print(table.to_string(index=False))
    print()
    print(mode_means(table).to_string())
    return 0


def cmd_dashboard(args) -> int:
    cmd = ["streamlit", "run", str(BASE_DIR / "app.py")]
    if args.out:
        cmd += ["--", "--run-dir", args.out]
    print("Starting Streamlit application...")
    return subprocess.run(cmd).returncode


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "seq-eval": cmd_seq_eval,
    "sample": cmd_sample,
    "plan": cmd_plan,
    "replay": cmd_replay,
    "gradcheck": cmd_gradcheck,
    "value-check": cmd_value_check,
    "compare": cmd_compare,
    "dashboard": cmd_dashboard,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging()
    try:
        return COMMANDS[args.command](args)
    except (ActiveTaskError, ValueError, OSError) as e:
        logger.debug(traceback.format_exc())
        print(f"Error: {e}", file=sys.stderr)
        return 1


cli = main
