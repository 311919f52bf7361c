import logging
import shutil
import time
import traceback
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from ..config import RUNS_DIR
from ..harness import (
    CHECKPOINT_FILE,
    load_benchmarks,
    load_config,
    oracle_actor,
    read_metrics,
    read_summary,
)
from ..harness.evaluation import benchmark_layout, closed_loop
from ..symbolic import NoPlanFound, extract_scene_graph, plan
from ..taskspace import PriorConfig, sample_prior
from ..world import InstantiationInfeasible, episode_rngs, instantiate, relation_strings, scene_relations

logger = logging.getLogger(__name__)


def list_runs(runs_dir: Optional[Path] = None) -> Dict[str, Any]:
    """Run directories that hold a metrics table, newest first"""
    try:
        root = Path(runs_dir or RUNS_DIR)
        runs = []
        if root.exists():
            for path in root.rglob("metrics.csv"):
                run = path.parent
                runs.append({
                    "name": str(run.relative_to(root)),
                    "path": str(run),
                    "has_checkpoint": (run / CHECKPOINT_FILE).exists(),
                    "modified": datetime.fromtimestamp(path.stat().st_mtime).strftime("%Y-%m-%d %H:%M:%S"),
                })
        runs.sort(key=lambda r: r["modified"], reverse=True)
        return {"success": True, "runs": runs}
    except Exception as e:
        logger.error(f"Error listing runs: {e}")
        return {"success": False, "message": f"Error listing runs: {e}", "runs": []}


def load_run(run_dir: str) -> Dict[str, Any]:
    """Metrics table and summary of one run"""
    try:
        metrics = read_metrics(run_dir)
        return {
            "success": True,
            "metrics": metrics,
            "summary": read_summary(run_dir) or {},
            "message": f"Loaded {len(metrics)} evaluation rows",
        }
    except FileNotFoundError:
        return {"success": False, "message": f"No metrics found in {run_dir}"}
    except Exception as e:
        logger.error(f"Error loading run {run_dir}: {e}")
        logger.debug(traceback.format_exc())
        return {"success": False, "message": f"Error loading run: {e}"}


def sample_tasks(seed: int, count: int = 5, prior: Optional[PriorConfig] = None) -> Dict[str, Any]:
    """Prior samples with their instantiated relations, for browsing the task space"""
    start_time = time.time()
    try:
        rng = np.random.default_rng(seed)
        tasks = []
        for n in range(count):
            w = sample_prior(rng, prior or PriorConfig())
            entry = {"task": w.to_dict(), "contexts": [str(c) for c in w.contexts]}
            try:
                inst_rng, _ = episode_rngs(seed * 1000 + n)
                entry["relations"] = relation_strings(scene_relations(instantiate(w, inst_rng)))
            except InstantiationInfeasible as e:
                entry["relations"] = []
                entry["infeasible"] = str(e)
            tasks.append(entry)
        return {"success": True, "tasks": tasks, "time_taken": time.time() - start_time}
    except Exception as e:
        logger.error(f"Error sampling tasks: {e}")
        return {"success": False, "message": f"Error sampling tasks: {e}", "time_taken": time.time() - start_time}


def plan_benchmark(name: str, seed: int = 0) -> Dict[str, Any]:
    """Plan for one benchmark layout and run it closed-loop with the analytic actors"""
    start_time = time.time()
    try:
        families = {b.name: b for b in load_benchmarks()}
        if name not in families:
            return {"success": False, "message": f"Unknown benchmark {name}"}
        bench = families[name]
        world = benchmark_layout(bench, seed, load_config().world)
        g = extract_scene_graph(world)
        steps = plan(g, bench.goal)
        outcome = closed_loop(world, bench.goal, bench.task.env, oracle_actor(), np.random.default_rng(seed))
        return {
            "success": True,
            "relations": relation_strings(g.edges),
            "goal": relation_strings(bench.goal),
            "plan": [str(c) for c in steps],
            "executed": [str(c) for c in outcome.steps],
            "solved": outcome.success,
            "time_taken": time.time() - start_time,
        }
    except NoPlanFound as e:
        return {"success": False, "message": f"No plan: {e}", "time_taken": time.time() - start_time}
    except Exception as e:
        logger.error(f"Error planning benchmark {name}: {e}")
        logger.debug(traceback.format_exc())
        return {"success": False, "message": f"Error planning: {e}", "time_taken": time.time() - start_time}


def delete_run(run_dir: str) -> Dict[str, Any]:
    """Remove a run directory; only paths under the runs root are accepted"""
    try:
        path = Path(run_dir).resolve()
        root = Path(RUNS_DIR).resolve()
        if root not in path.parents:
            return {"success": False, "message": f"{run_dir} is not inside {root}"}
        shutil.rmtree(path)
        logger.info(f"Deleted run directory: {path}")
        return {"success": True, "message": f"Deleted {path.name}"}
    except PermissionError:
        return {"success": False, "message": f"Permission error deleting {run_dir}"}
    except Exception as e:
        return {"success": False, "message": f"Error deleting run: {e}"}
