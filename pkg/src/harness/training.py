import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..config import RUNS_DIR
from ..learnsub import NonFiniteError
from ..policy import EmptyMask, PolicyModel, act, bc_update, featurize
from ..sampler import Episode, Selection, Transition, buffer_push, buffer_sample, select_task, value_update
from ..taskspace import SKILL_KINDS, SkillKind, TaskParam, sample_prior
from ..world import (
    EpisodeRecord,
    InstantiationInfeasible,
    StepRecord,
    WorldConfig,
    append_episode,
    episode_rngs,
    execute_primitive,
    instantiate,
    observe,
    relation_strings,
    scene_relations,
    success,
)
from .checkpoint import CHECKPOINT_FILE, load_checkpoint, save_checkpoint
from .evaluation import evaluate_skills, learned_actor
from .experiment import ExperimentConfig
from .metrics import IntervalStats, final_success, metrics_frame, write_metrics, write_summary
from .state import TrainingState, new_training_state, parameter_digest
from .suites import load_eval_suites

logger = logging.getLogger(__name__)

EPISODES_FILE = "episodes.jsonl"
SELECTION_FILE = "selection.jsonl"


@dataclass
class TrainingResult:
    out_dir: Path
    metrics: pd.DataFrame
    checkpoint: Optional[Path]
    state: TrainingState


def episode_seed(seed: int, iteration: int) -> int:
    return int(np.random.SeedSequence([seed, iteration, 3]).generate_state(1, dtype=np.uint64)[0]) >> 1


def default_out_dir(config: ExperimentConfig) -> Path:
    return Path(config.out) if config.out else RUNS_DIR / f"{config.mode.value}-seed{config.seed}"


def collect_episode(w: TaskParam, policies: Dict[SkillKind, PolicyModel], seed: int,
                    config: WorldConfig = WorldConfig()) -> Tuple[Episode, EpisodeRecord]:
    """Instantiate w and run its contexts in order with sampled actions, stopping at the first failure"""
    inst_rng, rng = episode_rngs(seed)
    try:
        world = instantiate(w, inst_rng, config)
    except InstantiationInfeasible as e:
        logger.debug(f"Episode {seed}: {e}")
        return Episode(task=w, reward=0), EpisodeRecord(task=w, seed=seed, infeasible=True)

    transitions: List[Transition] = []
    steps: List[StepRecord] = []
    for c in w.contexts:
        obs = observe(world, w.env, rng)
        try:
            features = featurize(obs, c)
        except EmptyMask:
            # nothing to act on; no primitive is executed
            transitions.append(Transition(context=c, features=None, action=None, reward=0))
            break
        a = act(policies[c.skill], features, "sample", rng, config.action_limit)
        world = execute_primitive(world, c, a)
        r = success(c.skill, world, c)
        transitions.append(Transition(context=c, features=features, action=a.vector(), reward=r))
        steps.append(StepRecord(context=c, action=tuple(float(x) for x in a.vector()), reward=r,
                                relations=relation_strings(scene_relations(world))))
        if not r:
            break

    record = EpisodeRecord(task=w, seed=seed, steps=steps)
    return Episode(task=w, reward=record.reward, steps=tuple(transitions)), record


def _append_json(path: Path, record: dict) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def _log_selection(path: Path, iteration: int, seed: int, selection: Selection, reward: int) -> None:
    record = selection.to_record()
    record.update({"iteration": iteration, "seed": seed, "reward": reward})
    _append_json(path, record)


def training_iteration(state: TrainingState, out_dir: Optional[Path] = None) -> Episode:
    """Select, collect, store and update: one environment step"""
    cfg = state.config
    candidates = [sample_prior(state.rng, cfg.prior) for _ in range(cfg.sampler.n_candidates)]
    selection = select_task(candidates, state.sampler, state.buffer, cfg.sampler, state.rng, cfg.mode)

    seed = episode_seed(cfg.seed, state.iteration)
    episode, record = collect_episode(selection.task, state.policies, seed, cfg.world)
    state.env_steps += 1
    buffer_push(state.buffer, episode)
    record.iteration = state.iteration
    if out_dir is not None and cfg.log_episodes:
        append_episode(out_dir / EPISODES_FILE, record)
        _log_selection(out_dir / SELECTION_FILE, state.iteration, seed, selection, episode.reward)
    state.iteration += 1
    if state.env_steps != state.iteration:
        raise RuntimeError(f"{state.env_steps} environment steps after {state.iteration} iterations")

    stats = state.interval
    stats.rewards.append(episode.reward)
    if selection.scores is not None:
        stats.knn_distances.append(float(selection.scores.distances[selection.index]))

    if len(state.buffer) >= cfg.value_min_buffer:
        batch = buffer_sample(state.buffer, cfg.batch_size, state.rng)
        loss = value_update(state.sampler, [e.task for e in batch], [float(e.reward) for e in batch])
        stats.value_losses.append(loss)
    for k in SKILL_KINDS:
        if state.buffer.success_count(k) == 0:
            continue
        features, actions = state.buffer.success_batch(k, cfg.batch_size, state.rng)
        stats.bc_losses[k].append(bc_update(state.policies[k], features, actions))
    return episode


def evaluate_state(state: TrainingState, suites) -> Dict[SkillKind, float]:
    cfg = state.config
    size, digest = len(state.buffer), parameter_digest(state)
    rates = evaluate_skills(learned_actor(state.policies), suites, cfg.eval_episodes, cfg.seed,
                            state.iteration, cfg.world)
    if len(state.buffer) != size or parameter_digest(state) != digest:
        raise RuntimeError("evaluation mutated training state")
    state.rows.append(state.interval.row(state.iteration, rates))
    state.interval = IntervalStats()
    return rates


def run_training(config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None,
                 resume: Optional[Union[str, Path]] = None, stop_after: Optional[int] = None,
                 suites=None) -> TrainingResult:
    """Train all four skills with the configured task sampler; evaluates and checkpoints every eval_interval"""
    out = Path(out_dir) if out_dir else default_out_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    state = load_checkpoint(resume, config) if resume else new_training_state(config)
    suites = suites or load_eval_suites()
    end = config.iterations if stop_after is None else min(config.iterations, stop_after)
    logger.info(f"Training {config.mode.value} seed {config.seed}: iterations {state.iteration}..{end} -> {out}")

    started = time.perf_counter()
    checkpoint: Optional[Path] = None
    try:
        while state.iteration < end:
            training_iteration(state, out)
            if state.iteration % config.eval_interval == 0 or state.iteration == config.iterations:
                rates = evaluate_state(state, suites)
                write_metrics(out, state.rows)
                checkpoint = save_checkpoint(out / CHECKPOINT_FILE, state)
                logger.info(
                    f"Iteration {state.iteration}: "
                    + ", ".join(f"{k.value} {rates[k]:.2f}" for k in SKILL_KINDS)
                    + f", buffer success {state.buffer.success_rate():.3f}"
                )
    except NonFiniteError as e:
        logger.error(f"Training diverged at iteration {state.iteration}: {e}")
        write_summary(out, {
            "status": "diverged",
            "error": str(e),
            "iteration": state.iteration,
            "config_hash": config.config_hash(),
            "wall_clock_seconds": time.perf_counter() - started,
        })
        raise

    frame = metrics_frame(state.rows)
    write_summary(out, {
        "status": "complete" if state.iteration >= config.iterations else "stopped",
        "mode": config.mode.value,
        "seed": config.seed,
        "iteration": state.iteration,
        "env_steps": state.env_steps,
        "config_hash": config.config_hash(),
        "buffer_size": len(state.buffer),
        "buffer_success_rate": state.buffer.success_rate(),
        "final_success": final_success(frame),
        "checkpoint": str(checkpoint) if checkpoint else None,
        "wall_clock_seconds": time.perf_counter() - started,
    })
    return TrainingResult(out_dir=out, metrics=frame, checkpoint=checkpoint, state=state)
