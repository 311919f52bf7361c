"""Per-skill evaluation on the fixed suites and closed-loop sequential evaluation.

Single-step suite instances come from layouts the analytic actors can solve; a
layout they cannot solve is redrawn with the next seed. Sequential benchmark
layouts only pass the footprint screen in `screening`, which never consults an
actor, so the analytic actors can still fail on them. Neither routine touches the
replay buffer or any parameters.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence

import numpy as np

from ..errors import ActiveTaskError
from ..policy import EmptyMask, PolicyModel, act, featurize, make_oracle_policy, oracle_action
from ..symbolic import MAX_DEPTH, NoPlanFound, extract_scene_graph, goal_satisfied, plan
from ..taskspace import SKILL_KINDS, EnvContext, Relation, SkillContext, SkillKind, TaskParam
from ..world import (
    Action,
    InstantiationInfeasible,
    Observation,
    WorldConfig,
    WorldState,
    episode_rngs,
    execute_primitive,
    instantiate,
    observe,
    success,
)
from .screening import screen_layout
from .suites import Benchmark

logger = logging.getLogger(__name__)

Actor = Callable[[WorldState, Observation, SkillContext, np.random.Generator], Action]

LAYOUT_ATTEMPTS = 50
SEQUENTIAL_STEP_CAP = 10


class EvalLayoutError(ActiveTaskError):
    pass


def learned_actor(policies: Dict[SkillKind, PolicyModel], mode: str = "sample") -> Actor:
    def actor(world: WorldState, obs: Observation, c: SkillContext, rng: np.random.Generator) -> Action:
        return act(policies[c.skill], featurize(obs, c), mode, rng, world.config.action_limit)

    return actor


def oracle_actor() -> Actor:
    oracles = {k: make_oracle_policy(k) for k in SKILL_KINDS}

    def actor(world: WorldState, obs: Observation, c: SkillContext, rng: np.random.Generator) -> Action:
        return oracles[c.skill](world, c)

    return actor


def random_actor() -> Actor:
    """Uniform actions over the clamp box; the floor an untrained policy is compared with"""

    def actor(world: WorldState, obs: Observation, c: SkillContext, rng: np.random.Generator) -> Action:
        limit = world.config.action_limit
        return Action.from_vector(rng.uniform(-limit, limit, size=6), limit)

    return actor


def layout_seed(*key: int) -> int:
    return int(np.random.SeedSequence(list(key)).generate_state(1, dtype=np.uint64)[0]) >> 1


def oracle_solves_contexts(world: WorldState, w: TaskParam) -> bool:
    for c in w.contexts:
        a = oracle_action(world, c)
        if a is None:
            return False
        world = execute_primitive(world, c, a)
    return True


def solvable_layout(w: TaskParam, base_seed: int, solves: Callable[[WorldState], bool],
                    config: WorldConfig = WorldConfig()) -> WorldState:
    """First instantiation, over seeds base_seed, base_seed + 1, ..., that ``solves`` accepts"""
    for attempt in range(LAYOUT_ATTEMPTS):
        inst_rng, _ = episode_rngs(base_seed + attempt)
        try:
            world = instantiate(w, inst_rng, config)
        except InstantiationInfeasible:
            continue
        if solves(world):
            if attempt:
                logger.debug(f"Layout accepted after {attempt} redraws")
            return world
    raise EvalLayoutError(f"no solvable layout in {LAYOUT_ATTEMPTS} draws from seed {base_seed}")


@lru_cache(maxsize=4096)
def suite_layout(w: TaskParam, base_seed: int, config: WorldConfig) -> WorldState:
    return solvable_layout(w, base_seed, lambda world: oracle_solves_contexts(world, w), config)


def run_task(world: WorldState, w: TaskParam, actor: Actor, rng: np.random.Generator) -> int:
    """Contexts of w in order on one world; 0 at the first failure"""
    for c in w.contexts:
        obs = observe(world, w.env, rng)
        try:
            a = actor(world, obs, c, rng)
        except EmptyMask:
            return 0
        world = execute_primitive(world, c, a)
        if not success(c.skill, world, c):
            return 0
    return 1


def evaluate_skills(actor: Actor, suites: Dict[SkillKind, List[TaskParam]], episodes: int = 50,
                    seed: int = 0, iteration: int = 0, config: WorldConfig = WorldConfig(),
                    skills: Optional[Sequence[SkillKind]] = None) -> Dict[SkillKind, float]:
    """Mean success per skill over ``episodes`` episodes cycling through that skill's suite"""
    rng = np.random.default_rng([seed, iteration, 7])
    rates: Dict[SkillKind, float] = {}
    for skill in skills or SKILL_KINDS:
        tasks = suites[skill]
        wins = 0
        for e in range(episodes):
            w = tasks[e % len(tasks)]
            world = suite_layout(w, layout_seed(seed, skill.index, e), config)
            wins += run_task(world, w, actor, rng)
        rates[skill] = wins / episodes
        logger.debug(f"Eval {skill.value}: {wins}/{episodes}")
    return rates


@dataclass
class ClosedLoopResult:
    success: bool
    steps: List[SkillContext] = field(default_factory=list)
    failures: int = 0
    reason: str = ""


def closed_loop(world: WorldState, goal: FrozenSet[Relation], env: EnvContext, actor: Actor,
                rng: np.random.Generator, max_steps: int = SEQUENTIAL_STEP_CAP) -> ClosedLoopResult:
    """Extract, plan, execute the first skill, repeat until the goal holds or the cap is hit"""
    result = ClosedLoopResult(success=False)
    last_len: Optional[int] = None
    while True:
        g = extract_scene_graph(world)
        if goal_satisfied(g, goal):
            result.success = True
            return result
        if len(result.steps) >= max_steps:
            result.reason = "step cap"
            return result
        try:
            steps = plan(g, goal, MAX_DEPTH)
        except NoPlanFound:
            result.reason = "no plan"
            return result
        if last_len is not None and len(steps) > last_len:
            logger.debug(f"Plan grew from {last_len} to {len(steps)} steps; symbolic state regressed")
        last_len = len(steps)

        c = steps[0]
        result.steps.append(c)
        obs = observe(world, env, rng)
        try:
            a = actor(world, obs, c, rng)
        except EmptyMask:
            result.failures += 1
            continue
        world = execute_primitive(world, c, a)
        if not success(c.skill, world, c):
            result.failures += 1


def benchmark_layout(bench: Benchmark, base_seed: int, config: WorldConfig = WorldConfig(),
                     screened: bool = True) -> WorldState:
    """First instantiation that passes the footprint screen; with screened=False, the first one at all"""
    if not screened:
        return solvable_layout(bench.task, base_seed, lambda world: True, config)
    return solvable_layout(bench.task, base_seed, lambda world: screen_layout(world, bench.goal).ok, config)


def run_sequential_eval(actor: Actor, benchmarks: Iterable[Benchmark], trials: int = 200, seed: int = 0,
                        config: WorldConfig = WorldConfig(),
                        max_steps: int = SEQUENTIAL_STEP_CAP, screened: bool = True) -> Dict[str, float]:
    """Closed-loop success rate per family over randomized initial layouts"""
    rates: Dict[str, float] = {}
    for f, bench in enumerate(benchmarks):
        wins = 0
        for t in range(trials):
            world = benchmark_layout(bench, layout_seed(seed, 100 + f, t), config, screened)
            rng = np.random.default_rng([seed, f, t, 1])
            outcome = closed_loop(world, bench.goal, bench.task.env, actor, rng, max_steps)
            wins += int(outcome.success)
            if not outcome.success:
                logger.debug(f"{bench.name} trial {t} failed ({outcome.reason}) after {len(outcome.steps)} skills")
        rates[bench.name] = wins / trials
        logger.info(f"Sequential {bench.name}: {wins}/{trials}")
    return rates
