from dataclasses import replace

import numpy as np
import pytest

from src.harness import load_eval_suites
from src.learnsub import ParamVector
from src.policy import (
    ACTION_DIM,
    FEATURE_DIM,
    EmptyMask,
    act,
    bc_update,
    distribution,
    featurize,
    make_oracle_policy,
    new_policy,
    oracle_action,
)
from src.taskspace import EnvContext, ObjectKind, SkillContext, SkillKind, on
from src.world import (
    Action,
    InstantiationInfeasible,
    ObjectState,
    WorldConfig,
    WorldState,
    episode_rngs,
    execute_primitive,
    instantiate,
    observe,
    success,
    table_state,
)

ZERO = (0.0, 0.0, 0.0)
COARSE = np.linspace(-0.5, 0.5, 11)
CONTACT = np.linspace(-0.1, 0.1, 5)


def world_of(*objects):
    return WorldState(objects=(table_state(WorldConfig()),) + tuple(objects))


def box_and_rack(rack_y=0.3):
    return world_of(
        ObjectState(1, ObjectKind.BOX, (0.06, 0.06, 0.10), (0.5, 0.0, 0.05, 0.0)),
        ObjectState(2, ObjectKind.RACK, (0.3, 0.3, 0.25), (0.5, rack_y, 0.05, 0.0)),
    )


def test_features_have_fixed_width():
    world = box_and_rack()
    obs = observe(world, EnvContext(noise_scale=0.01), np.random.default_rng(0))
    f = featurize(obs, SkillContext(SkillKind.PLACE_ONTO, 1, 2))
    assert f.shape == (FEATURE_DIM,)
    assert np.all(np.isfinite(f))


def test_features_need_visible_targets():
    world = box_and_rack()
    hidden = world_of(world.obj(2), ObjectState(1, ObjectKind.BOX, (0.06, 0.06, 0.08), (0.5, 0.3, 0.05, 0.0)))
    obs = observe(hidden, EnvContext(), np.random.default_rng(0))
    with pytest.raises(EmptyMask):
        featurize(obs, SkillContext(SkillKind.PLACE_ONTO, 1, 2))


def test_noisy_centroids_stay_close_on_every_axis():
    config = WorldConfig(points_per_object=256)
    world = WorldState(objects=box_and_rack().objects, config=config)
    ctx = SkillContext(SkillKind.PLACE_ONTO, 1, 2)
    worst = np.zeros(3)
    for t in range(1000):
        clean = featurize(observe(world, EnvContext(noise_scale=0.0), np.random.default_rng(t)), ctx)
        noisy = featurize(observe(world, EnvContext(noise_scale=0.005), np.random.default_rng(t)), ctx)
        worst = np.maximum(worst, np.abs(noisy[:3] - clean[:3]))
        worst = np.maximum(worst, np.abs(noisy[16:19] - clean[16:19]))
    assert np.all(worst < 0.003)


def test_centroid_is_the_mean_of_masked_points():
    world = box_and_rack()
    obs = observe(world, EnvContext(noise_scale=0.01), np.random.default_rng(5))
    f = featurize(obs, SkillContext(SkillKind.PLACE_ONTO, 1, 2))
    assert np.allclose(f[:3], obs.object_points(1).mean(axis=0))
    assert np.allclose(f[16:19], obs.object_points(2).mean(axis=0))


def test_features_ignore_distractor_objects():
    ctx = SkillContext(SkillKind.PLACE_ONTO, 1, 2)
    world = box_and_rack()
    cluttered = world_of(*world.objects[1:], ObjectState(3, ObjectKind.CAN, (0.05, 0.05, 0.12), (0.3, -0.3, 0.05, 0.0)))
    env = EnvContext(noise_scale=0.0)
    plain = featurize(observe(world, env, np.random.default_rng(6)), ctx)
    assert np.array_equal(plain, featurize(observe(cluttered, env, np.random.default_rng(6)), ctx))

    obs = observe(world, EnvContext(noise_scale=0.01), np.random.default_rng(7))
    extra = np.random.default_rng(8).uniform(-1.0, 1.0, size=(40, 3))
    padded = replace(
        obs,
        points=np.concatenate([obs.points, extra]),
        masks={**obs.masks, 3: np.arange(len(obs.points), len(obs.points) + 40)},
        kinds={**obs.kinds, 3: ObjectKind.CAN},
        relations=obs.relations | {on(3, 0)},
    )
    assert np.array_equal(featurize(obs, ctx), featurize(padded, ctx))


def test_act_clamps_and_validates_mode():
    policy = new_policy(SkillKind.PLACE_ONTO, np.random.default_rng(0))
    arrays = policy.params.arrays()
    arrays["b2"] = arrays["b2"].copy()
    arrays["b2"][:ACTION_DIM] = 5.0
    policy.params = ParamVector.from_arrays(arrays)
    f = np.zeros(FEATURE_DIM)
    a = act(policy, f, mode="mean")
    assert np.allclose(a.vector(), 0.5)
    sampled = act(policy, f, rng=np.random.default_rng(0))
    assert np.all(np.abs(sampled.vector()) <= 0.5)
    with pytest.raises(ValueError):
        act(policy, f, mode="greedy")


def test_new_policy_starts_narrow():
    policy = new_policy(SkillKind.PUSH_UNDER, np.random.default_rng(2))
    mean, log_std = distribution(policy, np.random.default_rng(3).normal(size=(4, FEATURE_DIM)))
    assert mean.shape == log_std.shape == (4, ACTION_DIM)
    assert np.all(np.abs(mean) < 0.1)
    assert np.all(np.abs(log_std + 3.0) < 0.1)


def test_bc_update_fits_a_batch():
    rng = np.random.default_rng(4)
    policy = new_policy(SkillKind.PLACE_NEXTTO, rng, lr=1e-2)
    features = rng.normal(size=(16, FEATURE_DIM))
    actions = rng.uniform(-0.3, 0.3, size=(16, ACTION_DIM))
    first = bc_update(policy, features, actions)
    for _ in range(100):
        last = bc_update(policy, features, actions)
    assert last < first
    assert policy.updates == 101
    with pytest.raises(ValueError):
        bc_update(policy, features[:0], actions[:0])


def test_oracle_solves_hand_built_layouts():
    world = box_and_rack()
    c = SkillContext(SkillKind.PLACE_ONTO, 1, 2)
    a = oracle_action(world, c)
    assert a is not None
    assert success(c.skill, execute_primitive(world, c, a), c) == 1

    pull = world_of(
        ObjectState(1, ObjectKind.CAN, (0.07, 0.07, 0.12), (1.0, 0.4, 0.05, 0.0)),
        ObjectState(2, ObjectKind.HOOK, (0.4, 0.05, 0.04), (0.5, 0.0, 0.05, 0.0)),
    )
    assert make_oracle_policy(SkillKind.PULL_WITH).solves(pull, SkillContext(SkillKind.PULL_WITH, 1, 2))


def test_oracle_rejects_other_skills():
    with pytest.raises(ValueError):
        make_oracle_policy(SkillKind.PUSH_UNDER)(box_and_rack(), SkillContext(SkillKind.PLACE_ONTO, 1, 2))


def coarse_actions(world, c):
    if c.skill is SkillKind.PULL_WITH:
        length = world.obj(c.j).size[0]
        for frac in (-0.4, -0.2, 0.0, 0.2, 0.4):
            for dx in CONTACT:
                for dy in CONTACT:
                    yield Action(p_i=(float(dx), float(dy), 0.0), p_j=(frac * length, 0.0, 0.0))
        return
    for dx in COARSE:
        for dy in COARSE:
            yield Action(p_i=ZERO, p_j=(float(dx), float(dy), 0.0))


@pytest.mark.parametrize("skill", list(SkillKind))
def test_oracle_succeeds_wherever_a_coarse_grid_does(skill):
    checked = 0
    for n, w in enumerate(load_eval_suites()[skill]):
        inst_rng, _ = episode_rngs(n)
        try:
            world = instantiate(w, inst_rng)
        except InstantiationInfeasible:
            continue
        c = w.contexts[0]
        if any(success(skill, execute_primitive(world, c, a), c) for a in coarse_actions(world, c)):
            assert oracle_action(world, c) is not None
            checked += 1
    assert checked > 0
