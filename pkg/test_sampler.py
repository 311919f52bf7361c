import math
from dataclasses import replace

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import binomtest, chisquare

from src.learnsub import ParamVector
from src.policy import ACTION_DIM, FEATURE_DIM
from src.sampler import (
    EMBED_DIM,
    EmbeddingIndex,
    EmptyBufferError,
    Episode,
    InsufficientBuffer,
    ReplayBuffer,
    SamplerConfig,
    SamplerMode,
    Scores,
    Transition,
    ValueHead,
    combine,
    density_estimate,
    encode_task,
    encode_tasks,
    knn_distance,
    new_encoder,
    new_sampler_model,
    new_value_head,
    particle_subset,
    predict,
    select_task,
    selection_probs,
    unit_ball_log_volume,
    value,
    value_update,
)
from src.taskspace import TABLE_ID, SkillContext, SkillKind, sample_prior


def prior_tasks(n, seed=0):
    rng = np.random.default_rng(seed)
    return [sample_prior(rng) for _ in range(n)]


def relabel(w, perm):
    def move(i):
        return perm.get(i, i)

    objects = tuple(sorted((replace(o, id=move(o.id)) for o in w.objects), key=lambda o: o.id))
    relations = tuple(replace(r, src=move(r.src), dst=None if r.dst is None else move(r.dst)) for r in w.init_relations)
    contexts = tuple(replace(c, i=move(c.i), j=move(c.j)) for c in w.contexts)
    return replace(w, objects=objects, init_relations=relations, contexts=contexts)


def filled_buffer(tasks, capacity=10_000):
    buf = ReplayBuffer(capacity)
    for n, w in enumerate(tasks):
        buf.push(Episode(task=w, reward=n % 2))
    return buf


def test_embedding_ignores_object_ids_and_relation_order():
    enc = new_encoder(np.random.default_rng(0))
    for w in prior_tasks(20, seed=1):
        ids = [o.id for o in w.objects if o.id != TABLE_ID]
        perm = dict(zip(ids, reversed(ids)))
        base = encode_task(enc, w)
        assert base.shape == (EMBED_DIM,)
        assert np.array_equal(encode_task(enc, relabel(w, perm)), base)
        shuffled = replace(w, init_relations=tuple(reversed(w.init_relations)))
        assert np.array_equal(encode_task(enc, shuffled), base)


def test_batched_and_single_encoding_agree():
    enc = new_encoder(np.random.default_rng(2))
    tasks = prior_tasks(6, seed=3)
    batch = encode_tasks(enc, tasks)
    for n, w in enumerate(tasks):
        assert np.allclose(batch[n], encode_task(enc, w), atol=1e-12)
    assert encode_tasks(enc, []).shape == (0, EMBED_DIM)


def test_knn_matches_brute_force():
    rng = np.random.default_rng(4)
    subset = rng.normal(size=(300, EMBED_DIM))
    for k in (1, 5, 17):
        for q in rng.normal(size=(10, EMBED_DIM)):
            brute = np.sort(np.linalg.norm(subset - q, axis=1))[k - 1]
            assert knn_distance(q, subset, k) == pytest.approx(brute, rel=1e-12)
    with pytest.raises(InsufficientBuffer):
        knn_distance(np.zeros(EMBED_DIM), subset[:3], 5)


def test_knn_counts_duplicates():
    subset = np.zeros((4, 3))
    assert knn_distance(np.zeros(3), subset, 4) == 0.0
    assert density_estimate(0.0, 4, 4, 3) == math.inf


def test_density_estimate_on_uniform_particles():
    rng = np.random.default_rng(5)
    m, k = 2000, 5
    particles = rng.uniform(0.0, 1.0, size=(m, 2))
    queries = rng.uniform(0.3, 0.7, size=(200, 2))
    distances = EmbeddingIndex(particles).kth_distance(queries, k)
    estimates = [density_estimate(d, k, m, 2) for d in distances]
    assert abs(np.median(estimates) - 1.0) < 0.2


def test_unit_ball_volumes():
    assert math.exp(unit_ball_log_volume(2)) == pytest.approx(math.pi)
    assert math.exp(unit_ball_log_volume(3)) == pytest.approx(4.0 / 3.0 * math.pi)
    with pytest.raises(ValueError):
        density_estimate(-1.0, 1, 2, 2)


def test_score_combination_modes():
    v, d = np.array([0.2, 0.9]), np.array([3.0, 1.0])
    assert np.allclose(combine(v, d, 0.1, SamplerMode.ATR), [0.5, 1.0])
    assert np.allclose(combine(v, d, 0.1, SamplerMode.FEASIBILITY_ONLY), v)
    assert np.allclose(combine(v, d, 0.1, SamplerMode.DIVERSITY_ONLY), [0.3, 0.1])


def test_sampler_config_validation():
    with pytest.raises(ValidationError):
        SamplerConfig(m=5, k=5)
    with pytest.raises(ValidationError):
        SamplerConfig(epsilon=1.5)
    assert SamplerConfig().warmup_episodes == 50
    assert SamplerConfig(warmup=3).warmup_episodes == 3


def test_epsilon_branch_frequency():
    cfg = SamplerConfig(m=8, k=2, warmup=2, epsilon=0.1)
    model = new_sampler_model(np.random.default_rng(6))
    buf = filled_buffer(prior_tasks(10, seed=7))
    candidates = prior_tasks(4, seed=8)
    rng = np.random.default_rng(9)
    picks = [select_task(candidates, model, buf, cfg, rng) for _ in range(3000)]
    rate = np.mean([p.epsilon_branch for p in picks])
    assert 0.08 <= rate <= 0.12
    greedy = [p for p in picks if not p.epsilon_branch]
    assert all(p.scores is not None and p.probs.sum() == pytest.approx(1.0) for p in greedy)
    assert not any(p.warmup for p in picks)


def test_uniform_mode_and_warmup_skip_scoring():
    cfg = SamplerConfig(m=8, k=2, warmup=5)
    model = new_sampler_model(np.random.default_rng(10))
    candidates = prior_tasks(4, seed=11)
    rng = np.random.default_rng(12)

    uniform = [select_task(candidates, model, filled_buffer(candidates), cfg, rng, SamplerMode.UNIFORM) for _ in range(20)]
    assert all(s.epsilon_branch and s.scores is None for s in uniform)

    warm = select_task(candidates, model, ReplayBuffer(), cfg.model_copy(update={"epsilon": 0.0}), rng)
    assert warm.warmup and warm.scores is None
    with pytest.raises(ValueError):
        select_task([], model, ReplayBuffer(), cfg, rng)


def test_particle_subset_needs_k_tasks():
    cfg = SamplerConfig(m=8, k=3)
    model = new_sampler_model(np.random.default_rng(13))
    with pytest.raises(InsufficientBuffer):
        particle_subset(model, filled_buffer(prior_tasks(2)), cfg, np.random.default_rng(0))
    subset = particle_subset(model, filled_buffer(prior_tasks(20)), cfg, np.random.default_rng(0))
    assert subset.shape == (8, EMBED_DIM)


def test_replay_buffer_ring_and_successes():
    tasks = prior_tasks(5, seed=14)
    buf = ReplayBuffer(capacity=3, success_capacity=8)
    with pytest.raises(EmptyBufferError):
        buf.sample(1, np.random.default_rng(0))
    ctx = SkillContext(SkillKind.PLACE_ONTO, 1, 0)
    for n, w in enumerate(tasks):
        step = Transition(context=ctx, features=np.full(FEATURE_DIM, float(n)), action=np.zeros(ACTION_DIM), reward=1)
        buf.push(Episode(task=w, reward=1, steps=(step,)))
    assert len(buf) == 3 and buf.pushed == 5
    assert [e.task for e in buf.ordered()] == tasks[2:]
    assert buf.success_count(SkillKind.PLACE_ONTO) == 5
    features, actions = buf.success_batch(SkillKind.PLACE_ONTO, 2, np.random.default_rng(0))
    assert features.shape == (2, FEATURE_DIM) and actions.shape == (2, ACTION_DIM)
    with pytest.raises(EmptyBufferError):
        buf.success_batch(SkillKind.PULL_WITH, 2, np.random.default_rng(0))
    with pytest.raises(ValueError):
        buf.sample(4, np.random.default_rng(0))


def test_success_ring_evicts_oldest_at_its_own_capacity():
    ctx = SkillContext(SkillKind.PLACE_ONTO, 1, 0)
    buf = ReplayBuffer(capacity=10, success_capacity=2)
    for n, w in enumerate(prior_tasks(4, seed=19)):
        step = Transition(context=ctx, features=np.full(FEATURE_DIM, float(n)), action=np.zeros(ACTION_DIM), reward=1)
        buf.push(Episode(task=w, reward=1, steps=(step,)))
    assert len(buf) == 4
    assert buf.success_count(SkillKind.PLACE_ONTO) == 2
    features, _ = buf.success_batch(SkillKind.PLACE_ONTO, 5, np.random.default_rng(0))
    assert sorted(features[:, 0]) == [2.0, 3.0]
    restored = ReplayBuffer.from_arrays(buf.to_arrays())
    assert restored.success_capacity == 2 and restored.digest() == buf.digest()
    assert ReplayBuffer(capacity=4).success_capacity == 4
    with pytest.raises(ValueError):
        ReplayBuffer(capacity=4, success_capacity=0)


def test_restored_buffer_samples_identically():
    buf = filled_buffer(prior_tasks(7, seed=15), capacity=5)
    restored = ReplayBuffer.from_arrays(buf.to_arrays())
    assert restored.digest() == buf.digest()
    a = buf.sample(4, np.random.default_rng(16))
    b = restored.sample(4, np.random.default_rng(16))
    assert [e.task for e in a] == [e.task for e in b]
    assert [e.reward for e in a] == [e.reward for e in b]
    assert restored.success_rate() == buf.success_rate()


def test_value_update_fits_rewards():
    model = new_sampler_model(np.random.default_rng(17), lr=3e-4)
    good, bad = prior_tasks(2, seed=18)
    tasks = [good, bad] * 4
    rewards = [1, 0] * 4
    first = value_update(model, tasks, rewards)
    for _ in range(199):
        last = value_update(model, tasks, rewards)
    assert last < first
    assert model.updates == 200
    v_good, v_bad = predict(model, encode_tasks(model.encoder, [good, bad]))
    assert v_good > v_bad
    v = predict(model, encode_tasks(model.encoder, tasks))
    assert np.all((v > 0.0) & (v < 1.0))
    with pytest.raises(ValueError):
        value_update(model, [], [])


def test_epsilon_one_draws_uniformly(monkeypatch):
    def no_scoring(*args, **kwargs):
        raise AssertionError("greedy branch taken with epsilon = 1")

    monkeypatch.setattr("src.sampler.selection.score", no_scoring)
    cfg = SamplerConfig(m=8, k=2, warmup=2, epsilon=1.0)
    model = new_sampler_model(np.random.default_rng(20))
    buf = filled_buffer(prior_tasks(10, seed=21))
    candidates = prior_tasks(5, seed=22)
    rng = np.random.default_rng(23)
    counts = np.bincount([select_task(candidates, model, buf, cfg, rng).index for _ in range(10_000)], minlength=5)
    assert chisquare(counts).pvalue > 0.001


def test_dominant_score_is_picked_almost_always(monkeypatch):
    def fixed_scores(model, tasks, buffer, cfg, rng, mode=SamplerMode.ATR):
        n = len(tasks)
        return Scores(values=np.zeros(n), distances=np.zeros(n), scores=np.array([10.0, -10.0]))

    monkeypatch.setattr("src.sampler.selection.score", fixed_scores)
    eps = 0.1
    cfg = SamplerConfig(m=8, k=2, warmup=2, epsilon=eps)
    model = new_sampler_model(np.random.default_rng(24))
    buf = filled_buffer(prior_tasks(10, seed=25))
    candidates = prior_tasks(2, seed=26)
    rng = np.random.default_rng(27)
    assert selection_probs(np.array([10.0, -10.0]))[0] >= 0.999
    picks = [select_task(candidates, model, buf, cfg, rng).index for _ in range(10_000)]
    top = picks.count(0)
    assert binomtest(top, len(picks), p=0.999 * (1 - eps), alternative="greater").pvalue < 0.01


def test_value_head_midpoint_and_bias_monotonicity():
    emb = np.random.default_rng(28).normal(size=EMBED_DIM)
    head = new_value_head(np.random.default_rng(29))
    zeros = {k: np.zeros_like(v) for k, v in head.params.arrays().items()}
    assert value(ValueHead(ParamVector.from_arrays(zeros)), emb) == pytest.approx(0.5)

    outputs = []
    for b in (-2.0, -0.5, 0.0, 0.5, 2.0):
        arrays = dict(head.params.arrays())
        arrays["b1"] = np.full_like(arrays["b1"], b)
        outputs.append(value(ValueHead(ParamVector.from_arrays(arrays)), emb))
    assert all(lo < hi for lo, hi in zip(outputs, outputs[1:]))
    assert all(0.0 < v < 1.0 for v in outputs)
