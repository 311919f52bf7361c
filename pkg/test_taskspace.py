import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import chisquare

from src.taskspace import (
    TABLE_ID,
    WIDTH,
    EnvContext,
    ObjectKind,
    ObjectSpec,
    PriorConfig,
    PriorExhaustedError,
    SerializationError,
    SkillContext,
    SkillKind,
    TaskParam,
    canonical_deserialize,
    canonical_serialize,
    on,
    sample_prior,
    table_spec,
    validate,
)


def two_box_task(**overrides):
    fields = dict(
        objects=(table_spec(), ObjectSpec(1, ObjectKind.BOX, (0.06, 0.06, 0.1)),
                 ObjectSpec(2, ObjectKind.RACK, (0.3, 0.3, 0.2))),
        init_relations=(on(1, 0), on(2, 0)),
        contexts=(SkillContext(SkillKind.PLACE_ONTO, 1, 2),),
    )
    fields.update(overrides)
    return TaskParam(**fields)


def test_prior_samples_are_valid():
    rng = np.random.default_rng(0)
    for _ in range(300):
        w = sample_prior(rng)
        assert validate(w).ok
        assert w.objects[0].id == TABLE_ID and w.objects[0].kind is ObjectKind.TABLE
        assert 2 <= len(w.objects) <= 6
        assert len(w.contexts) == 1
        c = w.contexts[0]
        assert c.i != TABLE_ID and c.i != c.j


def test_prior_is_deterministic_given_seed():
    a = [sample_prior(np.random.default_rng(7)) for _ in range(3)]
    b = [sample_prior(np.random.default_rng(7)) for _ in range(3)]
    assert a == b


def test_prior_object_count_is_uniform():
    rng = np.random.default_rng(1)
    counts = np.zeros(5)
    for _ in range(2000):
        counts[len(sample_prior(rng).objects) - 2] += 1
    assert chisquare(counts).pvalue > 0.001


def test_prior_respects_skill_weights():
    cfg = PriorConfig(skill_weights={SkillKind.PULL_WITH: 1.0, SkillKind.PLACE_ONTO: 0.0,
                                     SkillKind.PLACE_NEXTTO: 0.0, SkillKind.PUSH_UNDER: 0.0})
    rng = np.random.default_rng(2)
    assert all(sample_prior(rng, cfg).contexts[0].skill is SkillKind.PULL_WITH for _ in range(50))


def test_prior_config_rejects_bad_ranges():
    with pytest.raises(ValidationError):
        PriorConfig(object_count=(1, 4))
    with pytest.raises(ValidationError):
        PriorConfig(kind_weights={ObjectKind.TABLE: 1.0, ObjectKind.BOX: 1.0})


def test_prior_exhausted_when_nothing_validates():
    cfg = PriorConfig(camera_pitch=(1.5, 1.6), max_attempts=5)
    with pytest.raises(PriorExhaustedError):
        sample_prior(np.random.default_rng(0), cfg)


def test_validate_reports_structural_problems():
    assert validate(two_box_task()).ok
    assert not validate(two_box_task(contexts=(SkillContext(SkillKind.PLACE_ONTO, 1, 1),))).ok
    assert not validate(two_box_task(contexts=(SkillContext(SkillKind.PLACE_ONTO, 0, 1),))).ok
    assert not validate(two_box_task(contexts=(SkillContext(SkillKind.PLACE_ONTO, 1, 5),))).ok
    assert not validate(two_box_task(init_relations=(on(1, 2), on(2, 1)))).ok
    assert not validate(two_box_task(init_relations=(on(1, 0), on(1, 2)))).ok
    assert not validate(two_box_task(contexts=())).ok
    assert not validate(two_box_task(env=EnvContext(camera_pitch=2.0))).ok


def test_codec_round_trip_on_prior_samples():
    rng = np.random.default_rng(3)
    for _ in range(100):
        w = sample_prior(rng)
        vec = canonical_serialize(w)
        assert vec.shape == (WIDTH,)
        assert canonical_deserialize(vec) == w
        assert np.array_equal(canonical_serialize(canonical_deserialize(vec)), vec)


def test_codec_rejects_bad_input():
    with pytest.raises(SerializationError):
        canonical_deserialize(np.zeros(WIDTH + 1))
    many = tuple(SkillContext(SkillKind.PLACE_ONTO, 1, 2) for _ in range(5))
    with pytest.raises(SerializationError):
        canonical_serialize(two_box_task(contexts=many))


def test_task_dict_round_trip():
    w = sample_prior(np.random.default_rng(4))
    assert TaskParam.from_dict(w.to_dict()) == w
