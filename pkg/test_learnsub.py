import numpy as np
import pytest
from scipy.stats import norm

from src.learnsub import (
    AdamState,
    ArchMismatchError,
    CheckpointFormatError,
    MLPArch,
    NonFiniteError,
    ParamVector,
    ShapeError,
    adam_step,
    finite_diff_check,
    gaussian_loglik,
    grad,
    init_mlp,
    join,
    mlp_forward,
    read_checkpoint,
    split,
    tape,
    train_step,
    write_checkpoint,
)
from src.learnsub.checkpoint import MAGIC, decode, encode


def small_mlp(seed=0, output="linear"):
    arch = MLPArch(sizes=(5, 8, 3), output=output)
    return arch, ParamVector.from_arrays(init_mlp(np.random.default_rng(seed), arch))


def test_quadratic_gradient_is_exact():
    p = ParamVector.from_arrays({"w": np.array([1.0, -2.0, 0.5])})
    loss, g = grad(lambda b: tape.sum(tape.square(b["w"])), p)
    assert loss == pytest.approx(5.25)
    assert np.array_equal(g.values, 2.0 * p.values)


def test_repeated_gather_accumulates():
    p = ParamVector.from_arrays({"x": np.arange(6.0).reshape(3, 2)})
    _, g = grad(lambda b: tape.sum(tape.take(b["x"], np.array([0, 0, 2]))), p)
    assert np.array_equal(g.array("x"), np.array([[2.0, 2.0], [0.0, 0.0], [1.0, 1.0]]))


def test_segment_sum_routes_gradients():
    p = ParamVector.from_arrays({"x": np.ones((4, 2))})
    weights = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])

    def loss_fn(b):
        pooled = tape.segment_sum(b["x"], np.array([0, 2, 2, 0]), 3)
        return tape.sum(tape.mul(pooled, tape.constant(weights)))

    loss, g = grad(loss_fn, p)
    assert loss == pytest.approx(2 * 3 + 2 * 11)
    assert np.array_equal(g.array("x"), weights[[0, 2, 2, 0]])


@pytest.mark.parametrize("output", ["linear", "sigmoid"])
def test_mlp_gradients_match_finite_differences(output):
    arch, p = small_mlp(1, output)
    x = np.random.default_rng(2).normal(size=(4, 5))
    target = np.random.default_rng(3).normal(size=(4, 3))
    report = finite_diff_check(
        lambda b: tape.mean(tape.square(tape.sub(mlp_forward(b, x, arch), tape.constant(target)))), p
    )
    assert report.checked > 0
    assert report.passed()


def test_gaussian_loglik_matches_scipy():
    rng = np.random.default_rng(4)
    mean, log_std, a = rng.normal(size=(3, 6)), rng.uniform(-1, 1, size=(3, 6)), rng.normal(size=(3, 6))
    got = gaussian_loglik(mean, log_std, a).data
    expected = norm.logpdf(a, loc=mean, scale=np.exp(log_std)).sum(axis=1)
    assert np.allclose(got, expected)


def test_gaussian_loglik_gradient():
    rng = np.random.default_rng(5)
    p = ParamVector.from_arrays({"mean": rng.normal(size=(2, 6)), "log_std": rng.uniform(-1, 1, size=(2, 6))})
    a = rng.normal(size=(2, 6))
    report = finite_diff_check(lambda b: tape.mean(gaussian_loglik(b["mean"], b["log_std"], a)), p)
    assert report.passed()


def test_steps_across_a_kink_are_set_aside():
    p = ParamVector.from_arrays({"w": np.array([0.5, 2e-5, -0.3])})
    report = finite_diff_check(lambda b: tape.sum(tape.relu(b["w"])), p)
    assert report.kink_coords == [1]
    assert report.checked == 2
    assert report.passed()


def test_shape_and_scalar_errors():
    with pytest.raises(ShapeError):
        tape.add(tape.constant(np.zeros(3)), tape.constant(np.zeros(4)))
    with pytest.raises(ShapeError):
        tape.matmul(tape.constant(np.zeros((2, 3))), tape.constant(np.zeros((2, 3))))
    p = ParamVector.from_arrays({"w": np.zeros(3)})
    with pytest.raises(ShapeError):
        grad(lambda b: tape.square(b["w"]), p)


def test_overflow_is_reported_as_non_finite():
    p = ParamVector.from_arrays({"w": np.array([1000.0])})
    with pytest.raises(NonFiniteError):
        grad(lambda b: tape.sum(tape.exp(b["w"])), p)


def test_adam_first_step_and_descent():
    p = ParamVector.from_arrays({"w": np.array([3.0, -2.0, 0.5])})
    state = AdamState.zeros(p.size, lr=0.1)
    _, g = grad(lambda b: tape.sum(tape.square(b["w"])), p)
    p1, s1 = adam_step(state, p, g)
    assert np.allclose(p.values - p1.values, 0.1 * np.sign(g.values), atol=1e-6)
    assert s1.step == 1

    losses = []
    for _ in range(200):
        loss, p, state = train_step(lambda b: tape.sum(tape.square(b["w"])), p, state)
        losses.append(loss)
    assert losses[-1] < 0.01 * losses[0]

    restored = AdamState.from_arrays(state.to_arrays())
    assert restored.step == state.step and np.array_equal(restored.m, state.m)


def test_join_split_and_layout_checks():
    _, a = small_mlp(0)
    b = ParamVector.from_arrays({"v": np.arange(4.0)})
    joined = join({"policy": a, "value": b})
    parts = split(joined, ["policy", "value"])
    assert np.array_equal(parts["policy"].values, a.values)
    assert parts["value"].names == ("v",)
    with pytest.raises(ValueError):
        ParamVector(values=np.zeros(3), layout=(("w", 1, (2,)),))


def test_checkpoint_round_trip(tmp_path):
    arrays = {"b": np.arange(3.0), "a": np.eye(2)}
    arch = {"sizes": [5, 8, 3]}
    raw = encode(arrays, arch, {"iteration": 7})
    assert raw.startswith(MAGIC)
    assert encode(arrays, arch, {"iteration": 7}) == raw

    path = write_checkpoint(tmp_path / "model.bin", arrays, arch, {"iteration": 7})
    loaded, got_arch, meta = read_checkpoint(path, expected_arch=arch)
    assert got_arch == arch and meta == {"iteration": 7}
    for name, arr in arrays.items():
        assert np.array_equal(loaded[name], arr)
    with pytest.raises(ArchMismatchError):
        read_checkpoint(path, expected_arch={"sizes": [5, 9, 3]})


def test_checkpoint_rejects_damaged_files():
    raw = encode({"a": np.ones(4)}, {"k": 1})
    with pytest.raises(CheckpointFormatError):
        decode(b"NOTACKPT" + raw[8:])
    with pytest.raises(CheckpointFormatError):
        decode(raw[:10])
    with pytest.raises(CheckpointFormatError):
        decode(raw[:-8])
    broken = bytearray(raw)
    broken[20] = ord("}")
    with pytest.raises(CheckpointFormatError):
        decode(bytes(broken))
