import numpy as np
import pytest

from btd.nn import (
    Conv,
    DivergenceError,
    Flatten,
    FullyConnected,
    MaxPool,
    NetworkSpec,
    ReLU,
    SpecError,
    TrainConfig,
    build_preset,
    evaluate,
    forward,
    init_parameters,
    item_loss_and_grads,
    train,
    train_step,
)
from btd.nn.layers import cross_entropy, softmax
from btd.prng import Prng

from conftest import small_conv_spec

# ---------------------------------------------------------------- presets


def test_alexnet_preset_structure():
    spec = build_preset("alexnet-227", 2)
    assert spec.input_shape == (1, 227, 227)
    fc_widths = [l.out_features for l in spec.layers if isinstance(l, FullyConnected)]
    assert fc_widths == [4096, 4096, 2]
    assert spec.shapes()[0] == (96, 55, 55)
    flatten_idx = next(i for i, l in enumerate(spec.layers) if isinstance(l, Flatten))
    assert spec.shapes()[flatten_idx] == (9216,)


def test_tiny_preset_structure():
    spec = build_preset("tiny-32", 2)
    convs = [l for l in spec.layers if isinstance(l, Conv)]
    pools = [l for l in spec.layers if isinstance(l, MaxPool)]
    assert len(convs) == 5
    assert len(pools) == 3
    assert [c.out_channels for c in convs] == [8, 16, 16, 16, 16]
    assert spec.shapes()[-1] == (2,)
    assert spec.shapes()[-2] == (64,)


def test_unknown_preset():
    with pytest.raises(SpecError):
        build_preset("resnet-50", 2)


def test_spec_chain_validation():
    with pytest.raises(SpecError):
        NetworkSpec((1, 4, 4), (FullyConnected(2),), 2)  # fc on a 3-d input
    with pytest.raises(SpecError):
        NetworkSpec((1, 4, 4), (Flatten(),), 2)  # no final fc
    with pytest.raises(SpecError):
        NetworkSpec((1, 4, 4), (Flatten(), FullyConnected(3)), 2)  # wrong width
    with pytest.raises(SpecError):
        NetworkSpec((1, 4, 4), (Flatten(), FullyConnected(1)), 1)  # single class


def test_spec_json_round_trip():
    spec = small_conv_spec()
    assert NetworkSpec.from_json_obj(spec.to_json_obj()) == spec
    tiny = build_preset("tiny-32", 2)
    assert NetworkSpec.from_json_obj(tiny.to_json_obj()) == tiny


# ---------------------------------------------------------------- init


def test_init_deterministic_and_zero_bias():
    spec = small_conv_spec()
    a = init_parameters(spec, 42)
    b = init_parameters(spec, 42)
    for (ia, na, ta), (ib, nb, tb) in zip(a.tensors(), b.tensors()):
        assert (ia, na) == (ib, nb)
        assert np.array_equal(ta, tb)
    for _, name, t in a.tensors():
        if name == "bias":
            assert not t.any()


def test_init_he_std():
    spec = build_preset("tiny-32", 2)
    params = init_parameters(spec, 0)
    fc1 = params.values[16]  # FullyConnected(64) on 256 inputs: 16384 weights
    assert fc1.weights.size == 16384
    target = np.sqrt(2.0 / 256)
    assert abs(fc1.weights.std() - target) / target < 0.10


def test_init_seed_changes_weights():
    spec = small_conv_spec()
    a = init_parameters(spec, 1)
    b = init_parameters(spec, 2)
    assert not np.array_equal(a.values[0].weights, b.values[0].weights)


# ---------------------------------------------------------------- forward/train


def _batch(spec, n, seed=0):
    rng = Prng(seed)
    c, h, w = spec.input_shape
    return [
        (rng.normals(c * h * w).reshape(c, h, w), int(rng.below(spec.num_classes)))
        for _ in range(n)
    ]


def test_forward_shapes_and_determinism():
    spec = small_conv_spec()
    params = init_parameters(spec, 3)
    (x, _), = _batch(spec, 1)
    a = forward(spec, params, x)
    assert a.shape == (2,)
    assert np.array_equal(a, forward(spec, params, x))


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(momentum=1.0)
    with pytest.raises(ValueError):
        TrainConfig(weight_decay=-1.0)
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)


def test_plain_sgd_update_is_exact():
    spec = small_conv_spec()
    params = init_parameters(spec, 4)
    before = params.copy()
    velocity = params.zeros_like()
    batch = _batch(spec, 3, seed=4)
    cfg = TrainConfig(learning_rate=0.05, momentum=0.0, weight_decay=0.0, batch_size=3, epochs=1)

    grads = params.zeros_like()
    for x, label in batch:
        _, g, _ = item_loss_and_grads(spec, params, x, label)
        for (_, _, acc), (_, _, gt) in zip(grads.tensors(), g.tensors()):
            acc += gt

    train_step(spec, params, velocity, batch, cfg)
    for (_, _, w_new), (_, _, w_old), (_, _, g) in zip(
        params.tensors(), before.tensors(), grads.tensors()
    ):
        np.testing.assert_array_equal(w_new, w_old - cfg.learning_rate * (g * (1.0 / 3.0)))


def test_momentum_accumulates_velocity():
    spec = small_conv_spec()
    params = init_parameters(spec, 5)
    velocity = params.zeros_like()
    batch = _batch(spec, 2, seed=5)
    cfg = TrainConfig(learning_rate=0.01, momentum=0.9, weight_decay=0.0, batch_size=2, epochs=1)
    train_step(spec, params, velocity, batch, cfg)
    assert any(t.any() for _, _, t in velocity.tensors())


def test_loss_non_increasing_at_small_lr():
    spec = build_preset("tiny-32", 2)
    params = init_parameters(spec, 6)
    batch = _batch(spec, 4, seed=6)

    def batch_loss():
        return float(
            np.mean([cross_entropy(softmax(forward(spec, params, x)), y) for x, y in batch])
        )

    before = batch_loss()
    velocity = params.zeros_like()
    cfg = TrainConfig(learning_rate=1e-4, momentum=0.0, weight_decay=0.0, batch_size=4, epochs=1)
    train_step(spec, params, velocity, batch, cfg)
    assert batch_loss() <= before


def test_divergence_error_names_layer():
    spec = small_conv_spec()
    params = init_parameters(spec, 7)
    velocity = params.zeros_like()
    batch = _batch(spec, 2, seed=7)
    cfg = TrainConfig(learning_rate=1e308, momentum=0.0, weight_decay=1e4, batch_size=2, epochs=1)
    with pytest.raises(DivergenceError, match="layer"):
        train_step(spec, params, velocity, batch, cfg)


def test_divergence_error_on_nan_loss():
    spec = small_conv_spec()
    params = init_parameters(spec, 8)
    params.values[0].weights[0, 0, 0, 0] = np.nan
    velocity = params.zeros_like()
    with pytest.raises(DivergenceError, match="loss"):
        train_step(spec, params, velocity, _batch(spec, 1, seed=8),
                   TrainConfig(learning_rate=0.01, epochs=1))


def test_train_history_deterministic():
    spec = small_conv_spec()
    data = _batch(spec, 12, seed=9)
    cfg = TrainConfig(learning_rate=0.01, batch_size=4, epochs=3, seed=99)

    def run():
        params = init_parameters(spec, 9)
        return train(spec, params, data, cfg)

    h1, h2 = run(), run()
    assert h1.to_json_obj() == h2.to_json_obj()
    assert len(h1.epochs) == 3
    assert [e.epoch for e in h1.epochs] == [0, 1, 2]
    assert all(np.isfinite(e.mean_loss) for e in h1.epochs)


def test_evaluate_counts_matches_predictions():
    spec = small_conv_spec()
    params = init_parameters(spec, 10)
    data = _batch(spec, 6, seed=10)
    preds, acc = evaluate(spec, params, data)
    manual = np.mean([p == y for p, (_, y) in zip(preds, data)])
    assert acc == manual
