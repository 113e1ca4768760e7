import numpy as np

from btd.nn import (
    Flatten,
    FullyConnected,
    NetworkSpec,
    ReLU,
    build_preset,
    grad_check,
    init_parameters,
)
from btd.nn.network import LayerParams, Parameters
from btd.prng import Prng

from conftest import small_conv_spec


def test_linear_network_is_exact_to_rounding():
    spec = NetworkSpec((1, 1, 6), (Flatten(), FullyConnected(5), FullyConnected(3)), 3)
    params = init_parameters(spec, 0)
    x = Prng(0).normals(6).reshape(1, 1, 6)
    report = grad_check(spec, params, x, 1, samples_per_tensor=64)
    assert report.passed
    assert report.max_rel_error <= 1e-7


def test_relu_network_away_from_kinks():
    spec = NetworkSpec(
        (1, 1, 6), (Flatten(), FullyConnected(8), ReLU(), FullyConnected(2)), 2
    )
    params = init_parameters(spec, 3)
    x = Prng(3).normals(6).reshape(1, 1, 6) + 0.5
    report = grad_check(spec, params, x, 0, samples_per_tensor=64)
    assert report.passed
    assert report.max_rel_error <= 1e-4


def test_full_small_conv_stack_passes():
    spec = small_conv_spec()
    params = init_parameters(spec, 5)
    x = Prng(5).normals(2 * 8 * 8).reshape(2, 8, 8)
    report = grad_check(spec, params, x, 1, samples_per_tensor=8, seed=5)
    assert report.passed
    labels = [c.label for c in report.layers]
    assert "layer00.conv" in labels and "layer07.fc" in labels


def test_kink_crossing_probe_is_skipped():
    # pre-activation exactly 0: perturbing the weight by +/-eps flips the
    # ReLU pattern, so the probe must be skipped rather than reported
    spec = NetworkSpec((1, 1, 1), (Flatten(), FullyConnected(1), ReLU(), FullyConnected(2)), 2)
    params = Parameters(
        [
            None,
            LayerParams(np.zeros((1, 1)), np.zeros(1)),
            None,
            LayerParams(np.ones((2, 1)), np.zeros(2)),
        ]
    )
    x = np.ones((1, 1, 1))
    report = grad_check(spec, params, x, 0, samples_per_tensor=4)
    first_fc = next(c for c in report.layers if c.label == "layer01.fc")
    assert first_fc.skipped >= 1


def test_report_deterministic_per_seed():
    spec = build_preset("tiny-32", 2)
    params = init_parameters(spec, 2)
    x = Prng.for_stream(2, "gradcheck-input").normals(32 * 32).reshape(1, 32, 32)
    a = grad_check(spec, params, x, 1, samples_per_tensor=4, seed=2)
    b = grad_check(spec, params, x, 1, samples_per_tensor=4, seed=2)
    assert a == b
    assert a.passed
