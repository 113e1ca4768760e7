import numpy as np
import pytest

from btd.nn import (
    Conv,
    Flatten,
    FullyConnected,
    LRN,
    MaxPool,
    NetworkSpec,
    ReLU,
    build_preset,
    init_parameters,
)


@pytest.fixture
def tiny_spec():
    return build_preset("tiny-32", 2)


@pytest.fixture
def tiny_params(tiny_spec):
    return init_parameters(tiny_spec, 1)


def small_conv_spec(num_classes=2):
    """A deliberately small stack exercising every layer kind."""
    return NetworkSpec(
        input_shape=(2, 8, 8),
        layers=(
            Conv(3, 3, 3, stride=1, pad=1),
            ReLU(),
            LRN(n=3, k=2.0, alpha=0.5, beta=0.75),
            MaxPool(2, 2),
            Flatten(),
            FullyConnected(5),
            ReLU(),
            FullyConnected(num_classes),
        ),
        num_classes=num_classes,
    )


def fc_only_spec(d=6, num_classes=3):
    return NetworkSpec(
        input_shape=(1, 1, d),
        layers=(Flatten(), FullyConnected(4), FullyConnected(num_classes)),
        num_classes=num_classes,
    )


def rand_image_array(rng, h, w):
    return rng.integers(0, 256, size=(h, w)).astype(np.uint8)
