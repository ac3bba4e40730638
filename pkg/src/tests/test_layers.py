import numpy as np
import pytest

from exceptions import (
    InvalidArgumentError,
    NumericalFailureError,
    ShapeMismatchError,
)
from networks import (
    SGD,
    Conv2d,
    ConvTranspose2d,
    LeakyReLU,
    Parameter,
    ReLU,
    Sequential,
    he_normal,
)


def _dot(a, b):
    return float(np.sum(a * b))


@pytest.mark.parametrize(
    "stride, padding, dilation", [(1, 1, 1), (2, 1, 1), (1, 2, 2)]
)
def test_conv_backward_is_the_input_adjoint(rng, stride, padding, dilation):
    conv = Conv2d.initialized(
        rng, 3, 4, 3, stride=stride, padding=padding, dilation=dilation,
        dtype=np.float64,
    )
    x = rng.standard_normal((3, 8, 8))
    y = conv.forward(x)
    grad = rng.standard_normal(y.shape)
    grad_x = conv.backward(grad)
    assert grad_x.shape == x.shape
    assert _dot(y, grad) == pytest.approx(_dot(x, grad_x))


def test_conv_output_shapes(rng):
    x = rng.standard_normal((3, 16, 12)).astype(np.float32)
    same = Conv2d.initialized(rng, 3, 5, 3, padding=1)
    assert same.forward(x).shape == (5, 16, 12)
    halved = Conv2d.initialized(rng, 3, 5, 3, stride=2, padding=1)
    assert halved.forward(x).shape == (5, 8, 6)
    dilated = Conv2d.initialized(rng, 3, 5, 3, padding=2, dilation=2)
    assert dilated.forward(x).shape == (5, 16, 12)


def test_conv_weight_gradient_matches_central_differences(rng):
    conv = Conv2d.initialized(rng, 2, 2, 3, padding=1, dtype=np.float64)
    x = rng.standard_normal((2, 5, 5))
    grad = rng.standard_normal((2, 5, 5))
    conv.forward(x)
    conv.backward(grad)

    h = 1e-6
    for index in (0, 7, 20):
        original = conv.weight.value.flat[index]
        conv.weight.value.flat[index] = original + h
        plus = _dot(conv.forward(x), grad)
        conv.weight.value.flat[index] = original - h
        minus = _dot(conv.forward(x), grad)
        conv.weight.value.flat[index] = original
        assert conv.weight.grad.flat[index] == pytest.approx(
            (plus - minus) / (2 * h), rel=1e-6
        )
    assert conv.bias.grad == pytest.approx(grad.sum(axis=(1, 2)))


def test_transposed_conv_is_the_adjoint_of_strided_conv(rng):
    weight = rng.standard_normal((4, 3, 4, 4))
    bias_conv, bias_up = np.zeros(4), np.zeros(3)
    conv = Conv2d(weight, bias_conv, stride=2, padding=1)
    up = ConvTranspose2d(weight, bias_up, stride=2, padding=1)
    x = rng.standard_normal((3, 8, 8))
    g = rng.standard_normal((4, 4, 4))
    y = conv.forward(x)
    z = up.forward(g)
    assert y.shape == (4, 4, 4)
    assert z.shape == (3, 8, 8)
    assert _dot(y, g) == pytest.approx(_dot(x, z))


def test_transposed_conv_backward_is_the_input_adjoint(rng):
    up = ConvTranspose2d.initialized(
        rng, 3, 2, 4, stride=2, padding=1, dtype=np.float64
    )
    x = rng.standard_normal((3, 4, 5))
    y = up.forward(x)
    assert y.shape == (2, 8, 10)
    grad = rng.standard_normal(y.shape)
    assert _dot(y, grad) == pytest.approx(_dot(x, up.backward(grad)))


def test_conv_rejects_bad_shapes(rng):
    with pytest.raises(InvalidArgumentError):
        Conv2d(np.zeros((2, 3, 3)), np.zeros(2))
    with pytest.raises(ShapeMismatchError):
        Conv2d(np.zeros((2, 3, 3, 3)), np.zeros(3))
    conv = Conv2d.initialized(rng, 3, 2, 3, padding=1)
    with pytest.raises(ShapeMismatchError):
        conv.forward(np.zeros((4, 6, 6)))


def test_rectifiers():
    x = np.array([[[-2.0, 0.0, 3.0]]])
    relu, leaky = ReLU(), LeakyReLU(0.2)
    np.testing.assert_array_equal(relu.forward(x), [[[0.0, 0.0, 3.0]]])
    np.testing.assert_allclose(leaky.forward(x), [[[-0.4, 0.0, 3.0]]])
    np.testing.assert_array_equal(
        relu.backward(np.ones_like(x)), [[[0.0, 0.0, 1.0]]]
    )
    np.testing.assert_allclose(
        leaky.backward(np.ones_like(x)), [[[0.2, 0.2, 1.0]]]
    )
    assert relu.activation_pattern()[0].tolist() == [[[False, False, True]]]


def test_sequential_names_parameters(rng):
    net = Sequential(
        [Conv2d.initialized(rng, 1, 2, 3), ReLU(),
         Conv2d.initialized(rng, 2, 1, 1)]
    )
    names = [name for name, _ in net.named_parameters("body")]
    assert names == [
        "body.0.weight", "body.0.bias", "body.2.weight", "body.2.bias"
    ]
    assert len(net.parameters()) == 4


def test_he_normal_scale():
    rng = np.random.default_rng(0)
    weights = he_normal(rng, (200, 50, 3, 3), fan_in=450)
    assert weights.dtype == np.float32
    assert weights.std() == pytest.approx(np.sqrt(2.0 / 450), rel=0.02)


def test_sgd_momentum_and_weight_decay():
    weight = Parameter("weight", np.array([1.0, -2.0]))
    bias = Parameter("bias", np.array([0.5]), decay=False)
    optimizer = SGD([weight, bias], 0.1, momentum=0.5, weight_decay=0.1)

    weight.grad = np.array([1.0, 1.0])
    bias.grad = np.array([2.0])
    optimizer.step()
    np.testing.assert_allclose(weight.value, [1.0 - 0.11, -2.0 - 0.08])
    np.testing.assert_allclose(bias.value, [0.3])

    optimizer.zero_grad()
    optimizer.step()
    # velocity 0.5 * v + 0.1 * decay * value
    np.testing.assert_allclose(
        weight.value,
        [0.89 - (0.5 * 0.11 + 0.01 * 0.89),
         -2.08 - (0.5 * 0.08 + 0.01 * -2.08)],
    )
    np.testing.assert_allclose(bias.value, [0.3 - 0.5 * 0.2])


def test_sgd_without_momentum_applies_plain_decay():
    weight = Parameter("weight", np.array([2.0]))
    optimizer = SGD([weight], 0.5, momentum=0.0, weight_decay=0.1)
    optimizer.step()
    np.testing.assert_allclose(weight.value, [2.0 - 0.5 * 0.2])


def test_sgd_skips_frozen_parameters():
    frozen = Parameter("a", np.array(1.0), trainable=False)
    frozen.grad = np.array(5.0)
    SGD([frozen], 1.0).step()
    assert float(frozen.value) == 1.0


def test_sgd_detects_non_finite_values():
    weight = Parameter("weight", np.array([1.0]))
    weight.grad = np.array([np.inf])
    with pytest.raises(NumericalFailureError):
        SGD([weight], 1.0).step()
