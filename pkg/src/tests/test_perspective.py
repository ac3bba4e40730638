import numpy as np
import pytest

from exceptions import InvalidArgumentError, ShapeMismatchError
from perspective import (
    PerspectiveParams,
    blur_backward,
    blur_from_perspective,
    blur_trace,
    downsample_area,
    downsample_area_adjoint,
    init_perspective_params,
    is_row_constant,
    normalize_perspective,
    row_mean_collapse,
    synth_perspective,
)


def _loss(p, params, weights):
    return float(np.sum(weights * blur_trace(p, params).blur))


def test_normalization_is_a_sigmoid():
    params = PerspectiveParams(alpha=2.0, beta=1.0)
    p = np.array([[1.0, 1.5], [0.0, 3.0]])
    expected = 1.0 / (1.0 + np.exp(-2.0 * (p - 1.0)))
    np.testing.assert_allclose(normalize_perspective(p, params), expected)


def test_normalization_saturates_without_overflow():
    params = PerspectiveParams(alpha=50.0)
    p = np.array([[-1e6, 1e6]])
    normalized = normalize_perspective(p, params)
    info = np.finfo(np.float64)
    np.testing.assert_array_equal(normalized, [[info.tiny, 1 - info.eps]])


@pytest.mark.parametrize(
    "values, dtype",
    [([40.0, -800.0], np.float64), ([20.0, -200.0], np.float32)],
)
def test_normalization_stays_strictly_inside_the_unit_interval(
    values, dtype
):
    p = np.array([values], dtype=dtype)
    normalized = normalize_perspective(p, PerspectiveParams())
    assert normalized.dtype == dtype
    assert np.all(normalized > 0)
    assert np.all(normalized < 1)


def test_normalization_is_monotone(rng):
    p = np.sort(rng.uniform(-30.0, 30.0, size=200))[None, :]
    for alpha in (0.1, 1.0, 7.5):
        normalized = normalize_perspective(p, PerspectiveParams(alpha=alpha))
        assert np.all(np.diff(normalized[0]) >= 0)
    flipped = normalize_perspective(p, PerspectiveParams(alpha=-2.0))
    assert np.all(np.diff(flipped[0]) <= 0)


def test_blur_is_rectified():
    params = PerspectiveParams(a=2.0, p0=0.5)
    normalized = np.array([[0.2, 0.5, 0.8]])
    np.testing.assert_allclose(
        blur_from_perspective(normalized, params), [[0.0, 0.0, 0.6]]
    )


def test_float32_input_keeps_dtype():
    p = np.ones((4, 4), dtype=np.float32)
    assert blur_trace(p, PerspectiveParams()).blur.dtype == np.float32


def test_non_finite_parameters_are_rejected():
    with pytest.raises(InvalidArgumentError):
        PerspectiveParams(alpha=float("nan"))


def test_non_finite_map_is_rejected():
    with pytest.raises(InvalidArgumentError):
        normalize_perspective(np.array([[1.0, np.inf]]), PerspectiveParams())


def test_map_must_be_two_dimensional():
    with pytest.raises(ShapeMismatchError):
        row_mean_collapse(np.ones(4))


def test_blur_backward_matches_central_differences(rng):
    params = PerspectiveParams(alpha=1.3, beta=2.0, a=1.5, p0=0.2)
    p = rng.uniform(0.5, 4.0, size=(5, 6))
    weights = rng.standard_normal((5, 6))
    trace = blur_trace(p, params)
    grads, grad_p = blur_backward(trace, params, weights)

    h = 1e-6
    for field in ("alpha", "beta", "a", "p0"):
        plus, minus = params.copy(), params.copy()
        setattr(plus, field, getattr(params, field) + h)
        setattr(minus, field, getattr(params, field) - h)
        numeric = (
            _loss(p, plus, weights) - _loss(p, minus, weights)
        ) / (2 * h)
        assert getattr(grads, field) == pytest.approx(numeric, rel=1e-5)

    i, j = 2, 3
    bump = np.zeros_like(p)
    bump[i, j] = h
    numeric = (
        _loss(p + bump, params, weights) - _loss(p - bump, params, weights)
    ) / (2 * h)
    assert grad_p[i, j] == pytest.approx(numeric, rel=1e-5, abs=1e-9)


def test_hinge_subgradient_is_zero_where_inactive():
    params = PerspectiveParams(a=1.0, p0=2.0)
    trace = blur_trace(np.ones((3, 3)), params)
    grads, grad_p = blur_backward(trace, params, np.ones((3, 3)))
    assert not trace.active.any()
    assert grads.as_dict() == {"alpha": 0.0, "beta": 0.0, "a": 0.0, "p0": 0.0}
    np.testing.assert_array_equal(grad_p, 0.0)


def test_blur_backward_checks_shape():
    params = PerspectiveParams()
    trace = blur_trace(np.ones((3, 3)), params)
    with pytest.raises(ShapeMismatchError):
        blur_backward(trace, params, np.ones((3, 4)))


def test_row_mean_collapse():
    m = np.array([[1.0, 2.0, 3.0], [4.0, 4.0, 4.0]])
    collapsed = row_mean_collapse(m)
    np.testing.assert_array_equal(collapsed, [[2, 2, 2], [4, 4, 4]])
    assert is_row_constant(collapsed)
    assert not is_row_constant(m)


def test_row_mean_collapse_keeps_constant_rows_exact(rng):
    rows = rng.uniform(0.1, 10.0, size=7).astype(np.float32)
    m = np.repeat(rows[:, None], 9, axis=1)
    np.testing.assert_array_equal(row_mean_collapse(m), m)


def test_row_mean_collapse_is_idempotent_and_keeps_the_mean(rng):
    m = rng.uniform(0.5, 4.0, size=(6, 11))
    collapsed = row_mean_collapse(m)
    np.testing.assert_array_equal(row_mean_collapse(collapsed), collapsed)
    assert collapsed.mean() == pytest.approx(m.mean(), rel=1e-12)
    np.testing.assert_allclose(collapsed[:, 0], m.mean(axis=1), rtol=1e-12)


def test_area_downsampling_and_adjoint(rng):
    m = rng.standard_normal((8, 6))
    small = downsample_area(m, 2)
    assert small.shape == (4, 3)
    assert small[1, 2] == pytest.approx(m[2:4, 4:6].mean())

    grad = rng.standard_normal((4, 3))
    lhs = np.sum(small * grad)
    rhs = np.sum(m * downsample_area_adjoint(grad, 2))
    assert lhs == pytest.approx(rhs)


def test_area_downsampling_needs_divisible_shape():
    with pytest.raises(ShapeMismatchError):
        downsample_area(np.ones((5, 4)), 2)


def test_init_params_cover_the_observed_range():
    maps = [np.full((2, 2), 1.0), np.full((2, 2), 5.0)]
    params = init_perspective_params(maps)
    assert params.alpha == pytest.approx(1.0)
    assert params.beta == pytest.approx(3.0)
    assert (params.a, params.p0) == (1.0, 0.0)


def test_init_params_degenerate_range():
    params = init_perspective_params([np.full((3, 3), 2.0)])
    assert params.alpha == 1.0
    assert params.beta == pytest.approx(2.0)


def test_init_params_need_maps():
    with pytest.raises(InvalidArgumentError):
        init_perspective_params([])


def test_synth_perspective_ramp():
    p = synth_perspective(32, 16, base=1.0, slope=0.5)
    assert p.shape == (32, 16)
    assert p.dtype == np.float32
    assert is_row_constant(p)
    np.testing.assert_allclose(p[:, 0], 1.0 + 0.5 * np.arange(32))


def test_synth_perspective_noise_is_seeded():
    first = synth_perspective(8, 8, 2.0, 0.1, noise_amp=0.5, seed=3)
    second = synth_perspective(8, 8, 2.0, 0.1, noise_amp=0.5, seed=3)
    np.testing.assert_array_equal(first, second)
    assert not is_row_constant(first)


def test_synth_perspective_must_stay_positive():
    with pytest.raises(InvalidArgumentError):
        synth_perspective(10, 4, base=1.0, slope=-0.5)
