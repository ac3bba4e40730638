import numpy as np
import pytest
from scipy import ndimage

from exceptions import InvalidArgumentError, ShapeMismatchError
from filters import (
    bench_filter,
    coefficient_maps,
    correlate_bank,
    correlate_bank_adjoint,
    correlate_same,
    filter_approx,
    filter_approx_backward,
    filter_approx_forward,
    filter_exact,
    relative_l2,
)
from kernels import build_dictionary, gaussian_kernel
from schemas import DictionaryConfigSchema, PaddingModeEnum

SCIPY_MODES = {
    PaddingModeEnum.REPLICATE: "nearest",
    PaddingModeEnum.ZERO: "constant",
}


def _random_instance(rng, shape=(8, 16, 16), low=0.25, high=1.75):
    x = rng.standard_normal(shape)
    sigma = rng.uniform(low, high, size=shape[1:])
    return x, sigma


@pytest.mark.parametrize("padding", list(PaddingModeEnum))
def test_correlation_matches_scipy(rng, padding):
    x = rng.standard_normal((3, 9, 11))
    kernel = rng.standard_normal((5, 5))
    expected = np.stack(
        [
            ndimage.correlate(channel, kernel, mode=SCIPY_MODES[padding])
            for channel in x
        ]
    )
    np.testing.assert_allclose(
        correlate_same(x, kernel, padding), expected, atol=1e-12
    )


@pytest.mark.parametrize("padding", list(PaddingModeEnum))
def test_correlation_adjoint(rng, padding):
    x = rng.standard_normal((2, 7, 8))
    kernels = rng.standard_normal((3, 5, 5))
    grads = rng.standard_normal((3, 2, 7, 8))
    lhs = np.sum(correlate_bank(x, kernels, padding) * grads)
    rhs = np.sum(x * correlate_bank_adjoint(grads, kernels, padding))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_correlation_is_thread_independent(rng):
    x = rng.standard_normal((6, 10, 10))
    kernels = rng.standard_normal((4, 3, 3))
    np.testing.assert_array_equal(
        correlate_bank(x, kernels, threads=1),
        correlate_bank(x, kernels, threads=3),
    )


def test_exact_filter_with_constant_sigma_matches_scipy(rng):
    x = rng.standard_normal((2, 12, 12))
    sigma = np.full((12, 12), 0.9)
    kernel = gaussian_kernel(7, 0.9).weights
    expected = np.stack(
        [ndimage.correlate(c, kernel, mode="nearest") for c in x]
    )
    np.testing.assert_allclose(filter_exact(x, sigma, 7), expected, atol=1e-6)


@pytest.mark.parametrize("mode", ["exact", "approx"])
def test_zero_sigma_is_identity(rng, default_dictionary, mode):
    x = rng.standard_normal((3, 8, 8)).astype(np.float32)
    sigma = np.zeros((8, 8), dtype=np.float32)
    if mode == "exact":
        smoothed = filter_exact(x, sigma, 7)
    else:
        smoothed = filter_approx(x, sigma, default_dictionary)
    assert smoothed.dtype == np.float32
    np.testing.assert_array_equal(smoothed, x)


def test_mixed_identity_pixels_pass_through(rng, default_dictionary):
    x = rng.standard_normal((2, 10, 10))
    sigma = rng.uniform(0.25, 1.75, size=(10, 10))
    sigma[3, 4] = 0.0
    sigma[7, 1] = 0.0
    smoothed = filter_approx(x, sigma, default_dictionary)
    np.testing.assert_array_equal(smoothed[:, 3, 4], x[:, 3, 4])
    np.testing.assert_array_equal(smoothed[:, 7, 1], x[:, 7, 1])


def test_approx_matches_exact_with_default_basis(rng, default_dictionary):
    errors = []
    for _ in range(50):
        x, sigma = _random_instance(rng)
        exact = filter_exact(x, sigma, 7)
        approx = filter_approx(x, sigma, default_dictionary)
        errors.append(relative_l2(approx, exact))
    assert max(errors) <= 1e-2


def test_approx_matches_exact_at_full_rank_on_grid(rng, full_rank_dictionary):
    grid = full_rank_dictionary.sigma_grid
    for _ in range(10):
        x = rng.standard_normal((4, 12, 12))
        sigma = rng.choice(grid, size=(12, 12))
        exact = filter_exact(x, sigma, 7)
        approx = filter_approx(x, sigma, full_rank_dictionary)
        assert relative_l2(approx, exact) <= 1e-5


def test_unit_sum_preserves_constants_at_full_rank(rng, full_rank_dictionary):
    x = np.full((2, 10, 10), 3.5)
    sigma = rng.choice(full_rank_dictionary.sigma_grid, size=(10, 10))
    np.testing.assert_allclose(
        filter_approx(x, sigma, full_rank_dictionary), x, atol=1e-5
    )


def test_exact_filter_preserves_constants(rng):
    x = np.full((2, 10, 10), 5.0)
    sigma = rng.uniform(0.0, 2.5, size=(10, 10))
    np.testing.assert_allclose(filter_exact(x, sigma, 7), x, atol=1e-5)


def test_default_basis_keeps_constants_within_truncation(
    rng, default_dictionary
):
    x = np.full((2, 10, 10), 5.0)
    sigma = rng.uniform(0.25, 1.75, size=(10, 10))
    smoothed = filter_approx(x, sigma, default_dictionary)
    assert relative_l2(smoothed, x) <= 5e-2


@pytest.mark.parametrize("mode", ["exact", "approx"])
def test_filters_are_linear_in_the_input(rng, default_dictionary, mode):
    x, sigma = _random_instance(rng, shape=(3, 12, 12))
    y = rng.standard_normal(x.shape)
    sigma[2, 2] = 0.0

    def smooth(values):
        if mode == "exact":
            return filter_exact(values, sigma, 7)
        return filter_approx(values, sigma, default_dictionary)

    np.testing.assert_allclose(
        smooth(2.5 * x - 0.75 * y),
        2.5 * smooth(x) - 0.75 * smooth(y),
        atol=1e-10,
    )


def test_approx_error_shrinks_as_eigen_kernels_are_added(rng):
    x, sigma = _random_instance(rng)
    exact = filter_exact(x, sigma, 7)
    errors = []
    for retained in range(1, 7):
        dictionary = build_dictionary(
            DictionaryConfigSchema(retained_count=retained)
        )
        errors.append(
            relative_l2(filter_approx(x, sigma, dictionary), exact)
        )
    for fewer, more in zip(errors, errors[1:]):
        assert more <= fewer + 1e-6
    assert errors[-1] < errors[0]


def test_variance_does_not_grow_with_sigma(rng):
    x = rng.standard_normal((3, 32, 32))
    variances = [
        filter_exact(x, np.full((32, 32), s), 7).var(axis=(1, 2))
        for s in (0.0, 0.5, 1.0, 1.5)
    ]
    for smaller, larger in zip(variances, variances[1:]):
        assert np.all(larger <= smaller + 1e-9)


def test_row_constant_sigma_is_projected_per_row(default_dictionary):
    rows = np.linspace(0.3, 1.6, 6)
    sigma = np.repeat(rows[:, None], 9, axis=1)
    shared = coefficient_maps(sigma, default_dictionary)
    assert shared.row_shared
    assert shared.evaluations == 6

    jittered = sigma.copy()
    jittered[0, 0] += 1e-3
    dense = coefficient_maps(jittered, default_dictionary)
    assert not dense.row_shared
    assert dense.evaluations == 54
    np.testing.assert_allclose(
        shared.maps[:, 1:], dense.maps[:, 1:], atol=1e-12
    )


def test_approx_backward_is_the_adjoint_in_x(rng, default_dictionary):
    x, sigma = _random_instance(rng, shape=(3, 9, 9))
    sigma[0, 0] = 0.0
    smoothed, cache = filter_approx_forward(x, sigma, default_dictionary)
    grad = rng.standard_normal(smoothed.shape)
    grad_x, _ = filter_approx_backward(cache, grad)
    assert np.sum(smoothed * grad) == pytest.approx(
        np.sum(x * grad_x), rel=1e-9
    )


def test_approx_backward_sigma_matches_central_differences(
    rng, default_dictionary
):
    x, sigma = _random_instance(rng, shape=(2, 8, 8), low=0.4, high=1.6)
    _, cache = filter_approx_forward(x, sigma, default_dictionary)
    grad = rng.standard_normal((2, 8, 8))
    _, grad_sigma = filter_approx_backward(cache, grad)

    h = 1e-6
    for i, j in [(0, 0), (3, 5), (7, 2)]:
        bump = np.zeros_like(sigma)
        bump[i, j] = h
        plus = filter_approx(x, sigma + bump, default_dictionary)
        minus = filter_approx(x, sigma - bump, default_dictionary)
        numeric = np.sum((plus - minus) * grad) / (2 * h)
        assert grad_sigma[i, j] == pytest.approx(numeric, rel=1e-4, abs=1e-8)


def test_clamped_sigma_has_zero_gradient(rng, default_dictionary):
    x = rng.standard_normal((2, 6, 6))
    sigma = np.full((6, 6), 3.0)
    _, cache = filter_approx_forward(x, sigma, default_dictionary)
    _, grad_sigma = filter_approx_backward(cache, np.ones((2, 6, 6)))
    np.testing.assert_array_equal(grad_sigma, 0.0)


def test_shape_and_value_errors(default_dictionary):
    x = np.zeros((2, 6, 6))
    with pytest.raises(ShapeMismatchError):
        filter_approx(x, np.ones((6, 5)), default_dictionary)
    with pytest.raises(ShapeMismatchError):
        filter_approx(np.zeros((6, 6)), np.ones((6, 6)), default_dictionary)
    with pytest.raises(InvalidArgumentError):
        filter_approx(x, -np.ones((6, 6)), default_dictionary)
    bad = x.copy()
    bad[0, 0, 0] = np.nan
    with pytest.raises(InvalidArgumentError):
        filter_exact(bad, np.ones((6, 6)), 7)


def test_relative_l2():
    reference = np.array([3.0, 4.0])
    assert relative_l2(reference, reference) == 0.0
    assert relative_l2(np.array([3.0, 5.0]), reference) == pytest.approx(0.2)


def test_bench_report(default_dictionary):
    report = bench_filter((2, 12, 12), default_dictionary, reps=3, seed=5)
    assert report.shape == [2, 12, 12]
    assert report.speedup > 0
    assert report.min_speedup == 5.0
    assert report.passed == (report.speedup >= 5.0)
    assert len(report.exact.timings_ms) == 3
    assert report.exact.min_ms <= report.exact.median_ms
    assert report.relative_error <= 1e-2
    again = bench_filter((2, 12, 12), default_dictionary, reps=3, seed=5)
    assert again.input_checksum == report.input_checksum


def test_bench_needs_three_reps(default_dictionary):
    with pytest.raises(InvalidArgumentError):
        bench_filter((2, 8, 8), default_dictionary, reps=2)


@pytest.mark.slow
def test_low_rank_path_is_at_least_five_times_faster(default_dictionary):
    report = bench_filter((64, 96, 128), default_dictionary, reps=5)
    assert report.passed, report.speedup


def test_bench_pass_flag_follows_the_required_speedup(default_dictionary):
    lenient = bench_filter(
        (2, 8, 8), default_dictionary, reps=3, min_speedup=0.0
    )
    assert lenient.passed
    strict = bench_filter(
        (2, 8, 8), default_dictionary, reps=3, min_speedup=float("inf")
    )
    assert not strict.passed
    assert strict.min_speedup == float("inf")
