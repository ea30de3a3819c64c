import math

import numpy as np
import pytest

from dirtgv import DirectionParams, inner_product, pointwise_norm, psnr


def brute_force_inner(x, y):
    """Independent elementwise-sum oracle (explicit loops, doubled w12)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    total = 0.0
    if x.ndim == 2:
        for i in range(x.shape[0]):
            for j in range(x.shape[1]):
                total += x[i, j] * y[i, j]
    elif x.shape[0] == 2:
        for c in range(2):
            for i in range(x.shape[1]):
                for j in range(x.shape[2]):
                    total += x[c, i, j] * y[c, i, j]
    else:
        for i in range(x.shape[1]):
            for j in range(x.shape[2]):
                total += x[0, i, j] * y[0, i, j]
                total += 2.0 * x[1, i, j] * y[1, i, j]
                total += x[2, i, j] * y[2, i, j]
    return total


def test_inner_product_zero_element():
    y = np.arange(12.0).reshape(3, 4)
    assert inner_product(np.zeros((3, 4)), y) == 0.0


def test_inner_product_all_ones_counts_pixels():
    ones = np.ones((2, 2))
    assert inner_product(ones, ones) == 4.0


def test_inner_product_matches_brute_force():
    rng = np.random.default_rng(0)
    for shape in [(5, 5), (2, 5, 5), (3, 5, 5)]:
        x = rng.standard_normal(shape)
        y = rng.standard_normal(shape)
        assert inner_product(x, y) == pytest.approx(brute_force_inner(x, y), rel=1e-12)


def test_inner_product_shape_mismatch():
    with pytest.raises(ValueError):
        inner_product(np.zeros((3, 3)), np.zeros((4, 3)))


def test_inner_product_symmetric_bilinear():
    rng = np.random.default_rng(1)
    for shape in [(4, 6), (2, 4, 6), (3, 4, 6)]:
        x, y, z = (rng.standard_normal(shape) for _ in range(3))
        a, b = rng.standard_normal(2)
        assert inner_product(x, y) == pytest.approx(inner_product(y, x), rel=1e-12)
        assert inner_product(a * x + b * y, z) == pytest.approx(
            a * inner_product(x, z) + b * inner_product(y, z), rel=1e-12
        )


def test_pointwise_norm_examples():
    v = np.zeros((2, 2, 2))
    v[0, 0, 0], v[1, 0, 0] = 3.0, 4.0
    assert pointwise_norm(v)[0, 0] == pytest.approx(5.0)

    w = np.zeros((3, 2, 2))
    w[0, 0, 0] = 1.0
    assert pointwise_norm(w)[0, 0] == pytest.approx(1.0)
    w = np.zeros((3, 2, 2))
    w[1, 0, 0] = 1.0  # off-diagonal counted twice by symmetry
    assert pointwise_norm(w)[0, 0] == pytest.approx(math.sqrt(2.0))


def test_pointwise_norm_squared_sums_to_inner_product():
    # pins the factor-2 off-diagonal convention
    rng = np.random.default_rng(2)
    for shape in [(2, 6, 5), (3, 6, 5)]:
        x = rng.standard_normal(shape)
        assert float((pointwise_norm(x) ** 2).sum()) == pytest.approx(
            inner_product(x, x), rel=1e-12
        )


def test_psnr_identical_is_infinite():
    u = np.random.default_rng(3).random((8, 8))
    assert math.isinf(psnr(u, u))


def test_psnr_uniform_offset_20db():
    ref = np.random.default_rng(4).random((16, 16))
    assert psnr(ref + 0.1, ref, peak=1.0) == pytest.approx(20.0, abs=1e-9)


def test_psnr_matches_direct_formula_and_symmetry():
    rng = np.random.default_rng(5)
    u = rng.random((9, 7))
    ref = rng.random((9, 7))
    expect = 10.0 * math.log10(1.0 * u.size / float(((u - ref) ** 2).sum()))
    assert psnr(u, ref) == pytest.approx(expect, rel=1e-12)
    assert psnr(u, ref) == pytest.approx(psnr(ref, u), rel=1e-12)


def test_psnr_shape_mismatch_and_peak_validation():
    with pytest.raises(ValueError):
        psnr(np.zeros((3, 3)), np.zeros((3, 4)))
    with pytest.raises(ValueError):
        psnr(np.zeros((3, 3)), np.zeros((3, 3)), peak=0.0)


def test_direction_params_normalization_and_validation():
    d = DirectionParams(theta=1.5 + math.pi, a=0.5)
    assert d.theta == pytest.approx(1.5)
    assert 0.0 <= DirectionParams(theta=-0.3).theta < math.pi
    with pytest.raises(ValueError):
        DirectionParams(theta=0.0, a=0.0)
    with pytest.raises(ValueError):
        DirectionParams(theta=0.0, a=1.5)
