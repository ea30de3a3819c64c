import math

import numpy as np
import pytest

from dirtgv import (
    DirectionParams,
    ddiv_tensor,
    ddiv_vec,
    dgrad,
    div,
    grad,
    inner_product,
    pointwise_norm,
    rotate_scale,
    sym_dgrad,
)

ISO = DirectionParams(0.0, 1.0)


# ---------------------------------------------------------------- oracles


def grad_oracle(u):
    """Hand-rolled forward-difference stencil."""
    m, n = u.shape
    out = np.zeros((2, m, n))
    for i in range(m):
        for j in range(n):
            if i < m - 1:
                out[0, i, j] = u[i + 1, j] - u[i, j]
            if j < n - 1:
                out[1, i, j] = u[i, j + 1] - u[i, j]
    return out


def div_oracle(p):
    """Backward-difference stencil with the exact-adjoint boundary rows."""
    _, m, n = p.shape
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            if i == 0:
                out[i, j] += p[0, i, j]
            elif i < m - 1:
                out[i, j] += p[0, i, j] - p[0, i - 1, j]
            else:
                out[i, j] += -p[0, i - 1, j]
            if j == 0:
                out[i, j] += p[1, i, j]
            elif j < n - 1:
                out[i, j] += p[1, i, j] - p[1, i, j - 1]
            else:
                out[i, j] += -p[1, i, j - 1]
    return out


def bdiff_oracle(x, axis):
    out = np.zeros_like(x)
    x = np.moveaxis(x, axis, 0)
    o = np.moveaxis(out, axis, 0)
    m = x.shape[0]
    o[0] = x[0]
    for i in range(1, m - 1):
        o[i] = x[i] - x[i - 1]
    o[m - 1] = -x[m - 2]
    return out


def sym_jacobian_oracle(v):
    """Isotropic symmetrized backward-difference Jacobian, 0.5 (J + J^T)."""
    j11 = bdiff_oracle(v[0], 0)
    j12 = bdiff_oracle(v[0], 1)
    j21 = bdiff_oracle(v[1], 0)
    j22 = bdiff_oracle(v[1], 1)
    return np.stack([j11, 0.5 * (j12 + j21), j22])


def tensor_div_oracle(w):
    """Isotropic forward-difference tensor divergence stencil."""
    def fdiff(x, axis):
        out = np.zeros_like(x)
        x = np.moveaxis(x, axis, 0)
        o = np.moveaxis(out, axis, 0)
        for i in range(x.shape[0] - 1):
            o[i] = x[i + 1] - x[i]
        return out

    return np.stack([
        fdiff(w[0], 0) + fdiff(w[1], 1),
        fdiff(w[1], 0) + fdiff(w[2], 1),
    ])


def adjoint_error(lhs, rhs, scale):
    return abs(lhs + rhs) / scale


# ---------------------------------------------------------------- grad / div


def test_grad_constant_is_zero():
    assert np.all(grad(np.full((5, 7), 3.2)) == 0.0)


def test_grad_ramp_first_index():
    m, n = 6, 4
    u = np.arange(m, dtype=float)[:, None] * np.ones((1, n))
    g = grad(u)
    assert np.all(g[0][:-1] == 1.0)
    assert np.all(g[0][-1] == 0.0)
    assert np.all(g[1] == 0.0)


def test_grad_matches_stencil_oracle():
    u = np.random.default_rng(0).standard_normal((4, 4))
    assert np.allclose(grad(u), grad_oracle(u), atol=0)


def test_div_zero_field():
    assert np.all(div(np.zeros((2, 4, 5))) == 0.0)


def test_div_matches_stencil_oracle_and_constant_field():
    rng = np.random.default_rng(1)
    p = rng.standard_normal((2, 5, 6))
    assert np.allclose(div(p), div_oracle(p), atol=0)

    c = np.zeros((2, 5, 6))
    c[0], c[1] = 1.5, -0.5
    d = div(c)
    assert np.all(d[1:-1, 1:-1] == 0.0)  # interior vanishes
    assert np.allclose(d, div_oracle(c), atol=0)


def test_grad_div_adjoint():
    rng = np.random.default_rng(2)
    for _ in range(20):
        m, n = rng.integers(4, 33, size=2)
        u = rng.standard_normal((m, n))
        p = rng.standard_normal((2, m, n))
        scale = np.linalg.norm(grad(u)) * np.linalg.norm(p)
        assert adjoint_error(inner_product(grad(u), p), inner_product(u, div(p)), scale) < 1e-12


# ---------------------------------------------------------------- rotate_scale


def test_rotate_scale_identity():
    f = np.random.default_rng(3).standard_normal((2, 4, 4))
    for mode in ("analysis", "synthesis"):
        assert np.allclose(rotate_scale(f, ISO, mode), f, atol=0)


def test_rotate_scale_quarter_turn_example():
    f = np.zeros((2, 2, 2))
    f[0] = 1.0  # the vector (1, 0) at every pixel
    out = rotate_scale(f, DirectionParams(math.pi / 2, 0.5), "analysis")
    assert np.allclose(out[0], 0.0, atol=1e-15)
    assert np.allclose(out[1], -0.5, atol=1e-15)


def test_rotate_scale_modes_are_transposes():
    rng = np.random.default_rng(4)
    d = DirectionParams(0.77, 0.3)
    x = rng.standard_normal((2, 5, 5))
    y = rng.standard_normal((2, 5, 5))
    lhs = inner_product(rotate_scale(x, d, "analysis"), y)
    rhs = inner_product(x, rotate_scale(y, d, "synthesis"))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_rotate_scale_bad_mode():
    with pytest.raises(ValueError):
        rotate_scale(np.zeros((2, 3, 3)), ISO, "backward")


# ---------------------------------------------------------------- dgrad / ddiv_vec


def test_dgrad_reduces_to_grad():
    u = np.random.default_rng(5).standard_normal((6, 6))
    assert np.allclose(dgrad(u, ISO), grad(u), atol=0)
    assert np.all(dgrad(np.full((5, 5), 2.0), DirectionParams(0.4, 0.3)) == 0.0)


def test_dgrad_plane_aligned_with_theta():
    # u = x1 cos(theta) + x2 sin(theta): R_{-theta} grad u = (1, 0) inside
    theta = 0.6
    m = n = 16
    i, j = np.meshgrid(np.arange(m, dtype=float), np.arange(n, dtype=float), indexing="ij")
    u = i * math.cos(theta) + j * math.sin(theta)
    g = dgrad(u, DirectionParams(theta, 0.25))
    assert np.allclose(g[0][:-1, :-1], 1.0, atol=1e-12)
    assert np.allclose(g[1][:-1, :-1], 0.0, atol=1e-12)


def test_ddiv_vec_trivial_cases():
    assert np.all(ddiv_vec(np.zeros((2, 4, 4)), DirectionParams(0.3, 0.6)) == 0.0)
    p = np.random.default_rng(6).standard_normal((2, 5, 5))
    assert np.allclose(ddiv_vec(p, ISO), div(p), atol=0)


def test_dgrad_ddiv_vec_adjoint():
    rng = np.random.default_rng(7)
    for _ in range(20):
        m, n = rng.integers(4, 33, size=2)
        d = DirectionParams(rng.uniform(0, math.pi), rng.uniform(0.05, 1.0))
        u = rng.standard_normal((m, n))
        p = rng.standard_normal((2, m, n))
        scale = np.linalg.norm(dgrad(u, d)) * np.linalg.norm(p)
        assert adjoint_error(
            inner_product(dgrad(u, d), p), inner_product(u, ddiv_vec(p, d)), scale
        ) < 1e-12


# ---------------------------------------------------------------- sym_dgrad / ddiv_tensor


def test_sym_dgrad_constant_field_interior_zero():
    v = np.zeros((2, 6, 6))
    v[0], v[1] = 0.7, -1.1
    w = sym_dgrad(v, DirectionParams(0.5, 0.4))
    # backward differences of constants vanish away from the boundary rows
    assert np.allclose(w[:, 1:-1, 1:-1], 0.0, atol=1e-15)
    # boundary terms follow the stencil (first row passes through, last negates)
    assert not np.allclose(w, 0.0)


def test_sym_dgrad_isotropic_matches_symmetrized_jacobian_oracle():
    v = np.random.default_rng(8).standard_normal((2, 5, 7))
    assert np.allclose(sym_dgrad(v, ISO), sym_jacobian_oracle(v), atol=1e-15)


def test_ddiv_tensor_trivial_and_isotropic_oracle():
    d = DirectionParams(1.1, 0.3)
    assert np.all(ddiv_tensor(np.zeros((3, 4, 4)), d) == 0.0)
    w = np.random.default_rng(9).standard_normal((3, 6, 5))
    assert np.allclose(ddiv_tensor(w, ISO), tensor_div_oracle(w), atol=1e-15)


def test_sym_dgrad_ddiv_tensor_adjoint():
    rng = np.random.default_rng(10)
    for _ in range(20):
        m, n = rng.integers(4, 33, size=2)
        d = DirectionParams(rng.uniform(0, math.pi), rng.uniform(0.05, 1.0))
        v = rng.standard_normal((2, m, n))
        w = rng.standard_normal((3, m, n))
        ev = sym_dgrad(v, d)
        scale = math.sqrt(inner_product(ev, ev)) * math.sqrt(inner_product(w, w))
        assert adjoint_error(
            inner_product(ev, w), inner_product(v, ddiv_tensor(w, d)), scale
        ) < 1e-12


# ---------------------------------------------------------------- global properties


def test_rotation_norm_identity_at_a_equal_one():
    rng = np.random.default_rng(11)
    u = rng.standard_normal((12, 12))
    base = pointwise_norm(grad(u))
    for theta in rng.uniform(0, math.pi, 5):
        assert np.allclose(pointwise_norm(dgrad(u, DirectionParams(theta, 1.0))), base, atol=1e-12)


def test_linearity_of_all_operators():
    rng = np.random.default_rng(12)
    d = DirectionParams(0.9, 0.45)
    a, b = rng.standard_normal(2)
    u1, u2 = rng.standard_normal((2, 8, 8))
    p1, p2 = rng.standard_normal((2, 2, 8, 8))
    w1, w2 = rng.standard_normal((2, 3, 8, 8))
    assert np.allclose(dgrad(a * u1 + b * u2, d), a * dgrad(u1, d) + b * dgrad(u2, d), atol=1e-12)
    assert np.allclose(ddiv_vec(a * p1 + b * p2, d), a * ddiv_vec(p1, d) + b * ddiv_vec(p2, d), atol=1e-12)
    assert np.allclose(sym_dgrad(a * p1 + b * p2, d), a * sym_dgrad(p1, d) + b * sym_dgrad(p2, d), atol=1e-12)
    assert np.allclose(ddiv_tensor(a * w1 + b * w2, d), a * ddiv_tensor(w1, d) + b * ddiv_tensor(w2, d), atol=1e-12)


def test_theta_periodicity_of_dgrad():
    rng = np.random.default_rng(13)
    u = rng.standard_normal((9, 9))
    # DirectionParams folds theta to [0, pi); build the flip explicitly
    theta = 0.8
    g1 = dgrad(u, DirectionParams(theta, 0.3))
    g2_raw = rotate_scale(grad(u), DirectionParams((theta + math.pi) % math.pi, 0.3), "analysis")
    # theta + pi lands on the same stored angle, so check the sign flip directly:
    c, s, a = math.cos(theta + math.pi), math.sin(theta + math.pi), 0.3
    g = grad(u)
    g2 = np.stack([c * g[0] + s * g[1], a * (-s * g[0] + c * g[1])])
    assert np.allclose(g2, -g1, atol=1e-12)
    assert np.allclose(pointwise_norm(g2), pointwise_norm(g1), atol=1e-12)
    assert np.allclose(g2_raw, g1, atol=1e-12)
