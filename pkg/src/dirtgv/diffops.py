"""Discrete differential operators and their directional variants.

The gradient uses forward differences with a symmetric boundary (the
difference is zero on the last row/column); every divergence-type
operator below is the exact algebraic negative adjoint of its
analysis-side counterpart, boundary terms included:

    <grad u, p>      = -<u, div p>
    <dgrad u, p>     = -<u, ddiv_vec p>
    <sym_dgrad v, W> = -<v, ddiv_tensor W>    (doubled off-diagonal pairing)

Directional operators sandwich a rotation ``R_theta`` and a scaling
``Lambda_a = diag(1, a)`` into the isotropic stencils:

    dgrad u    = Lambda_a R_{-theta} (grad u)       per pixel
    ddiv_vec p = div(R_theta Lambda_a p)            per pixel

The directional symmetrized derivative of a vector field takes the
symmetric part of the scaled/rotated backward-difference Jacobian,
``sym_dgrad v = sym(Lambda_a R_theta J(v))``, and ``ddiv_tensor`` is its
exact negative adjoint, a forward-difference row divergence of
``R_{-theta} Lambda_a W``.  At ``a = 1`` this pair makes the second-order
directional functional coincide exactly with its isotropic counterpart
for every angle, which is the behaviour the continuous theory demands.
"""

from __future__ import annotations

import math

import numpy as np

from .grids import DirectionParams

__all__ = [
    "grad",
    "div",
    "rotate_scale",
    "dgrad",
    "ddiv_vec",
    "sym_dgrad",
    "ddiv_tensor",
]


def _fdiff(x: np.ndarray, axis: int) -> np.ndarray:
    """Forward difference, zero on the last slice (symmetric boundary)."""
    out = np.zeros_like(x)
    lo = [slice(None)] * x.ndim
    hi = [slice(None)] * x.ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    out[tuple(lo)] = x[tuple(hi)] - x[tuple(lo)]
    return out


def _bdiff(x: np.ndarray, axis: int) -> np.ndarray:
    """Backward difference scheme that is the exact negative adjoint of
    :func:`_fdiff`: first slice passes through, last slice is minus the
    second-to-last."""
    out = np.empty_like(x)

    def sl(s):
        ix = [slice(None)] * x.ndim
        ix[axis] = s
        return tuple(ix)

    out[sl(0)] = x[sl(0)]
    out[sl(slice(1, -1))] = x[sl(slice(1, -1))] - x[sl(slice(0, -2))]
    out[sl(-1)] = -x[sl(-2)]
    return out


def grad(u: np.ndarray) -> np.ndarray:
    """Forward-difference gradient of an image, shape ``(2, M, N)``."""
    u = np.asarray(u, dtype=np.float64)
    return np.stack([_fdiff(u, 0), _fdiff(u, 1)])


def div(p: np.ndarray) -> np.ndarray:
    """Divergence of a vector field, defined as ``-grad*`` (exact adjoint)."""
    p = np.asarray(p, dtype=np.float64)
    return _bdiff(p[0], 0) + _bdiff(p[1], 1)


def rotate_scale(field: np.ndarray, dir: DirectionParams, mode: str) -> np.ndarray:
    """Apply the per-pixel rotation/scaling of the directional operators.

    ``mode='analysis'`` applies ``Lambda_a R_{-theta}`` (used inside the
    directional gradient); ``mode='synthesis'`` applies
    ``R_theta Lambda_a`` (used inside the directional divergence).  The
    two modes are mutual transposes.
    """
    field = np.asarray(field, dtype=np.float64)
    c = math.cos(dir.theta)
    s = math.sin(dir.theta)
    a = dir.a
    f0, f1 = field[0], field[1]
    if mode == "analysis":
        return np.stack([c * f0 + s * f1, a * (-s * f0 + c * f1)])
    if mode == "synthesis":
        return np.stack([c * f0 - a * s * f1, s * f0 + a * c * f1])
    raise ValueError(f"mode must be 'analysis' or 'synthesis', got {mode!r}")


def dgrad(u: np.ndarray, dir: DirectionParams) -> np.ndarray:
    """Directional gradient ``Lambda_a R_{-theta} grad(u)``."""
    return rotate_scale(grad(u), dir, "analysis")


def ddiv_vec(p: np.ndarray, dir: DirectionParams) -> np.ndarray:
    """Directional divergence of a vector field; equals ``-dgrad*`` exactly."""
    return div(rotate_scale(p, dir, "synthesis"))


def sym_dgrad(v: np.ndarray, dir: DirectionParams) -> np.ndarray:
    """Directional symmetrized derivative of a vector field.

    Forms the backward-difference Jacobian ``J`` of ``v`` (the scheme
    adjoint to the forward differences used by :func:`ddiv_tensor`),
    left-multiplies by ``Lambda_a R_theta`` and symmetrizes.  Components
    returned as ``(w11, w12, w22)``.
    """
    v = np.asarray(v, dtype=np.float64)
    c = math.cos(dir.theta)
    s = math.sin(dir.theta)
    a = dir.a
    # J[i][j] = backward difference of component i along axis j
    j11 = _bdiff(v[0], 0)
    j12 = _bdiff(v[0], 1)
    j21 = _bdiff(v[1], 0)
    j22 = _bdiff(v[1], 1)
    x11 = c * j11 - s * j21
    x12 = c * j12 - s * j22
    x21 = a * (s * j11 + c * j21)
    x22 = a * (s * j12 + c * j22)
    return np.stack([x11, 0.5 * (x12 + x21), x22])


def ddiv_tensor(w: np.ndarray, dir: DirectionParams) -> np.ndarray:
    """Directional divergence of a symmetric tensor field.

    Per pixel forms ``Wt = R_{-theta} Lambda_a W`` and applies the
    forward-difference row divergence; exactly ``-sym_dgrad*`` under the
    doubled off-diagonal pairing.
    """
    w = np.asarray(w, dtype=np.float64)
    c = math.cos(dir.theta)
    s = math.sin(dir.theta)
    a = dir.a
    w11, w12, w22 = w[0], w[1], w[2]
    t11 = c * w11 + a * s * w12
    t12 = c * w12 + a * s * w22
    t21 = -s * w11 + a * c * w12
    t22 = -s * w12 + a * c * w22
    return np.stack([_fdiff(t11, 0) + _fdiff(t12, 1), _fdiff(t21, 0) + _fdiff(t22, 1)])
