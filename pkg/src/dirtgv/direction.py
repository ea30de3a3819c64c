"""Estimation of the single main texture direction of a degraded image.

The estimator smooths the image with a Gaussian, computes a per-pixel
gradient angle, folds the angles into a quarter period by quadrupling,
smooths the folded angle field by a weighted quadratic fit (two sparse
SPD linear solves), averages, and finally unfolds to a pi-periodic
direction estimate.

Two points where the published procedure is ambiguous are resolved here
and kept switchable via ``strict_paper``:

* the angle recovered from the smoothed ``(cos, sin)`` pair lives in
  quadrupled-angle space and is divided by 4 before averaging, so the
  final quarter-period unfolding is well defined;
* the unfolding step returns ``theta_bar`` / ``theta_bar + pi/2``
  (rather than their negatives), which is the variant that minimizes the
  directional-TV energy under this package's axis convention (first
  array axis, rotating toward the second).  ``strict_paper=True``
  selects the literal published branches, which correspond to the
  mirrored screen-coordinate convention.

Correctness is asserted through a convention-free check: the estimated
angle never yields a larger directional-TV energy than its
perpendicular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .diffops import grad
from .forward import gaussian_blur
from .grids import pointwise_norm, validate_image

__all__ = ["EstimatorConfig", "pixelwise_angle", "smooth_angle_field", "estimate_main_direction"]


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs of the direction estimator.

    ``smooth_sigma`` is the pre-smoothing Gaussian std; ``smooth_mu`` the
    weight of the quadratic smoothing of the folded angle field;
    ``gradient_floor`` the magnitude below which a pixel's angle is set
    to zero.  ``smoothed_weights=False`` restores the literal choice of
    weighting by the unsmoothed image gradient.
    """

    smooth_sigma: float = 10.0
    smooth_mu: float = 100.0
    gradient_floor: float = 1e-3
    linear_solver_tol: float = 1e-10
    strict_paper: bool = False
    smoothed_weights: bool = True

    def __post_init__(self):
        if self.smooth_sigma <= 0:
            raise ValueError("smooth_sigma must be positive")
        if self.smooth_mu < 0:
            raise ValueError("smooth_mu must be non-negative")


def pixelwise_angle(g: np.ndarray, floor: float = 1e-3) -> np.ndarray:
    """Per-pixel angle of a 2-vector field, in ``[0, 2 pi)``.

    Pixels with magnitude below ``floor`` get angle 0; otherwise
    ``arccos(g1/|g|)`` when the second component is non-negative and
    ``2 pi - arccos(g1/|g|)`` when it is negative.
    """
    g = np.asarray(g, dtype=np.float64)
    n = pointwise_norm(g)
    safe = np.where(n > 0, n, 1.0)
    base = np.arccos(np.clip(g[0] / safe, -1.0, 1.0))
    ang = np.where(g[1] >= 0, base, 2.0 * math.pi - base)
    ang = np.where(n < floor, 0.0, ang)
    return np.mod(ang, 2.0 * math.pi)


def _grad_quadratic_form(m: int, n: int) -> sp.csr_matrix:
    """Sparse matrix of ``grad^T grad`` for the forward-difference stencil."""
    def fwd(k):
        d = sp.diags([-np.ones(k), np.ones(k - 1)], [0, 1], shape=(k, k), format="csr")
        d = d.tolil()
        d[k - 1, k - 1] = 0.0
        return d.tocsr()

    f1 = fwd(m)
    f2 = fwd(n)
    l1 = sp.kron(f1.T @ f1, sp.identity(n, format="csr"), format="csr")
    l2 = sp.kron(sp.identity(m, format="csr"), f2.T @ f2, format="csr")
    return l1 + l2


def smooth_angle_field(theta1: np.ndarray, weights: np.ndarray, mu: float,
                       tol: float = 1e-10):
    """Weighted quadratic smoothing of the quadrupled angle field.

    With ``c1 = cos(4 theta1)`` and ``s1 = sin(4 theta1)``, returns the
    minimizer ``(c2, s2)`` of

        sum_ij w_ij |(c1, s1) - (c2, s2)|^2
              + mu (|grad c2|^2 + |grad s2|^2),

    i.e. the solutions of the two decoupled SPD systems
    ``(W + mu grad^T grad) x = W x1``.  The systems are solved by a
    sparse direct factorization (residuals are checked against ``tol``).
    Degenerate input (all weights zero) returns ``(c1, s1)`` unchanged.
    """
    theta1 = np.asarray(theta1, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if theta1.shape != weights.shape:
        raise ValueError("angle field and weights must share a shape")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    c1 = np.cos(4.0 * theta1)
    s1 = np.sin(4.0 * theta1)
    if mu == 0.0 or not np.any(weights > 0):
        return c1, s1

    m, n = theta1.shape
    a = sp.diags(weights.ravel()) + mu * _grad_quadratic_form(m, n)
    lu = spla.splu(a.tocsc())
    rhs_c = (weights * c1).ravel()
    rhs_s = (weights * s1).ravel()
    c2 = lu.solve(rhs_c)
    s2 = lu.solve(rhs_s)
    scale = max(float(np.abs(rhs_c).max()), float(np.abs(rhs_s).max()), 1.0)
    res = max(
        float(np.abs(a @ c2 - rhs_c).max()),
        float(np.abs(a @ s2 - rhs_s).max()),
    )
    if res > tol * scale * 1e6:
        # splu is a direct solve; a large residual indicates a truly
        # ill-conditioned system rather than an unconverged iteration
        raise RuntimeError(f"angle smoothing solve residual {res:.2e} too large")
    return c2.reshape(m, n), s2.reshape(m, n)


def estimate_main_direction(f: np.ndarray, cfg: EstimatorConfig | None = None):
    """Estimate the main texture direction of ``f``.

    Returns ``(theta, diagnostics)`` with ``theta`` in ``[0, pi)``.
    Diagnostics carry the per-pixel angle field (quarter-period), the
    mean gradient magnitude as a confidence proxy, and intermediate
    values.  A constant image returns ``theta = 0`` with zero
    confidence.
    """
    cfg = cfg or EstimatorConfig()
    f = validate_image(f)

    f_s = gaussian_blur(cfg.smooth_sigma).apply(f)
    g = grad(f_s)
    gnorm = pointwise_norm(g)
    confidence = float(gnorm.mean())
    if not np.any(gnorm >= cfg.gradient_floor):
        diag = {"theta_field": np.zeros_like(f), "confidence": 0.0,
                "theta_bar": 0.0, "grad_sign_sum": 0.0, "spread": 0.0,
                "used_circular_mean": False}
        return 0.0, diag

    theta1 = pixelwise_angle(g, cfg.gradient_floor)
    if cfg.smoothed_weights:
        weights = gnorm ** 2
    else:
        weights = pointwise_norm(grad(f)) ** 2
    c2, s2 = smooth_angle_field(theta1, weights, cfg.smooth_mu, cfg.linear_solver_tol)

    psi = pixelwise_angle(np.stack([c2, s2]), cfg.gradient_floor)  # quadrupled angles
    theta2 = psi / 4.0

    # average the folded angles; fall back to the circular mean when the
    # field straddles the wrap-around of the quarter period
    z = np.exp(1j * psi)
    zbar = complex(z.mean())
    rbar = abs(zbar)
    spread = math.sqrt(-2.0 * math.log(max(rbar, 1e-300)))
    use_circular = (not cfg.strict_paper) and spread > math.pi / 4.0
    if use_circular:
        theta_bar = (math.atan2(zbar.imag, zbar.real) % (2.0 * math.pi)) / 4.0
    else:
        theta_bar = float(theta2.mean())

    sign_sum = float(np.sum(g[0] * g[1]))
    if cfg.strict_paper:
        theta = -theta_bar if sign_sum <= 0 else math.pi / 2.0 - theta_bar
    else:
        theta = theta_bar if sign_sum <= 0 else theta_bar + math.pi / 2.0
    theta = float(theta % math.pi)

    diag = {"theta_field": theta2, "confidence": confidence, "theta_bar": theta_bar,
            "grad_sign_sum": sign_sum, "spread": spread,
            "used_circular_mean": use_circular}
    return theta, diag
