"""Chambolle-Pock primal-dual solver for the L2-DTGV2 restoration model
and its first-order (TV/DTV) specialization.

The second-order model

    min_u  1/2 |A u - f|_F^2  +  min_v lambda1 sum|dgrad u - v| + lambda0 sum|sym_dgrad v|_F

is solved as a saddle-point problem over primal ``(u, v)`` and duals
``(q, p, W)``.  One iteration performs, in order,

    p <- proj_{lambda1}(p + sigma (dgrad u_bar - v_bar))
    W <- proj_{lambda0}(W + sigma sym_dgrad v_bar)
    q <- (q + sigma (A u_bar - f)) / (1 + sigma)
    u <- u + tau (ddiv_vec p - A* q)
    v <- v + tau (p + ddiv_tensor W)
    u_bar <- 2 u_new - u_old,  v_bar <- 2 v_new - v_old

with all variables starting at zero and step sizes
``sigma = tau = 0.99 / sqrt(L)``, where ``L`` is the squared norm of the
stacked linear operator estimated by power iteration.  The stopping
criterion is the relative change of the objective evaluated with the
current auxiliary iterate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .diffops import ddiv_tensor, ddiv_vec, dgrad, sym_dgrad
from .forward import ForwardOperator
from .grids import pointwise_norm, psnr, validate_image
from .regularizers import RegularizerSpec, project_ball

__all__ = [
    "SolverConfig",
    "SolverDivergedError",
    "IterationLog",
    "SolveResult",
    "power_method",
    "estimate_lipschitz",
    "solve_l2_dtgv2",
    "solve_l2_first_order",
]


class SolverDivergedError(RuntimeError):
    """Raised when the objective becomes non-finite (step sizes violated)."""


@dataclass
class SolverConfig:
    """Step sizes, tolerance and iteration limits for the saddle solver.

    With ``auto_steps`` (the default) both steps are set to
    ``0.99 / sqrt(L)`` from the power-method estimate of ``L``; manual
    steps must satisfy ``step_sigma * step_tau * L < 1``.
    ``init_with_data`` starts the primal iterate at ``f`` instead of
    zero (useful for checking solution uniqueness).
    """

    tol: float = 1e-6
    max_iter: int = 20000
    step_sigma: float | None = None
    step_tau: float | None = None
    auto_steps: bool = True
    lipschitz_iters: int = 200
    lipschitz_seed: int = 0
    init_with_data: bool = False

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.auto_steps and (self.step_sigma is None or self.step_tau is None):
            raise ValueError("manual steps require both step_sigma and step_tau")


@dataclass
class IterationLog:
    """Append-only per-iteration record of (iter, energy, delta[, psnr])."""

    iters: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    deltas: list = field(default_factory=list)
    psnrs: list = field(default_factory=list)
    has_psnr: bool = False

    def record(self, it: int, energy: float, delta: float, psnr_value: float | None = None):
        if self.iters and it <= self.iters[-1]:
            raise ValueError("iteration numbers must be strictly increasing")
        self.iters.append(it)
        self.energies.append(energy)
        self.deltas.append(delta)
        if psnr_value is not None:
            self.psnrs.append(psnr_value)
            self.has_psnr = True

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if self.has_psnr:
                w.writerow(["iter", "energy", "delta", "psnr"])
                for row in zip(self.iters, self.energies, self.deltas, self.psnrs):
                    w.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3])])
            else:
                w.writerow(["iter", "energy", "delta"])
                for row in zip(self.iters, self.energies, self.deltas):
                    w.writerow([row[0], repr(row[1]), repr(row[2])])


@dataclass
class SolveResult:
    """Solver output: restored image, auxiliary field (second order only),
    iteration log, and convergence status."""

    u: np.ndarray
    v: np.ndarray | None
    log: IterationLog
    converged: bool
    iterations: int
    energy: float


def _dot(xs, ys) -> float:
    return float(sum(np.sum(x * y) for x, y in zip(xs, ys)))


def power_method(normal_op, x0, iters: int = 100, tol: float = 1e-6):
    """Largest eigenvalue of a self-adjoint positive operator by power
    iteration.

    ``normal_op`` maps a list of arrays to a list of arrays (typically
    ``K* K``); ``x0`` is the starting point.  Stops when the relative
    change of the eigenvalue estimate drops below ``tol`` or after
    ``iters`` iterations, and returns the last Rayleigh-quotient
    estimate.
    """
    x = [np.asarray(a, dtype=np.float64).copy() for a in x0]
    nrm = np.sqrt(_dot(x, x))
    if nrm == 0:
        raise ValueError("power method needs a nonzero start vector")
    x = [a / nrm for a in x]
    lam = 1.0
    for _ in range(iters):
        y = normal_op(x)
        lam_new = np.sqrt(_dot(y, y))
        if lam_new == 0.0:
            return 0.0
        x = [a / lam_new for a in y]
        if abs(lam_new - lam) < tol * lam_new:
            return float(lam_new)
        lam = lam_new
    return float(lam)


def estimate_lipschitz(A: ForwardOperator, spec: RegularizerSpec, shape,
                       iters: int = 100, seed: int = 0) -> float:
    """Squared norm of the stacked operator of the saddle problem.

    First order stacks ``(A; dgrad)`` acting on ``u``; second order
    stacks ``(A; [dgrad, -I]; [0, sym_dgrad])`` acting on ``(u, v)``.
    Runs power iteration on ``K* K`` (relative change below 1e-6 or
    ``iters`` reached) and multiplies the estimate by a 1.01 safety
    factor.
    """
    if iters < 20:
        raise ValueError("need at least 20 power iterations")
    d = spec.effective_dir
    rng = np.random.default_rng(seed)

    if spec.first_order:
        def normal_op(xs):
            (u,) = xs
            return [A.adjoint(A.apply(u)) - ddiv_vec(dgrad(u, d), d)]

        x0 = [rng.standard_normal(shape)]
    else:
        def normal_op(xs):
            u, v = xs
            r1 = dgrad(u, d) - v
            return [
                A.adjoint(A.apply(u)) - ddiv_vec(r1, d),
                -r1 - ddiv_tensor(sym_dgrad(v, d), d),
            ]

        x0 = [rng.standard_normal(shape), rng.standard_normal((2,) + tuple(shape))]
    return 1.01 * power_method(normal_op, x0, iters=iters, tol=1e-6)


def _resolve_steps(A, spec, shape, cfg: SolverConfig):
    big_l = estimate_lipschitz(A, spec, shape, iters=max(20, cfg.lipschitz_iters),
                               seed=cfg.lipschitz_seed)
    if cfg.auto_steps:
        s = 0.99 / np.sqrt(big_l)
        return s, s
    if cfg.step_sigma * cfg.step_tau * big_l >= 1.0:
        raise ValueError(
            f"step_sigma * step_tau * L = {cfg.step_sigma * cfg.step_tau * big_l:.4f} >= 1"
        )
    return cfg.step_sigma, cfg.step_tau


def solve_l2_dtgv2(f, A: ForwardOperator, spec: RegularizerSpec,
                   cfg: SolverConfig | None = None, reference=None,
                   callback=None) -> SolveResult:
    """Minimize ``1/2 |A u - f|^2 + DTGV2(u)`` (or TGV2 for the isotropic
    kind) with the primal-dual iteration.

    ``reference`` adds a PSNR column to the iteration log.  ``callback``,
    if given, is invoked after every iteration with a dict of the live
    solver variables (for diagnostics; mutating them is undefined).
    """
    if spec.first_order:
        raise ValueError("solve_l2_dtgv2 requires kind tgv2 or dtgv2; use solve_l2_first_order")
    cfg = cfg or SolverConfig()
    f = validate_image(f)
    d = spec.effective_dir
    lam1, lam0 = spec.weights.lambda1, spec.weights.lambda0
    sigma, tau = _resolve_steps(A, spec, f.shape, cfg)

    u = f.copy() if cfg.init_with_data else np.zeros_like(f)
    v = np.zeros((2,) + f.shape)
    u_bar = u.copy()
    v_bar = v.copy()
    p = np.zeros_like(v)
    w = np.zeros((3,) + f.shape)
    q = np.zeros_like(f)

    def energy(uu, vv):
        res = A.apply(uu) - f
        val = 0.5 * float(np.sum(res * res))
        val += lam1 * float(pointwise_norm(dgrad(uu, d) - vv).sum())
        val += lam0 * float(pointwise_norm(sym_dgrad(vv, d)).sum())
        return val

    log = IterationLog()
    j_prev = energy(u, v)
    if j_prev == 0.0:
        return SolveResult(u, v, log, True, 0, 0.0)

    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        p = project_ball(p + sigma * (dgrad(u_bar, d) - v_bar), lam1)
        w = project_ball(w + sigma * sym_dgrad(v_bar, d), lam0)
        q = (q + sigma * (A.apply(u_bar) - f)) / (1.0 + sigma)
        u_new = u + tau * (ddiv_vec(p, d) - A.adjoint(q))
        v_new = v + tau * (p + ddiv_tensor(w, d))
        u_bar = 2.0 * u_new - u
        v_bar = 2.0 * v_new - v
        u, v = u_new, v_new

        j = energy(u, v)
        if not np.isfinite(j):
            raise SolverDivergedError(f"objective became non-finite at iteration {it}")
        delta = abs(j_prev - j) / j_prev if j_prev > 0 else 0.0
        log.record(it, j, delta, None if reference is None else psnr(u, reference))
        if callback is not None:
            callback({"iter": it, "u": u, "v": v, "p": p, "W": w, "q": q,
                      "energy": j, "delta": delta})
        if j_prev == 0.0 or delta <= cfg.tol:
            converged = True
            j_prev = j
            break
        j_prev = j
    return SolveResult(u, v, log, converged, it, j_prev)


def solve_l2_first_order(f, A: ForwardOperator, spec: RegularizerSpec,
                         cfg: SolverConfig | None = None, reference=None,
                         callback=None) -> SolveResult:
    """Minimize ``1/2 |A u - f|^2 + lambda1 sum|dgrad u|`` (TV/DTV) with
    the first-order specialization of the primal-dual iteration (duals
    ``p`` and ``q`` only)."""
    if not spec.first_order:
        raise ValueError("solve_l2_first_order requires kind tv or dtv; use solve_l2_dtgv2")
    cfg = cfg or SolverConfig()
    f = validate_image(f)
    d = spec.effective_dir
    lam1 = spec.weights.lambda1
    sigma, tau = _resolve_steps(A, spec, f.shape, cfg)

    u = f.copy() if cfg.init_with_data else np.zeros_like(f)
    u_bar = u.copy()
    p = np.zeros((2,) + f.shape)
    q = np.zeros_like(f)

    def energy(uu):
        res = A.apply(uu) - f
        return 0.5 * float(np.sum(res * res)) + lam1 * float(pointwise_norm(dgrad(uu, d)).sum())

    log = IterationLog()
    j_prev = energy(u)
    if j_prev == 0.0:
        return SolveResult(u, None, log, True, 0, 0.0)

    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        p = project_ball(p + sigma * dgrad(u_bar, d), lam1)
        q = (q + sigma * (A.apply(u_bar) - f)) / (1.0 + sigma)
        u_new = u + tau * (ddiv_vec(p, d) - A.adjoint(q))
        u_bar = 2.0 * u_new - u
        u = u_new

        j = energy(u)
        if not np.isfinite(j):
            raise SolverDivergedError(f"objective became non-finite at iteration {it}")
        delta = abs(j_prev - j) / j_prev if j_prev > 0 else 0.0
        log.record(it, j, delta, None if reference is None else psnr(u, reference))
        if callback is not None:
            callback({"iter": it, "u": u, "p": p, "q": q, "energy": j, "delta": delta})
        if j_prev == 0.0 or delta <= cfg.tol:
            converged = True
            j_prev = j
            break
        j_prev = j
    return SolveResult(u, None, log, converged, it, j_prev)
