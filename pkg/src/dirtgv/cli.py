"""Command-line interface: phantom generation, degradation, direction
estimation, restoration, PSNR, self checks, and regularization-weight
sweeps.

Angles are degrees on the command line and radians internally.  Exit
codes: 0 success, 1 IO failure, 2 usage error, 3 solver did not converge
(artifacts are still written).  The ``DIRTGV_WORKERS`` environment
variable sets the number of concurrent solves used by ``sweep``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .direction import EstimatorConfig, estimate_main_direction
from .fileio import read_image, write_image
from .forward import NoiseSpec, add_noise, gaussian_blur, identity, phantom
from .grids import DirectionParams, inner_product, pointwise_norm, psnr
from .regularizers import RegWeights, RegularizerSpec, project_ball
from .solver import SolverConfig, solve_l2_dtgv2, solve_l2_first_order

_REG_ALIASES = {"tv": "tv", "dtv": "dtv", "tgv": "tgv2", "tgv2": "tgv2",
                "dtgv": "dtgv2", "dtgv2": "dtgv2"}

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3


def _add_common_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--lambda1", type=float, required=True, help="first-order weight")
    p.add_argument("--ratio", type=float, default=2.0, help="lambda0/lambda1 ratio (default 2)")
    p.add_argument("--a", type=float, default=0.15, help="anisotropy ratio in (0,1] (default 0.15)")
    p.add_argument("--theta", default="auto",
                   help="main direction in degrees, or 'auto' to estimate (default)")
    p.add_argument("--blur-sigma", type=float, default=None,
                   help="forward operator: Gaussian blur std (default: identity)")
    p.add_argument("--tol", type=float, default=1e-6, help="relative-energy stopping tolerance")
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--smooth-sigma", type=float, default=10.0,
                   help="direction estimator pre-smoothing std")
    p.add_argument("--smooth-mu", type=float, default=100.0,
                   help="direction estimator angle-smoothing weight")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dirtgv",
                                 description="Directional TV/TGV restoration of textured images")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="generate a synthetic test image")
    p.add_argument("--kind", required=True,
                   choices=["stripes", "affine_stripes", "dark_band_stripes", "ellipse"])
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--angle", type=float, default=30.0, help="texture direction in degrees")
    p.add_argument("--period", type=float, default=16.0, help="band period in pixels")
    p.add_argument("--band-center", type=float, default=0.5)
    p.add_argument("--band-width", type=float, default=0.25)
    p.add_argument("--band-level", type=float, default=0.35)
    p.add_argument("--semi-major", type=float, default=None)
    p.add_argument("--ellipse-ratio", type=float, default=0.3)
    p.add_argument("--ellipse-smooth", type=float, default=2.0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--bits", type=int, default=16, choices=[8, 16])

    p = sub.add_parser("degrade", help="apply blur and/or noise to an image")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--blur-sigma", type=float, default=None)
    p.add_argument("--noise-level", type=float, default=0.0)
    p.add_argument("--noise-convention", default="range_relative",
                   choices=["range_relative", "norm_relative"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bits", type=int, default=16, choices=[8, 16])

    p = sub.add_parser("estimate-direction", help="estimate the main texture direction")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--smooth-sigma", type=float, default=10.0)
    p.add_argument("--smooth-mu", type=float, default=100.0)
    p.add_argument("--floor", type=float, default=1e-3)
    p.add_argument("--strict-paper", action="store_true",
                   help="use the literal published branches of the estimator")

    p = sub.add_parser("restore", help="solve the variational restoration model")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--reg", required=True, choices=sorted(_REG_ALIASES))
    _add_common_solver_flags(p)
    p.add_argument("--log", default=None, help="write per-iteration CSV log here")
    p.add_argument("--reference", default=None, help="reference image for a PSNR log column")
    p.add_argument("--clip", action="store_true", help="clamp the result to [0,1] before writing")
    p.add_argument("--bits", type=int, default=16, choices=[8, 16])

    p = sub.add_parser("psnr", help="peak signal-to-noise ratio between two images")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-r", "--reference", required=True)
    p.add_argument("--peak", type=float, default=1.0)

    p = sub.add_parser("check", help="run the adjointness/invariant self-test suite")
    p.add_argument("--size", type=int, default=32)
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sweep", help="grid-search lambda1 by PSNR against a reference")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-r", "--reference", required=True)
    p.add_argument("-o", "--output", required=True, help="CSV output path")
    p.add_argument("--reg", required=True, choices=sorted(_REG_ALIASES))
    p.add_argument("--lambdas", default=None,
                   help="comma-separated lambda1 values (overrides the log grid)")
    p.add_argument("--lambda-min", type=float, default=0.02)
    p.add_argument("--lambda-max", type=float, default=0.5)
    p.add_argument("--lambda-count", type=int, default=10)
    p.add_argument("--ratio", type=float, default=2.0)
    p.add_argument("--a", type=float, default=0.15)
    p.add_argument("--theta", default="auto")
    p.add_argument("--blur-sigma", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--smooth-sigma", type=float, default=10.0)
    p.add_argument("--smooth-mu", type=float, default=100.0)
    return ap


def _resolve_theta(args, f) -> float:
    if args.theta == "auto":
        cfg = EstimatorConfig(smooth_sigma=args.smooth_sigma, smooth_mu=args.smooth_mu)
        theta, _ = estimate_main_direction(f, cfg)
        print(f"estimated direction: {math.degrees(theta):.2f} deg", file=sys.stderr)
        return theta
    return math.radians(float(args.theta))


def _make_spec(args, theta: float) -> RegularizerSpec:
    kind = _REG_ALIASES[args.reg]
    a = 1.0 if kind in ("tv", "tgv2") else args.a
    return RegularizerSpec(kind=kind, weights=RegWeights.from_lambda1(args.lambda1, args.ratio),
                           dir=DirectionParams(theta=theta, a=a))


def _operator(blur_sigma):
    return identity() if blur_sigma is None else gaussian_blur(blur_sigma)


def _cmd_phantom(args) -> int:
    extra = {}
    if args.kind == "dark_band_stripes":
        extra = {"band_center": args.band_center, "band_width": args.band_width,
                 "band_level": args.band_level}
    elif args.kind == "ellipse":
        extra = {"ratio": args.ellipse_ratio, "smooth_sigma": args.ellipse_smooth}
        if args.semi_major is not None:
            extra["semi_major"] = args.semi_major
    u = phantom(args.kind, args.size, angle=math.radians(args.angle),
                period=args.period, **extra)
    write_image(args.output, u, bits=args.bits)
    return EXIT_OK


def _cmd_degrade(args) -> int:
    f = read_image(args.input)
    if args.blur_sigma is not None:
        f = gaussian_blur(args.blur_sigma).apply(f)
    f = add_noise(f, NoiseSpec(level=args.noise_level, seed=args.seed,
                               convention=args.noise_convention))
    write_image(args.output, np.clip(f, 0.0, 1.0), bits=args.bits)
    return EXIT_OK


def _cmd_estimate_direction(args) -> int:
    f = read_image(args.input)
    cfg = EstimatorConfig(smooth_sigma=args.smooth_sigma, smooth_mu=args.smooth_mu,
                          gradient_floor=args.floor, strict_paper=args.strict_paper)
    theta, diag = estimate_main_direction(f, cfg)
    print(f"{math.degrees(theta):.4f}")
    print(f"confidence: {diag['confidence']:.6g}", file=sys.stderr)
    return EXIT_OK


def _cmd_restore(args) -> int:
    f = read_image(args.input)
    theta = _resolve_theta(args, f)
    spec = _make_spec(args, theta)
    op = _operator(args.blur_sigma)
    cfg = SolverConfig(tol=args.tol, max_iter=args.max_iter)
    reference = read_image(args.reference) if args.reference else None
    if spec.first_order:
        res = solve_l2_first_order(f, op, spec, cfg, reference=reference)
    else:
        res = solve_l2_dtgv2(f, op, spec, cfg, reference=reference)
    u = np.clip(res.u, 0.0, 1.0) if args.clip else res.u
    write_image(args.output, u, bits=args.bits)
    if args.log:
        res.log.write_csv(args.log)
    if not res.converged:
        print(f"warning: solver stopped at max_iter={args.max_iter} "
              f"without reaching tol={args.tol}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_psnr(args) -> int:
    u = read_image(args.input)
    ref = read_image(args.reference)
    value = psnr(u, ref, peak=args.peak)
    print("inf" if math.isinf(value) else f"{value:.4f}")
    return EXIT_OK


def _cmd_check(args) -> int:
    from .diffops import ddiv_tensor, ddiv_vec, dgrad, grad, div, sym_dgrad

    rng = np.random.default_rng(args.seed)
    n = args.size
    ok = True

    def report(name, worst, bound=1e-12):
        nonlocal ok
        good = worst <= bound
        ok = ok and good
        print(f"{'PASS' if good else 'FAIL'}  {name}: worst {worst:.3e} (bound {bound:g})")

    worst = {"grad/div": 0.0, "dgrad/ddiv_vec": 0.0, "sym_dgrad/ddiv_tensor": 0.0,
             "blur adjoint": 0.0, "isotropic reduction": 0.0, "projection": 0.0}
    blur = gaussian_blur(2.0)
    for _ in range(args.trials):
        d = DirectionParams(rng.uniform(0, math.pi), rng.uniform(0.05, 1.0))
        u = rng.standard_normal((n, n))
        p = rng.standard_normal((2, n, n))
        v = rng.standard_normal((2, n, n))
        w = rng.standard_normal((3, n, n))
        y = rng.standard_normal((n, n))

        def rel(lhs, rhs, scale):
            return abs(lhs + rhs) / scale

        gu = grad(u)
        worst["grad/div"] = max(worst["grad/div"], rel(
            inner_product(gu, p), inner_product(u, div(p)),
            np.linalg.norm(gu) * np.linalg.norm(p)))
        dgu = dgrad(u, d)
        worst["dgrad/ddiv_vec"] = max(worst["dgrad/ddiv_vec"], rel(
            inner_product(dgu, p), inner_product(u, ddiv_vec(p, d)),
            np.linalg.norm(dgu) * np.linalg.norm(p)))
        ev = sym_dgrad(v, d)
        worst["sym_dgrad/ddiv_tensor"] = max(worst["sym_dgrad/ddiv_tensor"], rel(
            inner_product(ev, w), inner_product(v, ddiv_tensor(w, d)),
            math.sqrt(inner_product(ev, ev)) * math.sqrt(inner_product(w, w))))
        worst["blur adjoint"] = max(worst["blur adjoint"], abs(
            inner_product(blur.apply(u), y) - inner_product(u, blur.adjoint(y)))
            / (np.linalg.norm(u) * np.linalg.norm(y)))
        iso = DirectionParams(rng.uniform(0, math.pi), 1.0)
        worst["isotropic reduction"] = max(worst["isotropic reduction"], float(
            np.abs(pointwise_norm(dgrad(u, iso)) - pointwise_norm(grad(u))).max())
            / float(pointwise_norm(grad(u)).max()))
        pr = project_ball(p, 0.7)
        worst["projection"] = max(worst["projection"], float(
            np.abs(project_ball(pr, 0.7) - pr).max()))

    for name, val in worst.items():
        report(name, val)
    print("all checks passed" if ok else "CHECK FAILURES PRESENT")
    return EXIT_OK if ok else 1


def _cmd_sweep(args) -> int:
    f = read_image(args.input)
    ref = read_image(args.reference)
    theta = _resolve_theta(args, f)
    kind = _REG_ALIASES[args.reg]
    a = 1.0 if kind in ("tv", "tgv2") else args.a
    direction = DirectionParams(theta=theta, a=a)
    op = _operator(args.blur_sigma)
    if args.lambdas:
        lambdas = [float(tok) for tok in args.lambdas.split(",") if tok.strip()]
    else:
        lambdas = list(np.geomspace(args.lambda_min, args.lambda_max, args.lambda_count))

    def run(lam1):
        spec = RegularizerSpec(kind=kind, weights=RegWeights.from_lambda1(lam1, args.ratio),
                               dir=direction)
        cfg = SolverConfig(tol=args.tol, max_iter=args.max_iter)
        if spec.first_order:
            res = solve_l2_first_order(f, op, spec, cfg)
        else:
            res = solve_l2_dtgv2(f, op, spec, cfg)
        return res

    workers = max(1, int(os.environ.get("DIRTGV_WORKERS", "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, lambdas))
    else:
        results = [run(lam1) for lam1 in lambdas]

    all_converged = True
    with open(args.output, "w", newline="") as fh:
        fh.write("lambda1,psnr,iters,energy\n")
        for lam1, res in zip(lambdas, results):
            all_converged = all_converged and res.converged
            fh.write(f"{lam1!r},{psnr(res.u, ref)!r},{res.iterations},{res.energy!r}\n")
    return EXIT_OK if all_converged else EXIT_NOT_CONVERGED


_COMMANDS = {
    "phantom": _cmd_phantom,
    "degrade": _cmd_degrade,
    "estimate-direction": _cmd_estimate_direction,
    "restore": _cmd_restore,
    "psnr": _cmd_psnr,
    "check": _cmd_check,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
