"""Degradation operators, noise synthesis, and directional test phantoms.

The Gaussian blur is a separable convolution with a truncated, normalized
1-D kernel and reflective (symmetric) boundary extension, so constants
are invariant.  Its adjoint is the exact algebraic transpose, built by
transposing the pad-then-correlate pipeline (full correlation followed by
folding the padded border back onto the grid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import validate_image

__all__ = ["ForwardOperator", "identity", "gaussian_blur", "NoiseSpec", "add_noise", "phantom"]


def _gauss_kernel(sigma: float, radius: int) -> np.ndarray:
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (t / sigma) ** 2)
    return k / k.sum()


def _reflect_index(r: int, n: int) -> np.ndarray:
    """Source index for each position of a symmetric pad of width r.

    Folds with period 2n, so pads wider than the axis reflect repeatedly.
    """
    t = np.mod(np.arange(-r, n + r), 2 * n)
    return np.where(t < n, t, 2 * n - 1 - t)


def _blur1d(x: np.ndarray, k: np.ndarray, axis: int) -> np.ndarray:
    """Valid correlation of the symmetric-padded array with kernel k."""
    r = (len(k) - 1) // 2
    x = np.moveaxis(x, axis, 0)
    n = x.shape[0]
    xp = x[_reflect_index(r, n)]
    out = np.zeros_like(x)
    for m in range(len(k)):
        out += k[m] * xp[m : m + n]
    return np.moveaxis(out, 0, axis)


def _blur1d_adjoint(y: np.ndarray, k: np.ndarray, axis: int) -> np.ndarray:
    """Exact transpose of :func:`_blur1d`: spread with the kernel, then
    fold the padded border back through the reflection index map."""
    r = (len(k) - 1) // 2
    y = np.moveaxis(y, axis, 0)
    n = y.shape[0]
    z = np.zeros((n + 2 * r,) + y.shape[1:], dtype=np.float64)
    for m in range(len(k)):
        z[m : m + n] += k[m] * y
    out = np.zeros_like(y)
    np.add.at(out, _reflect_index(r, n), z)
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True)
class ForwardOperator:
    """Linear degradation operator: ``identity`` or separable ``gaussian_blur``.

    For the blur, ``kernel_radius`` defaults to ``ceil(4 * blur_sigma)``
    and the truncated kernel is renormalized to sum to one, keeping the
    operator norm at most 1.
    """

    kind: str = "identity"
    blur_sigma: float = 0.0
    kernel_radius: int = 0

    def __post_init__(self):
        if self.kind not in ("identity", "gaussian_blur"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind == "gaussian_blur":
            if self.blur_sigma <= 0:
                raise ValueError("blur_sigma must be positive")
            if self.kernel_radius <= 0:
                object.__setattr__(self, "kernel_radius", math.ceil(4.0 * self.blur_sigma))

    def kernel(self) -> np.ndarray:
        if self.kind != "gaussian_blur":
            raise ValueError("identity operator has no kernel")
        return _gauss_kernel(self.blur_sigma, self.kernel_radius)

    def apply(self, u: np.ndarray) -> np.ndarray:
        u = validate_image(u)
        if self.kind == "identity":
            return u.copy()
        k = self.kernel()
        return _blur1d(_blur1d(u, k, 0), k, 1)

    def adjoint(self, u: np.ndarray) -> np.ndarray:
        u = validate_image(u)
        if self.kind == "identity":
            return u.copy()
        k = self.kernel()
        # transpose of apply = transposed factors in reverse order
        return _blur1d_adjoint(_blur1d_adjoint(u, k, 1), k, 0)


def identity() -> ForwardOperator:
    return ForwardOperator(kind="identity")


def gaussian_blur(sigma: float, radius: int = 0) -> ForwardOperator:
    return ForwardOperator(kind="gaussian_blur", blur_sigma=sigma, kernel_radius=radius)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise, deterministic per seed.

    ``level`` is a fraction; with the default ``range_relative``
    convention the noise std is ``level * (max(u) - min(u))``, with
    ``norm_relative`` the noise is scaled so its Frobenius norm equals
    ``level * |u|_F``.
    """

    level: float
    seed: int = 0
    convention: str = "range_relative"

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("noise level must be non-negative")
        if self.convention not in ("range_relative", "norm_relative"):
            raise ValueError(f"unknown noise convention {self.convention!r}")


def add_noise(u: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """Return ``u`` plus i.i.d. zero-mean Gaussian noise per ``spec``."""
    u = validate_image(u)
    if spec.level == 0.0:
        return u.copy()
    rng = np.random.default_rng(spec.seed)
    eta = rng.standard_normal(u.shape)
    if spec.convention == "range_relative":
        std = spec.level * (float(u.max()) - float(u.min()))
        return u + std * eta
    target = spec.level * float(np.sqrt((u * u).sum()))
    eta_norm = float(np.sqrt((eta * eta).sum()))
    return u + (target / eta_norm) * eta


def _coords(size: int):
    i, j = np.meshgrid(np.arange(size, dtype=np.float64), np.arange(size, dtype=np.float64), indexing="ij")
    return i, j


def _supersample(fn, size: int, ss: int = 4) -> np.ndarray:
    """Average ``fn(i, j)`` over an ss x ss subpixel grid (area-coverage
    anti-aliasing, so rotated hard edges do not alias into spurious
    variation along the texture direction)."""
    i, j = _coords(size)
    acc = np.zeros((size, size))
    offsets = (np.arange(ss) + 0.5) / ss - 0.5
    for di in offsets:
        for dj in offsets:
            acc += fn(i + di, j + dj)
    return acc / (ss * ss)


def phantom(kind: str, size: int, angle: float = 0.0, period: float = 16.0, **extra) -> np.ndarray:
    """Synthetic directional ground-truth images, values in ``[0, 1]``.

    kind
        ``stripes``            piecewise-constant bands, constant along ``angle``
        ``affine_stripes``     sawtooth ramps across the texture direction
                               (piecewise affine, constant along ``angle``)
        ``dark_band_stripes``  stripes dimmed inside a band perpendicular to
                               the main direction (``band_center``,
                               ``band_width`` fractions of the image,
                               ``band_level`` multiplier)
        ``ellipse``            smoothed indicator of an elongated ellipse
                               (``semi_major``, ``ratio`` minor/major,
                               ``smooth_sigma``)

    ``angle`` is in radians, measured from the first array axis toward
    the second; ``period`` is the band period in pixels.
    """
    if size < 16:
        raise ValueError("phantom size must be at least 16")
    if period < 4:
        raise ValueError("phantom period must be at least 4 pixels")
    lo, hi = 0.1, 0.9
    sin_a, cos_a = math.sin(angle), math.cos(angle)
    edge = extra.get("edge_width", 3.0)
    i, j = _coords(size)
    across = -sin_a * i + cos_a * j  # coordinate across the texture
    along = cos_a * i + sin_a * j

    def step(x):
        # linear transition of width `edge` centered at x = 0; a hard edge
        # would alias under the half-pixel-staggered gradient stencil
        return np.clip(x / edge + 0.5, 0.0, 1.0)

    def band_coverage(s):
        half = 0.5 * period
        cov = np.minimum(step(s), step(half - s))
        return np.maximum(cov, step(s - period))  # wrap-around of the rising edge

    if kind == "stripes":
        return lo + (hi - lo) * band_coverage(np.mod(across, period))

    if kind == "affine_stripes":
        t = np.mod(across, period) / period
        return lo + (hi - lo) * t

    if kind == "dark_band_stripes":
        center = extra.get("band_center", 0.5)
        width = extra.get("band_width", 0.25)
        level = extra.get("band_level", 0.35)
        u = lo + (hi - lo) * band_coverage(np.mod(across, period))
        t = along - along.min()
        t /= t.max()
        span = t.max() * width  # band half-width in the along coordinate
        dark_cov = step(0.5 * span * t.size ** 0 - 0.0 + 0.0)  # placeholder
        dark_cov = np.minimum(step((t - (center - 0.5 * width)) * (size - 1.0)),
                              step(((center + 0.5 * width) - t) * (size - 1.0)))
        mult = 1.0 - (1.0 - level) * dark_cov
        return u * mult

    if kind == "ellipse":
        semi_major = extra.get("semi_major", 0.35 * size)
        ratio = extra.get("ratio", 0.3)
        smooth_sigma = extra.get("smooth_sigma", 2.0)
        c = 0.5 * (size - 1)

        def indicator(i, j):
            xr = cos_a * (i - c) + sin_a * (j - c)
            yr = -sin_a * (i - c) + cos_a * (j - c)
            inside = (xr / semi_major) ** 2 + (yr / (ratio * semi_major)) ** 2 <= 1.0
            return lo + (hi - lo) * inside.astype(np.float64)

        ind = _supersample(indicator, size)
        if smooth_sigma > 0:
            ind = gaussian_blur(smooth_sigma).apply(ind)
        return ind

    raise ValueError(f"unknown phantom kind {kind!r}")
