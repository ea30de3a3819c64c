"""Grid-valued data types, inner products, pointwise norms and image metrics.

Images are plain ``(M, N)`` float64 arrays (intensities, nominally in
``[0, 1]``).  Per-pixel 2-vectors are stored component-first as
``(2, M, N)`` arrays, and symmetric 2x2 tensors as ``(3, M, N)`` arrays
holding the components ``(w11, w12, w22)``; the off-diagonal entry is
stored once and counted twice wherever a full-matrix Frobenius pairing
or norm is needed.  All operations here are pure functions of their
inputs and are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DirectionParams",
    "validate_image",
    "validate_vector_field",
    "validate_sym_tensor_field",
    "inner_product",
    "pointwise_norm",
    "psnr",
]


@dataclass(frozen=True)
class DirectionParams:
    """Main texture direction: angle ``theta`` (radians) and anisotropy
    ratio ``a`` in ``(0, 1]``.

    ``theta`` is measured from the first array axis toward the second and
    is normalized to ``[0, pi)`` on construction (the functionals are
    invariant under ``theta -> theta + pi``).  ``a = 1`` recovers the
    isotropic operators regardless of ``theta``.
    """

    theta: float
    a: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.a <= 1.0):
            raise ValueError(f"anisotropy ratio a must be in (0, 1], got {self.a}")
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")
        object.__setattr__(self, "theta", float(self.theta) % math.pi)

    @property
    def isotropic(self) -> bool:
        return self.a == 1.0


def validate_image(u, name: str = "image") -> np.ndarray:
    """Return ``u`` as a float64 ``(M, N)`` array, checking the grid invariants."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2 or u.shape[0] < 2 or u.shape[1] < 2:
        raise ValueError(f"{name} must be a 2-D array with at least 2x2 pixels, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError(f"{name} contains non-finite values")
    return u


def validate_vector_field(p, name: str = "vector field") -> np.ndarray:
    """Return ``p`` as a float64 ``(2, M, N)`` array, checking invariants."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 3 or p.shape[0] != 2 or p.shape[1] < 2 or p.shape[2] < 2:
        raise ValueError(f"{name} must have shape (2, M, N), got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{name} contains non-finite values")
    return p


def validate_sym_tensor_field(w, name: str = "tensor field") -> np.ndarray:
    """Return ``w`` as a float64 ``(3, M, N)`` array of (w11, w12, w22) components."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 3 or w.shape[0] != 3 or w.shape[1] < 2 or w.shape[2] < 2:
        raise ValueError(f"{name} must have shape (3, M, N), got {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError(f"{name} contains non-finite values")
    return w


def inner_product(x, y) -> float:
    """Euclidean pairing of two fields of the same kind and shape.

    For images and vector fields this is the plain componentwise sum of
    products.  For symmetric tensor fields the off-diagonal component is
    counted twice, so the value equals the full-matrix Frobenius pairing
    ``sum_ij tr(X_ij^T Y_ij)``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if x.ndim == 2:
        return float(np.sum(x * y))
    if x.ndim == 3 and x.shape[0] == 2:
        return float(np.sum(x * y))
    if x.ndim == 3 and x.shape[0] == 3:
        return float(np.sum(x[0] * y[0] + 2.0 * x[1] * y[1] + x[2] * y[2]))
    raise ValueError(f"unsupported field shape {x.shape}")


def pointwise_norm(field) -> np.ndarray:
    """Per-pixel norm of a vector or symmetric tensor field.

    Vectors use the Euclidean 2-norm.  Symmetric tensors use the
    full-matrix Frobenius norm ``sqrt(w11^2 + 2 w12^2 + w22^2)``, which
    counts the off-diagonal twice and matches :func:`inner_product`.
    """
    field = np.asarray(field, dtype=np.float64)
    if field.ndim == 3 and field.shape[0] == 2:
        return np.sqrt(field[0] ** 2 + field[1] ** 2)
    if field.ndim == 3 and field.shape[0] == 3:
        return np.sqrt(field[0] ** 2 + 2.0 * field[1] ** 2 + field[2] ** 2)
    raise ValueError(f"expected a (2, M, N) or (3, M, N) field, got shape {field.shape}")


def psnr(u, ref, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in decibels.

    ``10 log10(peak^2 * M * N / sum((u - ref)^2))``.  Returns ``math.inf``
    when the two images are identical.
    """
    u = np.asarray(u, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if u.shape != ref.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {ref.shape}")
    if peak <= 0:
        raise ValueError("peak must be positive")
    err = float(np.sum((u - ref) ** 2))
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak * u.size / err)
