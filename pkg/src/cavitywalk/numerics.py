"""Dense complex linear algebra and least-squares helpers.

Matrices are plain ``numpy.ndarray`` objects of complex dtype; nothing here
mutates its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateAbscissa, DimensionMismatch, InsufficientData, NotHermitian

HERMITIAN_TOL = 1e-10
COLLINEAR_TOL = 1e-12


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermiticity_residual(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def kron(a, b) -> np.ndarray:
    """Tensor product with dims ``(r_a*r_b, c_a*c_b)``."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats: Iterable) -> np.ndarray:
    out = None
    for m in mats:
        out = as_matrix(m) if out is None else np.kron(out, as_matrix(m))
    if out is None:
        raise DimensionMismatch("kron_all needs at least one matrix")
    return out


def matexp_hermitian(h, t: float) -> np.ndarray:
    """Return ``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition.

    The input is symmetrized before ``eigh`` so roundoff asymmetry below the
    tolerance cannot leak into the result.
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {h.shape}")
    resid = hermiticity_residual(h)
    if resid > HERMITIAN_TOL:
        raise NotHermitian(f"max |h - h^dagger| = {resid:.3e} exceeds {HERMITIAN_TOL}")
    if t == 0:
        return np.eye(h.shape[0], dtype=complex)
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    return (v * np.exp(-1j * w * t)) @ dagger(v)


def partial_trace(rho, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduce ``rho`` on the composite space ``dims`` to the subsystems ``keep``.

    Kept subsystems stay in their original order.
    """
    rho = as_matrix(rho)
    dims = [int(x) for x in dims]
    if any(x <= 0 for x in dims):
        raise DimensionMismatch(f"subsystem dims must be positive, got {dims}")
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionMismatch(f"rho has shape {rho.shape}, dims {dims} imply {total}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionMismatch(f"keep indices {keep} out of range for {len(dims)} subsystems")
    resid = hermiticity_residual(rho)
    if resid > HERMITIAN_TOL:
        raise NotHermitian(f"rho is not Hermitian (residual {resid:.3e})")

    n = len(dims)
    traced = [k for k in range(n) if k not in keep]
    t = rho.reshape(dims + dims)
    # einsum labels: ket axes i, bra axes share the ket label when traced out
    letters = "abcdefghijklmnopqrstuvwxyz"
    ket = [letters[k] for k in range(n)]
    bra = [letters[k] if k in traced else letters[n + k] for k in range(n)]
    out = [letters[k] for k in keep] + [letters[n + k] for k in keep]
    red = np.einsum(f"{''.join(ket)}{''.join(bra)}->{''.join(out)}", t)
    kd = int(np.prod([dims[k] for k in keep])) if keep else 1
    return red.reshape(kd, kd)


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    slope_stderr: float
    intercept: float
    r_squared: float
    n_points: int = 0


def linear_regression(xs: Sequence[float], ys: Sequence[float]) -> RegressionResult:
    """Unweighted ordinary least squares of ``ys`` on ``xs``.

    ``slope_stderr`` is the standard error of the slope estimator,
    ``sqrt(SSR / (n - 2) / Sxx)``; it is reported as exactly zero when the
    residuals vanish to within ``COLLINEAR_TOL``.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatch("xs and ys must be 1-D sequences of equal length")
    if x.size < 3:
        raise InsufficientData(f"need at least 3 points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("regression input contains non-finite values")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx <= COLLINEAR_TOL**2 * max(1.0, float(np.max(np.abs(x)))) ** 2:
        raise DegenerateAbscissa("all abscissae are equal")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    scale = max(1.0, float(np.max(np.abs(y))))
    if float(np.max(np.abs(resid))) <= COLLINEAR_TOL * scale:
        stderr = 0.0
        ssr = 0.0
    else:
        ssr = float(np.sum(resid**2))
        stderr = float(np.sqrt(ssr / (x.size - 2) / sxx))
    sst = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if sst == 0.0 else min(1.0, max(0.0, 1.0 - ssr / sst))
    return RegressionResult(slope, stderr, intercept, r2, int(x.size))
