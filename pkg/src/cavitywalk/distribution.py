"""Probability distributions on the circle [0, 2pi)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi
DISCRETE_NORM_TOL = 1e-10
GRID_NORM_TOL = 1e-6
MERGE_TOL = 1e-12


def wrap_angle(phi):
    """Map angles into [0, 2pi); values within MERGE_TOL of 2pi fold to 0."""
    out = np.mod(np.asarray(phi, dtype=float), TWO_PI)
    out = np.where(TWO_PI - out < MERGE_TOL, 0.0, out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PhaseDistribution:
    """Either a discrete support ``(angles, probabilities)`` or a density
    sampled on the uniform grid ``2*pi*m/M``.

    Use :meth:`discrete` and :meth:`grid` to construct; both validate
    normalization.
    """

    kind: str
    angles: np.ndarray
    values: np.ndarray

    @classmethod
    def discrete(cls, angles, probs, merge: bool = True) -> "PhaseDistribution":
        a = wrap_angle(np.atleast_1d(np.asarray(angles, dtype=float)))
        p = np.atleast_1d(np.asarray(probs, dtype=float))
        if a.shape != p.shape:
            raise ValueError("angles and probabilities must have equal length")
        if np.any(p < -DISCRETE_NORM_TOL):
            raise ValueError("negative probability")
        total = float(p.sum())
        if abs(total - 1.0) > DISCRETE_NORM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        p = np.clip(p, 0.0, None)
        if merge:
            a, p = _merge(a, p)
        return cls("discrete", a, p)

    @classmethod
    def grid(cls, densities) -> "PhaseDistribution":
        f = np.asarray(densities, dtype=float)
        if f.ndim != 1 or f.size < 2:
            raise ValueError("grid densities must be a 1-D array with at least 2 samples")
        m = f.size
        integral = float(f.sum() * TWO_PI / m)
        if abs(integral - 1.0) > GRID_NORM_TOL:
            raise ValueError(f"grid density integrates to {integral!r}, not 1")
        return cls("grid", TWO_PI * np.arange(m) / m, f)

    @property
    def is_discrete(self) -> bool:
        return self.kind == "discrete"

    def total(self) -> float:
        if self.is_discrete:
            return float(self.values.sum())
        return float(self.values.sum() * TWO_PI / self.values.size)

    def first_moment(self) -> complex:
        """Circular moment E[exp(i phi)]; periodic trapezoid rule on grids."""
        if self.is_discrete:
            return complex(np.sum(self.values * np.exp(1j * self.angles)))
        m = self.values.size
        return complex(np.sum(self.values * np.exp(1j * self.angles)) * TWO_PI / m)

    def circular_mean(self) -> float:
        return float(wrap_angle(np.angle(self.first_moment())))

    def as_dict(self) -> dict[float, float]:
        return dict(zip(self.angles.tolist(), self.values.tolist()))


def _merge(a: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if a.size <= 1:
        return a, p
    order = np.argsort(a, kind="stable")
    a, p = a[order], p[order]
    keep_a, keep_p = [a[0]], [p[0]]
    for ang, prob in zip(a[1:], p[1:]):
        if ang - keep_a[-1] <= MERGE_TOL:
            keep_p[-1] += prob
        else:
            keep_a.append(ang)
            keep_p.append(prob)
    # the last point may sit just below 2pi next to a point at 0
    if len(keep_a) > 1 and keep_a[0] + TWO_PI - keep_a[-1] <= MERGE_TOL:
        keep_p[0] += keep_p.pop()
        keep_a.pop()
    return np.array(keep_a), np.array(keep_p)
