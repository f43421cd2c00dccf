"""Walker marginals, Holevo's circular standard deviation and scaling fits."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .distribution import PhaseDistribution
from .errors import InsufficientData, UnboundedSigmaWarning
from .numerics import RegressionResult, linear_regression
from .walk import CoinSpec, WalkConfig, WalkLatticeState, iter_walk

log = logging.getLogger(__name__)

UNBOUNDED = math.inf
MOMENT_FLOOR = 1e-12
# spreads at or below this are a point mass; a window of them has zero growth
ZERO_SPREAD = 1e-12
_PAIRWISE_MAX = 2048


def is_unbounded(sigma: float) -> bool:
    return math.isinf(sigma)


def marginal_distribution(
    state: WalkLatticeState, walker: int, delta: float, phi0: float = 0.0
) -> PhaseDistribution:
    """Distribution of one walker's angle ``phi0 + k*delta (mod 2pi)``,
    summed over the other walkers' offsets and all coin strings."""
    n = state.num_walkers
    if not 0 <= walker < n:
        raise IndexError(f"walker index {walker} out of range for {n} walkers")
    probs = np.abs(state.amplitudes) ** 2
    other = tuple(a for a in range(2 * n) if a != walker)
    p = probs.sum(axis=other)
    ks = state.offsets
    mask = p > 0
    p = p[mask]
    return PhaseDistribution.discrete(phi0 + ks[mask] * delta, p / p.sum())


def lattice_spread(state: WalkLatticeState, walker: int, delta: float) -> float:
    """Ordinary standard deviation of ``k*delta`` on the unwrapped lattice.

    Diagnostic only: it coincides with the Holevo measure while the spread is
    small compared with the circle.
    """
    n = state.num_walkers
    other = tuple(a for a in range(2 * n) if a != walker)
    p = (np.abs(state.amplitudes) ** 2).sum(axis=other)
    x = state.offsets * delta
    m = float(np.sum(p * x))
    return float(math.sqrt(max(float(np.sum(p * (x - m) ** 2)), 0.0)))


def holevo_sigma(p: PhaseDistribution) -> float:
    """``sqrt(|mu|^-2 - 1)`` with ``mu`` the first circular moment.

    Returns :data:`UNBOUNDED` (``inf``) when ``|mu| < 1e-12``.  For small
    discrete supports ``1 - |mu|^2`` is accumulated pairwise as
    ``sum p_i p_j 2 sin^2((phi_i - phi_j)/2)`` so a point mass gives exactly 0.
    """
    mu = p.first_moment()
    amod = abs(mu)
    if amod < MOMENT_FLOOR:
        return UNBOUNDED
    if p.is_discrete and p.angles.size <= _PAIRWISE_MAX:
        diff = p.angles[:, None] - p.angles[None, :]
        one_minus = float(np.sum(np.outer(p.values, p.values) * 2.0 * np.sin(diff / 2) ** 2))
        return math.sqrt(max(one_minus, 0.0)) / amod
    return math.sqrt(max(1.0 / amod**2 - 1.0, 0.0))


@dataclass(frozen=True)
class SigmaSeries:
    ns: tuple[int, ...]
    sigmas: tuple[float, ...]

    def __post_init__(self):
        if len(self.ns) != len(self.sigmas):
            raise ValueError("ns and sigmas differ in length")
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise ValueError("step counts must be strictly increasing")
        if any(s < 0 for s in self.sigmas):
            raise ValueError("sigma must be non-negative")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "SigmaSeries":
        pairs = list(pairs)
        return cls(tuple(int(n) for n, _ in pairs), tuple(float(s) for _, s in pairs))

    def __iter__(self):
        return iter(zip(self.ns, self.sigmas))

    def __len__(self) -> int:
        return len(self.ns)

    def at(self, n: int) -> float:
        return self.sigmas[self.ns.index(n)]

    def window(self, n_min: int, n_max: int) -> "SigmaSeries":
        return SigmaSeries.from_pairs((n, s) for n, s in self if n_min <= n <= n_max)


def sigma_series(
    config: WalkConfig,
    spec: CoinSpec,
    walker: int = 0,
    n_max: int | None = None,
    measure: str = "holevo",
) -> SigmaSeries:
    """Spread of one walker for N = 1..n_max, stepping the walk incrementally.

    ``measure`` is ``"holevo"`` (circular, the default) or ``"lattice"`` (the
    unwrapped diagnostic from :func:`lattice_spread`).
    """
    n_max = config.steps if n_max is None else int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if measure not in ("holevo", "lattice"):
        raise ValueError(f"unknown spread measure {measure!r}")
    cfg = WalkConfig(config.num_walkers, config.delta, config.initial_coin, config.initial_phase, n_max)
    phi0 = cfg.initial_phase[walker]
    out = []
    for state in iter_walk(cfg, spec):
        if state.steps == 0:
            continue
        if measure == "lattice":
            out.append((state.steps, lattice_spread(state, walker, cfg.delta)))
        else:
            out.append((state.steps, holevo_sigma(marginal_distribution(state, walker, cfg.delta, phi0))))
    return SigmaSeries.from_pairs(out)


def classical_sigma_series(delta: float, n_max: int, phi0: float = 0.0) -> SigmaSeries:
    from .walk import classical_walk_distribution

    return SigmaSeries.from_pairs(
        (n, holevo_sigma(classical_walk_distribution(delta, n, 1, phi0)[0])) for n in range(1, n_max + 1)
    )


def scaling_exponent(series: SigmaSeries, n_min: int, n_max: int) -> RegressionResult:
    """OLS fit of ``ln sigma`` against ``ln N`` over ``n_min <= N <= n_max``.

    Unbounded entries are dropped with a warning.  A window whose spreads are
    all zero (a point mass carried rigidly) is a constant series and reports
    slope 0 with zero stderr; zeros mixed with positive spreads are rejected.
    """
    win = series.window(n_min, n_max)
    dropped = [n for n, s in win if is_unbounded(s)]
    if dropped:
        msg = f"excluding unbounded sigma at N={dropped} from the fit"
        log.warning(msg)
        warnings.warn(msg, UnboundedSigmaWarning, stacklevel=2)
    pts = [(n, s) for n, s in win if not is_unbounded(s)]
    if len(pts) < 3:
        raise InsufficientData(f"only {len(pts)} usable points in window [{n_min}, {n_max}]")
    sig = np.array([s for _, s in pts])
    if np.all(sig <= ZERO_SPREAD):
        return RegressionResult(0.0, 0.0, -math.inf, 1.0, len(pts))
    if np.any(sig <= 0):
        raise InsufficientData("zero spread mixed with positive spreads; ln sigma undefined")
    return linear_regression(np.log([n for n, _ in pts]), np.log(sig))


def localization_check(series: SigmaSeries, n_ref: int = 5, factor: float = 3.0) -> tuple[bool, float, float]:
    """Bounded-spread witness: ``max sigma <= factor * sigma(n_ref)``.

    Returns ``(bounded, max_sigma, reference_sigma)``; unbounded entries make
    the series unbounded.
    """
    ref = series.at(n_ref)
    top = max(series.sigmas)
    if is_unbounded(top) or is_unbounded(ref):
        return False, top, ref
    return top <= factor * ref + ZERO_SPREAD, top, ref
