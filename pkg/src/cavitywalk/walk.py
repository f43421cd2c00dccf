"""Ideal (closed-system) discrete-time quantum walks of one or more walkers.

Positions live on an abstract integer lattice: walker ``j`` sits at offset
``k_j`` and is displaced by its coin value ``c_j = -1 | +1`` at every step.
Offsets are mapped onto the circle as ``phi0 + k*delta`` only when statistics
are taken (see :mod:`cavitywalk.phase_stats`).

Coin basis ordering: ``|-1>`` is index 0 and ``|+1>`` is index 1; for several
walkers the index is the binary number with walker 1 as the most significant
bit, so two coins order as ``|-1,-1>, |-1,+1>, |+1,-1>, |+1,+1>``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .distribution import PhaseDistribution
from .errors import InvalidTheta

PRUNE_FLOOR = 1e-15
NORM_TOL = 1e-12

_SQ2 = math.sqrt(2.0)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / _SQ2


class CoinKind(str, enum.Enum):
    HADAMARD_TENSOR = "hh"
    ROOT_ISWAP = "sqrt-iswap"
    DFT = "dft"
    GROVER = "grover"
    SINGLE_HADAMARD = "h"

    @classmethod
    def parse(cls, text: str) -> "CoinKind":
        key = text.strip().lower().replace("_", "-")
        aliases = {
            "hh": cls.HADAMARD_TENSOR, "h⊗h": cls.HADAMARD_TENSOR, "hadamard-tensor": cls.HADAMARD_TENSOR,
            "sqrt-iswap": cls.ROOT_ISWAP, "root-iswap": cls.ROOT_ISWAP, "iswap": cls.ROOT_ISWAP,
            "dft": cls.DFT, "d": cls.DFT,
            "grover": cls.GROVER, "g": cls.GROVER,
            "h": cls.SINGLE_HADAMARD, "hadamard": cls.SINGLE_HADAMARD,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown coin kind {text!r}") from None


@dataclass(frozen=True)
class CoinSpec:
    kind: CoinKind
    theta: float = math.pi / 4

    def __post_init__(self):
        object.__setattr__(self, "kind", CoinKind(self.kind))
        if self.kind is CoinKind.ROOT_ISWAP and not (0.0 < self.theta <= math.pi / 2):
            raise InvalidTheta(f"theta must lie in (0, pi/2], got {self.theta!r}")

    @property
    def label(self) -> str:
        return self.kind.value


def coin_matrix(spec: CoinSpec, num_walkers: int | None = None) -> np.ndarray:
    """Unitary coin-toss matrix in the package's coin basis ordering."""
    kind = spec.kind
    if kind is CoinKind.SINGLE_HADAMARD:
        if num_walkers not in (None, 1):
            raise ValueError("the single Hadamard coin acts on one walker")
        return HADAMARD.copy()
    if kind is CoinKind.HADAMARD_TENSOR:
        n = 2 if num_walkers is None else int(num_walkers)
        if n < 1:
            raise ValueError("num_walkers must be positive")
        out = np.ones((1, 1), dtype=complex)
        for _ in range(n):
            out = np.kron(out, HADAMARD)
        return out
    if num_walkers not in (None, 2):
        raise ValueError(f"{kind.value} coin is defined for two walkers only")
    if kind is CoinKind.ROOT_ISWAP:
        c, s = math.cos(spec.theta), math.sin(spec.theta)
        return np.array(
            [[1, 0, 0, 0], [0, c, 1j * s, 0], [0, 1j * s, c, 0], [0, 0, 0, 1]], dtype=complex
        )
    if kind is CoinKind.DFT:
        j, k = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
        return np.array([1, 1j, -1, -1j])[(j * k) % 4] / 2.0
    if kind is CoinKind.GROVER:
        return np.full((4, 4), 0.5, dtype=complex) - np.eye(4)
    raise ValueError(f"unsupported coin kind {kind!r}")


def coin_walkers(spec: CoinSpec) -> int:
    return 1 if spec.kind is CoinKind.SINGLE_HADAMARD else 2


# single-qubit factors of the labelled initial coin states, (|-1>, |+1>) order
_INITIAL_FACTORS = {
    "c1": np.array([1, 1], dtype=complex) / _SQ2,
    "c2": np.array([0, 1], dtype=complex),
    "c3": np.array([1j, 1], dtype=complex) / _SQ2,
}


def initial_coin(label: str, num_walkers: int = 2) -> np.ndarray:
    """Labelled product coin states: c1 = (|1>+|-1>)^n, c2 = |1>^n, c3 = (|1>+i|-1>)^n."""
    try:
        f = _INITIAL_FACTORS[label.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown initial coin label {label!r}; expected c1, c2 or c3") from None
    out = np.ones(1, dtype=complex)
    for _ in range(num_walkers):
        out = np.kron(out, f)
    return out


@dataclass(frozen=True)
class WalkConfig:
    num_walkers: int = 2
    delta: float = 0.8
    initial_coin: np.ndarray | None = None
    initial_phase: tuple[float, ...] | None = None
    steps: int = 0

    def __post_init__(self):
        n = int(self.num_walkers)
        if n < 1:
            raise ValueError("num_walkers must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        coin = initial_coin("c2", n) if self.initial_coin is None else np.asarray(self.initial_coin, dtype=complex).ravel()
        if coin.size != 2**n:
            raise ValueError(f"initial coin must have dimension {2**n}, got {coin.size}")
        if abs(np.vdot(coin, coin).real - 1.0) > NORM_TOL:
            raise ValueError("initial coin state is not normalized")
        phase = (0.0,) * n if self.initial_phase is None else tuple(float(p) for p in self.initial_phase)
        if len(phase) != n:
            raise ValueError("initial_phase needs one angle per walker")
        coin = coin.copy()
        coin.flags.writeable = False
        object.__setattr__(self, "num_walkers", n)
        object.__setattr__(self, "initial_coin", coin)
        object.__setattr__(self, "initial_phase", phase)


@dataclass(frozen=True)
class WalkLatticeState:
    """Amplitudes over (offsets, coin bits) stored densely.

    ``amplitudes`` has shape ``(2K+1,)*n + (2,)*n``; array index ``i`` on a
    walker axis corresponds to offset ``i - K``.
    """

    num_walkers: int
    amplitudes: np.ndarray
    extent: int
    steps: int = 0

    @classmethod
    def initial(cls, coin: np.ndarray, num_walkers: int) -> "WalkLatticeState":
        amp = np.asarray(coin, dtype=complex).reshape((1,) * num_walkers + (2,) * num_walkers)
        return cls(num_walkers, amp.copy(), 0, 0)

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.extent, self.extent + 1)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def offset_probabilities(self) -> np.ndarray:
        """Joint probability over offsets, summed over coin strings."""
        n = self.num_walkers
        return np.sum(np.abs(self.amplitudes) ** 2, axis=tuple(range(n, 2 * n)))

    def items(self) -> Iterator[tuple[tuple[int, ...], tuple[int, ...], complex]]:
        """Yield ``(offsets, coin values, amplitude)`` for the populated support."""
        n = self.num_walkers
        for idx in zip(*np.nonzero(self.amplitudes)):
            ks = tuple(int(i) - self.extent for i in idx[:n])
            cs = tuple(2 * int(b) - 1 for b in idx[n:])
            yield ks, cs, complex(self.amplitudes[idx])

    def as_dict(self) -> dict:
        return {(ks, cs): a for ks, cs, a in self.items()}


def walk_step(state: WalkLatticeState, spec: CoinSpec) -> WalkLatticeState:
    """One application of ``S (I x C)``: toss every coin, then shift each
    walker by its coin value."""
    n = state.num_walkers
    c = coin_matrix(spec, n)
    size = state.amplitudes.shape[:n]
    flat = state.amplitudes.reshape(int(np.prod(size)), 2**n) @ c.T
    amp = np.pad(flat.reshape(size + (2,) * n), [(1, 1)] * n + [(0, 0)] * n)
    for j in range(n):
        for bit, shift in ((0, -1), (1, 1)):
            sel = [slice(None)] * (2 * n)
            sel[n + j] = bit
            sel = tuple(sel)
            amp[sel] = np.roll(amp[sel], shift, axis=j)
    amp[np.abs(amp) < PRUNE_FLOOR] = 0.0
    return WalkLatticeState(n, amp, state.extent + 1, state.steps + 1)


def iter_walk(config: WalkConfig, spec: CoinSpec) -> Iterator[WalkLatticeState]:
    """Yield the lattice state after 0, 1, ..., ``config.steps`` steps."""
    state = WalkLatticeState.initial(config.initial_coin, config.num_walkers)
    yield state
    for _ in range(config.steps):
        state = walk_step(state, spec)
        yield state


def walk_evolve(config: WalkConfig, spec: CoinSpec) -> WalkLatticeState:
    state = None
    for state in iter_walk(config, spec):
        pass
    return state


@dataclass(frozen=True)
class PhaseStateVector:
    dim: int
    phi: float
    entries: np.ndarray = field(repr=False)


def phase_state_vector(phi: float, d: int) -> PhaseStateVector:
    """Truncated phase state ``sum_n exp(i phi n)|n> / sqrt(d)``, n = 0..d-1."""
    if d < 2:
        raise ValueError("phase-state dimension must be at least 2")
    n = np.arange(d)
    return PhaseStateVector(int(d), float(phi), np.exp(1j * phi * n) / math.sqrt(d))


def phase_state_overlap_modulus(dphi: float, d: int) -> float:
    """Closed form of ``|<phi|phi + dphi>|`` for d-level phase states."""
    s = math.sin(dphi / 2)
    if abs(s) < 1e-15:
        return 1.0
    return abs(math.sin(d * dphi / 2) / (d * s))


def classical_walk_distribution(
    delta: float, N: int, num_walkers: int = 1, phi0: float | Sequence[float] = 0.0
) -> list[PhaseDistribution]:
    """Fair-coin random walk after N steps, one distribution per walker."""
    if N < 0:
        raise ValueError("N must be non-negative")
    phis = [float(phi0)] * num_walkers if np.isscalar(phi0) else [float(p) for p in phi0]
    ks = np.arange(-N, N + 1, 2)
    probs = np.array([math.comb(N, (N + int(k)) // 2) for k in ks], dtype=float) / 2.0**N
    return [PhaseDistribution.discrete(p0 + ks * delta, probs) for p0 in phis]
