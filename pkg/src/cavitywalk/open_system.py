"""Two-walker quantum walk in a truncated cavity-QED model with decoherence.

Each walker is a cavity mode truncated to ``d`` Fock levels; each coin is a
charge qubit.  Composite basis ordering is (cavity 1, qubit 1, cavity 2,
qubit 2), qubit index 0 being ``|-1>`` (sigma_z = -1) and index 1 ``|+1>``.

A walk step is an instantaneous coin unitary on the qubit pair followed by a
free-evolution segment of duration ``delta_theta / chi`` under

    d rho/dt = -i[H_int, rho] + sum_j kappa_j D[a_j] rho + gamma_j/2 D[sz_j] rho,
    H_int    = chi * sum_j n_j sz_j.

The generator is never materialized as a superoperator.  ``H_int`` is
diagonal, so its commutator together with the dephasing term is an
elementwise rate array ``G``; photon loss is an index-shifted copy
``a rho a^dag`` plus an elementwise anticommutator.  Time stepping is RK4 in
the interaction frame of ``G`` (integrating-factor RK4): the oscillatory and
dephasing parts are integrated exactly and only the photon-loss dissipator
goes through the RK4 stages.  Because that dissipator is traceless for any
input and ``G`` vanishes on the diagonal, each step conserves the trace to
roundoff.

Under ``exp(-i H_int t)`` a phase state attached to ``|+1>`` rotates to
``phi - chi t``: the open-system walk is the mirror image of the lattice walk
in :mod:`cavitywalk.walk`, which leaves every spread statistic unchanged.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .distribution import PhaseDistribution
from .errors import DimensionMismatch, DispersiveRegimeWarning, StepTooLarge, TruncationSuspect
from .numerics import hermiticity_residual
from .walk import CoinKind, CoinSpec, coin_matrix, initial_coin, phase_state_vector

log = logging.getLogger(__name__)

TRACE_TOL = 1e-8
TRACE_GUARD = 1e-6
TRUNCATION_GUARD = 1e-3
POSITIVITY_CHECK_MAX_DIM = 16
RATE_WARN = 0.2


@dataclass(frozen=True)
class OpenSystemConfig:
    """Parameters of a noisy two-walker run; rates and times in units of chi.

    ``initial_cavity`` selects the walker state: ``"coherent"`` (default,
    amplitude ``sqrt(mean_photons)`` at angle ``phi0``) or ``"phase"``
    (the truncated phase state).  ``coin_duration`` > 0 lets the dissipators
    act (with the couplings off) for that long after each coin toss.
    """

    fock_dim: int = 16
    chi: float = 1.0
    delta_theta: float = 0.8
    kappa: tuple[float, float] = (0.0, 0.0)
    gamma: tuple[float, float] = (0.0, 0.0)
    coin: CoinSpec = field(default_factory=lambda: CoinSpec(CoinKind.DFT))
    initial_coin: np.ndarray | None = None
    initial_phase: tuple[float, float] = (0.0, 0.0)
    steps: int = 10
    dt: float = 0.01
    initial_cavity: str = "coherent"
    mean_photons: float | None = None
    coin_duration: float = 0.0

    def __post_init__(self):
        d = int(self.fock_dim)
        if d < 4:
            raise ValueError("fock_dim must be at least 4")
        if not self.chi > 0:
            raise ValueError("chi must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.coin_duration < 0:
            raise ValueError("coin_duration must be non-negative")
        if self.coin.kind is CoinKind.SINGLE_HADAMARD:
            raise ValueError("the open-system walk needs a two-qubit coin")
        kappa = _pair(self.kappa, "kappa")
        gamma = _pair(self.gamma, "gamma")
        for name, rates in (("kappa", kappa), ("gamma", gamma)):
            for r in rates:
                if r < 0:
                    raise ValueError(f"{name} must be non-negative")
                if r > self.chi:
                    raise ValueError(f"{name}={r} exceeds chi; the dispersive model does not apply")
                if r > RATE_WARN * self.chi:
                    warnings.warn(
                        f"{name}={r} is above {RATE_WARN} chi", DispersiveRegimeWarning, stacklevel=3
                    )
        if self.initial_cavity not in ("coherent", "phase"):
            raise ValueError("initial_cavity must be 'coherent' or 'phase'")
        coin = initial_coin("c3") if self.initial_coin is None else np.asarray(self.initial_coin, dtype=complex).ravel()
        if coin.size != 4 or abs(np.vdot(coin, coin).real - 1) > 1e-12:
            raise ValueError("initial_coin must be a normalized 4-vector")
        coin = coin.copy()
        coin.flags.writeable = False
        nbar = d / 4.0 if self.mean_photons is None else float(self.mean_photons)
        if nbar < 0:
            raise ValueError("mean_photons must be non-negative")
        object.__setattr__(self, "fock_dim", d)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "initial_coin", coin)
        object.__setattr__(self, "initial_phase", tuple(float(p) for p in self.initial_phase))
        object.__setattr__(self, "mean_photons", nbar)

    @property
    def dim(self) -> int:
        return (2 * self.fock_dim) ** 2

    @property
    def step_time(self) -> float:
        return self.delta_theta / self.chi

    @property
    def closed(self) -> bool:
        return not any(self.kappa) and not any(self.gamma)

    def with_rates(self, kappa: float, gamma: float) -> "OpenSystemConfig":
        return replace(self, kappa=(kappa, kappa), gamma=(gamma, gamma))


def _pair(value, name) -> tuple[float, float]:
    if np.isscalar(value):
        return (float(value), float(value))
    v = tuple(float(x) for x in value)
    if len(v) != 2:
        raise ValueError(f"{name} needs one value per walker")
    return v


# ---------------------------------------------------------------------------
# basis bookkeeping


def _labels(d: int):
    """Flat photon-number and sigma_z label vectors in composite ordering."""
    n = np.arange(d)
    s = np.array([-1, 1])
    shape = (d, 2, d, 2)
    n1 = np.broadcast_to(n[:, None, None, None], shape).ravel()
    s1 = np.broadcast_to(s[None, :, None, None], shape).ravel()
    n2 = np.broadcast_to(n[None, None, :, None], shape).ravel()
    s2 = np.broadcast_to(s[None, None, None, :], shape).ravel()
    return n1, s1, n2, s2


def build_interaction_hamiltonian(config: OpenSystemConfig) -> np.ndarray:
    """Diagonal of ``chi * (n1 sz1 + n2 sz2)`` in composite ordering."""
    n1, s1, n2, s2 = _labels(config.fock_dim)
    return config.chi * (n1 * s1 + n2 * s2).astype(float)


def lowering_operator(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)


class LindbladKernel:
    """Precomputed rate arrays for one configuration."""

    def __init__(self, config: OpenSystemConfig):
        self.config = config
        d = self.d = config.fock_dim
        self.dim = config.dim
        n1, s1, n2, s2 = _labels(d)
        self.energies = build_interaction_hamiltonian(config)
        self._n = (n1.astype(float), n2.astype(float))
        self._s = (s1, s2)
        self.kappa = config.kappa
        self.gamma = config.gamma
        sq = np.sqrt(np.arange(1, d, dtype=float))
        w = np.outer(sq, sq)
        self._w1 = w[:, None, :, None]
        self._w2 = w[None, :, None, None, :, None]
        self._loss = None
        if any(self.kappa):
            self._loss = -0.5 * sum(
                k * (n[:, None] + n[None, :]) for k, n in zip(self.kappa, self._n) if k
            )
        self._factor_cache: dict[float, np.ndarray] = {}

    @property
    def lossy(self) -> bool:
        return self._loss is not None

    def coherent_rates(self) -> np.ndarray:
        """Elementwise generator ``G``: commutator with H_int plus dephasing."""
        e = self.energies
        g = -1j * (e[:, None] - e[None, :])
        for gam, s in zip(self.gamma, self._s):
            if gam:
                g -= gam * (s[:, None] != s[None, :])
        return g

    def factor(self, h: float) -> np.ndarray:
        """``exp(G h)`` built from separable pieces without forming ``G``."""
        key = round(h, 15)
        cached = self._factor_cache.get(key)
        if cached is not None:
            return cached
        u = np.exp(-1j * h * self.energies)
        f = np.outer(u, u.conj())
        for gam, s in zip(self.gamma, self._s):
            if gam:
                f *= np.where(s[:, None] != s[None, :], math.exp(-gam * h), 1.0)
        if len(self._factor_cache) > 4:
            self._factor_cache.clear()
        self._factor_cache[key] = f
        return f

    def jumps(self, rho: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """``sum_j kappa_j a_j rho a_j^dag`` by index shifting."""
        d = self.d
        if out is None:
            out = np.zeros_like(rho)
        k1, k2 = self.kappa
        if k1:
            x = 4 * d
            src = rho.reshape(d, x, d, x)
            dst = out.reshape(d, x, d, x)
            dst[:-1, :, :-1, :] += (k1 * self._w1) * src[1:, :, 1:, :]
        if k2:
            src = rho.reshape(2 * d, d, 2, 2 * d, d, 2)
            dst = out.reshape(2 * d, d, 2, 2 * d, d, 2)
            dst[:, :-1, :, :, :-1, :] += (k2 * self._w2) * src[:, 1:, :, :, 1:, :]
        return out

    def dissipator(self, rho: np.ndarray) -> np.ndarray:
        """Photon-loss part ``sum_j kappa_j D[a_j] rho``."""
        if self._loss is None:
            return np.zeros_like(rho)
        return self.jumps(rho, self._loss * rho)

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        return self.coherent_rates() * rho + self.dissipator(rho)

    def lawson_step(self, rho: np.ndarray, h: float) -> np.ndarray:
        eh = self.factor(h)
        eh2 = self.factor(h / 2)
        if self._loss is None:
            return eh * rho
        f = self.dissipator
        k1 = f(rho)
        y = k1 * (0.5 * h)
        y += rho
        y *= eh2
        k2 = f(y)
        np.multiply(k2, 0.5 * h, out=y)
        y += eh2 * rho
        k3 = f(y)
        er = eh * rho
        np.multiply(eh2, k3, out=y)
        y *= h
        y += er
        k4 = f(y)
        k2 += k3
        k2 *= eh2
        k2 *= 2.0
        k1 *= eh
        k1 += k2
        k1 += k4
        k1 *= h / 6.0
        k1 += er
        return k1

    def rk4_step(self, rho: np.ndarray, h: float) -> np.ndarray:
        f = self.rhs
        k1 = f(rho)
        k2 = f(rho + 0.5 * h * k1)
        k3 = f(rho + 0.5 * h * k2)
        k4 = f(rho + h * k3)
        return rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


_KERNELS: dict[int, LindbladKernel] = {}


def kernel_for(config: OpenSystemConfig) -> LindbladKernel:
    key = id(config)
    k = _KERNELS.get(key)
    if k is None or k.config is not config:
        _KERNELS.clear()
        k = _KERNELS[key] = LindbladKernel(config)
    return k


# ---------------------------------------------------------------------------
# operations on density matrices


def lindblad_rhs(rho: np.ndarray, config: OpenSystemConfig) -> np.ndarray:
    """Right-hand side of the master equation for ``rho``."""
    rho = _check_rho(rho, config)
    return kernel_for(config).rhs(rho)


def evolve(
    rho: np.ndarray,
    config: OpenSystemConfig,
    t: float,
    method: str = "lawson",
    dissipation_only: bool = False,
) -> np.ndarray:
    """Integrate the master equation over ``t`` with fixed steps ``<= dt``.

    ``method="lawson"`` (default) is RK4 in the interaction frame of the
    coherent part; ``method="rk4"`` is classical RK4 on the full right-hand
    side.  With ``dissipation_only`` the Hamiltonian is switched off.

    Raises :class:`StepTooLarge` when the trace drifts by more than 1e-6 or
    the integration diverges.
    """
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    rho = _check_rho(rho, config)
    if t == 0:
        return rho.copy()
    if dissipation_only:
        kern = LindbladKernel(config)
        kern.energies = np.zeros_like(kern.energies)
    else:
        kern = kernel_for(config)
    m = max(1, math.ceil(t / config.dt - 1e-9))
    h = t / m
    tr0 = np.trace(rho).real
    if method == "lawson":
        if kern.lossy:
            for _ in range(m):
                rho = kern.lawson_step(rho, h)
                rho = 0.5 * (rho + rho.conj().T)
        else:
            # the integrating factor is the exact propagator here
            rho = kern.factor(t) * rho
    elif method == "rk4":
        for _ in range(m):
            rho = kern.rk4_step(rho, h)
            rho = 0.5 * (rho + rho.conj().T)
    else:
        raise ValueError(f"unknown integration method {method!r}")
    drift = abs(np.trace(rho).real - tr0)
    if drift > TRACE_GUARD:
        raise StepTooLarge(f"trace drifted by {drift:.2e} over t={t}; reduce dt (now {config.dt})")
    # both schemes conserve the trace exactly, so an unstable step shows up
    # as entries no density matrix can have
    if not np.isfinite(rho).all() or np.max(np.abs(rho)) > tr0 * (1 + TRACE_GUARD):
        raise StepTooLarge(f"integration diverged over t={t}; reduce dt (now {config.dt})")
    return rho


def apply_coin(rho: np.ndarray, config: OpenSystemConfig) -> np.ndarray:
    """``(I x C) rho (I x C)^dag`` with C acting on the qubit pair."""
    d = config.fock_dim
    c = coin_matrix(config.coin, 2).reshape(2, 2, 2, 2)
    r = rho.reshape(d, 2, d, 2, d, 2, d, 2)
    r = np.tensordot(c, r, axes=([2, 3], [1, 3]))  # (A, B, n1, n2, bra...)
    r = np.moveaxis(r, (0, 1), (1, 3))
    r = np.tensordot(r, c.conj(), axes=([5, 7], [2, 3]))
    r = np.moveaxis(r, (6, 7), (5, 7))
    return np.ascontiguousarray(r).reshape(config.dim, config.dim)


def apply_coin_pure(psi: np.ndarray, config: OpenSystemConfig) -> np.ndarray:
    d = config.fock_dim
    c = coin_matrix(config.coin, 2).reshape(2, 2, 2, 2)
    v = np.einsum("abcd,icjd->iajb", c, psi.reshape(d, 2, d, 2))
    return v.reshape(-1)


def cavity_state(config: OpenSystemConfig, walker: int) -> np.ndarray:
    d = config.fock_dim
    phi = config.initial_phase[walker]
    if config.initial_cavity == "phase":
        return phase_state_vector(phi, d).entries
    nbar = config.mean_photons
    v = np.zeros(d, dtype=complex)
    if nbar == 0:
        v[0] = 1.0
        return v
    n = np.arange(d)
    lgam = np.array([math.lgamma(k + 1) for k in n])
    logamp = 0.5 * (n * math.log(nbar) - lgam)
    v = np.exp(logamp - logamp.max()) * np.exp(1j * phi * n)
    return v / np.linalg.norm(v)


def initial_state(config: OpenSystemConfig) -> np.ndarray:
    """Product of the two cavity states with the initial coin state."""
    c1 = cavity_state(config, 0)
    c2 = cavity_state(config, 1)
    coin = np.asarray(config.initial_coin).reshape(2, 2)
    return np.einsum("i,j,ab->iajb", c1, c2, coin).reshape(-1)


def reduced_cavity(rho: np.ndarray, config: OpenSystemConfig, walker: int) -> np.ndarray:
    """Single-cavity density matrix after tracing both qubits and the other cavity."""
    d = config.fock_dim
    r = rho.reshape(d, 2, d, 2, d, 2, d, 2)
    if walker == 0:
        return np.einsum("iajbkajb->ik", r)
    if walker == 1:
        return np.einsum("abieabke->ik", r)
    raise IndexError("walker index must be 0 or 1")


def fock_phase_distribution(rho_reduced: np.ndarray, grid_size: int = 1024) -> PhaseDistribution:
    """``P(phi) = (1/2pi) sum_{n,n'} exp(i(n'-n)phi) rho_{n n'}`` on a uniform grid."""
    r = np.asarray(rho_reduced, dtype=complex)
    d = r.shape[0]
    if r.shape != (d, d):
        raise DimensionMismatch("reduced state must be square")
    if grid_size < 2 * d - 1:
        raise ValueError(f"grid_size must be at least {2 * d - 1} to resolve d={d}")
    phi = 2 * np.pi * np.arange(grid_size) / grid_size
    v = np.exp(1j * np.outer(phi, np.arange(d)))
    dens = np.einsum("mn,nk,mk->m", v.conj(), r, v).real / (2 * np.pi)
    if dens.min() < -1e-10:
        raise ValueError(f"phase density negative ({dens.min():.2e}); state is not positive")
    return PhaseDistribution.grid(np.clip(dens, 0.0, None) / np.trace(r).real)


def fock_first_moment(rho_reduced: np.ndarray) -> complex:
    """Closed form of the first circular moment: ``sum_n <n+1|rho|n>``."""
    return complex(np.trace(np.asarray(rho_reduced), offset=-1))


def afd(rho_N: np.ndarray, psi_N: np.ndarray) -> float:
    """Average fidelity decay ``<Psi_N| rho |Psi_N>``."""
    rho_N = np.asarray(rho_N)
    psi = np.asarray(psi_N, dtype=complex).ravel()
    if rho_N.shape != (psi.size, psi.size):
        raise DimensionMismatch(f"rho {rho_N.shape} does not match psi of size {psi.size}")
    nrm = np.vdot(psi, psi).real
    if abs(nrm - 1) > 1e-10:
        raise ValueError("reference state is not normalized")
    val = np.vdot(psi, rho_N @ psi)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"overlap has imaginary part {val.imag:.2e}; rho is not Hermitian")
    f = val.real
    if -1e-10 <= f < 0:
        f = 0.0
    elif 1 < f <= 1 + 1e-10:
        f = 1.0
    return float(f)


def _check_rho(rho: np.ndarray, config: OpenSystemConfig) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (config.dim, config.dim):
        raise DimensionMismatch(f"rho has shape {rho.shape}, expected {(config.dim, config.dim)}")
    return rho


# ---------------------------------------------------------------------------
# walks


@dataclass(frozen=True)
class StepDiagnostics:
    step: int
    trace_error: float
    hermiticity: float
    min_eigenvalue: float | None
    top_population: float

    @property
    def truncation_suspect(self) -> bool:
        return self.top_population >= TRUNCATION_GUARD


def diagnose(rho: np.ndarray, config: OpenSystemConfig, step: int, positivity: bool | None = None) -> StepDiagnostics:
    if positivity is None:
        positivity = config.fock_dim <= POSITIVITY_CHECK_MAX_DIM
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]) if positivity else None
    top = max(float(np.diag(reduced_cavity(rho, config, w)).real[-2:].sum()) for w in (0, 1))
    return StepDiagnostics(
        step, abs(float(np.trace(rho).real) - 1.0), hermiticity_residual(rho), min_eig, top
    )


def iter_noisy_walk(config: OpenSystemConfig, method: str = "lawson") -> Iterator[np.ndarray]:
    """Yield ``rho`` after 0, 1, ..., ``config.steps`` walk steps."""
    psi = initial_state(config)
    rho = np.outer(psi, psi.conj())
    yield rho
    for _ in range(config.steps):
        rho = apply_coin(rho, config)
        if config.coin_duration > 0:
            rho = evolve(rho, config, config.coin_duration, method, dissipation_only=True)
        rho = evolve(rho, config, config.step_time, method)
        yield rho


def noisy_walk(config: OpenSystemConfig, method: str = "lawson") -> list[np.ndarray]:
    return list(iter_noisy_walk(config, method))


def iter_ideal_reference(config: OpenSystemConfig) -> Iterator[np.ndarray]:
    """Decoherence-free pure state ``|Psi_N>`` for N = 0..steps."""
    psi = initial_state(config)
    phase = np.exp(-1j * build_interaction_hamiltonian(config) * config.step_time)
    yield psi
    for _ in range(config.steps):
        psi = phase * apply_coin_pure(psi, config)
        yield psi


def ideal_reference(config: OpenSystemConfig) -> list[np.ndarray]:
    return list(iter_ideal_reference(config))


@dataclass
class NoisyWalkRecord:
    step: int
    sigma: tuple[float, float]
    afd: float
    diagnostics: StepDiagnostics


def run_noisy_walk(
    config: OpenSystemConfig,
    grid_size: int = 1024,
    check_positivity: bool | None = None,
    method: str = "lawson",
    strict: bool = False,
) -> list[NoisyWalkRecord]:
    """Step the noisy walk alongside its ideal reference, recording both
    walkers' Holevo spreads, the AFD and the physical-state diagnostics.

    With ``strict`` a tripped truncation guard raises
    :class:`~cavitywalk.errors.TruncationSuspect`.
    """
    from .phase_stats import holevo_sigma

    records = []
    for step, (rho, psi) in enumerate(zip(iter_noisy_walk(config, method), iter_ideal_reference(config))):
        diag = diagnose(rho, config, step, check_positivity)
        if diag.truncation_suspect:
            msg = f"step {step}: top-two Fock population {diag.top_population:.2e} >= {TRUNCATION_GUARD}"
            log.warning(msg)
            if strict:
                raise TruncationSuspect(msg)
        sig = tuple(
            holevo_sigma(fock_phase_distribution(reduced_cavity(rho, config, w), grid_size)) for w in (0, 1)
        )
        records.append(NoisyWalkRecord(step, sig, afd(rho, psi), diag))
    return records
