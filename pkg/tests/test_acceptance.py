"""Acceptance criteria 1-11.

Each test records one ``CRITERION k: PASS|FAIL`` line (printed in the pytest
terminal summary, or directly when run as a script) and then asserts.
Tolerances are the ones pinned by the criteria; nothing is relaxed here.
Open-system runs are cached so each (kappa, gamma) point is simulated once.

    pytest tests/test_acceptance.py -v
    python tests/test_acceptance.py
"""

from __future__ import annotations

import itertools
import math
import sys
import time
import warnings
from functools import lru_cache

import numpy as np
import pytest

from cavitywalk.gates import grover_synthesis_check, hadamard_pulse_check, iswap_synthesis_check, dft_synthesis_check
from cavitywalk.open_system import OpenSystemConfig, evolve, run_noisy_walk
from cavitywalk.phase_stats import (
    classical_sigma_series,
    localization_check,
    scaling_exponent,
    sigma_series,
)
from cavitywalk.walk import CoinKind, CoinSpec, WalkConfig, coin_matrix, initial_coin, walk_evolve

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a plain script
    ACCEPTANCE_LINES = []

DELTA = 0.8
COINS = {"dft": CoinKind.DFT, "hh": CoinKind.HADAMARD_TENSOR, "sqrt-iswap": CoinKind.ROOT_ISWAP, "grover": CoinKind.GROVER}


def report(k: int, ok: bool, title: str, detail: str) -> None:
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} | {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


# ---------------------------------------------------------------------------
# cached computations


@lru_cache(maxsize=None)
def ideal(coin: str, init: str, n_max: int = 25):
    t0 = time.perf_counter()
    series = sigma_series(WalkConfig(2, DELTA, initial_coin(init), steps=n_max), CoinSpec(COINS[coin]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = scaling_exponent(series, 4, 25)
    return series, fit, time.perf_counter() - t0


@lru_cache(maxsize=None)
def lattice_slope(coin: str, init: str) -> float:
    s = sigma_series(WalkConfig(2, DELTA, initial_coin(init), steps=25), CoinSpec(COINS[coin]), measure="lattice")
    return scaling_exponent(s, 4, 25).slope


def noisy(kappa: float, gamma: float, fock_dim: int = 16, steps: int = 10):
    # one cache key per physical run, however the arguments were spelled
    return _noisy(float(kappa), float(gamma), int(fock_dim), int(steps))


@lru_cache(maxsize=None)
def _noisy(kappa: float, gamma: float, fock_dim: int, steps: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cfg = OpenSystemConfig(
            fock_dim=fock_dim,
            delta_theta=DELTA,
            kappa=(kappa, kappa),
            gamma=(gamma, gamma),
            coin=CoinSpec(CoinKind.DFT),
            initial_coin=initial_coin("c3"),
            steps=steps,
        )
    t0 = time.perf_counter()
    records = run_noisy_walk(cfg)
    return records, time.perf_counter() - t0


def noisy_slope(kappa: float, gamma: float):
    from cavitywalk.phase_stats import SigmaSeries

    records, _ = noisy(kappa, gamma)
    series = SigmaSeries.from_pairs((r.step, r.sigma[0]) for r in records if r.step >= 1)
    return scaling_exponent(series, 2, 10)


# ---------------------------------------------------------------------------
# criteria


def test_criterion_1_ballistic_scaling():
    (_, dft, t1), (_, hh, t2) = ideal("dft", "c1"), ideal("hh", "c3")
    ok = 0.85 <= dft.slope <= 1.00 and 0.90 <= hh.slope <= 1.00 and t1 < 5 and t2 < 5
    report(
        1,
        ok,
        "ballistic ideal scaling (delta=0.8, N=4..25)",
        f"DFTxc1 slope={dft.slope:.3f}+-{dft.slope_stderr:.3f} want [0.85,1.00]; "
        f"HHxc3 slope={hh.slope:.3f}+-{hh.slope_stderr:.3f} want [0.90,1.00]; runtime {t1:.2f}s/{t2:.2f}s; "
        f"unwrapped-lattice diagnostic slopes {lattice_slope('dft', 'c1'):.3f}/{lattice_slope('hh', 'c3'):.3f}",
    )
    assert ok


def test_criterion_2_localization():
    parts, ok = [], True
    for coin, init in (("sqrt-iswap", "c2"), ("grover", "c1")):
        series, fit, t = ideal(coin, init)
        bounded, top, ref = localization_check(series, 5, 3.0)
        good = bounded and abs(fit.slope) < 0.15 and t < 5
        ok &= good
        parts.append(f"{coin}x{init}: max sigma={top:.3f} vs 3*sigma(5)={3 * ref:.3f}, slope={fit.slope:.3f}, {t:.2f}s")
    report(2, ok, "localization", "; ".join(parts))
    assert ok


def test_criterion_3_symmetry_degeneracy():
    (_, a, _), (_, b, _) = ideal("sqrt-iswap", "c1"), ideal("sqrt-iswap", "c3")
    tol = a.slope_stderr + b.slope_stderr + 0.02
    ok = abs(a.slope - b.slope) <= tol
    report(3, ok, "sqrt-iSWAP c1/c3 degeneracy", f"slopes {a.slope:.4f} / {b.slope:.4f}, |diff|={abs(a.slope - b.slope):.2e} <= {tol:.3f}")
    assert ok


def test_criterion_4_classical_baseline():
    base = scaling_exponent(classical_sigma_series(DELTA, 25), 4, 25)
    small = scaling_exponent(classical_sigma_series(0.1, 25), 4, 25)
    # the non-localized quantum slopes of criterion 1
    quantum = [(f"{c}x{i}", ideal(c, i)[1].slope) for c, i in (("dft", "c1"), ("hh", "c3"))]
    in_band = abs(base.slope - 0.5) <= 0.05
    gaps = [s - base.slope for _, s in quantum]
    below = all(g >= 0.2 for g in gaps)
    ok = in_band and below
    report(
        4,
        ok,
        "classical baseline",
        f"binomial slope at delta=0.8 {base.slope:.3f} want 0.5+-0.05 ({'ok' if in_band else 'out'}); "
        f"at delta=0.1 {small.slope:.3f}; quantum-minus-classical gaps "
        + ", ".join(f"{n} {g:.3f}" for (n, _), g in zip(quantum, gaps))
        + " want >= 0.2",
    )
    assert ok


KAPPAS = (0.0, 0.02, 0.05, 0.1)


@pytest.mark.slow
def test_criterion_5_qw_to_rw_transition():
    t0 = time.perf_counter()
    fits = [noisy_slope(k, 0.06) for k in KAPPAS]
    elapsed = time.perf_counter() - t0
    s = [f.slope for f in fits]
    monotone = all(b < a + 0.02 for a, b in zip(s, s[1:]))
    drop = s[0] - s[-1]
    ok = monotone and drop >= 0.1 and elapsed < 1800
    report(
        5,
        ok,
        "QW->RW transition vs kappa (gamma=0.06, d=16, N=2..10)",
        "slopes " + ", ".join(f"k={k:g}:{x:.3f}" for k, x in zip(KAPPAS, s))
        + f"; monotone(0.02 band)={monotone}; drop={drop:.3f} want >= 0.1; grid runtime {elapsed:.0f}s",
    )
    assert ok


@pytest.mark.slow
def test_criterion_6_dephasing_trend():
    lo, hi = noisy_slope(0.01, 0.0).slope, noisy_slope(0.01, 0.1).slope
    drop = lo - hi
    ok = 0.05 <= drop <= 0.35 and abs(lo - 0.970) <= 0.15 and abs(hi - 0.810) <= 0.15
    report(
        6,
        ok,
        "dephasing trend (kappa=0.01)",
        f"slope gamma=0: {lo:.3f} (0.970+-0.15), gamma=0.1: {hi:.3f} (0.810+-0.15), decrease {drop:.3f} want [0.05,0.35]",
    )
    assert ok


@pytest.mark.slow
def test_criterion_7_afd_sensitivity():
    sk, sg = noisy_slope(0.01, 0.0).slope, noisy_slope(0.0, 0.02).slope
    ak, ag = noisy(0.01, 0.0)[0][10].afd, noisy(0.0, 0.02)[0][10].afd
    matched = abs(sk - sg) <= 0.05
    ok = matched and ak < ag
    report(
        7,
        ok,
        "AFD more sensitive to cavity decay",
        f"slopes kappa-run {sk:.3f} / gamma-run {sg:.3f} (matched within 0.05: {matched}); "
        f"AFD(N=10) kappa-run {ak:.6f} vs gamma-run {ag:.6f}, margin {ag - ak:+.6f}",
    )
    assert ok


@pytest.mark.slow
def test_criterion_8_closed_open_consistency():
    records, elapsed = noisy(0.0, 0.0, fock_dim=32, steps=6)
    lattice, _, _ = ideal("dft", "c3", 6)
    rel = [abs(records[n].sigma[0] - lattice.at(n)) / lattice.at(n) for n in range(1, 7)]
    other = sigma_series(WalkConfig(2, DELTA, initial_coin("c3"), steps=6), CoinSpec(CoinKind.DFT), walker=1)
    rel_other = [abs(records[n].sigma[1] - other.at(n)) / other.at(n) for n in range(1, 7)]
    afd_err = max(abs(r.afd - 1) for r in records)
    ok = max(rel) < 0.05 and afd_err < 1e-8
    report(
        8,
        ok,
        "closed-open consistency (kappa=gamma=0, d=32, N<=6, DFT x c3)",
        "walker-1 relative sigma gaps " + ", ".join(f"{x:.2%}" for x in rel)
        + " want < 5% (lattice sigma " + ", ".join(f"{lattice.at(n):.3g}" for n in range(1, 7))
        + "); walker-2 diagnostic " + ", ".join(f"{x:.2%}" for x in rel_other) + f"; max |AFD-1| {afd_err:.1e}; {elapsed:.0f}s",
    )
    assert ok


@pytest.mark.slow
def test_criterion_9_physical_state():
    # every open-system run made for criteria 5-8
    runs = [(k, 0.06, 16, 10) for k in KAPPAS] + [(0.01, 0.0, 16, 10), (0.01, 0.1, 16, 10), (0.0, 0.02, 16, 10), (0.0, 0.0, 32, 6)]
    diags = [r.diagnostics for args in runs for r in noisy(*args)[0]]
    tr = max(d.trace_error for d in diags)
    herm = max(d.hermiticity for d in diags)
    eigs = [d.min_eigenvalue for d in diags if d.min_eigenvalue is not None]
    top = max(d.top_population for d in diags)
    ok = tr < 1e-8 and herm < 1e-10 and min(eigs) > -1e-7 and top < 1e-3
    report(
        9,
        ok,
        f"physical-state properties over {len(runs)} runs / {len(diags)} states",
        f"max|Tr-1|={tr:.1e}, max hermiticity={herm:.1e}, min eigenvalue={min(eigs):.1e} (d=16 states), "
        f"max top-two Fock population={top:.1e}",
    )
    assert ok


def test_criterion_10_gate_synthesis():
    t0 = time.perf_counter()
    had = hadamard_pulse_check()
    sw = iswap_synthesis_check(math.pi / 4)
    dft = dft_synthesis_check()
    gr = grover_synthesis_check()
    elapsed = time.perf_counter() - t0
    ok = (
        had.infidelity < 1e-10
        and sw.details["block_error"] < 1e-12
        and dft.details["n1_pattern_error"] < 1e-12
        and gr.details["theta_star_infidelity"] < 1e-10
        and "quoted_chi_t" in gr.details
        and elapsed < 1.0
    )
    report(
        10,
        ok,
        "gate synthesis",
        f"Hadamard infidelity {had.infidelity:.1e} (raw {had.details['raw_infidelity']:.2f} before z-frame); "
        f"iSWAP block err {sw.details['block_error']:.1e}; DFT n=1 pattern err {dft.details['n1_pattern_error']:.1e}; "
        f"Grover theta*={gr.details['theta_star_over_pi']:.6f}pi infidelity {gr.details['theta_star_infidelity']:.1e} "
        f"vs quoted chi*t=pi/8 infidelity {gr.infidelity:.4f}; {elapsed:.2f}s",
    )
    assert ok


def _enumerate_hadamard(start, steps):
    h = coin_matrix(CoinSpec(CoinKind.SINGLE_HADAMARD))
    probs = {}
    amps = {}
    for path in itertools.product((0, 1), repeat=steps):
        for first in (0, 1):
            a, prev = start[first], first
            for c in path:
                a, prev = a * h[c, prev], c
            key = (sum(2 * c - 1 for c in path), path[-1])
            amps[key] = amps.get(key, 0) + a
    for (k, _), a in amps.items():
        probs[k] = probs.get(k, 0) + abs(a) ** 2
    return probs


def test_criterion_11_oracle_equivalence():
    start = np.array([1, 0], dtype=complex)
    state = walk_evolve(WalkConfig(1, DELTA, start, steps=3), CoinSpec(CoinKind.SINGLE_HADAMARD))
    got = dict(zip(state.offsets.tolist(), state.offset_probabilities().tolist()))
    want = _enumerate_hadamard(start, 3)
    walk_err = max(abs(got.get(k, 0) - want.get(k, 0)) for k in set(got) | set(want))

    rng = np.random.default_rng(2024)
    a = rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    ratios = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for method in ("lawson", "rk4"):
            def run(dt):
                c = OpenSystemConfig(fock_dim=4, kappa=(0.9, 0.7), gamma=(0.8, 0.5), dt=dt)
                return evolve(rho, c, DELTA, method=method)

            ref = run(DELTA / 512)
            e1 = np.max(np.abs(run(DELTA / 16) - ref))
            e2 = np.max(np.abs(run(DELTA / 32) - ref))
            ratios[method] = e1 / e2
    ok = walk_err < 1e-12 and all(12 <= r <= 20 for r in ratios.values())
    report(
        11,
        ok,
        "oracle equivalence",
        f"3-step Hadamard vs path enumeration max err {walk_err:.1e}; dt-halving error ratio "
        + ", ".join(f"{m} {r:.2f}" for m, r in ratios.items())
        + " want 16+-4",
    )
    assert ok


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(
        ((n, f) for n, f in globals().items() if n.startswith("test_criterion_")), key=lambda x: int(x[0].split("_")[2])
    ):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
