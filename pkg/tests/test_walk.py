import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavitywalk.errors import InvalidTheta
from cavitywalk.walk import (
    CoinKind,
    CoinSpec,
    WalkConfig,
    WalkLatticeState,
    classical_walk_distribution,
    coin_matrix,
    initial_coin,
    iter_walk,
    phase_state_overlap_modulus,
    phase_state_vector,
    walk_evolve,
    walk_step,
)

S2 = math.sqrt(2)
HAD = CoinSpec(CoinKind.SINGLE_HADAMARD)
TWO_WALKER = [CoinSpec(k) for k in (CoinKind.HADAMARD_TENSOR, CoinKind.ROOT_ISWAP, CoinKind.DFT, CoinKind.GROVER)]


def enumerate_paths(coin, start, steps):
    """Brute-force sum over coin histories; independent of the lattice code."""
    dim = coin.shape[0]
    n = int(round(math.log2(dim)))
    amps = {}
    for path in itertools.product(range(dim), repeat=steps):
        for first in range(dim):
            a = start[first]
            prev = first
            for c in path:
                a = a * coin[c, prev]
                prev = c
            if a == 0:
                continue
            ks = [0] * n
            for c in path:
                for j in range(n):
                    bit = (c >> (n - 1 - j)) & 1
                    ks[j] += 2 * bit - 1
            key = (tuple(ks), tuple(2 * ((path[-1] >> (n - 1 - j)) & 1) - 1 for j in range(n)))
            amps[key] = amps.get(key, 0) + a
    return amps


@pytest.mark.parametrize("spec", TWO_WALKER + [HAD])
def test_coins_unitary(spec):
    c = coin_matrix(spec)
    assert np.max(np.abs(c.conj().T @ c - np.eye(c.shape[0]))) < 1e-14


def test_coin_entries():
    d = coin_matrix(CoinSpec(CoinKind.DFT))
    assert d[1, 1] == 0.5j and d[1, 3] == -0.5j
    g = coin_matrix(CoinSpec(CoinKind.GROVER))
    np.testing.assert_allclose(g @ np.full(4, 0.5), np.full(4, 0.5), atol=1e-15)
    sw = coin_matrix(CoinSpec(CoinKind.ROOT_ISWAP))
    np.testing.assert_allclose(sw[1:3, 1:3], np.array([[1, 1j], [1j, 1]]) / S2, atol=1e-15)
    np.testing.assert_allclose(coin_matrix(CoinSpec(CoinKind.ROOT_ISWAP, 1e-9)), np.eye(4), atol=1e-8)


def test_dft_square_is_signed_reversal():
    d = coin_matrix(CoinSpec(CoinKind.DFT))
    perm = np.zeros((4, 4))
    for j in range(4):
        perm[j, (-j) % 4] = 1
    np.testing.assert_allclose(d @ d, perm, atol=1e-15)


def test_invalid_theta():
    for bad in (0.0, -0.1, math.pi / 2 + 1e-9):
        with pytest.raises(InvalidTheta):
            CoinSpec(CoinKind.ROOT_ISWAP, bad)
    CoinSpec(CoinKind.ROOT_ISWAP, math.pi / 2)


def test_initial_coin_labels():
    np.testing.assert_allclose(initial_coin("c1"), np.full(4, 0.5))
    np.testing.assert_array_equal(initial_coin("c2"), [0, 0, 0, 1])
    np.testing.assert_allclose(initial_coin("c3"), np.array([-1, 1j, 1j, 1]) / 2)
    with pytest.raises(ValueError):
        initial_coin("c9")


def test_single_hadamard_step():
    s = walk_step(WalkLatticeState.initial(np.array([0, 1]), 1), HAD)
    d = s.as_dict()
    assert set(d) == {((-1,), (-1,)), ((1,), (1,))}
    assert d[((-1,), (-1,))] == pytest.approx(1 / S2)
    assert d[((1,), (1,))] == pytest.approx(-1 / S2)


def test_zero_steps_is_initial():
    cfg = WalkConfig(2, 0.8, initial_coin("c3"), steps=0)
    s = walk_evolve(cfg, TWO_WALKER[0])
    assert s.steps == 0
    np.testing.assert_array_equal(s.amplitudes.reshape(-1), initial_coin("c3"))


def test_three_step_hadamard_matches_enumeration():
    start = np.array([1, 0], dtype=complex)
    state = walk_evolve(WalkConfig(1, 0.8, start, steps=3), HAD)
    got = state.as_dict()
    want = {k: v for k, v in enumerate_paths(coin_matrix(HAD), start, 3).items() if abs(v) > 1e-15}
    assert set(got) == set(want)
    for k in want:
        assert abs(got[k] - want[k]) < 1e-12
    probs = dict(zip(state.offsets.tolist(), state.offset_probabilities().tolist()))
    # exact values from rational path enumeration
    for k, p in {-3: 1 / 8, -1: 5 / 8, 1: 1 / 8, 3: 1 / 8}.items():
        assert probs[k] == pytest.approx(p, abs=1e-15)


@pytest.mark.parametrize("spec", TWO_WALKER)
@pytest.mark.parametrize("label", ["c1", "c2", "c3"])
def test_two_walker_matches_enumeration(spec, label):
    start = initial_coin(label)
    got = walk_evolve(WalkConfig(2, 0.8, start, steps=3), spec).as_dict()
    want = enumerate_paths(coin_matrix(spec), start, 3)
    keys = {k for k, v in want.items() if abs(v) > 1e-14} | {k for k, v in got.items() if abs(v) > 1e-14}
    for k in keys:
        assert abs(got.get(k, 0) - want.get(k, 0)) < 1e-12


def test_hadamard_tensor_one_step():
    s = walk_evolve(WalkConfig(2, 0.8, initial_coin("c2"), steps=1), TWO_WALKER[0])
    d = s.as_dict()
    assert len(d) == 4
    for (ks, cs), a in d.items():
        assert all(abs(k) == 1 for k in ks)
        assert abs(a) == pytest.approx(0.5)
    np.testing.assert_allclose(s.offset_probabilities()[::2, ::2], np.full((2, 2), 0.25))


def test_root_iswap_two_steps_reflection():
    s = walk_evolve(WalkConfig(2, 0.8, initial_coin("c2"), steps=2), TWO_WALKER[1])
    assert s.norm_squared() == pytest.approx(1.0, abs=1e-12)
    p = s.offset_probabilities()
    # reflecting k -> -k together with relabelling the coin
    flipped = walk_evolve(WalkConfig(2, 0.8, np.array([1, 0, 0, 0], dtype=complex), steps=2), TWO_WALKER[1])
    np.testing.assert_allclose(p, flipped.offset_probabilities()[::-1, ::-1], atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(TWO_WALKER), st.integers(0, 12), st.integers(0, 2**31))
def test_norm_support_parity(spec, steps, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=4) + 1j * rng.normal(size=4)
    c /= np.linalg.norm(c)
    s = walk_evolve(WalkConfig(2, 0.8, c, steps=steps), spec)
    assert abs(s.norm_squared() - 1) < 1e-10
    for ks, _, _ in s.items():
        for k in ks:
            assert abs(k) <= steps and (k - steps) % 2 == 0


def test_separability_of_hadamard_tensor():
    single = np.array([1j, 1]) / S2
    two = walk_evolve(WalkConfig(2, 0.8, np.kron(single, single), steps=9), TWO_WALKER[0])
    one = walk_evolve(WalkConfig(1, 0.8, single, steps=9), HAD)
    np.testing.assert_allclose(two.offset_probabilities().sum(axis=1), one.offset_probabilities(), atol=1e-12)


def test_iter_walk_yields_every_step():
    states = list(iter_walk(WalkConfig(2, 0.8, steps=4), TWO_WALKER[2]))
    assert [s.steps for s in states] == [0, 1, 2, 3, 4]


def test_walk_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(2, 0.8, np.array([1, 1, 0, 0]))
    with pytest.raises(ValueError):
        WalkConfig(2, -0.1)
    with pytest.raises(ValueError):
        WalkConfig(2, 0.8, steps=-1)
    assert WalkConfig().delta == 0.8


def test_phase_state_vector():
    np.testing.assert_allclose(phase_state_vector(0.0, 4).entries, np.full(4, 0.5))
    assert abs(np.vdot(phase_state_vector(0, 8).entries, phase_state_vector(2 * math.pi / 8, 8).entries)) < 1e-15
    with pytest.raises(ValueError):
        phase_state_vector(0.0, 1)


@settings(max_examples=40, deadline=None)
@given(st.floats(-10, 10), st.floats(-3, 3), st.integers(2, 40))
def test_phase_state_norm_and_overlap(phi, dphi, d):
    a = phase_state_vector(phi, d).entries
    b = phase_state_vector(phi + dphi, d).entries
    assert abs(np.linalg.norm(a) - 1) < 1e-14
    assert abs(abs(np.vdot(a, b)) - phase_state_overlap_modulus(dphi, d)) < 1e-12


def test_classical_distribution():
    (p2,) = classical_walk_distribution(0.8, 2)
    got = dict(zip(np.round(p2.angles, 12).tolist(), p2.values.tolist()))
    want = {round(v % (2 * math.pi), 12): p for v, p in ((-1.6, 0.25), (0.0, 0.5), (1.6, 0.25))}
    assert got == pytest.approx(want)
    (p0,) = classical_walk_distribution(0.8, 0, phi0=1.0)
    assert p0.angles.tolist() == [1.0] and p0.values.tolist() == [1.0]
    assert len(classical_walk_distribution(0.8, 3, num_walkers=2)) == 2
