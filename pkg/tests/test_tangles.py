import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from avalanche.cumulants import Rank2Approx, rank2_truncate
from avalanche.ising import XYParams, reduced_dm
from avalanche.linalg import ValidationError
from avalanche.tangles import (
    MEASURES,
    W3,
    _line_eval,
    concurrence,
    family_curves,
    get_measure,
    hyperdeterminant,
    line_coefficients,
    lower_hull_at,
    pure_corr_norm,
    purity_average,
    random_pure,
    rank2_convex_roof,
    scatter_dataset,
    scatter_tangle,
    sl_gate,
    sqrt_tau3_roof,
    superposition_zeros,
    tau3_pure,
    tau4_pure,
)


def basis(n, *indices, amps=None):
    psi = np.zeros(2**n, dtype=complex)
    amps = amps if amps is not None else [1] * len(indices)
    psi[list(indices)] = amps
    return psi / np.linalg.norm(psi)


GHZ3 = basis(3, 0, 7)
GHZ4 = basis(4, 0, 15)
W4 = basis(4, 1, 2, 4, 8)
BELL = basis(2, 0, 3)


def random_rank2(seed, n):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(2**n, 2)) + 1j * rng.normal(size=(2**n, 2))
    q, _ = np.linalg.qr(z)
    p = rng.uniform(0.05, 0.95)
    return Rank2Approx(p, 1 - p, q[:, 0], q[:, 1], 0.0, "absolute")


def test_wootters_reference_states():
    assert concurrence(np.outer(BELL, BELL.conj())).value == pytest.approx(1.0)
    assert concurrence(np.eye(4) / 4).value == 0.0
    for p in (0.2, 0.5, 0.9):
        werner = p * np.outer(BELL, BELL.conj()) + (1 - p) * np.eye(4) / 4
        assert concurrence(werner).value == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-12)


def test_three_tangle_reference_states():
    assert tau3_pure(GHZ3).value == pytest.approx(1.0)
    assert tau3_pure(W3).value == pytest.approx(0.0, abs=1e-15)
    assert tau3_pure(np.kron(BELL, [1, 0])).value == pytest.approx(0.0, abs=1e-15)
    for a in (0.2, 0.6):
        psi = basis(3, 0, 7, amps=[a, math.sqrt(1 - a * a)])
        assert tau3_pure(psi).value == pytest.approx(4 * a * a * (1 - a * a))


@pytest.mark.parametrize("which", ["H", "F1", "F2", "F3"])
def test_four_qubit_invariants_on_ghz_and_w(which):
    assert tau4_pure(GHZ4, which) == pytest.approx(1.0)
    assert tau4_pure(W4, which) == pytest.approx(0.0, abs=1e-14)
    prod = np.kron(np.kron(BELL, [1, 0]), [0.6, 0.8])
    assert tau4_pure(prod, which) == pytest.approx(0.0, abs=1e-14)


def test_invariants_reject_bad_input():
    with pytest.raises(ValidationError):
        tau4_pure(GHZ4, "Q")
    with pytest.raises(ValidationError):
        tau3_pure(2 * GHZ3)
    with pytest.raises(ValidationError):
        get_measure("tau5")


@pytest.mark.parametrize("name", sorted(MEASURES))
def test_sl_invariance_gate(name):
    assert sl_gate(MEASURES[name], trials=10, seed=3) < 1e-7


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["C2", "tau3", "tau4_a", "tau4_H"]))
def test_line_polynomial_reproduces_invariant(seed, name):
    m = MEASURES[name]
    ap = random_rank2(seed, m.n_qubits)
    coeffs = line_coefficients(ap.psi1, ap.psi2, m)
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
    direct = m.invariant(a * ap.psi1 + b * ap.psi2)
    assert _line_eval(coeffs, a, b) == pytest.approx(direct, rel=1e-9, abs=1e-12)
    w, phi = superposition_zeros(coeffs)
    for wi, ph in zip(w, phi):
        val = _line_eval(coeffs, math.sqrt(wi), np.exp(1j * ph) * math.sqrt(1 - wi))
        assert abs(val) < 1e-8 * np.max(np.abs(coeffs))


def test_lower_hull():
    w = np.linspace(0, 1, 11)
    assert lower_hull_at(w, w**2, 0.5) == pytest.approx(0.25)
    # concave data: hull is the chord
    assert lower_hull_at(w, np.sin(np.pi * w), 0.3) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_concurrence_roof_brackets_wootters(seed):
    ap = random_rank2(seed, 2)
    lo, up = rank2_convex_roof(ap, "C2").bounds
    exact = concurrence(ap.matrix()).value
    assert lo <= exact + 1e-9 and exact <= up + 1e-7


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_concurrence_roof_exact_for_opposite_parity_pair(seed):
    # real states of opposite spin-flip parity, as in the Ising chain
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=2), rng.normal(size=2)
    psi1 = np.array([a[0], 0, 0, a[1]], dtype=complex) / np.linalg.norm(a)
    psi2 = np.array([0, b[0], b[1], 0], dtype=complex) / np.linalg.norm(b)
    p = rng.uniform(0.05, 0.95)
    ap = Rank2Approx(p, 1 - p, psi1, psi2, 0.0, "absolute")
    roof = rank2_convex_roof(ap, "C2")
    assert roof.certified
    assert roof.value == pytest.approx(concurrence(ap.matrix()).value, abs=1e-7)


@pytest.mark.parametrize("w", [0.5, 0.6, 0.75, 0.9, 1.0])
def test_ghz_pair_mixture_roof(w):
    # w GHZ+ + (1 - w) GHZ-: the equal mixture is separable, the roof is (2w - 1)^2
    plus, minus = GHZ3, basis(3, 0, 7, amps=[1, -1])
    roof = rank2_convex_roof(Rank2Approx(w, 1 - w, plus, minus, 0.0, "absolute"), "tau3")
    assert roof.value == pytest.approx((2 * w - 1) ** 2, abs=1e-6)
    assert roof.certified


def test_pure_input_roof_is_pure_value():
    ap = Rank2Approx(1.0, 0.0, GHZ4, W4, 0.0, "absolute", rank_deficient=True)
    r = rank2_convex_roof(ap, "tau4_a")
    assert r.value == pytest.approx(1.0) and r.bounds == (r.value, r.value)


def test_roof_rejects_non_orthogonal_pair():
    with pytest.raises(ValidationError):
        rank2_convex_roof(Rank2Approx(0.5, 0.5, GHZ3, GHZ3, 0.0, "absolute"), "tau3")


@pytest.mark.parametrize("J", [0.6, 0.9, 1.0, 1.4])
def test_ising_roof_bounds_certified(J):
    p = XYParams(J)
    t3 = sqrt_tau3_roof(rank2_truncate(reduced_dm(p, (0, 1, 2))))
    t4 = rank2_convex_roof(rank2_truncate(reduced_dm(p, (0, 1, 2, 3))), "tau4_a")
    for r in (t3, t4):
        lo, up = r.bounds
        assert lo <= up and up - lo < 1e-6 and r.certified


def test_sampling_reproducible_and_normalized():
    a = random_pure(3, [5, 1])
    assert np.allclose(a, random_pure(3, [5, 1]))
    assert np.linalg.norm(a) == pytest.approx(1.0)
    b = random_pure(3, 7, "acin3")
    assert np.linalg.norm(b) == pytest.approx(1.0)
    assert np.all(b[[1, 2, 3]] == 0)
    with pytest.raises(ValidationError):
        random_pure(4, 0, "acin3")
    assert scatter_dataset(3, 5, seed=2) == scatter_dataset(3, 5, seed=2)


def test_family_curves():
    rows = family_curves(points=11)
    ghz = [r for r in rows if r[3] == "ghz"]
    w = [r for r in rows if r[3] == "w"]
    assert len(ghz) == len(w) == 11
    for alpha, t, _, _ in ghz:
        assert t == pytest.approx(2 * alpha * math.sqrt(1 - alpha**2), abs=1e-12)
    assert all(abs(r[1]) < 1e-7 for r in w)
    # only the |000><111| coherence survives for the balanced cat state
    assert pure_corr_norm(GHZ3, 3) == pytest.approx(1.0)


def test_hyperdeterminant_homogeneity():
    psi = random_pure(3, 0)
    assert hyperdeterminant(2 * psi) == pytest.approx(16 * hyperdeterminant(psi))


def local_unitary(rng, n):
    op = np.ones((1, 1))
    for _ in range(n):
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        q, r = np.linalg.qr(z)
        op = np.kron(op, q * (np.diag(r) / np.abs(np.diag(r))))
    return op


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    psi3, psi4 = random_pure(3, seed), random_pure(4, seed)
    u3, u4 = local_unitary(rng, 3), local_unitary(rng, 4)
    assert tau3_pure(u3 @ psi3).value == pytest.approx(tau3_pure(psi3).value, abs=1e-9)
    for name in ("tau4_a", "tau4_b", "tau4_c", "tau4_H"):
        m = MEASURES[name]
        assert m(u4 @ psi4) == pytest.approx(m(psi4), abs=1e-9)
    rho = np.outer(psi4[:4], psi4[:4].conj())
    rho /= np.trace(rho)
    u2 = local_unitary(rng, 2)
    assert concurrence(u2 @ rho @ u2.conj().T).value == pytest.approx(concurrence(rho).value, abs=1e-9)


def test_haar_purity_average():
    # Lubkin: mean purity of a qubit inside a Haar-random 2 x 4 state is (2 + 4) / (8 + 1)
    states = np.array([random_pure(3, [11, i]) for i in range(10000)])
    rng = np.random.default_rng(12)
    z = rng.normal(size=(10000, 8)) + 1j * rng.normal(size=(10000, 8))
    baseline = purity_average(z / np.linalg.norm(z, axis=1, keepdims=True))
    sigma = 0.15 / np.sqrt(10000)
    assert abs(purity_average(states) - 2 / 3) < 3 * 2 * sigma
    assert abs(purity_average(states) - baseline) < 3 * 2 * sigma


def test_product_state_scatter_point():
    plus = np.array([1, 1]) / math.sqrt(2)
    psi = np.kron(np.kron(plus, [1, 0]), [0.6, 0.8]).astype(complex)
    assert scatter_tangle(psi, 3) == pytest.approx(0.0, abs=1e-12)
    assert pure_corr_norm(psi, 3) == pytest.approx(0.0, abs=1e-12)


def test_tau4_variants_agree_on_ising_states():
    worst = 0.0
    for J in (0.7, 0.9, 1.0, 1.2):
        approx = rank2_truncate(reduced_dm(XYParams(J), (0, 1, 2, 3)))
        a, b, c = (rank2_convex_roof(approx, name).value for name in ("tau4_a", "tau4_b", "tau4_c"))
        worst = max(worst, abs(a - b), abs(a - c), abs(b - c))
    assert worst < 1e-6, f"largest pairwise difference {worst:.3e}"
