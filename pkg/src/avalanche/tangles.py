"""Entanglement measures for qubits and the rank-2 convex roof.

Pure-state measures are built from polynomial invariants ``I`` of the
amplitudes, homogeneous of some degree, with ``t = |I|**power`` chosen so
that ``t`` is homogeneous of degree 2 (quadratic in the state, like a
density matrix). Four-qubit "filter" invariants are contractions of the
brackets

    (s_a s_b s_c s_d) = psi^T (s_a x s_b x s_c x s_d) psi

(transpose, no conjugation) over the Pauli index set with metric
``diag(-1, 1, 0, 1)``, where ``s_2`` is ``sigma_y``.

Amplitude vectors list basis states with the first qubit as the most
significant bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Callable, NamedTuple

import numpy as np

from .cumulants import Rank2Approx, correlated_rdm, corr_norm
from .linalg import ValidationError, partial_trace

ROOF_GAP_TOL = 1e-6
W_GRID = 201
PHI_SCAN = 64
PHI_TOL = 1e-12
ROOT_TOL = 1e-10

_SIGMA = np.array([
    np.eye(2),
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)
_SY = _SIGMA[2]
_METRIC = np.array([-1.0, 1.0, 0.0, 1.0])
_SYSY = np.kron(_SY, _SY)

MEASURE_NAMES = ("C2", "tau3", "sqrt_tau3", "tau4_a", "tau4_b", "tau4_c", "tau4_H")


class TangleValue(NamedTuple):
    measure: str
    value: float
    bounds: tuple[float, float] | None = None
    certified: bool = True


def _clamp(x: float) -> float:
    if x < 0 and x > -1e-12:
        return 0.0
    return float(x)


def _amps(psi, n: int) -> np.ndarray:
    a = np.asarray(psi, dtype=complex)
    if a.shape[-1] != 2**n:
        raise ValidationError(f"expected {2**n} amplitudes, got {a.shape[-1]}")
    return a


def _check_normalized(a: np.ndarray) -> None:
    norms = np.linalg.norm(a, axis=-1)
    if np.any(np.abs(norms - 1) > 1e-10):
        raise ValidationError("state is not normalized")


# ----------------------------------------------------------------- 2 qubits

def concurrence(rho: np.ndarray) -> TangleValue:
    """Two-qubit concurrence from the spin-flipped product.

    The Wootters lambdas are the singular values of sqrt(rho) (sy x sy)
    sqrt(rho)^*, which avoids square roots of rounding-level eigenvalues of
    rho rho~ (rank-deficient input would otherwise lose half its digits).
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValidationError(f"concurrence needs a 4x4 matrix, got {rho.shape}")
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    w = np.where(w > 1e-14 * max(w.max(), 1e-300), w, 0.0)
    root = (v * np.sqrt(w)) @ v.conj().T
    lam = np.linalg.svd(root @ _SYSY @ root.conj(), compute_uv=False)
    return TangleValue("C2", _clamp(max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))


def concurrence_invariant(psi: np.ndarray) -> np.ndarray:
    """psi^T (sy x sy) psi; its modulus is the pure-state concurrence."""
    a = _amps(psi, 2)
    return np.einsum("...i,ij,...j->...", a, _SYSY, a)


# ----------------------------------------------------------------- 3 qubits

def hyperdeterminant(psi: np.ndarray) -> np.ndarray:
    """4 x Cayley hyperdeterminant of the 2x2x2 amplitude tensor."""
    a = _amps(psi, 3)
    A = [a[..., i] for i in range(8)]
    a000, a001, a010, a011, a100, a101, a110, a111 = A
    d1 = a000**2 * a111**2 + a001**2 * a110**2 + a010**2 * a101**2 + a100**2 * a011**2
    d2 = (a000 * a111 * a011 * a100 + a000 * a111 * a101 * a010 + a000 * a111 * a110 * a001
          + a011 * a100 * a101 * a010 + a011 * a100 * a110 * a001 + a101 * a010 * a110 * a001)
    d3 = a000 * a110 * a101 * a011 + a111 * a001 * a010 * a100
    return 4 * (d1 - 2 * d2 + 4 * d3)


def tau3_pure(psi: np.ndarray) -> TangleValue:
    a = _amps(psi, 3)
    _check_normalized(a)
    return TangleValue("tau3", _clamp(float(np.abs(hyperdeterminant(a)))))


# ----------------------------------------------------------------- 4 qubits

def _bracket(t: np.ndarray, pattern: tuple[str, ...]) -> np.ndarray:
    """Batched (s_a s_b s_c s_d) with 'y' slots fixed to sigma_y."""
    ops, specs, out = [t], ["zabcd"], "z"
    for slot, key in enumerate(pattern):
        ket, bra = "abcd"[slot], "ABCD"[slot]
        if key == "y":
            ops.append(_SY)
            specs.append(ket + bra)
        else:
            ops.append(_SIGMA)
            specs.append(key + ket + bra)
            out += key
    ops.append(t)
    specs.append("zABCD")
    return np.einsum(",".join(specs) + "->" + out, *ops, optimize=True)


def _filter(psi: np.ndarray, patterns: list[tuple[str, ...]]) -> np.ndarray:
    a = _amps(psi, 4)
    shape = a.shape[:-1]
    t = a.reshape(-1, 2, 2, 2, 2)
    ops, specs = [], []
    for pat in patterns:
        ops.append(_bracket(t, pat))
        specs.append("z" + "".join(k for k in pat if k != "y"))
    for key in sorted({k for pat in patterns for k in pat if k != "y"}):
        ops.append(_METRIC)
        specs.append(key)
    return np.einsum(",".join(specs) + "->z", *ops, optimize=True).reshape(shape)


_F1 = [("m", "n", "y", "y"), ("m", "y", "l", "y"), ("y", "n", "l", "y")]
_F2 = [("m", "n", "y", "y"), ("m", "y", "l", "y"), ("y", "n", "y", "t"), ("y", "y", "l", "t")]
_F3 = [("m", "n", "y", "y"), ("m", "n", "y", "y"),
       ("r", "y", "l", "y"), ("r", "y", "l", "y"),
       ("t", "y", "y", "x"), ("t", "y", "y", "x")]


def filter_f1(psi: np.ndarray) -> np.ndarray:
    return _filter(psi, _F1)


def filter_f2(psi: np.ndarray) -> np.ndarray:
    return _filter(psi, _F2)


def filter_f2_sym(psi: np.ndarray) -> np.ndarray:
    """F2 averaged over all 24 qubit relabellings."""
    a = _amps(psi, 4)
    t = a.reshape(a.shape[:-1] + (2, 2, 2, 2))
    lead = a.ndim - 1
    acc = 0
    for perm in permutations(range(4)):
        axes = list(range(lead)) + [lead + p for p in perm]
        acc = acc + filter_f2(t.transpose(axes).reshape(a.shape))
    return acc / 24


def filter_f3(psi: np.ndarray) -> np.ndarray:
    return _filter(psi, _F3)


def invariant_h(psi: np.ndarray) -> np.ndarray:
    a = _amps(psi, 4)
    syy = np.kron(_SYSY, _SYSY)
    return np.einsum("...i,ij,...j->...", a, syy, a)


_CUTS = {"L": (0, 1, 2, 3), "M": (0, 2, 1, 3), "N": (0, 3, 1, 2)}


def invariant_det(psi: np.ndarray, cut: str) -> np.ndarray:
    a = _amps(psi, 4)
    lead = a.ndim - 1
    t = a.reshape(a.shape[:-1] + (2, 2, 2, 2))
    t = t.transpose(list(range(lead)) + [lead + i for i in _CUTS[cut]])
    return np.linalg.det(t.reshape(a.shape[:-1] + (4, 4)))


def tau4_pure(psi: np.ndarray, which: str) -> float:
    """Modulus of a four-qubit invariant: H, L, M, N, F1, F2 (symmetrized), F3."""
    a = _amps(psi, 4)
    _check_normalized(a)
    if which == "H":
        val = invariant_h(a)
    elif which in _CUTS:
        val = invariant_det(a, which)
    elif which == "F1":
        val = filter_f1(a)
    elif which == "F2":
        val = filter_f2_sym(a)
    elif which == "F3":
        val = filter_f3(a)
    else:
        raise ValidationError(f"unknown four-qubit invariant {which!r}")
    return _clamp(float(np.abs(val)))


# ----------------------------------------------------------------- measures

@dataclass(frozen=True)
class PolynomialMeasure:
    """Pure-state measure ``t = |invariant|**power``.

    ``degree`` is the homogeneity of ``invariant`` in the amplitudes; it fixes
    the number of zeros along a superposition line.
    """

    name: str
    invariant: Callable[[np.ndarray], np.ndarray]
    degree: int
    power: float
    n_qubits: int

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        return np.abs(self.invariant(psi)) ** self.power

    def value(self, psi: np.ndarray) -> TangleValue:
        a = _amps(psi, self.n_qubits)
        _check_normalized(a)
        return TangleValue(self.name, _clamp(float(self(a))))


MEASURES = {
    "C2": PolynomialMeasure("C2", concurrence_invariant, 2, 1.0, 2),
    "tau3": PolynomialMeasure("tau3", hyperdeterminant, 4, 1.0, 3),
    "tau4_a": PolynomialMeasure("tau4_a", filter_f1, 6, 1 / 3, 4),
    "tau4_b": PolynomialMeasure("tau4_b", filter_f2_sym, 8, 1 / 4, 4),
    "tau4_c": PolynomialMeasure("tau4_c", filter_f3, 12, 1 / 6, 4),
    "tau4_H": PolynomialMeasure("tau4_H", invariant_h, 2, 1.0, 4),
}


def get_measure(name: str) -> PolynomialMeasure:
    try:
        return MEASURES[name]
    except KeyError:
        raise ValidationError(f"unknown measure {name!r}; choose from {sorted(MEASURES)}") from None


# ----------------------------------------------------------------- rank-2 roof

def lower_hull_at(w: np.ndarray, y: np.ndarray, x0: float) -> float:
    """Lower convex envelope of the points (w, y), evaluated at x0."""
    order = np.lexsort((y, w))
    hull: list[tuple[float, float]] = []
    for px, py in zip(w[order], y[order]):
        if hull and hull[-1][0] == px:
            continue
        while len(hull) >= 2:
            (ax, ay), (bx, by) = hull[-2], hull[-1]
            if (bx - ax) * (py - ay) - (by - ay) * (px - ax) <= 0:
                hull.pop()
            else:
                break
        hull.append((px, py))
    hx, hy = zip(*hull)
    return float(np.interp(x0, hx, hy))


def line_coefficients(psi1: np.ndarray, psi2: np.ndarray, measure: PolynomialMeasure,
                      degree: int | None = None) -> np.ndarray:
    """Coefficients c_j with invariant(a psi1 + b psi2) = sum_j c_j a^(d-j) b^j.

    Obtained from d + 1 samples at roots of unity; a probe at a generic point
    rejects a wrong ``degree``.
    """
    d = measure.degree if degree is None else int(degree)
    zs = np.exp(2j * np.pi * np.arange(d + 1) / (d + 1))
    vals = measure.invariant(psi1[None, :] + zs[:, None] * psi2[None, :])
    coeffs = np.fft.fft(vals) / (d + 1)
    a, b = 0.6, 0.8 * np.exp(0.7j)
    probe = measure.invariant(a * psi1 + b * psi2)
    if abs(_line_eval(coeffs, a, b) - probe) > 1e-8 * max(1.0, np.max(np.abs(coeffs))):
        raise ValidationError(f"invariant is not homogeneous of degree {d}")
    return coeffs


def _line_eval(coeffs: np.ndarray, a, b) -> np.ndarray:
    d = len(coeffs) - 1
    a, b = np.asarray(a)[..., None], np.asarray(b)[..., None]
    j = np.arange(d + 1)
    return np.sum(coeffs * a ** (d - j) * b**j, axis=-1)


def superposition_zeros(coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Points (w, phi) where the invariant of sqrt(w) psi1 + e^{i phi} sqrt(1-w) psi2 vanishes."""
    d = len(coeffs) - 1
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        return np.linspace(0.0, 1.0, 3), np.zeros(3)
    w_list, phi_list = [], []
    if abs(coeffs[0]) <= 1e-13 * scale:
        w_list.append(1.0)
        phi_list.append(0.0)
    top = np.flatnonzero(np.abs(coeffs) > 1e-13 * scale)[-1]
    if top < d:
        # vanishing leading terms put a zero at psi2 itself
        w_list.append(0.0)
        phi_list.append(0.0)
    roots = np.roots(coeffs[: top + 1][::-1]) if top > 0 else np.array([])
    roots = roots[np.isfinite(roots)]
    w_list += list(1.0 / (1.0 + np.abs(roots) ** 2))
    phi_list += list(np.angle(roots))
    return np.asarray(w_list, dtype=float), np.asarray(phi_list, dtype=float)


def _minimize_phi(f: Callable[[np.ndarray], np.ndarray], n_rows: int) -> np.ndarray:
    """Row-wise min over phi of f(phi) (shape (n_rows,)) by scan plus golden section."""
    grid = np.linspace(0.0, 2 * np.pi, PHI_SCAN, endpoint=False)
    vals = np.stack([f(np.full(n_rows, ph)) for ph in grid], axis=1)
    k = np.argmin(vals, axis=1)
    best = vals[np.arange(n_rows), k]
    step = 2 * np.pi / PHI_SCAN
    lo, hi = grid[k] - step, grid[k] + step
    r = (math.sqrt(5) - 1) / 2
    x1, x2 = hi - r * (hi - lo), lo + r * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while np.max(hi - lo) > PHI_TOL:
        left = f1 <= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        x1, x2 = (np.where(left, hi - r * (hi - lo), x2),
                  np.where(left, x1, lo + r * (hi - lo)))
        fnew = f(np.where(left, x1, x2))
        f1, f2 = np.where(left, fnew, f2), np.where(left, f1, fnew)
    return np.minimum(best, np.minimum(f1, f2))


def characteristic_curves(coeffs: np.ndarray, power: float,
                          w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """g(w) = min_phi t(Z) and h(w) = min_phi [t(Z(phi)) + t(Z(phi + pi))] / 2.

    Z(w, phi) = sqrt(w) psi1 + e^{i phi} sqrt(1-w) psi2 and t = |invariant|**power,
    evaluated through the line coefficients.
    """
    w = np.asarray(w, dtype=float)
    a = np.sqrt(w)
    t = lambda ph: np.abs(_line_eval(coeffs, a, np.exp(1j * ph) * np.sqrt(1.0 - w))) ** power
    g = _minimize_phi(t, len(w))
    h = _minimize_phi(lambda ph: 0.5 * (t(ph) + t(ph + np.pi)), len(w))
    return g, h


def rank2_convex_roof(approx: Rank2Approx, measure: PolynomialMeasure | str,
                      degree: int | None = None) -> TangleValue:
    """Convex roof of ``measure`` for the rank-2 state described by ``approx``.

    The lower bound is the convex hull of the minimal characteristic curve;
    exact zeros of the invariant along the superposition line are added as
    nodes, since the curve has cusps there that a grid would miss. The upper
    bound uses antipodal pairs, which decompose the mixed state exactly.
    """
    if isinstance(measure, str):
        measure = get_measure(measure)
    if abs(np.vdot(approx.psi1, approx.psi2)) > 1e-10:
        raise ValidationError("rank-2 states must be orthogonal")
    p = approx.weights[0]
    if approx.rank_deficient or p >= 1.0:
        v = _clamp(float(measure(approx.psi1)))
        return TangleValue(measure.name, v, (v, v), True)
    coeffs = line_coefficients(approx.psi1, approx.psi2, measure, degree)
    wz, phz = superposition_zeros(coeffs)
    inside = (wz >= 0) & (wz <= 1)
    wz, phz = wz[inside], phz[inside]
    w = np.unique(np.concatenate([np.linspace(0.0, 1.0, W_GRID), [p], wz]))
    g, h = characteristic_curves(coeffs, measure.power, w)
    idx = np.searchsorted(w, wz)
    g[idx] = 0.0
    if len(wz):
        # antipodal partner of an exact zero
        partner = np.abs(_line_eval(coeffs, np.sqrt(wz), -np.exp(1j * phz) * np.sqrt(1.0 - wz)))
        # a residue at rounding level is a root hit, not a small positive value
        partner[partner <= ROOT_TOL * np.max(np.abs(coeffs))] = 0.0
        h[idx] = np.minimum(h[idx], 0.5 * partner**measure.power)
    lower = _clamp(lower_hull_at(w, g, p))
    upper = _clamp(lower_hull_at(w, h, p))
    upper = max(upper, lower)
    return TangleValue(measure.name, upper, (lower, upper), upper - lower <= ROOF_GAP_TOL)


def sqrt_tau3_roof(approx: Rank2Approx) -> TangleValue:
    r = rank2_convex_roof(approx, MEASURES["tau3"])
    lo, up = r.bounds
    return TangleValue("sqrt_tau3", math.sqrt(r.value), (math.sqrt(lo), math.sqrt(up)), r.certified)


# ----------------------------------------------------------------- sampling

def random_pure(n_qubits: int, seed, method: str = "haar") -> np.ndarray:
    """Random normalized pure state; identical for identical seeds."""
    if n_qubits not in (3, 4):
        raise ValidationError(f"random states are provided for 3 or 4 qubits, got {n_qubits}")
    rng = np.random.default_rng(seed)
    if method == "haar":
        z = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
        return z / np.linalg.norm(z)
    if method == "acin3":
        if n_qubits != 3:
            raise ValidationError("acin3 states are three-qubit states")
        lam = np.sqrt(rng.dirichlet(np.ones(5)))
        phi = rng.uniform(0, 2 * np.pi)
        psi = np.zeros(8, dtype=complex)
        psi[[0b000, 0b100, 0b101, 0b110, 0b111]] = lam * np.array([1, np.exp(1j * phi), 1, 1, 1])
        return psi
    raise ValidationError(f"unknown sampling method {method!r}")


def pure_corr_norm(psi: np.ndarray, n_qubits: int) -> float:
    """One-norm of the full n-site cumulant of a pure qubit state."""
    rho = np.outer(psi, psi.conj())
    dims = [2] * n_qubits
    rdms = {}
    sites = tuple(range(n_qubits))
    for r in range(1, n_qubits + 1):
        for sub in combinations(sites, r):
            rdms[sub] = rho if r == n_qubits else partial_trace(rho, dims, list(sub))
    return corr_norm(correlated_rdm(rdms, sites, 2, check=False), 1)


def scatter_tangle(psi: np.ndarray, n_qubits: int, tau4: str = "tau4_a") -> float:
    if n_qubits == 3:
        return math.sqrt(_clamp(float(np.abs(hyperdeterminant(psi)))))
    return _clamp(float(get_measure(tau4)(psi)))


def scatter_rows(n_qubits: int, indices, seed: int, method: str = "haar",
                 tau4: str = "tau4_a") -> list[tuple[int, float, float]]:
    """Rows (sample_id, tangle, corr_norm1) for the given sample indices.

    Each sample uses its own generator seeded by ``(seed, index)``.
    """
    rows = []
    for i in indices:
        psi = random_pure(n_qubits, [seed, int(i)], method)
        rows.append((int(i), scatter_tangle(psi, n_qubits, tau4), pure_corr_norm(psi, n_qubits)))
    return rows


def scatter_dataset(n_qubits: int, samples: int, seed: int, method: str = "haar",
                    tau4: str = "tau4_a") -> list[tuple[int, float, float]]:
    return scatter_rows(n_qubits, range(samples), seed, method, tau4)


W3 = np.zeros(8, dtype=complex)
W3[[0b001, 0b010, 0b100]] = 1 / np.sqrt(3)


def family_curves(points: int = 101) -> list[tuple[float, float, float, str]]:
    """Rows (alpha, sqrt_tau3, corr_norm1, family) for a|000>+b|111> and a|000>+b|W>."""
    rows = []
    for alpha in np.linspace(0.0, 1.0, points):
        beta = math.sqrt(max(0.0, 1 - alpha**2))
        ghz = np.zeros(8, dtype=complex)
        ghz[0], ghz[7] = alpha, beta
        w = beta * W3
        w[0] += alpha
        for name, psi in (("ghz", ghz), ("w", w)):
            rows.append((float(alpha), scatter_tangle(psi, 3), pure_corr_norm(psi, 3), name))
    return rows


def sl_gate(measure: PolynomialMeasure, trials: int = 20, seed: int = 0) -> float:
    """Largest relative change of the invariant under random determinant-1 local maps."""
    rng = np.random.default_rng(seed)
    n = measure.n_qubits
    worst = 0.0
    for _ in range(trials):
        psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        psi /= np.linalg.norm(psi)
        op = np.ones((1, 1))
        for _q in range(n):
            m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            op = np.kron(op, m / np.sqrt(np.linalg.det(m)))
        before = measure.invariant(psi)
        after = measure.invariant(op @ psi)
        worst = max(worst, float(abs(after - before) / max(abs(before), 1e-300)))
    return worst


def purity_average(states: np.ndarray) -> float:
    """Mean single-site purity of the first qubit over a batch of states."""
    n = int(round(math.log2(states.shape[-1])))
    t = states.reshape(len(states), 2, 2 ** (n - 1))
    rho1 = np.einsum("zaj,zbj->zab", t, t.conj())
    return float(np.mean(np.real(np.einsum("zab,zba->z", rho1, rho1))))

