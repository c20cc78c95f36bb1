"""Ground-state reduced density matrices of the transverse XY / Ising chain.

The chain is solved internally in the XY form

    H = -J sum_i [(1+g)/2 X_i X_{i+1} + (1-g)/2 Y_i Y_{i+1}] - sum_i Z_i

with periodic boundaries. Jordan-Wigner maps it to free Majorana fermions,
``a_{2i} = S_i X_i`` and ``a_{2i+1} = S_i Y_i`` with ``S_i = prod_{j<i} Z_j``.
In the even-parity sector the fermions obey antiperiodic boundary conditions,
so momenta are ``k = pi (2m + 1) / L``. Any Pauli string then becomes a
Majorana monomial whose expectation is a Pfaffian of the contraction matrix.

For ``gamma == 1`` the results are reported in the basis of the usual Ising
form ``-J sum Z_i Z_{i+1} - sum X_i`` (a Hadamard on every site), so the
symmetric ground state tends to the GHZ state in Z for large J.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .linalg import ValidationError, pfaffian

THERMODYNAMIC = "thermodynamic"
L_FF = 8192
L_FF_CRITICAL = 65536
CRITICAL_WINDOW = 0.05
PSD_TOL = -1e-10
ED_MAX_LENGTH = 16

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


@dataclass(frozen=True)
class XYParams:
    """Parameters of the transverse XY chain (field strength fixed to 1).

    ``length`` is a positive integer or ``"thermodynamic"``. In the
    thermodynamic case momentum sums run over ``surrogate_length`` modes,
    chosen automatically from J unless given.
    """

    J: float
    gamma: float = 1.0
    length: Union[int, str] = THERMODYNAMIC
    surrogate_length: int | None = None

    def __post_init__(self):
        if not self.J >= 0:
            raise ValidationError(f"J must be >= 0, got {self.J}")
        if not 0 < self.gamma <= 1:
            raise ValidationError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.length != THERMODYNAMIC:
            if int(self.length) != self.length or self.length < 2:
                raise ValidationError(f"length must be an integer >= 2 or 'thermodynamic', got {self.length}")

    @property
    def basis_convention(self) -> str:
        return "zz-coupling/x-field" if self.gamma == 1 else "xy-coupling/z-field"

    @property
    def finite(self) -> bool:
        return self.length != THERMODYNAMIC

    @property
    def modes(self) -> int:
        """Number of momenta used in the Fourier sums."""
        if self.finite:
            return int(self.length)
        if self.surrogate_length is not None:
            return int(self.surrogate_length)
        return L_FF_CRITICAL if abs(self.J - 1.0) < CRITICAL_WINDOW else L_FF


@dataclass(frozen=True)
class PauliString:
    sites: tuple[int, ...]
    letters: str

    def __post_init__(self):
        if len(self.sites) != len(self.letters):
            raise ValidationError("sites and letters must have equal length")
        if any(b <= a for a, b in zip(self.sites, self.sites[1:])):
            raise ValidationError(f"sites must be strictly increasing: {self.sites}")
        if set(self.letters) - set("IXYZ"):
            raise ValidationError(f"letters must be drawn from IXYZ: {self.letters}")

    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for c in self.letters:
            out = np.kron(out, PAULI[c])
        return out


def momenta(params: XYParams) -> np.ndarray:
    n = params.modes
    return np.pi * (2 * np.arange(n) + 1) / n


def _coupling(params: XYParams, k: np.ndarray) -> np.ndarray:
    # Fourier transform of the a_{2i} -- a_{2j+1} block of the Majorana Hamiltonian
    J, g = params.J, params.gamma
    return 2.0 * (1.0 - J * np.cos(k)) + 2j * J * g * np.sin(k)


def dispersion(params: XYParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Momenta in (0, pi], single-particle energies and Bogoliubov angles."""
    k = momenta(params)
    k = k[k <= np.pi + 1e-15]
    z = _coupling(params, k)
    return k, np.abs(z), np.angle(z)


def free_fermion_energy(params: XYParams) -> float:
    """Ground energy of the even-parity sector, -1/2 sum_k omega_k."""
    if not params.finite:
        raise ValidationError("ground energy needs a finite chain")
    return float(-0.5 * np.sum(np.abs(_coupling(params, momenta(params)))))


@lru_cache(maxsize=64)
def _contractions(params: XYParams, max_offset: int) -> np.ndarray:
    """G(r) = M[2i, 2(i+r)+1] for r = -max_offset..max_offset."""
    k = momenta(params)
    z = _coupling(params, k)
    absz = np.abs(z)
    if np.any(absz == 0):
        raise ValidationError("gapless mode on the momentum grid; shift J or the length")
    u = z / absz
    r = np.arange(-max_offset, max_offset + 1)
    # M[2i, 2j+1] = (1/L) sum_k exp(ik(i-j)) u(k), with i - j = -r
    phase = np.exp(-1j * np.outer(r, k))
    g = (phase @ u) / len(k)
    return g.real.copy()


def majorana_correlations(params: XYParams, n_sites: int) -> np.ndarray:
    """Antisymmetric M with <a_m a_n> = delta_mn + i M_mn on sites 0..n_sites-1."""
    if params.finite and n_sites > params.length:
        raise ValidationError(f"span {n_sites} exceeds chain length {params.length}")
    g = _contractions(params, n_sites)
    m = np.zeros((2 * n_sites, 2 * n_sites))
    for i in range(n_sites):
        for j in range(n_sites):
            val = g[n_sites + (j - i)]
            m[2 * i, 2 * j + 1] = val
            m[2 * j + 1, 2 * i] = -val
    return m


# --- Pauli strings as Majorana monomials -------------------------------------

def _to_xy_basis(letters: str) -> tuple[str, int]:
    """Map a string given in the ZZ/X basis onto the internal XY basis."""
    out, sign = [], 1
    for c in letters:
        if c == "X":
            out.append("Z")
        elif c == "Z":
            out.append("X")
        elif c == "Y":
            out.append("Y")
            sign = -sign
        else:
            out.append("I")
    return "".join(out), sign


def _monomial(sites: Sequence[int], letters: str) -> tuple[complex, list[int]]:
    """Phase and sorted index list of the Majorana monomial equal to the string."""
    ops: list[int] = []
    phase = 1 + 0j
    for s, c in zip(sites, letters):
        if c == "I":
            continue
        if c == "Z":
            phase *= -1j
            ops += [2 * s, 2 * s + 1]
            continue
        for j in range(s):
            phase *= -1j
            ops += [2 * j, 2 * j + 1]
        ops.append(2 * s if c == "X" else 2 * s + 1)
    # bubble into ascending order tracking anticommutation signs, cancel squares
    ops = list(ops)
    sign = 1
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(ops) - 1:
            if ops[i] > ops[i + 1]:
                ops[i], ops[i + 1] = ops[i + 1], ops[i]
                sign = -sign
                changed = True
            elif ops[i] == ops[i + 1]:
                del ops[i:i + 2]
                changed = True
                continue
            i += 1
    return phase * sign, ops


def _wick(m: np.ndarray, phase: complex, ops: list[int]) -> float:
    if len(ops) % 2:
        return 0.0
    if not ops:
        return float(phase.real)
    sub = m[np.ix_(ops, ops)]
    val = phase * (1j ** (len(ops) // 2)) * pfaffian(sub)
    return float(val.real)


def _shifted(sites: Sequence[int]) -> tuple[int, ...]:
    base = sites[0]
    return tuple(s - base for s in sites)


def pauli_expectation(params: XYParams, string: PauliString, m: np.ndarray | None = None) -> float:
    """Ground-state expectation of a Pauli string.

    Letters are read in the reporting basis (ZZ/X for gamma == 1). Strings odd
    under the global spin flip vanish without a Pfaffian evaluation.
    """
    if params.finite and string.sites and string.sites[-1] >= params.length:
        raise ValidationError(f"site {string.sites[-1]} outside chain of length {params.length}")
    letters, sign = (_to_xy_basis(string.letters) if params.gamma == 1 else (string.letters, 1))
    if sum(c in "XY" for c in letters) % 2:
        return 0.0
    if not string.sites:
        return 1.0
    sites = _shifted(string.sites)
    if m is None:
        m = majorana_correlations(params, sites[-1] + 1)
    phase, ops = _monomial(sites, letters)
    return sign * _wick(m, phase, ops)


def reduced_dm(params: XYParams, sites: Sequence[int], m: np.ndarray | None = None) -> np.ndarray:
    """Reduced density matrix of ``sites`` from all 4^q Pauli expectations."""
    sites = tuple(int(s) for s in sites)
    q = len(sites)
    if not 1 <= q <= 4:
        raise ValidationError(f"need 1 <= q <= 4 sites, got {q}")
    if any(b <= a for a, b in zip(sites, sites[1:])):
        raise ValidationError(f"sites must be strictly increasing: {sites}")
    if params.finite and sites[-1] - sites[0] >= params.length:
        raise ValidationError(f"sites {sites} do not fit into length {params.length}")
    shifted = _shifted(sites)
    if m is None:
        m = majorana_correlations(params, shifted[-1] + 1)
    rho = np.zeros((2**q, 2**q), dtype=complex)
    for letters in itertools.product("IXYZ", repeat=q):
        string = PauliString(shifted, "".join(letters))
        val = pauli_expectation(params, string, m)
        if val != 0.0:
            rho += val * _pauli_matrix(string.letters)
    rho /= 2**q
    rho = 0.5 * (rho + rho.conj().T)
    lam = np.linalg.eigvalsh(rho)
    if lam.min() < PSD_TOL:
        raise ValidationError(f"reduced density matrix not positive (min eigenvalue {lam.min():.3e})")
    if abs(np.trace(rho) - 1) > 1e-12:
        raise ValidationError("reduced density matrix trace deviates from 1")
    return rho


@lru_cache(maxsize=512)
def _pauli_matrix(letters: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for c in letters:
        out = np.kron(out, PAULI[c])
    out.setflags(write=False)
    return out


def spin_flip(q: int, params: XYParams) -> np.ndarray:
    """The q-site spin-flip operator in the reporting basis."""
    c = "X" if params.gamma == 1 else "Z"
    return _pauli_matrix(c * q)


# --- brute-force oracle ------------------------------------------------------

def _kron_site(op: sp.spmatrix, i: int, n: int) -> sp.csr_matrix:
    left = sp.identity(2**i, format="csr")
    right = sp.identity(2 ** (n - i - 1), format="csr")
    return sp.kron(sp.kron(left, op), right, format="csr")


def ed_hamiltonian(params: XYParams) -> sp.csr_matrix:
    """Sparse 2^L Hamiltonian in the reporting basis."""
    n = int(params.length)
    x = sp.csr_matrix(PAULI["X"].real)
    z = sp.csr_matrix(PAULI["Z"].real)
    y = sp.csr_matrix(PAULI["Y"])
    J, g = params.J, params.gamma
    dim = 2**n
    h = sp.csr_matrix((dim, dim), dtype=complex)
    for i in range(n):
        j = (i + 1) % n
        if g == 1:
            h = h - J * _kron_site(z, i, n) @ _kron_site(z, j, n) - _kron_site(x, i, n)
        else:
            h = h - J * (1 + g) / 2 * _kron_site(x, i, n) @ _kron_site(x, j, n)
            h = h - J * (1 - g) / 2 * _kron_site(y, i, n) @ _kron_site(y, j, n)
            h = h - _kron_site(z, i, n)
    return h.tocsr()


def _even_sector(n: int, flip: str) -> sp.csr_matrix:
    """Isometry onto the +1 eigenspace of the global spin flip."""
    dim = 2**n
    idx = np.arange(dim)
    if flip == "Z":
        parity = np.array([bin(i).count("1") % 2 for i in idx])
        cols = idx[parity == 0]
        return sp.csr_matrix((np.ones(len(cols)), (cols, np.arange(len(cols)))), shape=(dim, len(cols)))
    partner = idx ^ (dim - 1)
    reps = idx[idx < partner]
    rows = np.concatenate([reps, partner[reps]])
    cols = np.concatenate([np.arange(len(reps))] * 2)
    vals = np.full(len(rows), 1 / np.sqrt(2))
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, len(reps)))


def ed_ground_state(params: XYParams) -> tuple[float, np.ndarray]:
    """Symmetric (even spin-flip) ground state by sparse diagonalization."""
    if not params.finite:
        raise ValidationError("exact diagonalization needs a finite chain")
    n = int(params.length)
    if n > ED_MAX_LENGTH:
        raise ValidationError(f"ED limited to L <= {ED_MAX_LENGTH}, got {n}")
    h = ed_hamiltonian(params)
    v = _even_sector(n, "X" if params.gamma == 1 else "Z")
    hs = (v.T @ h @ v).tocsr()
    if hs.shape[0] <= 256:
        w, vec = np.linalg.eigh(hs.toarray())
        e, gs = w[0], vec[:, 0]
    else:
        w, vec = spla.eigsh(hs, k=1, which="SA", tol=1e-14, v0=np.ones(hs.shape[0]))
        e, gs = w[0], vec[:, 0]
    psi = v @ gs
    psi = psi / np.linalg.norm(psi)
    lead = psi[np.argmax(np.abs(psi))]
    psi = psi * (abs(lead) / lead)
    return float(np.real(e)), psi


def ed_reduced_dm(psi: np.ndarray, n: int, sites: Sequence[int]) -> np.ndarray:
    t = np.asarray(psi).reshape((2,) * n)
    keep = list(sites)
    rest = [i for i in range(n) if i not in keep]
    mat = t.transpose(keep + rest).reshape(2 ** len(keep), -1)
    return mat @ mat.conj().T


def with_length(params: XYParams, length) -> XYParams:
    return replace(params, length=length)


# --- sweeps -------------------------------------------------------------------

DEFAULT_DISTANCES = ((1,), (1, 1), (1, 1, 1))
QUANTITIES = ("tangles", "norms", "spectra", "concurrence_exact_vs_rank2", "subdominant")


def tuple_rdms(params: XYParams, distances: Sequence[int]) -> dict[tuple[int, ...], np.ndarray]:
    """RDM of the site tuple with these distances plus all its marginals.

    Marginals are partial traces of the largest RDM, so they are mutually
    consistent by construction.
    """
    from .cumulants import SiteTuple
    from .linalg import partial_trace

    st = SiteTuple.from_distances(distances)
    full = reduced_dm(params, st.sites)
    out = {st.sites: full}
    for sub in st.subsets():
        if sub != st.sites:
            out[sub] = partial_trace(full, [2] * st.q, [st.sites.index(s) for s in sub])
    return out


def _point(J: float, gamma: float, length, surrogate_length, quantities: tuple[str, ...],
           distances: tuple[tuple[int, ...], ...], p_values: tuple[float, ...], scheme: str,
           tau4_measures: tuple[str, ...]) -> list[tuple]:
    import warnings

    from .cumulants import corr_norm, corr_spectrum, correlated_rdm, rank2_truncate
    from .tangles import concurrence, rank2_convex_roof, sqrt_tau3_roof

    params = XYParams(J, gamma, length, surrogate_length)
    rows: list[tuple] = []
    cache: dict[tuple[int, ...], dict] = {}

    def rdms(d):
        d = tuple(d)
        if d not in cache:
            cache[d] = tuple_rdms(params, d)
        return cache[d]

    def top(d):
        r = rdms(d)
        return r[max(r, key=len)]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if "tangles" in quantities:
            rows.append(("C2", (1,), concurrence(top((1,))).value))
            r3 = sqrt_tau3_roof(rank2_truncate(top((1, 1)), scheme))
            rows += [("sqrt_tau3", (1, 1), r3.value), ("sqrt_tau3_lower", (1, 1), r3.bounds[0]),
                     ("sqrt_tau3_upper", (1, 1), r3.bounds[1])]
            approx4 = rank2_truncate(top((1, 1, 1)), scheme)
            for name in tau4_measures:
                r4 = rank2_convex_roof(approx4, name)
                label = "tau4" if name == tau4_measures[0] else name
                rows += [(label, (1, 1, 1), r4.value), (label + "_lower", (1, 1, 1), r4.bounds[0]),
                         (label + "_upper", (1, 1, 1), r4.bounds[1])]
        if "subdominant" in quantities:
            for d in DEFAULT_DISTANCES:
                lam = np.linalg.eigvalsh(top(d))[::-1]
                rows.append(("subdominant", d, float(max(0.0, 1.0 - lam[0] - lam[1]))))
        if "concurrence_exact_vs_rank2" in quantities:
            for d in distances:
                if len(d) != 1:
                    continue
                rho = top(d)
                rows.append(("C2_exact", d, concurrence(rho).value))
                rows.append(("C2_rank2", d, concurrence(rank2_truncate(rho, scheme).matrix()).value))
        if "norms" in quantities or "spectra" in quantities:
            for d in distances:
                r = rdms(d)
                c = correlated_rdm(r, max(r, key=len), 2, check=False)
                if "norms" in quantities:
                    for p in p_values:
                        rows.append((f"norm{p:g}", d, corr_norm(c, p)))
                if "spectra" in quantities:
                    for k, lam in enumerate(corr_spectrum(c), 1):
                        rows.append((f"eig{k}", d, float(lam)))
    return rows


def ising_sweep(couplings: Sequence[float], quantities: Sequence[str] = ("tangles",),
                distances: Sequence[Sequence[int]] = DEFAULT_DISTANCES, gamma: float = 1.0,
                length=THERMODYNAMIC, surrogate_length: int | None = None,
                p_values: Sequence[float] = (1,), scheme: str = "absolute",
                tau4_measures: Sequence[str] = ("tau4_a",), workers: int = 1):
    """Evaluate the requested quantities on a grid of couplings.

    ``distances`` lists site tuples by their spacings, e.g. ``(1, 1)`` for
    three neighbouring spins. Rows come back ordered by grid index.
    """
    from functools import partial

    from .sweep import SweepTable, parallel_map

    couplings = [float(j) for j in couplings]
    if any(b < a for a, b in zip(couplings, couplings[1:])):
        raise ValidationError("coupling grid must be ascending")
    unknown = set(quantities) - set(QUANTITIES)
    if unknown:
        raise ValidationError(f"unknown quantities {sorted(unknown)}; choose from {QUANTITIES}")
    fn = partial(_point, gamma=gamma, length=length, surrogate_length=surrogate_length,
                 quantities=tuple(quantities), distances=tuple(tuple(d) for d in distances),
                 p_values=tuple(p_values), scheme=scheme, tau4_measures=tuple(tau4_measures))
    table = SweepTable()
    for J, rows in zip(couplings, parallel_map(fn, couplings, workers)):
        for quantity, d, value in rows:
            table.add(J, quantity, value, d)
    return table
