"""Exact diagonalization of the periodic Bose-Hubbard chain.

    H = -J sum_i (b_i^+ b_{i+1} + b_{i+1}^+ b_i) + 1/2 sum_i n_i (n_i - 1)

The ground state is found in the zero-momentum sector, spanned by
normalized translation orbits ``|R> = o_R^{-1/2} sum_{s in orbit} |s>``,
then expanded back onto the full Fock basis. Fock states are encoded as
base-(N+1) integers with site 0 as the most significant digit, so integer
order is lexicographic order of occupation vectors.

Reduced density matrices conserve the boson number on the subsystem and
are stored as blocks labelled by that number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.special import comb, i0

from .cumulants import SiteTuple, set_partitions
from .linalg import ValidationError, schatten_from_eigenvalues

MAX_DIM = 10**7
MAX_KRYLOV = 300
LANCZOS_TOL = 1e-10
DENSE_MARGINAL = 4096


class ConvergenceError(RuntimeError):
    """Raised when the eigensolver misses its residual target."""


@dataclass(frozen=True)
class BoseParams:
    N: int
    L: int
    J: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"N must be a positive integer, got {self.N}")
        if int(self.L) != self.L or self.L < 2:
            raise ValidationError(f"L must be an integer >= 2, got {self.L}")
        if not self.J >= 0:
            raise ValidationError(f"J must be >= 0, got {self.J}")

    @property
    def filling(self) -> float:
        return self.N / self.L


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Full Fock basis plus the zero-momentum orbit representatives.

    ``rep_index[s]`` is the sector index of the orbit containing full state
    ``s``; ``sector[r]`` the full-basis index of representative ``r``.
    """

    N: int
    L: int
    occupations: np.ndarray
    codes: np.ndarray
    rep_index: np.ndarray
    sector: np.ndarray
    orbit: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.codes)

    @property
    def sector_dim(self) -> int:
        return len(self.sector)

    @property
    def base(self) -> int:
        return self.N + 1

    def index(self, codes: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.codes, codes)
        if np.any(idx >= self.dim) or np.any(self.codes[np.minimum(idx, self.dim - 1)] != codes):
            raise ValidationError("code outside the Fock basis")
        return idx


def fock_dimension(N: int, L: int) -> int:
    return int(comb(N + L - 1, N, exact=True))


def _rotate(codes: np.ndarray, base: int, L: int) -> np.ndarray:
    """Translate every state by one site (last site moves to the front)."""
    top = base ** (L - 1)
    return codes // base + (codes % base) * top


def _orbits(codes: np.ndarray, base: int, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Smallest code over translations, and the orbit size."""
    rep = codes.copy()
    size = np.zeros(len(codes), dtype=np.int64)
    cur = codes
    for shift in range(1, L + 1):
        cur = _rotate(cur, base, L)
        rep = np.minimum(rep, cur)
        back = (cur == codes) & (size == 0)
        size[back] = shift
    return rep, size


def build_basis(N: int, L: int, max_dim: int = MAX_DIM) -> FockBasis:
    dim = fock_dimension(N, L)
    if dim > max_dim:
        raise ValidationError(f"Fock dimension {dim} exceeds the budget of {max_dim}")
    return _build_basis(int(N), int(L))


@lru_cache(maxsize=4)
def _build_basis(N: int, L: int) -> FockBasis:
    dim = fock_dimension(N, L)
    # stars and bars: L-1 bar positions among N+L-1 slots
    bars = np.fromiter((b for c in combinations(range(N + L - 1), L - 1) for b in c),
                       dtype=np.int32, count=dim * (L - 1)).reshape(dim, L - 1)
    edges = np.hstack([np.full((dim, 1), -1, np.int32), bars, np.full((dim, 1), N + L - 1, np.int32)])
    occ = (np.diff(edges, axis=1) - 1).astype(np.uint8)
    base = N + 1
    weights = base ** np.arange(L - 1, -1, -1, dtype=np.int64)
    codes = occ.astype(np.int64) @ weights
    order = np.argsort(codes, kind="stable")
    occ, codes = occ[order], codes[order]
    rep, size = _orbits(codes, base, L)
    is_rep = rep == codes
    sector = np.flatnonzero(is_rep)
    rep_index = np.searchsorted(codes[sector], rep)
    for arr in (occ, codes, rep_index, sector):
        arr.setflags(write=False)
    return FockBasis(N, L, occ, codes, rep_index, sector, size[sector])


@lru_cache(maxsize=4)
def _sector_operators(N: int, L: int) -> tuple[sp.csr_matrix, np.ndarray]:
    """Hopping operator T (H = J T + diag(U)) and the interaction diagonal U."""
    basis = _build_basis(N, L)
    occ = basis.occupations[basis.sector].astype(np.int64)
    codes = basis.codes[basis.sector]
    base = basis.base
    weights = base ** np.arange(L - 1, -1, -1, dtype=np.int64)
    rows, cols, vals = [], [], []
    n_sec = basis.sector_dim
    src = np.arange(n_sec)
    for i in range(L):
        for a, b in ((i, (i + 1) % L), ((i + 1) % L, i)):
            # b_b^+ b_a moves one boson from a to b
            ok = occ[:, a] > 0
            amp = -np.sqrt(occ[ok, a] * (occ[ok, b] + 1.0))
            new = codes[ok] - weights[a] + weights[b]
            rep, _ = _orbits(new, base, L)
            target = np.searchsorted(codes, rep)
            factor = np.sqrt(basis.orbit[src[ok]] / basis.orbit[target])
            rows.append(target)
            cols.append(src[ok])
            vals.append(amp * factor)
    t = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n_sec, n_sec))
    t.sum_duplicates()
    u = 0.5 * np.sum(occ * (occ - 1), axis=1).astype(float)
    return t, u


def sector_hamiltonian(params: BoseParams) -> sp.csr_matrix:
    build_basis(params.N, params.L)
    t, u = _sector_operators(params.N, params.L)
    return (params.J * t + sp.diags(u)).tocsr()


def full_hamiltonian(params: BoseParams) -> sp.csr_matrix:
    """Hamiltonian on the full Fock basis (oracle for small systems)."""
    basis = build_basis(params.N, params.L)
    occ = basis.occupations.astype(np.int64)
    L = params.L
    weights = basis.base ** np.arange(L - 1, -1, -1, dtype=np.int64)
    rows, cols, vals = [], [], []
    src = np.arange(basis.dim)
    for i in range(L):
        for a, b in ((i, (i + 1) % L), ((i + 1) % L, i)):
            ok = occ[:, a] > 0
            rows.append(basis.index(basis.codes[ok] - weights[a] + weights[b]))
            cols.append(src[ok])
            vals.append(-params.J * np.sqrt(occ[ok, a] * (occ[ok, b] + 1.0)))
    h = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(basis.dim, basis.dim))
    return (h + sp.diags(0.5 * np.sum(occ * (occ - 1), axis=1).astype(float))).tocsr()


# --- Lanczos -------------------------------------------------------------------

def lanczos_ground(matvec: Callable[[np.ndarray], np.ndarray], v0: np.ndarray,
                   max_krylov: int = MAX_KRYLOV, tol: float = LANCZOS_TOL,
                   restarts: int = 1) -> tuple[float, np.ndarray, float]:
    """Lowest eigenpair of a real symmetric operator.

    Full reorthogonalization against the stored Krylov basis; one restart
    from the best Ritz vector if the first pass misses the target. The
    residual target is ``tol * max(1, |E|)``.
    """
    n = len(v0)
    x = np.asarray(v0, dtype=float)
    energy, residual = np.nan, np.inf
    for _attempt in range(restarts + 1):
        m_max = min(max_krylov, n)
        basis = np.zeros((m_max, n))
        alpha, beta = [], []
        v = x / np.linalg.norm(x)
        theta, y = None, None
        for j in range(m_max):
            basis[j] = v
            w = matvec(v)
            a = float(w @ v)
            w = w - a * v
            if j > 0:
                w -= beta[-1] * basis[j - 1]
            for _ in range(2):
                w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
            b = float(np.linalg.norm(w))
            alpha.append(a)
            if j == 0:
                theta_all, y_all = np.array([a]), np.ones((1, 1))
            else:
                theta_all, y_all = eigh_tridiagonal(np.array(alpha), np.array(beta),
                                                    select="i", select_range=(0, 0))
            theta, y = float(theta_all[0]), y_all[:, 0]
            est = b * abs(y[-1])
            if b < 1e-14 * max(1.0, abs(a)) or est < 0.1 * tol * max(1.0, abs(theta)):
                break
            beta.append(b)
            v = w / b
        k = len(alpha)
        x = basis[:k].T @ y
        x /= np.linalg.norm(x)
        hx = matvec(x)
        energy = float(x @ hx)
        residual = float(np.linalg.norm(hx - energy * x))
        if residual < tol * max(1.0, abs(energy)):
            return energy, x, residual
    raise ConvergenceError(f"Lanczos did not converge (residual {residual:.3e})")


@dataclass(frozen=True, eq=False)
class BoseGroundState:
    params: BoseParams
    energy: float
    sector_vector: np.ndarray
    amplitudes: np.ndarray
    residual: float


def ground_state(params: BoseParams) -> BoseGroundState:
    basis = build_basis(params.N, params.L)
    h = sector_hamiltonian(params)
    v0 = np.sqrt(basis.orbit.astype(float))
    energy, vec, residual = lanczos_ground(h.dot, v0)
    k = int(np.argmax(np.abs(vec)))
    if vec[k] < 0:
        vec = -vec
    amps = vec[basis.rep_index] / np.sqrt(basis.orbit[basis.rep_index])
    amps.setflags(write=False)
    return BoseGroundState(params, energy, vec, amps, residual)


# --- reduced density matrices ------------------------------------------------

@dataclass(frozen=True, eq=False)
class BoseRDM:
    """Number-conserving RDM: ``blocks[n_B] = (configs, matrix)``.

    ``configs`` lists the local occupation tuples with total n_B in
    lexicographic order; ``matrix`` is the block in that order.
    """

    sites: tuple[int, ...]
    N: int
    blocks: dict[int, tuple[np.ndarray, np.ndarray]]

    @property
    def q(self) -> int:
        return len(self.sites)

    def trace(self) -> float:
        return float(sum(np.trace(m) for _, m in self.blocks.values()))

    def dense(self) -> np.ndarray:
        """Matrix on the full local space (N+1)^q, first site most significant."""
        base = self.N + 1
        out = np.zeros((base**self.q, base**self.q))
        for configs, m in self.blocks.values():
            idx = _local_codes(configs, base)
            out[np.ix_(idx, idx)] = m
        return out

    def eigenvalues(self) -> np.ndarray:
        return np.sort(np.concatenate([np.linalg.eigvalsh(m) for _, m in self.blocks.values()]))


def _local_codes(configs: np.ndarray, base: int) -> np.ndarray:
    q = configs.shape[1]
    return configs.astype(np.int64) @ (base ** np.arange(q - 1, -1, -1, dtype=np.int64))


@lru_cache(maxsize=32)
def _configs_by_total(q: int, N: int, max_total: int) -> dict[int, np.ndarray]:
    allc = np.array(list(product(range(N + 1), repeat=q)), dtype=np.int64)
    tot = allc.sum(axis=1)
    return {n: allc[tot == n] for n in range(max_total + 1) if np.any(tot == n)}


def _rdm_sparse(amps: np.ndarray, basis: FockBasis, sites: Sequence[int]) -> sp.csr_matrix:
    """RDM of ``sites`` as a sparse matrix over local codes."""
    sites = list(sites)
    base = basis.base
    occ = basis.occupations
    rest = [i for i in range(basis.L) if i not in sites]
    wq = base ** np.arange(len(sites) - 1, -1, -1, dtype=np.int64)
    col = occ[:, sites].astype(np.int64) @ wq
    if rest:
        wr = base ** np.arange(len(rest) - 1, -1, -1, dtype=np.int64)
        env_codes = occ[:, rest].astype(np.int64) @ wr
        _, row = np.unique(env_codes, return_inverse=True)
    else:
        row = np.zeros(len(col), dtype=np.int64)
    keep = amps != 0
    psi = sp.csr_matrix((amps[keep], (row[keep], col[keep])),
                        shape=(int(row.max()) + 1, base ** len(sites)))
    return (psi.T @ psi).tocsr()


def _sparse_partial_trace(rho: sp.csr_matrix, base: int, q: int, keep: Sequence[int]) -> sp.csr_matrix:
    coo = rho.tocoo()
    digits = lambda c: [(c // base ** (q - 1 - k)) % base for k in range(q)]
    dr, dc = digits(coo.row.astype(np.int64)), digits(coo.col.astype(np.int64))
    traced = [k for k in range(q) if k not in keep]
    mask = np.ones(len(coo.data), dtype=bool)
    for k in traced:
        mask &= dr[k] == dc[k]
    w = base ** np.arange(len(keep) - 1, -1, -1, dtype=np.int64)
    r = sum(dr[k][mask] * w[i] for i, k in enumerate(keep))
    c = sum(dc[k][mask] * w[i] for i, k in enumerate(keep))
    n = base ** len(keep)
    out = sp.csr_matrix((coo.data[mask], (r, c)), shape=(n, n))
    out.sum_duplicates()
    return out


def _blocks_from_sparse(rho: sp.csr_matrix, sites: tuple[int, ...], N: int) -> BoseRDM:
    q = len(sites)
    blocks = {}
    for n, configs in _configs_by_total(q, N, N).items():
        idx = _local_codes(configs, N + 1)
        blocks[n] = (configs, rho[idx][:, idx].toarray())
    return BoseRDM(sites, N, blocks)


def bose_rdm(state: BoseGroundState, sites: Sequence[int]) -> BoseRDM:
    st = SiteTuple(tuple(sites))
    p = state.params
    if st.sites[-1] >= p.L:
        raise ValidationError(f"site {st.sites[-1]} outside chain of length {p.L}")
    basis = build_basis(p.N, p.L)
    return _blocks_from_sparse(_rdm_sparse(state.amplitudes, basis, st.sites), st.sites, p.N)


# --- blocked cumulants -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BoseCorrelated:
    """Correlated part of a number-conserving RDM, blocked by total occupation.

    Products of marginals reach totals above N, so blocks run up to q N.
    """

    sites: tuple[int, ...]
    N: int
    blocks: dict[int, tuple[np.ndarray, np.ndarray]]

    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues, descending."""
        lam = np.concatenate([np.linalg.eigvalsh(m) for _, m in self.blocks.values()])
        return np.sort(lam)[::-1]

    def trace(self) -> float:
        return float(sum(np.trace(m) for _, m in self.blocks.values()))

    def dense(self) -> np.ndarray:
        base = self.N + 1
        q = len(self.sites)
        out = np.zeros((base**q, base**q))
        for configs, m in self.blocks.values():
            idx = _local_codes(configs, base)
            out[np.ix_(idx, idx)] = m
        return out


def _moebius_weight(k: int) -> float:
    return (-1) ** (k - 1) * math.factorial(k - 1)


def blocked_cumulant(marginal: Callable[[tuple[int, ...]], object], q: int, N: int,
                     sites: tuple[int, ...]) -> BoseCorrelated:
    """Cumulant from moments: sum over set partitions with weights (-1)^(k-1) (k-1)!.

    ``marginal(positions)`` returns the RDM of the given tuple positions as a
    dense or sparse matrix over local codes.
    """
    base = N + 1
    mats = {}
    for r in range(1, q + 1):
        for sub in combinations(range(q), r):
            m = marginal(sub)
            if sp.issparse(m) and base**r <= DENSE_MARGINAL:
                m = m.toarray()
            mats[sub] = m
    parts = [p for p in set_partitions(list(range(q)))]
    blocks = {}
    for n, configs in _configs_by_total(q, N, q * N).items():
        acc = np.zeros((len(configs), len(configs)))
        gathered = {}
        for blk, m in mats.items():
            if len(blk) == q and n > N:
                continue
            idx = _local_codes(configs[:, list(blk)], base)
            gathered[blk] = m[idx][:, idx].toarray() if sp.issparse(m) else m[np.ix_(idx, idx)]
        for part in parts:
            if any(tuple(blk) not in gathered for blk in part):
                continue
            term = gathered[tuple(part[0])] * _moebius_weight(len(part))
            for blk in part[1:]:
                term = term * gathered[tuple(blk)]
            acc += term
        blocks[n] = (configs, acc)
    return BoseCorrelated(sites, N, blocks)


def bose_correlated(state: BoseGroundState, sites: Sequence[int]) -> BoseCorrelated:
    st = SiteTuple(tuple(sites))
    p = state.params
    if st.sites[-1] >= p.L:
        raise ValidationError(f"site {st.sites[-1]} outside chain of length {p.L}")
    basis = build_basis(p.N, p.L)
    full = _rdm_sparse(state.amplitudes, basis, st.sites)

    def marginal(pos):
        if len(pos) == st.q:
            return full
        return _sparse_partial_trace(full, basis.base, st.q, pos)

    return blocked_cumulant(marginal, st.q, p.N, st.sites)


def bose_corr_norm(c: BoseCorrelated, p: float = 1) -> float:
    return schatten_from_eigenvalues(c.eigenvalues(), p)


# --- analytic limits -----------------------------------------------------------

def strong_coupling_eigs(n: int, J: float, which: str) -> np.ndarray:
    """Leading-order nonvanishing eigenvalues of correlated RDMs at small J (descending)."""
    if int(n) != n or n < 1:
        raise ValidationError(f"filling must be a positive integer, got {n}")
    a = n * (n + 1)
    if which == "q2_d1":
        pos = [math.sqrt(2 * a) * J]
    elif which == "q2_d2":
        pos = [a * J**2, a * J**2, (2 * n + 1) * math.sqrt(2 * a) * J**2]
    elif which == "q3_d11":
        pos = [2 * a * J**2, a * J**2, a * J**2, 2 / 3 * math.sqrt(a * (2 * n * n + 2 * n - 1)) * J**2]
    else:
        raise ValidationError(f"unknown eigenvalue set {which!r}; use q2_d1, q2_d2 or q3_d11")
    pos = np.asarray(pos)
    return np.sort(np.concatenate([pos, -pos]))[::-1]


def strong_coupling_norms(n: int, J: float, q: int, p: float, d: int = 1) -> float:
    """Leading-order Schatten norms of correlated RDMs of neighbouring sites at small J."""
    key = {(2, 1): "q2_d1", (2, 2): "q2_d2", (3, 1): "q3_d11"}.get((q, d))
    if key is None or p not in (1, 2):
        raise ValidationError(f"no strong-coupling norm for q={q}, d={d}, p={p}")
    a = n * (n + 1)
    if key == "q2_d1":
        return 2 * math.sqrt(2 * a) * J if p == 1 else 2 * math.sqrt(a) * J
    if key == "q2_d2":
        if p == 1:
            return 2 * (2 * a + (2 * n + 1) * math.sqrt(2 * a)) * J**2
        return 2 * math.sqrt(a * (5 * n * n + 5 * n + 1)) * J**2
    if p == 1:
        return (8 * a + 4 / 3 * math.sqrt(a * (2 * n * n + 2 * n - 1))) * J**2
    return 2 / 3 * math.sqrt(a * (31 * a - 2)) * J**2


def _ideal_sparse(N: int, L: int, q: int) -> sp.csr_matrix:
    base = N + 1
    rows, cols, vals = [], [], []
    for n_b, configs in _configs_by_total(q, N, N).items():
        idx = _local_codes(configs, base)
        amp = np.sqrt([math.factorial(n_b) / math.prod(math.factorial(int(k)) for k in c) for c in configs])
        pref = comb(N, n_b, exact=True) * (1 - q / L) ** (N - n_b) * float(L) ** (-n_b)
        rr, cc = np.meshgrid(idx, idx, indexing="ij")
        rows.append(rr.ravel())
        cols.append(cc.ravel())
        vals.append((pref * np.outer(amp, amp)).ravel())
    n = base**q
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def ideal_gas_rdm(N: int, L: int, q: int) -> BoseRDM:
    """RDM of any q sites in the J -> infinity limit (independent of distances)."""
    if not 1 <= q <= 4 or q > L:
        raise ValidationError(f"need 1 <= q <= min(4, L), got q={q}")
    return _blocks_from_sparse(_ideal_sparse(N, L, q), tuple(range(q)), N)


def ideal_gas_correlated(N: int, L: int, q: int) -> BoseCorrelated:
    cache = {r: _ideal_sparse(N, L, r) for r in range(1, q + 1)}
    return blocked_cumulant(lambda pos: cache[len(pos)], q, N, tuple(range(q)))


def ideal_gas_norm2_thermo(filling: float, q: int) -> float:
    """Two-norm of the correlated RDM of an infinite ideal gas at this filling."""
    x = float(filling)
    if q == 2:
        val = (i0(4 * x) - i0(2 * x) ** 2) * math.exp(-4 * x)
    elif q == 3:
        val = (i0(6 * x) - 3 * i0(2 * x) * i0(4 * x) + 2 * i0(2 * x) ** 3) * math.exp(-6 * x)
    else:
        raise ValidationError(f"thermodynamic formula covers q = 2, 3; got {q}")
    return float(math.sqrt(max(val, 0.0)))


# --- sweeps ---------------------------------------------------------------------

BOSE_QUANTITIES = ("norms", "spectra")
DEFAULT_BOSE_DISTANCES = ((1,), (1, 1), (1, 1, 1))


def _bose_point(J: float, N: int, L: int, quantities: tuple[str, ...],
                distances: tuple[tuple[int, ...], ...], p_values: tuple[float, ...]) -> list[tuple]:
    state = ground_state(BoseParams(N, L, J))
    rows = []
    for d in distances:
        c = bose_correlated(state, SiteTuple.from_distances(d).sites)
        lam = c.eigenvalues()
        if "norms" in quantities:
            for p in p_values:
                rows.append((f"norm{p:g}", d, schatten_from_eigenvalues(lam, p)))
        if "spectra" in quantities:
            for k, v in enumerate(lam[np.abs(lam) > 1e-14], 1):
                rows.append((f"eig{k}", d, float(v)))
    return rows


def bose_sweep(couplings: Sequence[float], N: int = 9, L: int = 9,
               quantities: Sequence[str] = ("norms",),
               distances: Sequence[Sequence[int]] = DEFAULT_BOSE_DISTANCES,
               p_values: Sequence[float] = (1,), overlays: bool = True, workers: int = 1):
    """Norms or spectra of correlated RDMs on a grid of hopping values.

    With ``overlays`` the strong-coupling norms (where a closed form exists
    and the filling is an integer) and the finite-size ideal-gas values are
    added as extra quantities ``sc_norm<p>`` and ``ideal_norm<p>``.
    """
    from functools import partial

    from .sweep import SweepTable, parallel_map

    couplings = [float(j) for j in couplings]
    if any(b < a for a, b in zip(couplings, couplings[1:])):
        raise ValidationError("coupling grid must be ascending")
    unknown = set(quantities) - set(BOSE_QUANTITIES)
    if unknown:
        raise ValidationError(f"unknown quantities {sorted(unknown)}; choose from {BOSE_QUANTITIES}")
    build_basis(N, L)
    distances = tuple(tuple(d) for d in distances)
    fn = partial(_bose_point, N=N, L=L, quantities=tuple(quantities), distances=distances,
                 p_values=tuple(p_values))
    table = SweepTable(extra_columns=("N", "L"))
    ideal = {}
    if overlays and "norms" in quantities:
        for d in distances:
            if len(d) + 1 not in ideal:
                ideal[len(d) + 1] = ideal_gas_correlated(N, L, len(d) + 1).eigenvalues()
    for J, rows in zip(couplings, parallel_map(fn, couplings, workers)):
        for quantity, d, value in rows:
            table.add(J, quantity, value, d, N=N, L=L)
        if not (overlays and "norms" in quantities):
            continue
        for d in distances:
            for p in p_values:
                table.add(J, f"ideal_norm{p:g}", schatten_from_eigenvalues(ideal[len(d) + 1], p), d, N=N, L=L)
                n = N / L
                dist = d[0] if len(set(d)) == 1 else None
                if n == int(n) and dist is not None and (len(d) + 1, dist) in {(2, 1), (2, 2), (3, 1)} and p in (1, 2):
                    table.add(J, f"sc_norm{p:g}", strong_coupling_norms(int(n), J, len(d) + 1, p, dist), d, N=N, L=L)
    return table
