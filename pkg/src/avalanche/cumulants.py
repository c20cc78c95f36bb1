"""Correlated (cumulant) parts of reduced density matrices.

For a site tuple S the correlated part is the reduced density matrix minus
every product of lower-order correlated parts over proper set partitions of
S (the Ursell expansion). Single-site "correlated parts" are the single-site
density matrices themselves. For two and three sites this reads

    rho^c_12  = rho_12 - rho_1 rho_2
    rho^c_123 = rho_123 - rho^c_12 rho_3 - rho^c_13 rho_2 - rho^c_23 rho_1 - rho_1 rho_2 rho_3

and the four-site case follows the same rule. Products of operators on
distinct sites commute, so factor order does not matter.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Mapping, Sequence

import numpy as np

from .linalg import (
    ValidationError,
    eigh,
    eigvalsh,
    partial_trace,
    product_operator,
    schatten_from_eigenvalues,
)

MARGINAL_TOL = 1e-8
TRACE_TOL = 1e-10
DEGENERATE_P2 = 1e-14


@dataclass(frozen=True)
class SiteTuple:
    sites: tuple[int, ...]

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        object.__setattr__(self, "sites", sites)
        if not 1 <= len(sites) <= 4:
            raise ValidationError(f"site tuples hold 1..4 sites, got {len(sites)}")
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise ValidationError(f"sites must be strictly increasing: {sites}")

    @classmethod
    def from_distances(cls, distances: Sequence[int], start: int = 0) -> "SiteTuple":
        sites = [start]
        for d in distances:
            if d < 1:
                raise ValidationError(f"distances must be positive, got {tuple(distances)}")
            sites.append(sites[-1] + int(d))
        return cls(tuple(sites))

    @property
    def q(self) -> int:
        return len(self.sites)

    @property
    def distances(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.sites, self.sites[1:]))

    def subsets(self) -> Iterator[tuple[int, ...]]:
        """All nonempty sub-tuples, smallest first."""
        for r in range(1, self.q + 1):
            yield from combinations(self.sites, r)


@dataclass(frozen=True)
class CorrelatedRDM:
    sites: SiteTuple
    matrix: np.ndarray
    dims: tuple[int, ...]

    @property
    def q(self) -> int:
        return self.sites.q

    def expectation(self, observables: Sequence[np.ndarray]) -> float:
        """Connected correlation <A_1 ... A_q>^corr = Tr(rho^corr A_1 ... A_q)."""
        op = product_operator([(a, [i]) for i, a in enumerate(observables)], self.dims)
        return float(np.real(np.trace(self.matrix @ op)))


@dataclass(frozen=True)
class Rank2Approx:
    """Two-state truncation of a density matrix.

    ``weights`` are the weights given to ``psi1`` and ``psi2``: ``(p1, 1 - p1)``
    for the absolute scheme, ``(p1, p2) / (p1 + p2)`` for the renormalized one.
    """

    p1: float
    p2: float
    psi1: np.ndarray
    psi2: np.ndarray
    residual_weight: float
    scheme: str
    degenerate: bool = False
    rank_deficient: bool = False

    @property
    def weights(self) -> tuple[float, float]:
        if self.scheme == "absolute":
            return self.p1, 1.0 - self.p1
        s = self.p1 + self.p2
        return self.p1 / s, self.p2 / s

    def matrix(self) -> np.ndarray:
        w1, w2 = self.weights
        return w1 * np.outer(self.psi1, self.psi1.conj()) + w2 * np.outer(self.psi2, self.psi2.conj())


def set_partitions(items: Sequence) -> Iterator[list[tuple]]:
    """Every partition of ``items`` into nonempty blocks (blocks keep item order)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [(first,)] + part
        for i in range(len(part)):
            block = tuple(sorted((first,) + part[i], key=items.index))
            yield part[:i] + [block] + part[i + 1:]


def check_marginals(rdms: Mapping[tuple[int, ...], np.ndarray], sites: SiteTuple,
                    dims: Sequence[int], tol: float = MARGINAL_TOL) -> None:
    """Check every marginal in ``rdms`` against the partial trace of the full one."""
    full = sites.sites
    for sub in sites.subsets():
        if sub not in rdms:
            raise ValidationError(f"missing marginal for sites {sub}")
    big = np.asarray(rdms[full])
    for sub in sites.subsets():
        if sub == full:
            continue
        keep = [full.index(s) for s in sub]
        ref = partial_trace(big, dims, keep)
        dev = np.max(np.abs(ref - rdms[sub]))
        if dev > tol:
            raise ValidationError(f"marginal {sub} inconsistent with {full} (deviation {dev:.2e})")


def correlated_rdm(rdms: Mapping[tuple[int, ...], np.ndarray], sites: SiteTuple | Sequence[int],
                   dims: Sequence[int] | int = 2, check: bool = True) -> CorrelatedRDM:
    """Correlated part of the reduced density matrix of ``sites``.

    ``rdms`` maps every nonempty sub-tuple of ``sites`` (as a tuple of site
    labels) to its density matrix. ``dims`` gives the local dimension of each
    site in tuple order, or one shared integer.
    """
    if not isinstance(sites, SiteTuple):
        sites = SiteTuple(tuple(sites))
    q = sites.q
    dims = (int(dims),) * q if np.isscalar(dims) else tuple(int(d) for d in dims)
    if len(dims) != q:
        raise ValidationError(f"need {q} site dimensions, got {len(dims)}")
    if check:
        check_marginals(rdms, sites, dims)
    label = {s: i for i, s in enumerate(sites.sites)}
    cache: dict[tuple[int, ...], np.ndarray] = {}

    def cumulant(sub: tuple[int, ...]) -> np.ndarray:
        if sub in cache:
            return cache[sub]
        rho = np.asarray(rdms[sub])
        if len(sub) == 1:
            cache[sub] = rho
            return rho
        sub_dims = [dims[label[s]] for s in sub]
        out = np.array(rho, dtype=np.result_type(rho, float), copy=True)
        for part in set_partitions(sub):
            if len(part) == 1:
                continue
            factors = [(cumulant(block), [sub.index(s) for s in block]) for block in part]
            out = out - product_operator(factors, sub_dims)
        cache[sub] = out
        return out

    return CorrelatedRDM(sites, cumulant(sites.sites), dims)


def corr_norm(c: CorrelatedRDM, p: float = 1) -> float:
    return schatten_from_eigenvalues(eigvalsh(c.matrix), p)


def corr_spectrum(c: CorrelatedRDM) -> np.ndarray:
    """Eigenvalues in descending order."""
    lam = eigvalsh(c.matrix)[::-1]
    if abs(lam.sum()) > TRACE_TOL:
        raise ValidationError(f"correlated matrix not traceless (trace {lam.sum():.2e})")
    return lam


def rank2_truncate(rho: np.ndarray, scheme: str = "absolute") -> Rank2Approx:
    """Keep the two dominant eigenvectors of ``rho``.

    With a vanishing second eigenvalue the result is the pure-state
    approximation (p1 = 1) and a warning is issued.
    """
    if scheme not in ("absolute", "renormalized"):
        raise ValidationError(f"unknown truncation scheme {scheme!r}")
    lam, vec = eigh(rho)
    lam, vec = lam[::-1], vec[:, ::-1]
    if len(lam) < 2:
        raise ValidationError("need at least a two-dimensional density matrix")
    p1, p2 = float(lam[0]), float(lam[1])
    residual = float(max(0.0, 1.0 - p1 - p2))
    deficient = p2 < DEGENERATE_P2
    if deficient:
        warnings.warn("second eigenvalue vanishes; using the pure-state approximation", RuntimeWarning)
        p1, p2 = 1.0, 0.0
        residual = 0.0
    degenerate = abs(lam[0] - lam[1]) < 1e-12
    return Rank2Approx(p1, p2, vec[:, 0].copy(), vec[:, 1].copy(), residual, scheme,
                       degenerate=degenerate, rank_deficient=deficient)


def _haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    qm, r = np.linalg.qr(z)
    d = np.diag(r)
    return qm * (d / np.abs(d))


def random_contraction(rng: np.random.Generator, dim: int) -> np.ndarray:
    """A random Hermitian observable with operator norm 1."""
    if dim == 2:
        u = _haar_unitary(rng, 2)
        return u @ np.diag([1.0, -1.0]) @ u.conj().T
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = a + a.conj().T
    return h / np.max(np.abs(np.linalg.eigvalsh(h)))


def correlation_bound_check(c: CorrelatedRDM, trials: int = 1000, seed: int = 0,
                            optimize: bool = False) -> float:
    """Largest sampled connected correlation minus the trace norm.

    Observables are random single-site contractions. With ``optimize`` the
    best sample for qubit tuples is refined by local optimization over the
    Bloch directions of +-1-valued observables. The returned violation is
    never positive beyond rounding, by the trace-norm bound.
    """
    rng = np.random.default_rng(seed)
    norm = corr_norm(c, 1)
    best = -np.inf
    best_obs = None
    for _ in range(trials):
        obs = [random_contraction(rng, d) for d in c.dims]
        val = c.expectation(obs)
        if val > best:
            best, best_obs = val, obs
    if optimize and all(d == 2 for d in c.dims):
        best = max(best, _optimize_qubit_correlation(c, best_obs))
    return best - norm


def _bloch_observable(theta: float, phi: float) -> np.ndarray:
    n = (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
    return np.array([[n[2], n[0] - 1j * n[1]], [n[0] + 1j * n[1], -n[2]]])


def _optimize_qubit_correlation(c: CorrelatedRDM, start: Sequence[np.ndarray]) -> float:
    from scipy.optimize import minimize

    x0 = []
    for a in start:
        n = np.array([a[0, 1].real, -a[0, 1].imag, a[0, 0].real])
        x0 += [np.arccos(np.clip(n[2], -1, 1)), np.arctan2(n[1], n[0])]

    def neg(x):
        obs = [_bloch_observable(x[2 * i], x[2 * i + 1]) for i in range(c.q)]
        return -c.expectation(obs)

    res = minimize(neg, np.array(x0), method="BFGS")
    return -float(res.fun)
