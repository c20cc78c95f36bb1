"""Cross-engine consistency checks used by ``avalanche verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .bosehubbard import BoseParams, bose_correlated, bose_rdm, ground_state
from .cumulants import SiteTuple, correlated_rdm, set_partitions
from .ising import (XYParams, _shifted, ed_ground_state, ed_reduced_dm, majorana_correlations,
                    reduced_dm)
from .linalg import ValidationError, partial_trace, pfaffian, product_operator
from .tangles import MEASURES, sl_gate


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    deviation: float
    tolerance: float

    @property
    def detail(self) -> str:
        return f"deviation {self.deviation:.3e} (tolerance {self.tolerance:.0e})"


def _result(name: str, deviation: float, tol: float) -> CheckResult:
    deviation = float(deviation)
    return CheckResult(name, bool(np.isfinite(deviation) and deviation <= tol), deviation, tol)


def moment_cumulant(rdms, sites, dims) -> np.ndarray:
    """Cumulant straight from moments: sum over partitions of (-1)^(k-1) (k-1)! times products."""
    sites = tuple(sites)
    out = 0
    for part in set_partitions(sites):
        k = len(part)
        factors = [(rdms[blk], [sites.index(s) for s in blk]) for blk in part]
        out = out + (-1) ** (k - 1) * math.factorial(k - 1) * product_operator(factors, dims)
    return out


def check_pfaffian(seed: int = 0, n: int = 12, tol: float = 1e-10) -> CheckResult:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    a = a - a.T
    pf = pfaffian(a)
    det = np.linalg.det(a)
    return _result("pfaffian squared equals determinant", abs(pf**2 - det) / max(abs(det), 1e-300), tol)


def _majorana(params: XYParams, n_sites: int, perturb: float, seed: int) -> np.ndarray:
    m = majorana_correlations(params, n_sites)
    if perturb:
        rng = np.random.default_rng(seed)
        e = rng.normal(size=m.shape)
        m = m + perturb * (e - e.T) / 2
    return m


def check_free_fermion_vs_ed(length: int = 12, perturb: float = 0.0, seed: int = 0,
                             tol: float = 1e-10) -> CheckResult:
    worst = 0.0
    for J, gamma in ((0.3, 1.0), (0.8, 1.0), (1.0, 1.0), (1.5, 1.0), (1.3, 0.5)):
        params = XYParams(J, gamma, length)
        _, psi = ed_ground_state(params)
        for sites in ((0, 1), (0, 1, 2), (0, 1, 2, 3), (0, 2, 3, 5)):
            m = _majorana(params, _shifted(sites)[-1] + 1, perturb, seed)
            rho = reduced_dm(params, sites, m)
            ref = ed_reduced_dm(psi, length, sites)
            worst = max(worst, float(np.max(np.abs(rho - ref))))
    return _result(f"free-fermion RDMs match exact diagonalization at L={length}", worst, tol)


def check_cumulant_engines(perturb: float = 0.0, seed: int = 0, tol: float = 1e-12) -> CheckResult:
    params = XYParams(0.9)
    sites = (0, 1, 2, 3)
    m = _majorana(params, 4, perturb, seed)
    rdms = {sub: reduced_dm(params, sub, m) for r in range(1, 5) for sub in combinations(sites, r)}
    rec = correlated_rdm(rdms, SiteTuple(sites), 2).matrix
    ref = moment_cumulant(rdms, sites, (2,) * 4)
    return _result("recursive cumulant matches the moment form", np.max(np.abs(rec - ref)), tol)


def check_cumulant_marginals(tol: float = 1e-12) -> CheckResult:
    """Tracing any site out of a q >= 2 correlated part gives zero."""
    params = XYParams(1.1)
    sites = (0, 1, 2, 3)
    rdms = {sub: reduced_dm(params, sub) for r in range(1, 5) for sub in combinations(sites, r)}
    c = correlated_rdm(rdms, SiteTuple(sites), 2).matrix
    worst = max(float(np.max(np.abs(partial_trace(c, (2,) * 4, [i for i in range(4) if i != j]))))
                for j in range(4))
    return _result("correlated part has vanishing marginals", worst, tol)


def check_sl_invariance(seed: int = 0, tol: float = 1e-9) -> list[CheckResult]:
    return [_result(f"{name} invariant under determinant-1 local maps", sl_gate(meas, seed=seed), tol)
            for name, meas in MEASURES.items()]


def check_bose_blocked(tol: float = 1e-12) -> CheckResult:
    N = L = 4
    state = ground_state(BoseParams(N, L, 0.2))
    sites = (0, 1, 2)
    blocked = bose_correlated(state, sites).dense()
    rdms = {sub: bose_rdm(state, sub).dense() for r in range(1, 4) for sub in combinations(sites, r)}
    generic = correlated_rdm(rdms, SiteTuple(sites), N + 1).matrix
    return _result("blocked Bose cumulant matches the generic engine", np.max(np.abs(blocked - generic)), tol)


def _guarded(name: str, fn, *args) -> CheckResult:
    # a perturbed contraction matrix can break positivity before any comparison happens
    try:
        return fn(*args)
    except ValidationError as exc:
        return CheckResult(f"{name} ({exc})", False, float("inf"), 0.0)


def run_checks(length: int = 12, perturb: float = 0.0, seed: int = 0) -> list[CheckResult]:
    out = [check_pfaffian(seed),
           _guarded("free-fermion RDMs match exact diagonalization", check_free_fermion_vs_ed,
                    length, perturb, seed),
           _guarded("recursive cumulant matches the moment form", check_cumulant_engines, perturb, seed),
           check_cumulant_marginals()]
    out += check_sl_invariance(seed)
    out.append(check_bose_blocked())
    return out
