"""Dense linear-algebra kernels shared by the spin and boson engines.

Everything here works on plain ``numpy`` arrays. Site dimensions are passed
explicitly as a sequence (``dims``), and site order is always the caller's
order; nothing is sorted implicitly.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when an input violates a structural precondition."""


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def check_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValidationError("matrix has non-finite entries")
    dev = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return h


def fix_phases(vectors: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Rotate each column so its first non-negligible component is real positive."""
    v = np.array(vectors, copy=True)
    for j in range(v.shape[1]):
        col = v[:, j]
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size == 0:
            continue
        lead = col[idx[0]]
        v[:, j] = col * (abs(lead) / lead)
    return v


def eigh(h: np.ndarray, tol: float = HERMITIAN_TOL) -> Spectrum:
    """Hermitian eigendecomposition with ascending eigenvalues and fixed phases."""
    h = check_hermitian(h, tol)
    # symmetrize so rounding-level asymmetry cannot leak into the spectrum
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    return Spectrum(w, fix_phases(v))


def eigvalsh(h: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    h = check_hermitian(h, tol)
    return np.linalg.eigvalsh(0.5 * (h + h.conj().T))


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian of a real antisymmetric matrix.

    Uses Parlett-Reid style elimination with partial pivoting, O(n^3).
    An empty matrix has Pfaffian 1.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n % 2:
        raise ValidationError(f"Pfaffian needs an even dimension, got {n}")
    if n == 0:
        return 1.0
    scale = np.max(np.abs(a))
    if np.max(np.abs(a + a.T)) > 1e-12 * max(scale, 1.0):
        raise ValidationError("matrix is not antisymmetric")
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], k:] = a[[kp, k + 1], k:]
            a[k:, [k + 1, kp]] = a[k:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0.0:
            return 0.0
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return float(pf)


def _check_dims(rho: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValidationError(f"site dimensions must be positive: {dims}")
    total = int(np.prod(dims)) if dims else 1
    if rho.shape != (total, total):
        raise ValidationError(f"matrix shape {rho.shape} does not match dims {dims}")
    return dims


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every site not in ``keep``; the result follows ``keep``'s order."""
    rho = np.asarray(rho)
    dims = _check_dims(rho, dims)
    n = len(dims)
    keep = [int(k) for k in keep]
    if not keep:
        raise ValidationError("keep must be nonempty")
    if len(set(keep)) != len(keep):
        raise ValidationError(f"duplicate sites in keep: {keep}")
    for k in keep:
        if not 0 <= k < n:
            raise ValidationError(f"site index {k} out of range for {n} sites")
    t = rho.reshape(dims + dims)
    # einsum labels: ket legs 0..n-1, bra legs n..2n-1; traced sites share a label
    ket = list(range(n))
    bra = [n + i if i in keep else i for i in range(n)]
    out = keep + [n + k for k in keep]
    red = np.einsum(t, ket + bra, out)
    dk = int(np.prod([dims[k] for k in keep]))
    return red.reshape(dk, dk)


def schatten_norm(a: np.ndarray, p: float = 1) -> float:
    """Schatten p-norm from the eigenvalues of a Hermitian matrix."""
    if p < 1:
        raise ValidationError(f"Schatten norm needs p >= 1, got {p}")
    lam = np.abs(eigvalsh(a))
    if lam.size == 0:
        return 0.0
    if np.isinf(p):
        return float(lam.max())
    if p == 1:
        return float(lam.sum())
    if p == 2:
        return float(np.sqrt(np.sum(lam**2)))
    return float(np.sum(lam**p) ** (1.0 / p))


def schatten_from_eigenvalues(lam: np.ndarray, p: float = 1) -> float:
    if p < 1:
        raise ValidationError(f"Schatten norm needs p >= 1, got {p}")
    lam = np.abs(np.asarray(lam, dtype=float))
    if lam.size == 0:
        return 0.0
    if np.isinf(p):
        return float(lam.max())
    return float(np.sum(lam**p) ** (1.0 / p))


def embed(op: np.ndarray, subset: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Tensor ``op`` (acting on ``subset``, in that order) with identities elsewhere.

    The returned matrix acts on the joint space ordered like ``dims``.
    """
    op = np.asarray(op)
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    subset = [int(s) for s in subset]
    if len(set(subset)) != len(subset) or any(not 0 <= s < n for s in subset):
        raise ValidationError(f"invalid subset {subset} for {n} sites")
    sub_dims = [dims[s] for s in subset]
    ds = int(np.prod(sub_dims)) if subset else 1
    if op.shape != (ds, ds):
        raise ValidationError(f"operator shape {op.shape} does not match subset dims {sub_dims}")
    rest = [i for i in range(n) if i not in subset]
    dr = int(np.prod([dims[i] for i in rest])) if rest else 1
    full = np.kron(op, np.eye(dr, dtype=op.dtype))
    # current leg order: subset + rest (ket), same for bra; permute to 0..n-1
    order = subset + rest
    perm = np.argsort(order)
    cur = [dims[i] for i in order]
    t = full.reshape(cur + cur)
    t = t.transpose(list(perm) + [n + p for p in perm])
    total = int(np.prod(dims))
    return t.reshape(total, total)


def product_operator(factors: Sequence[tuple[np.ndarray, Sequence[int]]], dims: Sequence[int]) -> np.ndarray:
    """Tensor product of operators on disjoint subsets, as a joint-space matrix.

    Sites not covered by any factor get the identity. Factors on distinct
    sites commute, so their order is irrelevant.
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    order: list[int] = []
    out = np.ones((1, 1))
    for op, subset in factors:
        subset = [int(s) for s in subset]
        if set(subset) & set(order):
            raise ValidationError(f"factor subsets overlap at {sorted(set(subset) & set(order))}")
        ds = int(np.prod([dims[s] for s in subset]))
        op = np.asarray(op)
        if op.shape != (ds, ds):
            raise ValidationError(f"operator shape {op.shape} does not match subset {subset}")
        out = np.kron(out, op)
        order += subset
    rest = [i for i in range(n) if i not in order]
    if rest:
        out = np.kron(out, np.eye(int(np.prod([dims[i] for i in rest]))))
        order += rest
    perm = list(np.argsort(order))
    cur = [dims[i] for i in order]
    t = out.reshape(cur + cur).transpose(perm + [n + p for p in perm])
    total = int(np.prod(dims))
    return t.reshape(total, total)
