"""Dense complex non-Hermitian eigensolver with residual certification.

The native path is balancing, Householder reduction to Hessenberg form and
implicit single-shift QR with Wilkinson shifts; eigenvectors come from
back-substitution on the Schur form. A LAPACK backend (``numpy.linalg``) is
available for cross-checks and for speed on large batches.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

BACKENDS = ("native", "lapack")
CERTIFY_THRESHOLD = 1e-8


class ConvergenceError(RuntimeError):
    """QR iteration exceeded its budget; carries the partial deflation state."""

    def __init__(self, message: str, active_row: int, iterations: int, converged: np.ndarray):
        super().__init__(message)
        self.active_row = active_row
        self.iterations = iterations
        # eigenvalue estimates already split off below the active block
        self.converged = converged


@dataclass
class EigenPair:
    value: complex
    vector: np.ndarray | None = None
    residual: float = float("nan")


@dataclass
class Decomposition:
    values: np.ndarray
    vectors: np.ndarray | None
    iterations: int
    backend: str


def _prepare(A) -> np.ndarray:
    A = np.array(A, dtype=np.complex128, order="C", copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def decompose(A, vectors: bool = False, balance: bool = True, backend: str = "native") -> Decomposition:
    A = _prepare(A)
    n = A.shape[0]
    if backend == "lapack":
        if vectors:
            w, X = np.linalg.eig(A)
            X = X / np.linalg.norm(X, axis=0)
            return Decomposition(w, X, 0, backend)
        return Decomposition(np.linalg.eigvals(A), None, 0, backend)
    if backend != "native":
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")

    scale = np.ones(n)
    if balance:
        _kernels.balance(A, scale)
    Z = np.eye(n, dtype=np.complex128) if vectors else np.empty((1, 1), dtype=np.complex128)
    _kernels.hessenberg(A, Z, vectors)
    status, its = _kernels.schur_qr(A, Z, vectors, vectors, 30 * n)
    if status >= 0:
        done = np.diag(A)[status + 1:].copy()
        raise ConvergenceError(
            f"QR did not converge within {30 * n} iterations; "
            f"{n - status - 1} of {n} eigenvalues deflated",
            status, its, done)
    w = np.diag(A).copy()
    if not vectors:
        return Decomposition(w, None, its, backend)
    Y = _kernels.triangular_eigvecs(A)
    X = Z @ Y
    X *= scale[:, None]
    X /= np.linalg.norm(X, axis=0)
    return Decomposition(w, X, its, backend)


def eigvals_dense(A, balance: bool = True, backend: str = "native") -> np.ndarray:
    return decompose(A, False, balance, backend).values


def eig_dense(A, vectors: bool = False, balance: bool = True, backend: str = "native") -> list[EigenPair]:
    """All N eigenvalues of A as EigenPair records.

    With ``vectors=True`` each pair carries a unit eigenvector and its
    certified residual.
    """
    dec = decompose(A, vectors, balance, backend)
    if not vectors:
        return [EigenPair(complex(v)) for v in dec.values]
    res = residuals(A, dec.values, dec.vectors)
    return [EigenPair(complex(v), dec.vectors[:, k].copy(), float(res[k]))
            for k, v in enumerate(dec.values)]


def residuals(A, values, vectors) -> np.ndarray:
    A = np.asarray(A, dtype=np.complex128)
    fro = np.linalg.norm(A)
    if fro == 0.0:
        fro = 1.0
    X = np.asarray(vectors, dtype=np.complex128)
    if X.ndim == 1:
        X = X[:, None]
    R = A @ X - X * np.asarray(values)[None, :]
    return np.linalg.norm(R, axis=0) / (fro * np.linalg.norm(X, axis=0))


@dataclass
class Certificate:
    residuals: np.ndarray
    flagged: np.ndarray
    threshold: float

    @property
    def ok(self) -> bool:
        return not bool(self.flagged.any())


def certify(A, pairs: list[EigenPair], threshold: float = CERTIFY_THRESHOLD) -> Certificate:
    if any(p.vector is None for p in pairs):
        raise ValueError("certify needs eigenvectors; call eig_dense(..., vectors=True)")
    if not pairs:
        return Certificate(np.zeros(0), np.zeros(0, dtype=bool), threshold)
    res = residuals(A, [p.value for p in pairs], np.column_stack([p.vector for p in pairs]))
    for p, r in zip(pairs, res):
        p.residual = float(r)
    return Certificate(res, res > threshold, threshold)


def inverse_iteration(A, shift: complex, steps: int = 8, tol: float = 1e-14,
                      rng_seed: int = 0) -> tuple[complex, np.ndarray, float]:
    """Eigenpair nearest ``shift`` by shift-and-invert power iteration.

    Returns (value, unit vector, residual). The value is the Rayleigh
    quotient of the converged vector.
    """
    from scipy.linalg import lu_factor, lu_solve

    A = np.asarray(A, dtype=np.complex128)
    n = A.shape[0]
    fro = np.linalg.norm(A) or 1.0
    M = A - shift * np.eye(n)
    # a shift sitting exactly on an eigenvalue makes the LU singular
    M[np.diag_indices(n)] += 1e-14 * fro * (1 + 1j)
    lu = lu_factor(M, check_finite=False)
    rng = np.random.default_rng(rng_seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    value = complex(shift)
    res = np.inf
    for _ in range(steps):
        y = lu_solve(lu, x, check_finite=False)
        x = y / np.linalg.norm(y)
        Ax = A @ x
        value = complex(np.vdot(x, Ax))
        res = float(np.linalg.norm(Ax - value * x) / fro)
        if res < tol:
            break
    return value, x, res


@dataclass
class Match:
    i: int
    j: int
    distance: float
    collided: bool


def match_nearest(a, b) -> list[Match]:
    """Greedy nearest-neighbour matching of two eigenvalue multisets.

    Pairs are taken in order of increasing distance, each element used at
    most once. ``collided`` marks entries of ``a`` whose nearest element of
    ``b`` had already been claimed by a closer pair.
    """
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.size == 0 or b.size == 0:
        return []
    D = np.abs(a[:, None] - b[None, :])
    first = np.argmin(D, axis=1)
    order = np.argsort(D, axis=None, kind="stable")
    used_a = np.zeros(a.size, dtype=bool)
    used_b = np.zeros(b.size, dtype=bool)
    out = []
    need = min(a.size, b.size)
    for flat in order:
        i, j = divmod(int(flat), b.size)
        if used_a[i] or used_b[j]:
            continue
        used_a[i] = used_b[j] = True
        out.append(Match(i, j, float(D[i, j]), j != first[i]))
        if len(out) == need:
            break
    out.sort(key=lambda m: m.i)
    return out
