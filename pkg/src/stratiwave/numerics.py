"""Dense linear algebra and root-finding primitives.

These routines are the brute-force oracle every closed-form expansion in
the package is checked against. Eigenvalues come from LAPACK (balanced
Hessenberg reduction followed by shifted QR) through scipy; everything
here is a thin, validated wrapper with explicit failure signals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
import scipy.linalg

ABS_FLOOR = 1e-14
EIG_RESIDUAL_TOL = 1e-10
MAX_EIG_ORDER = 512
MAX_POLY_DEGREE = 64


class EigenSolveError(RuntimeError):
    """Raised when an eigen-decomposition does not meet its contract."""


def as_square(M) -> np.ndarray:
    """Return ``M`` as a finite 2-D square float or complex array."""
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if not np.iscomplexobj(A):
        A = A.astype(float)
    return A


@dataclass(frozen=True)
class EigResult:
    """Eigenvalues with unit right eigenvectors (columns) and left covectors (rows).

    ``right[:, k]`` satisfies ``M @ r = values[k] * r`` and ``left[k]``
    satisfies ``l @ M = values[k] * l``.
    """

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray

    def __iter__(self) -> Iterator[tuple[complex, np.ndarray, np.ndarray]]:
        for k in range(self.values.size):
            yield complex(self.values[k]), self.right[:, k], self.left[k]

    def __len__(self) -> int:
        return int(self.values.size)


def _pair_conjugates(values: np.ndarray) -> np.ndarray:
    # LAPACK already returns conjugate pairs for real input; snap tiny
    # asymmetries so downstream multiset comparisons are exact.
    out = values.copy()
    k = 0
    while k < out.size - 1:
        a, b = out[k], out[k + 1]
        if a.imag != 0 and abs(a - np.conj(b)) <= 1e-12 * (1 + abs(a)):
            mid = 0.5 * (a + np.conj(b))
            out[k], out[k + 1] = mid, np.conj(mid)
            k += 2
        else:
            k += 1
    return out


def eig_dense(M) -> EigResult:
    """Eigen-decomposition with left and right vectors of a dense matrix.

    Parameters
    ----------
    M : array_like
        Square matrix of order at most 512 with finite entries.

    Returns
    -------
    EigResult
        Eigenvalues, unit right eigenvectors and unit left covectors.

    Raises
    ------
    EigenSolveError
        If LAPACK fails or a residual exceeds ``1e-10 * ||M|| * ||r||``.
    """
    A = as_square(M)
    if A.shape[0] > MAX_EIG_ORDER:
        raise ValueError(f"order {A.shape[0]} exceeds {MAX_EIG_ORDER}")
    try:
        w, vl, vr = scipy.linalg.eig(A, left=True, right=True, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenSolveError(f"eigensolver did not converge: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(vr)) and np.all(np.isfinite(vl))):
        raise EigenSolveError("eigensolver returned non-finite output")
    if not np.iscomplexobj(A):
        w = _pair_conjugates(w.astype(complex))
    right = vr / np.linalg.norm(vr, axis=0)
    left = vl.conj().T
    left = left / np.linalg.norm(left, axis=1)[:, None]
    scale = max(np.linalg.norm(A, 2), ABS_FLOOR)
    res = np.linalg.norm(A @ right - right * w, axis=0) / scale
    if np.any(res > EIG_RESIDUAL_TOL):
        raise EigenSolveError(f"eigenpair residual {res.max():.3e} above tolerance")
    return EigResult(values=w, right=right, left=left)


def eigvals_dense(M) -> np.ndarray:
    """Eigenvalues only (same solver, no vectors)."""
    A = as_square(M)
    try:
        w = scipy.linalg.eigvals(A, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenSolveError(f"eigensolver did not converge: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise EigenSolveError("eigensolver returned non-finite eigenvalues")
    return w.astype(complex)


def companion(coeffs: Sequence[float]) -> np.ndarray:
    """Companion matrix of a polynomial given in ascending order.

    The polynomial is normalised to be monic; its roots are the
    eigenvalues of the returned matrix.
    """
    c = np.asarray(coeffs, dtype=float)
    d = c.size - 1
    C = np.zeros((d, d))
    C[1:, :-1] = np.eye(d - 1)
    C[:, -1] = -c[:-1] / c[-1]
    return C


def poly_roots(coeffs: Sequence[float]) -> np.ndarray:
    """All complex roots, with multiplicity, of a real polynomial.

    Parameters
    ----------
    coeffs : sequence of float
        Coefficients in ascending degree. Trailing (highest-degree) zeros
        are dropped.

    Returns
    -------
    ndarray of complex
        The roots; empty for a nonzero constant.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0 or not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be a finite 1-D sequence")
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise ValueError("the zero polynomial has no well-defined roots")
    c = c[: nz[-1] + 1]
    d = c.size - 1
    if d == 0:
        return np.zeros(0, dtype=complex)
    if d > MAX_POLY_DEGREE:
        raise ValueError(f"degree {d} exceeds {MAX_POLY_DEGREE}")
    # Factor out roots at zero exactly.
    k0 = int(nz[0])
    roots = eigvals_dense(companion(c[k0:])) if d - k0 > 0 else np.zeros(0, complex)
    roots = np.concatenate([np.zeros(k0, dtype=complex), roots])
    return np.sort_complex(_pair_conjugates(np.sort_complex(roots)))


def poly_eval(coeffs: Sequence[float], x):
    """Evaluate an ascending-order polynomial at real or complex ``x``."""
    return np.polynomial.polynomial.polyval(x, np.asarray(coeffs))


def leading_principal_minors(M) -> np.ndarray:
    """Determinants of the top-left ``k x k`` blocks, ``k = 1..order``."""
    A = as_square(M)
    return np.array([np.linalg.det(A[:k, :k]) for k in range(1, A.shape[0] + 1)])


def matrix_exp_growth(M, tau_grid: Sequence[float]) -> float:
    """Largest spectral norm of ``exp(-i tau M)`` over a grid of ``tau``.

    A diagonalisable matrix (eigenvector condition below ``1e12``) is
    exponentiated through its eigen-decomposition; otherwise, or if the
    decomposition fails, scipy's scaling-and-squaring ``expm`` is used on
    the complexified matrix.
    """
    A = as_square(M)
    taus = np.asarray(tau_grid, dtype=float).ravel()
    if taus.size == 0 or not np.all(np.isfinite(taus)):
        raise ValueError("tau grid must be non-empty and finite")
    V = None
    try:
        res = eig_dense(A)
        V = res.right
        if np.linalg.cond(V) > 1e12:
            V = None
        else:
            Vinv = np.linalg.inv(V)
            w = res.values
    except (EigenSolveError, np.linalg.LinAlgError):
        V = None
    best = 0.0
    for tau in taus:
        if V is not None:
            E = (V * np.exp(-1j * tau * w)) @ Vinv
        else:
            try:
                E = scipy.linalg.expm(-1j * tau * A.astype(complex))
            except Exception as exc:  # pragma: no cover - scipy internal failure
                raise EigenSolveError(f"matrix exponential failed: {exc}") from exc
        best = max(best, float(np.linalg.norm(E, 2)))
    return best


def nullspace_dim(M, tol: float) -> int:
    """Number of singular values at most ``tol`` times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = np.asarray(M)
    s = np.linalg.svd(A, compute_uv=False)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return int(min(A.shape[1], A.shape[0]) + max(A.shape[1] - A.shape[0], 0))
    return int(np.sum(s <= tol * smax) + max(A.shape[1] - A.shape[0], 0))


def nullspace_basis(M, tol: float) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical null space."""
    A = np.asarray(M)
    _, s, vh = np.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    return vh[rank:].conj().T


def _clusters(values: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for k in np.argsort(values.real, kind="stable"):
        for g in groups:
            if abs(values[k] - values[g[0]]) <= tol:
                g.append(int(k))
                break
        else:
            groups.append([int(k)])
    return groups


def eigvec_condition(
    M, values: np.ndarray, right: np.ndarray, cluster_tol: float = 1e-6, null_tol: float = 1e-7
) -> float:
    """Condition number of an eigenvector basis, robust to repeated eigenvalues.

    LAPACK may return nearly parallel vectors for a semisimple repeated
    eigenvalue. Clusters (relative width ``cluster_tol``) whose computed
    vectors are nearly dependent are replaced by a null-space basis of
    ``M - mean(lambda) I``; if that basis is too small the eigenvalue is
    defective and ``inf`` is returned.
    """
    A = as_square(M)
    scale = max(float(np.max(np.abs(values))), float(np.linalg.norm(A, 2)), ABS_FLOOR)
    V = right / np.linalg.norm(right, axis=0)
    for g in _clusters(np.asarray(values), cluster_tol * scale):
        if len(g) < 2:
            continue
        sv = np.linalg.svd(V[:, g], compute_uv=False)
        if sv[-1] > cluster_tol * sv[0]:
            continue
        lam = np.mean(values[g])
        basis = nullspace_basis(A - lam * np.eye(A.shape[0]), null_tol)
        if basis.shape[1] < len(g):
            return np.inf
        V = V.astype(complex)
        V[:, g] = basis[:, : len(g)]
    return float(np.linalg.cond(V))
