"""Energy-based symmetrizers and the bounds behind the symmetrizability test.

``Delta = diag(alpha_{n,1}, ..., alpha_{n,n-1}, 1)`` weights each layer by
its density relative to the bottom one. ``Delta Gamma`` has entries
``alpha_{n,min(i,k)}``, is positive definite exactly for a stable
stratification and has a tridiagonal inverse, which gives an explicit
Gerschgorin bound on its smallest eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .model import (
    AugmentedState,
    GammaLike,
    State,
    as_gamma,
    build_Ax,
    rotate_state,
    rotation_matrix,
)

SYMMETRY_TOL = 1e-12
PD_REL_TOL = 1e-13


@dataclass(frozen=True)
class SymmetrizerBundle:
    S: np.ndarray
    SA_x: np.ndarray
    positive_definite: bool
    min_eigenvalue: float
    SA_y: np.ndarray | None = None

    @property
    def asymmetry(self) -> float:
        """Relative asymmetry of the symmetrised products (0 means symmetric)."""
        out = 0.0
        for P in (self.SA_x, self.SA_y):
            if P is not None:
                out = max(out, np.abs(P - P.T).max() / max(np.abs(P).max(), numerics.ABS_FLOOR))
        return float(out)


@dataclass(frozen=True)
class DeltaBounds:
    refined: np.ndarray
    explicit: np.ndarray
    a_bound: float


@dataclass(frozen=True)
class SymmetrizabilityVerdict:
    passed: bool
    margins: np.ndarray
    reason: str = ""
    conservative: bool = True  # sufficient condition only


def is_positive_definite(S: np.ndarray, rel_tol: float = PD_REL_TOL) -> bool:
    """Smallest eigenvalue above ``rel_tol`` times the largest magnitude.

    Cholesky alone accepts singular semi-definite matrices through
    round-off, e.g. ``S_x^0`` at ``gamma_i = 1``.
    """
    S = 0.5 * (S + S.T)
    w = np.linalg.eigvalsh(S)
    if not np.all(np.isfinite(w)):
        return False
    return bool(w[0] > rel_tol * max(np.abs(w).max(), numerics.ABS_FLOOR))


def delta_gamma(gamma: GammaLike) -> np.ndarray:
    """``Delta Gamma`` with entries ``alpha_{n,min(i,k)}``."""
    a = as_gamma(gamma).alpha()
    idx = np.arange(a.size)
    return a[np.minimum.outer(idx, idx)]


def _bundle(S: np.ndarray, A: np.ndarray, Ay: np.ndarray | None = None) -> SymmetrizerBundle:
    S = 0.5 * (S + S.T)
    return SymmetrizerBundle(
        S=S,
        SA_x=S @ A,
        SA_y=None if Ay is None else S @ Ay,
        positive_definite=is_positive_definite(S),
        min_eigenvalue=float(np.linalg.eigvalsh(S).min()),
    )


def build_Sx(state: State, gamma: GammaLike, u0: float | None = None) -> SymmetrizerBundle:
    """Symmetrizer of ``A_x`` built from the energy Hessian.

    ``u0`` defaults to the height-weighted mean velocity.
    """
    gamma = as_gamma(gamma)
    u0 = state.ubar if u0 is None else float(u0)
    a = gamma.alpha()
    n = state.n
    Z = np.zeros((n, n))
    DG = delta_gamma(gamma)
    DV = np.diag(a * (state.u - u0))
    DH = np.diag(a * state.h)
    S = np.block([[DG, DV, Z], [DV, DH, Z], [Z, Z, DH]])
    return _bundle(S, build_Ax(state, gamma))


def build_S_theta(state: State, gamma: GammaLike, theta: float) -> np.ndarray:
    """Symmetrizer of ``A(theta)``: ``P^T S_x(P u) P`` with the rotated mean as ``u0``."""
    P = rotation_matrix(state.n, theta)
    rs = rotate_state(state, theta)
    return P.T @ build_Sx(rs, gamma, rs.ubar).S @ P


def build_Sx0(h, gamma: GammaLike) -> np.ndarray:
    """``blockdiag(Delta Gamma, Delta H, Delta H)``."""
    gamma = as_gamma(gamma)
    h = np.asarray(h, dtype=float)
    a = gamma.alpha()
    DH = np.diag(a * h)
    n = h.size
    Z = np.zeros((n, n))
    return np.block([[delta_gamma(gamma), Z, Z], [Z, DH, Z], [Z, Z, DH]])


def gamma_minors(gamma: GammaLike) -> np.ndarray:
    """Leading principal minors of ``Delta Gamma`` in closed form.

    ``m_1 = alpha_1`` and ``m_k = alpha_1 prod_{i<k} (alpha_{i+1} - alpha_i)``.
    """
    a = as_gamma(gamma).alpha()
    return a[0] * np.concatenate([[1.0], np.cumprod(np.diff(a))])


def _require_stable(gamma) -> np.ndarray:
    g = as_gamma(gamma).gamma
    if np.any(g <= 0) or np.any(g >= 1):
        raise ValueError("density ratios must lie in (0, 1)")
    return g


def gersh_bound_a(h, gamma: GammaLike) -> float:
    """Gerschgorin upper bound ``a`` on ``lambda_max`` of ``(S_x^0)^{-1}``.

    For a single layer the ``Delta Gamma`` block is the scalar 1, so the
    bound is ``max(1, 1/h_1)``.
    """
    gamma = as_gamma(gamma)
    _require_stable(gamma)
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise ValueError("heights must be positive")
    a = gamma.alpha()
    terms = [np.max(1.0 / (a * h))]
    n = h.size
    if n == 1:
        terms.append(1.0)
    else:
        p = 1.0 / np.diff(a)
        terms.append((a[1] / a[0] + 1.0) * p[0])
        if n >= 3:
            terms.append(2.0 * np.max(p[:-1] + p[1:]))
    return float(max(terms))


def tridiag_inverse_gamma(gamma: GammaLike) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of ``(Delta Gamma)^{-1}``.

    With ``p_k = 1/(alpha_{k+1} - alpha_k)`` the diagonal is
    ``((alpha_2/alpha_1) p_1, p_1 + p_2, ..., p_{n-2} + p_{n-1}, p_{n-1})``
    and every off-diagonal entry is ``-p_k``.
    """
    gamma = as_gamma(gamma)
    g = gamma.gamma
    if np.any(g == 1.0):
        raise ValueError("Delta Gamma is singular when some gamma_i = 1")
    _require_stable(gamma)
    a = gamma.alpha()
    n = a.size
    if n == 1:
        return np.array([1.0 / a[0]]), np.zeros(0)
    p = 1.0 / np.diff(a)
    diag = np.empty(n)
    diag[0] = a[1] / a[0] * p[0]
    diag[1:-1] = p[:-1] + p[1:]
    diag[-1] = p[-1]
    return diag, -p


def delta_bounds(h, gamma: GammaLike) -> DeltaBounds:
    """Lower bounds on the admissible squared velocity deviations per layer."""
    gamma = as_gamma(gamma)
    _require_stable(gamma)
    h = np.asarray(h, dtype=float)
    a = gamma.alpha()
    lam_min = float(np.min(numerics.eig_dense(build_Sx0(h, gamma)).values.real))
    ab = gersh_bound_a(h, gamma)
    return DeltaBounds(refined=(lam_min / a) ** 2, explicit=1.0 / (a * ab) ** 2, a_bound=ab)


def check_symmetrizable(state: State, gamma: GammaLike, bound: str = "refined") -> SymmetrizabilityVerdict:
    """Sufficient test for a symbolic symmetrizer in every direction.

    Passes when all heights are positive, all ratios lie in ``(0, 1)`` and
    ``delta_i - |u_i - ubar|^2 - |v_i - vbar|^2 > 0`` for every layer,
    with ``delta_i`` the refined (numeric ``lambda_min``) or explicit
    (Gerschgorin) lower bound.
    """
    gamma = as_gamma(gamma)
    n = state.n
    if np.any(state.h <= 0):
        return SymmetrizabilityVerdict(False, np.full(n, -np.inf), "non-positive height")
    g = gamma.gamma
    if np.any(g <= 0) or np.any(g >= 1):
        return SymmetrizabilityVerdict(False, np.full(n, -np.inf), "density ratios outside (0, 1)")
    b = delta_bounds(state.h, gamma)
    delta = b.refined if bound == "refined" else b.explicit
    dev = (state.u - state.ubar) ** 2 + (state.v - state.vbar) ** 2
    margins = delta - dev
    ok = bool(np.all(margins > 0))
    return SymmetrizabilityVerdict(ok, margins, "" if ok else "velocity deviation exceeds bound")


def build_Sa(
    aug: AugmentedState,
    gamma: GammaLike,
    f: float = 0.0,
) -> SymmetrizerBundle:
    """Friedrichs symmetrizer of the augmented (vorticity) system, order ``4n``."""
    from .augmented import build_Aa_x, build_Aa_y

    gamma = as_gamma(gamma)
    s = aug.base
    n = s.n
    a = gamma.alpha()
    Z = np.zeros((n, n))
    W = np.diag(aug.w + f)
    H = np.diag(s.h)
    DV = np.diag(a * s.u)
    DVy = np.diag(a * s.v)
    DH = np.diag(a * s.h)
    S = np.block(
        [
            [delta_gamma(gamma) + W @ W, DV, DVy, -W @ H],
            [DV, DH, Z, Z],
            [DVy, Z, DH, Z],
            [-W @ H, Z, Z, H @ H],
        ]
    )
    return _bundle(S, build_Aa_x(aug, gamma, f), build_Aa_y(aug, gamma, f))


def vorticity_penalty(w_plus_f: np.ndarray, h: np.ndarray) -> float:
    """Smallest eigenvalue over layers of ``[[W^2, -W h], [-W h, 0]]``, capped at 0.

    Each 2x2 block has eigenvalues ``(W^2 +- |W| sqrt(W^2 + 4 h^2)) / 2``,
    so the minimum is ``(|W|/2)(|W| - sqrt(W^2 + 4 h^2))`` for either sign
    of ``W``.
    """
    aw = np.abs(w_plus_f)
    vals = 0.5 * aw * (aw - np.sqrt(aw**2 + 4.0 * h**2))
    return float(min(0.0, vals.min()))


def delta_a(
    aug: AugmentedState,
    gamma: GammaLike,
    u0=(0.0, 0.0),
    f: float = 0.0,
) -> float:
    """Lower bound on ``lambda_min`` of the augmented symmetrizer."""
    gamma = as_gamma(gamma)
    s = aug.base
    a = gamma.alpha()
    base = min(1.0 / gersh_bound_a(s.h, gamma), float(np.min(s.h**2)))
    shear = np.max(a * np.abs(s.u - u0[0])) + np.max(a * np.abs(s.v - u0[1]))
    return float(base - shear + vorticity_penalty(aug.w + f, s.h))


def check_symmetrizable_augmented(
    aug: AugmentedState, gamma: GammaLike, u0=(0.0, 0.0), f: float = 0.0
) -> SymmetrizabilityVerdict:
    gamma = as_gamma(gamma)
    if np.any(aug.base.h <= 0):
        return SymmetrizabilityVerdict(False, np.array([-np.inf]), "non-positive height")
    g = gamma.gamma
    if np.any(g <= 0) or np.any(g >= 1):
        return SymmetrizabilityVerdict(False, np.array([-np.inf]), "density ratios outside (0, 1)")
    d = delta_a(aug, gamma, u0, f)
    return SymmetrizabilityVerdict(d > 0, np.array([d]), "" if d > 0 else "delta_a not positive")
