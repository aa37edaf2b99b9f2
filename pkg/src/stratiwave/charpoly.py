"""Characteristic polynomial of the x-direction system.

``det(A_x - lam I) = det(M_x(lam)) * prod_i (u_i - lam)`` with
``M_x(lam) = (V_x - lam I)^2 - Gamma H``. The reduced factor ``f_n`` has
degree ``2n`` and carries the barotropic and baroclinic eigenvalues; the
remaining ``n`` eigenvalues are the advection speeds ``u_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import numerics
from .model import GammaLike, State, as_gamma, build_Ax, build_gamma_matrix

INTERP_CHECK_TOL = 1e-6


@dataclass(frozen=True)
class ReducedPoly:
    """Coefficients (ascending) of ``f_n(lam)``, monic of degree ``2n``.

    ``scale`` is the half-width ``R`` of the interpolation interval;
    ``scaled`` holds the coefficients in the variable ``t = lam / R``,
    which is what the root finder works with.
    """

    coeffs: np.ndarray
    scale: float
    scaled: np.ndarray

    def __call__(self, lam):
        return numerics.poly_eval(self.coeffs, lam)

    def roots(self) -> np.ndarray:
        return self.scale * numerics.poly_roots(self.scaled)


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues with family labels (``None`` when unlabelled)."""

    values: np.ndarray
    labels: tuple = field(default=())

    @property
    def max_imag(self) -> float:
        return float(np.max(np.abs(self.values.imag))) if self.values.size else 0.0

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def by_label(self) -> dict:
        return {lab: v for lab, v in zip(self.labels, self.values) if lab is not None}


def build_Mx(lam, state: State, gamma: GammaLike) -> np.ndarray:
    """``(V_x - lam I)^2 - Gamma H``; ``lam`` may be complex."""
    gamma = as_gamma(gamma)
    d = state.u - lam
    return np.diag(d * d) - build_gamma_matrix(gamma) * state.h[None, :]


def fn_eval(lam, state: State, gamma: GammaLike):
    """``f_n(lam) = det M_x(lam)``."""
    return np.linalg.det(build_Mx(lam, state, gamma))


def fn_minor(k: int, lam, state: State, gamma: GammaLike):
    """Determinant of ``M_x(lam)`` with row and column ``k`` (1-based) removed."""
    n = state.n
    if not 1 <= k <= n:
        raise IndexError(f"k={k} outside 1..{n}")
    M = build_Mx(lam, state, gamma)
    keep = [j for j in range(n) if j != k - 1]
    if not keep:
        return 1.0
    return np.linalg.det(M[np.ix_(keep, keep)])


def fn_rest_closed_form(h, gamma: GammaLike) -> float:
    """Value of ``f_n(0)`` at rest: ``(-1)^n h_n prod_i h_i (1 - gamma_i)``."""
    h = np.asarray(h, dtype=float)
    g = as_gamma(gamma).gamma
    n = h.size
    return float((-1) ** n * h[-1] * np.prod(h[:-1] * (1.0 - g)))


def fn_minor_rest_closed_form(k: int, h, gamma: GammaLike) -> float:
    """Closed form of the ``k``-th principal minor of ``M_x(0)`` at rest.

    For an interior ``k`` the two interfaces around layer ``k`` merge into a
    single one with ratio ``gamma_{k-1} gamma_k``, which contributes the
    factor ``eta_k = 1 - gamma_{k-1} gamma_k``.
    """
    h = np.asarray(h, dtype=float)
    g = as_gamma(gamma).gamma
    n = h.size
    if not 1 <= k <= n:
        raise IndexError(f"k={k} outside 1..{n}")
    if n == 1:
        return 1.0
    sign = (-1) ** (n - 1)
    one_minus = 1.0 - g  # interface j (1-based) at index j-1
    if k == 1:
        return float(sign * np.prod(h[1:]) * np.prod(one_minus[1:]))
    if k == n:
        return float(sign * np.prod(h[:-1]) * np.prod(one_minus[: n - 2]))
    eta = 1.0 - g[k - 2] * g[k - 1]
    hs = np.prod(np.delete(h, k - 1))
    others = np.prod(np.delete(one_minus, [k - 2, k - 1]))
    return float(sign * eta * hs * others)


def interpolation_radius(state: State) -> float:
    """``R = 1 + max|u_i| + sqrt(n max h_i)``, an overestimate of the reduced spectral radius."""
    return float(1.0 + np.max(np.abs(state.u)) + np.sqrt(state.n * np.max(np.abs(state.h))))


def reduced_poly(state: State, gamma: GammaLike) -> ReducedPoly:
    """Coefficients of ``f_n`` by interpolation at ``2n+1`` Chebyshev nodes.

    Raises
    ------
    ValueError
        If the interpolant misses ``f_n`` at check points by more than
        ``1e-6`` relative, or if its leading coefficient is not 1 to that
        tolerance (ill-conditioned interpolation).
    """
    gamma = as_gamma(gamma)
    n = state.n
    if n > 32:
        raise ValueError("reduced_poly supports at most 32 layers")
    deg = 2 * n
    R = interpolation_radius(state)
    k = np.arange(deg + 1)
    t = np.cos(np.pi * (k + 0.5) / (deg + 1))
    vals = np.array([fn_eval(R * tk, state, gamma) for tk in t])
    cheb = np.polynomial.chebyshev.chebfit(t, vals, deg)
    scaled = np.polynomial.chebyshev.cheb2poly(cheb)
    # Coefficient of t^j equals c_j R^j, so divide back to get lam-coefficients.
    coeffs = scaled / R ** np.arange(deg + 1)
    lead = coeffs[-1]
    tc = np.linspace(-1.0, 1.0, 2 * deg + 3)
    exact = np.array([fn_eval(R * x, state, gamma) for x in tc])
    approx = numerics.poly_eval(scaled, tc)
    mismatch = np.max(np.abs(exact - approx)) / max(np.max(np.abs(exact)), numerics.ABS_FLOOR)
    if not np.isfinite(lead) or abs(lead - 1.0) > INTERP_CHECK_TOL or mismatch > INTERP_CHECK_TOL:
        raise ValueError(
            f"interpolation ill-conditioned (leading coefficient {lead:.6g}, mismatch {mismatch:.2e})"
        )
    coeffs = coeffs / lead
    scaled = scaled / scaled[-1]
    return ReducedPoly(coeffs=coeffs, scale=R, scaled=scaled)


def _polish(z: complex, poly: ReducedPoly, state: State, gamma) -> complex:
    # Newton steps on the determinant itself; the derivative comes from the
    # interpolant. A step is kept only if it reduces |f_n|.
    d = np.polynomial.polynomial.polyder(poly.coeffs)
    fz = abs(fn_eval(z, state, gamma))
    for _ in range(4):
        dp = numerics.poly_eval(d, z)
        if dp == 0:
            break
        z_new = z - fn_eval(z, state, gamma) / dp
        f_new = abs(fn_eval(z_new, state, gamma))
        if not np.isfinite(f_new) or f_new >= fz:
            break
        z, fz = z_new, f_new
    return z


def reduced_roots(state: State, gamma: GammaLike, polish: bool = True) -> np.ndarray:
    """The ``2n`` roots of ``f_n`` (barotropic and baroclinic eigenvalues)."""
    gamma = as_gamma(gamma)
    poly = reduced_poly(state, gamma)
    roots = poly.roots()
    if polish:
        roots = np.array([_polish(complex(z), poly, state, gamma) for z in roots])
        # keep real inputs real when the imaginary part is round-off
        tiny = np.abs(roots.imag) <= 1e-13 * (1.0 + np.abs(roots.real))
        roots = np.where(tiny, roots.real + 0j, roots)
    return np.sort_complex(roots)


def full_spectrum(state: State, gamma: GammaLike, scheme=None) -> SpectrumReport:
    """Eigenvalues of ``A_x`` via the factorisation, with family labels.

    Parameters
    ----------
    scheme : StratScheme, optional
        When given, the ``2n`` reduced roots are matched to the asymptotic
        barotropic and baroclinic predictions by minimal total distance and
        labelled accordingly. The ``n`` advection speeds are always
        labelled ``advective(i)``.
    """
    gamma = as_gamma(gamma)
    n = state.n
    roots = reduced_roots(state, gamma)
    labels: list = [None] * roots.size
    if n == 1:
        labels = ["barotropic(-)", "barotropic(+)"]
    elif scheme is not None:
        from .asymptotics import predict_reduced

        names, preds = predict_reduced(state, gamma, scheme)
        cost = np.abs(roots[:, None] - preds[None, :])
        rows, cols = linear_sum_assignment(cost)
        for r, c in zip(rows, cols):
            labels[r] = names[c]
    adv = state.u.astype(complex)
    values = np.concatenate([roots, adv])
    labels += [f"advective({i + 1})" for i in range(n)]
    return SpectrumReport(values=values, labels=tuple(labels))


def verify_factorization(state: State, gamma: GammaLike, lam) -> float:
    """Relative gap between ``det(A_x - lam I)`` and ``f_n(lam) prod(u_i - lam)``."""
    gamma = as_gamma(gamma)
    A = build_Ax(state, gamma)
    lhs = np.linalg.det(A - lam * np.eye(A.shape[0]))
    rhs = fn_eval(lam, state, gamma) * np.prod(state.u - lam)
    return float(abs(lhs - rhs) / (1.0 + abs(lhs)))
