"""Closed-form asymptotic eigenvalues and eigenvectors of ``A_x``.

Three families make up the spectrum:

* two barotropic waves ``ubar +- sqrt(H)`` moving the whole column,
* ``2(n-1)`` baroclinic waves, one pair per interface, whose speed scales
  like ``sqrt((1 - gamma_i) * height)``,
* ``n`` advective speeds ``u_i`` (exact).

Every baroclinic formula uses the merged support of its interface (see
:mod:`stratiwave.stratification`). With a trivial support it reduces to
the plain two-layer expansion, which is also available through an
independent code path (:func:`two_layer_baroclinic`,
:func:`two_layer_eigvecs`) for cross-checking.

All expansions are Galilean invariant, so they are evaluated directly in
the given frame. Interface and layer indices are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import GammaLike, State, as_gamma, rotation_matrix
from .stratification import InterfaceSupport, StratScheme, fit_regime, interface_support

SIGNS = ("+", "-")


def barotropic_label(sign: str) -> str:
    return f"barotropic({sign})"


def baroclinic_label(i: int, sign: str) -> str:
    return f"baroclinic({i},{sign})"


def _sgn(sign: str) -> float:
    if sign not in SIGNS:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return 1.0 if sign == "+" else -1.0


@dataclass(frozen=True)
class EigPrediction:
    """One predicted eigenpair of ``A_x``.

    ``order_exponent`` is the exponent ``p`` in the predicted error
    ``O(eps**p)`` (``inf`` for exact formulas). The vectors are ``None``
    for a baroclinic pair with a negative radicand.
    """

    label: str
    value: complex
    order_exponent: float
    right_vec: Optional[np.ndarray] = None
    left_vec: Optional[np.ndarray] = None


@dataclass(frozen=True)
class BaroclinicPair:
    """Baroclinic eigenvalues of one interface.

    ``radicand`` is ``h- h+ / (h- + h+) * (1 - gamma_i - du^2 / (h- + h+))``.
    A negative radicand gives a complex pair (loss of hyperbolicity) and
    sets ``is_complex``.
    """

    plus: complex
    minus: complex
    mean: float
    radicand: float
    margin: float  # (h- + h+)(1 - gamma_i) - du^2

    @property
    def is_complex(self) -> bool:
        return self.radicand < 0

    def __iter__(self):
        yield self.plus
        yield self.minus


def _pair(mean: float, radicand: float, margin: float) -> BaroclinicPair:
    root = np.sqrt(complex(radicand)) if radicand < 0 else complex(np.sqrt(radicand))
    return BaroclinicPair(mean + root, mean - root, mean, radicand, margin)


def _support(i: int, state: State, gamma, support, scheme) -> InterfaceSupport:
    if support is not None:
        return support
    if scheme is None:
        scheme = fit_regime(state, gamma)
    return interface_support(i, scheme, state.h)


def baroclinic_eig(
    i: int,
    state: State,
    gamma: GammaLike,
    support: Optional[InterfaceSupport] = None,
    scheme: Optional[StratScheme] = None,
) -> BaroclinicPair:
    """Baroclinic pair ``lambda_i^{+-}`` of interface ``i``.

    ``(u_{i+1} h- + u_i h+)/(h- + h+) +- [h- h+/(h- + h+) (1 - gamma_i - du^2/(h- + h+))]^{1/2}``
    with ``du = u_{i+1} - u_i`` and ``h-``, ``h+`` the merged heights
    above and below the interface. The support defaults to the one of the
    fitted regime.
    """
    g = as_gamma(gamma).gamma
    sup = _support(i, state, gamma, support, scheme)
    u = state.u
    hm, hp = sup.h_minus, sup.h_plus
    S = hm + hp
    du = u[i] - u[i - 1]
    mean = (u[i] * hm + u[i - 1] * hp) / S
    one_minus = 1.0 - g[i - 1]
    radicand = hm * hp / S * (one_minus - du * du / S)
    return _pair(float(mean), float(radicand), float(S * one_minus - du * du))


def two_layer_baroclinic(i: int, state: State, gamma: GammaLike) -> BaroclinicPair:
    """Baroclinic pair from the two adjacent layers only (trivial support)."""
    g = as_gamma(gamma).gamma
    h, u = state.h, state.u
    h1, h2 = h[i - 1], h[i]
    u1, u2 = u[i - 1], u[i]
    mean = (u1 * h2 + u2 * h1) / (h1 + h2)
    rad = h1 * h2 / (h1 + h2) * (1.0 - g[i - 1] - (u2 - u1) ** 2 / (h1 + h2))
    return _pair(float(mean), float(rad), float((h1 + h2) * (1.0 - g[i - 1]) - (u2 - u1) ** 2))


def barotropic_eig(
    state: State,
    gamma: GammaLike,
    mode: str = "first_order",
    scheme: Optional[StratScheme] = None,
) -> tuple[float, float]:
    """Barotropic pair ``(lambda_n^+, lambda_n^-)``.

    ``mode="first_order"`` gives
    ``ubar +- [sqrt(H) - (2 H^{3/2})^{-1} sum_j (1 - gamma_j) h_{<=j} h_{>j}]``,
    accurate to second order in ``1 - gamma`` at rest.

    ``mode="regime"`` gives ``u_m +- sqrt(H) + (u_{m+1} - u_m) h_{>m} / H``
    where ``m`` is the most strongly stratified interface (``sigma = 1``)
    and ``h_{>m}`` the total height below it.
    """
    h, u = state.h, state.u
    H = float(h.sum())
    if H <= 0:
        raise ValueError("total height must be positive")
    sq = np.sqrt(H)
    if state.n == 1:
        return float(u[0] + sq), float(u[0] - sq)
    g = as_gamma(gamma).gamma
    if mode == "first_order":
        above = np.cumsum(h)[:-1]
        below = H - above
        corr = np.sum((1.0 - g) * above * below) / (2.0 * H**1.5)
        ub = state.ubar
        return float(ub + sq - corr), float(ub - sq + corr)
    if mode == "regime":
        if scheme is None:
            scheme = fit_regime(state, gamma)
        m = scheme.m_sigma_minus
        shift = (u[m] - u[m - 1]) * h[m:].sum() / H
        return float(u[m - 1] + sq + shift), float(u[m - 1] - sq + shift)
    raise ValueError(f"unknown mode {mode!r}")


def baroclinic_eigvecs(
    i: int,
    state: State,
    gamma: GammaLike,
    support: Optional[InterfaceSupport] = None,
    sign: str = "+",
    scheme: Optional[StratScheme] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Right and left eigenvectors of ``lambda_i^{+-}`` spread over the support.

    With ``a = i - m- + 1``, ``b = m+ - i`` and ``chi = lambda - u_i``:
    the right vector has height entries ``1/a`` on layers ``m-..i`` and
    ``-1/b`` on ``i+1..m+``, and velocity entries ``chi/(a h_j)`` and
    ``-(chi - du)/(b h_j)``. The left vector swaps the height and velocity
    slots.
    """
    s = _sgn(sign)
    sup = _support(i, state, gamma, support, scheme)
    pair = baroclinic_eig(i, state, gamma, sup)
    if pair.is_complex:
        raise ValueError(f"interface {i}: complex baroclinic eigenvalue, no real eigenvector")
    lam = (pair.plus if s > 0 else pair.minus).real
    n = state.n
    h, u = state.h, state.u
    du = u[i] - u[i - 1]
    chi = lam - u[i - 1]
    a = i - sup.m_minus + 1
    b = sup.m_plus - i
    r = np.zeros(3 * n)
    l = np.zeros(3 * n)
    up = np.arange(sup.m_minus - 1, i)
    lo = np.arange(i, sup.m_plus)
    r[up] = 1.0 / a
    r[n + up] = chi / (a * h[up])
    r[lo] = -1.0 / b
    r[n + lo] = -(chi - du) / (b * h[lo])
    l[n + up] = 1.0 / a
    l[up] = chi / (a * h[up])
    l[n + lo] = -1.0 / b
    l[lo] = -(chi - du) / (b * h[lo])
    return r, l


def two_layer_eigvecs(i: int, state: State, gamma: GammaLike, sign: str = "+") -> tuple[np.ndarray, np.ndarray]:
    """Two-layer eigenvectors of interface ``i`` written as a shear part plus a root part."""
    s = _sgn(sign)
    n = state.n
    h, u = state.h, state.u
    pair = two_layer_baroclinic(i, state, gamma)
    if pair.is_complex:
        raise ValueError(f"interface {i}: complex baroclinic eigenvalue, no real eigenvector")
    k = i - 1
    shear = (u[k + 1] - u[k]) / (h[k] + h[k + 1])
    root = s * np.sqrt(pair.radicand)
    r = np.zeros(3 * n)
    l = np.zeros(3 * n)
    r[k], r[k + 1] = 1.0, -1.0
    r[n + k] = shear + root / h[k]
    r[n + k + 1] = shear - root / h[k + 1]
    l[n + k], l[n + k + 1] = 1.0, -1.0
    l[k] = shear + root / h[k]
    l[k + 1] = shear - root / h[k + 1]
    return r, l


def barotropic_eigvecs(
    state: State,
    gamma: GammaLike,
    scheme: Optional[StratScheme] = None,
    sign: str = "+",
) -> tuple[np.ndarray, np.ndarray]:
    """Right and left eigenvectors of ``lambda_n^{+-}``.

    The leading part is ``sum_k e_{n+k} +- (h_k/sqrt(H)) e_k``. The shear
    across the most strongly stratified interface ``m`` adds
    ``c_k (2 h_k/sqrt(H) e_k +- e_{n+k})`` with
    ``c_k = -du h_{>m}/(H sqrt(H))`` above ``m`` and
    ``c_k = du h_{<=m}/(H sqrt(H))`` below, ``du = u_{m+1} - u_m``. The left
    vector swaps the height and velocity slots.
    """
    s = _sgn(sign)
    n = state.n
    h, u = state.h, state.u
    H = float(h.sum())
    sq = np.sqrt(H)
    c = np.zeros(n)
    if n > 1:
        if scheme is None:
            scheme = fit_regime(state, gamma)
        m = scheme.m_sigma_minus
        du = u[m] - u[m - 1]
        c[:m] = -du * h[m:].sum() / (H * sq)
        c[m:] = du * h[:m].sum() / (H * sq)
    hs = s * h / sq + 2.0 * c * h / sq
    us = 1.0 + s * c
    r = np.concatenate([hs, us, np.zeros(n)])
    l = np.concatenate([us, hs, np.zeros(n)])
    return r, l


def merged_eigpair(i: int, state: State, gamma: GammaLike) -> tuple[float, np.ndarray, np.ndarray]:
    """Exact eigenpair ``(u_i, e_i - e_{i+1}, e_{n+i} - e_{n+i+1})`` of two merged layers.

    Requires ``gamma_i = 1`` and ``u_i = u_{i+1}``.
    """
    g = as_gamma(gamma).gamma
    n = state.n
    if not 1 <= i <= n - 1:
        raise IndexError(f"interface {i} outside 1..{n - 1}")
    if g[i - 1] != 1.0 or state.u[i - 1] != state.u[i]:
        raise ValueError("merged eigenpair needs gamma_i = 1 and u_i = u_{i+1}")
    r = np.zeros(3 * n)
    l = np.zeros(3 * n)
    r[i - 1], r[i] = 1.0, -1.0
    l[n + i - 1], l[n + i] = 1.0, -1.0
    return float(state.u[i - 1]), r, l


def advective_eigpair(i: int, state: State) -> tuple[float, np.ndarray, np.ndarray]:
    """Exact eigenpair ``(u_i, e_{2n+i}, e_{2n+i})`` of the transverse advection."""
    n = state.n
    if not 1 <= i <= n:
        raise IndexError(f"layer {i} outside 1..{n}")
    e = np.zeros(3 * n)
    e[2 * n + i - 1] = 1.0
    return float(state.u[i - 1]), e, e.copy()


def predict_reduced(
    state: State, gamma: GammaLike, scheme: Optional[StratScheme] = None
) -> tuple[list[str], np.ndarray]:
    """Labels and predicted values of the ``2n`` roots of the reduced polynomial.

    Order: ``barotropic(+), barotropic(-)``, then ``baroclinic(i,+)``,
    ``baroclinic(i,-)`` for ``i = 1..n-1``.
    """
    n = state.n
    if n > 1 and scheme is None:
        scheme = fit_regime(state, gamma)
    bp, bm = barotropic_eig(state, gamma, "regime" if n > 1 else "first_order", scheme)
    names = [barotropic_label("+"), barotropic_label("-")]
    vals: list[complex] = [bp, bm]
    for i in range(1, n):
        pair = baroclinic_eig(i, state, gamma, scheme=scheme)
        names += [baroclinic_label(i, "+"), baroclinic_label(i, "-")]
        vals += [pair.plus, pair.minus]
    return names, np.asarray(vals, dtype=complex)


def predict_all(state: State, gamma: GammaLike, scheme: Optional[StratScheme] = None) -> list[EigPrediction]:
    """Predicted eigenpairs for all ``3n`` families of ``A_x``."""
    n = state.n
    if n > 1 and scheme is None:
        scheme = fit_regime(state, gamma)
    out = []
    bvals = barotropic_eig(state, gamma, "regime" if n > 1 else "first_order", scheme)
    for sign, val in zip(SIGNS, bvals):
        r, l = barotropic_eigvecs(state, gamma, scheme, sign)
        out.append(EigPrediction(barotropic_label(sign), complex(val), 1.0, r, l))
    for i in range(1, n):
        pair = baroclinic_eig(i, state, gamma, scheme=scheme)
        order = (scheme.sigma[i - 1] + 1.0) / 2.0
        for sign, val in zip(SIGNS, pair):
            r = l = None
            if not pair.is_complex:
                r, l = baroclinic_eigvecs(i, state, gamma, sign=sign, scheme=scheme)
            out.append(EigPrediction(baroclinic_label(i, sign), complex(val), float(order), r, l))
    for i in range(1, n + 1):
        lam, r, l = advective_eigpair(i, state)
        out.append(EigPrediction(f"advective({i})", complex(lam), float("inf"), r, l))
    return out


def rotate_eigpair(right: np.ndarray, left: np.ndarray, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Map an eigenpair of ``A_x(P u)`` to one of ``A(u, theta)``: ``P^T r`` and ``l P``."""
    right = np.asarray(right)
    left = np.asarray(left)
    if right.size % 3 or right.size != left.size:
        raise ValueError("vectors must have equal length 3n")
    P = rotation_matrix(right.size // 3, theta)
    return P.T @ right, left @ P


def eig_residual(A: np.ndarray, lam, right: np.ndarray, left: np.ndarray) -> tuple[float, float]:
    """Relative residuals ``|A r - lam r| / (|A||r|)`` and ``|l A - lam l| / (|A||l|)``."""
    A = np.asarray(A)
    nA = max(np.linalg.norm(A, 2), 1e-300)
    rr = np.linalg.norm(A @ right - lam * right) / (nA * np.linalg.norm(right))
    rl = np.linalg.norm(left @ A - lam * left) / (nA * np.linalg.norm(left))
    return float(rr), float(rl)
