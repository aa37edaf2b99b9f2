"""Weak-stratification regime and per-interface merged supports.

A regime writes ``1 - gamma_i = eps**sigma_i`` with ``min sigma = 1``,
``u_{i+1} - u_i = pi_i eps**(sigma_i / 2)`` and ``h_i = varpi_i h_{i+1}``.
Interfaces with larger ``sigma`` are more weakly stratified. Around
interface ``i`` all neighbouring layers separated by weaker interfaces
act as a single layer: that contiguous block is the support of ``i``.

Interface and layer indices in this module's public API are 1-based,
as in the usual layered-flow notation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import DensityRatios, GammaLike, State, as_gamma

DEFAULT_C_PI = 4.0
DEFAULT_C_VARPI = 100.0


class RegimeError(ValueError):
    """The density ratios do not define an admissible regime."""


@dataclass(frozen=True)
class StratScheme:
    epsilon: float
    sigma: np.ndarray
    pi: np.ndarray
    varpi: np.ndarray

    def __post_init__(self):
        sig = np.asarray(self.sigma, dtype=float)
        if not 0.0 < self.epsilon < 1.0:
            raise RegimeError("epsilon must lie in (0, 1)")
        if sig.size and (np.any(sig <= 0) or abs(sig.min() - 1.0) > 1e-12):
            raise RegimeError("sigma must be positive with minimum 1")
        if np.unique(sig).size != sig.size:
            raise RegimeError("sigma must be injective")
        object.__setattr__(self, "sigma", sig)
        object.__setattr__(self, "pi", np.asarray(self.pi, dtype=float))
        object.__setattr__(self, "varpi", np.asarray(self.varpi, dtype=float))

    @property
    def n(self) -> int:
        return int(self.sigma.size + 1)

    def gamma(self) -> DensityRatios:
        return DensityRatios(1.0 - self.epsilon**self.sigma)

    @property
    def m_sigma_minus(self) -> int:
        """Interface with the strongest stratification (``sigma = 1``)."""
        return int(np.argmin(self.sigma)) + 1

    @property
    def m_sigma_plus(self) -> int:
        """Interface with the weakest stratification (largest ``sigma``)."""
        return int(np.argmax(self.sigma)) + 1


@dataclass(frozen=True)
class InterfaceSupport:
    """Layers ``m_minus..i`` above and ``i+1..m_plus`` below interface ``i``."""

    i: int
    m_minus: int
    m_plus: int
    h_minus: float
    h_plus: float

    @classmethod
    def trivial(cls, i: int, h: Sequence[float]) -> "InterfaceSupport":
        h = np.asarray(h, dtype=float)
        return cls(i, i, i + 1, float(h[i - 1]), float(h[i]))


@dataclass(frozen=True)
class RegimeReport:
    ok: bool
    pi_ratio: np.ndarray
    varpi: np.ndarray
    pi_flags: np.ndarray
    varpi_flags: np.ndarray


def fit_regime(state: State, gamma: GammaLike) -> StratScheme:
    """Recover ``(eps, sigma, pi, varpi)`` from a state and density ratios."""
    g = as_gamma(gamma).gamma
    if g.size + 1 != state.n:
        raise ValueError("density ratios do not match the layer count")
    if g.size == 0:
        raise RegimeError("a single layer has no interfaces")
    if np.any(g <= 0) or np.any(g >= 1):
        raise RegimeError("every density ratio must lie in (0, 1)")
    d = 1.0 - g
    if np.unique(d).size != d.size:
        raise RegimeError("1 - gamma_i values must be pairwise distinct")
    eps = float(d.max())
    if g.size == 1:
        sigma = np.ones(1)
    else:
        sigma = np.log(d) / np.log(eps)
        sigma[np.argmax(d)] = 1.0
    pi = np.diff(state.u) * eps ** (-sigma / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        varpi = state.h[:-1] / state.h[1:]
    return StratScheme(epsilon=eps, sigma=sigma, pi=pi, varpi=varpi)


def regime_state(
    scheme: StratScheme,
    h_bottom: float = 1.0,
    u_top: float = 0.0,
    v: Optional[Sequence[float]] = None,
) -> tuple[State, DensityRatios]:
    """Build the state and density ratios described by a scheme."""
    n = scheme.n
    h = np.empty(n)
    h[-1] = h_bottom
    for i in range(n - 2, -1, -1):
        h[i] = scheme.varpi[i] * h[i + 1]
    u = u_top + np.concatenate([[0.0], np.cumsum(scheme.pi * scheme.epsilon ** (scheme.sigma / 2))])
    v = np.zeros(n) if v is None else np.asarray(v, dtype=float)
    return State(h, u, v), scheme.gamma()


def interface_support(i: int, scheme: StratScheme, h: Sequence[float]) -> InterfaceSupport:
    """Merged support of interface ``i`` (1-based).

    ``m_minus`` is the smallest ``j <= i`` such that every interface in
    ``j..i`` has ``sigma >= sigma_i``; ``m_plus`` is the largest ``j > i``
    such that every interface in ``i..j-1`` has ``sigma >= sigma_i``.
    """
    sig = scheme.sigma
    h = np.asarray(h, dtype=float)
    n = sig.size + 1
    if h.size != n:
        raise ValueError("heights do not match the scheme")
    if not 1 <= i <= n - 1:
        raise IndexError(f"interface {i} outside 1..{n - 1}")
    s = sig[i - 1]
    lo = i
    while lo > 1 and sig[lo - 2] >= s:
        lo -= 1
    hi = i + 1
    while hi < n and sig[hi - 1] >= s:
        hi += 1
    return InterfaceSupport(
        i=i,
        m_minus=lo,
        m_plus=hi,
        h_minus=float(h[lo - 1 : i].sum()),
        h_plus=float(h[i:hi].sum()),
    )


def all_supports(scheme: StratScheme, h: Sequence[float]) -> list[InterfaceSupport]:
    return [interface_support(i, scheme, h) for i in range(1, scheme.n)]


def phi_sigma(i: int, support: InterfaceSupport, gamma: GammaLike) -> float:
    """``(h_minus + h_plus)(1 - gamma_i)``, the admissible squared shear at interface ``i``."""
    g = as_gamma(gamma).gamma
    return float((support.h_minus + support.h_plus) * (1.0 - g[i - 1]))


def validate_regime(
    state: State,
    scheme: StratScheme,
    c_pi: float = DEFAULT_C_PI,
    c_varpi: float = DEFAULT_C_VARPI,
) -> RegimeReport:
    """Advisory check that shears and height ratios stay of order one."""
    h = state.h
    ratio = scheme.pi**2 / (h[:-1] + h[1:])
    vp = state.h[:-1] / state.h[1:]
    pi_flags = ratio > c_pi
    varpi_flags = (vp > c_varpi) | (1.0 / vp > c_varpi)
    return RegimeReport(
        ok=not (pi_flags.any() or varpi_flags.any()),
        pi_ratio=ratio,
        varpi=vp,
        pi_flags=pi_flags,
        varpi_flags=varpi_flags,
    )
