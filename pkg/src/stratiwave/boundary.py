"""Characteristic variables for open boundaries.

These formulas keep gravity explicit and take physical heights in metres.
Velocities are projected on the outward normal ``n`` first. For each wave
family the pair is ordered (upper sign, lower sign):

* barotropic: ``ubar_n + 2 sqrt(g H)`` then ``ubar_n - 2 sqrt(g H)``;
* baroclinic, interface ``i``:
  ``arcsin(A) - arcsin(B)`` then ``arcsin(A) + arcsin(B)`` with
  ``A = (h- - h+)/(h- + h+)`` and
  ``B = (u_{i+1,n} - u_{i,n}) / sqrt(g (1 - gamma_i)(h- + h+))``.

Both are formal approximations valid in the weak-stratification regime,
which is why every result carries ``approximate=True``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import GammaLike, State, as_gamma
from .stratification import InterfaceSupport, all_supports, fit_regime

REGIME_NOTE = "weak stratification with shear and height ratios of order one; formal approximation"


@dataclass(frozen=True)
class CharacteristicSet:
    barotropic_pair: tuple[float, float]
    baroclinic_pairs: tuple[tuple[float, float], ...]
    normal: tuple[float, float]
    g: float
    approximate: bool = True
    conditions: str = field(default=REGIME_NOTE)


def _unit(normal: Sequence[float]) -> tuple[float, float]:
    nv = np.asarray(normal, dtype=float)
    if nv.shape != (2,) or not np.all(np.isfinite(nv)):
        raise ValueError("normal must be a finite 2-vector")
    norm = float(np.hypot(*nv))
    if abs(norm - 1.0) > 1e-12:
        raise ValueError("normal must have unit length")
    return float(nv[0]), float(nv[1])


def normal_velocity(state: State, normal: Sequence[float]) -> np.ndarray:
    nx, ny = _unit(normal)
    return state.u * nx + state.v * ny


def characteristic_vars(
    state_physical: State,
    gamma: GammaLike,
    supports: Optional[Sequence[InterfaceSupport]] = None,
    g: float = 9.81,
    normal: Sequence[float] = (1.0, 0.0),
) -> CharacteristicSet:
    """Barotropic and baroclinic characteristic variables at a boundary.

    Parameters
    ----------
    state_physical : State
        Heights in metres (not multiplied by ``g``) and velocities in m/s.
    supports : sequence of InterfaceSupport, optional
        Merged supports per interface. Defaults to those of the fitted
        regime; for two layers the support is always trivial.

    Raises
    ------
    ValueError
        If an arcsin argument leaves ``[-1, 1]`` (regime violated at that
        interface).
    """
    if not g > 0:
        raise ValueError("g must be positive")
    nrm = _unit(normal)
    gamma = as_gamma(gamma)
    h = state_physical.h
    if np.any(h <= 0):
        raise ValueError("heights must be positive")
    un = normal_velocity(state_physical, nrm)
    H = float(h.sum())
    ubar = float(h @ un / H)
    c = 2.0 * np.sqrt(g * H)
    baro = (ubar + c, ubar - c)

    n = state_physical.n
    if n > 1 and supports is None:
        scheme = fit_regime(State(h, un, np.zeros(n)), gamma)
        supports = all_supports(scheme, h)
    pairs = []
    for sup in supports or ():
        i = sup.i
        S = sup.h_minus + sup.h_plus
        A = (sup.h_minus - sup.h_plus) / S
        denom = g * (1.0 - gamma.gamma[i - 1]) * S
        if not denom > 0:
            raise ValueError(f"interface {i}: density ratio must be below 1")
        B = (un[i] - un[i - 1]) / np.sqrt(denom)
        if abs(A) > 1.0 or abs(B) > 1.0:
            raise ValueError(f"interface {i}: arcsin argument outside [-1, 1] (A={A:.6g}, B={B:.6g})")
        aA, aB = float(np.arcsin(A)), float(np.arcsin(B))
        pairs.append((aA - aB, aA + aB))
    return CharacteristicSet(
        barotropic_pair=(float(baro[0]), float(baro[1])),
        baroclinic_pairs=tuple(pairs),
        normal=nrm,
        g=float(g),
    )


def riemann_increment(left_vec: Sequence[float], delta_u: Sequence[float]) -> float:
    """First-order increment ``l . du`` of the invariant attached to ``l``."""
    l = np.asarray(left_vec, dtype=float)
    d = np.asarray(delta_u, dtype=float)
    if l.shape != d.shape:
        raise ValueError("left vector and increment must have the same length")
    return float(l @ d)
