"""Layered state, density ratios and the system matrices.

Heights are stored already multiplied by ``g`` (units m^2/s^2), so the
first-order system reads ``u_t + A_x u_x + A_y u_y + b(u) = 0`` with no
explicit gravity. Use :func:`rescale_physical` to convert metres.

Indexing follows numpy (0-based) inside arrays; the state vector is
ordered ``(h_1..h_n, u_1..u_n, v_1..v_n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np


def _vec(x, name: str) -> np.ndarray:
    a = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    if a.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class State:
    """Rescaled heights and the two velocity components of each layer.

    Layer 1 is the top layer and layer ``n`` the bottom one.
    """

    h: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        h = _vec(self.h, "h")
        u = _vec(self.u, "u")
        v = _vec(self.v, "v") if np.size(self.v) else np.zeros_like(h)
        if h.size < 1:
            raise ValueError("at least one layer is required")
        if not (h.size == u.size == v.size):
            raise ValueError(f"length mismatch: h={h.size}, u={u.size}, v={v.size}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def at_rest(cls, h: Sequence[float]) -> "State":
        h = np.asarray(h, dtype=float)
        return cls(h, np.zeros_like(h), np.zeros_like(h))

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "State":
        x = np.asarray(x, dtype=float)
        if x.size % 3:
            raise ValueError("state vector length must be a multiple of 3")
        n = x.size // 3
        return cls(x[:n], x[n : 2 * n], x[2 * n :])

    @property
    def n(self) -> int:
        return int(self.h.size)

    @property
    def H(self) -> float:
        """Total (rescaled) depth."""
        return float(self.h.sum())

    @property
    def ubar(self) -> float:
        """Height-weighted mean x-velocity."""
        return float(self.h @ self.u / self.h.sum())

    @property
    def vbar(self) -> float:
        """Height-weighted mean y-velocity."""
        return float(self.h @ self.v / self.h.sum())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.h, self.u, self.v])

    def replace(self, **kw) -> "State":
        d = {"h": self.h, "u": self.u, "v": self.v}
        d.update(kw)
        return State(**d)


@dataclass(frozen=True)
class DensityRatios:
    """Ratios ``gamma_i = rho_i / rho_{i+1}`` between consecutive layers."""

    gamma: np.ndarray

    def __post_init__(self):
        g = _vec(self.gamma, "gamma") if np.size(self.gamma) else _vec(np.zeros(0), "gamma")
        if np.any(g <= 0):
            raise ValueError("density ratios must be positive")
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_densities(cls, rho: Sequence[float]) -> "DensityRatios":
        rho = np.asarray(rho, dtype=float)
        if rho.ndim != 1 or rho.size < 1 or np.any(~np.isfinite(rho)) or np.any(rho <= 0):
            raise ValueError("densities must be positive and finite")
        return cls(rho[:-1] / rho[1:])

    @property
    def n(self) -> int:
        return int(self.gamma.size + 1)

    def alpha(self) -> np.ndarray:
        """``alpha_{n,i} = rho_i / rho_n`` for ``i = 1..n``."""
        # reversed cumulative product of gamma, ending with 1 for the bottom layer
        return np.append(np.cumprod(self.gamma[::-1])[::-1], 1.0)

    def densities(self) -> np.ndarray:
        """Densities normalised so that the bottom layer has ``rho_n = 1``."""
        return self.alpha()


GammaLike = Union[DensityRatios, Sequence[float], np.ndarray]


def as_gamma(gamma: GammaLike) -> DensityRatios:
    return gamma if isinstance(gamma, DensityRatios) else DensityRatios(np.asarray(gamma, float))


def _check_n(state: State, gamma: DensityRatios) -> None:
    if gamma.n != state.n:
        raise ValueError(f"{state.n} layers but {gamma.gamma.size} density ratios")


@dataclass(frozen=True)
class AugmentedState:
    """State plus the vertical vorticity ``w_i`` of each layer."""

    base: State
    w: np.ndarray

    def __post_init__(self):
        w = _vec(self.w, "w")
        if w.size != self.base.n:
            raise ValueError("one vorticity per layer is required")
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.base.n

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.base.as_vector(), self.w])

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "AugmentedState":
        x = np.asarray(x, dtype=float)
        if x.size % 4:
            raise ValueError("augmented vector length must be a multiple of 4")
        n = x.size // 4
        return cls(State.from_vector(x[: 3 * n]), x[3 * n :])


@dataclass(frozen=True)
class PhysicalParams:
    g: float = 9.81
    f: float = 0.0
    grad_b: tuple[float, float] = field(default=(0.0, 0.0))

    def __post_init__(self):
        if not (np.isfinite(self.g) and self.g > 0):
            raise ValueError("g must be positive")
        if not np.isfinite(self.f):
            raise ValueError("f must be finite")
        gb = tuple(float(x) for x in self.grad_b)
        if len(gb) != 2 or not all(np.isfinite(gb)):
            raise ValueError("grad_b must be a finite 2-vector")
        object.__setattr__(self, "grad_b", gb)


def build_gamma_matrix(gamma: GammaLike) -> np.ndarray:
    """Matrix with entries ``prod_{j=k}^{i-1} gamma_j`` below the diagonal, 1 elsewhere."""
    g = as_gamma(gamma).gamma
    n = g.size + 1
    G = np.ones((n, n))
    for i in range(n):
        for k in range(i):
            G[i, k] = np.prod(g[k:i])
    return G


def build_Ax(state: State, gamma: GammaLike) -> np.ndarray:
    """Flux Jacobian in the x direction, order ``3n``."""
    gamma = as_gamma(gamma)
    _check_n(state, gamma)
    n = state.n
    Z = np.zeros((n, n))
    V = np.diag(state.u)
    return np.block(
        [
            [V, np.diag(state.h), Z],
            [build_gamma_matrix(gamma), V, Z],
            [Z, Z, V],
        ]
    )


def build_Ay(state: State, gamma: GammaLike) -> np.ndarray:
    """Flux Jacobian in the y direction, order ``3n``."""
    gamma = as_gamma(gamma)
    _check_n(state, gamma)
    n = state.n
    Z = np.zeros((n, n))
    V = np.diag(state.v)
    return np.block(
        [
            [V, Z, np.diag(state.h)],
            [Z, V, Z],
            [build_gamma_matrix(gamma), Z, V],
        ]
    )


def cos_sin(theta: float) -> tuple[float, float]:
    """Cosine and sine with round-off below 1e-15 snapped to zero."""
    c, s = float(np.cos(theta)), float(np.sin(theta))
    return (0.0 if abs(c) < 1e-15 else c), (0.0 if abs(s) < 1e-15 else s)


def build_A_theta(state: State, gamma: GammaLike, theta: float) -> np.ndarray:
    """Symbol ``cos(theta) A_x + sin(theta) A_y`` in direction ``theta``."""
    c, s = cos_sin(theta)
    if s == 0.0:
        return c * build_Ax(state, gamma)
    if c == 0.0:
        return s * build_Ay(state, gamma)
    return c * build_Ax(state, gamma) + s * build_Ay(state, gamma)


def rotation_matrix(n: int, theta: float) -> np.ndarray:
    """Orthogonal ``3n x 3n`` matrix rotating each layer's velocity by ``-theta``."""
    c, s = cos_sin(theta)
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[I, Z, Z], [Z, c * I, s * I], [Z, -s * I, c * I]])


def rotate_state(state: State, theta: float) -> State:
    """Express velocities in the frame whose x axis points along ``theta``."""
    c, s = cos_sin(theta)
    return State(state.h, c * state.u + s * state.v, -s * state.u + c * state.v)


def source_term(state: State, params: PhysicalParams) -> np.ndarray:
    """Coriolis and bottom-slope source vector of length ``3n``."""
    n = state.n
    b = np.zeros(3 * n)
    bx, by = params.grad_b
    b[n : 2 * n] = -params.f * state.v + bx
    b[2 * n :] = params.f * state.u + by
    return b


def energy(state: State, gamma: GammaLike, dimensions: int = 1) -> float:
    """Total energy; ``dimensions=1`` ignores ``v``, ``dimensions=2`` includes it."""
    if dimensions not in (1, 2):
        raise ValueError("dimensions must be 1 or 2")
    gamma = as_gamma(gamma)
    _check_n(state, gamma)
    a = gamma.alpha()
    h, u = state.h, state.u
    kin = u**2 + (state.v**2 if dimensions == 2 else 0.0)
    e = 0.5 * np.sum(a * h * (kin + h))
    # sum_{i<j} alpha_i h_i h_j = sum_i alpha_i h_i * (heights strictly below i)
    below = np.cumsum(h[::-1])[::-1] - h
    return float(e + np.sum(a * h * below))


def e1_hessian(state: State, gamma: GammaLike) -> np.ndarray:
    """Closed-form Hessian of the 1-D energy in the variables ``(h, u)``."""
    gamma = as_gamma(gamma)
    _check_n(state, gamma)
    a = gamma.alpha()
    n = state.n
    idx = np.arange(n)
    DG = a[np.minimum.outer(idx, idx)]
    DV = np.diag(a * state.u)
    return np.block([[DG, DV], [DV, np.diag(a * state.h)]])


def rescale_physical(h_physical: Sequence[float], g: float) -> np.ndarray:
    """Multiply physical heights (m) by ``g``."""
    if not g > 0:
        raise ValueError("g must be positive")
    return np.asarray(h_physical, dtype=float) * g
