"""Hyperbolicity classification, growth probes, wave nature and parameter sweeps.

A state is judged along three independent routes:

* symmetrizability, through the sufficient velocity-deviation test of
  :func:`stratiwave.symmetrizer.check_symmetrizable`;
* the asymptotic criterion ``phi_i - du_i^2 - dv_i^2 > 0`` on every
  interface, available when the density ratios define a regime;
* the numeric spectrum of ``A(theta)`` on a grid of directions, which is
  the authoritative route when the others disagree.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import numerics
from .asymptotics import predict_all
from .model import DensityRatios, GammaLike, State, as_gamma, build_A_theta, build_Ax
from .stratification import RegimeError, all_supports, fit_regime, phi_sigma, validate_regime
from .symmetrizer import check_symmetrizable

HYPERBOLIC = "hyperbolic_diagonalizable"
SUSPECT = "hyperbolic_nondiagonalizable_suspect"
NON_HYPERBOLIC = "non_hyperbolic"

GENUINELY_NONLINEAR = "genuinely_nonlinear"
LINEARLY_DEGENERATE = "linearly_degenerate"
INDETERMINATE = "indeterminate"

FD_REL_STEP = 1e-6
TOL_LD = 1e-8
TOL_GNL = 1e-4
MAX_SWEEP_POINTS = 1_000_000


@dataclass(frozen=True)
class ClassifyOptions:
    theta_samples: int = 32
    tol_im: float = 1e-8
    cond_cap: float = 1e8
    tau_max: Optional[float] = None
    tau_samples: int = 64
    symmetrizer_bound: str = "refined"

    def __post_init__(self):
        if self.theta_samples < 1:
            raise ValueError("theta_samples must be at least 1")
        if not (self.tol_im > 0 and self.cond_cap > 0):
            raise ValueError("tolerances must be positive")
        if self.tau_max is not None and not self.tau_max > 0:
            raise ValueError("tau_max must be positive")
        if self.symmetrizer_bound not in ("refined", "explicit"):
            raise ValueError("symmetrizer_bound must be 'refined' or 'explicit'")


@dataclass(frozen=True)
class NumericSpectrum:
    verdict: str
    max_imag: float
    spectral_radius: float
    cond: float
    worst_theta: float


@dataclass(frozen=True)
class HyperbolicityVerdict:
    """Outcome of the three routes.

    ``asymptotic_criterion`` is ``None`` when the density ratios do not
    define a regime (single layer, duplicate gaps, ratios outside (0, 1)).
    """

    symmetrizable: bool
    symmetrizer_margins: np.ndarray
    asymptotic_criterion: Optional[bool]
    asymptotic_margins: Optional[np.ndarray]
    numeric: str
    max_imag: float
    spectral_radius: float
    cond: float
    worst_theta: float
    growth: Optional[float] = None
    warnings: tuple = field(default=())

    @property
    def is_hyperbolic(self) -> bool:
        return self.numeric != NON_HYPERBOLIC


@dataclass(frozen=True)
class WaveNature:
    label: str
    nature: str
    value: float
    scale: float


def theta_grid(samples: int) -> np.ndarray:
    """``samples`` uniform directions in ``[0, 2 pi)``."""
    return 2.0 * np.pi * np.arange(samples) / samples


def numeric_spectrum(
    matrix_of_theta: Callable[[float], np.ndarray],
    thetas: Sequence[float],
    tol_im: float = 1e-8,
    cond_cap: float = 1e8,
) -> NumericSpectrum:
    """Numeric hyperbolicity verdict of a direction-dependent symbol.

    ``max_imag`` is the absolute imaginary part at the direction where the
    relative imaginary part is largest.
    """
    worst_rel, worst_theta, max_imag = -1.0, 0.0, 0.0
    rho_all, cond_all, bad = 0.0, 1.0, False
    for th in thetas:
        A = matrix_of_theta(float(th))
        try:
            res = numerics.eig_dense(A)
            w = res.values
            cond = numerics.eigvec_condition(A, res.values, res.right)
        except numerics.EigenSolveError:
            w = numerics.eigvals_dense(A)
            cond = np.inf
        rho = max(float(np.max(np.abs(w))), numerics.ABS_FLOOR)
        im = float(np.max(np.abs(w.imag)))
        if im / rho > worst_rel:
            worst_rel, worst_theta, max_imag = im / rho, float(th), im
        bad = bad or im > tol_im * rho
        rho_all = max(rho_all, rho)
        cond_all = max(cond_all, cond)
    if bad:
        verdict = NON_HYPERBOLIC
    elif cond_all > cond_cap:
        verdict = SUSPECT
    else:
        verdict = HYPERBOLIC
    return NumericSpectrum(verdict, max_imag, rho_all, cond_all, worst_theta)


def asymptotic_margins(state: State, gamma: GammaLike) -> Optional[np.ndarray]:
    """Per-interface ``phi_i - (u_{i+1} - u_i)^2 - (v_{i+1} - v_i)^2``, or ``None`` without a regime."""
    try:
        scheme = fit_regime(state, gamma)
    except RegimeError:
        return None
    sups = all_supports(scheme, state.h)
    du = np.diff(state.u)
    dv = np.diff(state.v)
    phi = np.array([phi_sigma(s.i, s, gamma) for s in sups])
    return phi - du**2 - dv**2


def classify(state: State, gamma: GammaLike, options: Optional[ClassifyOptions] = None) -> HyperbolicityVerdict:
    """Classify a state along all three routes."""
    opts = options or ClassifyOptions()
    gamma = as_gamma(gamma)
    warnings: list[str] = []
    if np.any(state.h <= 0):
        warnings.append("non-positive height: symmetrizer and asymptotic routes refused")
    sym = check_symmetrizable(state, gamma, opts.symmetrizer_bound)

    margins = None
    asym = None
    if np.all(state.h > 0):
        margins = asymptotic_margins(state, gamma)
    if margins is not None:
        asym = bool(np.all(margins > 0))
        scheme = fit_regime(state, gamma)
        rep = validate_regime(state, scheme)
        for k in np.flatnonzero(rep.pi_flags):
            warnings.append(f"regime check: shear coefficient large at interface {k + 1}")
        for k in np.flatnonzero(rep.varpi_flags):
            warnings.append(f"regime check: height ratio extreme at interface {k + 1}")
    elif state.n > 1:
        warnings.append("asymptotic criterion not applicable: density ratios do not define a regime")

    num = numeric_spectrum(
        lambda th: build_A_theta(state, gamma, th), theta_grid(opts.theta_samples), opts.tol_im, opts.cond_cap
    )
    if sym.passed and num.verdict == NON_HYPERBOLIC:
        warnings.append("symmetrizable but numerically non-hyperbolic: inclusion violated")
    if asym is False and num.verdict != NON_HYPERBOLIC:
        warnings.append("regime validity: asymptotic criterion fails while the numeric spectrum is real")
    if asym is True and num.verdict == NON_HYPERBOLIC:
        warnings.append("regime validity: asymptotic criterion holds while the numeric spectrum is complex")

    growth = None
    if opts.tau_max is not None:
        growth = growth_probe(state, gamma, num.worst_theta, opts.tau_max, opts.tau_samples)

    return HyperbolicityVerdict(
        symmetrizable=sym.passed,
        symmetrizer_margins=sym.margins,
        asymptotic_criterion=asym,
        asymptotic_margins=margins,
        numeric=num.verdict,
        max_imag=num.max_imag,
        spectral_radius=num.spectral_radius,
        cond=num.cond,
        worst_theta=num.worst_theta,
        growth=growth,
        warnings=tuple(warnings),
    )


def growth_probe(state: State, gamma: GammaLike, theta: float, tau_max: float, samples: int = 64) -> float:
    """Largest ``||exp(-i tau A(theta))||`` for ``tau`` uniform on ``[0, tau_max]``."""
    if not tau_max > 0:
        raise ValueError("tau_max must be positive")
    if samples < 1:
        raise ValueError("samples must be positive")
    return numerics.matrix_exp_growth(build_A_theta(state, gamma, theta), np.linspace(0.0, tau_max, samples))


def tracked_gradient(
    matrix_fn: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    lam0: complex,
    rel_step: float = FD_REL_STEP,
) -> Optional[np.ndarray]:
    """Central-difference gradient of the eigenvalue of ``matrix_fn(x)`` nearest ``lam0``.

    Returns ``None`` if a perturbed eigenvalue moves by more than half the
    gap separating ``lam0`` from the rest of the spectrum (label jump).
    """
    x0 = np.asarray(x0, dtype=float)
    w0 = numerics.eigvals_dense(matrix_fn(x0))
    scale = 1.0 + float(np.max(np.abs(w0)))
    d = np.abs(w0 - lam0)
    others = d[d > 1e-9 * scale]
    gap = float(others.min()) if others.size else np.inf
    grad = np.zeros(x0.size)
    for k in range(x0.size):
        step = rel_step * (1.0 + abs(x0[k]))
        vals = []
        for s in (1.0, -1.0):
            x = x0.copy()
            x[k] += s * step
            w = numerics.eigvals_dense(matrix_fn(x))
            lam = w[np.argmin(np.abs(w - lam0))]
            if abs(lam - lam0) > 0.5 * gap:
                return None
            vals.append(lam)
        grad[k] = float(((vals[0] - vals[1]) / (2.0 * step)).real)
    return grad


def classify_directional(label: str, grad: Optional[np.ndarray], r: np.ndarray) -> WaveNature:
    """Classify ``grad . r`` with tolerances relative to ``|grad| |r|``."""
    if grad is None:
        return WaveNature(label, INDETERMINATE, float("nan"), float("nan"))
    value = float(grad @ r)
    scale = float(np.linalg.norm(grad) * np.linalg.norm(r))
    if abs(value) <= TOL_LD * scale:
        nature = LINEARLY_DEGENERATE
    elif abs(value) >= TOL_GNL * scale:
        nature = GENUINELY_NONLINEAR
    else:
        nature = INDETERMINATE
    return WaveNature(label, nature, value, scale)


def real_eigvec(v: np.ndarray) -> np.ndarray:
    """Real representative of an eigenvector of a real eigenvalue (unit norm)."""
    k = int(np.argmax(np.abs(v)))
    v = v * (abs(v[k]) / v[k])
    v = v.real
    return v / np.linalg.norm(v)


def wave_nature(
    label: str,
    state: State,
    gamma: GammaLike,
    scheme=None,
    vector_source: str = "asymptotic",
) -> WaveNature:
    """Nature of the characteristic field ``label`` of ``A_x``.

    The eigenvalue is the numeric one nearest the labelled prediction and
    its gradient is taken by central differences over the ``3n`` state
    coordinates. ``vector_source`` picks the right eigenvector: the
    closed-form prediction (``"asymptotic"``) or the numeric one.
    """
    gamma = as_gamma(gamma)
    preds = {p.label: p for p in predict_all(state, gamma, scheme)}
    if label not in preds:
        raise KeyError(f"unknown label {label!r}; expected one of {sorted(preds)}")
    pred = preds[label]
    A = build_Ax(state, gamma)
    res = numerics.eig_dense(A)
    k = int(np.argmin(np.abs(res.values - pred.value)))
    lam0 = res.values[k]
    rho = max(float(np.max(np.abs(res.values))), numerics.ABS_FLOOR)
    if abs(lam0.imag) > 1e-8 * rho:
        return WaveNature(label, INDETERMINATE, float("nan"), float("nan"))
    if vector_source == "asymptotic" and pred.right_vec is not None:
        r = pred.right_vec
    elif vector_source in ("asymptotic", "numeric"):
        r = real_eigvec(res.right[:, k])
    else:
        raise ValueError("vector_source must be 'asymptotic' or 'numeric'")

    def fn(x):
        return build_Ax(State.from_vector(x), gamma)

    grad = tracked_gradient(fn, state.as_vector(), lam0)
    return classify_directional(label, grad, r)


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepAxis:
    """Coordinate ``h{k}``, ``u{k}``, ``v{k}``, ``gamma{k}`` or ``du{k}`` (1-based).

    ``du{k}`` sets ``u_{k+1} = u_k + value``. ``steps`` is the number of
    samples; 0 or 1 gives the single value ``lo``.
    """

    coord: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError(f"axis {self.coord}: bounds must be finite")
        if self.hi < self.lo:
            raise ValueError(f"axis {self.coord}: hi < lo")
        if self.steps < 0:
            raise ValueError(f"axis {self.coord}: negative step count")
        _parse_coord(self.coord)

    def values(self) -> np.ndarray:
        if self.steps <= 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class SweepRow:
    coords: tuple
    symmetrizable: bool
    asymptotic: Optional[bool]
    numeric: str
    max_imag: float
    margin_min: float


def _parse_coord(coord: str) -> tuple[str, int]:
    for kind in ("gamma", "du", "h", "u", "v"):
        if coord.startswith(kind) and coord[len(kind) :].isdigit():
            return kind, int(coord[len(kind) :])
    raise ValueError(f"unknown sweep coordinate {coord!r}")


def apply_coord(state: State, gamma: DensityRatios, coord: str, value: float) -> tuple[State, DensityRatios]:
    kind, k = _parse_coord(coord)
    n = state.n
    limit = n - 1 if kind in ("gamma", "du") else n
    if not 1 <= k <= limit:
        raise ValueError(f"coordinate {coord!r} out of range for {n} layers")
    if kind == "gamma":
        g = gamma.gamma.copy()
        g[k - 1] = value
        return state, DensityRatios(g)
    if kind == "du":
        u = state.u.copy()
        u[k] = u[k - 1] + value
        return state.replace(u=u), gamma
    arr = getattr(state, kind).copy()
    arr[k - 1] = value
    return state.replace(**{kind: arr}), gamma


def _margin_min(v: HyperbolicityVerdict) -> float:
    # Asymptotic margins when a regime exists, symmetrizer margins otherwise.
    m = v.asymptotic_margins if v.asymptotic_margins is not None else v.symmetrizer_margins
    return float(np.min(m)) if np.size(m) else float("nan")


def sweep(
    base_state: State,
    gamma: GammaLike,
    axes: Sequence[SweepAxis],
    options: Optional[ClassifyOptions] = None,
    threads: Optional[int] = None,
) -> list[SweepRow]:
    """Classify every point of a grid of at most two axes, row-major order."""
    gamma = as_gamma(gamma)
    axes = list(axes)
    if not 1 <= len(axes) <= 2:
        raise ValueError("a sweep takes one or two axes")
    grids = [a.values() for a in axes]
    total = int(np.prod([g.size for g in grids]))
    if total > MAX_SWEEP_POINTS:
        raise ValueError(f"sweep grid has {total} points, limit {MAX_SWEEP_POINTS}")
    points = [tuple(p) for p in np.array(np.meshgrid(*grids, indexing="ij")).reshape(len(axes), -1).T]

    def one(p):
        st, g = base_state, gamma
        for ax, val in zip(axes, p):
            st, g = apply_coord(st, g, ax.coord, float(val))
        v = classify(st, g, options)
        return SweepRow(
            coords=tuple(float(x) for x in p),
            symmetrizable=v.symmetrizable,
            asymptotic=v.asymptotic_criterion,
            numeric=v.numeric,
            max_imag=v.max_imag,
            margin_min=_margin_min(v),
        )

    if threads is None:
        threads = int(os.environ.get("STRATIWAVE_THREADS", "1") or 1)
    if threads <= 1:
        return [one(p) for p in points]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(one, points))
