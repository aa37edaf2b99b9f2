"""Conservative augmented model with the vertical vorticity as extra unknown.

The augmented vector is ``(h, u, v, w)`` of length ``4n`` with
``w_i = dv_i/dx - du_i/dy``. Its x-symbol has a zero third block row, so
``det(A^a_x - lam I) = (-lam)^n det(A_x - lam I)``: the spectrum is the base
spectrum plus ``n`` zero eigenvalues, and the base advection speeds
``u_i`` now carry the vorticity (``vortical(i)`` family).

The module also covers the one-dimensional change of variables
``hat_h_i = alpha_i h_i`` under which ``A_x`` becomes ``P * Hessian`` of the
energy, and the commutant of that matrix.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import numerics
from .asymptotics import SIGNS, baroclinic_label, barotropic_label, predict_all
from .charpoly import SpectrumReport, full_spectrum
from .hyperbolicity import (
    ClassifyOptions,
    LINEARLY_DEGENERATE,
    WaveNature,
    classify_directional,
    numeric_spectrum,
    real_eigvec,
    theta_grid,
    tracked_gradient,
)
from .model import AugmentedState, GammaLike, State, as_gamma, build_gamma_matrix, cos_sin
from .symmetrizer import check_symmetrizable_augmented

DEGENERATE_LIFT_TOL = 1e-10


class DegenerateLiftError(ValueError):
    """An eigenvector lift divides by a vanishing ``lam - u_k`` or ``lam``."""


@dataclass(frozen=True)
class HatState:
    """Density-weighted heights ``hat_h = alpha h`` and velocities ``hat_u = u``."""

    hat_h: np.ndarray
    hat_u: np.ndarray

    def __post_init__(self):
        hh = np.asarray(self.hat_h, dtype=float)
        hu = np.asarray(self.hat_u, dtype=float)
        if hh.shape != hu.shape or hh.ndim != 1:
            raise ValueError("hat_h and hat_u must be 1-D of equal length")
        object.__setattr__(self, "hat_h", hh)
        object.__setattr__(self, "hat_u", hu)

    @property
    def n(self) -> int:
        return int(self.hat_h.size)


@dataclass(frozen=True)
class GridField:
    """Velocities and vorticity sampled on a regular grid.

    Arrays have shape ``(n_layers, nx, ny)`` with ``i`` along x and ``j``
    along y.
    """

    dx: float
    dy: float
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(a, dtype=float) for a in (self.u, self.v, self.w)]
        if any(a.ndim != 3 for a in arrs) or not (arrs[0].shape == arrs[1].shape == arrs[2].shape):
            raise ValueError("u, v, w must share a shape (layers, nx, ny)")
        if arrs[0].shape[1] < 3 or arrs[0].shape[2] < 3:
            raise ValueError("grid too small: nx and ny must be at least 3")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("grid spacings must be positive")
        for name, a in zip("uvw", arrs):
            object.__setattr__(self, name, a)

    @property
    def nx(self) -> int:
        return int(self.u.shape[1])

    @property
    def ny(self) -> int:
        return int(self.u.shape[2])


@dataclass(frozen=True)
class AugmentedVerdict:
    symmetrizable: bool
    delta_a: float
    u0: tuple
    numeric: str
    max_imag: float
    cond: float
    wave_natures: dict = field(default_factory=dict)
    warnings: tuple = field(default=())


# ---------------------------------------------------------------------------
# matrices


def build_Aa_x(aug: AugmentedState, gamma: GammaLike, f: float = 0.0) -> np.ndarray:
    """x-symbol of order ``4n``; its third block row is zero."""
    s = aug.base
    n = s.n
    Z = np.zeros((n, n))
    Vx, Vy, H = np.diag(s.u), np.diag(s.v), np.diag(s.h)
    W = np.diag(aug.w + f)
    G = build_gamma_matrix(as_gamma(gamma))
    return np.block([[Vx, H, Z, Z], [G, Vx, Vy, Z], [Z, Z, Z, Z], [Z, W, Z, Vx]])


def build_Aa_y(aug: AugmentedState, gamma: GammaLike, f: float = 0.0) -> np.ndarray:
    """y-symbol of order ``4n``; its second block row is zero."""
    s = aug.base
    n = s.n
    Z = np.zeros((n, n))
    Vx, Vy, H = np.diag(s.u), np.diag(s.v), np.diag(s.h)
    W = np.diag(aug.w + f)
    G = build_gamma_matrix(as_gamma(gamma))
    return np.block([[Vy, Z, H, Z], [Z, Z, Z, Z], [G, Vx, Vy, Z], [Z, Z, W, Vy]])


def build_Aa_theta(aug: AugmentedState, gamma: GammaLike, f: float, theta: float) -> np.ndarray:
    c, s = cos_sin(theta)
    if s == 0.0:
        return c * build_Aa_x(aug, gamma, f)
    if c == 0.0:
        return s * build_Aa_y(aug, gamma, f)
    return c * build_Aa_x(aug, gamma, f) + s * build_Aa_y(aug, gamma, f)


def rotation_matrix_aug(n: int, theta: float) -> np.ndarray:
    """``blockdiag(P(theta), I_n)``: rotates velocities, leaves ``h`` and ``w``."""
    c, s = cos_sin(theta)
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[I, Z, Z, Z], [Z, c * I, s * I, Z], [Z, -s * I, c * I, Z], [Z, Z, Z, I]])


def rotate_aug(aug: AugmentedState, theta: float) -> AugmentedState:
    return AugmentedState.from_vector(rotation_matrix_aug(aug.n, theta) @ aug.as_vector())


# ---------------------------------------------------------------------------
# spectrum and eigenvectors


def augmented_spectrum(aug: AugmentedState, gamma: GammaLike, f: float = 0.0, scheme=None) -> SpectrumReport:
    """Base spectrum (advective speeds relabelled ``vortical(i)``) plus ``n`` zeros."""
    base = full_spectrum(aug.base, gamma, scheme)
    labels = [lab.replace("advective", "vortical") if lab else lab for lab in base.labels]
    n = aug.n
    values = np.concatenate([base.values, np.zeros(n, dtype=complex)])
    labels += [f"zero({i + 1})" for i in range(n)]
    return SpectrumReport(values=values, labels=tuple(labels))


def spectrum_relation_residual(aug: AugmentedState, gamma: GammaLike, lam, f: float = 0.0) -> float:
    """Relative gap between ``det(A^a_x - lam I)`` and ``(-lam)^n det(A_x - lam I)``.

    The ``n`` zero eigenvalues contribute ``(0 - lam)^n``, hence the sign
    ``(-1)^n`` in front of ``lam^n``.
    """
    from .model import build_Ax

    Aa = build_Aa_x(aug, gamma, f)
    A = build_Ax(aug.base, gamma)
    lhs = np.linalg.det(Aa - lam * np.eye(Aa.shape[0]))
    rhs = (-lam) ** aug.n * np.linalg.det(A - lam * np.eye(A.shape[0]))
    return float(abs(lhs - rhs) / (1.0 + abs(lhs)))


def _embed(v3: np.ndarray, n: int) -> np.ndarray:
    return np.concatenate([v3, np.zeros(n)])


def _base_pair(label: str, aug: AugmentedState, gamma, base_source: str, scheme):
    s = aug.base
    preds = {p.label: p for p in predict_all(s, gamma, scheme)}
    if label not in preds:
        raise KeyError(f"unknown label {label!r}")
    p = preds[label]
    if base_source == "asymptotic":
        if p.right_vec is None:
            raise ValueError(f"{label}: complex eigenvalue, no real eigenvector")
        return float(p.value.real), p.right_vec, p.left_vec
    if base_source != "numeric":
        raise ValueError("base_source must be 'asymptotic' or 'numeric'")
    from .model import build_Ax

    res = numerics.eig_dense(build_Ax(s, gamma))
    k = int(np.argmin(np.abs(res.values - p.value)))
    lam = res.values[k]
    if abs(lam.imag) > 1e-8 * max(1.0, abs(lam)):
        raise ValueError(f"{label}: complex eigenvalue, no real eigenvector")
    return float(lam.real), real_eigvec(res.right[:, k]), real_eigvec(res.left[k])


def augmented_eigvecs(
    label: str,
    aug: AugmentedState,
    gamma: GammaLike,
    f: float = 0.0,
    base_source: str = "asymptotic",
    scheme=None,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Eigenvalue and right/left eigenvectors of ``A^a_x`` for one family.

    * ``barotropic(+-)`` and ``baroclinic(i,+-)``: base vectors lifted with
      ``r_w,k = (w_k + f) r_u,k / (lam - u_k)`` and ``l_v,k = v_k l_u,k / lam``.
    * ``vortical(i)``: ``lam = u_i``, ``r = e'_{3n+i}``,
      ``l = -(w_i + f) e'_i + h_i e'_{3n+i}``.
    * ``zero(i)``: ``lam = 0``, ``l = e'_{2n+i}``; ``r = e'_{2n+i}`` when
      ``v_i = 0``, otherwise the exact null vector with ``r_v = e_i``.

    Raises
    ------
    DegenerateLiftError
        When a lift divides by ``|lam - u_k|`` or ``|lam|`` below
        ``1e-10`` times the spectral radius.
    """
    gamma = as_gamma(gamma)
    s = aug.base
    n = s.n
    Wf = aug.w + f
    A = build_Aa_x(aug, gamma, f)
    tol = DEGENERATE_LIFT_TOL * max(np.linalg.norm(A, 2), numerics.ABS_FLOOR)

    if label.startswith("vortical("):
        i = int(label[len("vortical(") : -1])
        r = np.zeros(4 * n)
        r[3 * n + i - 1] = 1.0
        l = np.zeros(4 * n)
        l[i - 1] = -Wf[i - 1]
        l[3 * n + i - 1] = s.h[i - 1]
        return float(s.u[i - 1]), r, l

    if label.startswith("zero("):
        i = int(label[len("zero(") : -1])
        l = np.zeros(4 * n)
        l[2 * n + i - 1] = 1.0
        r = np.zeros(4 * n)
        if s.v[i - 1] == 0.0:
            r[2 * n + i - 1] = 1.0
            return 0.0, r, l
        # Solve A^1 (r_h, r_u) = -(0, V_y e_i), then r_w = -W r_u / V_x.
        A1 = A[: 2 * n, : 2 * n]
        rhs = np.zeros(2 * n)
        rhs[n + i - 1] = -s.v[i - 1]
        try:
            hu = np.linalg.solve(A1, rhs)
        except np.linalg.LinAlgError as exc:
            raise DegenerateLiftError("zero family: the (h, u) block is singular") from exc
        ru = hu[n:]
        need = np.abs(Wf * ru) > 0
        if np.any(np.abs(s.u[need]) <= tol):
            raise DegenerateLiftError("zero family: u_k = 0 where the vorticity slot is needed")
        rw = np.zeros(n)
        rw[need] = -Wf[need] * ru[need] / s.u[need]
        r[: 2 * n] = hu
        r[2 * n + i - 1] = 1.0
        r[3 * n :] = rw
        return 0.0, r, l

    lam, r3, l3 = _base_pair(label, aug, gamma, base_source, scheme)
    d = lam - s.u
    ru = r3[n : 2 * n]
    lu = l3[n : 2 * n]
    if np.any((np.abs(d) <= tol) & (np.abs(Wf * ru) > 0)):
        raise DegenerateLiftError(f"{label}: eigenvalue coincides with an advection speed")
    r = _embed(r3, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        r[3 * n :] = np.where(np.abs(Wf * ru) > 0, Wf * ru / d, 0.0)
    l = _embed(l3, n)
    if np.any(s.v * lu != 0):
        if abs(lam) <= tol:
            raise DegenerateLiftError(f"{label}: zero eigenvalue with transverse velocity")
        l[2 * n : 3 * n] += s.v * lu / lam
    return lam, r, l


def augmented_labels(n: int) -> list[str]:
    labs = [barotropic_label(sg) for sg in SIGNS]
    labs += [baroclinic_label(i, sg) for i in range(1, n) for sg in SIGNS]
    labs += [f"vortical({i})" for i in range(1, n + 1)]
    labs += [f"zero({i})" for i in range(1, n + 1)]
    return labs


# ---------------------------------------------------------------------------
# hat variables and the commutant


def hat_state(state: State, gamma: GammaLike) -> HatState:
    return HatState(as_gamma(gamma).alpha() * state.h, state.u.copy())


def hat_energy(hat: HatState, gamma: GammaLike) -> float:
    """``1/2 sum hat_h_i (hat_u_i^2 + hat_h_i/alpha_i) + sum_{i<j} hat_h_i hat_h_j / alpha_j``."""
    a = as_gamma(gamma).alpha()
    hh, hu = hat.hat_h, hat.hat_u
    e = 0.5 * np.sum(hh * (hu**2 + hh / a))
    below = np.cumsum((hh / a)[::-1])[::-1] - hh / a
    return float(e + np.sum(hh * below))


def build_hatA(hat: HatState, gamma: GammaLike) -> np.ndarray:
    """``[[V_x, diag(hat_h)], [G, V_x]]`` with ``G_ik = 1/alpha_max(i,k)``.

    This is ``blockdiag(Delta, I) A_x^1 blockdiag(Delta^-1, I)`` and also
    ``P`` times the Hessian of :func:`hat_energy`, ``P`` swapping the two
    blocks.
    """
    a = as_gamma(gamma).alpha()
    n = hat.n
    idx = np.arange(n)
    G = 1.0 / a[np.maximum.outer(idx, idx)]
    V = np.diag(hat.hat_u)
    return np.block([[V, np.diag(hat.hat_h)], [G, V]])


def fd_hessian(fun, x0: np.ndarray, rel_step: float = 1e-4) -> np.ndarray:
    """Central finite-difference Hessian."""
    x0 = np.asarray(x0, dtype=float)
    m = x0.size
    steps = rel_step * (1.0 + np.abs(x0))
    Hs = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            acc = 0.0
            for si, sj, w in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
                x = x0.copy()
                x[i] += si * steps[i]
                x[j] += sj * steps[j]
                acc += w * fun(x)
            Hs[i, j] = Hs[j, i] = acc / (4.0 * steps[i] * steps[j])
    return Hs


def hatA_structure_check(hat: HatState, gamma: GammaLike) -> float:
    """``|hat A - P H_fd| / |hat A|`` with ``H_fd`` the FD Hessian of the hat energy."""
    if np.any(hat.hat_h <= 0):
        raise ValueError("heights must be positive")
    n = hat.n

    def fun(x):
        return hat_energy(HatState(x[:n], x[n:]), gamma)

    Hfd = fd_hessian(fun, np.concatenate([hat.hat_h, hat.hat_u]))
    P = np.block([[np.zeros((n, n)), np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    A = build_hatA(hat, gamma)
    return float(np.linalg.norm(A - P @ Hfd) / np.linalg.norm(A))


def frobenius_commutant(hat: HatState, gamma: GammaLike, tol: float = 1e-8) -> tuple[int, list[np.ndarray]]:
    """Dimension and a basis of ``{X : X hat A = hat A X}``.

    With row-major vectorisation the commutator is
    ``(I kron hat A^T - hat A kron I) vec(X)``.
    """
    if 2 * hat.n > 24:
        raise ValueError("commutant solve limited to 2n <= 24")
    A = build_hatA(hat, gamma)
    m = A.shape[0]
    K = np.kron(np.eye(m), A.T) - np.kron(A, np.eye(m))
    basis = numerics.nullspace_basis(K, tol)
    mats = [basis[:, k].real.reshape(m, m) for k in range(basis.shape[1])]
    return len(mats), mats


def power_span_residual(hat: HatState, gamma: GammaLike, basis: Sequence[np.ndarray]) -> float:
    """Largest relative distance of ``hat A^k`` (``k < 2n``) to the span of ``basis``."""
    A = build_hatA(hat, gamma)
    m = A.shape[0]
    B = np.column_stack([X.ravel() for X in basis]) if len(basis) else np.zeros((m * m, 0))
    Q, _ = np.linalg.qr(B)
    worst = 0.0
    P = np.eye(m)
    for _ in range(m):
        v = P.ravel()
        res = v - Q @ (Q.T @ v)
        worst = max(worst, float(np.linalg.norm(res) / np.linalg.norm(v)))
        P = P @ A
    return worst


# ---------------------------------------------------------------------------
# vorticity compatibility


def curl(field_: GridField) -> np.ndarray:
    """Second-order central ``dv/dx - du/dy`` on interior points, shape ``(layers, nx-2, ny-2)``."""
    dvdx = (field_.v[:, 2:, 1:-1] - field_.v[:, :-2, 1:-1]) / (2.0 * field_.dx)
    dudy = (field_.u[:, 1:-1, 2:] - field_.u[:, 1:-1, :-2]) / (2.0 * field_.dy)
    return dvdx - dudy


def vorticity_compatibility(field_: GridField) -> np.ndarray:
    """Per-layer max ``|w - curl(u, v)|`` over interior points."""
    return np.max(np.abs(field_.w[:, 1:-1, 1:-1] - curl(field_)), axis=(1, 2))


def read_grid_csv(path, dx: float, dy: float) -> GridField:
    """Read a CSV with header ``layer,i,j,u,v,w`` into a :class:`GridField`.

    Layers are numbered by their sorted distinct ``layer`` values; every
    ``(layer, i, j)`` with ``0 <= i < nx``, ``0 <= j < ny`` must appear
    exactly once.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != ["layer", "i", "j", "u", "v", "w"]:
            raise ValueError("grid CSV header must be layer,i,j,u,v,w")
        rows = [(int(r["layer"]), int(r["i"]), int(r["j"]), float(r["u"]), float(r["v"]), float(r["w"])) for r in reader]
    if not rows:
        raise ValueError("grid CSV has no rows")
    data = np.array(rows, dtype=float)
    layers = np.unique(data[:, 0])
    nx = int(data[:, 1].max()) + 1
    ny = int(data[:, 2].max()) + 1
    if data[:, 1].min() < 0 or data[:, 2].min() < 0:
        raise ValueError("grid indices must be non-negative")
    if len(rows) != layers.size * nx * ny:
        raise ValueError("grid CSV does not cover the full grid exactly once")
    arrs = np.full((3, layers.size, nx, ny), np.nan)
    li = np.searchsorted(layers, data[:, 0])
    ii = data[:, 1].astype(int)
    jj = data[:, 2].astype(int)
    for c in range(3):
        arrs[c, li, ii, jj] = data[:, 3 + c]
    if np.isnan(arrs).any():
        raise ValueError("grid CSV has duplicate or missing points")
    return GridField(dx=dx, dy=dy, u=arrs[0], v=arrs[1], w=arrs[2])


# ---------------------------------------------------------------------------
# classification


def augmented_wave_nature(
    label: str, aug: AugmentedState, gamma: GammaLike, f: float = 0.0, scheme=None
) -> WaveNature:
    """Wave nature of an augmented family.

    The vortical speed ``u_i`` does not depend on ``w_i`` and its right
    vector is ``e'_{3n+i}``, so the field is linearly degenerate exactly.
    Other families use the tracked finite-difference gradient.
    """
    gamma = as_gamma(gamma)
    n = aug.n
    lam, r, _ = augmented_eigvecs(label, aug, gamma, f, scheme=scheme)
    if label.startswith("vortical("):
        i = int(label[len("vortical(") : -1])
        grad = np.zeros(4 * n)
        grad[n + i - 1] = 1.0  # d u_i / d u_i
        return classify_directional(label, grad, r)

    def fn(x):
        return build_Aa_x(AugmentedState.from_vector(x), gamma, f)

    grad = tracked_gradient(fn, aug.as_vector(), lam)
    return classify_directional(label, grad, r)


def classify_augmented(
    aug: AugmentedState,
    gamma: GammaLike,
    f: float = 0.0,
    u0: Optional[Sequence[float]] = None,
    options: Optional[ClassifyOptions] = None,
) -> AugmentedVerdict:
    """Friedrichs test, numeric spectrum and wave nature of families ``2n+1..4n``.

    ``u0`` defaults to the plain means of ``u`` and ``v``. The symmetrizer
    itself carries no reference velocity, so a positive ``delta_a`` for
    ``u0 != 0`` certifies the state shifted by ``u0``; the spectrum, and
    hence hyperbolicity, is unchanged by that shift.
    """
    opts = options or ClassifyOptions()
    gamma = as_gamma(gamma)
    s = aug.base
    if u0 is None:
        u0 = (float(np.mean(s.u)), float(np.mean(s.v)))
    u0 = (float(u0[0]), float(u0[1]))
    warnings = []
    ver = check_symmetrizable_augmented(aug, gamma, u0, f)
    da = float(ver.margins[0])
    if u0 != (0.0, 0.0):
        warnings.append("delta_a evaluated with a shifted reference velocity; certifies the shifted frame")

    num = numeric_spectrum(
        lambda th: build_Aa_theta(aug, gamma, f, th), theta_grid(opts.theta_samples), opts.tol_im, opts.cond_cap
    )
    natures = {}
    for i in range(1, aug.n + 1):
        for lab in (f"vortical({i})", f"zero({i})"):
            try:
                natures[lab] = augmented_wave_nature(lab, aug, gamma, f)
            except DegenerateLiftError as exc:
                warnings.append(f"{lab}: {exc}")
    if any(w.nature != LINEARLY_DEGENERATE for w in natures.values()):
        warnings.append("a vortical or zero family was not found linearly degenerate")
    return AugmentedVerdict(
        symmetrizable=ver.passed,
        delta_a=da,
        u0=u0,
        numeric=num.verdict,
        max_imag=num.max_imag,
        cond=num.cond,
        wave_natures=natures,
        warnings=tuple(warnings),
    )
