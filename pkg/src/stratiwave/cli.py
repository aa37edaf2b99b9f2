"""Command-line entry point: ``stratiwave <command> --config <path> [options]``.

The configuration is a JSON object. Reports are JSON (CSV for ``sweep``),
written atomically so a failed run never leaves a partial file.

Exit codes: 0 completed, 2 completed with a non-hyperbolic verdict, 1 error.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .augmented import augmented_spectrum, classify_augmented, read_grid_csv, vorticity_compatibility
from .asymptotics import predict_all
from .boundary import characteristic_vars
from .charpoly import full_spectrum
from .hyperbolicity import (
    NON_HYPERBOLIC,
    ClassifyOptions,
    SweepAxis,
    classify,
    sweep,
    wave_nature,
)
from .model import AugmentedState, DensityRatios, PhysicalParams, State, build_Ax
from .numerics import eigvals_dense
from .stratification import RegimeError, all_supports, fit_regime, validate_regime
from .symmetrizer import build_Sx, check_symmetrizable, delta_bounds

COMMANDS = ("spectrum", "hyperbolicity", "symmetrizer", "sweep", "augmented", "boundary", "wave-nature")
SWEEP_HEADER = "axis1,axis2,symmetrizable,asymptotic,numeric,max_imag,margin_min"

_ALLOWED = {
    "n", "h", "u", "v", "w", "gamma", "rho", "g", "f", "grad_b", "height_units",
    "theta_samples", "tol_im", "cond_cap", "tau_max", "sweep", "normal", "labels", "u0", "grid",
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    state: State
    gamma: DensityRatios
    params: PhysicalParams
    w: Optional[np.ndarray] = None
    height_units: str = "rescaled"
    options: ClassifyOptions = field(default_factory=ClassifyOptions)
    sweep_axes: tuple = ()
    normal: tuple = (1.0, 0.0)
    labels: Optional[tuple] = None
    u0: Optional[tuple] = None
    grid: Optional[dict] = None
    echo: dict = field(default_factory=dict)

    def physical_state(self) -> State:
        """State with heights in metres, for the boundary formulas."""
        return self.state.replace(h=self.state.h / self.params.g)

    @property
    def n(self) -> int:
        return self.state.n


def _num_list(doc: dict, key: str, n: Optional[int] = None) -> np.ndarray:
    val = doc[key]
    if not isinstance(val, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in val):
        raise ConfigError(f"{key}: expected a list of numbers")
    arr = np.asarray(val, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{key}: non-finite value")
    if n is not None and arr.size != n:
        raise ConfigError(f"{key}: expected {n} entries, got {arr.size}")
    return arr


def _number(doc: dict, key: str, default):
    if key not in doc:
        return default
    x = doc[key]
    if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
        raise ConfigError(f"{key}: expected a finite number")
    return x


def parse_config(text: str) -> RunConfig:
    """Validate a JSON configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    extra = sorted(set(doc) - _ALLOWED)
    if extra:
        raise ConfigError(f"unknown field(s): {', '.join(extra)}")
    if "h" not in doc or "u" not in doc:
        raise ConfigError("h and u are required")
    h = _num_list(doc, "h")
    n = int(doc.get("n", h.size))
    if n != h.size or n < 1:
        raise ConfigError(f"n: {n} does not match {h.size} heights")
    u = _num_list(doc, "u", n)
    v = _num_list(doc, "v", n) if "v" in doc else np.zeros(n)
    w = _num_list(doc, "w", n) if "w" in doc else None

    if "gamma" in doc and "rho" in doc:
        raise ConfigError("give rho or gamma, not both")
    if n > 1 and "gamma" not in doc and "rho" not in doc:
        raise ConfigError("one of rho or gamma is required for more than one layer")
    try:
        if "gamma" not in doc and "rho" not in doc:
            gamma = DensityRatios(np.zeros(0))
        elif "gamma" in doc:
            gamma = DensityRatios(_num_list(doc, "gamma", n - 1))
        else:
            gamma = DensityRatios.from_densities(_num_list(doc, "rho", n))
    except ValueError as exc:
        raise ConfigError(f"{'gamma' if 'gamma' in doc else 'rho'}: {exc}") from exc

    grad_b = tuple(_num_list(doc, "grad_b", 2)) if "grad_b" in doc else (0.0, 0.0)
    try:
        params = PhysicalParams(g=_number(doc, "g", 9.81), f=_number(doc, "f", 0.0), grad_b=grad_b)
    except ValueError as exc:
        raise ConfigError(f"g/f/grad_b: {exc}") from exc

    units = doc.get("height_units", "rescaled")
    if units not in ("rescaled", "meters"):
        raise ConfigError("height_units: expected 'rescaled' or 'meters'")
    state = State(h * params.g if units == "meters" else h, u, v)

    try:
        opts = ClassifyOptions(
            theta_samples=int(_number(doc, "theta_samples", 32)),
            tol_im=float(_number(doc, "tol_im", 1e-8)),
            cond_cap=float(_number(doc, "cond_cap", 1e8)),
            tau_max=None if "tau_max" not in doc else float(_number(doc, "tau_max", 0)),
        )
    except ValueError as exc:
        raise ConfigError(f"options: {exc}") from exc

    axes = []
    for k, ax in enumerate(doc.get("sweep", [])):
        if not isinstance(ax, dict) or set(ax) != {"coord", "min", "max", "steps"}:
            raise ConfigError(f"sweep[{k}]: expected keys coord, min, max, steps")
        try:
            axes.append(SweepAxis(str(ax["coord"]), float(ax["min"]), float(ax["max"]), int(ax["steps"])))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"sweep[{k}]: {exc}") from exc

    normal = tuple(_num_list(doc, "normal", 2)) if "normal" in doc else (1.0, 0.0)
    labels = doc.get("labels")
    if labels is not None and (not isinstance(labels, list) or not all(isinstance(x, str) for x in labels)):
        raise ConfigError("labels: expected a list of strings")
    u0 = tuple(_num_list(doc, "u0", 2)) if "u0" in doc else None
    grid = doc.get("grid")
    if grid is not None and (not isinstance(grid, dict) or set(grid) != {"path", "dx", "dy"}):
        raise ConfigError("grid: expected keys path, dx, dy")

    return RunConfig(
        state=state,
        gamma=gamma,
        params=params,
        w=w,
        height_units=units,
        options=opts,
        sweep_axes=tuple(axes),
        normal=normal,
        labels=None if labels is None else tuple(labels),
        u0=u0,
        grid=grid,
        echo=doc,
    )


# ---------------------------------------------------------------------------
# JSON helpers


def _clean(x: Any) -> Any:
    """Convert numpy values to JSON-safe Python values; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _clean(float(x.real)), "im": _clean(float(x.imag))}
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _spectrum_entries(values, labels) -> list:
    return [{"label": lab, "value": complex(v)} for v, lab in zip(values, labels)]


def _scheme_or_none(state: State, gamma):
    if state.n == 1:
        return None
    try:
        return fit_regime(state, gamma)
    except RegimeError:
        return None


# ---------------------------------------------------------------------------
# commands


def _cmd_spectrum(cfg: RunConfig) -> tuple[dict, list, int]:
    warnings = []
    scheme = _scheme_or_none(cfg.state, cfg.gamma)
    if scheme is None and cfg.n > 1:
        warnings.append("stratification: no regime could be fitted, reduced roots left unlabelled")
    rep = full_spectrum(cfg.state, cfg.gamma, scheme)
    oracle = np.sort_complex(eigvals_dense(build_Ax(cfg.state, cfg.gamma)))
    preds = []
    if scheme is not None or cfg.n == 1:
        preds = [{"label": p.label, "value": p.value, "order_exponent": p.order_exponent}
                 for p in predict_all(cfg.state, cfg.gamma, scheme)]
        rr = validate_regime(cfg.state, scheme) if scheme is not None else None
        if rr is not None and not rr.ok:
            warnings.append("stratification: regime check flagged large shear or extreme height ratio")
    gap = float(np.max(np.abs(np.sort_complex(rep.values) - oracle)))
    res = {
        "eigenvalues": _spectrum_entries(rep.values, [lab or "unlabelled" for lab in rep.labels]),
        "predictions": preds,
        "oracle_max_gap": gap,
        "max_imag": rep.max_imag,
    }
    if scheme is not None:
        res["regime"] = {"epsilon": scheme.epsilon, "sigma": scheme.sigma, "pi": scheme.pi, "varpi": scheme.varpi}
    return res, warnings, 0


def _verdict_dict(v) -> dict:
    return {
        "symmetrizable": v.symmetrizable,
        "symmetrizer_margins": v.symmetrizer_margins,
        "asymptotic_criterion": "not_applicable" if v.asymptotic_criterion is None else v.asymptotic_criterion,
        "asymptotic_margins": v.asymptotic_margins,
        "numeric": v.numeric,
        "max_imag": v.max_imag,
        "spectral_radius": v.spectral_radius,
        "eigenvector_cond": v.cond,
        "worst_theta": v.worst_theta,
        "growth": v.growth,
    }


def _cmd_hyperbolicity(cfg: RunConfig) -> tuple[dict, list, int]:
    v = classify(cfg.state, cfg.gamma, cfg.options)
    warnings = [f"hyperbolicity: {w}" for w in v.warnings]
    return _verdict_dict(v), warnings, 2 if v.numeric == NON_HYPERBOLIC else 0


def _cmd_symmetrizer(cfg: RunConfig) -> tuple[dict, list, int]:
    st, g = cfg.state, cfg.gamma
    bundle = build_Sx(st, g)
    refined = check_symmetrizable(st, g, "refined")
    explicit = check_symmetrizable(st, g, "explicit")
    res = {
        "u0": st.ubar,
        "positive_definite": bundle.positive_definite,
        "min_eigenvalue": bundle.min_eigenvalue,
        "product_asymmetry": bundle.asymmetry,
        "refined": {"passed": refined.passed, "margins": refined.margins, "reason": refined.reason},
        "explicit": {"passed": explicit.passed, "margins": explicit.margins, "reason": explicit.reason},
    }
    warnings = ["symmetrizer: verdicts use lower bounds on delta_i and are sufficient, not necessary"]
    if np.all(st.h > 0) and np.all((g.gamma > 0) & (g.gamma < 1)):
        b = delta_bounds(st.h, g)
        res["delta_bounds"] = {"refined": b.refined, "explicit": b.explicit, "a_bound": b.a_bound}
    return res, warnings, 0


def _sweep_csv(rows, naxes: int) -> str:
    buf = io.StringIO()
    buf.write(SWEEP_HEADER + "\n")
    for r in rows:
        a1 = format(r.coords[0], ".17g")
        a2 = format(r.coords[1], ".17g") if naxes > 1 else ""
        asym = "not_applicable" if r.asymptotic is None else str(r.asymptotic).lower()
        buf.write(
            f"{a1},{a2},{str(r.symmetrizable).lower()},{asym},{r.numeric},"
            f"{format(r.max_imag, '.17g')},{format(r.margin_min, '.17g')}\n"
        )
    return buf.getvalue()


def _cmd_augmented(cfg: RunConfig) -> tuple[dict, list, int]:
    if cfg.w is None:
        raise ConfigError("w: the augmented command needs one vorticity per layer")
    aug = AugmentedState(cfg.state, cfg.w)
    f = cfg.params.f
    ver = classify_augmented(aug, cfg.gamma, f, cfg.u0, cfg.options)
    scheme = _scheme_or_none(cfg.state, cfg.gamma)
    rep = augmented_spectrum(aug, cfg.gamma, f, scheme)
    res = {
        "symmetrizable": ver.symmetrizable,
        "delta_a": ver.delta_a,
        "u0": ver.u0,
        "numeric": ver.numeric,
        "max_imag": ver.max_imag,
        "eigenvector_cond": ver.cond,
        "spectrum": _spectrum_entries(rep.values, [lab or "unlabelled" for lab in rep.labels]),
        "wave_nature": {k: {"nature": w.nature, "value": w.value, "scale": w.scale} for k, w in ver.wave_natures.items()},
    }
    if cfg.grid is not None:
        fld = read_grid_csv(cfg.grid["path"], float(cfg.grid["dx"]), float(cfg.grid["dy"]))
        res["vorticity_residual"] = vorticity_compatibility(fld)
    warnings = [f"augmented: {w}" for w in ver.warnings]
    return res, warnings, 2 if ver.numeric == NON_HYPERBOLIC else 0


def _cmd_boundary(cfg: RunConfig) -> tuple[dict, list, int]:
    phys = cfg.physical_state()
    supports = None
    if cfg.n > 1:
        scheme = fit_regime(cfg.state, cfg.gamma)
        supports = all_supports(scheme, phys.h)
    cs = characteristic_vars(phys, cfg.gamma, supports, cfg.params.g, cfg.normal)
    res = {
        "barotropic_pair": cs.barotropic_pair,
        "baroclinic_pairs": cs.baroclinic_pairs,
        "normal": cs.normal,
        "g": cs.g,
        "approximate": cs.approximate,
        "conditions": cs.conditions,
    }
    return res, ["boundary: characteristic variables are formal approximations"], 0


def _cmd_wave_nature(cfg: RunConfig) -> tuple[dict, list, int]:
    scheme = _scheme_or_none(cfg.state, cfg.gamma)
    if scheme is None and cfg.n > 1:
        raise ConfigError("gamma: wave-nature needs density ratios that define a regime")
    labels = cfg.labels or tuple(p.label for p in predict_all(cfg.state, cfg.gamma, scheme))
    out = {}
    for lab in labels:
        wn = wave_nature(lab, cfg.state, cfg.gamma, scheme)
        out[lab] = {"nature": wn.nature, "value": wn.value, "scale": wn.scale}
    return {"families": out}, [], 0


_DISPATCH = {
    "spectrum": _cmd_spectrum,
    "hyperbolicity": _cmd_hyperbolicity,
    "symmetrizer": _cmd_symmetrizer,
    "augmented": _cmd_augmented,
    "boundary": _cmd_boundary,
    "wave-nature": _cmd_wave_nature,
}


def run(cfg: RunConfig, command: str) -> tuple[str, int]:
    """Execute ``command`` and return the serialized report and exit code."""
    if command == "sweep":
        if not cfg.sweep_axes:
            raise ConfigError("sweep: at least one axis is required")
        rows = sweep(cfg.state, cfg.gamma, cfg.sweep_axes, cfg.options)
        code = 2 if any(r.numeric == NON_HYPERBOLIC for r in rows) else 0
        return _sweep_csv(rows, len(cfg.sweep_axes)), code
    if command not in _DISPATCH:
        raise ConfigError(f"unknown command {command!r}")
    results, warnings, code = _DISPATCH[command](cfg)
    report = {
        "tool": "stratiwave",
        "version": __version__,
        "command": command,
        "input": cfg.echo,
        "results": results,
        "warnings": warnings,
    }
    return json.dumps(_clean(report), indent=2, allow_nan=False) + "\n", code


def write_atomic(path: str, text: str) -> None:
    """Write to a temporary file in the same directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".stratiwave-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stratiwave", description="Eigenstructure and hyperbolicity of layered shallow water.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--theta-samples", type=int, help="number of directions in [0, 2 pi)")
    p.add_argument("--tau-max", type=float, help="horizon of the growth probe")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            text = fh.read()
        cfg = parse_config(text)
        overrides = {}
        if args.theta_samples is not None:
            overrides["theta_samples"] = args.theta_samples
        if args.tau_max is not None:
            overrides["tau_max"] = args.tau_max
        if overrides:
            o = cfg.options
            opts = ClassifyOptions(
                theta_samples=overrides.get("theta_samples", o.theta_samples),
                tol_im=o.tol_im,
                cond_cap=o.cond_cap,
                tau_max=overrides.get("tau_max", o.tau_max),
                tau_samples=o.tau_samples,
            )
            cfg = dataclasses.replace(cfg, options=opts, echo={**cfg.echo, **overrides})
        text, code = run(cfg, args.command)
        if args.out:
            write_atomic(args.out, text)
        else:
            sys.stdout.write(text)
        return code
    except Exception as exc:  # every failure maps to exit code 1
        print(f"stratiwave: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
