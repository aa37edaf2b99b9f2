"""Eigenstructure, symmetrizability and hyperbolicity of layered shallow-water flows."""

__version__ = "0.1.0"

from .model import AugmentedState, DensityRatios, PhysicalParams, State, build_A_theta, build_Ax, build_Ay
from .stratification import InterfaceSupport, RegimeError, StratScheme, fit_regime, interface_support
from .charpoly import full_spectrum, reduced_poly, reduced_roots
from .symmetrizer import build_Sx, check_symmetrizable, delta_bounds
from .asymptotics import barotropic_eig, baroclinic_eig, predict_all
from .hyperbolicity import ClassifyOptions, HyperbolicityVerdict, SweepAxis, classify, sweep, wave_nature
from .augmented import augmented_spectrum, classify_augmented
from .boundary import characteristic_vars

__all__ = [
    "__version__",
    "AugmentedState",
    "DensityRatios",
    "PhysicalParams",
    "State",
    "build_A_theta",
    "build_Ax",
    "build_Ay",
    "InterfaceSupport",
    "RegimeError",
    "StratScheme",
    "fit_regime",
    "interface_support",
    "full_spectrum",
    "reduced_poly",
    "reduced_roots",
    "build_Sx",
    "check_symmetrizable",
    "delta_bounds",
    "barotropic_eig",
    "baroclinic_eig",
    "predict_all",
    "ClassifyOptions",
    "HyperbolicityVerdict",
    "SweepAxis",
    "classify",
    "sweep",
    "wave_nature",
    "augmented_spectrum",
    "classify_augmented",
    "characteristic_vars",
]
