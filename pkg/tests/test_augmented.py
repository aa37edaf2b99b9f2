import numpy as np
import pytest

from stratiwave import augmented as au
from stratiwave.model import AugmentedState, State, build_Ax, energy
from stratiwave.asymptotics import eig_residual
from stratiwave.numerics import eig_dense, eigvals_dense
from stratiwave.stratification import StratScheme, regime_state
from conftest import multiset_gap, random_aug, random_gamma


def _regime_aug(eps=1e-3, w=(0.05, -0.03, 0.02), v=(0.01, -0.02, 0.015)):
    sch = StratScheme(eps, np.array([1.0, 1.5]), np.array([0.2, -0.1]), np.array([1.2, 0.9]))
    s, g = regime_state(sch, u_top=0.3, v=v)
    return AugmentedState(s, np.array(w)), g, sch


def test_Aa_theta_axes_and_zero_vorticity(rng):
    aug, g = random_aug(rng, 3), random_gamma(rng, 3)
    assert np.array_equal(au.build_Aa_theta(aug, g, 0.2, 0.0), au.build_Aa_x(aug, g, 0.2))
    flat = AugmentedState(aug.base, np.zeros(3))
    A = au.build_Aa_x(flat, g, 0.0)
    n = 3
    assert np.all(A[3 * n :, : 3 * n] == 0)
    assert np.allclose(A[3 * n :, 3 * n :], np.diag(aug.base.u))


def test_augmented_rotation_identity(rng):
    for _ in range(5):
        n = int(rng.integers(1, 4))
        aug, g = random_aug(rng, n), random_gamma(rng, n)
        ref = np.linalg.norm(au.build_Aa_x(aug, g, 0.1))
        for th in 2 * np.pi * np.arange(16) / 16:
            P = au.rotation_matrix_aug(n, th)
            rhs = P.T @ au.build_Aa_x(au.rotate_aug(aug, th), g, 0.1) @ P
            assert np.linalg.norm(au.build_Aa_theta(aug, g, 0.1, th) - rhs) <= 1e-12 * ref


def test_augmented_spectrum_single_layer():
    aug = AugmentedState(State([1.0], [0.3], [0.0]), [0.1])
    rep = au.augmented_spectrum(aug, [], 0.0)
    assert multiset_gap(rep.values, [-0.7, 0.3, 1.3, 0.0]) <= 1e-12
    assert multiset_gap(rep.values, eigvals_dense(au.build_Aa_x(aug, [], 0.0))) <= 1e-12


def test_augmented_spectrum_zero_multiplicity(rng):
    for n in (1, 2, 4):
        aug, g = random_aug(rng, n), random_gamma(rng, n)
        rep = au.augmented_spectrum(aug, g, 0.3)
        assert sum(str(lab).startswith("zero") for lab in rep.labels) == n
        assert np.sum(np.abs(eigvals_dense(au.build_Aa_x(aug, g, 0.3))) <= 1e-12) >= n
        assert multiset_gap(rep.values, eigvals_dense(au.build_Aa_x(aug, g, 0.3))) <= 1e-8


def test_spectrum_relation(rng):
    aug, g = random_aug(rng, 3), random_gamma(rng, 3)
    for lam in rng.uniform(-2, 2, 50):
        assert au.spectrum_relation_residual(aug, g, lam, 0.2) <= 1e-9


def test_exact_augmented_families(rng):
    aug, g = random_aug(rng, 3), random_gamma(rng, 3)
    A = au.build_Aa_x(aug, g, 0.2)
    for i in (1, 2, 3):
        for lab in (f"vortical({i})", f"zero({i})"):
            lam, r, l = au.augmented_eigvecs(lab, aug, g, 0.2)
            assert max(eig_residual(A, lam, r, l)) <= 1e-13, lab


def test_zero_family_with_zero_transverse_velocity():
    aug = AugmentedState(State([1.0, 1.0], [0.1, 0.2], [0.0, 0.3]), [0.1, 0.2])
    lam, r, l = au.augmented_eigvecs("zero(1)", aug, [0.9])
    e = np.zeros(8)
    e[4] = 1.0
    assert lam == 0.0 and np.array_equal(r, e) and np.array_equal(l, e)


def test_lift_without_vorticity_keeps_base_residual():
    aug, g, sch = _regime_aug(w=(0.0, 0.0, 0.0), v=(0.0, 0.0, 0.0))
    A = au.build_Aa_x(aug, g, 0.0)
    A3 = build_Ax(aug.base, g)
    for lab in ("barotropic(+)", "baroclinic(1,-)"):
        lam, r, l = au.augmented_eigvecs(lab, aug, g, 0.0, scheme=sch)
        assert np.all(r[9:] == 0)
        r3, l3 = r[:9], l[:9]
        assert eig_residual(A, lam, r, l)[0] == pytest.approx(
            eig_residual(A3, lam, r3, l3)[0] * np.linalg.norm(A3, 2) / np.linalg.norm(A, 2), rel=1e-10
        )


def test_lift_residual_bounded_by_base():
    aug, g, sch = _regime_aug()
    A = au.build_Aa_x(aug, g, 0.05)
    A3 = build_Ax(aug.base, g)
    rho = np.max(np.abs(eigvals_dense(A3)))
    for lab in au.augmented_labels(3)[:6]:
        lam, r, l = au.augmented_eigvecs(lab, aug, g, 0.05, scheme=sch)
        if np.min(np.abs(lam - aug.base.u)) < 0.1 * rho:
            continue
        _, r3, l3 = au.augmented_eigvecs(lab, AugmentedState(aug.base, -0.05 * np.ones(3)), g, 0.05, scheme=sch)
        base = max(eig_residual(A3, lam, r3[:9], l3[:9]))
        assert max(eig_residual(A, lam, r, l)) <= 10 * base + 1e-14, lab


def test_numeric_base_vectors_lift_exactly():
    aug, g, sch = _regime_aug()
    A = au.build_Aa_x(aug, g, 0.05)
    for lab in au.augmented_labels(3)[:6]:
        lam, r, l = au.augmented_eigvecs(lab, aug, g, 0.05, base_source="numeric", scheme=sch)
        assert max(eig_residual(A, lam, r, l)) <= 1e-12, lab


def test_degenerate_lift_raises():
    # single layer with u = sqrt(h): barotropic(-) speed is 0 with v != 0
    aug = AugmentedState(State([1.0], [1.0], [0.5]), [0.3])
    with pytest.raises(au.DegenerateLiftError):
        au.augmented_eigvecs("barotropic(-)", aug, [], 0.0)


def test_hat_structure_check(rng):
    for n in (1, 3):
        s = State(rng.uniform(0.5, 2, n), rng.uniform(-0.5, 0.5, n), np.zeros(n))
        g = random_gamma(rng, n)
        assert au.hatA_structure_check(au.hat_state(s, g), g) <= 1e-6


def test_hat_energy_matches_model_energy(rng):
    s = State.at_rest(rng.uniform(0.5, 2, 4))
    g = random_gamma(rng, 4)
    assert au.hat_energy(au.hat_state(s, g), g) == pytest.approx(energy(s, g, 1), rel=1e-12)


def test_frobenius_commutant_examples():
    s = State.at_rest([1.0])
    dim, _ = au.frobenius_commutant(au.hat_state(s, []), [])
    assert dim == 2
    aug, g, _ = _regime_aug()
    two = State(aug.base.h[:2], aug.base.u[:2], np.zeros(2))
    hat = au.hat_state(two, g.gamma[:1])
    dim, basis = au.frobenius_commutant(hat, g.gamma[:1])
    assert dim == 4
    assert au.power_span_residual(hat, g.gamma[:1], basis) <= 1e-8
    # gamma = 1 with equal velocities: eigenvalue u with two Jordan blocks
    merged = State([1.0, 1.0, 1.0], [0.2, 0.2, 0.2], [0.0, 0.0, 0.0])
    dim, _ = au.frobenius_commutant(au.hat_state(merged, [1.0, 1.0]), [1.0, 1.0])
    assert dim > 6


def test_commutant_dimension_random(rng):
    for _ in range(10):
        n = int(rng.integers(1, 4))
        s = State(rng.uniform(0.5, 2, n), rng.uniform(-0.05, 0.05, n), np.zeros(n))
        g = random_gamma(rng, n, 0.5, 0.9)
        hat = au.hat_state(s, g)
        dim, basis = au.frobenius_commutant(hat, g)
        assert dim == 2 * n
        assert au.power_span_residual(hat, g, basis) <= 1e-8


def _rotation_field(w_value):
    x = np.arange(5) * 0.1
    y = np.arange(4) * 0.2
    X, Y = np.meshgrid(x, y, indexing="ij")
    return au.GridField(0.1, 0.2, (-Y)[None], X[None], np.full((1,) + X.shape, w_value))


def test_vorticity_compatibility_examples():
    assert au.vorticity_compatibility(_rotation_field(2.0))[0] <= 1e-12
    assert au.vorticity_compatibility(_rotation_field(0.0))[0] == pytest.approx(2.0)
    z = np.zeros((2, 3, 3))
    assert np.all(au.vorticity_compatibility(au.GridField(1.0, 1.0, z, z, z)) == 0)
    with pytest.raises(ValueError):
        au.GridField(1.0, 1.0, np.zeros((1, 2, 3)), np.zeros((1, 2, 3)), np.zeros((1, 2, 3)))


def test_read_grid_csv(tmp_path):
    fld = _rotation_field(2.0)
    lines = ["layer,i,j,u,v,w"]
    for i in range(fld.nx):
        for j in range(fld.ny):
            lines.append(f"1,{i},{j},{float(fld.u[0, i, j])!r},{float(fld.v[0, i, j])!r},2.0")
    p = tmp_path / "grid.csv"
    p.write_text("\n".join(lines) + "\n")
    back = au.read_grid_csv(p, 0.1, 0.2)
    assert np.array_equal(back.u, fld.u) and np.array_equal(back.v, fld.v)
    p.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ValueError):
        au.read_grid_csv(p, 0.1, 0.2)


def test_classify_augmented_rest():
    aug = AugmentedState(State.at_rest([1.0, 1.0]), [0.0, 0.0])
    v = au.classify_augmented(aug, [0.5], 0.0, (0.0, 0.0))
    assert v.symmetrizable and v.delta_a == pytest.approx(1 / 6)
    assert v.numeric == "hyperbolic_diagonalizable"
    for lab, wn in v.wave_natures.items():
        assert wn.nature == "linearly_degenerate", lab


def test_classify_augmented_vortical_exact(rng):
    aug, g = random_aug(rng, 2), random_gamma(rng, 2)
    v = au.classify_augmented(aug, g, 0.1)
    for i in (1, 2):
        assert abs(v.wave_natures[f"vortical({i})"].value) <= 1e-10


def test_classify_augmented_inherits_non_hyperbolicity():
    s = State([1.0, 1.0], [0.0, 0.3], [0.0, 0.0])
    v = au.classify_augmented(AugmentedState(s, [0.1, 0.0]), [0.99], 0.0)
    assert v.numeric == "non_hyperbolic"
    assert not v.symmetrizable
