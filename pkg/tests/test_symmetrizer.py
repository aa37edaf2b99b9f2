import numpy as np
import pytest

from stratiwave import numerics, symmetrizer as sy
from stratiwave.model import AugmentedState, State, build_gamma_matrix
from conftest import random_aug, random_gamma, random_state


def _sym_rel(M):
    return np.linalg.norm(M - M.T) / max(np.linalg.norm(M), 1e-300)


def test_build_Sx_reduces_to_Sx0():
    s = State([1.0, 2.0, 0.5], [0.3, 0.3, 0.3], [0.0, 0.0, 0.0])
    g = [0.6, 0.8]
    assert np.allclose(sy.build_Sx(s, g).S, sy.build_Sx0(s.h, g))


def test_build_Sx_single_layer_identity():
    b = sy.build_Sx(State.at_rest([1.0]), [], u0=0.0)
    assert np.allclose(b.S, np.eye(3))
    assert b.positive_definite


def test_Sx_Ax_symmetric(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        s, g = random_state(rng, n), random_gamma(rng, n)
        b = sy.build_Sx(s, g, u0=float(rng.normal()))
        assert _sym_rel(b.SA_x) <= 1e-12
        assert np.array_equal(b.S, b.S.T)


def test_build_Sx0_examples():
    assert np.allclose(sy.build_Sx0([1.0], []), np.eye(3))
    S = sy.build_Sx0([1.0, 1.0], [0.5])
    expected = np.zeros((6, 6))
    expected[:2, :2] = [[0.5, 0.5], [0.5, 1.0]]
    expected[2:4, 2:4] = np.diag([0.5, 1.0])
    expected[4:, 4:] = np.diag([0.5, 1.0])
    assert np.allclose(S, expected)
    assert sy.is_positive_definite(S)
    assert not sy.is_positive_definite(sy.build_Sx0([1.0, 1.0], [1.2]))


def test_Sx0_definiteness_flips_at_gamma_one():
    for g in (0.999, 1.001):
        assert sy.is_positive_definite(sy.build_Sx0([1.0, 1.0, 1.0], [0.5, g])) == (g < 1)


def test_gamma_minors_examples():
    assert np.allclose(sy.gamma_minors([0.5, 0.5]), [0.25, 0.0625, 0.03125])
    assert np.allclose(sy.gamma_minors([]), [1.0])


def test_gamma_minors_match_determinants(rng):
    for n in range(1, 9):
        g = random_gamma(rng, n, 0.05, 0.99)
        oracle = numerics.leading_principal_minors(sy.delta_gamma(g))
        m = sy.gamma_minors(g)
        assert np.all(m > 0)
        assert np.allclose(m, oracle, rtol=1e-12, atol=0)


def test_gersh_bound_examples():
    assert sy.gersh_bound_a([1.0, 1.0], [0.5]) == pytest.approx(6.0)
    lam_max = np.max(np.linalg.eigvalsh(np.linalg.inv(sy.build_Sx0([1.0, 1.0], [0.5]))))
    assert lam_max == pytest.approx(3 + np.sqrt(5))
    assert sy.gersh_bound_a([0.5], []) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        sy.gersh_bound_a([1.0, 1.0], [1.0])


def test_gersh_bound_dominates(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        h, g = rng.uniform(0.1, 3.0, n), random_gamma(rng, n, 0.01, 0.999)
        lam_max = np.max(np.linalg.eigvalsh(np.linalg.inv(sy.build_Sx0(h, g))))
        assert sy.gersh_bound_a(h, g) >= lam_max * (1 - 1e-12)


def test_tridiag_inverse_gamma():
    d, o = sy.tridiag_inverse_gamma([0.5])
    assert np.allclose(d, [4, 2]) and np.allclose(o, [-2])
    d, o = sy.tridiag_inverse_gamma([])
    assert np.allclose(d, [1])
    with pytest.raises(ValueError):
        sy.tridiag_inverse_gamma([0.5, 1.0])


def test_tridiag_inverse_is_inverse(rng):
    g = random_gamma(rng, 3)
    d, o = sy.tridiag_inverse_gamma(g)
    inv = np.diag(d) + np.diag(o, 1) + np.diag(o, -1)
    assert np.allclose(sy.delta_gamma(g) @ inv, np.eye(3), atol=1e-12)
    assert np.all(o < 0)


def test_delta_bounds_examples():
    b = sy.delta_bounds([1.0, 1.0], [0.5])
    assert np.allclose(b.explicit, [1 / 9, 1 / 36])
    assert np.all(b.refined >= b.explicit - 1e-12)
    assert np.allclose(sy.delta_bounds([1.0], []).refined, [1.0])


def test_check_symmetrizable_examples():
    rest = sy.check_symmetrizable(State.at_rest([1.0, 1.0]), [0.5])
    assert rest.passed
    assert np.allclose(rest.margins, sy.delta_bounds([1.0, 1.0], [0.5]).refined)
    assert not sy.check_symmetrizable(State([1.0, 1.0], [10.0, -10.0], [0.0, 0.0]), [0.5]).passed
    # deviation exactly at the bound fails (strict inequality)
    d = sy.delta_bounds([1.0, 1.0], [0.5]).refined
    dev = np.sqrt(d[0])
    s = State([1.0, 1.0], [dev, -dev], [0.0, 0.0])
    v = sy.check_symmetrizable(s, [0.5])
    assert not v.passed
    assert v.margins[0] == pytest.approx(0.0, abs=1e-15)


def test_check_symmetrizable_refuses_bad_domain():
    assert not sy.check_symmetrizable(State.at_rest([1.0, 0.0]), [0.5]).passed
    assert not sy.check_symmetrizable(State.at_rest([1.0, 1.0]), [1.2]).passed


def test_Sx_shift_spectrum(rng):
    # spectrum of S_x(u, gamma, ubar) - S_x^0 is {+- alpha_i (u_i - ubar)}
    n = 4
    s, g = random_state(rng, n), random_gamma(rng, n)
    D = sy.build_Sx(s, g).S - sy.build_Sx0(s.h, g)
    a = g.alpha() * (s.u - s.ubar)
    expected = np.concatenate([a, -a, np.zeros(n)])
    assert np.allclose(np.sort(np.linalg.eigvalsh(D)), np.sort(expected), atol=1e-10)


def test_lambda_min_concavity(rng):
    for _ in range(100):
        A = rng.normal(size=(5, 5))
        B = rng.normal(size=(5, 5))
        A, B = A + A.T, B + B.T
        lmin = lambda M: np.linalg.eigvalsh(M)[0]
        assert lmin(A + B) >= lmin(A) + lmin(B) - 1e-12


def test_build_Sa_zero_vorticity_rest():
    aug = AugmentedState(State.at_rest([1.0, 2.0]), [0.0, 0.0])
    S = sy.build_Sa(aug, [0.5]).S
    n = 2
    dg = build_gamma_matrix([0.5]) * np.array([0.5, 1.0])[:, None]
    assert np.allclose(S[:n, :n], dg)
    assert np.allclose(S[3 * n :, 3 * n :], np.diag([1.0, 4.0]))
    off = S.copy()
    for k in range(4):
        off[k * n : (k + 1) * n, k * n : (k + 1) * n] = 0
    assert np.all(off == 0)


def test_Sa_products_symmetric(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        aug, g = random_aug(rng, n), random_gamma(rng, n)
        b = sy.build_Sa(aug, g, f=0.3)
        assert _sym_rel(b.SA_x) <= 1e-12
        assert _sym_rel(b.SA_y) <= 1e-12


def test_delta_a_examples():
    aug = AugmentedState(State.at_rest([1.0, 1.0]), [0.0, 0.0])
    assert sy.delta_a(aug, [0.5]) == pytest.approx(1 / 6)
    assert sy.check_symmetrizable_augmented(aug, [0.5]).passed
    fast = AugmentedState(State([1.0, 1.0], [5.0, 0.0], [0.0, 0.0]), [0.0, 0.0])
    assert sy.delta_a(fast, [0.5]) < 0
    assert not sy.check_symmetrizable_augmented(fast, [0.5]).passed
    assert sy.vorticity_penalty(np.zeros(3), np.ones(3)) == 0.0


def test_vorticity_penalty_is_block_min_eigenvalue():
    for wf in (-0.7, 0.4):
        h = 1.3
        block = np.array([[wf**2, -wf * h], [-wf * h, 0.0]])
        # the penalty is the smallest eigenvalue of the block including the h^2 slot offset
        lam = np.linalg.eigvalsh(block + np.diag([0.0, h**2]) - np.diag([0.0, h**2]))[0]
        assert sy.vorticity_penalty(np.array([wf]), np.array([h])) == pytest.approx(lam)


def test_delta_a_positive_implies_Sa_positive_definite(rng):
    hits = 0
    for _ in range(300):
        n = int(rng.integers(1, 5))
        s = State(rng.uniform(0.5, 2.0, n), rng.uniform(-0.05, 0.05, n), rng.uniform(-0.05, 0.05, n))
        aug = AugmentedState(s, rng.uniform(-0.2, 0.2, n))
        g = random_gamma(rng, n, 0.1, 0.6)
        if sy.delta_a(aug, g) > 0:
            hits += 1
            assert sy.build_Sa(aug, g).positive_definite
    assert hits > 50


def test_positive_definite_rejects_singular_semidefinite():
    assert not sy.is_positive_definite(sy.build_Sx0([1.0, 1.0, 1.0], [0.7, 1.0]))
    assert sy.is_positive_definite(np.eye(3))
    assert not sy.is_positive_definite(np.zeros((2, 2)))
