import numpy as np
import pytest

from stratiwave import boundary as bd
from stratiwave.asymptotics import advective_eigpair, barotropic_eigvecs
from stratiwave.model import State, rotate_state
from stratiwave.stratification import InterfaceSupport


def test_single_layer_pair():
    cs = bd.characteristic_vars(State([100.0], [1.0], [0.0]), [], g=9.81)
    assert cs.barotropic_pair == (1 + 2 * np.sqrt(981.0), 1 - 2 * np.sqrt(981.0))
    assert cs.barotropic_pair[0] == pytest.approx(1 + 62.6418, abs=1e-4)
    assert cs.baroclinic_pairs == ()
    assert cs.approximate


def test_two_layer_symmetric_rest():
    cs = bd.characteristic_vars(State.at_rest([1.0, 1.0]), [0.99])
    assert cs.baroclinic_pairs == ((0.0, 0.0),)


def test_two_layer_pi_over_six():
    du = np.sqrt(9.81 * 0.01 * 2) * 0.5
    cs = bd.characteristic_vars(State([1.0, 1.0], [0.0, du], [0.0, 0.0]), [0.99], g=9.81)
    assert cs.baroclinic_pairs[0] == pytest.approx((-np.pi / 6, np.pi / 6), abs=1e-12)


def test_out_of_range_names_interface():
    s = State([1.0, 1.0, 1.0], [0.0, 0.0, 5.0], [0.0, 0.0, 0.0])
    sup = [InterfaceSupport.trivial(1, s.h), InterfaceSupport.trivial(2, s.h)]
    with pytest.raises(ValueError, match="interface 2"):
        bd.characteristic_vars(s, [0.99, 0.98], supports=sup)


def test_rotational_consistency(rng):
    s = State(rng.uniform(5, 20, 3), rng.uniform(-0.02, 0.02, 3), rng.uniform(-0.02, 0.02, 3))
    g = [0.995, 0.999]
    for th in (0.3, 1.9, 4.0):
        nrm = (np.cos(th), np.sin(th))
        a = bd.characteristic_vars(s, g, normal=nrm)
        b = bd.characteristic_vars(rotate_state(s, th), g, normal=(1.0, 0.0))
        assert np.allclose(a.barotropic_pair, b.barotropic_pair, rtol=1e-12, atol=1e-12)
        assert np.allclose(a.baroclinic_pairs, b.baroclinic_pairs, rtol=1e-12, atol=1e-12)


def test_normal_must_be_unit():
    with pytest.raises(ValueError):
        bd.characteristic_vars(State.at_rest([1.0]), [], normal=(2.0, 0.0))


def test_trivial_supports_reproduce_two_layer_display():
    h = np.array([3.0, 1.0])
    u = np.array([0.01, 0.05])
    g, grav = 0.995, 9.81
    cs = bd.characteristic_vars(State(h, u, np.zeros(2)), [g], [InterfaceSupport.trivial(1, h)], grav)
    A = np.arcsin((h[0] - h[1]) / h.sum())
    B = np.arcsin((u[1] - u[0]) / np.sqrt(grav * (1 - g) * h.sum()))
    assert cs.baroclinic_pairs[0] == (A - B, A + B)
    ubar = (h @ u) / h.sum()
    c = 2 * np.sqrt(grav * h.sum())
    assert cs.barotropic_pair == pytest.approx((ubar + c, ubar - c), rel=1e-15)


def test_riemann_increment_examples():
    assert bd.riemann_increment(np.ones(6), np.zeros(6)) == 0.0
    s = State([1.0, 1.0], [0.0, 0.0], [0.0, 0.0])
    _, _, l = advective_eigpair(2, s)
    du = np.zeros(6)
    du[5] = 0.3
    assert bd.riemann_increment(l, du) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        bd.riemann_increment(np.ones(3), np.ones(4))


def test_riemann_increment_single_layer_matches_invariant():
    h, u = 2.0, 0.3
    s = State([h], [u], [0.0])
    for sign in "+-":
        _, l = barotropic_eigvecs(s, [], sign=sign)
        sg = 1.0 if sign == "+" else -1.0
        # l = (1, sqrt(h) sign, 0) up to scale; normalise so the u slot is 1
        l = l / l[1]
        for step in (1e-4, 1e-5):
            d = np.array([step, -0.5 * step, 0.0])
            exact = (u + d[1] + sg * 2 * np.sqrt(h + d[0])) - (u + sg * 2 * np.sqrt(h))
            approx = bd.riemann_increment(l, d)
            assert abs(approx - exact) <= 1e-3 * abs(exact)
