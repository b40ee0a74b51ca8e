import pytest
import numpy as np
from scipy.integrate import quad

from maassqe.bumps import Bump, TestFunction


def test_bump_values():
    psi = TestFunction(1.0, 2.0)
    assert np.abs(psi(1.5) - np.exp(-4.0)) < 1e-15
    assert psi(1.0) == 0.0
    assert psi(2.5) == 0.0
    assert psi.support == (1.0, 2.0)
    assert psi.l == 2.0


def test_bump_derivatives():
    psi = TestFunction(1.0, 2.0)
    h = 1e-5
    for x in (1.1, 1.3, 1.7):
        fd = (psi(x + h) - psi(x - h)) / (2 * h)
        assert np.abs(psi(x, derivative=1) - fd) < 1e-8
        fd2 = (psi(x + h, derivative=1) - psi(x - h, derivative=1)) / (2 * h)
        assert np.abs(psi.derivative(2)(x) - fd2) < 1e-6


def test_dilate_and_scale():
    psi = TestFunction(1.0, 2.0)
    assert np.abs(psi.dilate(2.0)(3.0) - psi(1.5)) < 1e-15
    assert np.abs((3 * psi)(1.5) - 3 * psi(1.5)) < 1e-15
    assert np.abs(psi.scale(0.5)(1.2) - 0.5 * psi(1.2)) < 1e-15
    with pytest.raises(ValueError):
        psi.dilate(0.0)


def test_integral_and_mellin():
    psi = TestFunction(1.0, 2.0)
    ref, _ = quad(lambda x: float(psi(x)), 1.0, 2.0, epsabs=1e-15)
    assert np.abs(psi.integral() - ref) < 1e-12
    assert np.abs(psi.mellin(1.0) - ref) < 1e-12
    ref2, _ = quad(lambda x: float(psi(x)) * x, 1.0, 2.0, epsabs=1e-15)
    assert np.abs(psi.mellin(2.0) - ref2) < 1e-12


def test_sum_of_test_functions():
    psi = TestFunction(1.0, 2.0)
    total = psi + psi.dilate(2.0)
    assert total.support == (1.0, 4.0)
    assert np.abs(total.integral() - 3.0 * psi.integral()) < 1e-12


def test_sobolev_norm():
    psi = TestFunction(1.0, 2.0)
    assert np.abs(psi.sobolev_norm(0) - np.exp(-4.0)) < 1e-6
    assert psi.sobolev_norm(3) >= psi.sobolev_norm(1) >= psi.sobolev_norm(0)


def test_bump_validation():
    with pytest.raises(ValueError):
        Bump(2.0, 1.0)
    with pytest.raises(ValueError):
        Bump(-1.0, 1.0)
    with pytest.raises(ValueError):
        Bump(1.0, 2.0, kappa=0.0)


def test_mellin_vector_matches_mellin():
    psi = TestFunction(1.0, 2.0) + TestFunction(0.5, 1.5, kappa=2.0) * 0.5
    s = np.array([0.5, 1.0, 2.0, 1.5 + 3.0j, 1.0 - 6.0j])
    values = psi.mellin_vector(s)
    assert values.shape == s.shape
    for si, v in zip(s, values):
        ref = psi.mellin(si)
        assert np.abs(v - ref) < 1e-10 * max(1.0, abs(ref))
