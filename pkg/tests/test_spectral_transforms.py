import pytest
import numpy as np
from pydantic import ValidationError

from maassqe.errors import DomainError, RegimeError
from maassqe.spectral_transforms import (
    WindowKernel,
    AsymptoticExpansion,
    adaptive_panels,
    transform_route,
    g_transform,
    g_tilde,
    transform_batch,
    transform_table,
    phase_coefficients,
    fit_expansion,
    expansion_value,
    g_asymptotic,
    small_argument_constant,
    transition_decay,
    imaginary_part_check,
    _cosh_quadrature,
    _y_quadrature,
)


def test_window_validation():
    with pytest.raises(ValidationError):
        WindowKernel(T=3.0, G=4.0)
    with pytest.raises(ValidationError):
        WindowKernel(T=100.0, G=10.0, theta=0.2)
    w = WindowKernel.from_theta(100.0, 0.5)
    assert np.abs(w.G - 10.0) < 1e-12
    assert np.abs(w.epsilon - 0.125) < 1e-15
    assert np.abs(w.regime_start() - 10.0 * 100.0**0.875) < 1e-9


def test_window_without_regime():
    w = WindowKernel(T=100.0, G=2.0)
    with pytest.raises(RegimeError):
        w.epsilon


def test_window_is_even():
    w = WindowKernel(T=12.0, G=3.0)
    y = np.linspace(0.0, 30.0, 7)
    assert np.max(np.abs(w.h(y) - w.h(-y))) == 0.0
    assert np.abs(w.h(12.0) - 1.0) < 1e-12


def test_adaptive_panels():
    value, err = adaptive_panels(lambda x: np.exp(1j * 40.0 * x), np.array([0.0, 1.0]), 1e-12)
    ref = (np.exp(40j) - 1.0) / 40j
    assert np.abs(value - ref) < 1e-12
    assert err <= 1e-12


def test_routes():
    w = WindowKernel(T=12.0, G=3.0)
    assert transform_route(w, 0.5) == "series"
    assert transform_route(w, 40.0) == "cosh"
    assert transform_route(WindowKernel(T=12.0, G=0.2), 1e5) == "mpmath"


def test_g_is_imaginary():
    w = WindowKernel(T=12.0, G=3.0)
    for x in (0.5, 3.0, 20.0):
        value, err = g_transform(w, x, with_error=True)
        assert np.abs(value.real) <= err + 1e-12


def test_g_from_one_sided_transform():
    w = WindowKernel(T=12.0, G=3.0)
    worst, budget = imaginary_part_check(w, [0.5, 3.0, 20.0])
    assert worst <= 10 * budget + 1e-12


def test_series_and_cosh_routes_agree():
    w = WindowKernel(T=12.0, G=3.0)
    a, _ = _y_quadrature(w, 16.0, 1e-11, True, "series")
    b, _ = _cosh_quadrature(w, 16.0, 1e-11, True)
    assert np.abs(a - b) < 1e-8


def test_batch_matches_single():
    w = WindowKernel(T=12.0, G=3.0)
    xs = np.array([0.3, 2.0, 9.0])
    g, gt, err = transform_batch(w, xs)
    for x, gi, gti in zip(xs, g, gt):
        assert np.abs(gi - g_transform(w, x)) < 1e-8
        assert np.abs(gti - g_tilde(w, x)) < 1e-8
    with pytest.raises(DomainError):
        transform_batch(w, [20.0])


def test_transform_table_rows():
    w = WindowKernel(T=12.0, G=3.0)
    rows = transform_table(w, [0.5, 1.0])
    assert [r["x"] for r in rows] == [0.5, 1.0]
    assert all(set(r) == {"x", "re_g", "im_g", "err"} for r in rows)
    with pytest.raises(DomainError):
        g_transform(w, 0.0)


def test_zero_weight_window():
    w = WindowKernel(T=12.0, G=3.0, weight=0.0)
    assert g_transform(w, 1.0) == 0.0


def test_small_argument_constant():
    w = WindowKernel(T=50.0, G=10.0)
    assert small_argument_constant(w, np.geomspace(1e-3, 0.5, 8)) <= 10.0


def test_phase_coefficients():
    c = phase_coefficients(3)
    assert c[0] == -2.0
    assert np.abs(c[1] - 2.0 / 3.0) < 1e-15
    a = AsymptoticExpansion(N=2)
    assert a.b_m == [1.0, 0.0, 0.0]
    with pytest.raises(ValidationError):
        AsymptoticExpansion(N=2, b_m=[0.5, 0.0, 0.0])
    # exact phase sqrt(x^2 + 4y^2) - 2y asinh(2y/x) - x against the series
    y, x = 3.0, 200.0
    exact = np.sqrt(x * x + 4 * y * y) - 2 * y * np.arcsinh(2 * y / x) - x
    assert np.abs(AsymptoticExpansion(N=4).alpha(y, x) - exact) < 1e-12


def test_expansion_regime():
    w = WindowKernel(T=50.0, G=10.0)
    with pytest.raises(RegimeError):
        g_asymptotic(AsymptoticExpansion(), w, 0.5 * w.regime_start(), 0)


@pytest.mark.slow
def test_transition_decay():
    w = WindowKernel(T=50.0, G=10.0)
    assert transition_decay(w, eps=0.2, samples=6) <= 1e-6


@pytest.mark.slow
def test_expansion_matches_one_sided_transform():
    w = WindowKernel(T=50.0, G=10.0)
    a = fit_expansion(w, N=3)
    x = 10 * w.G * w.T
    ref = g_tilde(w, x)
    assert np.abs(expansion_value(a, w, x) - ref) < 1e-3 * np.abs(ref)
