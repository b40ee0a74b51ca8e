import pytest
import numpy as np

from maassqe.bumps import TestFunction
from maassqe.errors import CoverageError, InsufficientCoefficientsError
from maassqe.maass_forms import MaassForm
from maassqe.spectral_transforms import WindowKernel
from maassqe.qe_statistics import (
    ZETA2,
    mellin_main_term,
    mellin_transform,
    qe_sum,
    hecke_factorized_sum,
    pivot_gap,
    normalized_discrepancy,
    discrepancy_trend,
    windowed_average,
    count_report,
)

psi = TestFunction(1.0, 2.0)


def test_main_term_conventions():
    X = 25.0
    unreduced = mellin_main_term(psi, X)
    assert np.abs(unreduced - 8 * X / np.pi * psi.integral()) < 1e-12 * unreduced
    assert np.abs(mellin_main_term(psi, X, residue=True) * ZETA2 - unreduced) < 1e-12 * unreduced
    assert np.abs(mellin_transform(psi, 1.0) - psi.integral()) < 1e-12


@pytest.mark.parametrize("m", [1, 2, 3, 4, 6])
def test_pivot_identity(odd_form, even_form, m):
    for form in (odd_form, even_form):
        gap, allowance = pivot_gap(form, m, form.t, psi)
        assert gap <= allowance
        assert allowance <= max(1e-9 * abs(qe_sum(form, m, form.t, psi).value), 1e-5)


def test_qe_sum_reads_stored_coefficients():
    # lambda(4) = 0.9 breaks lambda(4) = lambda(2)^2 - 1
    lam = np.array([1.0, 0.3, -0.4, 0.9, 0.2, -0.7, 0.5, 0.1])
    form = MaassForm(10.0, "even", lam, rho1_sq=2.0)
    X = 2 * np.pi
    n = np.arange(1, 4)
    expected = 2.0 * np.sum(lam[n] * lam[n - 1] * psi(np.pi * n / X))
    direct = qe_sum(form, 1, X, psi).value
    assert np.abs(direct - expected) < 1e-14
    assert np.abs(direct - hecke_factorized_sum(form, 1, X, psi)) > 0.5 * np.abs(direct)
    with pytest.raises(InsufficientCoefficientsError):
        qe_sum(form, 1, 5 * np.pi, psi)


def test_qe_sum_linear_in_test_function(even_form):
    other = TestFunction(0.5, 1.5, kappa=2.0)
    X = even_form.t
    for m in (0, 1, 3):
        joint = qe_sum(even_form, m, X, psi + 2.0 * other, main_term="unreduced")
        parts = qe_sum(even_form, m, X, psi, main_term="unreduced").value + 2.0 * qe_sum(
            even_form, m, X, other, main_term="unreduced"
        ).value
        assert np.abs(joint.value - parts) < 1e-12 * max(1.0, abs(parts))
    scaled = mellin_main_term(3.0 * psi, X)
    assert np.abs(scaled - 3.0 * mellin_main_term(psi, X)) < 1e-12 * scaled


def test_zero_shift_report(even_form):
    r = qe_sum(even_form, 0, even_form.t, psi, main_term="unreduced")
    assert r.main_term == mellin_main_term(psi, even_form.t)
    assert np.abs(r.discrepancy - abs(r.value - r.main_term) / even_form.t) < 1e-15
    assert normalized_discrepancy(even_form, 0, psi, "unreduced") == r.discrepancy
    assert qe_sum(even_form, 1, even_form.t, psi).main_term == 0.0


def test_empty_support(odd_form):
    r = qe_sum(odd_form, 2, 1.0, psi)
    assert r.value == 0.0


def test_errors(odd_form):
    with pytest.raises(InsufficientCoefficientsError):
        qe_sum(odd_form, 1, 1000.0, psi)
    with pytest.raises(ValueError):
        qe_sum(odd_form, -1, 10.0, psi)
    with pytest.raises(ValueError):
        qe_sum(odd_form, 1, 10.0, psi, main_term="other")
    with pytest.raises(ValueError):
        hecke_factorized_sum(odd_form, 0, 10.0, psi)


def test_window_needs_both_parities(odd_cache):
    with pytest.raises(CoverageError):
        windowed_average(odd_cache, WindowKernel(T=9.55, G=0.2), 1, 10.0, psi)


@pytest.mark.slow
def test_windowed_average(wide_cache):
    w = WindowKernel(T=20.0, G=2.0)
    result = windowed_average(wide_cache, w, 1, 20.0, psi)
    assert result["count"] == len(result["reports"]) > 0
    assert result["normalizer"] > 0
    assert np.isfinite(result["ratio"])


@pytest.mark.slow
def test_count_report(wide_cache):
    report = count_report(wide_cache, 30.0, 5.0)
    assert report["total"] == report["even"] + report["odd"]
    assert report["weyl_expected"] == 50.0
    assert 0.2 < report["weyl_ratio"] < 1.2
    assert 0.3 < report["even_odd_ratio"] < 3.0


@pytest.mark.slow
def test_discrepancy_trend(wide_cache):
    trend = discrepancy_trend(wide_cache, psi)
    assert trend["low_count"] > 0 and trend["high_count"] > 0
    assert trend["high_median"] < trend["low_median"]
    assert trend["shift_max"] < 10.0 * trend["median"]
    assert trend["decreasing"] and trend["bounded_shift"]


def test_discrepancy_trend_needs_both_bands(even_cache):
    with pytest.raises(CoverageError):
        discrepancy_trend(even_cache, psi)
