import pytest
import numpy as np

from maassqe.errors import DomainError, RegimeError
from maassqe.oscillatory import (
    OscillatoryPhase,
    phase_derivative_check,
    oscillatory_double_integral,
    second_derivative_bound,
    stationary_window,
    poisson_tail_check,
    ratio_sweep,
)


def test_phase_without_cancellation():
    p = OscillatoryPhase(c=7, d=2, y=0.0, R=50.0)
    r1, r2 = 60.0, 75.0
    naive = (4 * np.pi / p.c) * (p.delta(r1, r2) - r1 * r2 - p.d * (r1 + r2) / 2)
    assert np.abs(p.phi(r1, r2) - naive) < 1e-9
    assert p.phi(r1, r1) == 0.0


def test_lattice_factor_reduced():
    p = OscillatoryPhase(c=5, d=1, y=1.0, R=10.0)
    big = np.array([10**6 + 3])
    assert np.abs(p.lattice_factor(big, big) - p.lattice_factor(np.array([3]), np.array([3]))) < 1e-12


def test_check_regime():
    OscillatoryPhase(c=20, d=3, y=200.0, R=2000.0).check_regime()
    with pytest.raises(RegimeError):
        OscillatoryPhase(c=3, d=3, y=1.0, R=100.0).check_regime()
    with pytest.raises(RegimeError):
        OscillatoryPhase(c=500, d=1, y=100.0, R=100.0).check_regime()


def test_phase_derivative_check():
    p = OscillatoryPhase(c=20, d=3, y=200.0, R=2000.0)
    report = phase_derivative_check(p, (1, 0))
    # dphi/dr1 at (R, R) is c T^2 / (2 pi R^3) to leading order
    assert np.abs(report["stat"] - 1.0 / (2 * np.pi)) < 0.01
    assert report["int1_max"] <= 50.0
    with pytest.raises(ValueError):
        phase_derivative_check(p, (3, 2))


def test_flat_phase_integral():
    p = OscillatoryPhase(c=3, d=0, y=0.0, R=10.0)
    value, err = oscillatory_double_integral(p, ((1.0, 2.0), (1.0, 3.0)))
    assert np.abs(value - 2.0) < 1e-10
    # e_3(-r1) over a full period vanishes
    value, _ = oscillatory_double_integral(p, ((0.0, 3.0), (1.0, 2.0)), twist=(1, 0, None))
    assert np.abs(value) < 1e-10
    with pytest.raises(DomainError):
        oscillatory_double_integral(p, ((2.0, 1.0), (1.0, 2.0)))


def test_second_derivative_bound():
    p = OscillatoryPhase(c=20, d=3, y=200.0, R=2000.0)
    report = second_derivative_bound(p, ((2000.0, 2400.0), (2000.0, 2400.0)))
    assert report["lambda"] > 0
    assert report["ratio"] <= 100.0


def test_stationary_window():
    p = OscillatoryPhase(c=20, d=3, y=200.0, R=2000.0)
    assert np.abs(stationary_window(p) - 400.0 * 40000.0 / 8e9) < 1e-15


def test_poisson_tail_small():
    p = OscillatoryPhase(c=5, d=1, y=20.0, R=100.0)
    report = poisson_tail_check(p, J=2)
    assert report["tail_ratio"] <= 0.05
    assert report["poisson_defect"] <= 1e-4
    with pytest.raises(ValueError):
        poisson_tail_check(p, J=0)


def test_lattice_factor_times_f_c():
    # e_c(2 r1 r2 + d r1 + d r2) f_c(r1, r2) = psi psi (4y^2 + x^2)^(-1/4) e^(i x + i alpha(x))
    p = OscillatoryPhase(c=7, d=2, y=20.0, R=100.0)
    r = np.linspace(110, 190, 10).astype(np.int64)
    R1, R2 = np.meshgrid(r, r, indexing="ij")
    lhs = p.lattice_factor(R1, R2) * p.f_c(R1, R2)
    rhs = p.psi(R1 / p.R) * p.psi(R2 / p.R) * p.expansion_term(p.argument(R1, R2))
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def test_ratio_sweep():
    p = OscillatoryPhase(c=20, d=3, y=200.0, R=2000.0)
    reports = ratio_sweep(p, (1, 0))
    assert len(reports) == 4
    assert [r["R"] for r in reports] == [2000.0, 4000.0, 2000.0, 2000.0]
    for report in reports:
        assert np.abs(report["stat"] - 1.0 / (2 * np.pi)) < 0.01
        assert report["int1_max"] <= 50.0


def test_stationary_twist_dominates():
    # y chosen so that the twist u = v = 1 is stationary at r1 = r2 = 1500
    p = OscillatoryPhase(c=100, d=0, y=2 * np.pi * 1500**1.5 / 100, R=1000.0)
    domain = ((1000.0, 2000.0), (1000.0, 2000.0))
    inside, _ = oscillatory_double_integral(p, domain, twist=(1, 1, None), weighted=True)
    outside, _ = oscillatory_double_integral(p, domain, twist=(10, 10, None), weighted=True)
    assert np.abs(outside) <= 1e-3 * np.abs(inside)


@pytest.mark.slow
def test_poisson_tail_large_box():
    p = OscillatoryPhase(c=20, d=3, y=200.0, R=2000.0)
    report = poisson_tail_check(p, J=2)
    assert report["tail_ratio"] <= 0.05
    assert "lattice_sum" not in report
