import math

import pytest
import numpy as np
import mpmath
from pydantic import ValidationError

from maassqe.errors import CoverageError
from maassqe.helpers import divisor_count
from maassqe.spectral_transforms import WindowKernel
from maassqe.kuznetsov import (
    TraceCheckConfig,
    zeta_one_line,
    divisor_twist,
    diagonal_term,
    tau_tail_sum,
    kloosterman_tail,
    spectral_side,
    cusp_terms,
    trace_check,
    refinement_ladder,
)


def test_zeta_one_line():
    for t in (0.3, 2.5, 17.2, 60.0):
        ref = complex(mpmath.zeta(mpmath.mpc(1, 2 * t)))
        value, err = zeta_one_line(t, with_error=True)
        assert np.abs(value - ref) < 1e-10 * abs(ref)
        assert err < 1e-10
    assert zeta_one_line(0.0) == complex(np.inf)
    values = zeta_one_line(np.array([0.3, 2.5]))
    assert values.shape == (2,)


def test_divisor_twist():
    assert divisor_twist(1, 3.7) == 1.0
    assert np.abs(divisor_twist(6, 0.0) - divisor_count(6)) < 1e-15
    # tau_ir(p) = p^(ir) + p^(-ir)
    assert np.abs(divisor_twist(5, 1.3) - 2 * math.cos(1.3 * math.log(5))) < 1e-14


def test_config_validation():
    w = WindowKernel(T=12.0, G=3.0)
    with pytest.raises(ValidationError):
        TraceCheckConfig(w=w, t_max=30.0)
    lo, hi = TraceCheckConfig(w=w).spectral_range()
    assert lo > 3.8 and hi < 40.0


def test_diagonal_term():
    w = WindowKernel(T=12.0, G=3.0)
    ref = 2.0 / math.pi**2 * 12.0 * 3.0 * math.sqrt(math.pi)
    assert np.abs(diagonal_term(TraceCheckConfig(w=w)) - ref) < 1e-6 * ref
    assert diagonal_term(TraceCheckConfig(w=w, n=1, m=2)) == 0.0


def test_tau_tail_sum():
    C, N = 100, 100000
    tau = np.zeros(N + 1)
    for d in range(1, N + 1):
        tau[d::d] += 1
    c = np.arange(C + 1, N + 1)
    partial = np.sum(tau[C + 1 :] * c**-2.5)
    assert partial <= tau_tail_sum(C)
    assert tau_tail_sum(2 * C) < tau_tail_sum(C)


def test_kloosterman_tail_decreases():
    cfg = TraceCheckConfig(w=WindowKernel(T=12.0, G=3.0))
    assert kloosterman_tail(cfg, 1.0, 20000) < kloosterman_tail(cfg, 1.0)


def test_spectral_side_needs_coverage(odd_cache):
    cfg = TraceCheckConfig(w=WindowKernel(T=12.0, G=3.0))
    with pytest.raises(CoverageError):
        spectral_side(cfg, odd_cache)


@pytest.mark.slow
def test_cusp_terms_positive(wide_cache):
    cfg = TraceCheckConfig(w=WindowKernel(T=12.0, G=3.0))
    rows = cusp_terms(cfg, wide_cache)
    assert len(rows) > 0
    assert all(r["term"] > 0 for r in rows)


@pytest.mark.slow
@pytest.mark.parametrize("n, m", [(1, 1), (1, 2), (2, 3)])
def test_trace_formula(wide_cache, n, m):
    cfg = TraceCheckConfig(w=WindowKernel(T=12.0, G=3.0), n=n, m=m)
    result = trace_check(cfg, wide_cache)
    assert result["passed"], result
    geometric = result["geometric"]
    assert np.abs(geometric["kloosterman"] - geometric["kloosterman_tilde"]) < 10 * cfg.tol


@pytest.mark.slow
def test_refinement_ladder(wide_cache):
    cfg = TraceCheckConfig(w=WindowKernel(T=12.0, G=3.0))
    rungs = refinement_ladder(cfg, wide_cache, steps=3)
    assert [r["c_max"] for r in rungs] == [100, 1000, 10000]
    assert [r["t_max"] for r in rungs] == [15.0, 18.0, 40.0]
    residuals = [r["residual"] for r in rungs]
    assert all(b < a for a, b in zip(residuals, residuals[1:])), residuals
    assert residuals[-1] <= cfg.tol


def test_refinement_ladder_needs_two_steps(odd_cache):
    cfg = TraceCheckConfig(w=WindowKernel(T=12.0, G=3.0))
    with pytest.raises(ValueError):
        refinement_ladder(cfg, odd_cache, steps=1)
