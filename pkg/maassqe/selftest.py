"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.

Invariant suite behind `maassqe selftest`. Every check returns rows with
the measured value, its threshold and the verdict.
"""

import os
import math
import logging
import tempfile

import numpy as np
from tqdm import tqdm

from maassqe.exp_sums import (
    TwistedSumParams,
    kloosterman,
    weil_ratio,
    gauss_magnitude_defect,
    twisted_sum_direct,
    twisted_sum_evaluated,
    coprime_split,
)
from maassqe.maass_forms import CoefficientCache, Parity, max_hecke_residual
from maassqe.spectral_transforms import (
    WindowKernel,
    imaginary_part_check,
    small_argument_constant,
    transition_decay,
    fit_expansion,
    expansion_value,
    g_tilde,
)
from maassqe.oscillatory import OscillatoryPhase, second_derivative_bound, poisson_tail_check
from maassqe.kuznetsov import TraceCheckConfig, trace_check, refinement_ladder
from maassqe.qe_statistics import pivot_gap, discrepancy_trend
from maassqe.geodesic_nodal import chain_inequality_report, nodal_trend

logger = logging.getLogger(__name__)

REFERENCE_FORMS = ((9.533695261, "odd"), (13.779751351, "even"))
SELFTEST_TMAX = 40.0
SEED = 20240101
KUZNETSOV_PAIRS = ((1, 1), (1, 2), (2, 3))
# (R, T, c, d) of the oscillatory checks
OSCILLATORY_PHASE = (2000.0, 200.0, 20, 3)


def _row(check, value, threshold, passed):
    logger.info(f"{check}: {value!r} against {threshold!r}, {'ok' if passed else 'FAILED'}")
    return {"check": check, "value": float(value), "threshold": float(threshold), "passed": bool(passed)}


# --------------------------------------------------------------------
#             EXPONENTIAL SUMS
# --------------------------------------------------------------------


def check_kloosterman(config, cache, mapper):
    value = abs(kloosterman(1, 1, 3) + 1.0)
    return [_row("kloosterman_1_1_3", value, 1e-12, value <= 1e-12)]


def check_weil(config, cache, mapper):
    worst = max(weil_ratio(n, m, c) for c in range(1, 2001) for n in range(1, 11) for m in range(1, 11))
    return [_row("weil_bound", worst, 1.0, worst <= 1.0 + 1e-12)]


def check_gauss(config, cache, mapper):
    worst = max(gauss_magnitude_defect(c) for c in range(1, 1000, 2))
    return [_row("gauss_magnitude", worst, 1e-9, worst <= 1e-9)]


def _twisted_cases(rng, count, cmax=200):
    cases = []
    while len(cases) < count:
        c = int(rng.integers(1, cmax // 2)) * 2 + 1
        gamma = int(rng.integers(1, 20))
        if math.gcd(c, 2 * gamma) != 1:
            continue
        u, v = (int(rng.integers(-(c // 2), c // 2 + 1)) for _ in range(2))
        cases.append(TwistedSumParams(c=c, d=int(rng.integers(-10, 11)), u=u, v=v, gamma=gamma))
    return cases


def check_twisted(config, cache, mapper):
    """
    Closed form against the defining double sum in exact cyclotomic
    arithmetic, and exact vanishing when (u, c) != (v, c)
    """
    mismatches, vanishing, nonzero = 0, 0, 0
    for p in _twisted_cases(np.random.default_rng(SEED), 100):
        evaluated = twisted_sum_evaluated(p, exact=True)
        if evaluated != twisted_sum_direct(p, exact=True):
            mismatches += 1
        if math.gcd(p.u, p.c) != math.gcd(p.v, p.c):
            vanishing += 1
            nonzero += not evaluated.is_zero()
    logger.info(f"{vanishing} of 100 twisted cases lie on the vanishing branch")
    return [
        _row("twisted_closed_form", mismatches, 0, mismatches == 0),
        _row("twisted_vanishing", nonzero, 0, nonzero == 0),
    ]


def check_crt(config, cache, mapper):
    """
    S_c1c2(gamma) = S_c1(gamma c2) S_c2(gamma c1) on 200 random coprime pairs
    """
    rng = np.random.default_rng(SEED + 1)
    worst, done = 0.0, 0
    while done < 200:
        c1, c2 = (int(x) for x in rng.integers(2, 13, size=2))
        if math.gcd(c1, c2) != 1:
            continue
        c = c1 * c2
        p = TwistedSumParams(
            c=c,
            d=int(rng.integers(-10, 11)),
            u=int(rng.integers(-(c // 2), c // 2 + 1)),
            v=int(rng.integers(-(c // 2), c // 2 + 1)),
            gamma=int(rng.integers(1, 10)),
        )
        first, second = coprime_split(p, c1)
        whole = twisted_sum_direct(p)
        product = twisted_sum_direct(first) * twisted_sum_direct(second)
        worst = max(worst, abs(whole - product) / c**3)
        done += 1
    return [_row("twisted_crt", worst, 1e-12, worst <= 1e-12)]


# --------------------------------------------------------------------
#             FORMS
# --------------------------------------------------------------------


def check_spectrum(config, cache, mapper):
    rows = []
    for t, parity in REFERENCE_FORMS:
        found = cache.forms(t - 0.01, t + 0.01, parity)
        dist = min((abs(f.t - t) for f in found), default=math.inf)
        rows.append(_row(f"spectrum_{parity}_{t:.4f}", dist, 1e-6, dist <= 1e-6))
    return rows


def check_hecke(config, cache, mapper):
    worst = max((max_hecke_residual(f, 100) for f in cache.forms(hi=SELFTEST_TMAX)), default=0.0)
    return [_row("hecke_residual", worst, 1e-7, worst < 1e-7)]


def check_roundtrip(config, cache, mapper):
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "cache.jsonl")
        cache.save(path)
        back = CoefficientCache.load(path)
    same = [a.to_record() for a in cache] == [b.to_record() for b in back]
    return [_row("cache_roundtrip", 0.0 if same else 1.0, 0.0, same)]


def check_pivot(config, cache, mapper):
    """
    Direct and Hecke-factorized shifted sums, m <= 6, at X = t; the value
    is the largest gap in units of its allowance
    """
    psi = config.psi.test_function()
    worst = 0.0
    for form in cache.forms(hi=SELFTEST_TMAX):
        for m in range(1, 7):
            gap, allowance = pivot_gap(form, m, form.t, psi)
            worst = max(worst, gap / allowance if allowance > 0 else (math.inf if gap > 0 else 0.0))
    return [_row("hecke_pivot", worst, 1.0, worst <= 1.0)]


# --------------------------------------------------------------------
#             TRANSFORMS AND OSCILLATORY INTEGRALS
# --------------------------------------------------------------------


def check_transform(config, cache, mapper):
    w = WindowKernel(T=12.0, G=3.0)
    worst, budget = imaginary_part_check(w, [0.5, 2.0, 8.0], config.quadrature_tol)
    bound = max(10 * budget, 1e-8)
    small = small_argument_constant(WindowKernel(T=50.0, G=10.0), np.geomspace(1e-3, 0.5, 8), config.quadrature_tol)
    return [
        _row("transform_imaginary_part", worst, bound, worst <= bound),
        _row("transform_small_argument", small, 10.0, small <= 10.0),
    ]


def check_transform_asymptotics(config, cache, mapper):
    w = WindowKernel(T=50.0, G=10.0)
    decay = transition_decay(w, eps=0.2, quadrature_tol=config.quadrature_tol, samples=6)
    a = fit_expansion(w, N=3, quadrature_tol=config.quadrature_tol)
    x = 10 * w.G * w.T
    ref = g_tilde(w, x, config.quadrature_tol)
    rel = abs(expansion_value(a, w, x, config.quadrature_tol) - ref) / abs(ref)
    return [
        _row("transform_transition_decay", decay, 1e-6, decay <= 1e-6),
        _row("transform_expansion_fit", rel, 1e-3, rel <= 1e-3),
    ]


def check_oscillatory(config, cache, mapper):
    R, T, c, d = OSCILLATORY_PHASE
    p = OscillatoryPhase(c=c, d=d, y=T, R=R)
    ratio = second_derivative_bound(p, ((R, 1.2 * R), (R, 1.2 * R)))["ratio"]
    tail = poisson_tail_check(p, J=2)["tail_ratio"]
    identity = poisson_tail_check(OscillatoryPhase(c=5, d=1, y=20.0, R=100.0), J=2)["poisson_defect"]
    return [
        _row("second_derivative_ratio", ratio, 100.0, ratio <= 100.0),
        _row("poisson_tail", tail, 0.05, tail <= 0.05),
        _row("poisson_identity", identity, 1e-4, identity <= 1e-4),
    ]


# --------------------------------------------------------------------
#             TRACE FORMULA, QE AND NODAL STATISTICS
# --------------------------------------------------------------------


def _trace_config(config, n=1, m=1):
    return TraceCheckConfig(
        w=WindowKernel(T=12.0, G=3.0),
        n=n,
        m=m,
        t_max=SELFTEST_TMAX,
        c_max=config.c_max,
        tol=config.trace_tol,
        quadrature_tol=config.quadrature_tol,
    )


def check_kuznetsov(config, cache, mapper, progress=False):
    rows = []
    for n, m in KUZNETSOV_PAIRS:
        cfg = _trace_config(config, n, m)
        result = trace_check(cfg, cache, mapper=mapper, progress=progress)
        rows.append(_row(f"kuznetsov_{n}_{m}", result["residual"], cfg.tol, result["passed"]))
    residuals = [r["residual"] for r in refinement_ladder(_trace_config(config), cache, 3, mapper=mapper)]
    decreasing = all(b < a for a, b in zip(residuals, residuals[1:]))
    rows.append(_row("kuznetsov_ladder", residuals[-1], residuals[0], decreasing))
    return rows


def check_qe_trend(config, cache, mapper):
    trend = discrepancy_trend(cache, config.psi.test_function(), main_term=config.main_term)
    return [
        _row("qe_decay", trend["high_median"], trend["low_median"], trend["decreasing"]),
        _row("qe_shift_bounded", trend["shift_max"], 10.0 * trend["median"], trend["bounded_shift"]),
    ]


def check_nodal(config, cache, mapper):
    reports = [
        chain_inequality_report(f, config.segment, config.density)
        for f in cache.forms(hi=SELFTEST_TMAX, parity=Parity.EVEN)
    ]
    smallest = min((r.l2_restriction for r in reports), default=math.inf)
    chain = all(r.chain_holds for r in reports)
    spearman = nodal_trend([r for r in reports if 13.0 <= r.t <= SELFTEST_TMAX])["spearman"]
    return [
        _row("restriction_norm", smallest, 0.05, smallest > 0.05),
        _row("chain_inequality", float(chain), 1.0, chain),
        _row("nodal_spearman", spearman, 0.5, spearman > 0.5),
    ]


CHECKS = (
    check_kloosterman,
    check_weil,
    check_gauss,
    check_twisted,
    check_crt,
    check_spectrum,
    check_hecke,
    check_roundtrip,
    check_pivot,
    check_transform,
    check_transform_asymptotics,
    check_oscillatory,
    check_kuznetsov,
    check_qe_trend,
    check_nodal,
)


def run_checks(config, cache, mapper=map, progress=False):
    """
    Run every check in order

    Returns
    -------
    rows : list of dict
        check, value, threshold, passed
    """
    rows = []
    for check in tqdm(CHECKS, desc="selftest", disable=not progress):
        rows.extend(check(config, cache, mapper))
    return rows
