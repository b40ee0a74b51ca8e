"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.

Shifted coefficient sums sum_n rho(n + m) rho(n) psi(pi n / X), their main
terms and window aggregates.
"""

import math
import logging

import numpy as np
from typing_extensions import Annotated
from pydantic import BaseModel, Field

from maassqe.errors import CoverageError, InsufficientCoefficientsError
from maassqe.helpers import divisors, stable_sum
from maassqe.maass_forms import SPECTRAL_FLOOR, hecke_lambda

logger = logging.getLogger(__name__)

ZETA2 = math.pi**2 / 6
MAIN_TERM_CONVENTIONS = ("residue", "unreduced")


class QEReport(BaseModel, title="Shifted coefficient sum of one form"):
    t: float
    parity: str
    m: Annotated[int, Field(ge=0)]
    X: Annotated[float, Field(gt=0)]
    value: float
    main_term: float
    discrepancy: float

    def to_row(self):
        return self.model_dump()


def mellin_main_term(psi, X, residue=False):
    """
    Main term (8X/pi) int psi of the m = 0 sum, divided by zeta(2) with
    `residue`, the residue of sum lambda(n)^2 n^-s at s = 1
    """
    value = 8.0 * X / math.pi * psi.integral()
    return value / ZETA2 if residue else value


def mellin_transform(psi, s):
    """
    G(s) = int_0^oo psi(y) y^(s-1) dy
    """
    return psi.mellin(s)


def _support_limit(psi, X):
    return int(math.floor(psi.l * X / math.pi))


def _require_coefficients(form, needed):
    if form.N_coeff < needed:
        raise InsufficientCoefficientsError(
            f"{form} stores N_coeff={form.N_coeff}, the sum needs {needed} = l X / pi + m"
        )


def qe_sum(form, m, X, psi, main_term="residue"):
    """
    sum_n rho(n + m) rho(n) psi(pi n / X) over the finite support of psi
    from the stored eigenvalues lambda(1..N_coeff)

    Parameters
    ----------
    form : MaassForm
        form with rho1_sq set

    m : int
        shift, m >= 0; m = 0 includes the mirrored n < 0 terms

    X : float
        length parameter

    psi : TestFunction
        supported in (0, l)

    main_term : {"residue", "unreduced"}
        convention of the m = 0 main term

    Returns
    -------
    QEReport
    """
    if main_term not in MAIN_TERM_CONVENTIONS:
        raise ValueError(f"unknown main term convention {main_term}")
    if m < 0:
        raise ValueError(f"shift must be nonnegative, got {m}")
    nmax = _support_limit(psi, X)
    _require_coefficients(form, nmax + m)
    value = 0.0
    if nmax >= 1:
        lam = form.coefficients
        n = np.arange(1, nmax + 1)
        terms = lam[n + m - 1] * lam[n - 1] * psi(np.pi * n / X)
        value = form.rho1_sq * stable_sum(terms)
    main = 0.0
    if m == 0:
        value *= 2.0
        main = mellin_main_term(psi, X, residue=main_term == "residue")
    return QEReport(
        t=form.t,
        parity=form.parity.value,
        m=m,
        X=X,
        value=value,
        main_term=main,
        discrepancy=abs(value - main) / X,
    )


def hecke_factorized_sum(form, m, X, psi):
    """
    rho(1)^2 sum_{d | m} sum_r lambda(r (r + m/d)) psi(pi d r / X), equal to
    the m >= 1 shifted sum through lambda(n) lambda(n + m) =
    sum_{d | (n, m)} lambda(n (n + m) / d^2)
    """
    if m < 1:
        raise ValueError("the factorized route needs m >= 1")
    nmax = _support_limit(psi, X)
    _require_coefficients(form, nmax + m)
    terms = []
    for d in divisors(m):
        e = m // d
        for r in range(1, nmax // d + 1):
            weight = float(psi(np.pi * d * r / X))
            if weight != 0.0:
                terms.append(hecke_lambda(form, r * (r + e)) * weight)
    return form.rho1_sq * stable_sum(terms)


def pivot_gap(form, m, X, psi, rtol=1e-9):
    """
    Gap between qe_sum and hecke_factorized_sum at shift m >= 1

    The allowance is max(rtol |direct|, 100 err rho(1)^2 tau(m) sum_n |psi(pi n / X)|):
    the two routes read the stored eigenvalues and their multiplicative
    rebuild, which agree up to the certified Hecke residual.

    Returns
    -------
    gap : float

    allowance : float
    """
    direct = qe_sum(form, m, X, psi).value
    factorized = hecke_factorized_sum(form, m, X, psi)
    n = np.arange(1, _support_limit(psi, X) + 1)
    mass = float(np.sum(np.abs(psi(np.pi * n / X)))) if len(n) else 0.0
    err = form.err if np.isfinite(form.err) else 0.0
    allowance = max(rtol * abs(direct), 100.0 * err * form.rho1_sq * len(divisors(m)) * mass)
    return abs(direct - factorized), allowance


def normalized_discrepancy(form, m, psi, main_term="residue"):
    """
    |(1/t) sum_n rho(n + m) rho(n) psi(pi |n| / t) - main / t|, the sum at X = t
    """
    return qe_sum(form, m, form.t, psi, main_term=main_term).discrepancy


def discrepancy_trend(cache, psi, low=(9.0, 20.0), high=(25.0, 40.0), dilates=(1.0, 1.25, 1.5), main_term="residue"):
    """
    Median m = 0 discrepancy at X = t over the even forms of two spectral
    bands, each form contributing its median over dilates of psi, and the
    largest m = 1 value |sum| / t over both bands

    Returns
    -------
    dict
        low and high band medians and counts, the m = 1 maximum, and the
        flags `decreasing` (high median below low median) and `bounded_shift`
        (m = 1 maximum below ten times the m = 0 median of both bands)
    """
    tests = [psi.dilate(s) for s in dilates]

    def band(lo, hi):
        forms = cache.forms(lo, hi, "even")
        zero = [float(np.median([normalized_discrepancy(f, 0, p, main_term) for p in tests])) for f in forms]
        one = [normalized_discrepancy(f, 1, psi, main_term) for f in forms]
        return zero, one

    zero_low, one_low = band(*low)
    zero_high, one_high = band(*high)
    if not zero_low or not zero_high:
        raise CoverageError(f"no even forms in one of the bands {low}, {high}")
    low_median = float(np.median(zero_low))
    high_median = float(np.median(zero_high))
    overall = float(np.median(zero_low + zero_high))
    shift_max = max(one_low + one_high)
    logger.info(f"m = 0 discrepancy median {low_median!r} on {low}, {high_median!r} on {high}")
    return {
        "low_count": len(zero_low),
        "high_count": len(zero_high),
        "low_median": low_median,
        "high_median": high_median,
        "median": overall,
        "shift_max": float(shift_max),
        "decreasing": high_median < low_median,
        "bounded_shift": shift_max < 10.0 * overall,
    }


def windowed_average(cache, w, m, X, psi, eps=0.1, A=8, main_term="residue"):
    """
    Sum over forms with |t - T| < G of |value - main|^2 against the
    normalizer X G T^(1 + eps) ||psi||^2_{W^{A, inf}}

    Returns
    -------
    dict
        count, sum, normalizer, ratio and the per-form reports
    """
    lo = max(w.T - w.G, SPECTRAL_FLOOR)
    if lo <= w.T + w.G:
        cache.require(lo, w.T + w.G)
    reports = [
        qe_sum(form, m, X, psi, main_term=main_term)
        for form in cache.forms(w.T - w.G, w.T + w.G)
        if abs(form.t - w.T) < w.G
    ]
    total = stable_sum([(r.value - r.main_term) ** 2 for r in reports])
    normalizer = X * w.G * w.T ** (1.0 + eps) * psi.sobolev_norm(A) ** 2
    logger.info(f"window T={w.T} G={w.G}: {len(reports)} forms, m={m}, X={X}, sum {total!r}")
    return {
        "T": w.T,
        "G": w.G,
        "m": m,
        "X": X,
        "count": len(reports),
        "sum": total,
        "normalizer": normalizer,
        "ratio": total / normalizer,
        "reports": [r.to_row() for r in reports],
    }


def count_report(cache, T, G):
    """
    Forms per parity with |t - T| < G against the leading Weyl law
    t^2 / 12, i.e. T G / 3 forms in the window split evenly by parity
    """
    forms = [f for f in cache.forms(T - G, T + G) if abs(f.t - T) < G]
    even = sum(1 for f in forms if f.parity.value == "even")
    odd = len(forms) - even
    expected = T * G / 3.0
    return {
        "T": T,
        "G": G,
        "even": even,
        "odd": odd,
        "total": len(forms),
        "weyl_expected": expected,
        "weyl_ratio": len(forms) / expected,
        "even_odd_ratio": even / odd if odd else math.inf,
    }
