"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.

Maass-Hecke cusp forms for SL(2, Z): evaluation, Hecke structure, the
symmetric square normalization and the coefficient cache.

A form is stored through its Hecke eigenvalues lambda(n), n <= N_coeff,
with lambda(1) = 1, and evaluated as

    phi(z) = 2 rho(1) sqrt((1 + exp(-2 pi t)) / 2)
             sum_{n >= 1} lambda(n) sqrt(y) Kt(2 pi n y) cs(2 pi n x)

with Kt the exponentially scaled K-Bessel function and cs = cos for even
and sin for odd forms.
"""

import os
import json
import math
import logging
from enum import Enum
from functools import cached_property

import numpy as np
from scipy.special import loggamma

from maassqe.errors import (
    DomainError,
    InsufficientCoefficientsError,
    CacheVersionError,
    CoverageError,
)
from maassqe.helpers import divisors, sieve_primes, float_repr
from maassqe.bumps import TestFunction
from maassqe.integrators import panel_rule, uniform_edges
from maassqe.special_functions import k_bessel_scaled, k_log_magnitude

logger = logging.getLogger(__name__)

CACHE_FORMAT = "maassqe-coefficients"
CACHE_VERSION = 1
EVALUATION_FLOOR = 0.08
# cusp forms for SL(2, Z) have eigenvalue above 3 pi^2 / 2
SPECTRAL_FLOOR = math.sqrt(1.5 * math.pi**2 - 0.25)
# automorphy sample points z = x + 0.9i, compared against -1/z
AUTOMORPHY_X = (-0.4, -0.2, 0.1, 0.3)
AUTOMORPHY_Y = 0.9


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"


def pullback(x, y):
    """
    Map points of the upper half-plane into the standard fundamental
    domain of SL(2, Z)

    Parameters
    ----------
    x, y : array_like
        real and imaginary parts

    Returns
    -------
    x, y : ndarray
        pulled back coordinates, |x| <= 1/2 and x^2 + y^2 >= 1
    """
    x = np.array(x, dtype=float, ndmin=1)
    y = np.array(y, dtype=float, ndmin=1)
    for _ in range(1000):
        x = x - np.floor(x + 0.5)
        r2 = x * x + y * y
        inside = r2 < 1.0 - 1e-14
        if not np.any(inside):
            break
        x[inside], y[inside] = -x[inside] / r2[inside], y[inside] / r2[inside]
    return x, y


def required_coefficients(t):
    """
    Number of Hecke eigenvalues needed by the symmetric square
    normalization at spectral parameter t
    """
    return int(math.ceil(5.0 * t + 20.0))


class MaassForm:
    """
    Maass-Hecke cusp form for SL(2, Z)

    Parameters
    ----------
    t : float
        spectral parameter, Laplace eigenvalue 1/4 + t^2

    parity : {"even", "odd"}
        eigenvalue under z -> -conj(z)

    coefficients : array_like
        Hecke eigenvalues lambda(1), ..., lambda(N_coeff) with lambda(1) = 1

    rho1_sq : float, optional
        rho(1)^2, fixed by rho(1)^2 L(1, sym^2) = 4

    err : float, optional
        certified residual bound of the solver
    """

    def __init__(self, t, parity, coefficients, rho1_sq=None, err=np.inf):
        coefficients = np.array(coefficients, dtype=float)
        if coefficients.ndim != 1 or len(coefficients) < 1:
            raise ValueError("coefficients must be a non-empty vector")
        if coefficients[0] != 1.0:
            raise ValueError(f"lambda(1) must be exactly 1, got {coefficients[0]}")
        if t <= 0:
            raise ValueError(f"spectral parameter must be positive, got {t}")
        coefficients.setflags(write=False)
        self.t = float(t)
        self.parity = Parity(parity)
        self.coefficients = coefficients
        self.rho1_sq = None if rho1_sq is None else float(rho1_sq)
        self.err = float(err)

    @property
    def N_coeff(self):
        return len(self.coefficients)

    @property
    def eigenvalue(self):
        return 0.25 + self.t * self.t

    def replace(self, **kwargs):
        values = dict(
            t=self.t,
            parity=self.parity,
            coefficients=self.coefficients,
            rho1_sq=self.rho1_sq,
            err=self.err,
        )
        values.update(kwargs)
        return MaassForm(**values)

    @cached_property
    def _prime_powers(self):
        return {}

    def lam(self, n):
        return hecke_lambda(self, n)

    def lambda_table(self, nmax):
        """
        Hecke-consistent eigenvalues lambda(1..nmax), built multiplicatively
        from lambda(p) for primes p <= N_coeff
        """
        return lambda_table(self, nmax)

    def to_record(self):
        return {
            "t": float_repr(self.t),
            "parity": self.parity.value,
            "rho1_sq": None if self.rho1_sq is None else float_repr(self.rho1_sq),
            "err": float_repr(self.err),
            "lambda": [float_repr(v) for v in self.coefficients],
        }

    @classmethod
    def from_record(cls, record):
        return cls(
            t=float(record["t"]),
            parity=record["parity"],
            coefficients=[float(v) for v in record["lambda"]],
            rho1_sq=None if record["rho1_sq"] is None else float(record["rho1_sq"]),
            err=float(record["err"]),
        )

    def __repr__(self):
        return f"MaassForm(t={self.t!r}, parity={self.parity.value}, N_coeff={self.N_coeff}, err={self.err:.2e})"


# --------------------------------------------------------------------
#             HECKE STRUCTURE
# --------------------------------------------------------------------


def _prime_power_lambda(form, p, e):
    cache = form._prime_powers
    key = (p, e)
    if key not in cache:
        if p > form.N_coeff:
            raise InsufficientCoefficientsError(
                f"lambda({p}^{e}) needs lambda({p}), but only N_coeff={form.N_coeff} are stored"
            )
        lp = form.coefficients[p - 1]
        prev, cur = 1.0, lp
        for _ in range(e - 1):
            prev, cur = cur, lp * cur - prev
        cache[key] = cur if e > 0 else 1.0
    return cache[key]


def hecke_lambda(form, n):
    """
    lambda(n) for any n whose prime factors are at most N_coeff, through
    multiplicativity and lambda(p^(k+1)) = lambda(p) lambda(p^k) - lambda(p^(k-1))
    """
    if n < 1:
        raise DomainError(f"Hecke eigenvalues are indexed by n >= 1, got {n}")
    value = 1.0
    m = n
    p = 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            value *= _prime_power_lambda(form, p, e)
        p += 1 if p == 2 else 2
    if m > 1:
        value *= _prime_power_lambda(form, m, 1)
    return value


def lambda_table(form, nmax):
    """
    Vector of lambda(1..nmax) through a smallest prime factor sieve
    """
    nmax = int(nmax)
    primes = sieve_primes(nmax)
    if primes and primes[-1] > form.N_coeff:
        raise InsufficientCoefficientsError(
            f"lambda table up to {nmax} needs primes beyond N_coeff={form.N_coeff}"
        )
    spf = np.zeros(nmax + 1, dtype=np.int64)
    for p in primes:
        block = spf[p::p]
        block[block == 0] = p
    out = np.ones(nmax + 1)
    for n in range(2, nmax + 1):
        p = int(spf[n])
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        out[n] = _prime_power_lambda(form, p, e) * out[m]
    return out[1:]


def hecke_residual(form, n, m):
    """
    |lambda(n) lambda(m) - sum_{d | (n, m)} lambda(n m / d^2)| on the stored
    eigenvalues

    Parameters
    ----------
    form : MaassForm

    n, m : int
        indices with n m <= N_coeff

    Returns
    -------
    float
    """
    if n < 1 or m < 1 or n * m > form.N_coeff:
        raise InsufficientCoefficientsError(
            f"Hecke relation at (n, m) = ({n}, {m}) needs N_coeff >= {n * m}, have {form.N_coeff}"
        )
    lam = form.coefficients
    rhs = sum(lam[n * m // (d * d) - 1] for d in divisors(math.gcd(n, m)))
    return abs(lam[n - 1] * lam[m - 1] - rhs)


def max_hecke_residual(form, nm_max=None):
    nm_max = form.N_coeff if nm_max is None else min(nm_max, form.N_coeff)
    worst = 0.0
    for n in range(2, nm_max + 1):
        for m in range(n, nm_max // n + 1):
            worst = max(worst, hecke_residual(form, n, m))
    return worst


# --------------------------------------------------------------------
#             EVALUATION
# --------------------------------------------------------------------


def _k_envelope(t, x):
    # saddle point size of the scaled K-Bessel function beyond the turning point
    s = np.sqrt(np.maximum(x * x - t * t, 1e-300))
    return 2.0 * np.sqrt(0.5 * np.pi / s) * np.exp(k_log_magnitude(t, x))


def tail_bound(form, y):
    """
    Bound on the truncated part of the normalized series at height y,
    with |lambda(n)| <= tau(n) <= 2 sqrt(n)
    """
    n = np.arange(form.N_coeff + 1, form.N_coeff + 4001)
    x = 2 * np.pi * n * y
    if x[0] <= form.t + 1.0:
        return np.inf
    terms = 2.0 * np.sqrt(n) * np.sqrt(y) * _k_envelope(form.t, x)
    return 2.0 * math.sqrt(form.rho1_sq or 1.0) * float(np.sum(terms))


def minimal_height(form, tol=None):
    """
    Smallest height at which the truncation tail is below `tol`
    (default form.err)
    """
    tol = form.err if tol is None else tol
    lo = (form.t + 1.0) / (2 * np.pi * (form.N_coeff + 1))
    for y in lo * np.exp(np.linspace(0.0, np.log(1e3), 400)):
        if tail_bound(form, y) <= tol:
            return max(float(y), EVALUATION_FLOOR)
    return np.inf


def normalization(form):
    if form.rho1_sq is None:
        raise ValueError("form has no rho(1)^2; compute it with rho1_squared first")
    return 2.0 * math.sqrt(form.rho1_sq) * math.sqrt(0.5 * (1.0 + math.exp(-2 * np.pi * form.t)))


def evaluate(form, z, check_tail=True):
    """
    Value of the form at points of the upper half-plane

    Parameters
    ----------
    form : MaassForm

    z : complex or array_like
        points with Im z > EVALUATION_FLOOR

    check_tail : bool
        raise when the truncation tail exceeds form.err

    Returns
    -------
    float or ndarray
    """
    scalar = np.isscalar(z)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    x, y = z.real, z.imag
    if np.any(y <= EVALUATION_FLOOR):
        raise DomainError(f"evaluation needs Im z > {EVALUATION_FLOOR}, got {np.min(y)}")
    if check_tail:
        ymin = float(np.min(y))
        if tail_bound(form, ymin) > form.err:
            raise InsufficientCoefficientsError(
                f"truncation tail at Im z = {ymin} exceeds err = {form.err:.2e}; "
                f"minimal admissible Im z is {minimal_height(form)}"
            )
    cs = np.cos if form.parity == Parity.EVEN else np.sin
    total = np.zeros_like(x)
    sqy = np.sqrt(y)
    for n in range(1, form.N_coeff + 1):
        kv, flag = k_bessel_scaled(form.t, 2 * np.pi * n * y, with_flag=True)
        if np.all(flag):
            break
        total += form.coefficients[n - 1] * sqy * kv * cs(2 * np.pi * n * x)
    values = normalization(form) * total
    return float(values[0]) if scalar else values


def automorphy_defect(form):
    """
    max |phi(z) - phi(-1/z)| over the sample points
    """
    z = np.array([complex(px, AUTOMORPHY_Y) for px in AUTOMORPHY_X])
    return float(np.max(np.abs(evaluate(form, z, check_tail=False) - evaluate(form, -1.0 / z, check_tail=False))))


def certify(form, hecke_nm=None):
    """
    err = max(automorphy defect on the sample points, max Hecke residual / 10)
    """
    defect = automorphy_defect(form)
    hecke = max_hecke_residual(form, hecke_nm)
    logger.debug(f"t={form.t!r}: automorphy defect {defect:.3e}, Hecke residual {hecke:.3e}")
    return max(defect, hecke / 10.0)


# --------------------------------------------------------------------
#             SYMMETRIC SQUARE NORMALIZATION
# --------------------------------------------------------------------


def _log_gamma_factor(s, t):
    # Gamma_R(s) Gamma_R(s + 2it) Gamma_R(s - 2it), Gamma_R(s) = pi^(-s/2) Gamma(s/2)
    def lgr(z):
        return -0.5 * z * np.log(np.pi) + loggamma(0.5 * z)

    return lgr(s) + lgr(s + 2j * t) + lgr(s - 2j * t)


def afe_weight(y, shift, c, t, smoothing=None):
    """
    W(y) = (1/2 pi i) int_{(c)} gamma(shift + u) / gamma(1) G(u) y^(-u) du / u

    Parameters
    ----------
    y : ndarray
        positive arguments

    shift : float
        1 for the direct sum, 0 for the dual sum

    c : float
        abscissa of the contour

    t : float
        spectral parameter

    smoothing : callable, optional
        G on complex arrays, entire and bounded on vertical lines with
        G(0) = 1; default G = 1

    Returns
    -------
    ndarray
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    vmax = 2.0 * abs(t) + 60.0
    v, w = panel_rule(uniform_edges(-vmax, vmax, 0.5), 12)
    u = c + 1j * v
    lg1 = _log_gamma_factor(1.0, t)
    kernel = np.exp(_log_gamma_factor(shift + u, t) - lg1) / u * w / (2 * np.pi)
    if smoothing is not None:
        kernel = kernel * smoothing(u)
    return np.real(np.exp(-np.outer(np.log(y), u)) @ kernel)


def smoothing_factor(smoothing):
    """
    The factor G(u) of the functional equation sums: q^u for a balance
    parameter q > 0, M(1 + u) / M(1) for a TestFunction with Mellin
    transform M
    """
    if isinstance(smoothing, TestFunction):
        norm = smoothing.integral()
        if not norm > 0:
            raise ValueError("smoothing test function must have positive mass")
        return lambda u: smoothing.mellin_vector(1.0 + np.asarray(u)) / norm
    q = float(smoothing)
    if q <= 0:
        raise ValueError("smoothing parameter must be positive")
    return lambda u: np.exp(np.asarray(u) * math.log(q))


def _sym2_coefficients(form, nmax):
    # a_n = sum_{k^2 | n} lambda((n / k^2)^2)
    sq = np.array([hecke_lambda(form, m * m) for m in range(1, nmax + 1)])
    a = np.zeros(nmax)
    for k in range(1, int(math.isqrt(nmax)) + 1):
        idx = np.arange(1, nmax // (k * k) + 1)
        a[idx * k * k - 1] += sq[idx - 1]
    return a


def rho1_squared(form, smoothing=1.0, tail_tol=1e-12):
    """
    rho(1)^2 = 4 / L(1, sym^2 phi), with L(1, sym^2 phi) from the
    approximate functional equation

        Lambda(1) = sum a_n / n W_1(n; G(u)) + sum a_n W_0(n; G(-u))

    Parameters
    ----------
    form : MaassForm

    smoothing : float or TestFunction
        a balance parameter q > 0, or a test function whose normalized
        Mellin transform is the factor G; every admissible choice gives
        the same value

    tail_tol : float
        required size of both weights at the last stored index

    Returns
    -------
    float
    """
    G = smoothing_factor(smoothing)

    def dual(u):
        return G(-np.asarray(u))

    nmax = form.N_coeff
    n = np.arange(1, nmax + 1, dtype=float)
    w1 = afe_weight(n, 1.0, 1.0, form.t, G)
    w0 = afe_weight(n, 0.0, 1.5, form.t, dual)
    tail = max(abs(w1[-1]), abs(w0[-1]))
    if tail > tail_tol:
        grid = np.unique(np.round(np.geomspace(nmax, 100 * nmax + 100, 200)))
        tails = np.maximum(
            np.abs(afe_weight(grid, 1.0, 1.0, form.t, G)),
            np.abs(afe_weight(grid, 0.0, 1.5, form.t, dual)),
        )
        ok = grid[tails <= tail_tol]
        required = int(ok[0]) if len(ok) else int(grid[-1])
        raise InsufficientCoefficientsError(
            f"L(1, sym^2) at t={form.t} needs N_coeff >= {required}, have {nmax}"
        )
    a = _sym2_coefficients(form, nmax)
    value = float(np.sum(a / n * w1) + np.sum(a * w0))
    logger.debug(f"L(1, sym^2) at t={form.t!r}, smoothing {smoothing!r}: {value!r}")
    return 4.0 / value


# --------------------------------------------------------------------
#             COEFFICIENT CACHE
# --------------------------------------------------------------------


class CoefficientCache:
    """
    Sorted collection of forms with the spectral range that was searched

    Parameters
    ----------
    records : list of MaassForm

    t_range : tuple of float
        searched spectral interval

    N_coeff : int
        number of stored eigenvalues per form

    parities : list of str
        parities that were searched over t_range
    """

    def __init__(self, records=(), t_range=(0.0, 0.0), N_coeff=0, parities=("even", "odd"), version=CACHE_VERSION):
        self.records = sorted(records, key=lambda f: f.t)
        self.t_range = (float(t_range[0]), float(t_range[1]))
        self.N_coeff = int(N_coeff)
        self.parities = sorted(Parity(p).value for p in parities)
        self.version = int(version)
        self._check_duplicates()

    def _check_duplicates(self):
        for a, b in zip(self.records, self.records[1:]):
            if abs(a.t - b.t) < a.err + b.err:
                raise ValueError(f"duplicate eigenvalue in cache: {a.t} and {b.t}")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def forms(self, lo=-np.inf, hi=np.inf, parity=None):
        return [
            f for f in self.records
            if lo <= f.t <= hi and (parity is None or f.parity == Parity(parity))
        ]

    def covers(self, lo, hi, parities=("even", "odd")):
        return (
            self.t_range[0] <= lo
            and hi <= self.t_range[1]
            and all(Parity(p).value in self.parities for p in parities)
        )

    def require(self, lo, hi, parities=("even", "odd")):
        if not self.covers(lo, hi, parities):
            raise CoverageError(
                f"cache covers t in {self.t_range} for {self.parities}, need [{lo}, {hi}] for {list(parities)}"
            )

    def merge(self, other):
        """
        Union of two caches over adjacent or overlapping ranges, keeping
        the form with the smaller err on duplicates
        """
        if other.t_range[0] > self.t_range[1] or self.t_range[0] > other.t_range[1]:
            if len(self.records) and len(other.records):
                raise CoverageError(f"cannot merge disjoint ranges {self.t_range} and {other.t_range}")
        if len(self) == 0 and self.t_range == (0.0, 0.0):
            return other
        records = {}
        for f in list(self.records) + list(other.records):
            key = (f.parity, round(f.t, 6))
            if key not in records or f.err < records[key].err:
                records[key] = f
        parities = sorted(set(self.parities) & set(other.parities))
        return CoefficientCache(
            records.values(),
            (min(self.t_range[0], other.t_range[0]), max(self.t_range[1], other.t_range[1])),
            min(self.N_coeff, other.N_coeff),
            parities,
        )

    def header(self):
        return {
            "format": CACHE_FORMAT,
            "version": self.version,
            "t_range": [float_repr(v) for v in self.t_range],
            "N_coeff": self.N_coeff,
            "parities": self.parities,
        }

    def save(self, path):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fout:
            fout.write(json.dumps(self.header(), sort_keys=True) + "\n")
            for form in self.records:
                fout.write(json.dumps(form.to_record(), sort_keys=True) + "\n")
        logger.info(f"wrote {len(self)} forms to {path}")

    @classmethod
    def load(cls, path):
        if not os.path.exists(path):
            raise FileNotFoundError(f"coefficient cache {path} not found.")
        with open(path, "r") as fin:
            lines = [line for line in fin if line.strip()]
        header = json.loads(lines[0])
        if header.get("format") != CACHE_FORMAT or header.get("version") != CACHE_VERSION:
            raise CacheVersionError(
                f"cache {path} has format {header.get('format')} version {header.get('version')}, "
                f"expected {CACHE_FORMAT} version {CACHE_VERSION}"
            )
        records = [MaassForm.from_record(json.loads(line)) for line in lines[1:]]
        return cls(
            records,
            tuple(float(v) for v in header["t_range"]),
            header["N_coeff"],
            header["parities"],
        )
