"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.

Kloosterman sums, quadratic Gauss sums and the twisted complete sums

    S_c(gamma) = sum_{a, b mod c} S(a(gamma a + d), b(gamma b + d), c)
                 e_c(2 gamma a b + (d + u) a + (d + v) b)

Every sum is accumulated as an integer count vector over the residues
mod c, so the same code gives a double precision value (counts dotted
with a root of unity table) or an exact element of Z[zeta_c].
"""

import math
import logging
from functools import lru_cache

import numpy as np
from typing_extensions import Annotated
from pydantic import BaseModel, Field, ConfigDict, model_validator

from maassqe.errors import ScaleError, DomainError
from maassqe.helpers import divisors, divisor_count, euler_phi, jacobi_symbol, stable_sum

logger = logging.getLogger(__name__)

TWISTED_CMAX = 5000
EXACT_CMAX = 500


def balanced(x, c):
    """
    Representative of x mod c in (-c/2, c/2]
    """
    r = x % c
    return r - c if 2 * r > c else r


class TwistedSumParams(BaseModel, title="Parameters of a twisted complete sum"):
    model_config = ConfigDict(frozen=True)

    c: Annotated[int, Field(gt=0)]
    d: Annotated[int, Field(default=0)]
    u: Annotated[int, Field(default=0)]
    v: Annotated[int, Field(default=0)]
    gamma: Annotated[int, Field(default=1)]

    @model_validator(mode="after")
    def _validate_all(self) -> "TwistedSumParams":
        if 2 * abs(self.u) > self.c or 2 * abs(self.v) > self.c:
            raise ValueError(
                f"u, v must be balanced residues with |u|, |v| <= c/2, got u={self.u}, v={self.v}, c={self.c}"
            )
        return self


# --------------------------------------------------------------------
#             PER-MODULUS TABLES
# --------------------------------------------------------------------


def _readonly(arr):
    arr.setflags(write=False)
    return arr


def _powmod(base, e, c):
    # vectorized square and multiply, exact while c^2 fits in int64
    result = np.ones_like(base)
    base = base % c
    while e:
        if e & 1:
            result = (result * base) % c
        base = (base * base) % c
        e >>= 1
    return result


@lru_cache(maxsize=256)
def unit_table(c):
    """
    Units mod c and their inverses x^(phi(c) - 1), as read-only arrays
    """
    if c < 1:
        raise DomainError(f"modulus must be positive, got {c}")
    if c == 1:
        return _readonly(np.array([0], dtype=np.int64)), _readonly(np.array([0], dtype=np.int64))
    x = np.arange(1, c, dtype=np.int64)
    units = x[np.gcd(x, c) == 1]
    inverses = _powmod(units, euler_phi(c) - 1, c)
    return _readonly(units), _readonly(inverses)


@lru_cache(maxsize=256)
def root_table(c):
    """
    e_c(k) = exp(2 pi i k / c) for k = 0..c-1
    """
    return _readonly(np.exp(2j * np.pi * np.arange(c) / c))


@lru_cache(maxsize=1024)
def cyclotomic_polynomial(n):
    """
    Integer coefficients of the n-th cyclotomic polynomial, lowest degree
    first
    """
    poly = [-1] + [0] * (n - 1) + [1]
    for d in divisors(n)[:-1]:
        poly = _poly_divide_exact(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


def _poly_divide_exact(num, den):
    # long division of integer polynomials with monic den, zero remainder
    num = list(num)
    quot = [0] * (len(num) - len(den) + 1)
    for i in range(len(quot) - 1, -1, -1):
        coef = num[i + len(den) - 1]
        quot[i] = coef
        if coef:
            for j, dj in enumerate(den):
                num[i + j] -= coef * dj
    return quot


def _poly_remainder(num, den):
    num = [int(v) for v in num]
    deg = len(den) - 1
    for i in range(len(num) - 1, deg - 1, -1):
        coef = num[i]
        if coef:
            for j, dj in enumerate(den):
                num[i - deg + j] -= coef * dj
    return num[:deg]


class CyclotomicInteger:
    """
    Element sum_k counts[k] zeta_c^k of Z[zeta_c]

    Two count vectors represent the same number iff their difference is
    divisible by the c-th cyclotomic polynomial, which is how equality and
    the zero test are decided.
    """

    def __init__(self, c, counts):
        self.c = int(c)
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (self.c,):
            raise ValueError(f"count vector must have length {self.c}")
        self.counts = counts

    @classmethod
    def monomial(cls, c, k, coef=1):
        counts = np.zeros(c, dtype=np.int64)
        counts[k % c] = coef
        return cls(c, counts)

    def __add__(self, other):
        return CyclotomicInteger(self.c, self.counts + other.counts)

    def __sub__(self, other):
        return CyclotomicInteger(self.c, self.counts - other.counts)

    def __mul__(self, other):
        if isinstance(other, CyclotomicInteger):
            full = np.convolve(self.counts, other.counts)
            out = full[: self.c].copy()
            out[: len(full) - self.c] += full[self.c :]
            return CyclotomicInteger(self.c, out)
        return CyclotomicInteger(self.c, self.counts * int(other))

    __rmul__ = __mul__

    def rotate(self, k):
        """
        Multiply by zeta_c^k
        """
        return CyclotomicInteger(self.c, np.roll(self.counts, k % self.c))

    def reduced(self):
        return _poly_remainder(self.counts, cyclotomic_polynomial(self.c))

    def is_zero(self):
        return not any(self.reduced())

    def __eq__(self, other):
        return (self - other).is_zero()

    def __complex__(self):
        return stable_sum(self.counts * root_table(self.c))

    def __repr__(self):
        return f"CyclotomicInteger(c={self.c}, value={complex(self)!r})"


def _finish(c, counts, exact):
    if exact:
        if c > EXACT_CMAX:
            raise ScaleError(f"exact cyclotomic mode is limited to c <= {EXACT_CMAX}, got {c}")
        return CyclotomicInteger(c, counts)
    return stable_sum(counts * root_table(c))


# --------------------------------------------------------------------
#             KLOOSTERMAN AND GAUSS SUMS
# --------------------------------------------------------------------


def kloosterman(n, m, c, exact=False):
    """
    Kloosterman sum S(n, m, c)

    Parameters
    ----------
    n, m : int
        frequencies

    c : int
        positive modulus

    exact : bool
        return a CyclotomicInteger instead of a float

    Returns
    -------
    float or CyclotomicInteger
    """
    if c < 1:
        raise DomainError(f"modulus must be positive, got {c}")
    units, inverses = unit_table(c)
    counts = np.bincount((n * units + m * inverses) % c, minlength=c)
    value = _finish(c, counts, exact)
    return value if exact else float(value.real)


def weil_ratio(n, m, c):
    """
    |S(n, m, c)| / ((n, m, c)^(1/2) c^(1/2) tau(c))
    """
    bound = math.sqrt(math.gcd(math.gcd(n, m), c)) * math.sqrt(c) * divisor_count(c)
    return abs(kloosterman(n, m, c)) / bound


def gauss_sum(a, b, c, exact=False):
    """
    Quadratic Gauss sum sum_{x mod c} e_c(a x^2 + b x)
    """
    if c < 1:
        raise DomainError(f"modulus must be positive, got {c}")
    return _finish(c, _gauss_counts(a, b, c), exact)


def _gauss_counts(a, b, c):
    x = np.arange(c, dtype=np.int64)
    return np.bincount((a * x * x + b * x) % c, minlength=c)


def gauss_magnitude_defect(c):
    """
    max over units a of ||G(a, 0; c)| - sqrt(c)| for odd c
    """
    if c < 1 or c % 2 == 0:
        raise DomainError(f"Gauss sum magnitude needs an odd positive modulus, got {c}")
    units, _ = unit_table(c)
    x = np.arange(c, dtype=np.int64)
    values = root_table(c)[np.multiply.outer(units, x * x % c) % c].sum(axis=1)
    return float(np.max(np.abs(np.abs(values) - math.sqrt(c))))


# --------------------------------------------------------------------
#             TWISTED COMPLETE SUMS
# --------------------------------------------------------------------


def _twisted_counts(p):
    c, d, u, v, g = p.c, p.d, p.u, p.v, p.gamma
    if c > TWISTED_CMAX:
        raise ScaleError(f"direct twisted sum is limited to c <= {TWISTED_CMAX}, got {c}")
    a = np.arange(c, dtype=np.int64)
    cross = (2 * g * np.outer(a, a)) % c
    quad = (g * a * a + d * a) % c
    counts = np.zeros(c, dtype=np.int64)
    units, inverses = unit_table(c)
    for x, xbar in zip(units, inverses):
        fa = (quad * x + (d + u) * a) % c
        gb = (quad * xbar + (d + v) * a) % c
        expo = (fa[:, None] + gb[None, :] + cross) % c
        counts += np.bincount(expo.ravel(), minlength=c)
    return counts


def twisted_sum_direct(p, exact=False):
    """
    S_c(gamma) by its defining double sum over a, b mod c

    Parameters
    ----------
    p : TwistedSumParams

    exact : bool
        return a CyclotomicInteger instead of a complex

    Returns
    -------
    complex or CyclotomicInteger
    """
    return _finish(p.c, _twisted_counts(p), exact)


def twisted_sum_evaluated(p, exact=False):
    """
    S_c(gamma) for (c, 2 gamma) = 1 by completing the square in b: the
    b-sum is a Gauss sum and the a-sum forces u = v x mod c, so

        S_c(gamma) = c sum_{x unit, v = x u} G(gamma xbar; c)
                     e_c(-(4 gamma)^-1 x (d + xbar (d + u))^2)

    which vanishes identically when (u, c) != (v, c).
    """
    c, d, u, v, g = p.c, p.d, p.u, p.v, p.gamma
    if math.gcd(c, 2 * g) != 1:
        raise DomainError(
            f"closed form needs gcd(c, 2 gamma) = 1, got c={c}, gamma={g}; use crt_split"
        )
    if c == 1:
        return _finish(1, np.array([1], dtype=np.int64), exact)
    inv4g = pow(4 * g, -1, c)
    g1 = CyclotomicInteger(c, _gauss_counts(1, 0, c))
    total = CyclotomicInteger(c, np.zeros(c, dtype=np.int64))
    units, inverses = unit_table(c)
    for x, xbar in zip(units, inverses):
        x, xbar = int(x), int(xbar)
        if (v * x - u) % c != 0:
            continue
        chi = jacobi_symbol(g * xbar, c)
        shift = -inv4g * x * (d + xbar * (d + u)) ** 2
        total = total + chi * g1.rotate(shift)
    total = c * total
    if exact:
        return _finish(c, total.counts, True)
    return complex(total)


def coprime_split(p, c1):
    """
    Parameters of S_c1(gamma c2) and S_c2(gamma c1) for c = c1 c2 with
    (c1, c2) = 1, whose product is S_c(gamma)

    Returns
    -------
    first : TwistedSumParams
        modulus c1

    second : TwistedSumParams
        modulus c2
    """
    if c1 < 1 or p.c % c1 != 0 or math.gcd(c1, p.c // c1) != 1:
        raise DomainError(f"{c1} is not a unitary divisor of c={p.c}")
    c2 = p.c // c1
    first = TwistedSumParams(
        c=c1, d=p.d, u=balanced(p.u, c1), v=balanced(p.v, c1), gamma=p.gamma * c2
    )
    second = TwistedSumParams(
        c=c2, d=p.d, u=balanced(p.u, c2), v=balanced(p.v, c2), gamma=p.gamma * c1
    )
    return first, second


def crt_split(p):
    """
    Split c = c1 c2 with c1 odd and c2 a power of two; then
    S_c(gamma) = S_c1(gamma c2) S_c2(gamma c1) with d, u, v unchanged
    up to balanced reduction

    Returns
    -------
    odd : TwistedSumParams

    even : TwistedSumParams
    """
    c1 = p.c
    while c1 % 2 == 0:
        c1 //= 2
    return coprime_split(p, c1)


def twisted_sum(p):
    """
    S_c(gamma) through the CRT split, closed form on the odd part when it
    applies and the direct sum on the 2-part
    """
    odd, even = crt_split(p)
    if math.gcd(odd.c, 2 * odd.gamma) == 1:
        first = twisted_sum_evaluated(odd)
    else:
        first = twisted_sum_direct(odd)
    return first * twisted_sum_direct(even)


def twisted_bound_ratio(p):
    """
    |S_c(gamma)| / ((v, c1) c1^(3/2) c2^(5/2)), the measured constant of the
    bound through the 2-adic split
    """
    odd, even = crt_split(p)
    scale = math.gcd(p.v, odd.c) * odd.c**1.5 * even.c**2.5
    return abs(twisted_sum(p)) / scale
