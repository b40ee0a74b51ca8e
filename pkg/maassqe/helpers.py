"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.
"""

import math
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache

import numpy as np


def prepare_log(file, screen=False):
    logger = logging.getLogger("maassqe")

    # Remove all existing handlers to prevent duplicate logging
    for handler in logger.handlers[:]:
        handler.close()
        logger.removeHandler(handler)

    handler = logging.FileHandler(file)
    formatter = logging.Formatter("%(asctime)s %(name)-12s %(levelname)-8s %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    if screen:
        scr = logging.StreamHandler()
        scr.setLevel(logging.INFO)
        scr.setFormatter(formatter)
        logger.addHandler(scr)
    return logger


def parallel_map(func, items, workers=1):
    """
    Map `func` over `items`, keeping input order

    Parameters
    ----------
    func : callable
        picklable function of one argument

    items : iterable
        arguments

    workers : int
        number of worker processes; 1 maps serially

    Returns
    -------
    results : list
        results in the order of `items`
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def stable_sum(values):
    """
    Correctly rounded sum of real or complex values, independent of
    any partitioning of the input
    """
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real.ravel()), math.fsum(values.imag.ravel()))
    return math.fsum(values.ravel())


def float_repr(value):
    """
    Shortest round-trip decimal string of a float
    """
    return repr(float(value))


# --------------------------------------------------------------------
#             ELEMENTARY NUMBER THEORY
# --------------------------------------------------------------------


@lru_cache(maxsize=None)
def sieve_primes(n):
    """
    Primes up to and including n as a tuple
    """
    if n < 2:
        return ()
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, int(math.isqrt(n)) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return tuple(int(p) for p in np.nonzero(flags)[0])


def factorize(n):
    """
    Prime factorization of a positive integer as a dict {p: e}
    """
    if n < 1:
        raise ValueError(f"cannot factorize {n}")
    factors = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def divisors(n):
    """
    Sorted list of positive divisors of n
    """
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def divisor_count(n):
    """
    Number of divisors tau(n)
    """
    count = 1
    for e in factorize(n).values():
        count *= e + 1
    return count


def euler_phi(n):
    result = n
    for p in factorize(n):
        result = result // p * (p - 1)
    return result


def jacobi_symbol(a, n):
    """
    Jacobi symbol (a/n) for odd positive n
    """
    if n <= 0 or n % 2 == 0:
        raise ValueError(f"Jacobi symbol needs odd positive modulus, got {n}")
    a %= n
    result = 1
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0
