"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.
"""

import logging
import warnings
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial

from maassqe.integrators import panel_rule, tanh_sinh, uniform_edges

logger = logging.getLogger(__name__)

SOBOLEV_SAMPLES = 10000


@lru_cache(maxsize=256)
def _numerators(a, b, kappa, order):
    """
    Numerator polynomials P_k with
    d^k/dx^k exp(-kappa/q) = P_k(x) q(x)^(-2k) exp(-kappa/q),
    q(x) = (x - a)(b - x)
    """
    q = Polynomial([-a * b, a + b, -1.0])
    dq = q.deriv()
    polys = [Polynomial([1.0])]
    for k in range(order):
        p = polys[-1]
        polys.append(p.deriv() * q * q - 2 * k * q * dq * p + kappa * dq * p)
    return tuple(polys)


class Bump:
    """
    Single smooth bump c exp(-kappa / ((x - a)(b - x))) on (a, b)
    """

    def __init__(self, a, b, kappa=1.0, coef=1.0):
        if not (0.0 <= a < b):
            raise ValueError(f"bump support must satisfy 0 <= a < b, got ({a}, {b})")
        if kappa <= 0:
            raise ValueError("bump sharpness must be positive")
        self.a = float(a)
        self.b = float(b)
        self.kappa = float(kappa)
        self.coef = float(coef)

    def __call__(self, x, derivative=0):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = (x > self.a) & (x < self.b)
        xi = x[inside]
        q = (xi - self.a) * (self.b - xi)
        p = _numerators(self.a, self.b, self.kappa, derivative)[derivative](xi)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            logmag = -self.kappa / q - 2 * derivative * np.log(q)
            vals = p * np.exp(np.minimum(logmag, 700.0))
        vals[~np.isfinite(vals)] = 0.0
        out[inside] = self.coef * vals
        return out

    def dilate(self, s):
        # x -> x / s maps (a, b) to (s a, s b)
        return Bump(self.a * s, self.b * s, self.kappa * s * s, self.coef)

    def scale(self, c):
        return Bump(self.a, self.b, self.kappa, self.coef * c)


class TestFunction:
    """
    Smooth compactly supported test function on (0, inf), a finite sum of
    bumps

    Parameters
    ----------
    a : float
        left end of the support

    b : float
        right end of the support

    kappa : float, optional
        sharpness of the bump, default 1

    Notes
    -----
    Derivatives are exact through the numerator recurrence of the bump.
    Sobolev norms are sampled on SOBOLEV_SAMPLES points and checked against
    a four times finer grid.
    """

    __test__ = False

    def __init__(self, a=1.0, b=2.0, kappa=1.0, parts=None):
        if parts is None:
            parts = [Bump(a, b, kappa)]
        self.parts = list(parts)

    @property
    def support(self):
        return (min(p.a for p in self.parts), max(p.b for p in self.parts))

    @property
    def l(self):
        return self.support[1]

    def __call__(self, x, derivative=0):
        x = np.asarray(x, dtype=float)
        return sum(p(x, derivative) for p in self.parts)

    def derivative(self, k):
        return lambda x: self(x, derivative=k)

    def __add__(self, other):
        return TestFunction(parts=self.parts + other.parts)

    def __mul__(self, c):
        return TestFunction(parts=[p.scale(c) for p in self.parts])

    __rmul__ = __mul__

    def scale(self, c):
        return self * c

    def dilate(self, s):
        """
        The function x -> psi(x / s)
        """
        if s <= 0:
            raise ValueError("dilation factor must be positive")
        return TestFunction(parts=[p.dilate(s) for p in self.parts])

    def integral(self):
        return sum(tanh_sinh(p, p.a, p.b, tol=1e-15)[0] for p in self.parts)

    def mellin(self, s):
        """
        Mellin transform G(s) = int_0^inf psi(x) x^(s-1) dx
        """
        s = complex(s)
        total = 0.0
        for p in self.parts:
            value, _ = tanh_sinh(lambda x: p(x) * x ** (s - 1.0), p.a, p.b, tol=1e-15)
            total += value
        return total

    def mellin_vector(self, s, panels=32, n=16):
        """
        Mellin transform at an array of s, Gauss-Legendre panels on each bump
        """
        s = np.asarray(s, dtype=complex)
        total = np.zeros(s.shape, dtype=complex)
        for p in self.parts:
            x, w = panel_rule(uniform_edges(p.a, p.b, (p.b - p.a) / panels), n)
            total += np.exp(np.multiply.outer(s - 1.0, np.log(x))) @ (p(x) * w)
        return total

    def _sampled_sup(self, k, n):
        lo, hi = self.support
        x = np.linspace(lo, hi, n)
        return float(np.max(np.abs(self(x, derivative=k))))

    def sobolev_norm(self, k):
        """
        W^{k,inf} norm, the maximum over orders j <= k of sup |psi^(j)|

        Parameters
        ----------
        k : int
            highest derivative order

        Returns
        -------
        float
        """
        coarse = max(self._sampled_sup(j, SOBOLEV_SAMPLES) for j in range(k + 1))
        fine = max(self._sampled_sup(j, 4 * SOBOLEV_SAMPLES) for j in range(k + 1))
        if abs(fine - coarse) > 1e-2 * fine:
            warnings.warn(f"Sobolev norm of order {k} not resolved: {coarse} vs {fine}")
        logger.debug(f"sobolev norm order {k}: {fine}")
        return max(fine, coarse)
