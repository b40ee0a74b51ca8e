"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.

Phase functions of the shifted off-diagonal sums and the oscillatory
double integrals B(j, k) they produce after Poisson summation.

With Delta = sqrt(r1 r2 (r1 + d)(r2 + d)) and x = 4 pi Delta / c the
phase is

    phi(r1, r2) = alpha(x) + (4 pi / c)(Delta - r1 r2 - d r1 / 2 - d r2 / 2)

and the second term is evaluated as -pi d^2 (r1 - r2)^2 / (c (Delta + P)),
P = r1 r2 + d (r1 + r2) / 2, which is the same number without the
cancellation between Delta and P.
"""

import logging
import warnings

import numpy as np
from typing_extensions import Annotated
from pydantic import BaseModel, Field, ConfigDict

from maassqe.bumps import TestFunction
from maassqe.errors import DomainError, QuadratureError, RegimeError
from maassqe.integrators import mixed_partial, separable_quadrature, uniform_edges
from maassqe.spectral_transforms import phase_coefficients

logger = logging.getLogger(__name__)

RATIO_BAND = (1.0 / 50.0, 50.0)
# relative finite difference step per total derivative order
FD_STEPS = {0: 0.0, 1: 1e-4, 2: 1e-2, 3: 3e-2, 4: 5e-2}
MAX_REFINE = 4


class OscillatoryPhase(BaseModel, title="Phase of the shifted off-diagonal sum"):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    c: Annotated[int, Field(gt=0)]
    d: Annotated[int, Field(default=0)]
    y: Annotated[float, Field(ge=0)]
    R: Annotated[float, Field(gt=0)]
    N: Annotated[int, Field(default=3, ge=1, le=4)]
    k: Annotated[int, Field(default=0, ge=0)]
    psi: Annotated[TestFunction, Field(default_factory=TestFunction)]

    def delta(self, r1, r2):
        r1 = np.asarray(r1, dtype=float)
        r2 = np.asarray(r2, dtype=float)
        return np.sqrt(r1 * r2 * (r1 + self.d) * (r2 + self.d))

    def d_delta_dr1(self, r1, r2):
        r1 = np.asarray(r1, dtype=float)
        r2 = np.asarray(r2, dtype=float)
        return (2 * r1 + self.d) * r2 * (r2 + self.d) / (2 * self.delta(r1, r2))

    def argument(self, r1, r2):
        return 4 * np.pi * self.delta(r1, r2) / self.c

    def alpha(self, x):
        x = np.asarray(x, dtype=float)
        if self.y == 0:
            return np.zeros_like(x)
        q = (self.y / x) ** 2
        return x * sum(cm * q**m for m, cm in enumerate(phase_coefficients(self.N), start=1))

    def phi(self, r1, r2):
        r1 = np.asarray(r1, dtype=float)
        r2 = np.asarray(r2, dtype=float)
        delta = self.delta(r1, r2)
        value = self.alpha(4 * np.pi * delta / self.c)
        if self.d != 0:
            P = r1 * r2 + 0.5 * self.d * (r1 + r2)
            value = value - np.pi * self.d**2 * (r1 - r2) ** 2 / (self.c * (delta + P))
        return value

    def amplitude_core(self, r1, r2):
        x = self.argument(r1, r2)
        return (4 * self.y**2 + x * x) ** (-0.5 * self.k - 0.25)

    def amplitude(self, r1, r2):
        r1 = np.asarray(r1, dtype=float)
        r2 = np.asarray(r2, dtype=float)
        return self.psi(r1 / self.R) * self.psi(r2 / self.R) * self.amplitude_core(r1, r2)

    def f_c(self, r1, r2):
        return self.amplitude(r1, r2) * np.exp(1j * self.phi(r1, r2))

    def lattice_factor(self, r1, r2):
        """
        e_c(2 r1 r2 + d r1 + d r2), reduced mod c first at integer points
        """
        r1 = np.asarray(r1)
        r2 = np.asarray(r2)
        if np.issubdtype(r1.dtype, np.integer) and np.issubdtype(r2.dtype, np.integer):
            expo = (2 * r1 * r2 + self.d * r1 + self.d * r2) % self.c
        else:
            expo = np.mod(2 * r1 * r2 + self.d * r1 + self.d * r2, self.c)
        return np.exp(2j * np.pi * expo / self.c)

    def expansion_term(self, x):
        """
        (4y^2 + x^2)^(-k/2 - 1/4) exp(i x + i alpha(x))
        """
        x = np.asarray(x, dtype=float)
        return (4 * self.y**2 + x * x) ** (-0.5 * self.k - 0.25) * np.exp(1j * (x + self.alpha(x)))

    def check_regime(self):
        """
        d < c, d <= R^0.9 and c <= R^2 / y, the range where the phase
        estimates are stated
        """
        problems = []
        if not abs(self.d) < self.c:
            problems.append(f"|d|={abs(self.d)} is not below c={self.c}")
        if not abs(self.d) <= self.R**0.9:
            problems.append(f"|d|={abs(self.d)} exceeds R^0.9={self.R**0.9!r}")
        if self.y > 0 and not self.c <= self.R**2 / self.y:
            problems.append(f"c={self.c} exceeds R^2/y={self.R**2 / self.y!r}")
        if problems:
            raise RegimeError("phase parameters outside the regime: " + "; ".join(problems))


# --------------------------------------------------------------------
#             DERIVATIVE RATIOS
# --------------------------------------------------------------------


def _partial(func, R, r1, r2, k1, k2):
    h = FD_STEPS[k1 + k2] * R
    return mixed_partial(func, r1, r2, k1, k2, h, h)[0]


def hessian(p, r1, r2):
    """
    (phi_11, phi_22, phi_12) at one point by finite differences
    """
    return (
        _partial(p.phi, p.R, r1, r2, 2, 0),
        _partial(p.phi, p.R, r1, r2, 0, 2),
        _partial(p.phi, p.R, r1, r2, 1, 1),
    )


def phase_derivative_check(p, orders, grid=5):
    """
    Measured derivative sizes of phi against the predicted powers of
    (c, T, R), T = y

    Parameters
    ----------
    p : OscillatoryPhase

    orders : tuple of int
        (k1, k2) with k1 + k2 <= 4

    grid : int
        points per direction on [R, 2R]

    Returns
    -------
    dict
        int1 ratios |d^{k1+k2} phi| / (c T^2 R^(-2-k1-k2)) at (R, R) and
        over the grid, the first derivative ratio against c T^2 / R^3 and
        the Hessian determinant ratio against c^2 T^4 / R^8 at (R, R), the
        amplitude ratio |d^{k1+k2} g_c| R^(1+k1+k2) / c^(1/2), and whether
        every ratio sits in RATIO_BAND
    """
    k1, k2 = orders
    if k1 < 0 or k2 < 0 or k1 + k2 > 4:
        raise ValueError(f"derivative orders must be nonnegative with k1 + k2 <= 4, got {orders}")
    p.check_regime()
    c, T, R = p.c, p.y, p.R
    ktot = k1 + k2
    int1_scale = c * T**2 * R ** (-2.0 - ktot)

    pts = np.linspace(R, 2 * R, grid)
    ratios = np.array([[abs(_partial(p.phi, R, a, b, k1, k2)) / int1_scale for b in pts] for a in pts])
    report = {
        "orders": [k1, k2],
        "c": c,
        "d": p.d,
        "T": T,
        "R": R,
        "int1_corner": float(ratios[0, 0]),
        "int1_max": float(np.max(ratios)),
    }

    stat = abs(_partial(p.phi, R, R, R, 1, 0)) / (c * T**2 / R**3)
    h11, h22, h12 = hessian(p, R, R)
    end = abs(h11 * h22 - h12 * h12) / (c**2 * T**4 / R**8)
    amp = abs(_partial(p.amplitude_core, R, R, R, k1, k2)) * R ** (1.0 + ktot) / np.sqrt(c)
    report.update({"stat": float(stat), "end": float(end), "int2": float(amp)})

    lo, hi = RATIO_BAND
    report["within_band"] = bool(
        report["int1_max"] <= hi and lo <= stat <= hi and lo <= end <= hi and amp <= hi
    )
    if not report["within_band"]:
        warnings.warn(f"derivative ratios outside {RATIO_BAND}: {report}")
    logger.info(f"phase derivative check {report}")
    return report


def ratio_sweep(p, orders, factor=2.0):
    """
    phase_derivative_check at p and with R, y, c each scaled by `factor`
    """
    variants = [
        p,
        p.model_copy(update={"R": p.R * factor}),
        p.model_copy(update={"y": p.y * factor}),
        p.model_copy(update={"c": int(round(p.c * factor))}),
    ]
    return [phase_derivative_check(q, orders) for q in variants]


# --------------------------------------------------------------------
#             OSCILLATORY DOUBLE INTEGRALS
# --------------------------------------------------------------------


def _check_domain(p, domain):
    (a1, b1), (a2, b2) = domain
    if not (a1 < b1 and a2 < b2):
        raise DomainError(f"empty rectangle {domain}")
    if min(a1, a2) < 0 or min(a1, a2) + p.d < 0:
        raise DomainError(f"rectangle {domain} leaves the region where Delta is real for d={p.d}")


def _max_slopes(func, domain, samples=9):
    (a1, b1), (a2, b2) = domain
    x = np.linspace(a1, b1, samples)
    y = np.linspace(a2, b2, samples)
    X, Y = np.meshgrid(x, y, indexing="ij")
    values = func(X, Y)
    g1, g2 = np.gradient(values, x, y)
    return float(np.max(np.abs(g1))), float(np.max(np.abs(g2)))


def _double_integrals(p, domain, twist, weighted, freqs, tol, n=16):
    """
    B(j, k) = int int F e_ct(-u r1 - v r2) e(j r1 + k r2) for each (j, k)
    in `freqs`, F = f_c or exp(i phi)
    """
    _check_domain(p, domain)
    u, v, ct = twist
    ct = p.c if ct is None else ct
    (a1, b1), (a2, b2) = domain

    def func(r1, r2):
        if weighted:
            return p.f_c(r1, r2)
        return np.exp(1j * p.phi(r1, r2))

    s1, s2 = _max_slopes(p.phi, domain)
    jmax = max([abs(j) for j, _ in freqs] + [0])
    kmax = max([abs(k) for _, k in freqs] + [0])
    w1 = s1 + 2 * np.pi * (abs(u) / ct + jmax)
    w2 = s2 + 2 * np.pi * (abs(v) / ct + kmax)
    width1 = min(0.25 * (b1 - a1), 6.0 / (w1 + 1e-300))
    width2 = min(0.25 * (b2 - a2), 6.0 / (w2 + 1e-300))

    modulations = [
        (
            lambda x, j=j: np.exp(2j * np.pi * (j - u / ct) * x),
            lambda y, k=k: np.exp(2j * np.pi * (k - v / ct) * y),
        )
        for j, k in freqs
    ]
    X, Y = np.meshgrid(np.linspace(a1, b1, 9), np.linspace(a2, b2, 9), indexing="ij")
    scale = (b1 - a1) * (b2 - a2) * max(float(np.max(np.abs(func(X, Y)))), 1e-300)

    trace = []
    for _ in range(MAX_REFINE + 1):
        xe = uniform_edges(a1, b1, width1)
        ye = uniform_edges(a2, b2, width2)
        values, errs = separable_quadrature(func, xe, ye, n=n, modulations=modulations)
        trace.append((len(xe) - 1, len(ye) - 1, float(np.max(errs))))
        if np.max(errs) <= tol * scale:
            return values, np.maximum(errs, 1e-15 * scale)
        width1, width2 = 0.5 * width1, 0.5 * width2
    raise QuadratureError(
        f"double integral over {domain} did not reach tol={tol:.1e} relative to {scale!r}; "
        f"trace (panels r1, panels r2, err) {trace}"
    )


def oscillatory_double_integral(p, domain, twist=(0, 0, None), weighted=False, tol=1e-10):
    """
    int int exp(i phi) e_c(-u r1 - v r2) dr1 dr2 over a rectangle, or the
    f_c weighted variant

    Parameters
    ----------
    p : OscillatoryPhase

    domain : tuple
        ((a1, b1), (a2, b2))

    twist : tuple
        (u, v, c); c = None uses the phase modulus

    weighted : bool
        integrate f_c instead of exp(i phi)

    tol : float
        error tolerance relative to area times the sup of the integrand

    Returns
    -------
    value : complex

    err : float
    """
    values, errs = _double_integrals(p, domain, twist, weighted, [(0, 0)], tol)
    return complex(values[0]), float(errs[0])


def second_derivative_bound(p, domain, tol=1e-10):
    """
    |int int exp(i phi)| lambda / (1 + |log(b1 - a1)| + |log(b2 - a2)| + |log lambda|)
    with lambda the smallest |phi_11|, |phi_22| on a 3 x 3 grid
    """
    (a1, b1), (a2, b2) = domain
    lam = np.inf
    for r1 in np.linspace(a1, b1, 3):
        for r2 in np.linspace(a2, b2, 3):
            h11, h22, _ = hessian(p, r1, r2)
            lam = min(lam, abs(h11), abs(h22))
    value, _ = oscillatory_double_integral(p, domain, tol=tol)
    logs = 1 + abs(np.log(b1 - a1)) + abs(np.log(b2 - a2)) + abs(np.log(lam))
    return {"integral": abs(value), "lambda": float(lam), "ratio": float(abs(value) * lam / logs)}


def stationary_window(p):
    """
    Size c^2 T^2 / R^3 of the twists (u, v) that meet a stationary point
    """
    return p.c**2 * p.y**2 / p.R**3


def poisson_tail_check(p, twist=(0, 0, None), J=3, tol=1e-10, lattice=None):
    """
    B(j, k) for max(|j|, |k|) <= J on the support of psi(r1/R) psi(r2/R)

    Parameters
    ----------
    p : OscillatoryPhase

    twist : tuple
        (u, v, c)

    J : int
        frequency cutoff, at least 1

    tol : float
        quadrature tolerance

    lattice : bool, optional
        compare with the direct lattice sum; default when R <= 200

    Returns
    -------
    dict
        tail ratio sum_{(j,k) != 0} |B(j,k)| / |B(0,0)| and, when
        requested, the lattice sum and the relative Poisson defect
    """
    if J < 1:
        raise ValueError(f"J must be at least 1, got {J}")
    lo, hi = p.psi.support
    domain = ((lo * p.R, hi * p.R), (lo * p.R, hi * p.R))
    freqs = [(j, k) for j in range(-J, J + 1) for k in range(-J, J + 1)]
    values, errs = _double_integrals(p, domain, twist, True, freqs, tol)
    centre = freqs.index((0, 0))
    b00 = values[centre]
    tail = float(np.sum(np.abs(values)) - abs(b00))
    report = {
        "J": J,
        "B00": complex(b00),
        "tail_ratio": tail / abs(b00),
        "quadrature_err": float(np.max(errs)),
    }

    lattice = p.R <= 200 if lattice is None else lattice
    if lattice:
        u, v, ct = twist
        ct = p.c if ct is None else ct
        r = np.arange(int(np.floor(lo * p.R)) + 1, int(np.ceil(hi * p.R)))
        r = r[(r > lo * p.R) & (r < hi * p.R)]
        R1, R2 = np.meshgrid(r, r, indexing="ij")
        expo = (-u * R1 - v * R2) % ct
        direct = complex(np.sum(p.f_c(R1, R2) * np.exp(2j * np.pi * expo / ct)))
        total = complex(np.sum(values))
        report["lattice_sum"] = direct
        report["poisson_defect"] = abs(direct - total) / abs(direct)
    logger.info(f"Poisson tail check {report}")
    return report
