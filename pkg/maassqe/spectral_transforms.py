"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.

Window kernel h_{T,G} and its Bessel transforms

    g(x)  = int_R   J_{2iy}(x) h(y) y / cosh(pi y) dy
    gt(x) = int_0^oo J_{2iy}(x) h(y) y / cosh(pi y) dy

Three quadrature routes are used depending on x:

- "series"  x <= SERIES_XMAX, scaled power series of J_{2iy}(x) / cosh(pi y)
            on Gauss panels in y.
- "cosh"    the representation
            J_{2iy}(x) / cosh(pi y) = (2/pi) int_0^oo [sin(x cosh s)
            - i tanh(pi y) cos(x cosh s)] cos(2 y s) ds
            with the y integral done first, so that
            gt(x) = (2/pi) int_0^smax [sin(x cosh s) A(s) - i cos(x cosh s) B(s)] ds.
            Used while the total phase x (cosh smax - 1) stays below COSH_PHASE_MAX.
- "mpmath"  direct J_{2iy}(x) from mpmath on Gauss panels in y.
"""

import math
import logging
from typing import Optional

import numpy as np
import mpmath
from scipy.special import comb, loggamma
from typing_extensions import Annotated
from pydantic import BaseModel, Field, ConfigDict, model_validator

from maassqe.errors import DomainError, QuadratureError, RegimeError
from maassqe.helpers import stable_sum
from maassqe.integrators import panel_rule, uniform_edges
from maassqe.special_functions import j_series_scaled, log_cosh, MP_DPS

logger = logging.getLogger(__name__)

SERIES_XMAX = 16.0
COSH_PHASE_MAX = 2.0e4
# Gaussian tail cut of the window, in units of G
TAIL_WIDTHS = 12.0
MAX_REFINE = 4
_CHUNK = 2048


class WindowKernel(BaseModel, title="Gaussian spectral window"):
    """
    h(y) = weight (exp(-((y - T)/G)^2) + exp(-((y + T)/G)^2))
    """

    model_config = ConfigDict(frozen=True)

    T: Annotated[float, Field(gt=0)]
    G: Annotated[float, Field(gt=0)]
    theta: Annotated[Optional[float], Field(default=None)]
    weight: Annotated[float, Field(default=1.0, ge=0)]

    @model_validator(mode="after")
    def _validate_all(self) -> "WindowKernel":
        if not self.G < self.T:
            raise ValueError(f"window width G={self.G} must be below T={self.T}")
        if self.theta is not None and not (1.0 / 3.0 < self.theta < 1.0):
            raise ValueError(f"theta must lie in (1/3, 1), got {self.theta}")
        return self

    @classmethod
    def from_theta(cls, T, theta, weight=1.0):
        return cls(T=T, G=float(T) ** theta, theta=theta, weight=weight)

    def h(self, y):
        y = np.asarray(y, dtype=float)
        return self.weight * (
            np.exp(-(((y - self.T) / self.G) ** 2)) + np.exp(-(((y + self.T) / self.G) ** 2))
        )

    @property
    def exponent(self):
        """
        theta, or log G / log T when the window was built from (T, G)
        """
        if self.theta is not None:
            return self.theta
        if self.T <= 1:
            raise RegimeError(f"theta is undefined for T={self.T} <= 1")
        return math.log(self.G) / math.log(self.T)

    @property
    def epsilon(self):
        """
        Regime exponent min(theta/2, (3 theta - 1)/2) / 2
        """
        th = self.exponent
        eps = 0.5 * min(0.5 * th, 0.5 * (3 * th - 1))
        if eps <= 0:
            raise RegimeError(f"window exponent theta={th} leaves no asymptotic regime")
        return eps

    @property
    def lower(self):
        return max(0.0, self.T - TAIL_WIDTHS * self.G)

    @property
    def upper(self):
        return self.T + TAIL_WIDTHS * self.G

    @property
    def tau_max(self):
        # A(s), B(s) decay like exp(-G^2 s^2)
        return math.sqrt(40.0 + math.log(1.0 + self.T * self.G)) / self.G

    def regime_start(self):
        """
        G T^(1 - epsilon), the smallest x of the asymptotic regime
        """
        return self.G * self.T ** (1.0 - self.epsilon)


# --------------------------------------------------------------------
#             PANEL QUADRATURE WITH REFINEMENT
# --------------------------------------------------------------------


def _bisect(edges):
    mids = 0.5 * (edges[1:] + edges[:-1])
    out = np.empty(2 * len(edges) - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out


def adaptive_panels(f, edges, tol, n=16, max_refine=MAX_REFINE, label="integral"):
    """
    Gauss-Legendre panels with n and 2n nodes, all panels bisected until
    the summed per-panel difference drops below `tol` or the roundoff
    floor of the sum

    Returns
    -------
    value : complex

    err : float

    Raises
    ------
    QuadratureError
        naming the worst panel and the refinement trace
    """
    edges = np.asarray(edges, dtype=float)
    trace = []
    for _ in range(max_refine + 1):
        x1, w1 = panel_rule(edges, n)
        x2, w2 = panel_rule(edges, 2 * n)
        fine = w2 * f(x2)
        coarse_panels = (w1 * f(x1)).reshape(-1, n).sum(axis=1)
        fine_panels = fine.reshape(-1, 2 * n).sum(axis=1)
        diff = np.abs(fine_panels - coarse_panels)
        value = stable_sum(fine_panels)
        err = float(np.sum(diff))
        floor = 64 * np.finfo(float).eps * float(np.sum(np.abs(fine)))
        trace.append((len(edges) - 1, err))
        if err <= max(tol, floor):
            return value, max(err, floor)
        edges = _bisect(edges)
    k = int(np.argmax(diff))
    raise QuadratureError(
        f"{label} did not reach tol={tol:.1e}; worst subinterval "
        f"[{edges[2 * k]!r}, {edges[2 * k + 2]!r}], trace (panels, err) {trace}"
    )


# --------------------------------------------------------------------
#             BESSEL TRANSFORMS
# --------------------------------------------------------------------


def transform_route(w, x):
    """
    Quadrature route for the transform at x: "series", "cosh" or "mpmath"
    """
    if x <= SERIES_XMAX:
        return "series"
    if x * (math.cosh(w.tau_max) - 1.0) <= COSH_PHASE_MAX:
        return "cosh"
    return "mpmath"


def _series_kernel(y, x):
    return j_series_scaled(2j * y, x, log_cosh(np.pi * y))


def _mpmath_kernel(y, x):
    out = np.empty(len(y), dtype=complex)
    with mpmath.workdps(MP_DPS):
        for i, yi in enumerate(y):
            out[i] = complex(mpmath.besselj(2j * yi, x) / mpmath.cosh(mpmath.pi * yi))
    return out


def _y_width(w, x):
    # phase of (x/2)^{2iy} / Gamma(1 + 2iy) moves at 2 |log(x / 4y)|
    freq = 2.0 * (abs(math.log(0.5 * x)) + math.log(2.0 * w.upper + 2.0)) + 1.0
    return min(0.25 * w.G, 3.0 / freq)


def _y_quadrature(w, x, tol, two_sided, route):
    kernel = _series_kernel if route == "series" else _mpmath_kernel
    n = 16 if route == "series" else 8

    def f(y):
        return kernel(y, x) * w.h(y) * y

    width = _y_width(w, x)
    value, err = adaptive_panels(
        f, uniform_edges(w.lower, w.upper, width), tol, n=n, label=f"Bessel transform at x={x!r}"
    )
    if two_sided:
        left, lerr = adaptive_panels(
            f, uniform_edges(-w.upper, -w.lower, width), tol, n=n, label=f"Bessel transform at x={x!r}"
        )
        value, err = value + left, err + lerr
    return value, err


def _tau_edges(w, x):
    smax = w.tau_max
    edges = [0.0]
    tau = 0.0
    while tau < smax:
        step = 4.0 / (x * math.sinh(tau) + 2.0 * w.upper + 1.0)
        step = 4.0 / (x * math.sinh(min(tau + step, smax)) + 2.0 * w.upper + 1.0)
        tau = min(tau + step, smax)
        edges.append(tau)
    return np.array(edges)


def _cosh_quadrature(w, x, tol, two_sided):
    smax = w.tau_max
    y, wy = panel_rule(uniform_edges(w.lower, w.upper, min(0.25 * w.G, 3.0 / (2.0 * smax + 1.0))), 24)
    wa = wy * w.h(y) * y
    wb = wa * np.tanh(np.pi * y)

    def f(tau):
        out = np.empty(len(tau), dtype=complex)
        for s in range(0, len(tau), _CHUNK):
            ts = tau[s : s + _CHUNK]
            C = np.cos(2.0 * np.outer(ts, y))
            phase = x * np.cosh(ts)
            if two_sided:
                # the y-odd part cancels and the y-even part doubles
                out[s : s + _CHUNK] = -2j * np.cos(phase) * (C @ wb)
            else:
                out[s : s + _CHUNK] = np.sin(phase) * (C @ wa) - 1j * np.cos(phase) * (C @ wb)
        return (2.0 / np.pi) * out

    return adaptive_panels(f, _tau_edges(w, x), tol, label=f"Bessel transform at x={x!r}")


def _bessel_transform(w, x, tol, two_sided, with_error):
    x = float(x)
    if not x > 0:
        raise DomainError(f"Bessel transform needs x > 0, got {x}")
    if w.weight == 0.0:
        value, err = 0j, 0.0
    else:
        route = transform_route(w, x)
        if route == "cosh":
            value, err = _cosh_quadrature(w, x, tol, two_sided)
        else:
            value, err = _y_quadrature(w, x, tol, two_sided, route)
    if with_error:
        return complex(value), err
    return complex(value)


def g_transform(w, x, quadrature_tol=1e-10, with_error=False):
    """
    Two-sided Bessel transform g(x) of the window

    Parameters
    ----------
    w : WindowKernel

    x : float
        positive argument

    quadrature_tol : float
        absolute tolerance; the reported error never undercuts the
        roundoff floor of the quadrature sum

    with_error : bool
        also return the error estimate

    Returns
    -------
    value : complex
        purely imaginary up to the error

    err : float, optional
    """
    return _bessel_transform(w, x, quadrature_tol, True, with_error)


def g_tilde(w, x, quadrature_tol=1e-10, with_error=False):
    """
    One-sided Bessel transform over y > 0; g(x) = 2i Im g_tilde(x)
    """
    return _bessel_transform(w, x, quadrature_tol, False, with_error)


def transform_batch(w, xs, n=16, chunk=128):
    """
    g and g_tilde at many arguments x <= SERIES_XMAX on one common y-grid,
    sized for the smallest x

    Returns
    -------
    g : ndarray

    gt : ndarray

    err : ndarray
        node doubling estimate for g, per x
    """
    xs = np.asarray(xs, dtype=float)
    if np.any(~(xs > 0)) or np.any(xs > SERIES_XMAX):
        raise DomainError(f"batch transform needs 0 < x <= {SERIES_XMAX}")
    if w.weight == 0.0 or len(xs) == 0:
        zeros = np.zeros(len(xs), dtype=complex)
        return zeros, zeros.copy(), np.zeros(len(xs))
    edges = uniform_edges(w.lower, w.upper, _y_width(w, float(np.min(xs))))
    results = []
    for m in (n, 2 * n):
        y, wy = panel_rule(edges, m)
        weight = wy * w.h(y) * y
        pos = np.empty(len(xs), dtype=complex)
        neg = np.empty(len(xs), dtype=complex)
        for s in range(0, len(xs), chunk):
            xc = xs[s : s + chunk, None]
            pos[s : s + chunk] = _series_matrix(2j * y, xc) @ weight
            neg[s : s + chunk] = _series_matrix(-2j * y, xc) @ weight
        results.append((pos - neg, pos))
    (g1, _), (g2, gt2) = results
    return g2, gt2, np.abs(g2 - g1)


def _series_matrix(nu, x):
    # J_nu(x) / cosh(pi Im(nu) / 2) for a column of x against a row of nu
    q = -0.25 * x * x
    term = np.exp(nu[None, :] * np.log(0.5 * x) - loggamma(nu + 1.0)[None, :] - log_cosh(0.5 * np.pi * nu.imag)[None, :])
    total = term.copy()
    for k in range(1, int(2 * np.max(x) + 25)):
        term = term * q / (k * (nu[None, :] + k))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def transform_table(w, xs, quadrature_tol=1e-10, mapper=map):
    """
    Rows (x, Re g, Im g, err) over a grid of x
    """
    values = list(mapper(_table_row, [(w, float(x), quadrature_tol) for x in xs]))
    return values


def _table_row(args):
    w, x, tol = args
    value, err = g_transform(w, x, tol, with_error=True)
    return {"x": x, "re_g": value.real, "im_g": value.imag, "err": err}


# --------------------------------------------------------------------
#             ASYMPTOTIC EXPANSION
# --------------------------------------------------------------------

# leading amplitude of J_{2iy}(x) / cosh(pi y) for large x
ASYMPTOTIC_PREFACTOR = math.sqrt(2.0 / math.pi) * complex(math.cos(-math.pi / 4), math.sin(-math.pi / 4))


def phase_coefficients(N):
    """
    c_m = (-1)^m 2 binom(2m-2, m-1) / (m (2m-1)), m = 1..N, the Taylor
    coefficients of sqrt(x^2 + 4y^2) - 2y asinh(2y/x) - x in y^2/x
    """
    return [(-1) ** m * 2.0 * comb(2 * m - 2, m - 1, exact=True) / (m * (2 * m - 1)) for m in range(1, N + 1)]


class AsymptoticExpansion(BaseModel, title="Large-x expansion of the one-sided transform"):
    model_config = ConfigDict(frozen=True)

    N: Annotated[int, Field(default=3, ge=0, le=4)]
    b_m: Annotated[Optional[list], Field(default=None)]
    c_m: Annotated[Optional[list], Field(default=None)]

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            N = int(data.get("N", 3))
            if data.get("c_m") is None:
                data["c_m"] = phase_coefficients(max(N, 1))
            if data.get("b_m") is None:
                data["b_m"] = [1.0] + [0.0] * N
        return data

    @model_validator(mode="after")
    def _validate_all(self) -> "AsymptoticExpansion":
        if self.c_m[0] != -2.0:
            raise ValueError(f"leading phase coefficient must be -2, got {self.c_m[0]}")
        if len(self.b_m) != self.N + 1 or self.b_m[0] != 1.0:
            raise ValueError("b_m must have N + 1 entries with b_0 = 1")
        return self

    @property
    def b(self):
        return ASYMPTOTIC_PREFACTOR

    def alpha(self, y, x):
        """
        Phase correction sum_m c_m y^(2m) / x^(2m-1)
        """
        q = (np.asarray(y, dtype=float) / x) ** 2
        return x * sum(c * q**m for m, c in enumerate(self.c_m, start=1))


def g_asymptotic(a, w, x, k, quadrature_tol=1e-10):
    """
    k-th expansion term int_0^oo (4y^2 + x^2)^(-k/2 - 1/4)
    exp(i x + i alpha(y, x)) y h(y) dy

    Raises
    ------
    RegimeError
        if x <= G T^(1 - epsilon)
    """
    x = float(x)
    if x <= w.regime_start():
        raise RegimeError(f"x={x!r} is below the asymptotic regime start {w.regime_start()!r}")

    def f(y):
        return (4 * y * y + x * x) ** (-0.5 * k - 0.25) * np.exp(1j * a.alpha(y, x)) * y * w.h(y)

    value, _ = adaptive_panels(f, uniform_edges(w.lower, w.upper, 0.25 * w.G), quadrature_tol, label="expansion term")
    return complex(np.exp(1j * (x % (2 * np.pi))) * value)


def expansion_value(a, w, x, quadrature_tol=1e-10):
    """
    b sum_k b_k g_asymptotic(k), the surrogate of g_tilde(x)
    """
    terms = [g_asymptotic(a, w, x, k, quadrature_tol) for k in range(a.N + 1)]
    return a.b * sum(bk * tk for bk, tk in zip(a.b_m, terms))


def fit_expansion(w, N=3, xs=None, quadrature_tol=1e-10):
    """
    Fit b_1..b_N by linear least squares of the expansion against g_tilde
    on a log grid inside the regime

    Returns
    -------
    AsymptoticExpansion
    """
    a = AsymptoticExpansion(N=N)
    if xs is None:
        start = w.regime_start()
        xs = np.geomspace(2.0 * start, 20.0 * start, 16)
    xs = np.asarray(xs, dtype=float)
    if N == 0:
        return a
    terms = np.array([[a.b * g_asymptotic(a, w, x, k, quadrature_tol) for k in range(N + 1)] for x in xs])
    target = np.array([g_tilde(w, x, quadrature_tol) for x in xs]) - terms[:, 0]
    design = terms[:, 1:]
    scale = np.max(np.abs(design), axis=0)
    scale[scale == 0] = 1.0
    A = np.vstack([design.real, design.imag]) / scale
    rhs = np.concatenate([target.real, target.imag])
    coef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    b_m = [1.0] + [float(c) for c in coef / scale]
    logger.info(f"fitted expansion coefficients b_m={b_m} on x in [{xs[0]!r}, {xs[-1]!r}]")
    return AsymptoticExpansion(N=N, b_m=b_m, c_m=a.c_m)


# --------------------------------------------------------------------
#             TRANSFORM DIAGNOSTICS
# --------------------------------------------------------------------


def small_argument_constant(w, xs, quadrature_tol=1e-10):
    """
    max |g(x)| / (G x^2) over small arguments `xs`
    """
    return max(abs(g_transform(w, x, quadrature_tol)) / (w.G * x * x) for x in xs)


def transition_decay(w, eps=None, quadrature_tol=1e-10, samples=12):
    """
    |g| at 0.5 G T^(1-eps) relative to max |g| on [G T, 10 G T]
    """
    eps = w.epsilon if eps is None else eps
    inside = abs(g_transform(w, 0.5 * w.G * w.T ** (1.0 - eps), quadrature_tol))
    peak = max(abs(g_transform(w, x, quadrature_tol)) for x in np.geomspace(w.G * w.T, 10 * w.G * w.T, samples))
    return inside / peak


def imaginary_part_check(w, xs, quadrature_tol=1e-10):
    """
    max |g(x) - 2i Im g_tilde(x)| together with the summed error estimates
    """
    worst, budget = 0.0, 0.0
    for x in xs:
        g, gerr = g_transform(w, x, quadrature_tol, with_error=True)
        gt, terr = g_tilde(w, x, quadrature_tol, with_error=True)
        worst = max(worst, abs(g - 2j * gt.imag))
        budget = max(budget, gerr + 2 * terr)
    return worst, budget
