"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.

Both sides of the Kuznetsov trace formula for single Fourier indices

    sum_phi h(t_phi) rho_phi(1)^2 / 2 lambda(n) lambda(m)
        + (1/pi) int_R h(r) tau_ir(n) tau_ir(m) / |zeta(1 + 2ir)|^2 dr
  = delta_nm (1/pi^2) int_R r tanh(pi r) h(r) dr
        + sum_c S(n, m, c) / c (2i/pi) g(4 pi sqrt(nm) / c)

with rho_phi(1)^2 L(1, sym^2 phi) = 4.
"""

import math
import logging
import warnings

import numpy as np
from scipy.special import bernoulli, factorial
from tqdm import tqdm
from typing_extensions import Annotated
from pydantic import BaseModel, Field, ConfigDict, model_validator

from maassqe.errors import ConvergenceError
from maassqe.exp_sums import kloosterman
from maassqe.helpers import divisors, stable_sum
from maassqe.maass_forms import SPECTRAL_FLOOR
from maassqe.integrators import uniform_edges
from maassqe.spectral_transforms import (
    SERIES_XMAX,
    WindowKernel,
    adaptive_panels,
    g_tilde,
    g_transform,
    transform_batch,
)

logger = logging.getLogger(__name__)

CONTINUOUS_NORMALIZATION = 1.0 / math.pi
EM_TERMS = 10


class TraceCheckConfig(BaseModel, title="Kuznetsov identity check"):
    model_config = ConfigDict(frozen=True)

    w: WindowKernel
    n: Annotated[int, Field(default=1, ge=1)]
    m: Annotated[int, Field(default=1, ge=1)]
    t_max: Annotated[float, Field(default=40.0, gt=0)]
    c_max: Annotated[int, Field(default=10000, ge=1)]
    tol: Annotated[float, Field(default=1e-3, gt=0)]
    quadrature_tol: Annotated[float, Field(default=1e-10, gt=0)]

    @model_validator(mode="after")
    def _validate_all(self) -> "TraceCheckConfig":
        if self.t_max < self.w.T + 8 * self.w.G:
            raise ValueError(f"t_max={self.t_max} must be at least T + 8G = {self.w.T + 8 * self.w.G}")
        return self

    def spectral_range(self):
        """
        Interval where h(t) >= 1e-3 tol, clipped to the cuspidal spectrum
        """
        half = self.w.G * math.sqrt(math.log(1e3 / self.tol))
        return max(SPECTRAL_FLOOR, self.w.T - half), min(self.t_max, self.w.T + half)


# --------------------------------------------------------------------
#             ZETA ON THE ONE LINE
# --------------------------------------------------------------------


def zeta_one_line(t, with_error=False):
    """
    zeta(1 + 2it) by Euler-Maclaurin summation

    Parameters
    ----------
    t : float or ndarray

    with_error : bool
        also return the remainder bound |s + 2K + 1| / (sigma + 2K + 1)
        times the first omitted term

    Returns
    -------
    value : complex or ndarray
        inf at t = 0

    err : float or ndarray, optional
    """
    scalar = np.isscalar(t)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = 1.0 + 2j * t
    N = int(np.max(np.abs(s))) + 10
    n = np.arange(1, N, dtype=float)
    head = np.exp(-np.outer(s, np.log(n))).sum(axis=1)
    pole = np.where(t == 0, 1.0, s - 1.0)
    value = head + N ** (1.0 - s) / pole + 0.5 * N ** (-s)
    B = bernoulli(2 * EM_TERMS + 2)
    poch = s.copy()
    for k in range(1, EM_TERMS + 1):
        value = value + B[2 * k] / factorial(2 * k) * poch * N ** (-s - 2 * k + 1)
        poch = poch * (s + 2 * k - 1) * (s + 2 * k)
    nxt = B[2 * EM_TERMS + 2] / factorial(2 * EM_TERMS + 2) * poch * N ** (-s - 2 * EM_TERMS - 1)
    err = np.abs(s + 2 * EM_TERMS + 1) / (1.0 + 2 * EM_TERMS + 1) * np.abs(nxt)
    value = np.where(t == 0, np.inf, value)
    if scalar:
        value, err = complex(value[0]), float(err[0])
    if with_error:
        return value, err
    return value


def divisor_twist(n, r):
    """
    tau_ir(n) = sum_{ab = n} (a / b)^(ir), real for real r
    """
    r = np.asarray(r, dtype=float)
    return sum(np.cos(r * math.log(a * a / n)) for a in divisors(n))


# --------------------------------------------------------------------
#             SPECTRAL SIDE
# --------------------------------------------------------------------


def cusp_terms(cfg, cache):
    """
    Per-form summands h(t) rho(1)^2 / 2 lambda(n) lambda(m) for forms with
    t <= t_max
    """
    lo, hi = cfg.spectral_range()
    if lo <= hi:
        cache.require(lo, hi)
    rows = []
    for form in cache.forms(hi=cfg.t_max):
        if form.rho1_sq is None:
            raise ValueError(f"{form} has no rho(1)^2")
        value = float(cfg.w.h(form.t)) * 0.5 * form.rho1_sq * form.lam(cfg.n) * form.lam(cfg.m)
        rows.append({"t": form.t, "parity": form.parity.value, "term": value})
    return rows


def continuous_term(cfg, normalization=CONTINUOUS_NORMALIZATION):
    """
    normalization int_R h(r) tau_ir(n) tau_ir(m) / |zeta(1 + 2ir)|^2 dr

    Returns
    -------
    value : float

    err : float
    """

    def f(r):
        zeta = zeta_one_line(r)
        return cfg.w.h(r) * divisor_twist(cfg.n, r) * divisor_twist(cfg.m, r) / np.abs(zeta) ** 2

    width = min(0.25 * cfg.w.G, 1.0 / (1.0 + math.log(cfg.n * cfg.m)))
    value, err = adaptive_panels(f, uniform_edges(0.0, cfg.t_max, width), 1e-2 * cfg.tol, label="continuous term")
    return 2 * normalization * float(np.real(value)), 2 * normalization * err


def spectral_side(cfg, cache, with_parts=False):
    """
    Cusp form sum plus the Eisenstein contribution

    Raises
    ------
    CoverageError
        if the cache does not cover the window for both parities
    """
    cusp = stable_sum([row["term"] for row in cusp_terms(cfg, cache)])
    continuous, err = continuous_term(cfg)
    total = cusp + continuous
    if with_parts:
        return {"cusp": cusp, "continuous": continuous, "continuous_err": err, "total": total}
    return total


# --------------------------------------------------------------------
#             GEOMETRIC SIDE
# --------------------------------------------------------------------


def diagonal_term(cfg):
    """
    delta_nm (1/pi^2) int_R r tanh(pi r) h(r) dr
    """
    if cfg.n != cfg.m:
        return 0.0
    w = cfg.w

    def f(r):
        return r * np.tanh(np.pi * r) * w.h(r)

    value, _ = adaptive_panels(f, uniform_edges(w.lower, w.upper, 0.25 * w.G), 1e-2 * cfg.tol, label="diagonal term")
    return 2.0 / math.pi**2 * float(np.real(value))


def tau_tail_sum(C, s=2.5):
    """
    Bound on sum_{c > C} tau(c) c^(-s) from sum_{c <= x} tau(c) <= x (log x + 1)
    """
    return s * (C ** (1 - s) * (math.log(C) + 1) / (s - 1) + C ** (1 - s) / (s - 1) ** 2)


def kloosterman_tail(cfg, small_x_constant, c_max=None):
    """
    (2/pi) C G 16 pi^2 nm (n, m)^(1/2) sum_{c > c_max} tau(c) c^(-5/2), the
    tail of the Kloosterman side under |g(x)| <= C G x^2 and the Weil bound
    """
    C = cfg.c_max if c_max is None else c_max
    prefactor = 2.0 / math.pi * small_x_constant * cfg.w.G * 16 * math.pi**2 * cfg.n * cfg.m
    return prefactor * math.sqrt(math.gcd(cfg.n, cfg.m)) * tau_tail_sum(C)


def kloosterman_terms(cfg, mapper=map, progress=False):
    """
    Per-modulus rows (c, x, S, g, g_tilde, err) for c <= c_max
    """
    cs = np.arange(1, cfg.c_max + 1)
    xs = 4 * math.pi * math.sqrt(cfg.n * cfg.m) / cs
    g = np.empty(len(cs), dtype=complex)
    gt = np.empty(len(cs), dtype=complex)
    err = np.empty(len(cs))

    small = xs <= SERIES_XMAX
    if np.any(small):
        g[small], gt[small], err[small] = transform_batch(cfg.w, xs[small])
    large = np.flatnonzero(~small)
    args = [(cfg.w, float(xs[i]), cfg.quadrature_tol) for i in large]
    for i, (gi, gti, ei) in zip(large, mapper(_transform_pair, args)):
        g[i], gt[i], err[i] = gi, gti, ei

    S = np.array([kloosterman(cfg.n, cfg.m, int(c)) for c in tqdm(cs, disable=not progress)])
    return {"c": cs, "x": xs, "S": S, "g": g, "g_tilde": gt, "err": err}


def _transform_pair(args):
    w, x, tol = args
    g, gerr = g_transform(w, x, tol, with_error=True)
    gt, terr = g_tilde(w, x, tol, with_error=True)
    return g, gt, gerr + terr


def geometric_side(cfg, mapper=map, progress=False, with_parts=False, certify_tail=True):
    """
    Diagonal term plus the Kloosterman sum up to c_max with its tail bound;
    `certify_tail=False` reports the bound without enforcing it

    Raises
    ------
    ConvergenceError
        if the tail bound beyond c_max exceeds tol, naming a sufficient c_max
    """
    diagonal = diagonal_term(cfg)
    rows = kloosterman_terms(cfg, mapper=mapper, progress=progress)
    c, x, S = rows["c"], rows["x"], rows["S"]
    kl = stable_sum(S / c * (2j / math.pi) * rows["g"]).real
    kl_tilde = stable_sum(-4.0 / math.pi * S / c * rows["g_tilde"].imag)

    upper = c > cfg.c_max // 2
    small_x_constant = float(np.max(np.abs(rows["g"][upper]) / (cfg.w.G * x[upper] ** 2)))
    tail = kloosterman_tail(cfg, small_x_constant)
    if certify_tail and tail > cfg.tol:
        C = cfg.c_max
        while kloosterman_tail(cfg, small_x_constant, C) > cfg.tol / 10:
            C *= 2
        raise ConvergenceError(f"Kloosterman tail bound {tail:.2e} exceeds tol={cfg.tol:.1e}; use c_max >= {C}")
    if tail > cfg.tol / 10:
        warnings.warn(f"Kloosterman tail bound {tail:.2e} is within a factor 10 of tol={cfg.tol:.1e}")

    total = diagonal + kl
    logger.info(f"geometric side: diagonal {diagonal!r}, Kloosterman {kl!r} ({kl_tilde!r} via g_tilde), tail {tail:.2e}")
    if with_parts:
        return {
            "diagonal": diagonal,
            "kloosterman": kl,
            "kloosterman_tilde": kl_tilde,
            "tail_bound": tail,
            "small_x_constant": small_x_constant,
            "quadrature_err": float(np.sum(np.abs(S) / c * rows["err"])),
            "total": total,
        }
    return total


def trace_residual(cfg, cache, mapper=map):
    """
    |spectral - geometric| / max(|geometric|, tol)
    """
    spectral = spectral_side(cfg, cache)
    geometric = geometric_side(cfg, mapper=mapper)
    return abs(spectral - geometric) / max(abs(geometric), cfg.tol)


def refinement_ladder(cfg, cache, steps=3, mapper=map):
    """
    Trace residuals on `steps` rungs ending at cfg. Rung k < steps - 1 cuts
    the spectrum at t_max = T + (k + 1) G, and each rung below the last
    divides c_max by 10 and multiplies quadrature_tol by 100

    Parameters
    ----------
    cfg : TraceCheckConfig
        finest rung

    cache : CoefficientCache

    steps : int
        number of rungs, at least 2

    Returns
    -------
    list of dict
        t_max, c_max, quadrature_tol and residual per rung, coarsest first
    """
    if steps < 2:
        raise ValueError(f"a refinement ladder needs at least 2 steps, got {steps}")
    rungs = []
    for k in range(steps):
        level = steps - 1 - k
        rung = cfg.model_copy(
            update={
                "c_max": max(1, cfg.c_max // 10**level),
                "quadrature_tol": cfg.quadrature_tol * 100.0**level,
                "t_max": cfg.t_max if level == 0 else min(cfg.t_max, cfg.w.T + (k + 1) * cfg.w.G),
            }
        )
        spectral = spectral_side(rung, cache)
        geometric = geometric_side(rung, mapper=mapper, certify_tail=False)
        residual = abs(spectral - geometric) / max(abs(geometric), cfg.tol)
        logger.info(f"ladder rung {k}: c_max={rung.c_max}, quadrature_tol={rung.quadrature_tol:.0e}, residual {residual:.3e}")
        rungs.append(
            {
                "t_max": rung.t_max,
                "c_max": rung.c_max,
                "quadrature_tol": rung.quadrature_tol,
                "residual": residual,
            }
        )
    return rungs


def trace_check(cfg, cache, mapper=map, progress=False):
    """
    Both sides with their parts, the residual and the tail certificates
    """
    spectral = spectral_side(cfg, cache, with_parts=True)
    geometric = geometric_side(cfg, mapper=mapper, progress=progress, with_parts=True)
    residual = abs(spectral["total"] - geometric["total"]) / max(abs(geometric["total"]), cfg.tol)
    return {
        "T": cfg.w.T,
        "G": cfg.w.G,
        "n": cfg.n,
        "m": cfg.m,
        "t_max": cfg.t_max,
        "c_max": cfg.c_max,
        "spectral": spectral,
        "geometric": geometric,
        "residual": residual,
        "passed": residual <= cfg.tol,
    }


def calibrate_continuous_normalization(cfg, cache, mapper=map):
    """
    Factor by which the frozen Eisenstein normalization 1/pi must be
    multiplied to close the identity; 1 within tolerance when the
    normalizations agree
    """
    geometric = geometric_side(cfg, mapper=mapper)
    cusp = stable_sum([row["term"] for row in cusp_terms(cfg, cache)])
    continuous, _ = continuous_term(cfg)
    return (geometric - cusp) / continuous
