"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.

Collocation solver for Maass cusp forms on SL(2, Z).

For a trial spectral parameter t the Fourier coefficients c(n), c(1) = 1,
are solved from the implicit automorphy condition phi(z_m) = phi(z*_m) at
Q points z_m = x_m + iY on a horocycle and their pullbacks z*_m. The
linear system is built at two heights Y1 and Y2; at a true eigenvalue
both give the same coefficients, elsewhere they differ. Eigenvalues are
bracketed by a sign change of any one component of
D_j(t) = c_j(Y1) - c_j(Y2), j = 2..4, refined with Brent's method on that
component and accepted only when D_j vanishes for j = 2..6 and the Hecke
relations hold.
"""

import math
import logging

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq
from tqdm import tqdm

from maassqe.errors import ConvergenceError, InsufficientCoefficientsError
from maassqe.helpers import parallel_map
from maassqe.special_functions import k_bessel_scaled
from maassqe.maass_forms import (
    MaassForm,
    CoefficientCache,
    Parity,
    pullback,
    required_coefficients,
    rho1_squared,
    certify,
)

logger = logging.getLogger(__name__)

Y1 = 0.43
Y2 = 0.37
SCAN_STEP = 0.05
ACCEPT_TOL = 1e-5


def truncation(t, y):
    """
    Number of Fourier terms M(y) = (t + 12 t^(1/3)) / (2 pi y), plus a
    margin of two
    """
    return int(math.ceil((t + 12.0 * t ** (1.0 / 3.0)) / (2 * np.pi * y))) + 2


def coefficient_system(t, parity, Y, M, Q):
    """
    Collocation matrix V with sum_k V[n, k] c(k) = 0, n, k = 1..M

    Parameters
    ----------
    t : float
        trial spectral parameter

    parity : Parity

    Y : float
        height of the horocycle, below sqrt(3)/2

    M : int
        number of unknown coefficients

    Q : int
        number of collocation points, Q > M

    Returns
    -------
    ndarray of shape (M, M)
    """
    cs = np.cos if Parity(parity) == Parity.EVEN else np.sin
    x = (np.arange(1, Q + 1) - 0.5) / (2 * Q)
    xs, ys = pullback(x, np.full(Q, Y))
    n = np.arange(1, M + 1)
    basis = np.empty((Q, M))
    for k in n:
        basis[:, k - 1] = np.sqrt(ys) * k_bessel_scaled(t, 2 * np.pi * k * ys) * cs(2 * np.pi * k * xs)
    V = (2.0 / Q) * cs(2 * np.pi * np.outer(n, x)) @ basis
    V[np.diag_indices(M)] -= np.sqrt(Y) * k_bessel_scaled(t, 2 * np.pi * n * Y)
    return V


def solve_coefficients(t, parity, Y, M, Q=None):
    """
    Coefficients c(1..M) with c(1) = 1 at height Y
    """
    Q = M + 10 if Q is None else Q
    V = coefficient_system(t, parity, Y, M, Q)
    A = V[1:, 1:]
    b = -V[1:, 0]
    scale = np.max(np.abs(A), axis=1)
    scale[scale == 0] = 1.0
    c = sla.solve(A / scale[:, None], b / scale)
    return np.concatenate([[1.0], c])


def level_difference(t, parity, jmax=4):
    """
    D_j(t) = c_j(Y1) - c_j(Y2) for j = 2..jmax
    """
    M = max(truncation(t, Y2), jmax + 1)
    c1 = solve_coefficients(t, parity, Y1, M)
    c2 = solve_coefficients(t, parity, Y2, M)
    return c1[1:jmax] - c2[1:jmax], c1


def _validate(t, parity):
    diff, c = level_difference(t, parity, jmax=7)
    scale = np.maximum(1.0, np.abs(c[1:7]))
    mismatch = float(np.max(np.abs(diff) / scale))
    hecke = max(abs(c[1] * c[2] - c[5]), abs(c[1] * c[1] - c[3] - 1.0))
    return mismatch, hecke


def _refine(parity, j, lo, hi):
    def func(t):
        return level_difference(t, parity)[0][j]

    return brentq(func, lo, hi, xtol=1e-13, maxiter=200)


def _scan(args):
    lo, hi, parity, step = args
    grid = np.linspace(lo, hi, max(2, int(math.ceil((hi - lo) / step)) + 1))
    values = [level_difference(t, parity)[0] for t in grid]
    roots = []
    for i in range(len(grid) - 1):
        a, b = values[i], values[i + 1]
        crossing = np.flatnonzero(np.sign(a) * np.sign(b) < 0)
        if len(crossing) == 0:
            continue
        # steepest crossing first
        order = crossing[np.argsort(-np.abs(a[crossing] - b[crossing]))]
        failures = []
        for j in order:
            try:
                root = _refine(parity, int(j), grid[i], grid[i + 1])
            except (RuntimeError, ValueError) as e:
                failures.append(f"D_{j + 2}: {e}")
                continue
            mismatch, hecke = _validate(root, parity)
            if mismatch < ACCEPT_TOL and hecke < ACCEPT_TOL:
                logger.info(f"{parity} candidate t={root!r} accepted (mismatch {mismatch:.2e}, Hecke {hecke:.2e})")
                roots.append((root, parity, (grid[i], grid[i + 1])))
                break
            logger.debug(
                f"{parity} candidate t={root!r} from D_{j + 2} rejected (mismatch {mismatch:.2e}, Hecke {hecke:.2e})"
            )
        else:
            if len(failures) == len(order):
                raise ConvergenceError(
                    f"root refinement failed on [{grid[i]}, {grid[i + 1]}] ({parity}): {'; '.join(failures)}"
                )
    return roots


def final_coefficients(t, parity, N_coeff):
    """
    Coefficients c(1..N_coeff) at two low heights, taking each c(n) from
    the height where |Kt(2 pi n Y)| is larger
    """
    Ya = min(Y1, 0.9 * t / (2 * np.pi * N_coeff))
    Yb = 0.93 * Ya
    M = max(truncation(t, Yb), N_coeff + 2)
    ca = solve_coefficients(t, parity, Ya, M)
    cb = solve_coefficients(t, parity, Yb, M)
    n = np.arange(1, N_coeff + 1)
    ka = np.abs(k_bessel_scaled(t, 2 * np.pi * n * Ya))
    kb = np.abs(k_bessel_scaled(t, 2 * np.pi * n * Yb))
    coeffs = np.where(ka >= kb, ca[:N_coeff], cb[:N_coeff])
    coeffs[0] = 1.0
    return coeffs


def build_form(t, parity, N_coeff, subinterval=None, precision_target=None):
    """
    Final coefficients, rho(1)^2 and the certified error of the form at t
    """
    coeffs = final_coefficients(t, parity, N_coeff)
    form = MaassForm(t, parity, coeffs)
    form = form.replace(rho1_sq=rho1_squared(form))
    form = form.replace(err=certify(form))
    if precision_target is not None and form.err > precision_target:
        raise ConvergenceError(
            f"form at t={t!r} ({form.parity.value}) in subinterval {subinterval} reached err={form.err:.2e} "
            f"> target {precision_target:.2e}"
        )
    return form


def _build(args):
    return build_form(*args)


def solve_spectrum(t_range, parity, N_coeff, precision_target, step=SCAN_STEP, mapper=None, progress=False):
    """
    All cusp forms with t in t_range

    Parameters
    ----------
    t_range : tuple of float
        spectral interval (lo, hi), 0 < lo < hi <= 200

    parity : {"even", "odd", "both"}

    N_coeff : int
        number of Hecke eigenvalues to store, at least 2 max(t_range);
        raised to the amount the symmetric square normalization needs

    precision_target : float
        required certified err of every form

    step : float
        scan step in t

    mapper : callable, optional
        parallel map with ordered results, e.g. helpers.parallel_map

    progress : bool
        show a progress bar

    Returns
    -------
    CoefficientCache
    """
    lo, hi = float(t_range[0]), float(t_range[1])
    if not (0 < lo < hi <= 200):
        raise ValueError(f"t_range must satisfy 0 < lo < hi <= 200, got {t_range}")
    if N_coeff < 2 * hi:
        raise InsufficientCoefficientsError(f"N_coeff={N_coeff} is below 2 max(t_range) = {2 * hi}")
    parities = ["even", "odd"] if parity == "both" else [Parity(parity).value]
    mapper = mapper if mapper is not None else parallel_map
    N_store = max(int(N_coeff), required_coefficients(hi))
    if N_store > N_coeff:
        logger.info(f"N_coeff raised from {N_coeff} to {N_store} for the symmetric square normalization")

    chunks = []
    edges = np.arange(lo, hi, 1.0).tolist() + [hi]
    for p in parities:
        chunks.extend((a, b, p, step) for a, b in zip(edges[:-1], edges[1:]))
    found = []
    for roots in tqdm(mapper(_scan, chunks), total=len(chunks), disable=not progress):
        found.extend(roots)

    jobs = [(root, p, N_store, sub, precision_target) for root, p, sub in found]
    forms = mapper(_build, jobs)
    logger.info(f"solved {len(forms)} forms in {t_range} ({parity})")
    return CoefficientCache(_dedupe(forms), (lo, hi), N_store, parities)


def _dedupe(forms):
    forms = sorted(forms, key=lambda f: f.t)
    kept = []
    for form in forms:
        if kept and abs(kept[-1].t - form.t) < kept[-1].err + form.err:
            if form.err < kept[-1].err:
                kept[-1] = form
            continue
        kept.append(form)
    return kept
