"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.
"""

import logging
from functools import lru_cache

import numpy as np

try:
    from scipy.integrate import cumtrapz
except ImportError:
    from scipy.integrate import cumulative_trapezoid as cumtrapz

from maassqe.errors import QuadratureError

logger = logging.getLogger(__name__)

# --------------------------------------------------------------------
#             TANH-SINH RULE
# --------------------------------------------------------------------


@lru_cache(maxsize=32)
def tanh_sinh_rule(level):
    """
    Tanh-sinh abscissae and weights on [-1, 1] with mesh 2^-level

    Parameters
    ----------
    level : int
        refinement level, mesh spacing h = 2**-level

    Returns
    -------
    x : ndarray
        abscissae, symmetric around 0

    w : ndarray
        weights, including the Jacobian of the map
    """
    h = 2.0 ** (-level)
    kmax = int(np.ceil(3.2 / h))
    t = h * np.arange(-kmax, kmax + 1)
    sh = 0.5 * np.pi * np.sinh(t)
    x = np.tanh(sh)
    w = h * 0.5 * np.pi * np.cosh(t) / np.cosh(sh) ** 2
    keep = (np.abs(x) < 1.0) & (w > 1e-300)
    x, w = x[keep], w[keep]
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def tanh_sinh(f, a, b, tol=1e-12, max_level=8):
    """
    Integrate a vectorized function over [a, b] with the tanh-sinh rule,
    halving the mesh until two successive levels agree

    Parameters
    ----------
    f : callable
        vectorized integrand

    a, b : float
        integration limits

    tol : float
        absolute tolerance

    max_level : int
        maximum refinement level

    Returns
    -------
    value : float or complex

    err : float
        difference between the last two levels
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        value, err = tanh_sinh(f, b, a, tol=tol, max_level=max_level)
        return -value, err

    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    previous = None
    err = np.inf
    for level in range(2, max_level + 1):
        x, w = tanh_sinh_rule(level)
        value = half * np.sum(w * f(mid + half * x))
        if previous is not None:
            err = abs(value - previous)
            if err <= tol:
                return value, err
        previous = value
    raise QuadratureError(
        f"tanh-sinh did not converge on [{a}, {b}]: last difference {err:.3e} > {tol:.3e}"
    )


# --------------------------------------------------------------------
#             GAUSS-LEGENDRE PANELS
# --------------------------------------------------------------------


@lru_cache(maxsize=32)
def _legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(edges, n):
    """
    Composite Gauss-Legendre nodes and weights on the panels defined by
    `edges`

    Parameters
    ----------
    edges : array_like
        increasing panel boundaries

    n : int
        nodes per panel

    Returns
    -------
    x : ndarray
        flattened nodes

    w : ndarray
        flattened weights
    """
    edges = np.asarray(edges, dtype=float)
    xg, wg = _legendre(n)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    return (mid + half * xg[None, :]).ravel(), (half * wg[None, :]).ravel()


def uniform_edges(a, b, width):
    """
    Panel boundaries on [a, b] with panel width at most `width`
    """
    npanel = max(1, int(np.ceil((b - a) / width)))
    return np.linspace(a, b, npanel + 1)


def gauss_panels(f, edges, n=16):
    """
    Integrate a vectorized function on Gauss-Legendre panels, with the
    error estimated by comparing n and 2n nodes per panel

    Returns
    -------
    value : float or complex

    err : float
    """
    x1, w1 = panel_rule(edges, n)
    x2, w2 = panel_rule(edges, 2 * n)
    coarse = np.sum(w1 * f(x1))
    fine = np.sum(w2 * f(x2))
    return fine, abs(fine - coarse)


def gauss_panels_2d(f, xedges, yedges, n=16):
    """
    Tensor Gauss-Legendre panels on a rectangle, n and 2n nodes per panel
    and direction; `f(X, Y)` is evaluated on meshgrid arrays

    Returns
    -------
    value : complex

    err : float
    """
    results = []
    for m in (n, 2 * n):
        x, wx = panel_rule(xedges, m)
        y, wy = panel_rule(yedges, m)
        X, Y = np.meshgrid(x, y, indexing="ij")
        results.append(np.einsum("i,ij,j->", wx, f(X, Y), wy))
    return results[1], abs(results[1] - results[0])


# --------------------------------------------------------------------
#             FINITE DIFFERENCES
# --------------------------------------------------------------------

# five point central stencils on offsets -2..2, with their truncation order
_STENCILS = {
    0: (np.array([0.0, 0.0, 1.0, 0.0, 0.0]), None),
    1: (np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0, 4),
    2: (np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0, 4),
    3: (np.array([-1.0, 2.0, 0.0, -2.0, 1.0]) / 2.0, 2),
    4: (np.array([1.0, -4.0, 6.0, -4.0, 1.0]), 2),
}

_OFFSETS = np.arange(-2, 3)


def _stencil(f, x, h, order):
    coeffs, _ = _STENCILS[order]
    values = [f(x + k * h) for k in _OFFSETS]
    return sum(c * v for c, v in zip(coeffs, values) if c != 0.0) / h**order


def richardson_derivative(f, x, h, order=1):
    """
    Derivative of `f` at `x` from five point central stencils at steps h
    and h/2 combined by one Richardson step

    Parameters
    ----------
    f : callable
        function of one variable

    x : float
        evaluation point

    h : float
        base step

    order : int
        derivative order, 0 to 4

    Returns
    -------
    value : float

    err : float
        difference between the extrapolated value and the h/2 stencil
    """
    if order not in _STENCILS:
        raise ValueError(f"derivative order {order} not supported")
    if order == 0:
        return f(x), 0.0
    p = _STENCILS[order][1]
    coarse = _stencil(f, x, h, order)
    fine = _stencil(f, x, 0.5 * h, order)
    value = fine + (fine - coarse) / (2**p - 1)
    return value, abs(value - fine)


def mixed_partial(f, x, y, k1, k2, hx, hy):
    """
    Mixed partial d^k1/dx^k1 d^k2/dy^k2 of f(x, y) by nested Richardson
    stencils

    Returns
    -------
    value : float

    err : float
    """
    errs = []

    def inner(xx):
        value, err = richardson_derivative(lambda yy: f(xx, yy), y, hy, k2)
        errs.append(abs(err))
        return value

    value, err = richardson_derivative(inner, x, hx, k1)
    scale = max(hx ** (-k1), 1.0)
    return value, err + scale * max(errs)


# --------------------------------------------------------------------
#             RUNNING INTEGRALS
# --------------------------------------------------------------------


def running_integral(x, y):
    """
    Cumulative integral of samples y(x), trapezoid rule on the full grid
    extrapolated against the grid of every second point

    Parameters
    ----------
    x, y : ndarray
        samples on a grid with an odd number of points

    Returns
    -------
    xs : ndarray
        every second grid point

    values : ndarray
        running integral from x[0] at xs

    err : float
        maximal Richardson correction
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) % 2 == 0:
        x, y = x[:-1], y[:-1]
    fine = cumtrapz(y, x, initial=0.0)[::2]
    coarse = cumtrapz(y[::2], x[::2], initial=0.0)
    values = fine + (fine - coarse) / 3.0
    return x[::2], values, float(np.max(np.abs(fine - coarse)) / 3.0) if len(values) else 0.0


# --------------------------------------------------------------------
#             LOW RANK TENSOR QUADRATURE
# --------------------------------------------------------------------


def cross_approximation(entry_row, entry_col, n1, n2, tol=1e-13, max_rank=80):
    """
    Adaptive cross approximation F ~ U^T V of an n1 x n2 matrix that is
    only accessed through single rows and columns

    Parameters
    ----------
    entry_row : callable
        entry_row(i) returns row i, shape (n2,)

    entry_col : callable
        entry_col(j) returns column j, shape (n1,)

    n1, n2 : int
        matrix shape

    tol : float
        relative Frobenius tolerance of the last rank one update

    max_rank : int
        maximal rank

    Returns
    -------
    U : ndarray of shape (rank, n1)

    V : ndarray of shape (rank, n2)
    """
    U, V = [], []
    used = np.zeros(n1, dtype=bool)
    i = n1 // 2
    norm2 = 0.0
    for _ in range(max_rank):
        row = np.array(entry_row(i), dtype=complex)
        for u, v in zip(U, V):
            row -= u[i] * v
        used[i] = True
        j = int(np.argmax(np.abs(row)))
        # residual row at the level of the current approximation error
        if np.abs(row[j]) <= tol * np.sqrt(abs(norm2) / (n1 * n2)):
            break
        col = np.array(entry_col(j), dtype=complex)
        for u, v in zip(U, V):
            col -= v[j] * u
        u = col / row[j]
        v = row
        cross = sum(np.vdot(ul, u) * np.vdot(vl, v) for ul, vl in zip(U, V))
        unorm, vnorm = np.linalg.norm(u), np.linalg.norm(v)
        norm2 += 2.0 * np.real(cross) + (unorm * vnorm) ** 2
        U.append(u)
        V.append(v)
        if unorm * vnorm <= tol * np.sqrt(abs(norm2)):
            break
        score = np.abs(u)
        score[used] = -1.0
        i = int(np.argmax(score))
    else:
        logger.warning(f"cross approximation reached max_rank={max_rank}")
    if not U:
        return np.zeros((0, n1), dtype=complex), np.zeros((0, n2), dtype=complex)
    return np.array(U), np.array(V)


def separable_quadrature(func, xedges, yedges, n=16, tol=1e-13, modulations=((None, None),)):
    """
    Tensor Gauss-Legendre quadrature of f(x, y) g(x) h(y) over a rectangle,
    with f compressed by cross approximation so that large node counts stay
    cheap

    Parameters
    ----------
    func : callable
        func(X, Y) evaluated on broadcastable arrays

    xedges, yedges : array_like
        panel boundaries in each direction

    n : int
        nodes per panel; the error estimate repeats with 2n

    tol : float
        cross approximation tolerance

    modulations : sequence of (callable or None, callable or None)
        separable factors (g, h); one integral is returned per pair

    Returns
    -------
    values : ndarray
        one value per modulation pair

    err : ndarray
        node doubling error per modulation pair
    """
    results = []
    for m in (n, 2 * n):
        x, wx = panel_rule(xedges, m)
        y, wy = panel_rule(yedges, m)
        U, V = cross_approximation(
            lambda i: func(x[i], y),
            lambda j: func(x, y[j]),
            len(x),
            len(y),
            tol=tol,
        )
        vals = []
        for g, h in modulations:
            gx = wx if g is None else wx * g(x)
            hy = wy if h is None else wy * h(y)
            vals.append(np.sum((U @ gx) * (V @ hy)))
        results.append(np.array(vals))
    return results[1], np.abs(results[1] - results[0])
