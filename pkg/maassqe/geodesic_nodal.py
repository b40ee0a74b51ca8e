"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.

Restrictions of even forms to the imaginary axis: sign changes, the
maximal partial integral M1, restriction norms and the chain
(S + 1) M1 >= ||phi||_L1 >= ||phi||^2_L2 / ||phi||_inf.
"""

import math
import logging
import warnings
from functools import partial

import numpy as np
from scipy.stats import spearmanr
from tqdm import tqdm
from typing_extensions import Annotated
from pydantic import BaseModel, Field, ConfigDict, model_validator

from maassqe.errors import ConvergenceError, DomainError, RefinementRequired
from maassqe.integrators import running_integral
from maassqe.maass_forms import EVALUATION_FLOOR, Parity, evaluate, tail_bound

logger = logging.getLogger(__name__)

MIN_DENSITY = 10
MIN_POINTS = 65
MAX_REFINE = 3
CERTIFY_FACTOR = 10.0
CHAIN_SLACK = 0.99


class GeodesicSegment(BaseModel, title="Segment of the imaginary axis"):
    model_config = ConfigDict(frozen=True)

    y_min: Annotated[float, Field(default=1.0, ge=0.1)]
    y_max: Annotated[float, Field(default=2.0, gt=0)]

    @model_validator(mode="after")
    def _validate_all(self) -> "GeodesicSegment":
        if self.y_min >= self.y_max:
            raise ValueError(f"segment needs y_min < y_max, got [{self.y_min}, {self.y_max}]")
        return self

    @property
    def length(self):
        """
        Hyperbolic length log(y_max / y_min)
        """
        return math.log(self.y_max / self.y_min)


class AxisTrace:
    """
    Samples phi(iy) on a segment with a certified error per point

    Parameters
    ----------
    y : ndarray
        increasing sample heights

    values : ndarray
        phi(iy)

    err : ndarray
        certified absolute error per sample

    trivial : bool
        set for odd forms, which vanish identically on the axis
    """

    def __init__(self, y, values, err, trivial=False):
        self.y = np.asarray(y, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.err = np.broadcast_to(np.asarray(err, dtype=float), self.y.shape)
        self.trivial = trivial

    def __len__(self):
        return len(self.y)

    def reflected(self):
        """
        The same trace under the isometry y -> y_min y_max / y of the segment
        """
        ymin, ymax = self.y[0], self.y[-1]
        return AxisTrace(ymin * ymax / self.y[::-1], self.values[::-1], self.err[::-1], self.trivial)


class NodalReport(BaseModel, title="Sign changes and norms of one restriction"):
    t: float
    parity: str
    y_min: float
    y_max: float
    density: int
    sign_changes: Annotated[int, Field(ge=0)]
    m1: Annotated[float, Field(ge=0)]
    l1_norm: Annotated[float, Field(ge=0)]
    l2_restriction: Annotated[float, Field(ge=0)]
    sup_norm: Annotated[float, Field(ge=0)]
    lower_bound_ratio: float
    s_times_m1: float
    chain_holds: bool
    cauchy_schwarz_holds: bool
    holder_holds: bool
    nodal_reference: float
    sup_reference: float

    def to_row(self):
        return self.model_dump()


# --------------------------------------------------------------------
#             SAMPLING
# --------------------------------------------------------------------


def refine_crossings(func, trace, levels=MAX_REFINE):
    """
    Bisect the cells of a trace where both ends sit below their
    certificate or the sign changes, `levels` times

    Parameters
    ----------
    func : callable
        values at an array of heights

    trace : AxisTrace

    levels : int
        number of bisection passes

    Returns
    -------
    AxisTrace
        containing every sample of `trace`
    """
    y, values, err = trace.y, trace.values, np.array(trace.err)
    for _ in range(levels):
        weak = np.abs(values) <= CERTIFY_FACTOR * err
        cells = (weak[1:] & weak[:-1]) | (np.sign(values[1:]) * np.sign(values[:-1]) < 0)
        if not np.any(cells):
            break
        mid = 0.5 * (y[:-1] + y[1:])[cells]
        y = np.concatenate([y, mid])
        values = np.concatenate([values, func(mid)])
        err = np.concatenate([err, np.full(len(mid), np.max(err[:-1][cells]))])
        order = np.argsort(y, kind="stable")
        y, values, err = y[order], values[order], err[order]
    logger.debug(f"refined trace from {len(trace)} to {len(y)} samples")
    return AxisTrace(y, values, err, trace.trivial)


def sample_on_axis(form, seg, density=20, adaptive=True):
    """
    Sample phi(iy) on the segment with spacing y_min / (t density), i.e.
    `density` points per local oscillation of K_it(2 pi y)

    Parameters
    ----------
    form : MaassForm

    seg : GeodesicSegment

    density : int
        points per oscillation, at least 10

    adaptive : bool
        bisect weak or sign changing cells, see refine_crossings; off for
        the uniform odd grids the segment integrals need

    Returns
    -------
    AxisTrace
        flagged zero trace for odd forms
    """
    if density < MIN_DENSITY:
        raise ValueError(f"density must be at least {MIN_DENSITY}, got {density}")
    if seg.y_min <= EVALUATION_FLOOR:
        raise DomainError(f"segment starts at {seg.y_min}, evaluation needs y > {EVALUATION_FLOOR}")
    spacing = seg.y_min / (max(form.t, 1.0) * density)
    npts = max(MIN_POINTS, int(math.ceil((seg.y_max - seg.y_min) / spacing)) + 1)
    npts += 1 - npts % 2
    y = np.linspace(seg.y_min, seg.y_max, npts)
    if form.parity == Parity.ODD:
        logger.info(f"t={form.t!r} is odd and vanishes on the imaginary axis")
        return AxisTrace(y, np.zeros_like(y), np.zeros_like(y), trivial=True)
    values = evaluate(form, 1j * y)
    err = form.err + tail_bound(form, seg.y_min)
    trace = AxisTrace(y, values, err)
    if not adaptive:
        return trace
    return refine_crossings(lambda h: evaluate(form, 1j * h), trace)


# --------------------------------------------------------------------
#             SIGN CHANGES
# --------------------------------------------------------------------


def count_sign_changes(trace):
    """
    Strict sign alternations between consecutive samples whose magnitude
    exceeds ten times their certified error

    Raises
    ------
    RefinementRequired
        two adjacent samples are both below their certificate
    """
    if trace.trivial or not np.any(trace.values):
        return 0
    certified = np.abs(trace.values) > CERTIFY_FACTOR * trace.err
    unresolved = ~certified[1:] & ~certified[:-1]
    if np.any(unresolved):
        k = int(np.argmax(unresolved))
        raise RefinementRequired(
            f"unresolved crossing between y={trace.y[k]!r} and y={trace.y[k + 1]!r}"
        )
    signs = np.sign(trace.values[certified])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def stable_sign_changes(form, seg, density=20, max_refine=MAX_REFINE):
    """
    Sign changes counted at `density` and twice that, doubling until both
    counts agree

    Returns
    -------
    count : int

    density : int
        the coarser density of the agreeing pair
    """
    history = []
    for _ in range(max_refine + 1):
        try:
            coarse = count_sign_changes(sample_on_axis(form, seg, density))
            fine = count_sign_changes(sample_on_axis(form, seg, 2 * density))
        except RefinementRequired as e:
            history.append((density, str(e)))
            density *= 2
            continue
        if coarse == fine:
            return coarse, density
        history.append((density, f"{coarse} != {fine}"))
        density *= 2
    raise RefinementRequired(f"sign count of t={form.t!r} not stable under refinement: {history}")


# --------------------------------------------------------------------
#             INTEGRALS ALONG THE SEGMENT
# --------------------------------------------------------------------


def _segment_integral(trace, power, reduce):
    """
    Running integral of |phi|^power (power 1 signed when reduce is "range")
    in ds = dy / y with its error, on a uniform grid of odd length
    """
    v = trace.values
    length = math.log(trace.y[-1] / trace.y[0])
    if power == 1:
        f = v if reduce == "range" else np.abs(v)
        point_err = float(np.max(trace.err))
    else:
        f = v**2
        point_err = 2.0 * float(np.max(np.abs(v) * trace.err)) + float(np.max(trace.err)) ** 2
    _, running, err = running_integral(trace.y, f / trace.y)
    if reduce == "range":
        return float(np.max(running) - np.min(running)), 2.0 * (err + point_err * length)
    return float(running[-1]), err + point_err * length


def trace_m1(trace):
    """
    max I - min I of the running integral I of a sampled restriction
    """
    return 0.0 if trace.trivial else _segment_integral(trace, 1, "range")[0]


def trace_l1(trace):
    return 0.0 if trace.trivial else _segment_integral(trace, 1, "total")[0]


def _certified_integral(form, seg, density, power, reduce, max_refine=MAX_REFINE):
    """
    Segment integral accepted once the error is below 1% of the result
    """
    history = []
    for _ in range(max_refine + 1):
        trace = sample_on_axis(form, seg, density, adaptive=False)
        if trace.trivial:
            return 0.0
        value, err = _segment_integral(trace, power, reduce)
        if err <= 0.01 * abs(value) or value == err == 0.0:
            return value
        history.append((density, value, err))
        density *= 2
    raise ConvergenceError(f"segment integral of t={form.t!r} not certified to 1%: {history}")


def m1_sup(form, seg, density=20):
    """
    M1 = sup over subintervals of |int phi(iy) dy / y|, attained as
    max I - min I of the running integral I
    """
    return _certified_integral(form, seg, density, 1, "range")


def l1_norm(form, seg, density=20):
    return _certified_integral(form, seg, density, 1, "total")


def restriction_norm(form, seg, density=20):
    """
    int_seg |phi(iy)|^2 dy / y
    """
    return _certified_integral(form, seg, density, 2, "total")


def sup_norm(form, seg, density=20):
    """
    Largest sampled |phi(iy)|, a lower bound of the sup over the segment
    """
    return float(np.max(np.abs(sample_on_axis(form, seg, density).values)))


# --------------------------------------------------------------------
#             REPORTS
# --------------------------------------------------------------------


def chain_inequality_report(form, seg, density=20):
    """
    Assemble sign changes, M1, the L1 and L2 restriction norms and the
    sampled sup norm of one form, with the checks of the chain

    (S + 1) M1 >= 0.99 ||phi||_L1,   ||phi||_L1 sup >= ||phi||^2_L2,
    ||phi||^2_L2 <= sup^2 length

    Returns
    -------
    NodalReport
    """
    S, used = stable_sign_changes(form, seg, density)
    m1 = m1_sup(form, seg, used)
    l1 = l1_norm(form, seg, used)
    l2 = restriction_norm(form, seg, used)
    sup = sup_norm(form, seg, 2 * used)
    if m1 > 0 and sup > 0:
        lower = l2 / (m1 * sup) - 1.0
    else:
        lower = 0.0
    report = NodalReport(
        t=form.t,
        parity=form.parity.value,
        y_min=seg.y_min,
        y_max=seg.y_max,
        density=used,
        sign_changes=S,
        m1=m1,
        l1_norm=l1,
        l2_restriction=l2,
        sup_norm=sup,
        lower_bound_ratio=lower,
        s_times_m1=S * m1,
        chain_holds=(S + 1) * m1 >= CHAIN_SLACK * l1,
        cauchy_schwarz_holds=l1 * sup >= CHAIN_SLACK * l2,
        holder_holds=l2 <= sup**2 * seg.length / CHAIN_SLACK,
        nodal_reference=form.t ** (1.0 / 12.0),
        sup_reference=form.t ** (5.0 / 12.0),
    )
    if not report.chain_holds:
        warnings.warn(f"chain inequality fails for t={form.t!r}: (S+1) M1 = {(S + 1) * m1!r}, L1 = {l1!r}")
    logger.info(f"t={form.t!r}: S={S}, M1={m1!r}, L2={l2!r}, sup={sup!r}")
    return report


def nodal_reports(cache, seg, density=20, t_range=None, mapper=map, progress=False):
    """
    Chain reports of all cached even forms, optionally inside `t_range`
    """
    lo, hi = t_range if t_range is not None else cache.t_range
    forms = cache.forms(lo, hi, Parity.EVEN)
    job = partial(chain_inequality_report, seg=seg, density=density)
    return list(tqdm(mapper(job, forms), total=len(forms), desc="nodal", disable=not progress))


def nodal_trend(reports):
    """
    Spearman correlation of the sign change count against t

    Returns
    -------
    dict
        count, spearman, pvalue; NaN below three forms or for a constant count
    """
    t = [r.t for r in reports]
    S = [r.sign_changes for r in reports]
    if len(reports) < 3 or len(set(S)) < 2:
        return {"count": len(reports), "spearman": math.nan, "pvalue": math.nan}
    rho, pvalue = spearmanr(t, S)
    return {"count": len(reports), "spearman": float(rho), "pvalue": float(pvalue)}
