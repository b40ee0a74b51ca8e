from types import SimpleNamespace

import pytest
import numpy as np
from pydantic import ValidationError

from maassqe.bumps import TestFunction
from maassqe.errors import RefinementRequired
from maassqe.geodesic_nodal import (
    GeodesicSegment,
    AxisTrace,
    refine_crossings,
    sample_on_axis,
    trace_m1,
    trace_l1,
    count_sign_changes,
    stable_sign_changes,
    m1_sup,
    l1_norm,
    restriction_norm,
    chain_inequality_report,
    nodal_reports,
    nodal_trend,
)


def test_segment():
    seg = GeodesicSegment(y_min=1.0, y_max=np.e)
    assert np.abs(seg.length - 1.0) < 1e-15
    with pytest.raises(ValidationError):
        GeodesicSegment(y_min=2.0, y_max=1.0)
    with pytest.raises(ValidationError):
        GeodesicSegment(y_min=0.05, y_max=1.0)


def test_synthetic_sign_changes():
    y = np.linspace(0.0, np.pi, 1001)
    trace = AxisTrace(y, np.sin(10 * y), 1e-6)
    assert count_sign_changes(trace) == 9
    assert count_sign_changes(AxisTrace(y, 1.0 + 0.5 * np.sin(10 * y), 1e-6)) == 0


def test_unresolved_crossing():
    trace = AxisTrace([1.0, 1.1, 1.2, 1.3], [1.0, 1e-9, -1e-9, -1.0], 1e-6)
    with pytest.raises(RefinementRequired):
        count_sign_changes(trace)


def test_reflection():
    y = np.linspace(1.0, 2.0, 201)
    trace = AxisTrace(y, np.cos(20 * np.log(y)), 1e-8)
    back = trace.reflected()
    assert np.abs(back.y[0] - 1.0) < 1e-15 and np.abs(back.y[-1] - 2.0) < 1e-15
    assert np.all(np.diff(back.y) > 0)
    assert count_sign_changes(back) == count_sign_changes(trace)


def test_odd_form_is_trivial(odd_form):
    seg = GeodesicSegment()
    trace = sample_on_axis(odd_form, seg)
    assert trace.trivial
    assert count_sign_changes(trace) == 0
    assert m1_sup(odd_form, seg) == 0.0
    with pytest.raises(ValueError):
        sample_on_axis(odd_form, seg, density=5)


def test_sampling(even_form):
    seg = GeodesicSegment()
    trace = sample_on_axis(even_form, seg, 20, adaptive=False)
    assert len(trace) % 2 == 1
    assert np.max(np.diff(trace.y)) <= seg.y_min / (even_form.t * 20) + 1e-15
    assert np.all(trace.err > 0)


def test_adaptive_sampling(even_form):
    seg = GeodesicSegment()
    base = sample_on_axis(even_form, seg, 20, adaptive=False)
    trace = sample_on_axis(even_form, seg, 20)
    assert len(trace) > len(base)
    assert np.all(np.diff(trace.y) > 0)
    assert np.all(np.isin(base.y, trace.y))
    assert count_sign_changes(trace) == stable_sign_changes(even_form, seg)[0]


def test_chain_report(even_form):
    seg = GeodesicSegment()
    report = chain_inequality_report(even_form, seg)
    assert report.sign_changes >= 1
    assert report.chain_holds
    assert report.cauchy_schwarz_holds
    assert report.l2_restriction > 0.05
    assert report.m1 <= report.l1_norm * (1 + 1e-9)
    assert report.s_times_m1 == report.sign_changes * report.m1
    count, density = stable_sign_changes(even_form, seg)
    assert count == report.sign_changes and density >= 20


def test_restriction_additivity(even_form):
    whole = restriction_norm(even_form, GeodesicSegment(y_min=1.0, y_max=2.0))
    left = restriction_norm(even_form, GeodesicSegment(y_min=1.0, y_max=1.5))
    right = restriction_norm(even_form, GeodesicSegment(y_min=1.5, y_max=2.0))
    assert np.abs(left + right - whole) < 0.03 * whole
    assert l1_norm(even_form, GeodesicSegment(y_min=1.0, y_max=1.5)) > 0


def test_nodal_reports(even_cache, odd_cache):
    seg = GeodesicSegment()
    assert len(nodal_reports(even_cache, seg)) == len(even_cache.forms(parity="even"))
    assert nodal_reports(odd_cache, seg) == []


def test_nodal_trend():
    def fake(t, s):
        return SimpleNamespace(t=t, sign_changes=s)

    assert np.isnan(nodal_trend([fake(10.0, 1), fake(12.0, 2)])["spearman"])
    assert np.isnan(nodal_trend([fake(10.0, 2), fake(12.0, 2), fake(14.0, 2)])["spearman"])
    trend = nodal_trend([fake(10.0, 1), fake(12.0, 2), fake(14.0, 4), fake(16.0, 5)])
    assert trend["count"] == 4
    assert np.abs(trend["spearman"] - 1.0) < 1e-12


def test_refine_crossings_resolves_grid_zeros():
    # every grid point is a zero of sin(10 pi y)
    y = np.linspace(1.0, 2.0, 11)
    trace = AxisTrace(y, np.sin(10 * np.pi * y), 1e-6)
    with pytest.raises(RefinementRequired):
        count_sign_changes(trace)
    refined = refine_crossings(lambda h: np.sin(10 * np.pi * h), trace)
    assert np.all(np.isin(y, refined.y))
    assert np.all(np.diff(refined.y) > 0)
    assert count_sign_changes(refined) == 9


def test_refine_crossings_leaves_resolved_trace():
    y = np.linspace(1.0, 2.0, 11)
    trace = AxisTrace(y, 2.0 + np.cos(y), 1e-6)
    refined = refine_crossings(lambda h: 2.0 + np.cos(h), trace)
    assert np.array_equal(refined.y, y)


def test_m1_of_bump_pair():
    # the running integral climbs by the first bump and returns on the second
    first = TestFunction(1.1, 1.4, kappa=0.09)
    second = TestFunction(1.6, 1.9, kappa=0.09)
    y = np.linspace(1.0, 2.0, 4001)
    trace = AxisTrace(y, y * (first(y) - second(y)), 1e-14)
    area = first.integral()
    assert np.abs(second.integral() - area) < 1e-12 * area
    assert np.abs(trace_m1(trace) - area) < 1e-6 * area
    assert np.abs(trace_l1(trace) - 2 * area) < 1e-6 * area


@pytest.mark.slow
def test_sign_changes_grow_with_t(wide_cache):
    reports = nodal_reports(wide_cache, GeodesicSegment(), t_range=(13.0, 40.0))
    trend = nodal_trend(reports)
    assert trend["count"] >= 10
    assert trend["spearman"] > 0.5
