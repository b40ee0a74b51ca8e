import pytest

from maassqe.input import RunConfig
from maassqe.selftest import (
    CHECKS,
    check_kloosterman,
    check_weil,
    check_gauss,
    check_twisted,
    check_crt,
    check_spectrum,
    check_roundtrip,
    check_pivot,
    check_transform,
    check_transform_asymptotics,
    check_oscillatory,
    check_qe_trend,
    run_checks,
)
from maassqe.errors import CoverageError


@pytest.mark.parametrize("check", [check_kloosterman, check_crt, check_transform])
def test_cache_free_checks(check):
    rows = check(RunConfig(), None, map)
    assert rows
    assert all(r["passed"] for r in rows), rows


@pytest.mark.slow
@pytest.mark.parametrize(
    "check", [check_weil, check_gauss, check_twisted, check_transform_asymptotics, check_oscillatory]
)
def test_heavy_cache_free_checks(check):
    rows = check(RunConfig(), None, map)
    assert all(r["passed"] for r in rows), rows


def test_check_rows_are_named():
    rows = check_transform(RunConfig(), None, map)
    assert [r["check"] for r in rows] == ["transform_imaginary_part", "transform_small_argument"]
    assert set(rows[0]) == {"check", "value", "threshold", "passed"}


def test_check_list_is_complete():
    names = {c.__name__ for c in CHECKS}
    for name in (
        "check_twisted",
        "check_crt",
        "check_transform_asymptotics",
        "check_oscillatory",
        "check_qe_trend",
        "check_kuznetsov",
        "check_nodal",
    ):
        assert name in names


def test_checks_on_small_cache(odd_cache):
    config = RunConfig()
    spectrum = {r["check"]: r["passed"] for r in check_spectrum(config, odd_cache, map)}
    assert spectrum["spectrum_odd_9.5337"]
    assert not spectrum["spectrum_even_13.7798"]
    assert check_roundtrip(config, odd_cache, map)[0]["passed"]
    assert check_pivot(config, odd_cache, map)[0]["passed"]


def test_qe_trend_needs_even_forms(odd_cache):
    with pytest.raises(CoverageError):
        check_qe_trend(RunConfig(), odd_cache, map)


@pytest.mark.slow
def test_full_suite(wide_cache):
    rows = run_checks(RunConfig(), wide_cache)
    failed = [r for r in rows if not r["passed"]]
    assert failed == []
    names = {r["check"] for r in rows}
    assert {"kuznetsov_1_2", "kuznetsov_2_3", "kuznetsov_ladder", "qe_decay", "nodal_spearman"} <= names
