"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.
"""

import os
import math
import logging
import argparse as ap
from functools import partial

from pydantic import ValidationError

import maassqe.errors as err
from maassqe.input import RunConfig, Window, read_inputfile, apply_overrides, generate_metadata
from maassqe.input import __version__ as version
from maassqe.helpers import prepare_log, parallel_map
from maassqe.postprocessing import write_rows
from maassqe.maass_forms import CoefficientCache, SPECTRAL_FLOOR, lambda_table
from maassqe.hejhal import solve_spectrum
from maassqe.exp_sums import kloosterman, weil_ratio
from maassqe.spectral_transforms import transform_table
from maassqe.kuznetsov import TraceCheckConfig, trace_check
from maassqe.qe_statistics import qe_sum, windowed_average
from maassqe.geodesic_nodal import nodal_reports, nodal_trend
from maassqe.selftest import SELFTEST_TMAX, run_checks

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_CACHE = 4

EXIT_CODES = """exit codes:
  0  success
  1  an asserted invariant failed
  2  usage or configuration error
  3  numerical failure (convergence, quadrature, refinement, regime)
  4  cache version or coverage error
"""

_NUMERICAL = (
    err.ConvergenceError,
    err.QuadratureError,
    err.RefinementRequired,
    err.RegimeError,
    err.ScaleError,
    err.InsufficientCoefficientsError,
)
_CACHE = (err.CacheVersionError, err.CoverageError)

# spectral range of the cache that selftest generates when none exists
MINI_RANGE = (3.5, 40.0)


def _mapper(config):
    return partial(parallel_map, workers=config.workers)


def _output(config, name):
    return os.path.join(config.outdir, name)


def load_cache(config):
    """
    Coefficient cache at the configured path

    Raises
    ------
    CoverageError
        no cache file exists yet
    """
    if not os.path.exists(config.cache_path):
        raise err.CoverageError(f"no coefficient cache at {config.cache_path}; run `maassqe solve` first")
    return CoefficientCache.load(config.cache_path)


def _n_coeff(config, hi):
    return max(config.N_coeff or 0, int(math.ceil(2 * hi)))


# --------------------------------------------------------------------
#             SUBCOMMANDS
# --------------------------------------------------------------------


def run_solve(config, screen=False):
    lo, hi = config.t_range
    cache = solve_spectrum(
        (lo, hi),
        config.parity,
        _n_coeff(config, hi),
        config.precision_target,
        step=config.step,
        mapper=_mapper(config),
        progress=screen,
    )
    if os.path.exists(config.cache_path):
        cache = load_cache(config).merge(cache)
    cache.save(config.cache_path)
    rows = [{"t": f.t, "parity": f.parity.value, "err": f.err, "N_coeff": f.N_coeff} for f in cache]
    write_rows(rows, _output(config, "solve"), config.output_format, generate_metadata(config))
    return EXIT_OK


def run_coeffs(config, nmax=20, screen=False):
    cache = load_cache(config)
    lo, hi = config.t_range
    rows = []
    for form in cache.forms(lo, hi):
        lam = lambda_table(form, min(nmax, form.N_coeff))
        for n, value in enumerate(lam, start=1):
            rows.append({"t": form.t, "parity": form.parity.value, "n": n, "lambda": float(value)})
    write_rows(rows, _output(config, "coeffs"), config.output_format, generate_metadata(config))
    return EXIT_OK


def run_kloosterman(config, n, m, c, screen=False):
    value = kloosterman(n, m, c)
    rows = [{"n": n, "m": m, "c": c, "value": value, "weil_ratio": weil_ratio(n, m, c)}]
    write_rows(rows, _output(config, "kloosterman"), config.output_format, generate_metadata(config))
    print(repr(value))
    return EXIT_OK


def run_transform(config, screen=False):
    w = config.window.kernel()
    rows = transform_table(w, config.transform_x, config.quadrature_tol, mapper=_mapper(config))
    write_rows(rows, _output(config, "transform"), config.output_format, generate_metadata(config))
    return EXIT_OK


def _trace_config(config, w=None):
    return TraceCheckConfig(
        w=w if w is not None else config.window.kernel(),
        n=config.n,
        m=config.m,
        t_max=config.t_max,
        c_max=config.c_max,
        tol=config.trace_tol,
        quadrature_tol=config.quadrature_tol,
    )


def _trace_row(result):
    row = {k: v for k, v in result.items() if k not in ("spectral", "geometric")}
    for side in ("spectral", "geometric"):
        for key, value in result[side].items():
            if not isinstance(value, (list, dict)):
                row[f"{side}_{key}"] = value
    return row


def run_kuznetsov_check(config, screen=False):
    cache = load_cache(config)
    result = trace_check(_trace_config(config), cache, mapper=_mapper(config), progress=screen)
    write_rows([_trace_row(result)], _output(config, "kuznetsov"), config.output_format, generate_metadata(config))
    if not result["passed"]:
        raise err.InvariantFailure(f"trace residual {result['residual']!r} above {config.trace_tol}")
    return EXIT_OK


def run_qe(config, screen=False):
    cache = load_cache(config)
    psi = config.psi.test_function()
    lo, hi = config.t_range
    rows = []
    for form in cache.forms(lo, hi):
        X = config.qe.X if config.qe.X is not None else form.t
        rows.append(qe_sum(form, config.qe.shift, X, psi, main_term=config.main_term).to_row())
    write_rows(rows, _output(config, "qe"), config.output_format, generate_metadata(config))

    w = config.window.kernel()
    X = config.qe.X if config.qe.X is not None else w.T
    summary = windowed_average(cache, w, config.qe.shift, X, psi, config.qe.eps, config.qe.A, config.main_term)
    summary.pop("reports")
    write_rows([summary], _output(config, "qe_window"), config.output_format, generate_metadata(config))
    return EXIT_OK


def run_nodal(config, screen=False):
    cache = load_cache(config)
    reports = nodal_reports(
        cache, config.segment, config.density, tuple(config.t_range), mapper=_mapper(config), progress=screen
    )
    write_rows([r.to_row() for r in reports], _output(config, "nodal"), config.output_format, generate_metadata(config))
    write_rows([nodal_trend(reports)], _output(config, "nodal_trend"), config.output_format, generate_metadata(config))
    failed = [r.t for r in reports if not r.chain_holds]
    if failed:
        raise err.InvariantFailure(f"chain inequality fails for t in {failed}")
    return EXIT_OK


def run_selftest(config, screen=False):
    """
    Invariant suite on the mini-cache, generated on first use
    """
    if not os.path.exists(config.cache_path):
        logger.info(f"no cache at {config.cache_path}, solving the mini-cache over {MINI_RANGE}")
        mini = config.model_copy(update={"t_range": list(MINI_RANGE), "parity": "both"})
        run_solve(mini, screen=screen)
    cache = load_cache(config)
    cache.require(SPECTRAL_FLOOR, SELFTEST_TMAX)
    rows = run_checks(config, cache, mapper=_mapper(config), progress=screen)
    write_rows(rows, _output(config, "selftest"), config.output_format, generate_metadata(config))
    failed = [r["check"] for r in rows if not r["passed"]]
    if failed:
        raise err.InvariantFailure(f"selftest failures: {failed}")
    return EXIT_OK


# --------------------------------------------------------------------
#             ARGUMENT PARSING
# --------------------------------------------------------------------


def _parser():
    common = ap.ArgumentParser(add_help=False)
    common.add_argument("-i", "--input", type=str, help="name of the input file")
    common.add_argument("--cache", type=str, help="coefficient cache path")
    common.add_argument("--outdir", type=str, help="output directory")
    common.add_argument("--format", type=str, choices=["csv", "json"], help="output format")
    common.add_argument("--workers", type=int, help="number of worker processes")
    common.add_argument("--screen", action="store_true", default=False, help="log to screen and show progress")
    common.add_argument("--t-range", type=float, nargs=2, help="spectral interval lo hi")

    arg = ap.ArgumentParser(
        prog="maassqe",
        description="numerical experiments with Maass-Hecke cusp forms",
        epilog=EXIT_CODES,
        formatter_class=ap.RawDescriptionHelpFormatter,
    )
    arg.add_argument("-v", "--version", action="store_true", help="print the version")
    sub = arg.add_subparsers(dest="command")

    p = sub.add_parser("solve", parents=[common], help="build or extend the coefficient cache")
    p.add_argument("--parity", type=str, choices=["even", "odd", "both"])
    p.add_argument("--n-coeff", type=int, help="number of stored Hecke eigenvalues")
    p.add_argument("--precision", type=float, help="certified precision target")

    p = sub.add_parser("coeffs", parents=[common], help="query Hecke eigenvalues")
    p.add_argument("--nmax", type=int, default=20, help="largest index")

    p = sub.add_parser("kloosterman", parents=[common], help="Kloosterman sum S(n, m, c)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--c", type=int, required=True)

    window = ap.ArgumentParser(add_help=False)
    window.add_argument("--T", type=float, help="window center")
    window.add_argument("--G", type=float, help="window width")
    window.add_argument("--theta", type=float, help="window exponent, G = T^theta")

    p = sub.add_parser("transform", parents=[common, window], help="Bessel transform g on a grid of x")
    p.add_argument("--x", type=float, nargs="+", help="transform arguments")

    p = sub.add_parser("kuznetsov-check", parents=[common, window], help="trace formula residual")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--t-max", type=float, help="largest cached spectral parameter")
    p.add_argument("--c-max", type=int, help="largest modulus")
    p.add_argument("--tol", type=float, help="residual tolerance")

    p = sub.add_parser("qe", parents=[common, window], help="shifted coefficient sums")
    p.add_argument("--X", type=float, help="length parameter, default t")
    p.add_argument("--shift", type=int, help="shift m")

    p = sub.add_parser("nodal", parents=[common], help="sign changes on the imaginary axis")
    p.add_argument("--y-min", type=float)
    p.add_argument("--y-max", type=float)
    p.add_argument("--density", type=int, help="points per oscillation")

    sub.add_parser("selftest", parents=[common], help="invariant suite on the mini-cache")
    return arg


_FLAGS = {
    "cache": "cache",
    "outdir": "outdir",
    "format": "output_format",
    "workers": "workers",
    "t_range": "t_range",
    "parity": "parity",
    "n_coeff": "N_coeff",
    "precision": "precision_target",
    "T": "window.T",
    "G": "window.G",
    "theta": "window.theta",
    "x": "transform_x",
    "n": "n",
    "m": "m",
    "t_max": "t_max",
    "c_max": "c_max",
    "tol": "trace_tol",
    "X": "qe.X",
    "shift": "qe.shift",
    "y_min": "segment.y_min",
    "y_max": "segment.y_max",
    "density": "density",
}


def build_config(args):
    """
    RunConfig from defaults, the input file and the flags, in increasing
    precedence
    """
    config = read_inputfile(args["input"]) if args.get("input") else RunConfig()
    overrides = {_FLAGS[k]: v for k, v in args.items() if k in _FLAGS}
    if args.get("command") != "kloosterman":
        config = apply_overrides(config, overrides)
    else:
        config = apply_overrides(config, {k: overrides[k] for k in ("cache", "outdir", "output_format")})
    if args.get("G") is not None and args.get("theta") is None and config.window.theta is not None:
        config = config.model_copy(update={"window": Window(T=config.window.T, G=args["G"])})
    return config


def run(command, config, args):
    screen = bool(args.get("screen"))
    os.makedirs(config.outdir, exist_ok=True)
    prepare_log(os.path.join(config.outdir, "maassqe.log"), screen=screen)
    logger.info(f"maassqe {version}: {command}")
    if command == "solve":
        return run_solve(config, screen)
    if command == "coeffs":
        return run_coeffs(config, args.get("nmax", 20), screen)
    if command == "kloosterman":
        return run_kloosterman(config, args["n"], args["m"], args["c"], screen)
    if command == "transform":
        return run_transform(config, screen)
    if command == "kuznetsov-check":
        return run_kuznetsov_check(config, screen)
    if command == "qe":
        return run_qe(config, screen)
    if command == "nodal":
        return run_nodal(config, screen)
    if command == "selftest":
        return run_selftest(config, screen)
    raise ValueError(f"unknown command {command}")


def main(argv=None):
    """
    Main method to parse arguments and run a subcommand

    Parameters
    ----------
    argv : list of str, optional
        arguments, default sys.argv

    Returns
    -------
    int
        exit code
    """
    arg = _parser()
    args = vars(arg.parse_args(argv))
    if args["version"]:
        print(version)
        return EXIT_OK
    if not args["command"]:
        arg.print_help()
        return EXIT_USAGE

    try:
        config = build_config(args)
    except (ValidationError, ValueError, FileNotFoundError) as e:
        logger.error(str(e))
        print(f"configuration error: {e}")
        return EXIT_USAGE

    try:
        return run(args["command"], config, args)
    except err.InvariantFailure as e:
        logger.error(str(e))
        print(f"invariant failure: {e}")
        return EXIT_INVARIANT
    except (err.DomainError, ValidationError) as e:
        logger.error(str(e))
        print(f"usage error: {e}")
        return EXIT_USAGE
    except _NUMERICAL as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"numerical failure: {type(e).__name__}: {e}")
        return EXIT_NUMERICAL
    except _CACHE as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"cache error: {e}")
        return EXIT_CACHE
