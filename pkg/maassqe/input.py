"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.
"""

import os
import copy
import logging
from typing import List, Literal, Optional

import yaml
from typing_extensions import Annotated
from pydantic import BaseModel, Field, ConfigDict, field_validator, model_validator
from pydantic.functional_validators import BeforeValidator

from maassqe.bumps import TestFunction
from maassqe.geodesic_nodal import GeodesicSegment
from maassqe.spectral_transforms import WindowKernel

__version__ = "0.1.0"

SCHEMA_VERSION = 1
CACHE_ENV = "MAASSQE_CACHE"

logger = logging.getLogger(__name__)


def _to_pair(val):
    if isinstance(val, str):
        val = val.split()
    return [float(x) for x in val]


class Window(BaseModel, title="Spectral window input options"):
    model_config = ConfigDict(frozen=True)

    T: Annotated[float, Field(default=12.0, gt=0)]
    G: Annotated[Optional[float], Field(default=3.0)]
    theta: Annotated[Optional[float], Field(default=None)]

    @model_validator(mode="after")
    def _validate_all(self) -> "Window":
        if self.theta is not None and not (1.0 / 3.0 < self.theta < 1.0):
            raise ValueError(f"theta must lie in (1/3, 1), got {self.theta}")
        if self.G is None and self.theta is None:
            raise ValueError("window needs G or theta")
        if self.G is not None and self.G <= 0:
            raise ValueError(f"window width must be positive, got {self.G}")
        return self

    def kernel(self):
        if self.theta is not None:
            return WindowKernel.from_theta(self.T, self.theta)
        return WindowKernel(T=self.T, G=self.G)


class Psi(BaseModel, title="Test function input options"):
    model_config = ConfigDict(frozen=True)

    a: Annotated[float, Field(default=1.0, ge=0)]
    b: Annotated[float, Field(default=2.0, gt=0)]
    kappa: Annotated[float, Field(default=1.0, gt=0)]

    @model_validator(mode="after")
    def _validate_all(self) -> "Psi":
        if self.a >= self.b:
            raise ValueError(f"test function support needs a < b, got ({self.a}, {self.b})")
        return self

    def test_function(self):
        return TestFunction(self.a, self.b, self.kappa)


class QE(BaseModel, title="Shifted sum input options"):
    model_config = ConfigDict(frozen=True)

    X: Annotated[Optional[float], Field(default=None)]
    shift: Annotated[int, Field(default=0, ge=0)]
    eps: Annotated[float, Field(default=0.1, gt=0)]
    A: Annotated[int, Field(default=8, ge=0)]


class RunConfig(BaseModel, title="Main input class"):
    window: Optional[Window] = Window()
    psi: Optional[Psi] = Psi()
    qe: Optional[QE] = QE()
    segment: Optional[GeodesicSegment] = GeodesicSegment()

    precision_target: Annotated[float, Field(default=1e-8, gt=0)]
    t_range: Annotated[List[float], BeforeValidator(_to_pair), Field(default=[9.0, 15.0])]
    parity: Annotated[Literal["even", "odd", "both"], Field(default="both")]
    N_coeff: Annotated[Optional[int], Field(default=None)]
    step: Annotated[float, Field(default=0.05, gt=0)]

    quadrature_tol: Annotated[float, Field(default=1e-10, gt=0)]
    t_max: Annotated[float, Field(default=40.0, gt=0)]
    c_max: Annotated[int, Field(default=10000, ge=1)]
    trace_tol: Annotated[float, Field(default=1e-3, gt=0)]
    n: Annotated[int, Field(default=1, ge=1)]
    m: Annotated[int, Field(default=1, ge=1)]
    expansion_order: Annotated[int, Field(default=3, ge=0, le=4)]
    transform_x: Annotated[List[float], Field(default=[0.01, 0.1, 1.0, 10.0])]

    density: Annotated[int, Field(default=20, ge=10)]
    main_term: Annotated[Literal["residue", "unreduced"], Field(default="residue")]

    cache: Annotated[str, Field(default="maassqe_cache.jsonl", validate_default=True)]
    output_format: Annotated[Literal["csv", "json"], Field(default="csv")]
    outdir: Annotated[str, Field(default="maassqe_output")]
    workers: Annotated[int, Field(default=1, ge=1)]

    @field_validator("cache", mode="after")
    def resolve_cache(cls, v: str) -> str:
        value = os.getenv(CACHE_ENV)
        if value:
            logger.info(f"cache path {value} taken from {CACHE_ENV}")
            return value
        return v

    @model_validator(mode="after")
    def _validate_all(self) -> "RunConfig":
        if len(self.t_range) != 2 or not (0 < self.t_range[0] < self.t_range[1]):
            raise ValueError(f"t_range must be two increasing positive values, got {self.t_range}")
        if self.N_coeff is not None and self.N_coeff < 1:
            raise ValueError("N_coeff must be positive")
        if any(x <= 0 for x in self.transform_x):
            raise ValueError("transform points must be positive")
        return self

    @property
    def parities(self):
        return ["even", "odd"] if self.parity == "both" else [self.parity]

    @property
    def cache_path(self):
        return os.path.abspath(self.cache)


def read_inputfile(file):
    """
    Read a YAML input file into a validated RunConfig

    Parameters
    ----------
    file : str
        path to the input file

    Returns
    -------
    RunConfig
    """
    if not os.path.exists(file):
        raise FileNotFoundError(f"Input file {file} not found.")
    with open(file, "r") as fin:
        data = yaml.safe_load(fin)
    return RunConfig(**(data or {}))


def apply_overrides(config, overrides):
    """
    Overlay command line values on a config; dotted keys address the
    nested groups and None values are skipped. The cache flag wins over
    the environment variable.
    """
    data = copy.deepcopy(config.model_dump())
    cache = overrides.get("cache")
    for key, value in overrides.items():
        if value is None or key == "cache":
            continue
        target = data
        parts = key.split(".")
        for part in parts[:-1]:
            target = target.setdefault(part, {})
        target[parts[-1]] = value
    updated = RunConfig(**data)
    if cache is not None:
        updated = updated.model_copy(update={"cache": cache})
    return updated


def generate_metadata(config=None):
    metadata = {}
    metadata["software"] = {}
    metadata["software"]["name"] = "maassqe"
    metadata["software"]["version"] = __version__
    metadata["schema_version"] = SCHEMA_VERSION

    if config is not None:
        metadata["parameters"] = {}
        metadata["parameters"]["eps"] = config.qe.eps
        metadata["parameters"]["A"] = config.qe.A
        theta = config.window.theta
        if theta is not None:
            metadata["parameters"]["theta"] = theta
            metadata["parameters"]["A_recorded"] = 100.0 / min(3 * theta - 1, config.qe.eps)
    return metadata
