"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.
"""

class CustomError(Exception):
    """
    Base class for raising maassqe specific exceptions
    """
    pass


class DomainError(CustomError):
    pass

class ConvergenceError(CustomError):
    pass

class QuadratureError(CustomError):
    pass

class RegimeError(CustomError):
    pass

class ScaleError(CustomError):
    pass

class InsufficientCoefficientsError(CustomError):
    pass

class CoverageError(CustomError):
    pass

class CacheVersionError(CustomError):
    pass

class RefinementRequired(CustomError):
    pass

class InvariantFailure(CustomError):
    pass
