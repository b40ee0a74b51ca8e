from maassqe.maass_forms import MaassForm, CoefficientCache
from maassqe.spectral_transforms import WindowKernel
from maassqe.input import RunConfig

__version__ = "0.1.0"
