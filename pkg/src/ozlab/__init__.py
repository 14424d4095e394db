"""Random-cluster model laboratory: exact measures, sampling, cluster
geometry, polymer expansion and transfer-operator checks of
Ornstein-Zernike decay."""
from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
