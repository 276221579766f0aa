from ._density import DENSITY_TOLERANCE
from ._density import DensityMatrix
from ._density import InitialDensity
from ._liouvillian import ME_DIMENSION_CAP
from ._liouvillian import ME_TOLERANCES
from ._liouvillian import DimensionCapError
from ._liouvillian import EstimateMemoryBytes
from ._liouvillian import IntegrateMasterEquation
from ._liouvillian import LiouvillianRhs
from ._liouvillian import MESeries

__all__ = [
    "DENSITY_TOLERANCE",
    "DensityMatrix",
    "DimensionCapError",
    "EstimateMemoryBytes",
    "InitialDensity",
    "IntegrateMasterEquation",
    "LiouvillianRhs",
    "ME_DIMENSION_CAP",
    "ME_TOLERANCES",
    "MESeries",
]
