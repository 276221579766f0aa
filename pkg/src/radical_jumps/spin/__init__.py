from ._algebra import ELECTRON_SITES
from ._algebra import ElectronSinglet
from ._algebra import EmbedSiteOperator
from ._algebra import EmbedSpinVector
from ._algebra import HilbertLayout
from ._algebra import InvalidPairError
from ._algebra import InvalidSpinError
from ._algebra import LayoutError
from ._algebra import SingletProjector
from ._algebra import SparseOperator
from ._algebra import SpinMatrices
from ._algebra import SpinMatricesLocal
from ._algebra import TripletProjector

__all__ = [
    "ELECTRON_SITES",
    "ElectronSinglet",
    "EmbedSiteOperator",
    "EmbedSpinVector",
    "HilbertLayout",
    "InvalidPairError",
    "InvalidSpinError",
    "LayoutError",
    "SingletProjector",
    "SparseOperator",
    "SpinMatrices",
    "SpinMatricesLocal",
    "TripletProjector",
]
