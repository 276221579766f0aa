from ._metrics import ConvergenceReport
from ._metrics import ConvergenceStudies
from ._metrics import ConvergenceStudy
from ._metrics import GrowthFactor
from ._metrics import GrowthFit
from ._metrics import RepeatSeed
from ._metrics import RmsError
from ._series import ClipToRange
from ._series import FTransform
from ._series import GridMismatchError
from ._series import ObservableKind
from ._series import ObservableSeries
from ._series import RestoreForwardDecay
from ._series import SeriesFromEnsemble
from ._series import SeriesFromMasterEquation
from ._series import SeriesRangeError
from ._yields import AnisotropyDelta
from ._yields import AnisotropyMismatchError
from ._yields import AnisotropyReport
from ._yields import AnisotropyRun
from ._yields import EnsembleYields
from ._yields import YieldReport
from ._yields import Yields

__all__ = [
    "AnisotropyDelta",
    "AnisotropyMismatchError",
    "AnisotropyReport",
    "AnisotropyRun",
    "ClipToRange",
    "ConvergenceReport",
    "ConvergenceStudies",
    "ConvergenceStudy",
    "EnsembleYields",
    "FTransform",
    "GridMismatchError",
    "GrowthFactor",
    "GrowthFit",
    "ObservableKind",
    "ObservableSeries",
    "RepeatSeed",
    "RestoreForwardDecay",
    "RmsError",
    "SeriesFromEnsemble",
    "SeriesFromMasterEquation",
    "SeriesRangeError",
    "YieldReport",
    "Yields",
]
