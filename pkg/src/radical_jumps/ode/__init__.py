from ._integrator import EVENT_TOLERANCE
from ._integrator import MIN_STEP_SIZE
from ._integrator import DenseSegment
from ._integrator import EventLocation
from ._integrator import IntegrateAdaptive
from ._integrator import IntegrationError
from ._integrator import LocateNormCrossing
from ._integrator import RhsProblem
from ._integrator import SquaredNorm
from ._integrator import StepSizeUnderflowError
from ._integrator import Tolerances

__all__ = [
    "DenseSegment",
    "EVENT_TOLERANCE",
    "EventLocation",
    "IntegrateAdaptive",
    "IntegrationError",
    "LocateNormCrossing",
    "MIN_STEP_SIZE",
    "RhsProblem",
    "SquaredNorm",
    "StepSizeUnderflowError",
    "Tolerances",
]
