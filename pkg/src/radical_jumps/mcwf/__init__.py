from ._ensemble import CHUNK_SIZE
from ._ensemble import NO_REACTION
from ._ensemble import EnsembleResult
from ._ensemble import RunEnsemble
from ._ensemble import TrajectoryFailedError
from ._initial_states import CreateSampler
from ._initial_states import EnumerationExhaustedError
from ._initial_states import ExhaustiveSampler
from ._initial_states import IInitialStateSampler
from ._initial_states import InitialStateStrategy
from ._initial_states import RandomStream
from ._initial_states import SampleInitialState
from ._initial_states import SpinCoherentSampler
from ._initial_states import SpinCoherentState
from ._initial_states import ZeemanRandomSampler
from ._trajectory import DegenerateJumpError
from ._trajectory import JumpEvent
from ._trajectory import JumpKind
from ._trajectory import JumpOutcome
from ._trajectory import JumpRateReport
from ._trajectory import JumpRates
from ._trajectory import PropagateTrajectory
from ._trajectory import SelectAndApplyJump
from ._trajectory import TrajectoryOutcome
from ._trajectory import TrajectoryRecord
from ._trajectory import UnravelingError

__all__ = [
    "CHUNK_SIZE",
    "CreateSampler",
    "DegenerateJumpError",
    "EnsembleResult",
    "EnumerationExhaustedError",
    "ExhaustiveSampler",
    "IInitialStateSampler",
    "InitialStateStrategy",
    "JumpEvent",
    "JumpKind",
    "JumpOutcome",
    "JumpRateReport",
    "JumpRates",
    "NO_REACTION",
    "PropagateTrajectory",
    "RandomStream",
    "RunEnsemble",
    "SampleInitialState",
    "SelectAndApplyJump",
    "SpinCoherentSampler",
    "SpinCoherentState",
    "TrajectoryFailedError",
    "TrajectoryOutcome",
    "TrajectoryRecord",
    "UnravelingError",
    "ZeemanRandomSampler",
]
