from ._builder import AssembleModel
from ._builder import BuildHamiltonian
from ._builder import BuildJumpOperators
from ._builder import BuildKineticOperators
from ._builder import MilliTeslaToAngularFrequency
from ._builder import ModelInvariantError
from ._builder import ModelOperators
from ._builder import StDephasingForm
from ._spec import DEFAULT_G_FACTOR
from ._spec import DIRECTION_NORM_TOLERANCE
from ._spec import AxialHyperfine
from ._spec import DissipationSpec
from ._spec import FieldSpec
from ._spec import IsotropicHyperfine
from ._spec import KineticsSpec
from ._spec import NucleusSpec
from ._spec import SpecError
from ._spec import SpinSystemSpec

__all__ = [
    "AssembleModel",
    "AxialHyperfine",
    "BuildHamiltonian",
    "BuildJumpOperators",
    "BuildKineticOperators",
    "DEFAULT_G_FACTOR",
    "DIRECTION_NORM_TOLERANCE",
    "DissipationSpec",
    "FieldSpec",
    "IsotropicHyperfine",
    "KineticsSpec",
    "MilliTeslaToAngularFrequency",
    "ModelInvariantError",
    "ModelOperators",
    "NucleusSpec",
    "SpecError",
    "SpinSystemSpec",
    "StDephasingForm",
]
