# mypy: disallow-untyped-defs
import attr
import numpy as np

from radical_jumps.foundation.checks import ShouldCheckDense
from radical_jumps.spin import HilbertLayout
from radical_jumps.spin import SingletProjector
from radical_jumps.spin import SparseOperator

DENSITY_TOLERANCE = 1e-10


def _ToSquareComplex(value: object) -> np.ndarray:
    array = np.array(value, dtype=complex)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise ValueError(f"A density matrix must be square, got shape {array.shape}.")
    return array


@attr.s(auto_attribs=True, frozen=True, eq=False)
class DensityMatrix:
    """
    Dense ``dim x dim`` density matrix. The trace is the survival probability, so it may be
    below 1.
    """

    entries: np.ndarray = attr.ib(converter=_ToSquareComplex)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def Trace(self) -> float:
        return float(np.trace(self.entries).real)

    def Expectation(self, op: SparseOperator) -> float:
        """
        ``Tr[A rho]`` for a Hermitian ``A``.
        """
        rows, cols, values = op.Coordinates()
        return float(np.sum(values * self.entries[cols, rows]).real)

    def HermitianDefect(self) -> float:
        return float(np.abs(self.entries - self.entries.conj().T).max())

    def MinEigenvalue(self) -> float:
        hermitian = (self.entries + self.entries.conj().T) / 2
        return float(np.linalg.eigvalsh(hermitian).min())

    def Validate(self, tolerance: float = DENSITY_TOLERANCE) -> None:
        """
        Checks that this is a valid initial state: Hermitian, unit trace and (when dense checks
        are enabled for this dimension) positive semidefinite.

        :raises ValueError:
        """
        defect = self.HermitianDefect()
        if defect > tolerance:
            raise ValueError(f"Density matrix is not Hermitian, deviation {defect:g}.")
        trace = self.Trace()
        if abs(trace - 1) > tolerance:
            raise ValueError(f"Density matrix must have unit trace, got {trace!r}.")
        if not ShouldCheckDense(self.dim):
            return
        lowest = self.MinEigenvalue()
        if lowest < -tolerance:
            raise ValueError(f"Density matrix has negative eigenvalue {lowest:g}.")


def InitialDensity(layout: HilbertLayout) -> DensityMatrix:
    """
    ``P_S / Tr P_S``: the pair born in the singlet with unpolarized nuclei.
    """
    projector = SingletProjector(layout)
    return DensityMatrix(projector.ToDense() / projector.Trace().real)
