# mypy: disallow-untyped-defs
"""
Direct integration of the master equation

    d rho/dt = -i (H_eff rho - rho H_eff^dagger) + sum_m J_m rho J_m^dagger
               - k_ST (P_S rho P_T + P_T rho P_S)

where the last term is only present for models assembled with the direct S/T-dephasing form.
The reaction terms live in ``H_eff``, so ``Tr rho`` decays as the pair reacts.

``rho`` is kept dense and every product is a sparse operator times a dense matrix; the
superoperator on the ``dim^2`` Liouville space is never formed.
"""
from typing import Callable
from typing import Optional

import attr
import logging
import numpy as np
import scipy.sparse
import time
from collections.abc import Iterable

from radical_jumps.foundation.checks import ShouldCheckDense
from radical_jumps.foundation.exceptions import RadicalJumpsError
from radical_jumps.model import ModelOperators
from radical_jumps.ode import IntegrateAdaptive
from radical_jumps.ode import RhsProblem
from radical_jumps.ode import Tolerances
from radical_jumps.spin import LayoutError

from ._density import DensityMatrix
from ._density import InitialDensity

log = logging.getLogger(__name__)

ME_DIMENSION_CAP = 4096
ME_TOLERANCES = Tolerances(abs_tol=1e-8, rel_tol=1e-8)

# Eigenvalues below this are reported as a positivity violation.
POSITIVITY_WARNING = -1e-6

# Number of grid points (spread evenly, last one included) where positivity is spot-checked.
POSITIVITY_SPOT_CHECKS = 8

# Dense complex matrices held at once by a 5(4) Runge-Kutta step: state, stages, error
# estimate and scratch.
_DENSE_COPIES_PER_STEP = 12


class DimensionCapError(RadicalJumpsError):
    """
    The Hilbert space is too large for direct master-equation integration.
    """

    def __init__(self, dim: int, cap: int, estimated_bytes: int) -> None:
        RadicalJumpsError.__init__(self, dim, cap, estimated_bytes)
        self.dim = dim
        self.cap = cap
        self.estimated_bytes = estimated_bytes

    def __str__(self) -> str:
        return (
            f"Hilbert space dimension {self.dim} exceeds the master-equation cap of"
            f" {self.cap}; the integration would need about"
            f" {self.estimated_bytes / 2**30:.1f} GiB of working memory."
        )


def EstimateMemoryBytes(dim: int) -> int:
    return _DENSE_COPIES_PER_STEP * 16 * dim * dim


def _Transposed(matrix: scipy.sparse.spmatrix) -> scipy.sparse.csr_matrix:
    return scipy.sparse.csr_matrix(matrix.T)


class _Liouvillian:
    """
    Precomputed sparse factors of the master-equation right-hand side.

    Right products ``rho @ B`` are evaluated as ``(B^T @ rho^T)^T``.
    """

    def __init__(self, model: ModelOperators) -> None:
        self.dim = model.dim
        self.h_eff = model.H_eff.matrix.tocsr()
        self.h_eff_adjoint_t = _Transposed(model.H_eff.matrix.conj().T)
        self.jumps = [
            (op.matrix.tocsr(), _Transposed(op.matrix.conj().T)) for op in model.J_list
        ]
        self.direct_rate = model.direct_st_dephasing
        self.p_s = model.P_S.matrix.tocsr()
        self.p_t = model.P_T.matrix.tocsr()
        self.p_s_t = _Transposed(self.p_s)
        self.p_t_t = _Transposed(self.p_t)

    def Apply(self, rho: np.ndarray) -> np.ndarray:
        result = -1j * (self.h_eff @ rho - (self.h_eff_adjoint_t @ rho.T).T)
        for jump, jump_adjoint_t in self.jumps:
            result += (jump_adjoint_t @ (jump @ rho).T).T
        if self.direct_rate > 0:
            s_rho_t = (self.p_t_t @ (self.p_s @ rho).T).T
            t_rho_s = (self.p_s_t @ (self.p_t @ rho).T).T
            result -= self.direct_rate * (s_rho_t + t_rho_s)
        return result

    def Flat(self) -> Callable[[float, np.ndarray], np.ndarray]:
        dim = self.dim

        def LiouvillianFlatRhs(t: float, y: np.ndarray) -> np.ndarray:
            return self.Apply(y.reshape(dim, dim)).ravel()

        return LiouvillianFlatRhs


def LiouvillianRhs(model: ModelOperators, rho: DensityMatrix) -> DensityMatrix:
    """
    Returns ``d rho/dt`` for ``model`` at ``rho``.

    :raises LayoutError: if the dimensions differ.
    """
    if rho.dim != model.dim:
        raise LayoutError(f"Dimension mismatch: model {model.dim} vs density {rho.dim}.")
    return DensityMatrix(_Liouvillian(model).Apply(rho.entries))


@attr.s(auto_attribs=True, frozen=True, eq=False)
class MESeries:
    """
    Observables of a master-equation run on ``grid``: ``p1 = Tr rho`` and
    ``pS = Tr[P_S rho]``.

    ``max_hermitian_defect`` is the largest ``|rho - rho^dagger|`` entry seen on the grid;
    ``min_eigenvalue`` the lowest eigenvalue found by the positivity spot checks (``None``
    when they were skipped).
    """

    grid: np.ndarray
    p1: np.ndarray
    pS: np.ndarray
    abs_tol: float
    rel_tol: float
    t_max: float
    n_steps: int
    max_hermitian_defect: float
    min_eigenvalue: Optional[float]
    final_density: DensityMatrix


def _SpotCheckIndices(count: int) -> set[int]:
    picks = np.linspace(0, count - 1, min(count, POSITIVITY_SPOT_CHECKS))
    return {int(round(i)) for i in picks}


def IntegrateMasterEquation(
    model: ModelOperators,
    grid: Iterable[float],
    rho0: Optional[DensityMatrix] = None,
    tolerances: Tolerances = ME_TOLERANCES,
    t_max: Optional[float] = None,
    dim_cap: int = ME_DIMENSION_CAP,
) -> MESeries:
    """
    Integrates the master equation from ``rho0`` (by default the singlet state) and samples
    it on ``grid`` through the dense output of the integrator.

    :param t_max: end of the integration; defaults to the last grid time.

    :raises DimensionCapError: if ``model.dim`` exceeds ``dim_cap``.
    :raises ValueError: if ``rho0`` is not a valid density matrix or the grid is invalid.
    :raises IntegrationError: if the integrator fails.
    """
    if model.dim > dim_cap:
        raise DimensionCapError(model.dim, dim_cap, EstimateMemoryBytes(model.dim))
    grid_array = np.asarray(grid, dtype=float)
    if t_max is None:
        t_max = float(grid_array[-1]) if grid_array.size else 0.0
    if grid_array.ndim != 1 or grid_array.size == 0:
        raise ValueError("The time grid must be a non-empty 1-d sequence.")
    if np.any(np.diff(grid_array) <= 0):
        raise ValueError("The time grid must be strictly increasing.")
    if grid_array[0] < 0 or grid_array[-1] > t_max:
        raise ValueError(
            f"The time grid [{grid_array[0]}, {grid_array[-1]}] must lie within [0, {t_max}]."
        )
    if rho0 is None:
        rho0 = InitialDensity(model.layout)
    if rho0.dim != model.dim:
        raise LayoutError(f"Dimension mismatch: model {model.dim} vs density {rho0.dim}.")
    rho0.Validate()

    dim = model.dim
    liouvillian = _Liouvillian(model)
    problem = RhsProblem.FromTolerances(dim * dim, liouvillian.Flat(), tolerances)
    p_s_rows, p_s_cols, p_s_values = model.P_S.Coordinates()
    spot_checks = _SpotCheckIndices(len(grid_array)) if ShouldCheckDense(dim) else set()

    p1 = np.zeros(len(grid_array))
    pS = np.zeros(len(grid_array))
    max_defect = 0.0
    min_eigenvalue: Optional[float] = None
    next_index = 0
    n_steps = 0
    final = rho0.entries.ravel()

    def Sample(start: int, states: np.ndarray) -> None:
        nonlocal max_defect, min_eigenvalue
        matrices = states.reshape(-1, dim, dim)
        p1[start : start + len(matrices)] = np.einsum("nii->n", matrices).real
        pS[start : start + len(matrices)] = (matrices[:, p_s_cols, p_s_rows] @ p_s_values).real
        defect = np.abs(matrices - matrices.conj().transpose(0, 2, 1)).max()
        max_defect = max(max_defect, float(defect))
        for offset, rho in enumerate(matrices):
            if start + offset in spot_checks:
                lowest = DensityMatrix(rho).MinEigenvalue()
                if min_eigenvalue is None or lowest < min_eigenvalue:
                    min_eigenvalue = lowest
                if lowest < POSITIVITY_WARNING:
                    log.warning(
                        "Density matrix at t = %g us has eigenvalue %g.",
                        grid_array[start + offset],
                        lowest,
                    )

    log.info(
        "Integrating master equation: dim=%d, t_max=%g us, %d grid points, tol=(%g, %g)",
        dim,
        t_max,
        len(grid_array),
        tolerances.abs_tol,
        tolerances.rel_tol,
    )
    started = time.perf_counter()
    if t_max == 0.0:
        Sample(0, np.array([final]))
        next_index = 1
    for segment in IntegrateAdaptive(problem, final, (0.0, t_max)):
        n_steps += 1
        stop = int(np.searchsorted(grid_array, segment.t_end, side="right"))
        if stop > next_index:
            Sample(next_index, segment.EvaluateMany(grid_array[next_index:stop]))
            next_index = stop
        final = segment.y_end
    assert next_index == len(grid_array)

    log.info(
        "Master equation done in %.3f s: %d steps, final trace %.6g",
        time.perf_counter() - started,
        n_steps,
        p1[-1],
    )
    return MESeries(
        grid=grid_array,
        p1=p1,
        pS=pS,
        abs_tol=tolerances.abs_tol,
        rel_tol=tolerances.rel_tol,
        t_max=t_max,
        n_steps=n_steps,
        max_hermitian_defect=max_defect,
        min_eigenvalue=min_eigenvalue,
        final_density=DensityMatrix(final.reshape(dim, dim)),
    )
