# mypy: disallow-untyped-defs
"""
Assembly of the operators driving both integrators: the Hamiltonian ``H``, the kinetic
operators ``K_n``, the Lindblad jump operators ``J_m`` and the effective Hamiltonian

    H_eff = H - (i/2) sum_n K_n - (i/2) sum_m J_m^dagger J_m

All operators act on the layout of :class:`SpinSystemSpec` and are in rad/us.
"""
import attr
import enum
import logging
import math
import numpy as np
import scipy.constants

from radical_jumps.foundation.checks import ShouldCheckDense
from radical_jumps.foundation.exceptions import RadicalJumpsError
from radical_jumps.spin import ELECTRON_SITES
from radical_jumps.spin import EmbedSpinVector
from radical_jumps.spin import HilbertLayout
from radical_jumps.spin import SingletProjector
from radical_jumps.spin import SparseOperator
from radical_jumps.spin import TripletProjector

from ._spec import SpinSystemSpec

log = logging.getLogger(__name__)

# mu_B / hbar in rad/us per mT.
_BOHR_ANGULAR_FREQUENCY = (
    scipy.constants.physical_constants["Bohr magneton"][0]
    / scipy.constants.hbar
    * 1e-3
    * 1e-6
)

_AXES = "xyz"

INVARIANT_TOLERANCE = 1e-10


class ModelInvariantError(RadicalJumpsError):
    """
    Assembled operators violate an invariant (e.g. the no-jump evolution would gain norm).
    """


class StDephasingForm(enum.Enum):
    """
    How S/T-dephasing enters the model.

    ``LINDBLAD``: as the jump operator ``sqrt(2 k_ST) P_S``, usable by both integrators.
    ``DIRECT``: as the superoperator ``-k_ST (P_S rho P_T + P_T rho P_S)``, master equation only.
    """

    LINDBLAD = "lindblad"
    DIRECT = "direct"


def MilliTeslaToAngularFrequency(b: float, g: float) -> float:
    """
    Converts a field (or hyperfine coupling) in mT to the angular frequency
    ``g * mu_B * b / hbar`` in rad/us, using CODATA constants.
    """
    return g * b * _BOHR_ANGULAR_FREQUENCY


def BuildHamiltonian(spec: SpinSystemSpec) -> SparseOperator:
    """
    Zeeman terms of both electrons plus ``S_k . A_ki . I_i`` for every nucleus.

    Hyperfine couplings are converted with the g-factor of the electron they couple to.
    """
    layout = spec.layout
    hamiltonian = SparseOperator.Zeros(layout.total_dim)
    electron_spins = [EmbedSpinVector(layout, site) for site in ELECTRON_SITES]

    for electron, g in enumerate(spec.g_factors):
        omega = MilliTeslaToAngularFrequency(spec.field.magnitude, g)
        for component, s in zip(spec.field.direction, electron_spins[electron]):
            if component != 0:
                hamiltonian = hamiltonian + (omega * component) * s

    for index, nucleus in enumerate(spec.nuclei):
        g = spec.g_factors[nucleus.coupled_electron]
        coupling = nucleus.tensor * MilliTeslaToAngularFrequency(1.0, g)
        s = electron_spins[nucleus.coupled_electron]
        i = EmbedSpinVector(layout, layout.NuclearSite(index))
        for alpha in range(3):
            for beta in range(3):
                if coupling[alpha, beta] != 0:
                    hamiltonian = hamiltonian + float(coupling[alpha, beta]) * (
                        s[alpha] @ i[beta]
                    )

    return SparseOperator(hamiltonian.matrix, hermitian_hint=True)


def _KineticChannels(
    spec: SpinSystemSpec, layout: HilbertLayout
) -> list[tuple[str, SparseOperator]]:
    channels = []
    if spec.kinetics.k_s > 0:
        channels.append(("singlet", spec.kinetics.k_s * SingletProjector(layout)))
    if spec.kinetics.k_t > 0:
        channels.append(("triplet", spec.kinetics.k_t * TripletProjector(layout)))
    return channels


def _JumpChannels(
    spec: SpinSystemSpec, layout: HilbertLayout, include_st_dephasing: bool = True
) -> list[tuple[str, SparseOperator]]:
    channels = []
    gamma_st = spec.dissipation.gamma_st
    if include_st_dephasing and gamma_st > 0:
        channels.append(
            ("st_dephasing", math.sqrt(2 * gamma_st) * SingletProjector(layout))
        )
    for electron, gamma in enumerate(spec.dissipation.gamma_rf):
        if gamma > 0:
            for axis, s in zip(_AXES, EmbedSpinVector(layout, electron)):
                channels.append(
                    (f"random_field_e{electron + 1}_{axis}", math.sqrt(gamma) * s)
                )
    return channels


def BuildKineticOperators(
    spec: SpinSystemSpec, layout: HilbertLayout
) -> list[SparseOperator]:
    """
    ``[k_S P_S, k_T P_T]``, omitting zero-rate channels.
    """
    return [op for _, op in _KineticChannels(spec, layout)]


def BuildJumpOperators(
    spec: SpinSystemSpec, layout: HilbertLayout
) -> list[SparseOperator]:
    """
    ``sqrt(2 k_ST) P_S`` for S/T-dephasing, then ``sqrt(gamma_RF,k) S_k,alpha`` per radical and
    axis, omitting zero-rate channels.
    """
    return [op for _, op in _JumpChannels(spec, layout)]


@attr.s(auto_attribs=True, frozen=True, eq=False)
class ModelOperators:
    """
    Operators shared read-only by both integrators and by every trajectory worker.

    ``jump_products`` holds ``J_m^dagger J_m`` in the order of ``J_list``.
    ``direct_st_dephasing`` is the rate of an S/T-dephasing term kept out of ``J_list``
    (only with :attr:`StDephasingForm.DIRECT`).
    """

    layout: HilbertLayout
    H: SparseOperator
    K_list: tuple[SparseOperator, ...]
    J_list: tuple[SparseOperator, ...]
    H_eff: SparseOperator
    P_S: SparseOperator
    P_T: SparseOperator
    kinetic_labels: tuple[str, ...]
    jump_labels: tuple[str, ...]
    jump_products: tuple[SparseOperator, ...]
    direct_st_dephasing: float = 0.0

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def DissipativePart(self) -> SparseOperator:
        """
        ``sum_n K_n + sum_m J_m^dagger J_m``, which equals ``i (H_eff - H_eff^dagger)``.
        """
        total = SparseOperator.Zeros(self.dim)
        for op in (*self.K_list, *self.jump_products):
            total = total + op
        return SparseOperator(total.matrix, hermitian_hint=True)

    def CheckInvariants(self) -> None:
        """
        Verifies the construction identity of ``H_eff``; when dense checks are enabled for this
        dimension, also verifies that ``i (H_eff - H_eff^dagger)`` is positive semidefinite.

        :raises ModelInvariantError:
        """
        anti_hermitian = 1j * (self.H_eff.matrix - self.H_eff.matrix.conj().T)
        difference = anti_hermitian - self.DissipativePart().matrix
        defect = float(np.abs(difference.data).max()) if difference.nnz else 0.0
        if defect > 1e-12 * max(1.0, self.DissipativePart().MaxAbs()):
            raise ModelInvariantError(
                f"H_eff does not match its parts, deviation {defect:g}."
            )
        if ShouldCheckDense(self.dim):
            dense = anti_hermitian.toarray()
            lowest = float(np.linalg.eigvalsh((dense + dense.conj().T) / 2).min())
            if lowest < -INVARIANT_TOLERANCE:
                raise ModelInvariantError(
                    f"Dissipative part of H_eff has negative eigenvalue {lowest:g}."
                )


def AssembleModel(
    spec: SpinSystemSpec,
    st_dephasing_form: StDephasingForm = StDephasingForm.LINDBLAD,
) -> ModelOperators:
    """
    Builds every operator for ``spec`` and checks the result.
    """
    layout = spec.layout
    hamiltonian = BuildHamiltonian(spec)
    kinetic = _KineticChannels(spec, layout)
    is_direct = st_dephasing_form is StDephasingForm.DIRECT
    jumps = _JumpChannels(spec, layout, include_st_dephasing=not is_direct)
    jump_products = tuple(
        SparseOperator((op.Adjoint() @ op).matrix, hermitian_hint=True)
        for _, op in jumps
    )

    h_eff = hamiltonian
    for _, op in kinetic:
        h_eff = h_eff - 0.5j * op
    for product in jump_products:
        h_eff = h_eff - 0.5j * product

    model = ModelOperators(
        layout=layout,
        H=hamiltonian,
        K_list=tuple(op for _, op in kinetic),
        J_list=tuple(op for _, op in jumps),
        H_eff=h_eff,
        P_S=SingletProjector(layout),
        P_T=TripletProjector(layout),
        kinetic_labels=tuple(label for label, _ in kinetic),
        jump_labels=tuple(label for label, _ in jumps),
        jump_products=jump_products,
        direct_st_dephasing=spec.dissipation.gamma_st if is_direct else 0.0,
    )
    model.CheckInvariants()
    log.info(
        "Assembled model: dim=%d, nuclei=%d, kinetic channels=%s, jump channels=%s",
        model.dim,
        spec.nucleus_count,
        list(model.kinetic_labels),
        list(model.jump_labels),
    )
    return model
