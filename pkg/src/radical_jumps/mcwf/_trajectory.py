# mypy: disallow-untyped-defs
"""
Propagation of single Monte-Carlo wavefunction trajectories.

Between jumps the state follows ``d phi/dt = -i H_eff phi``. Its squared norm decays and gives
the probability of no jump so far, so the next jump time is found by drawing ``u`` uniformly in
``[0, 1)`` and integrating until ``|phi|^2 = u``. At that instant one channel is picked with
probability proportional to its rate:

* a Lindblad channel ``J_m`` replaces the state by ``J_m phi / |J_m phi|`` and the trajectory
  continues with a fresh ``u``;
* a reaction channel ``K_n`` ends the trajectory: the pair has reacted.

Observables are recorded on a fixed time grid from the state normalized to unit norm.
"""
from typing import Optional

import attr
import enum
import logging
import numpy as np
from collections.abc import Iterable
from collections.abc import Iterator

from radical_jumps.foundation.exceptions import RadicalJumpsError
from radical_jumps.model import ModelOperators
from radical_jumps.ode import DenseSegment
from radical_jumps.ode import IntegrateAdaptive
from radical_jumps.ode import LocateNormCrossing
from radical_jumps.ode import RhsProblem
from radical_jumps.ode import SquaredNorm
from radical_jumps.ode import Tolerances
from radical_jumps.spin import SparseOperator

log = logging.getLogger(__name__)

DEGENERATE_WEIGHT = 1e-14
INITIAL_NORM_TOLERANCE = 1e-12


class DegenerateJumpError(RadicalJumpsError):
    """
    A jump was due but no channel has a meaningful rate. ``weights`` holds the channel rates,
    Lindblad channels first.
    """

    def __init__(self, message: str, weights: tuple[float, ...]) -> None:
        RadicalJumpsError.__init__(self, message, weights)
        self.message = message
        self.weights = weights

    def __str__(self) -> str:
        return f"{self.message} Channel rates: {list(self.weights)}"


class UnravelingError(RadicalJumpsError):
    """
    The model contains terms that cannot be unraveled into quantum jumps.
    """


class JumpKind(enum.Enum):
    LINDBLAD = "lindblad"
    REACTION = "reaction"


class TrajectoryOutcome(enum.Enum):
    REACTED = "reacted"
    CENSORED = "censored"


@attr.s(auto_attribs=True, frozen=True)
class JumpEvent:
    """
    ``channel`` indexes ``J_list`` for Lindblad jumps and ``K_list`` for reactions.
    """

    t: float
    channel: int
    kind: JumpKind


@attr.s(auto_attribs=True, frozen=True, eq=False)
class JumpOutcome:
    kind: JumpKind
    channel: int
    new_state: Optional[np.ndarray]

    @property
    def terminated(self) -> bool:
        return self.kind is JumpKind.REACTION


@attr.s(auto_attribs=True, frozen=True)
class JumpRateReport:
    """
    Rates (1/us) at which the current state leaves the no-jump evolution.

    ``total_rate`` is ``(i / |phi|^2) <phi| H_eff - H_eff^dagger |phi>``; it equals the sum of the
    per-channel rates.
    """

    total_rate: float
    lindblad_rates: tuple[float, ...]
    reaction_rates: tuple[float, ...]

    @property
    def channel_rate_sum(self) -> float:
        return float(sum(self.lindblad_rates) + sum(self.reaction_rates))


def JumpRates(model: ModelOperators, phi: np.ndarray) -> JumpRateReport:
    norm2 = SquaredNorm(phi)
    h_eff_phi = model.H_eff.Apply(phi)
    total = (1j * (np.vdot(phi, h_eff_phi) - np.vdot(h_eff_phi, phi))).real / norm2
    return JumpRateReport(
        total_rate=float(total),
        lindblad_rates=tuple(
            p.Expectation(phi).real / norm2 for p in model.jump_products
        ),
        reaction_rates=tuple(k.Expectation(phi).real / norm2 for k in model.K_list),
    )


def SelectAndApplyJump(
    phi: np.ndarray, model: ModelOperators, rng: np.random.Generator
) -> JumpOutcome:
    """
    Picks a channel with probability proportional to its rate at ``phi`` and applies it.

    :raises DegenerateJumpError: if no channel has a rate above ``1e-14``.
    """
    report = JumpRates(model, phi)
    weights = np.array(report.lindblad_rates + report.reaction_rates, dtype=float)
    if weights.size == 0 or weights.max() <= DEGENERATE_WEIGHT:
        raise DegenerateJumpError(
            "No jump channel is open for the current state.", tuple(weights.tolist())
        )
    weights = np.clip(weights, 0.0, None)
    choice = int(rng.choice(weights.size, p=weights / weights.sum()))

    lindblad_count = len(report.lindblad_rates)
    if choice >= lindblad_count:
        return JumpOutcome(JumpKind.REACTION, choice - lindblad_count, None)
    jumped = model.J_list[choice].Apply(phi)
    return JumpOutcome(JumpKind.LINDBLAD, choice, jumped / np.sqrt(SquaredNorm(jumped)))


@attr.s(auto_attribs=True, frozen=True, eq=False)
class TrajectoryRecord:
    """
    One realization.

    ``grid_alive[i]`` tells whether the pair was unreacted at ``grid[i]``; ``grid_singlet[i]`` is
    ``<P_S>`` of the normalized state there, or 0 once reacted. For censored trajectories
    ``final_state`` is the normalized state at ``t_max`` and ``final_norm2`` the squared norm it
    had before normalization (the no-jump probability since the last jump).
    """

    outcome: TrajectoryOutcome
    t_max: float
    reaction_time: Optional[float]
    reaction_channel: Optional[int]
    jump_events: tuple[JumpEvent, ...]
    grid_alive: np.ndarray
    grid_singlet: np.ndarray
    n_steps: int
    final_state: Optional[np.ndarray]
    final_norm2: Optional[float] = None

    @property
    def reacted(self) -> bool:
        return self.outcome is TrajectoryOutcome.REACTED

    @property
    def survival_time(self) -> float:
        """
        Time spent unreacted within ``[0, t_max]``.
        """
        return self.reaction_time if self.reaction_time is not None else self.t_max

    @property
    def lindblad_jump_count(self) -> int:
        return sum(1 for e in self.jump_events if e.kind is JumpKind.LINDBLAD)


class _GridRecorder:
    """
    Fills the per-grid-point observables from the segments the integrator produces.

    A segment is recorded once the next one is requested, so the segment where a jump happens
    is left to the caller, who knows the jump time.
    """

    def __init__(self, grid: np.ndarray, singlet_projector: SparseOperator) -> None:
        self.grid = grid
        self.singlet_projector = singlet_projector
        self.alive = np.zeros(len(grid), dtype=bool)
        self.singlet = np.zeros(len(grid), dtype=float)
        self.next_index = 0
        self.n_steps = 0

    def Follow(self, segments: Iterable[DenseSegment]) -> Iterator[DenseSegment]:
        for segment in segments:
            self.n_steps += 1
            yield segment
            self.RecordSegment(segment, segment.t_end, inclusive=True)

    def _Stop(self, upto: float, inclusive: bool) -> int:
        side = "right" if inclusive else "left"
        return int(np.searchsorted(self.grid, upto, side=side))

    def _Store(self, start: int, stop: int, states: np.ndarray) -> None:
        norms = np.einsum("ij,ij->i", states.conj(), states).real
        projected = (self.singlet_projector.matrix @ states.T).T
        singlet = np.einsum("ij,ij->i", states.conj(), projected).real / norms
        self.alive[start:stop] = True
        self.singlet[start:stop] = singlet
        self.next_index = stop

    def RecordSegment(self, segment: DenseSegment, upto: float, inclusive: bool) -> None:
        stop = self._Stop(upto, inclusive)
        if stop > self.next_index:
            start = self.next_index
            self._Store(start, stop, segment.EvaluateMany(self.grid[start:stop]))

    def RecordState(self, phi: np.ndarray, upto: float) -> None:
        stop = self._Stop(upto, inclusive=True)
        if stop > self.next_index:
            start = self.next_index
            self._Store(start, stop, np.tile(phi, (stop - start, 1)))


def ValidateGrid(grid: Iterable[float], t_max: float) -> np.ndarray:
    array = np.asarray(grid, dtype=float)
    if array.ndim != 1 or array.size == 0:
        raise ValueError("The time grid must be a non-empty 1-d sequence.")
    if np.any(np.diff(array) <= 0):
        raise ValueError("The time grid must be strictly increasing.")
    if array[0] < 0 or array[-1] > t_max:
        raise ValueError(
            f"The time grid [{array[0]}, {array[-1]}] must lie within [0, {t_max}]."
        )
    return array


def CheckUnravelable(model: ModelOperators) -> None:
    if model.direct_st_dephasing > 0:
        raise UnravelingError(
            "S/T-dephasing given in direct superoperator form has no jump operator;"
            " assemble the model with the Lindblad form for Monte-Carlo runs."
        )


def NoJumpProblem(model: ModelOperators, tolerances: Tolerances) -> RhsProblem:
    generator = (-1j * model.H_eff.matrix).tocsr()

    def NoJumpRhs(t: float, phi: np.ndarray) -> np.ndarray:
        return generator @ phi

    return RhsProblem.FromTolerances(model.dim, NoJumpRhs, tolerances)


def PropagateTrajectory(
    model: ModelOperators,
    phi0: np.ndarray,
    t_max: float,
    grid: Iterable[float],
    rng: np.random.Generator,
    tolerances: Tolerances = Tolerances(),
) -> TrajectoryRecord:
    """
    Runs one trajectory from ``phi0`` until it reacts or reaches ``t_max``.

    :raises ValueError: if ``phi0`` is not normalized or the grid is invalid.
    :raises UnravelingError: for models with direct-form S/T-dephasing.
    :raises IntegrationError: if the integrator fails.
    """
    CheckUnravelable(model)
    grid_array = ValidateGrid(grid, t_max)
    phi = np.asarray(phi0, dtype=complex)
    if abs(SquaredNorm(phi) - 1) > INITIAL_NORM_TOLERANCE:
        raise ValueError(
            f"Initial state must be normalized, |phi0|^2 = {SquaredNorm(phi)!r}."
        )

    problem = NoJumpProblem(model, tolerances)
    recorder = _GridRecorder(grid_array, model.P_S)
    # Without channels the evolution is unitary; a zero threshold is never crossed.
    has_channels = bool(model.K_list or model.J_list)
    events: list[JumpEvent] = []
    t = 0.0
    while True:
        if t >= t_max:
            recorder.RecordState(phi, t_max)
            final_state: Optional[np.ndarray] = phi
            final_norm2: Optional[float] = SquaredNorm(phi)
            break

        u = rng.uniform() if has_channels else 0.0
        segments = recorder.Follow(IntegrateAdaptive(problem, phi, (t, t_max)))
        location = LocateNormCrossing(segments, u)
        if location.censored:
            state = location.state_at_event
            final_norm2 = SquaredNorm(state)
            final_state = state / np.sqrt(final_norm2)
            break

        recorder.RecordSegment(location.segment, location.t_event, inclusive=False)
        jump = SelectAndApplyJump(location.state_at_event, model, rng)
        t = location.t_event
        events.append(JumpEvent(t, jump.channel, jump.kind))
        if jump.terminated:
            final_state = None
            final_norm2 = None
            break
        assert jump.new_state is not None
        phi = jump.new_state

    reacted = final_state is None
    return TrajectoryRecord(
        outcome=TrajectoryOutcome.REACTED if reacted else TrajectoryOutcome.CENSORED,
        t_max=t_max,
        reaction_time=t if reacted else None,
        reaction_channel=events[-1].channel if reacted else None,
        jump_events=tuple(events),
        grid_alive=recorder.alive,
        grid_singlet=recorder.singlet,
        n_steps=recorder.n_steps,
        final_state=final_state,
        final_norm2=final_norm2,
    )
