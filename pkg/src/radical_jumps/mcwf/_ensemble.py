# mypy: disallow-untyped-defs
"""
Ensembles of trajectories and their reduction to time-resolved averages.

Trajectories are grouped in chunks of ``CHUNK_SIZE`` consecutive indices. A chunk is the unit
of work sent to the worker pool and is reduced to partial sums in index order; the partial sums
of all chunks are then added in chunk order. Neither step depends on the number of workers, so
a given ``(n_samples, master_seed)`` always produces bitwise-identical results.
"""
from typing import Optional

import attr
import logging
import numpy as np
import scipy.integrate
import time
from collections.abc import Iterable
from collections.abc import Iterator

from joblib import Parallel
from joblib import delayed
from oop_ext.foundation.callback import Callback2

from radical_jumps.foundation.exceptions import RadicalJumpsError
from radical_jumps.model import ModelOperators
from radical_jumps.ode import Tolerances

from ._initial_states import CreateSampler
from ._initial_states import InitialStateStrategy
from ._initial_states import RandomStream
from ._initial_states import SampleInitialState
from ._trajectory import CheckUnravelable
from ._trajectory import PropagateTrajectory
from ._trajectory import ValidateGrid

log = logging.getLogger(__name__)

CHUNK_SIZE = 64

# Reaction channel recorded for trajectories that never reacted.
NO_REACTION = -1


class TrajectoryFailedError(RadicalJumpsError):
    """
    A trajectory of an ensemble failed; ``trajectory_index`` identifies it.
    """

    def __init__(self, message: str, trajectory_index: int) -> None:
        RadicalJumpsError.__init__(self, message, trajectory_index)
        self.message = message
        self.trajectory_index = trajectory_index

    def __str__(self) -> str:
        return self.message


@attr.s(auto_attribs=True, frozen=True, eq=False)
class EnsembleResult:
    """
    Averages over ``n_samples`` trajectories on ``grid``.

    ``p1`` is the fraction of trajectories still unreacted and ``pS`` the mean of the singlet
    expectation counting reacted trajectories as 0. Standard errors are binomial for ``p1`` and
    the sample standard deviation over trajectories divided by ``sqrt(N)`` for ``pS``.

    Per-trajectory arrays are indexed by trajectory: ``reaction_times`` (``nan`` if censored),
    ``reaction_channels`` (``-1`` if censored), ``jump_counts`` (Lindblad jumps),
    ``survival_integrals`` (time unreacted within ``t_max``) and ``singlet_integrals``
    (trapezoidal integral of the singlet expectation over the grid).
    """

    grid: np.ndarray
    p1: np.ndarray
    p1_stderr: np.ndarray
    pS: np.ndarray
    pS_stderr: np.ndarray
    n_samples: int
    master_seed: int
    strategy: InitialStateStrategy
    t_max: float
    reaction_times: np.ndarray
    reaction_channels: np.ndarray
    jump_counts: np.ndarray
    survival_integrals: np.ndarray
    singlet_integrals: np.ndarray
    total_steps: int

    @property
    def reacted_fraction(self) -> float:
        return float(np.mean(self.reaction_channels != NO_REACTION))

    def IsIdentical(self, other: "EnsembleResult") -> bool:
        """
        True if both results hold bitwise-identical data.
        """
        arrays = (
            "grid",
            "p1",
            "p1_stderr",
            "pS",
            "pS_stderr",
            "reaction_times",
            "reaction_channels",
            "jump_counts",
            "survival_integrals",
            "singlet_integrals",
        )
        return (
            self.n_samples == other.n_samples
            and self.master_seed == other.master_seed
            and self.strategy is other.strategy
            and self.t_max == other.t_max
            and self.total_steps == other.total_steps
            and all(
                np.array_equal(getattr(self, name), getattr(other, name), equal_nan=True)
                for name in arrays
            )
        )


@attr.s(auto_attribs=True, frozen=True, eq=False)
class _ChunkTally:
    start: int
    stop: int
    alive_counts: np.ndarray
    singlet_sums: np.ndarray
    singlet_squares: np.ndarray
    reaction_times: np.ndarray
    reaction_channels: np.ndarray
    jump_counts: np.ndarray
    survival_integrals: np.ndarray
    singlet_integrals: np.ndarray
    n_steps: int


def _RunChunk(
    model: ModelOperators,
    start: int,
    stop: int,
    strategy: InitialStateStrategy,
    grid: np.ndarray,
    t_max: float,
    master_seed: int,
    tolerances: Tolerances,
) -> _ChunkTally:
    size = stop - start
    alive_counts = np.zeros(len(grid), dtype=np.int64)
    singlet_sums = np.zeros(len(grid))
    singlet_squares = np.zeros(len(grid))
    reaction_times = np.full(size, np.nan)
    reaction_channels = np.full(size, NO_REACTION, dtype=np.int64)
    jump_counts = np.zeros(size, dtype=np.int64)
    survival_integrals = np.zeros(size)
    singlet_integrals = np.zeros(size)
    n_steps = 0

    sampler = CreateSampler(strategy, cycle=True)
    for offset, index in enumerate(range(start, stop)):
        stream = RandomStream(master_seed, index)
        try:
            phi0 = SampleInitialState(model.layout, strategy, stream, sampler)
            record = PropagateTrajectory(
                model, phi0, t_max, grid, stream.generator, tolerances
            )
        except RadicalJumpsError as e:
            raise TrajectoryFailedError(f"Trajectory {index} failed: {e}", index) from e

        alive_counts += record.grid_alive
        singlet_sums += record.grid_singlet
        singlet_squares += record.grid_singlet**2
        if record.reacted:
            assert record.reaction_time is not None
            assert record.reaction_channel is not None
            reaction_times[offset] = record.reaction_time
            reaction_channels[offset] = record.reaction_channel
        jump_counts[offset] = record.lindblad_jump_count
        survival_integrals[offset] = record.survival_time
        singlet_integrals[offset] = scipy.integrate.trapezoid(record.grid_singlet, grid)
        n_steps += record.n_steps

    return _ChunkTally(
        start=start,
        stop=stop,
        alive_counts=alive_counts,
        singlet_sums=singlet_sums,
        singlet_squares=singlet_squares,
        reaction_times=reaction_times,
        reaction_channels=reaction_channels,
        jump_counts=jump_counts,
        survival_integrals=survival_integrals,
        singlet_integrals=singlet_integrals,
        n_steps=n_steps,
    )


def _ChunkBounds(n_samples: int) -> list[tuple[int, int]]:
    return [
        (start, min(start + CHUNK_SIZE, n_samples))
        for start in range(0, n_samples, CHUNK_SIZE)
    ]


def RunEnsemble(
    model: ModelOperators,
    n_samples: int,
    strategy: InitialStateStrategy,
    grid: Iterable[float],
    master_seed: int,
    worker_count: int = 1,
    t_max: Optional[float] = None,
    tolerances: Tolerances = Tolerances(),
    on_chunk_finished: Optional[Callback2[int, int]] = None,
) -> EnsembleResult:
    """
    Runs trajectories ``0 .. n_samples - 1`` and averages them on ``grid``.

    Trajectory ``i`` draws all its random numbers from ``RandomStream(master_seed, i)``. With
    the ``exhaustive`` strategy trajectory ``i`` starts from nuclear basis state ``i mod Z``.

    :param t_max: end of every trajectory; defaults to the last grid time.
    :param on_chunk_finished: called with ``(completed, n_samples)`` as chunks come in.

    :raises TrajectoryFailedError: if any trajectory fails; carries its index.
    """
    if n_samples < 1:
        raise ValueError(f"An ensemble needs at least one trajectory, got {n_samples}.")
    if worker_count < 1:
        raise ValueError(f"worker_count must be at least 1, got {worker_count}.")
    CheckUnravelable(model)
    grid_array = np.asarray(grid, dtype=float)
    if t_max is None:
        t_max = float(grid_array[-1])
    grid_array = ValidateGrid(grid_array, t_max)

    log.info(
        "Running %d trajectories: dim=%d, strategy=%s, workers=%d, seed=%d",
        n_samples,
        model.dim,
        strategy.value,
        worker_count,
        master_seed,
    )
    started = time.perf_counter()
    tasks = (
        (model, start, stop, strategy, grid_array, t_max, master_seed, tolerances)
        for start, stop in _ChunkBounds(n_samples)
    )
    tallies: Iterator[_ChunkTally]
    if worker_count == 1:
        tallies = (_RunChunk(*task) for task in tasks)
    else:
        tallies = Parallel(
            n_jobs=worker_count, backend="loky", return_as="generator"
        )(delayed(_RunChunk)(*task) for task in tasks)

    alive_counts = np.zeros(len(grid_array), dtype=np.int64)
    singlet_sums = np.zeros(len(grid_array))
    singlet_squares = np.zeros(len(grid_array))
    per_trajectory: list[_ChunkTally] = []
    total_steps = 0
    for tally in tallies:
        alive_counts += tally.alive_counts
        singlet_sums += tally.singlet_sums
        singlet_squares += tally.singlet_squares
        total_steps += tally.n_steps
        per_trajectory.append(tally)
        log.debug("Trajectories %d to %d done.", tally.start, tally.stop - 1)
        if on_chunk_finished is not None:
            on_chunk_finished(tally.stop, n_samples)

    n = n_samples
    p1 = alive_counts / n
    pS = singlet_sums / n
    p1_stderr = np.sqrt(p1 * (1 - p1) / n)
    if n > 1:
        variance = np.clip((singlet_squares - n * pS**2) / (n - 1), 0.0, None)
        pS_stderr = np.sqrt(variance / n)
    else:
        pS_stderr = np.zeros_like(pS)

    result = EnsembleResult(
        grid=grid_array,
        p1=p1,
        p1_stderr=p1_stderr,
        pS=pS,
        pS_stderr=pS_stderr,
        n_samples=n,
        master_seed=master_seed,
        strategy=strategy,
        t_max=t_max,
        reaction_times=np.concatenate([t.reaction_times for t in per_trajectory]),
        reaction_channels=np.concatenate([t.reaction_channels for t in per_trajectory]),
        jump_counts=np.concatenate([t.jump_counts for t in per_trajectory]),
        survival_integrals=np.concatenate([t.survival_integrals for t in per_trajectory]),
        singlet_integrals=np.concatenate([t.singlet_integrals for t in per_trajectory]),
        total_steps=total_steps,
    )
    log.info(
        "Ensemble finished in %.3f s: %d of %d trajectories reacted, %d integration steps.",
        time.perf_counter() - started,
        int(np.sum(result.reaction_channels != NO_REACTION)),
        n,
        total_steps,
    )
    return result
