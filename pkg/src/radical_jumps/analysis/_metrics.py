# mypy: disallow-untyped-defs
from typing import Optional

import attr
import logging
import math
import numpy as np
import scipy.integrate
import scipy.stats
from collections.abc import Sequence

from radical_jumps.master_equation import MESeries
from radical_jumps.mcwf import InitialStateStrategy
from radical_jumps.mcwf import RunEnsemble
from radical_jumps.model import ModelOperators
from radical_jumps.ode import Tolerances

from ._series import ClipToRange
from ._series import FTransform
from ._series import GridMismatchError
from ._series import ObservableKind
from ._series import ObservableSeries
from ._series import SeriesFromEnsemble
from ._series import SeriesFromMasterEquation

log = logging.getLogger(__name__)


def RmsError(
    a: ObservableSeries, b: ObservableSeries, t_max: Optional[float] = None
) -> float:
    """
    ``sqrt((1 / t_max) int_0^t_max (a - b)^2 dt)`` on the shared grid, by the trapezoidal rule.
    A grid of a single time has no extent; the error is then the pointwise ``|a - b|``.

    :raises GridMismatchError: if ``a`` and ``b`` are not sampled on the same times.
    """
    if not a.HasSameGrid(b):
        raise GridMismatchError(
            f"Cannot compare {a.kind.value} on {a.grid.size} points with {b.kind.value} on"
            f" {b.grid.size} points: the grids differ."
        )
    if t_max is None:
        t_max = float(a.grid[-1])
    difference = ObservableSeries(a.grid, a.values - b.values, a.kind)
    if t_max != a.grid[-1]:
        difference = ClipToRange(difference, t_max)
    span = difference.grid[-1] - difference.grid[0]
    if span == 0:
        return float(np.abs(difference.values).max())
    squared = scipy.integrate.trapezoid(difference.values**2, difference.grid)
    return float(math.sqrt(squared / span))


@attr.s(auto_attribs=True, frozen=True)
class ConvergenceReport:
    """
    RMS error of a Monte-Carlo observable against the master-equation oracle as the number of
    trajectories grows.

    ``errors[i]`` holds one value per repeat at ``sample_sizes[i]``; ``error_stderr`` is
    ``None`` with a single repeat. ``slope`` is the fitted exponent of ``E ~ N^slope``.
    """

    sample_sizes: tuple[int, ...]
    errors: tuple[tuple[float, ...], ...]
    mean_errors: tuple[float, ...]
    error_stderr: Optional[tuple[float, ...]]
    slope: float
    slope_stderr: float
    kind: ObservableKind
    repeats: int

    def Band(self, index: int) -> tuple[float, float]:
        """
        ``mean -/+ 2 stderr`` at ``sample_sizes[index]`` (collapsed to the mean without
        repeats).
        """
        mean = self.mean_errors[index]
        spread = 0.0 if self.error_stderr is None else 2 * self.error_stderr[index]
        return mean - spread, mean + spread


def RepeatSeed(master_seed: int, n_samples: int, repeat: int) -> int:
    """
    Master seed of repeat ``repeat`` at ``n_samples`` trajectories, independent across both.
    """
    sequence = np.random.SeedSequence(master_seed, spawn_key=(n_samples, repeat))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _PickObservable(
    kind: ObservableKind, p1: ObservableSeries, pS: ObservableSeries, k_f: float
) -> ObservableSeries:
    base = pS if kind in (ObservableKind.PS, ObservableKind.FS) else p1
    return FTransform(base, k_f) if kind.is_transformed else base


def ConvergenceStudies(
    model: ModelOperators,
    sample_sizes: Sequence[int],
    repeats: int,
    oracle: MESeries,
    kinds: Sequence[ObservableKind] = (ObservableKind.F1, ObservableKind.FS),
    k_f: float = 0.0,
    strategy: InitialStateStrategy = InitialStateStrategy.SPIN_COHERENT,
    master_seed: int = 0,
    worker_count: int = 1,
    tolerances: Tolerances = Tolerances(),
) -> dict[ObservableKind, ConvergenceReport]:
    """
    Runs ``repeats`` independent ensembles for every size in ``sample_sizes`` on the oracle's
    grid and fits the decay of their RMS error against the oracle, for each of ``kinds``.

    Every kind is measured on the same ensembles. Transformed kinds use ``k_f``.
    """
    sizes = tuple(int(n) for n in sample_sizes)
    if len(sizes) < 2 or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(
            f"Need at least two strictly increasing sample sizes, got {list(sizes)}."
        )
    if repeats < 1:
        raise ValueError(f"repeats must be at least 1, got {repeats}.")
    if not kinds:
        raise ValueError("Need at least one observable kind.")

    exact_p1, exact_pS = SeriesFromMasterEquation(oracle)
    references = {kind: _PickObservable(kind, exact_p1, exact_pS, k_f) for kind in kinds}
    errors: dict[ObservableKind, list[tuple[float, ...]]] = {kind: [] for kind in kinds}
    for n_samples in sizes:
        per_repeat: dict[ObservableKind, list[float]] = {kind: [] for kind in kinds}
        for repeat in range(repeats):
            result = RunEnsemble(
                model,
                n_samples,
                strategy,
                oracle.grid,
                RepeatSeed(master_seed, n_samples, repeat),
                worker_count=worker_count,
                t_max=oracle.t_max,
                tolerances=tolerances,
            )
            p1, pS = SeriesFromEnsemble(result)
            for kind in kinds:
                sampled = _PickObservable(kind, p1, pS, k_f)
                per_repeat[kind].append(RmsError(sampled, references[kind]))
        for kind in kinds:
            errors[kind].append(tuple(per_repeat[kind]))
            log.info(
                "N = %d: mean %s error %.4g over %d repeats",
                n_samples,
                kind.value,
                np.mean(per_repeat[kind]),
                repeats,
            )
    return {kind: _FitReport(sizes, errors[kind], kind, repeats) for kind in kinds}


def _FitReport(
    sizes: tuple[int, ...],
    errors: list[tuple[float, ...]],
    kind: ObservableKind,
    repeats: int,
) -> ConvergenceReport:
    means = tuple(float(np.mean(e)) for e in errors)
    stderr = (
        tuple(float(np.std(e, ddof=1) / math.sqrt(repeats)) for e in errors)
        if repeats > 1
        else None
    )
    fit = scipy.stats.linregress(np.log(sizes), np.log(means))
    return ConvergenceReport(
        sample_sizes=sizes,
        errors=tuple(errors),
        mean_errors=means,
        error_stderr=stderr,
        slope=float(fit.slope),
        slope_stderr=float(fit.stderr),
        kind=kind,
        repeats=repeats,
    )


def ConvergenceStudy(
    model: ModelOperators,
    sample_sizes: Sequence[int],
    repeats: int,
    oracle: MESeries,
    kind: ObservableKind = ObservableKind.F1,
    k_f: float = 0.0,
    strategy: InitialStateStrategy = InitialStateStrategy.SPIN_COHERENT,
    master_seed: int = 0,
    worker_count: int = 1,
    tolerances: Tolerances = Tolerances(),
) -> ConvergenceReport:
    """
    Single-observable form of :func:`ConvergenceStudies`.
    """
    reports = ConvergenceStudies(
        model,
        sample_sizes,
        repeats,
        oracle,
        kinds=(kind,),
        k_f=k_f,
        strategy=strategy,
        master_seed=master_seed,
        worker_count=worker_count,
        tolerances=tolerances,
    )
    return reports[kind]


@attr.s(auto_attribs=True, frozen=True)
class GrowthFit:
    """
    ``time ~ A * factor^n``: the cost multiplies by ``factor`` per added nucleus.
    """

    factor: float
    log_slope: float
    log_slope_stderr: float


def GrowthFactor(nucleus_counts: Sequence[int], times: Sequence[float]) -> GrowthFit:
    """
    Fits ``log(times)`` linearly in the number of nuclei.

    :raises ValueError: for fewer than two points or non-positive times.
    """
    counts = np.asarray(nucleus_counts, dtype=float)
    values = np.asarray(times, dtype=float)
    if counts.size < 2 or counts.size != values.size:
        raise ValueError("A growth fit needs at least two (count, time) pairs.")
    if np.any(values <= 0):
        raise ValueError("Timings must be positive.")
    fit = scipy.stats.linregress(counts, np.log(values))
    return GrowthFit(
        factor=float(math.exp(fit.slope)),
        log_slope=float(fit.slope),
        log_slope_stderr=float(fit.stderr),
    )
