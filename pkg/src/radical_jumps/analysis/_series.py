# mypy: disallow-untyped-defs
"""
Time series of the observables produced by both integrators, and the transformations shared by
every post-processing step.
"""
from typing import Any
from typing import Optional

import attr
import enum
import numpy as np

from radical_jumps.foundation.exceptions import RadicalJumpsError
from radical_jumps.master_equation import MESeries
from radical_jumps.mcwf import EnsembleResult


class GridMismatchError(RadicalJumpsError):
    """
    Two series that must share a time grid do not.
    """


class SeriesRangeError(RadicalJumpsError):
    """
    A series does not cover the requested time range.
    """


class ObservableKind(enum.Enum):
    """
    ``p1``: survival probability; ``pS``: singlet probability. ``f1``/``fS`` are the same with
    the spin-independent forward decay divided out.
    """

    P1 = "p1"
    PS = "pS"
    F1 = "f1"
    FS = "fS"

    @property
    def is_transformed(self) -> bool:
        return self in (ObservableKind.F1, ObservableKind.FS)

    def Toggled(self) -> "ObservableKind":
        return _TOGGLED[self]


_TOGGLED = {
    ObservableKind.P1: ObservableKind.F1,
    ObservableKind.PS: ObservableKind.FS,
    ObservableKind.F1: ObservableKind.P1,
    ObservableKind.FS: ObservableKind.PS,
}


def _ToFloatArray(value: Any) -> np.ndarray:
    return np.array(value, dtype=float)


def _ToOptionalFloatArray(value: Any) -> Optional[np.ndarray]:
    return None if value is None else np.array(value, dtype=float)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class ObservableSeries:
    """
    ``values`` (and ``stderr``, when statistical) of one observable on ``grid`` (us).
    """

    grid: np.ndarray = attr.ib(converter=_ToFloatArray)
    values: np.ndarray = attr.ib(converter=_ToFloatArray)
    kind: ObservableKind
    stderr: Optional[np.ndarray] = attr.ib(default=None, converter=_ToOptionalFloatArray)

    def __attrs_post_init__(self) -> None:
        if self.grid.ndim != 1 or self.grid.size == 0:
            raise ValueError("A series needs a non-empty 1-d time grid.")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("The time grid of a series must be strictly increasing.")
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"{self.kind.value}: {self.values.size} values for {self.grid.size} times."
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.kind.value}: values must be finite.")
        if self.stderr is not None and self.stderr.shape != self.grid.shape:
            raise ValueError(f"{self.kind.value}: stderr does not match the grid.")

    def HasSameGrid(self, other: "ObservableSeries") -> bool:
        return np.array_equal(self.grid, other.grid)


def SeriesFromEnsemble(
    result: EnsembleResult,
) -> tuple[ObservableSeries, ObservableSeries]:
    """
    Returns the ``(p1, pS)`` series of a Monte-Carlo ensemble, with standard errors.
    """
    return (
        ObservableSeries(result.grid, result.p1, ObservableKind.P1, result.p1_stderr),
        ObservableSeries(result.grid, result.pS, ObservableKind.PS, result.pS_stderr),
    )


def SeriesFromMasterEquation(
    series: MESeries,
) -> tuple[ObservableSeries, ObservableSeries]:
    """
    Returns the ``(p1, pS)`` series of a master-equation run.
    """
    return (
        ObservableSeries(series.grid, series.p1, ObservableKind.P1),
        ObservableSeries(series.grid, series.pS, ObservableKind.PS),
    )


def FTransform(series: ObservableSeries, k_f: float) -> ObservableSeries:
    """
    Multiplies ``series`` (and its stderr) by ``exp(k_f t)``.

    Applied to ``p1``/``pS`` this divides out the forward decay and gives ``f1``/``fS``; applied
    to ``f1``/``fS`` with ``-k_f`` it is the inverse.
    """
    factor = np.exp(k_f * series.grid)
    return ObservableSeries(
        grid=series.grid,
        values=series.values * factor,
        kind=series.kind.Toggled(),
        stderr=None if series.stderr is None else series.stderr * factor,
    )


def RestoreForwardDecay(series: ObservableSeries, k_f: float) -> ObservableSeries:
    """
    Maps a ``p1``/``pS`` series simulated with the forward rate set to zero back to the system
    with forward rate ``k_f``.

    Without the forward reaction the simulated probabilities are exactly the transformed ones
    of the full system.
    """
    if series.kind.is_transformed:
        raise ValueError(f"Expected an untransformed series, got {series.kind.value}.")
    as_transformed = attr.evolve(series, kind=series.kind.Toggled())
    return FTransform(as_transformed, -k_f)


def ClipToRange(series: ObservableSeries, t_max: float) -> ObservableSeries:
    """
    Returns the part of ``series`` on ``[grid[0], t_max]``, interpolating linearly at ``t_max``
    when it falls between grid points.

    :raises SeriesRangeError: if ``t_max`` is past the end of the grid or before its start.
    """
    grid = series.grid
    if t_max > grid[-1] or t_max <= grid[0]:
        raise SeriesRangeError(
            f"t_max = {t_max} us is outside the series range [{grid[0]}, {grid[-1]}] us."
        )
    inside = grid <= t_max
    times = grid[inside]
    values = series.values[inside]
    stderr = None if series.stderr is None else series.stderr[inside]
    if times[-1] < t_max:
        times = np.append(times, t_max)
        values = np.append(values, np.interp(t_max, grid, series.values))
        if stderr is not None:
            assert series.stderr is not None
            stderr = np.append(stderr, np.interp(t_max, grid, series.stderr))
    return ObservableSeries(times, values, series.kind, stderr)
