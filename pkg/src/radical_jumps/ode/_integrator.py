# mypy: disallow-untyped-defs
"""
Adaptive integration of complex-valued ODEs with continuous output, and location of the time
at which the squared norm of the solution crosses a threshold.

Stepping is done by ``scipy.integrate.RK45`` (the Dormand-Prince 5(4) pair), driven one step at
a time so callers can stop as soon as they have what they need. Every accepted step is exposed
as a :class:`DenseSegment` carrying the free 4th-order interpolant of the pair.
"""
from typing import Callable
from typing import Optional

import attr
import logging
import numpy as np
import scipy.integrate
import scipy.optimize
from collections.abc import Iterable
from collections.abc import Iterator

from radical_jumps.foundation.exceptions import RadicalJumpsError

log = logging.getLogger(__name__)

MIN_STEP_SIZE = 1e-14
EVENT_TOLERANCE = 1e-10
MAX_ROOT_ITERATIONS = 100
MAX_BISECTIONS = 200

RhsFunction = Callable[[float, np.ndarray], np.ndarray]


class IntegrationError(RadicalJumpsError):
    """
    The integrator could not advance. ``last_t`` is the last time reached successfully.
    """

    def __init__(self, message: str, last_t: float) -> None:
        RadicalJumpsError.__init__(self, message, last_t)
        self.message = message
        self.last_t = last_t

    def __str__(self) -> str:
        return f"{self.message} (last good t = {self.last_t!r} us)"


class StepSizeUnderflowError(IntegrationError):
    """
    The step size fell below ``MIN_STEP_SIZE``: the problem is too stiff or blows up.
    """


def _PositiveTolerance(instance: object, attribute: "attr.Attribute", value: float) -> None:
    if not value > 0:
        raise ValueError(f"{attribute.name} must be positive, got {value}.")


@attr.s(auto_attribs=True, frozen=True)
class Tolerances:
    """
    Absolute and relative local error tolerances of the integrator.
    """

    abs_tol: float = attr.ib(default=1e-8, validator=_PositiveTolerance)
    rel_tol: float = attr.ib(default=1e-6, validator=_PositiveTolerance)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class RhsProblem:
    """
    ``dy/dt = rhs(t, y)`` for a complex vector ``y`` of length ``dimension``.
    """

    dimension: int
    rhs: RhsFunction
    abs_tol: float = attr.ib(default=1e-8, validator=_PositiveTolerance)
    rel_tol: float = attr.ib(default=1e-6, validator=_PositiveTolerance)

    @classmethod
    def FromTolerances(
        cls, dimension: int, rhs: RhsFunction, tolerances: Tolerances
    ) -> "RhsProblem":
        return cls(dimension, rhs, tolerances.abs_tol, tolerances.rel_tol)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class DenseSegment:
    """
    The solution over one accepted step ``[t_start, t_end]``.

    ``interpolant`` is the dense output of the step; at the endpoints the stored step values are
    returned instead, so consecutive segments agree exactly where they meet.
    """

    t_start: float
    t_end: float
    y_start: np.ndarray
    y_end: np.ndarray
    interpolant: Callable[[object], np.ndarray]

    def Evaluate(self, t: float) -> np.ndarray:
        if t == self.t_start:
            return self.y_start.copy()
        if t == self.t_end:
            return self.y_end.copy()
        return np.asarray(self.interpolant(t))

    def EvaluateMany(self, times: np.ndarray) -> np.ndarray:
        """
        Returns the solution at ``times`` as an array of shape ``(len(times), dimension)``.
        """
        times = np.asarray(times, dtype=float)
        if times.size == 0:
            return np.empty((0, self.y_start.size), dtype=self.y_start.dtype)
        values = np.asarray(self.interpolant(times)).T.copy()
        values[times == self.t_start] = self.y_start
        values[times == self.t_end] = self.y_end
        return values

    def Contains(self, t: float) -> bool:
        return self.t_start <= t <= self.t_end


def IntegrateAdaptive(
    problem: RhsProblem,
    y0: np.ndarray,
    t_span: tuple[float, float],
) -> Iterator[DenseSegment]:
    """
    Yields one :class:`DenseSegment` per accepted step; together they tile ``t_span`` exactly.

    The generator is lazy: a step is only taken when the next segment is requested.

    :raises StepSizeUnderflowError: if the step size collapses before ``t_span[1]``.
    """
    t0, t1 = (float(t) for t in t_span)
    y0 = np.asarray(y0, dtype=complex)
    if y0.shape != (problem.dimension,):
        raise ValueError(
            f"Initial state has shape {y0.shape}, expected ({problem.dimension},)."
        )
    if t1 < t0:
        raise ValueError(f"t_span must be increasing, got {t_span}.")
    if t1 == t0:
        return

    solver = scipy.integrate.RK45(
        problem.rhs,
        t0,
        y0,
        t1,
        rtol=problem.rel_tol,
        atol=problem.abs_tol,
    )
    while solver.status == "running":
        t_previous = solver.t
        y_previous = solver.y.copy()
        message = solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflowError(f"Integration failed: {message}", t_previous)
        step_size = solver.t - t_previous
        if step_size < MIN_STEP_SIZE and solver.t < t1:
            raise StepSizeUnderflowError(
                f"Step size {step_size:g} us fell below {MIN_STEP_SIZE:g} us.", t_previous
            )
        yield DenseSegment(
            t_start=t_previous,
            t_end=solver.t,
            y_start=y_previous,
            y_end=solver.y.copy(),
            interpolant=solver.dense_output(),
        )


def SquaredNorm(y: np.ndarray) -> float:
    return float(np.vdot(y, y).real)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class EventLocation:
    """
    Where the squared norm reached the threshold, or where the segments ran out (``censored``).

    ``segment`` is the segment holding ``t_event``.
    """

    t_event: float
    state_at_event: np.ndarray
    converged: bool
    censored: bool
    segment: DenseSegment


def _Bisect(
    residual: Callable[[float], float], lo: float, hi: float, event_tol: float
) -> float:
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        value = residual(mid)
        if abs(value) <= event_tol:
            return mid
        if value > 0:
            lo = mid
        else:
            hi = mid
    return hi


def _RefineCrossing(
    segment: DenseSegment, threshold: float, event_tol: float
) -> float:
    def Residual(t: float) -> float:
        return SquaredNorm(segment.Evaluate(t)) - threshold

    t_root, result = scipy.optimize.brentq(
        Residual,
        segment.t_start,
        segment.t_end,
        xtol=1e-15,
        maxiter=MAX_ROOT_ITERATIONS,
        full_output=True,
        disp=False,
    )
    if result.converged and abs(Residual(t_root)) <= event_tol:
        return float(t_root)
    log.debug(
        "Root search did not reach %g in [%r, %r], bisecting.",
        event_tol,
        segment.t_start,
        segment.t_end,
    )
    return _Bisect(Residual, segment.t_start, segment.t_end, event_tol)


def LocateNormCrossing(
    segments: Iterable[DenseSegment],
    threshold: float,
    event_tol: float = EVENT_TOLERANCE,
) -> EventLocation:
    """
    Consumes ``segments`` until the squared norm of the solution drops to ``threshold``.

    The crossing is bracketed on segment endpoints and refined on the interpolant with Brent's
    method, falling back to bisection. If the norm never drops to the threshold, the result
    is ``censored`` at the end of the last segment.

    :raises ValueError: if ``segments`` is empty.
    """
    last: Optional[DenseSegment] = None
    for segment in segments:
        last = segment
        if SquaredNorm(segment.y_start) <= threshold:
            return EventLocation(
                segment.t_start, segment.y_start.copy(), True, False, segment
            )
        if SquaredNorm(segment.y_end) > threshold:
            continue
        t_event = _RefineCrossing(segment, threshold, event_tol)
        state = segment.Evaluate(t_event)
        converged = abs(SquaredNorm(state) - threshold) <= event_tol
        return EventLocation(t_event, state, converged, False, segment)

    if last is None:
        raise ValueError("Cannot locate a norm crossing without any segment.")
    return EventLocation(last.t_end, last.y_end.copy(), False, True, last)
