# mypy: disallow-untyped-defs
"""
Reaction yields and their dependence on the field direction.

The singlet recombination and forward reaction yields up to a cut-off ``t_max`` are

    Y_S = k_b int_0^t_max p_S dt        Y_1 = k_f int_0^t_max p_1 dt

Both are truncated, never extrapolated: ``YieldReport.survival_at_t_max`` tells how much of the
pair was still unreacted at the cut-off.
"""
from typing import Optional

import attr
import logging
import math
import numpy as np
import scipy.integrate

from radical_jumps.foundation.exceptions import RadicalJumpsError
from radical_jumps.mcwf import EnsembleResult
from radical_jumps.model import SpinSystemSpec

from ._series import ClipToRange
from ._series import ObservableKind
from ._series import ObservableSeries
from ._series import SeriesRangeError

log = logging.getLogger(__name__)

# Series must start this close to t = 0 to be integrated from 0.
START_TOLERANCE = 1e-12


class AnisotropyMismatchError(RadicalJumpsError):
    """
    Runs compared for a field-direction effect differ in more than the field direction.
    """


@attr.s(auto_attribs=True, frozen=True)
class YieldReport:
    """
    Yields up to ``t_max``. Standard errors are ``None`` for deterministic inputs.
    """

    singlet_yield: float
    product_yield: float
    t_max: float
    survival_at_t_max: float
    singlet_stderr: Optional[float] = None
    product_stderr: Optional[float] = None


def _Integral(series: ObservableSeries) -> float:
    return float(scipy.integrate.trapezoid(series.values, series.grid))


def _ErrorIntegral(series: ObservableSeries) -> Optional[float]:
    if series.stderr is None:
        return None
    return float(scipy.integrate.trapezoid(series.stderr, series.grid))


def _Scaled(k: float, value: Optional[float]) -> Optional[float]:
    return None if value is None else k * value


def Yields(
    p1: ObservableSeries,
    pS: ObservableSeries,
    k_b: float,
    k_f: float,
    t_max: Optional[float] = None,
) -> YieldReport:
    """
    Integrates ``k_b pS`` and ``k_f p1`` over ``[0, t_max]`` with the trapezoidal rule.

    When the series carry standard errors, the reported error is ``k int stderr dt``, an upper
    bound that ignores the correlation between grid points.

    :param t_max: cut-off; defaults to the end of the grid.

    :raises SeriesRangeError: if the series do not cover ``[0, t_max]``.
    :raises ValueError: if the series are not the untransformed ``p1`` and ``pS``.
    """
    if p1.kind is not ObservableKind.P1 or pS.kind is not ObservableKind.PS:
        raise ValueError(
            f"Yields need p1 and pS series, got {p1.kind.value} and {pS.kind.value}."
        )
    if t_max is None:
        t_max = float(min(p1.grid[-1], pS.grid[-1]))
    for series in (p1, pS):
        if abs(series.grid[0]) > START_TOLERANCE:
            raise SeriesRangeError(
                f"{series.kind.value} starts at {series.grid[0]} us instead of 0."
            )
    p1_clipped = ClipToRange(p1, t_max)
    pS_clipped = ClipToRange(pS, t_max)
    return YieldReport(
        singlet_yield=k_b * _Integral(pS_clipped),
        product_yield=k_f * _Integral(p1_clipped),
        t_max=t_max,
        survival_at_t_max=float(p1_clipped.values[-1]),
        singlet_stderr=_Scaled(k_b, _ErrorIntegral(pS_clipped)),
        product_stderr=_Scaled(k_f, _ErrorIntegral(p1_clipped)),
    )


def _MeanAndError(samples: np.ndarray) -> tuple[float, float]:
    n = len(samples)
    mean = float(np.mean(samples))
    if n < 2:
        return mean, 0.0
    return mean, float(np.std(samples, ddof=1) / math.sqrt(n))


def EnsembleYields(result: EnsembleResult, k_b: float, k_f: float) -> YieldReport:
    """
    Yields from the per-trajectory integrals of an ensemble.

    ``Y_1`` uses the exact time each trajectory spent unreacted; ``Y_S`` the integral of its
    singlet expectation over the grid. Standard errors are the sample standard deviations of
    the per-trajectory values over ``sqrt(N)``.

    The ensemble must have been run with the actual forward rate ``k_f``.
    """
    product, product_error = _MeanAndError(k_f * result.survival_integrals)
    singlet, singlet_error = _MeanAndError(k_b * result.singlet_integrals)
    alive = ~np.isfinite(result.reaction_times)
    return YieldReport(
        singlet_yield=singlet,
        product_yield=product,
        t_max=result.t_max,
        survival_at_t_max=float(np.mean(alive)),
        singlet_stderr=singlet_error,
        product_stderr=product_error,
    )


@attr.s(auto_attribs=True, frozen=True)
class AnisotropyRun:
    spec: SpinSystemSpec
    yields: YieldReport


@attr.s(auto_attribs=True, frozen=True)
class AnisotropyReport:
    """
    ``delta_product_yield = Y_1(a) - Y_1(b)`` (likewise for ``Y_S``), with standard errors
    combined in quadrature when both runs carry them.
    """

    delta_product_yield: float
    delta_singlet_yield: float
    product_stderr: Optional[float]
    singlet_stderr: Optional[float]

    def IsSignificant(self, sigmas: float = 4.0) -> bool:
        """
        True if ``|delta Y_1|`` exceeds ``sigmas`` standard errors (or is non-zero for
        deterministic runs).
        """
        if self.product_stderr is None:
            return self.delta_product_yield != 0.0
        return abs(self.delta_product_yield) > sigmas * self.product_stderr


def _Quadrature(a: Optional[float], b: Optional[float]) -> Optional[float]:
    if a is None or b is None:
        return None
    return math.hypot(a, b)


def AnisotropyDelta(run_a: AnisotropyRun, run_b: AnisotropyRun) -> AnisotropyReport:
    """
    Yield difference between two runs that differ only in the field direction, usually
    ``run_a`` along y and ``run_b`` along z.

    :raises AnisotropyMismatchError: if the runs differ in anything else (including the cut-off
        time of their yields).
    """
    if not run_a.spec.DiffersOnlyInFieldDirection(run_b.spec):
        raise AnisotropyMismatchError(
            "Anisotropy needs two runs of the same system differing only in field direction."
        )
    if run_a.yields.t_max != run_b.yields.t_max:
        raise AnisotropyMismatchError(
            f"Yields integrated to different cut-offs: {run_a.yields.t_max} vs"
            f" {run_b.yields.t_max} us."
        )
    report = AnisotropyReport(
        delta_product_yield=run_a.yields.product_yield - run_b.yields.product_yield,
        delta_singlet_yield=run_a.yields.singlet_yield - run_b.yields.singlet_yield,
        product_stderr=_Quadrature(run_a.yields.product_stderr, run_b.yields.product_stderr),
        singlet_stderr=_Quadrature(run_a.yields.singlet_stderr, run_b.yields.singlet_stderr),
    )
    log.info(
        "Field-direction effect: dY_1 = %.6g (stderr %s)",
        report.delta_product_yield,
        report.product_stderr,
    )
    return report
