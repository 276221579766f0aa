import math

import attr
import numpy as np
import pytest

from radical_jumps.analysis import ConvergenceStudies
from radical_jumps.analysis import ConvergenceStudy
from radical_jumps.analysis import GridMismatchError
from radical_jumps.analysis import GrowthFactor
from radical_jumps.analysis import ObservableKind
from radical_jumps.analysis import ObservableSeries
from radical_jumps.analysis import RepeatSeed
from radical_jumps.analysis import RmsError
from radical_jumps.analysis import _metrics
from radical_jumps.master_equation import IntegrateMasterEquation
from radical_jumps.model import AssembleModel
from radical_jumps.model import KineticsSpec
from radical_jumps.ode import Tolerances

GRID = np.linspace(0.0, 3.0, 301)


def Series(values) -> ObservableSeries:
    return ObservableSeries(GRID, values, ObservableKind.F1)


def testRmsErrorOfEqualSeries() -> None:
    a = Series(np.sin(GRID))
    assert RmsError(a, a) == 0.0


def testRmsErrorOfConstantOffset() -> None:
    a = Series(np.sin(GRID))
    b = Series(np.sin(GRID) + 3e-3)
    assert RmsError(a, b) == pytest.approx(3e-3, rel=1e-12)
    assert RmsError(a, b, t_max=1.5) == pytest.approx(3e-3, rel=1e-12)


def testRmsErrorIsAMetric() -> None:
    rng = np.random.default_rng(0)
    for _ in range(10):
        a, b, c = (Series(rng.normal(size=GRID.size)) for _ in range(3))
        assert RmsError(a, b) == pytest.approx(RmsError(b, a), rel=1e-14)
        assert RmsError(a, c) <= RmsError(a, b) + RmsError(b, c) + 1e-14
        assert RmsError(a, b) > 0


def testRmsErrorGridMismatch() -> None:
    a = Series(np.zeros(GRID.size))
    b = ObservableSeries(GRID[:-1], np.zeros(GRID.size - 1), ObservableKind.F1)
    with pytest.raises(GridMismatchError, match="grids differ"):
        RmsError(a, b)


def testRmsErrorOnASingleTime() -> None:
    a = ObservableSeries([0.5], [0.25], ObservableKind.P1)
    b = ObservableSeries([0.5], [0.2], ObservableKind.P1)
    assert RmsError(a, b) == pytest.approx(0.05, rel=1e-12)
    assert RmsError(a, a) == 0.0


def testRepeatSeedsAreDistinct() -> None:
    seeds = {RepeatSeed(5, n, r) for n in (100, 1000) for r in range(4)}
    assert len(seeds) == 8
    assert RepeatSeed(5, 100, 0) == RepeatSeed(5, 100, 0)
    assert RepeatSeed(5, 100, 0) != RepeatSeed(6, 100, 0)


@pytest.fixture
def small_oracle(one_proton_spec):
    model = AssembleModel(one_proton_spec)
    oracle = IntegrateMasterEquation(model, np.linspace(0.0, 2.0, 41))
    return model, oracle


def testConvergenceStudy(small_oracle) -> None:
    model, oracle = small_oracle
    report = ConvergenceStudy(model, [16, 64], repeats=3, oracle=oracle, master_seed=1)
    assert report.sample_sizes == (16, 64)
    assert report.repeats == 3
    assert all(len(e) == 3 for e in report.errors)
    assert all(e > 0 for errors in report.errors for e in errors)
    assert report.error_stderr is not None
    low, high = report.Band(0)
    assert low <= report.mean_errors[0] <= high
    assert math.isfinite(report.slope)


def testConvergenceSingleRepeat(small_oracle) -> None:
    model, oracle = small_oracle
    report = ConvergenceStudy(
        model, [8, 32], repeats=1, oracle=oracle, kind=ObservableKind.PS
    )
    assert report.error_stderr is None
    assert report.Band(1) == (report.mean_errors[1], report.mean_errors[1])
    assert math.isfinite(report.slope)
    assert report.kind is ObservableKind.PS


def testConvergenceStudiesShareEnsembles(small_oracle) -> None:
    model, oracle = small_oracle
    reports = ConvergenceStudies(model, [8, 32], repeats=2, oracle=oracle, master_seed=4)
    assert set(reports) == {ObservableKind.F1, ObservableKind.FS}
    single = ConvergenceStudy(
        model, [8, 32], repeats=2, oracle=oracle, kind=ObservableKind.FS, master_seed=4
    )
    assert reports[ObservableKind.FS].errors == single.errors
    with pytest.raises(ValueError, match="at least one observable"):
        ConvergenceStudies(model, [8, 32], repeats=2, oracle=oracle, kinds=())


def testConvergenceInvalidSizes(small_oracle) -> None:
    model, oracle = small_oracle
    with pytest.raises(ValueError, match="strictly increasing"):
        ConvergenceStudy(model, [100, 10], repeats=2, oracle=oracle)
    with pytest.raises(ValueError, match="repeats"):
        ConvergenceStudy(model, [10, 100], repeats=0, oracle=oracle)


def testGrowthFactor() -> None:
    counts = [0, 1, 2, 3, 4]
    times = [0.01 * 2.4**n for n in counts]
    fit = GrowthFactor(counts, times)
    assert fit.factor == pytest.approx(2.4, rel=1e-10)
    assert fit.log_slope_stderr == pytest.approx(0.0, abs=1e-10)

    with pytest.raises(ValueError, match="at least two"):
        GrowthFactor([1], [1.0])
    with pytest.raises(ValueError, match="positive"):
        GrowthFactor([0, 1], [1.0, 0.0])


@pytest.mark.slow
def testConvergenceSlope(one_proton_spec) -> None:
    spec = attr.evolve(one_proton_spec, kinetics=KineticsSpec.FromRecombination(2.0, 0.0))
    model = AssembleModel(spec)
    oracle = IntegrateMasterEquation(model, np.linspace(0.0, 10.0, 1001))
    report = ConvergenceStudy(
        model, [100, 1000, 10000, 100000], repeats=8, oracle=oracle, worker_count=4
    )
    assert abs(report.slope + 0.5) <= 0.1


def testConvergenceStudyForwardsTolerances(small_oracle, mocker) -> None:
    model, oracle = small_oracle
    run_ensemble = mocker.patch.object(
        _metrics, "RunEnsemble", wraps=_metrics.RunEnsemble
    )
    tolerances = Tolerances(abs_tol=1e-9, rel_tol=1e-7)
    ConvergenceStudy(model, [4, 8], repeats=1, oracle=oracle, tolerances=tolerances)
    assert run_ensemble.call_count == 2
    assert all(c.kwargs["tolerances"] is tolerances for c in run_ensemble.call_args_list)
