# mypy: disallow-untyped-defs
"""
The commands of the command line: each takes a validated configuration, writes its tables into
the output directory and returns the manifest it wrote next to them.
"""
from typing import Any
from typing import Optional

import attr
import logging
import math
import numpy as np
from collections.abc import Iterator
from contextlib import contextmanager
from oop_ext.foundation.callback import Callback2

from radical_jumps.analysis import ConvergenceStudies
from radical_jumps.analysis import EnsembleYields
from radical_jumps.analysis import FTransform
from radical_jumps.analysis import GrowthFactor
from radical_jumps.analysis import ObservableKind
from radical_jumps.analysis import ObservableSeries
from radical_jumps.analysis import RestoreForwardDecay
from radical_jumps.analysis import RmsError
from radical_jumps.analysis import SeriesFromEnsemble
from radical_jumps.analysis import SeriesFromMasterEquation
from radical_jumps.analysis import YieldReport
from radical_jumps.analysis import Yields
from radical_jumps.foundation.checks import STRICT_CHECK_MAX_DIM
from radical_jumps.foundation.checks import SetStrictChecking
from radical_jumps.master_equation import DimensionCapError
from radical_jumps.master_equation import EstimateMemoryBytes
from radical_jumps.master_equation import IntegrateMasterEquation
from radical_jumps.master_equation import MESeries
from radical_jumps.mcwf import EnsembleResult
from radical_jumps.mcwf import RunEnsemble
from radical_jumps.model import AssembleModel
from radical_jumps.model import KineticsSpec
from radical_jumps.model import ModelOperators
from radical_jumps.model import NucleusSpec
from radical_jumps.model import SpinSystemSpec
from radical_jumps.ode import Tolerances

from ._config import ConfigToDict
from ._config import RunMethod
from ._config import SimulationConfig
from ._outputs import Measure
from ._outputs import OutputWriter
from ._outputs import RunManifest
from ._outputs import Timings
from ._outputs import WriteManifest

log = logging.getLogger(__name__)

ENSEMBLE_HEADER = ("t_us", "p1", "p1_stderr", "pS", "pS_stderr")
ME_HEADER = ("t_us", "p1", "pS")
DEVIATION_HEADER = (
    "t_us",
    "f1_mcwf",
    "f1_me",
    "f1_deviation",
    "fS_mcwf",
    "fS_me",
    "fS_deviation",
)
CONVERGENCE_HEADER = ("n_samples", "E1_mean", "E1_stderr", "ES_mean", "ES_stderr")
BENCH_HEADER = (
    "added_protons",
    "dim",
    "me_seconds",
    "me_steps",
    "me_seconds_per_step",
    "mcwf_seconds",
    "mcwf_steps",
    "mcwf_seconds_per_step",
)
BENCH_GRID_POINTS = 201


@contextmanager
def StrictCheckingFor(dim: int) -> Iterator[bool]:
    """
    Enables the dense invariant checks only for dimensions where they are affordable, restoring
    the previous setting on exit.
    """
    strict = dim <= STRICT_CHECK_MAX_DIM
    previous = SetStrictChecking(strict)
    try:
        yield strict
    finally:
        SetStrictChecking(previous)


def _ProgressCallback() -> Callback2[int, int]:
    def OnChunkFinished(completed: int, total: int) -> None:
        log.info("%d of %d trajectories done", completed, total)

    callback: Callback2[int, int] = Callback2()
    callback.Register(OnChunkFinished)
    return callback


def ForwardRate(kinetics: KineticsSpec) -> float:
    """
    ``k_f`` of the f-transform; kinetics given by channel rates have none.
    """
    return kinetics.k_f if kinetics.k_f is not None else 0.0


@attr.s(auto_attribs=True, frozen=True)
class _Simulation:
    """
    What a command integrates: the model (at ``k_f = 0`` when the forward rate is factored
    out), the output grid and the forward rate restored afterwards.
    """

    spec: SpinSystemSpec
    model: ModelOperators
    grid: np.ndarray
    restored_k_f: float

    @property
    def is_factored(self) -> bool:
        return self.restored_k_f != 0.0


def _Prepare(config: SimulationConfig) -> _Simulation:
    spec = config.system
    restored_k_f = 0.0
    if config.run.factor_kf:
        restored_k_f = ForwardRate(spec.kinetics)
        spec = spec.WithoutForwardRate()
        log.info("Simulating at k_f = 0; k_f = %g is restored on the results.", restored_k_f)
    return _Simulation(spec, AssembleModel(spec), config.run.Grid(), restored_k_f)


def _Restored(series: ObservableSeries, simulation: _Simulation) -> ObservableSeries:
    if not simulation.is_factored:
        return series
    return RestoreForwardDecay(series, simulation.restored_k_f)


def _CheckMeCap(config: SimulationConfig) -> None:
    dim = config.system.layout.total_dim
    if dim > config.run.me_dim_cap:
        raise DimensionCapError(dim, config.run.me_dim_cap, EstimateMemoryBytes(dim))


def _RunMcwf(
    config: SimulationConfig, simulation: _Simulation
) -> tuple[ObservableSeries, ObservableSeries, EnsembleResult]:
    run = config.run
    result = RunEnsemble(
        simulation.model,
        run.n_samples,
        run.strategy,
        simulation.grid,
        run.master_seed,
        worker_count=run.worker_count,
        tolerances=Tolerances(run.abs_tol, run.rel_tol),
        on_chunk_finished=_ProgressCallback(),
    )
    p1, pS = SeriesFromEnsemble(result)
    return _Restored(p1, simulation), _Restored(pS, simulation), result


def _RunMe(
    config: SimulationConfig, simulation: _Simulation
) -> tuple[ObservableSeries, ObservableSeries, MESeries]:
    run = config.run
    series = IntegrateMasterEquation(
        simulation.model,
        simulation.grid,
        tolerances=Tolerances(run.me_abs_tol, run.me_rel_tol),
        dim_cap=run.me_dim_cap,
    )
    p1, pS = SeriesFromMasterEquation(series)
    return _Restored(p1, simulation), _Restored(pS, simulation), series


def _YieldFields(report: YieldReport) -> dict[str, Any]:
    return {
        "singlet_yield": report.singlet_yield,
        "singlet_stderr": report.singlet_stderr,
        "product_yield": report.product_yield,
        "product_stderr": report.product_stderr,
        "survival_at_t_max": report.survival_at_t_max,
    }


def _SeriesYields(
    kinetics: KineticsSpec, p1: ObservableSeries, pS: ObservableSeries
) -> Optional[dict[str, Any]]:
    if not kinetics.is_recombination_form:
        return None
    assert kinetics.k_b is not None and kinetics.k_f is not None
    return _YieldFields(Yields(p1, pS, kinetics.k_b, kinetics.k_f))


def _McwfYields(
    kinetics: KineticsSpec,
    simulation: _Simulation,
    p1: ObservableSeries,
    pS: ObservableSeries,
    result: EnsembleResult,
) -> Optional[dict[str, Any]]:
    """
    Per-trajectory yields when the ensemble ran with the real rates, the series bound
    otherwise.
    """
    if not kinetics.is_recombination_form:
        return None
    if simulation.is_factored:
        return _SeriesYields(kinetics, p1, pS)
    assert kinetics.k_b is not None and kinetics.k_f is not None
    return _YieldFields(EnsembleYields(result, kinetics.k_b, kinetics.k_f))


def _McwfResults(result: EnsembleResult) -> dict[str, Any]:
    return {
        "n_samples": result.n_samples,
        "strategy": result.strategy.value,
        "reacted_fraction": result.reacted_fraction,
        "total_steps": result.total_steps,
        "mean_jump_count": float(np.mean(result.jump_counts)),
    }


def _MeResults(series: MESeries) -> dict[str, Any]:
    return {
        "n_steps": series.n_steps,
        "abs_tol": series.abs_tol,
        "rel_tol": series.rel_tol,
        "max_hermitian_defect": series.max_hermitian_defect,
        "min_eigenvalue": series.min_eigenvalue,
    }


def _Finish(
    config: SimulationConfig,
    command: str,
    writer: OutputWriter,
    timings: Timings,
    results: dict[str, Any],
) -> RunManifest:
    manifest = RunManifest(
        command=command,
        config=ConfigToDict(config),
        master_seed=config.run.master_seed,
        dim=config.system.layout.total_dim,
        nucleus_count=config.system.nucleus_count,
        timings=timings,
        artifacts=tuple(writer.artifacts),
        results=results,
    )
    WriteManifest(writer.directory, manifest)
    log.info(
        "%s finished in %.2f s wall, %.2f s CPU.",
        command,
        timings.wall_seconds,
        timings.cpu_seconds,
    )
    return manifest


def RunCommand(config: SimulationConfig, method: Optional[RunMethod] = None) -> RunManifest:
    """
    Runs ``method`` (by default ``run.method`` of the configuration).

    ``mcwf`` writes ``ensemble.csv``, ``me`` writes ``master_equation.csv``; ``compare`` writes
    both plus ``deviation.csv`` with the f-transformed observables of both methods and their
    difference, and reports the RMS errors ``E1``/``ES`` in the manifest.

    :raises DimensionCapError: for ``me``/``compare`` above ``run.me_dim_cap``, before any
        simulation starts.
    """
    method = method or config.run.method
    if method is not RunMethod.MCWF:
        _CheckMeCap(config)
    writer = OutputWriter(config.output.directory, config.output.formats)
    kinetics = config.system.kinetics
    results: dict[str, Any] = {"method": method.value}
    dim = config.system.layout.total_dim
    with StrictCheckingFor(dim), Measure() as timings:
        simulation = _Prepare(config)
        t_us = simulation.grid
        if method is not RunMethod.ME:
            mc_p1, mc_pS, ensemble = _RunMcwf(config, simulation)
            assert mc_p1.stderr is not None and mc_pS.stderr is not None
            writer.WriteTable(
                "ensemble",
                ENSEMBLE_HEADER,
                [t_us, mc_p1.values, mc_p1.stderr, mc_pS.values, mc_pS.stderr],
            )
            results["mcwf"] = _McwfResults(ensemble)
            results["mcwf_yields"] = _McwfYields(kinetics, simulation, mc_p1, mc_pS, ensemble)
        if method is not RunMethod.MCWF:
            me_p1, me_pS, me_series = _RunMe(config, simulation)
            writer.WriteTable("master_equation", ME_HEADER, [t_us, me_p1.values, me_pS.values])
            results["me"] = _MeResults(me_series)
            results["me_yields"] = _SeriesYields(kinetics, me_p1, me_pS)
        if method is RunMethod.COMPARE:
            k_f = ForwardRate(kinetics)
            f1 = [FTransform(s, k_f) for s in (mc_p1, me_p1)]
            fS = [FTransform(s, k_f) for s in (mc_pS, me_pS)]
            writer.WriteTable(
                "deviation",
                DEVIATION_HEADER,
                [
                    t_us,
                    f1[0].values,
                    f1[1].values,
                    f1[0].values - f1[1].values,
                    fS[0].values,
                    fS[1].values,
                    fS[0].values - fS[1].values,
                ],
            )
            results["E1"] = RmsError(f1[0], f1[1])
            results["ES"] = RmsError(fS[0], fS[1])
            log.info("E1 = %.4g, ES = %.4g", results["E1"], results["ES"])
    return _Finish(config, method.value, writer, timings, results)


def _Column(report: Any, attribute: str, count: int) -> list[float]:
    if report is None:
        return [math.nan] * count
    values = getattr(report, attribute)
    if values is None:
        return [math.nan] * count
    return list(values)


def ConvergeCommand(config: SimulationConfig) -> RunManifest:
    """
    Measures the RMS errors ``E1``/``ES`` of the f-transformed observables against the
    master equation over ``convergence.sample_sizes``, ``convergence.repeats`` ensembles each,
    and writes them to ``convergence.csv``.
    """
    _CheckMeCap(config)
    run = config.run
    writer = OutputWriter(config.output.directory, config.output.formats)
    with StrictCheckingFor(config.system.layout.total_dim), Measure() as timings:
        simulation = _Prepare(config)
        oracle = IntegrateMasterEquation(
            simulation.model,
            simulation.grid,
            tolerances=Tolerances(run.me_abs_tol, run.me_rel_tol),
            dim_cap=run.me_dim_cap,
        )
        # At k_f = 0 the f-transform is the identity.
        if simulation.is_factored:
            kinds = (ObservableKind.P1, ObservableKind.PS)
            k_f = 0.0
        else:
            kinds = (ObservableKind.F1, ObservableKind.FS)
            k_f = ForwardRate(simulation.spec.kinetics)
        reports = ConvergenceStudies(
            simulation.model,
            config.convergence.sample_sizes,
            config.convergence.repeats,
            oracle,
            kinds=kinds,
            k_f=k_f,
            strategy=run.strategy,
            master_seed=run.master_seed,
            worker_count=run.worker_count,
            tolerances=Tolerances(run.abs_tol, run.rel_tol),
        )
        one, singlet = reports[kinds[0]], reports[kinds[1]]
        count = len(one.sample_sizes)
        writer.WriteTable(
            "convergence",
            CONVERGENCE_HEADER,
            [
                one.sample_sizes,
                one.mean_errors,
                _Column(one, "error_stderr", count),
                singlet.mean_errors,
                _Column(singlet, "error_stderr", count),
            ],
        )
        results = {
            "repeats": config.convergence.repeats,
            "E1_slope": one.slope,
            "E1_slope_stderr": one.slope_stderr,
            "ES_slope": singlet.slope,
            "ES_slope_stderr": singlet.slope_stderr,
        }
        log.info("E1 ~ N^%.3f, ES ~ N^%.3f", one.slope, singlet.slope)
    return _Finish(config, "converge", writer, timings, results)


def BenchSystem(
    core: SpinSystemSpec, added_protons: int, hyperfine_mT: float
) -> SpinSystemSpec:
    """
    ``core`` with ``added_protons`` isotropic protons, coupled alternately to the two electrons.
    """
    protons = [
        NucleusSpec(f"bench_H{i + 1}", 2, i % 2, hyperfine_mT) for i in range(added_protons)
    ]
    return attr.evolve(core, nuclei=(*core.nuclei, *protons))


def _TimeMe(config: SimulationConfig, model: ModelOperators, grid: np.ndarray) -> MESeries:
    run = config.run
    return IntegrateMasterEquation(
        model,
        grid,
        tolerances=Tolerances(run.me_abs_tol, run.me_rel_tol),
        dim_cap=run.me_dim_cap,
    )


def BenchCommand(config: SimulationConfig) -> RunManifest:
    """
    Times both methods on the configured system with ``0 .. bench.max_added_protons`` extra
    protons and fits the per-nucleus growth of the time per integration step.

    Monte-Carlo runs use a single worker so timings are comparable. The master equation is
    skipped (``nan`` in the table) above ``run.me_dim_cap``.
    """
    bench = config.bench
    run = config.run
    grid = np.linspace(0.0, bench.t_max, BENCH_GRID_POINTS)
    writer = OutputWriter(config.output.directory, config.output.formats)
    rows: list[tuple[Any, ...]] = []
    with Measure() as timings:
        for added in range(bench.max_added_protons + 1):
            spec = BenchSystem(config.system, added, bench.proton_hyperfine_mT)
            dim = spec.layout.total_dim
            with StrictCheckingFor(dim):
                model = AssembleModel(spec)
                me_seconds, me_steps = math.nan, 0
                if dim <= run.me_dim_cap:
                    with Measure() as me_timings:
                        me_steps = _TimeMe(config, model, grid).n_steps
                    me_seconds = me_timings.wall_seconds
                else:
                    log.info("Skipping the master equation at dim = %d.", dim)
                with Measure() as mc_timings:
                    ensemble = RunEnsemble(
                        model,
                        bench.n_samples,
                        run.strategy,
                        grid,
                        run.master_seed,
                        tolerances=Tolerances(run.abs_tol, run.rel_tol),
                    )
            mc_seconds = mc_timings.wall_seconds
            rows.append(
                (
                    added,
                    dim,
                    me_seconds,
                    me_steps,
                    me_seconds / me_steps if me_steps else math.nan,
                    mc_seconds,
                    ensemble.total_steps,
                    mc_seconds / ensemble.total_steps if ensemble.total_steps else math.nan,
                )
            )
            log.info(
                "%d added protons (dim %d): ME %.3g s, MCWF %.3g s",
                added,
                dim,
                me_seconds,
                mc_seconds,
            )
        writer.WriteTable("bench", BENCH_HEADER, [list(c) for c in zip(*rows)])

    results: dict[str, Any] = {}
    for method, column in (("me", 4), ("mcwf", 7)):
        points = [(row[0], row[column]) for row in rows if math.isfinite(row[column])]
        if len(points) >= 2:
            fit = GrowthFactor([p[0] for p in points], [p[1] for p in points])
            results[f"{method}_growth_factor"] = fit.factor
            results[f"{method}_log_slope_stderr"] = fit.log_slope_stderr
        else:
            results[f"{method}_growth_factor"] = None
    return _Finish(config, "bench", writer, timings, results)
