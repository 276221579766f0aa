"""
Monte-Carlo ensembles against the master-equation oracle on small systems. These are the long
statistical runs; they only run with ``-m slow``.
"""
import numpy as np
import pytest

from radical_jumps.analysis import EnsembleYields
from radical_jumps.analysis import RmsError
from radical_jumps.analysis import SeriesFromEnsemble
from radical_jumps.analysis import SeriesFromMasterEquation
from radical_jumps.analysis import Yields
from radical_jumps.master_equation import IntegrateMasterEquation
from radical_jumps.mcwf import InitialStateStrategy
from radical_jumps.mcwf import RunEnsemble
from radical_jumps.model import AssembleModel
from radical_jumps.model import DissipationSpec
from radical_jumps.model import FieldSpec
from radical_jumps.model import KineticsSpec
from radical_jumps.model import NucleusSpec
from radical_jumps.model import SpinSystemSpec
from radical_jumps.ode import Tolerances

pytestmark = pytest.mark.slow

ORACLE_TOLERANCES = Tolerances(abs_tol=1e-10, rel_tol=1e-10)


def Compare(spec: SpinSystemSpec, n_samples: int, strategy=InitialStateStrategy.SPIN_COHERENT):
    model = AssembleModel(spec)
    grid = np.linspace(0.0, 10.0, 10001)
    oracle = IntegrateMasterEquation(model, grid, tolerances=ORACLE_TOLERANCES)
    result = RunEnsemble(model, n_samples, strategy, grid, master_seed=20, worker_count=4)
    return oracle, result


def testOneProtonAgreesWithOracle(one_proton_spec) -> None:
    oracle, result = Compare(one_proton_spec, 100000)
    exact_p1, exact_pS = SeriesFromMasterEquation(oracle)
    sampled_p1, sampled_pS = SeriesFromEnsemble(result)
    assert RmsError(sampled_p1, exact_p1) <= 5e-3
    assert RmsError(sampled_pS, exact_pS) <= 5e-3

    exact = Yields(exact_p1, exact_pS, k_b=2.0, k_f=0.0)
    sampled = EnsembleYields(result, k_b=2.0, k_f=0.0)
    assert abs(sampled.singlet_yield - exact.singlet_yield) <= 4 * sampled.singlet_stderr


@pytest.mark.parametrize(
    "strategy", [InitialStateStrategy.ZEEMAN_RANDOM, InitialStateStrategy.EXHAUSTIVE]
)
def testStrategiesAgreeWithOracle(one_proton_spec, strategy) -> None:
    oracle, result = Compare(one_proton_spec, 100000, strategy)
    exact_p1, exact_pS = SeriesFromMasterEquation(oracle)
    sampled_p1, sampled_pS = SeriesFromEnsemble(result)
    assert RmsError(sampled_p1, exact_p1) <= 5e-3
    assert RmsError(sampled_pS, exact_pS) <= 5e-3


def testFourNucleiAgreeWithOracle() -> None:
    spec = SpinSystemSpec(
        nuclei=[
            NucleusSpec("N5", 3, 0, 0.5),
            NucleusSpec("H1", 2, 0, 0.4),
            NucleusSpec("H2", 2, 1, 0.8),
            NucleusSpec("H3", 2, 1, 0.3),
        ],
        field=FieldSpec(0.05),
        kinetics=KineticsSpec.FromRecombination(k_b=2.0, k_f=0.0),
        dissipation=DissipationSpec(gamma_rf=(0.2, 0.2)),
    )
    oracle, result = Compare(spec, 200000)
    exact_p1, exact_pS = SeriesFromMasterEquation(oracle)
    sampled_p1, sampled_pS = SeriesFromEnsemble(result)
    assert RmsError(sampled_p1, exact_p1) <= 5e-3
    assert RmsError(sampled_pS, exact_pS) <= 5e-3


# Both estimators are exact at t = 0 (zero stderr); the floor absorbs rounding there.
STDERR_FLOOR = 1e-9


@pytest.fixture(scope="module")
def proton_and_nitrogen_runs():
    spec = SpinSystemSpec(
        nuclei=[NucleusSpec("H1", 2, 0, 0.5), NucleusSpec("N1", 3, 1, 0.3)],
        field=FieldSpec(0.05),
        kinetics=KineticsSpec.FromRecombination(k_b=2.0, k_f=0.0),
        dissipation=DissipationSpec(gamma_rf=(0.2, 0.2)),
    )
    model = AssembleModel(spec)
    grid = np.linspace(0.0, 3.0, 301)
    oracle = IntegrateMasterEquation(model, grid, tolerances=ORACLE_TOLERANCES)
    results = {
        strategy: RunEnsemble(model, 10000, strategy, grid, master_seed=31, worker_count=4)
        for strategy in InitialStateStrategy
    }
    return oracle, results


def AssertWithinStandardErrors(sampled, expected, stderr) -> None:
    bound = 4 * stderr + STDERR_FLOOR
    worst = int(np.argmax(np.abs(sampled - expected) - bound))
    assert np.all(np.abs(sampled - expected) <= bound), (
        f"off by {sampled[worst] - expected[worst]:.3g} at index {worst},"
        f" 4 stderr = {4 * stderr[worst]:.3g}"
    )


@pytest.mark.parametrize("strategy", list(InitialStateStrategy))
def testEveryStrategyAgreesWithOracleOnTwoNuclei(proton_and_nitrogen_runs, strategy) -> None:
    oracle, results = proton_and_nitrogen_runs
    exact_p1, exact_pS = SeriesFromMasterEquation(oracle)
    sampled_p1, sampled_pS = SeriesFromEnsemble(results[strategy])
    AssertWithinStandardErrors(sampled_p1.values, exact_p1.values, sampled_p1.stderr)
    AssertWithinStandardErrors(sampled_pS.values, exact_pS.values, sampled_pS.stderr)


@pytest.mark.parametrize(
    "first, second",
    [
        (InitialStateStrategy.SPIN_COHERENT, InitialStateStrategy.ZEEMAN_RANDOM),
        (InitialStateStrategy.SPIN_COHERENT, InitialStateStrategy.EXHAUSTIVE),
        (InitialStateStrategy.ZEEMAN_RANDOM, InitialStateStrategy.EXHAUSTIVE),
    ],
)
def testStrategiesAgreeWithEachOtherOnTwoNuclei(proton_and_nitrogen_runs, first, second) -> None:
    _, results = proton_and_nitrogen_runs
    for a, b in zip(SeriesFromEnsemble(results[first]), SeriesFromEnsemble(results[second])):
        combined = np.sqrt(a.stderr**2 + b.stderr**2)
        AssertWithinStandardErrors(a.values, b.values, combined)
