import logging
import math

import attr
import numpy as np
import pytest
import scipy.linalg

from radical_jumps.foundation.checks import SetStrictChecking
from radical_jumps.master_equation import DensityMatrix
from radical_jumps.master_equation import DimensionCapError
from radical_jumps.master_equation import EstimateMemoryBytes
from radical_jumps.master_equation import InitialDensity
from radical_jumps.master_equation import IntegrateMasterEquation
from radical_jumps.master_equation import LiouvillianRhs
from radical_jumps.model import AssembleModel
from radical_jumps.model import DissipationSpec
from radical_jumps.model import FieldSpec
from radical_jumps.model import KineticsSpec
from radical_jumps.model import SpinSystemSpec
from radical_jumps.model import StDephasingForm
from radical_jumps.ode import Tolerances
from radical_jumps.spin import HilbertLayout
from radical_jumps.spin import LayoutError


def RandomDensity(dim: int, rng: np.random.Generator) -> DensityMatrix:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def testInitialDensityBarePair() -> None:
    rho = InitialDensity(HilbertLayout.ForNuclei([]))
    assert rho.dim == 4
    assert rho.Trace() == pytest.approx(1.0, abs=1e-15)
    assert np.linalg.matrix_rank(rho.entries) == 1
    rho.Validate()


def testInitialDensityWithNuclei(one_proton_spec) -> None:
    model = AssembleModel(one_proton_spec)
    rho = InitialDensity(model.layout)
    assert rho.Expectation(model.P_S) == pytest.approx(1.0, abs=1e-12)
    assert rho.Expectation(model.P_T) == pytest.approx(0.0, abs=1e-12)
    z = model.layout.nuclear_state_count
    scaled = z * rho.entries
    assert np.abs(scaled @ scaled - scaled).max() <= 1e-12


def testDensityValidation() -> None:
    with pytest.raises(ValueError, match="square"):
        DensityMatrix(np.zeros((2, 3)))
    with pytest.raises(ValueError, match="unit trace"):
        DensityMatrix(np.eye(2)).Validate()
    with pytest.raises(ValueError, match="not Hermitian"):
        DensityMatrix([[0.5, 0.1], [0.0, 0.5]]).Validate()
    with pytest.raises(ValueError, match="negative eigenvalue"):
        DensityMatrix([[1.5, 0.0], [0.0, -0.5]]).Validate()


def testNegativeEigenvalueSkippedWithoutStrictChecking() -> None:
    previous = SetStrictChecking(False)
    try:
        DensityMatrix([[1.5, 0.0], [0.0, -0.5]]).Validate()
    finally:
        SetStrictChecking(previous)


def testRhsForwardDecayOnly() -> None:
    spec = SpinSystemSpec(
        nuclei=[], field=FieldSpec(0.0), kinetics=KineticsSpec.FromRecombination(0.0, 1.5)
    )
    model = AssembleModel(spec)
    rho = RandomDensity(4, np.random.default_rng(0))
    rhs = LiouvillianRhs(model, rho)
    assert np.abs(rhs.entries + 1.5 * rho.entries).max() <= 1e-12


def testRhsPreservesTraceWithoutKinetics(all_channels_spec) -> None:
    spec = attr.evolve(all_channels_spec, kinetics=KineticsSpec.FromChannelRates(0.0, 0.0))
    model = AssembleModel(spec)
    rng = np.random.default_rng(1)
    for _ in range(10):
        rhs = LiouvillianRhs(model, RandomDensity(model.dim, rng))
        assert abs(np.trace(rhs.entries)) <= 1e-12


def testRhsTraceDecaysAtReactionRate(all_channels_spec) -> None:
    model = AssembleModel(all_channels_spec)
    k_s = all_channels_spec.kinetics.k_s
    k_t = all_channels_spec.kinetics.k_t
    rng = np.random.default_rng(2)
    for _ in range(10):
        rho = RandomDensity(model.dim, rng)
        rhs = LiouvillianRhs(model, rho)
        expected = -k_s * rho.Expectation(model.P_S) - k_t * rho.Expectation(model.P_T)
        assert abs(np.trace(rhs.entries) - expected) <= 1e-12


def testRhsKeepsHermiticity(all_channels_spec) -> None:
    model = AssembleModel(all_channels_spec)
    rhs = LiouvillianRhs(model, RandomDensity(model.dim, np.random.default_rng(3)))
    assert rhs.HermitianDefect() <= 1e-12


def testRhsDephasingFormsAgree(all_channels_spec) -> None:
    lindblad = AssembleModel(all_channels_spec, StDephasingForm.LINDBLAD)
    direct = AssembleModel(all_channels_spec, StDephasingForm.DIRECT)
    rng = np.random.default_rng(4)
    for _ in range(20):
        rho = RandomDensity(lindblad.dim, rng)
        difference = LiouvillianRhs(lindblad, rho).entries - LiouvillianRhs(direct, rho).entries
        assert np.abs(difference).max() <= 1e-12


def testRhsDimensionMismatch(one_proton_spec) -> None:
    model = AssembleModel(one_proton_spec)
    with pytest.raises(LayoutError, match="Dimension mismatch"):
        LiouvillianRhs(model, DensityMatrix(np.eye(4) / 4))


def testUniformDecay(one_proton_spec) -> None:
    spec = attr.evolve(one_proton_spec, kinetics=KineticsSpec.FromChannelRates(1.0, 1.0))
    model = AssembleModel(spec)
    grid = np.linspace(0.0, 10.0, 1001)
    series = IntegrateMasterEquation(model, grid)
    assert np.abs(series.p1 - np.exp(-grid)).max() <= 1e-7
    assert series.abs_tol == 1e-8 and series.rel_tol == 1e-8
    assert series.n_steps > 0


def ExactClosedSinglet(model, grid: np.ndarray) -> np.ndarray:
    energies, vectors = scipy.linalg.eigh(model.H.ToDense())
    rho0 = InitialDensity(model.layout).entries
    p_s = model.P_S.ToDense()
    values = []
    for t in grid:
        u = vectors @ np.diag(np.exp(-1j * energies * t)) @ vectors.conj().T
        values.append(np.trace(p_s @ u @ rho0 @ u.conj().T).real)
    return np.array(values)


def testClosedSystemMatchesEigendecomposition(one_proton_spec) -> None:
    spec = attr.evolve(
        one_proton_spec,
        field=FieldSpec(0.0),
        kinetics=KineticsSpec.FromChannelRates(0.0, 0.0),
        dissipation=DissipationSpec(),
    )
    model = AssembleModel(spec)
    grid = np.linspace(0.0, 1.0, 201)
    series = IntegrateMasterEquation(
        model, grid, tolerances=Tolerances(abs_tol=1e-10, rel_tol=1e-10)
    )
    expected = ExactClosedSinglet(model, grid)
    assert series.pS[0] == pytest.approx(1.0, abs=1e-12)
    assert np.abs(series.pS - expected).max() <= 1e-7
    assert series.pS.min() == pytest.approx(expected.min(), abs=1e-7)
    assert series.pS.max() == pytest.approx(expected.max(), abs=1e-7)
    assert np.abs(series.p1 - 1.0).max() <= 1e-8


def testDephasingFormsGiveSameSeries(one_proton_spec) -> None:
    spec = attr.evolve(
        one_proton_spec, dissipation=DissipationSpec(gamma_st=1.5, gamma_rf=(0.2, 0.2))
    )
    grid = np.linspace(0.0, 3.0, 61)
    tolerances = Tolerances(abs_tol=1e-12, rel_tol=1e-12)
    lindblad = IntegrateMasterEquation(
        AssembleModel(spec, StDephasingForm.LINDBLAD), grid, tolerances=tolerances
    )
    direct = IntegrateMasterEquation(
        AssembleModel(spec, StDephasingForm.DIRECT), grid, tolerances=tolerances
    )
    assert np.abs(lindblad.p1 - direct.p1).max() <= 1e-9
    assert np.abs(lindblad.pS - direct.pS).max() <= 1e-9


def testConservationWithoutKinetics(one_proton_spec) -> None:
    spec = attr.evolve(one_proton_spec, kinetics=KineticsSpec.FromChannelRates(0.0, 0.0))
    model = AssembleModel(spec)
    grid = np.linspace(0.0, 24.0, 241)
    series = IntegrateMasterEquation(model, grid)
    assert np.abs(series.p1 - 1.0).max() <= 1e-8
    assert series.max_hermitian_defect <= 1e-9
    assert series.min_eigenvalue is not None
    assert series.min_eigenvalue >= -1e-8
    assert series.final_density.Trace() == pytest.approx(1.0, abs=1e-8)


def testObservablesOrdered(one_proton_spec) -> None:
    model = AssembleModel(one_proton_spec)
    series = IntegrateMasterEquation(model, np.linspace(0.0, 5.0, 501))
    assert np.all(np.diff(series.p1) <= 1e-9)
    assert np.all(series.pS <= series.p1 + 1e-9)
    assert series.p1[0] == pytest.approx(1.0, abs=1e-12)
    assert series.t_max == 5.0


def testIntegrationBeyondGrid(one_proton_spec) -> None:
    model = AssembleModel(one_proton_spec)
    series = IntegrateMasterEquation(model, [0.0, 1.0], t_max=4.0)
    assert series.t_max == 4.0
    assert len(series.p1) == 2
    assert series.final_density.Trace() < series.p1[-1]


def testSingleInstant(one_proton_spec) -> None:
    model = AssembleModel(one_proton_spec)
    series = IntegrateMasterEquation(model, [0.0])
    assert series.n_steps == 0
    assert series.p1[0] == pytest.approx(1.0)
    assert series.pS[0] == pytest.approx(1.0)


def testCustomInitialState(one_proton_spec) -> None:
    model = AssembleModel(one_proton_spec)
    rho0 = DensityMatrix(model.P_T.ToDense() / model.P_T.Trace().real)
    series = IntegrateMasterEquation(model, [0.0, 0.5], rho0=rho0)
    assert series.pS[0] == pytest.approx(0.0, abs=1e-12)
    assert series.pS[1] > 0

    with pytest.raises(ValueError, match="unit trace"):
        IntegrateMasterEquation(model, [0.0, 0.5], rho0=DensityMatrix(np.eye(8)))
    with pytest.raises(LayoutError):
        IntegrateMasterEquation(model, [0.0, 0.5], rho0=DensityMatrix(np.eye(4) / 4))


def testInvalidGrid(one_proton_spec) -> None:
    model = AssembleModel(one_proton_spec)
    with pytest.raises(ValueError, match="strictly increasing"):
        IntegrateMasterEquation(model, [0.0, 1.0, 1.0])
    with pytest.raises(ValueError, match="must lie within"):
        IntegrateMasterEquation(model, [0.0, 2.0], t_max=1.0)


def testDimensionCap(one_proton_spec) -> None:
    model = AssembleModel(one_proton_spec)
    with pytest.raises(DimensionCapError) as exc_info:
        IntegrateMasterEquation(model, [0.0, 1.0], dim_cap=4)
    error = exc_info.value
    assert (error.dim, error.cap) == (8, 4)
    assert error.estimated_bytes == EstimateMemoryBytes(8)
    assert "exceeds the master-equation cap of 4" in str(error)
    assert EstimateMemoryBytes(4096) > 2**30


def testPositivityWarning(one_proton_spec, mocker, caplog) -> None:
    from radical_jumps.master_equation import _liouvillian

    mocker.patch.object(_liouvillian, "POSITIVITY_WARNING", 1.0)
    model = AssembleModel(one_proton_spec)
    with caplog.at_level(logging.WARNING, logger=_liouvillian.__name__):
        IntegrateMasterEquation(model, [0.0, 0.5])
    assert "has eigenvalue" in caplog.text


def testExponentialDecayUnaffectedByPhase() -> None:
    # A pure Zeeman field only rotates the triplet manifold; equal rates still decay uniformly.
    spec = SpinSystemSpec(
        nuclei=[],
        field=FieldSpec(1.0),
        kinetics=KineticsSpec.FromChannelRates(0.7, 0.7),
    )
    series = IntegrateMasterEquation(AssembleModel(spec), [0.0, 1.0, 2.0])
    assert series.p1 == pytest.approx(np.exp(-0.7 * np.array([0.0, 1.0, 2.0])), abs=1e-7)
    assert math.isclose(series.pS[0], 1.0, abs_tol=1e-12)
