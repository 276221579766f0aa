# mypy: disallow-untyped-defs
"""
Initial states of Monte-Carlo trajectories.

The pair is born in the electronic singlet with the nuclei in an unknown (maximally mixed)
state. Each trajectory starts from ``|S> x |chi>``, where ``|chi>`` is a nuclear product state
drawn so that the ensemble average of ``|chi><chi|`` is ``1 / Z``:

* ``spin_coherent``: every nucleus in a spin-coherent state pointing in a uniformly random
  direction (the coherent states resolve the identity over the sphere);
* ``zeeman_random``: every nucleus in a uniformly random ``|I, m>`` basis state;
* ``exhaustive``: the nuclear product basis enumerated in order, one state per trajectory.
"""
from typing import Optional

import attr
import enum
import math
import numpy as np
import scipy.special

from oop_ext.interface import ImplementsInterface
from oop_ext.interface import Interface

from radical_jumps.foundation.exceptions import RadicalJumpsError
from radical_jumps.spin import ElectronSinglet
from radical_jumps.spin import HilbertLayout


class EnumerationExhaustedError(RadicalJumpsError):
    """
    An exhaustive enumeration was asked for a state past the last nuclear basis state.
    """


class InitialStateStrategy(enum.Enum):
    SPIN_COHERENT = "spin_coherent"
    ZEEMAN_RANDOM = "zeeman_random"
    EXHAUSTIVE = "exhaustive"


@attr.s(auto_attribs=True, eq=False)
class RandomStream:
    """
    Random numbers of one trajectory.

    The generator is fully determined by ``(master_seed, trajectory_index)``: it is seeded from
    ``SeedSequence(master_seed, spawn_key=(trajectory_index,))``, which is what
    ``SeedSequence.spawn`` hands to the child with that index. Distinct indices therefore get
    independent streams, no matter which worker runs them or in which order.
    """

    master_seed: int
    trajectory_index: int
    generator: np.random.Generator = attr.ib(init=False, repr=False)

    def __attrs_post_init__(self) -> None:
        sequence = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.trajectory_index,)
        )
        self.generator = np.random.default_rng(sequence)


def SpinCoherentState(multiplicity: int, theta: float, phi: float) -> np.ndarray:
    """
    Returns ``|theta, phi>``, the state ``|I, I>`` rotated towards ``(theta, phi)``, in the
    ``|I, m>`` basis ordered ``m = I ... -I``.
    """
    two_i = multiplicity - 1
    k = np.arange(multiplicity)  # k = I - m
    m = two_i / 2 - k
    amplitudes = (
        np.sqrt(scipy.special.binom(two_i, k))
        * np.cos(theta / 2) ** (two_i - k)
        * np.sin(theta / 2) ** k
        * np.exp(-1j * m * phi)
    )
    return amplitudes.astype(complex)


class IInitialStateSampler(Interface):
    """
    Draws the nuclear part of a trajectory's initial state.
    """

    def SampleNuclearState(
        self, layout: HilbertLayout, stream: RandomStream
    ) -> np.ndarray:
        """
        Returns a unit-norm vector of length ``layout.nuclear_state_count`` ordered as the
        Kronecker product of the nuclear sites.
        """


def _ProductState(factors: list[np.ndarray]) -> np.ndarray:
    state = np.ones(1, dtype=complex)
    for factor in factors:
        state = np.kron(state, factor)
    return state


@ImplementsInterface(IInitialStateSampler)
class SpinCoherentSampler:
    def SampleNuclearState(
        self, layout: HilbertLayout, stream: RandomStream
    ) -> np.ndarray:
        rng = stream.generator
        factors = []
        for multiplicity in layout.nuclear_dims:
            cos_theta = rng.uniform(-1.0, 1.0)
            phi = rng.uniform(0.0, 2 * math.pi)
            factors.append(SpinCoherentState(multiplicity, math.acos(cos_theta), phi))
        return _ProductState(factors)


@ImplementsInterface(IInitialStateSampler)
class ZeemanRandomSampler:
    def SampleNuclearState(
        self, layout: HilbertLayout, stream: RandomStream
    ) -> np.ndarray:
        rng = stream.generator
        factors = []
        for multiplicity in layout.nuclear_dims:
            factor = np.zeros(multiplicity, dtype=complex)
            factor[rng.integers(multiplicity)] = 1.0
            factors.append(factor)
        return _ProductState(factors)


@ImplementsInterface(IInitialStateSampler)
class ExhaustiveSampler:
    """
    Returns nuclear basis state number ``trajectory_index``.

    With ``cycle`` set, indices past ``Z`` wrap around, so ensembles of any size weight every
    basis state as evenly as possible; otherwise they raise :class:`EnumerationExhaustedError`.
    """

    def __init__(self, cycle: bool = False) -> None:
        self.cycle = cycle

    def SampleNuclearState(
        self, layout: HilbertLayout, stream: RandomStream
    ) -> np.ndarray:
        count = layout.nuclear_state_count
        index = stream.trajectory_index
        if self.cycle:
            index %= count
        elif index >= count:
            raise EnumerationExhaustedError(
                f"Trajectory {index} is past the {count} nuclear basis states."
            )
        state = np.zeros(count, dtype=complex)
        state[index] = 1.0
        return state


def CreateSampler(
    strategy: InitialStateStrategy, cycle: bool = False
) -> IInitialStateSampler:
    if strategy is InitialStateStrategy.SPIN_COHERENT:
        return SpinCoherentSampler()
    if strategy is InitialStateStrategy.ZEEMAN_RANDOM:
        return ZeemanRandomSampler()
    return ExhaustiveSampler(cycle=cycle)


def SampleInitialState(
    layout: HilbertLayout,
    strategy: InitialStateStrategy,
    stream: RandomStream,
    sampler: Optional[IInitialStateSampler] = None,
) -> np.ndarray:
    """
    Returns ``|S> x |chi>`` with ``|chi>`` drawn by ``strategy`` (or by ``sampler`` if given).

    :raises EnumerationExhaustedError:
        for ``exhaustive`` when the trajectory index is not below ``Z``.
    """
    if sampler is None:
        sampler = CreateSampler(strategy)
    nuclear = sampler.SampleNuclearState(layout, stream)
    return np.kron(ElectronSinglet(), nuclear)
