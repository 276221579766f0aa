# mypy: disallow-untyped-defs
import pytest

from radical_jumps.model import AxialHyperfine
from radical_jumps.model import DissipationSpec
from radical_jumps.model import FieldSpec
from radical_jumps.model import KineticsSpec
from radical_jumps.model import NucleusSpec
from radical_jumps.model import SpinSystemSpec


@pytest.fixture
def one_proton_spec() -> SpinSystemSpec:
    """
    The small validation system: one proton with an isotropic 1 mT coupling on electron 1,
    a weak field along z, singlet recombination and random-field relaxation on both radicals.
    """
    return SpinSystemSpec(
        nuclei=[NucleusSpec("H1", 2, 0, 1.0)],
        field=FieldSpec(0.05, (0, 0, 1)),
        kinetics=KineticsSpec.FromRecombination(k_b=2.0, k_f=0.0),
        dissipation=DissipationSpec(gamma_rf=(0.2, 0.2)),
    )


@pytest.fixture
def all_channels_spec() -> SpinSystemSpec:
    """
    Two nuclei on different electrons (one anisotropic), an oblique field and every kind of
    kinetic and dissipative channel.
    """
    return SpinSystemSpec(
        nuclei=[
            NucleusSpec("N5", 3, 0, AxialHyperfine(0.5, 0.3, (0, 0, 1))),
            NucleusSpec("H1", 2, 1, 0.8),
        ],
        field=FieldSpec.FromAngles(0.5, 0.7, 0.3),
        kinetics=KineticsSpec.FromRecombination(k_b=0.5, k_f=1.0),
        dissipation=DissipationSpec(gamma_st=1.5, gamma_rf=(0.2, 0.3)),
    )
