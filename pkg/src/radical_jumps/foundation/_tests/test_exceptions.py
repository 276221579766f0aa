import pytest

from radical_jumps.foundation import ErrorChainMessage
from radical_jumps.foundation import RadicalJumpsError


class _StepError(RadicalJumpsError):
    pass


def testErrorChainMessage() -> None:
    with pytest.raises(RadicalJumpsError) as excinfo:
        try:
            try:
                raise ValueError("negative step")
            except ValueError as e:
                raise _StepError("integration stopped at t = 0.25 us") from e
        except _StepError:
            raise RadicalJumpsError("trajectory 4 failed")

    assert ErrorChainMessage(excinfo.value) == (
        "RadicalJumpsError: trajectory 4 failed\n"
        "_StepError: integration stopped at t = 0.25 us\n"
        "ValueError: negative step"
    )


def testErrorChainMessageSingle() -> None:
    assert ErrorChainMessage(RadicalJumpsError("no nuclei")) == "RadicalJumpsError: no nuclei"
    assert isinstance(RadicalJumpsError("x"), RuntimeError)
