from .checks import IsStrictChecking
from .checks import SetStrictChecking
from .checks import ShouldCheckDense
from .exceptions import ErrorChainMessage
from .exceptions import RadicalJumpsError

__all__ = [
    "ErrorChainMessage",
    "IsStrictChecking",
    "RadicalJumpsError",
    "SetStrictChecking",
    "ShouldCheckDense",
]
