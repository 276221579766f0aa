# mypy: disallow-untyped-defs
"""
Global switch for expensive invariant checks.

Some invariants can only be verified with dense linear algebra (eigenvalues of the dissipative
part of the effective Hamiltonian, positivity of a density matrix). These checks are cheap for
the small systems used in tests and in validation runs, and prohibitive for the large systems
the Monte-Carlo engine is meant for, so they are guarded by this switch.

Use "IsStrictChecking()" instead of reading the module variable directly, as the command line
front end flips the value depending on the problem size.
"""

_strict_checking = True

# Dense checks are skipped above this dimension even when strict checking is on.
STRICT_CHECK_MAX_DIM = 1024


def IsStrictChecking() -> bool:
    """
    Returns True if expensive invariant checks should run.
    """
    return _strict_checking


def SetStrictChecking(strict: bool) -> bool:
    """
    Sets the strict-checking value manually.

    :param bool strict:
        The new value.

    :returns bool:
        Returns the original value, before the given value is set.
    """
    global _strict_checking
    try:
        return _strict_checking
    finally:
        _strict_checking = strict


def ShouldCheckDense(dim: int) -> bool:
    """
    Returns True if a dense check on a ``dim`` x ``dim`` matrix should run now.
    """
    return _strict_checking and dim <= STRICT_CHECK_MAX_DIM
