# mypy: disallow-untyped-defs
"""
Base error type shared by every ``radical_jumps`` sub-package.

Sub-packages declare their own subclasses next to the code raising them, so callers can catch
``RadicalJumpsError`` for "anything this library refused to do" and the specific class when
they care about one failure mode.
"""


class RadicalJumpsError(RuntimeError):
    """
    Root of all errors raised by ``radical_jumps``.
    """


def ErrorChainMessage(exception: BaseException) -> str:
    """
    Renders the message of ``exception`` followed by the messages of its causes.

    Errors raised deep inside a trajectory are re-raised with context (trajectory index, last
    good time, ...) using ``raise ... from``; the command line shows the whole chain, one message
    per line, outermost first.
    """
    messages = []
    seen: set[int] = set()
    exc: BaseException | None = exception
    while exc is not None and id(exc) not in seen:
        seen.add(id(exc))
        messages.append(f"{exc.__class__.__name__}: {exc}")
        exc = exc.__cause__ or exc.__context__
    return "\n".join(messages)
