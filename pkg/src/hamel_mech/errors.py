"""Exception hierarchy shared by all modules.

Every error carries a short machine-parsable ``reason`` so the CLI can map it
to an exit status without string matching on messages.
"""


class HamelMechError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 3

    def __init__(self, reason, detail=None):
        self.reason = reason
        self.detail = detail
        super().__init__(reason if detail is None else f"{reason}: {detail}")


class InputError(HamelMechError, ValueError):
    """Arguments have the wrong shape, group tag, or domain."""

    exit_code = 2


class ConfigError(InputError):
    """A config document violates the schema; ``reason`` names the field path."""


class BranchError(HamelMechError, ValueError):
    """Log requested at a rotation angle where the principal branch is ambiguous."""


class SingularMapError(HamelMechError, ArithmeticError):
    """A quasi-velocity matrix A(q) could not be inverted."""


class InertiaError(HamelMechError, ArithmeticError):
    """A mass/inertia matrix that must be SPD is not."""


class StructureError(HamelMechError, ValueError):
    """A map lacks the block structure an operation requires."""


class UnsupportedGroupError(HamelMechError, ValueError):
    """Operation is not defined for the given group tag."""

    exit_code = 2


class DivergenceError(HamelMechError, ArithmeticError):
    """Integration produced non-finite values."""

    def __init__(self, reason, t_last_good):
        self.t_last_good = t_last_good
        super().__init__(reason, f"last good time {t_last_good!r}")
