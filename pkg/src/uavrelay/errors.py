"""Exception hierarchy.

Usage-type errors (bad input, unsupported request) map to CLI exit code 2;
numerical failures map to exit code 1.
"""


class RelayError(Exception):
    """Base class for all package errors."""


class UsageError(RelayError, ValueError):
    """Invalid arguments or inconsistent inputs."""


class ScenarioParseError(UsageError):
    """A scenario document failed to parse or validate.

    ``field`` holds the dotted path of the offending entry (``gt_density[1].hi``)
    and ``line`` the 1-based line number when it is known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(field)
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class DomainError(UsageError):
    """A power level lies outside the domain of a closed-form tradeoff."""


class UnsupportedFeatureError(UsageError, NotImplementedError):
    """Requested combination is outside what the library implements."""


class NumericalError(RelayError, RuntimeError):
    """A numerical procedure failed."""


class EmptyCellError(NumericalError):
    """A relay kept an empty cell after the reseeding budget ran out."""

    def __init__(self, cell, reseeds):
        self.cell = cell
        self.reseeds = reseeds
        super().__init__(
            f"relay {cell} has an empty cell after {reseeds} reseeds; "
            "increase the sample count or reduce the number of relays"
        )
