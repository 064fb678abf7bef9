"""Exception types shared across the toolkit.

The CLI maps these onto its exit-code contract: usage/parse problems exit 1,
domain errors (timing violations, rank deficiency, ...) exit 2.
"""


class VampireError(Exception):
    """Base class for all toolkit errors."""


class TraceParseError(VampireError):
    """Malformed trace input. Carries the 1-based line number and, when
    known, the source file name."""

    def __init__(self, line_no: int, message: str, source: str | None = None):
        where = f"line {line_no}" if source is None else f"{source}, line {line_no}"
        super().__init__(f"{where}: {message}")
        self.line_no = line_no
        self.message = message
        self.source = source

    def with_source(self, source: str) -> "TraceParseError":
        return TraceParseError(self.line_no, self.message, source)


class IllegalCommand(VampireError):
    """A command that is not legal in the current module state."""

    def __init__(self, cycle: int, message: str, bank: int | None = None):
        where = f"cycle {cycle}" + (f", bank {bank}" if bank is not None else "")
        super().__init__(f"{where}: {message}")
        self.cycle = cycle
        self.bank = bank


class TimingViolationError(VampireError):
    """Raised by the energy engine when the input trace fails timing checks."""

    def __init__(self, violations):
        self.violations = list(violations)
        first = self.violations[0]
        super().__init__(
            f"{len(self.violations)} timing violation(s); first: {first}"
        )


class RankDeficient(VampireError):
    """Regression design matrix does not have full column rank."""


class DegenerateFit(VampireError):
    """Frequency extrapolation attempted on a single distinct frequency."""


class MissingKey(VampireError):
    """A requested IDD key is absent from a profile current map."""


class NoPayloads(VampireError):
    """Codebook construction requires at least one payload-carrying command."""


class LengthMismatch(VampireError):
    """Predicted and actual vectors differ in length."""


class NonPositiveActual(VampireError):
    """Percentage errors are undefined for non-positive reference values."""


class ProfileError(VampireError):
    """Profile file is malformed or violates a profile invariant."""
