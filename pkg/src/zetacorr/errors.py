"""Exception types shared across the package."""


class ZetaCorrError(Exception):
    """Base class for all library errors."""


class PoleAtZero(ZetaCorrError):
    """z(x) evaluated at a pole x = 2 pi i k.

    ``laurent`` holds the leading Laurent data at the pole so callers can
    implement their own cancellation.
    """

    def __init__(self, x, laurent=None):
        super().__init__(f"z(x) has a pole at x={x!r}")
        self.x = x
        self.laurent = laurent or {}


class PoleAtOne(ZetaCorrError):
    """zeta(s) requested exactly at s = 1."""


class ZeroDenominator(ZetaCorrError):
    """A logarithmic derivative was requested at a zero of the function."""


class PoleOfGamma(ZetaCorrError):
    """Gamma function evaluated at a nonpositive integer."""


class PoleCollision(ZetaCorrError):
    """Two shifts collide so that a formula hits a pole."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class CutoffTooSmall(ZetaCorrError):
    pass


class ArityMismatch(ZetaCorrError):
    pass


class StripViolation(ZetaCorrError):
    pass


class LocalPole(ZetaCorrError):
    pass


class QuadratureNotConverged(ZetaCorrError):
    pass


class DenominatorNearZero(ZetaCorrError):
    pass


class TooLarge(ZetaCorrError):
    """Combinatorial guard exceeded."""


class SideConditionViolated(ZetaCorrError):
    pass


class ImaginaryResidue(ZetaCorrError):
    """An assembled correlation came out with a non-negligible imaginary part."""


class ProbeNotIsolated(ZetaCorrError):
    """A residue probe circle does not isolate a single simple pole."""


class NotAscending(ZetaCorrError):
    def __init__(self, line):
        super().__init__(f"ordinates not strictly ascending at line {line}")
        self.line = line


class ParseError(ZetaCorrError):
    def __init__(self, line, text=""):
        super().__init__(f"cannot parse line {line}: {text!r}")
        self.line = line


class EmptyFile(ZetaCorrError):
    pass


class WindowEmpty(ZetaCorrError):
    pass


class SupportTooWide(ZetaCorrError):
    pass


class MissingInput(ZetaCorrError):
    pass


class ConfigError(ZetaCorrError):
    """Invalid command-line or run configuration."""
