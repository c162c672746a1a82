"""Exception hierarchy shared across the toolkit."""


class BellSimError(Exception):
    """Base class for every error raised by this package."""


class NonFiniteInput(BellSimError, ValueError):
    """An input that must be finite was NaN or infinite."""


class EntanglementOutOfRange(BellSimError, ValueError):
    """|f| > 1.  Relabel the H/V basis (f -> 1/f) instead of passing it in;
    silently relabeling here would flip the meaning of every angle."""


class PolarizerAbsent(BellSimError, ValueError):
    """The operation needs a polarizer in the beam but the setting is the
    removed-polarizer (wide open) variant."""


class DegenerateCurve(BellSimError, ArithmeticError):
    """The coincidence curve vanishes identically; visibility is undefined."""


class MissingSetting(BellSimError, ValueError):
    """A canonical measurement setting has no count record."""


class DuplicateSetting(BellSimError, ValueError):
    """A measurement setting appears more than once in the records."""


class ZeroDuration(BellSimError, ValueError):
    """A count record has a nonpositive accumulation time."""


class InvalidGeometry(BellSimError, ValueError):
    """An apparatus-geometry field is nonpositive or out of range."""


class NonPositiveRate(BellSimError, ValueError):
    """A count rate that must be positive was zero or negative."""


class NoViolationAtUnitEfficiency(BellSimError, ArithmeticError):
    """No analyzer angles violate the inequality even with perfect
    detectors, so a critical efficiency does not exist."""


class UnsortedStream(BellSimError, ValueError):
    """Event timestamps handed to the coincidence matcher are not sorted."""


class ConfigError(BellSimError, ValueError):
    """A configuration file is malformed or has out-of-range fields."""
