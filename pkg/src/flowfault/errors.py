"""Exception hierarchy.

Every domain error derives from :class:`FlowFaultError` so the CLI can turn
it into a one-line diagnostic. The class name is the error name reported to
the user.
"""


class FlowFaultError(Exception):
    """Base class for all domain errors."""


# ingestion / series handling
class MalformedRow(FlowFaultError, ValueError):
    pass


class IndexGap(FlowFaultError, ValueError):
    pass


class NonFinite(FlowFaultError, ValueError):
    pass


class OutOfRange(FlowFaultError, IndexError):
    pass


class InvalidSplit(FlowFaultError, ValueError):
    pass


class InvalidConfig(FlowFaultError, ValueError):
    pass


# forecasting
class EmptyHistory(FlowFaultError, ValueError):
    pass


class SeriesTooShort(FlowFaultError, ValueError):
    pass


class WrongWindowLength(FlowFaultError, ValueError):
    pass


class ModelKindMismatch(FlowFaultError, TypeError):
    pass


class NonFiniteLoss(FlowFaultError, ArithmeticError):
    pass


class VersionMismatch(FlowFaultError, ValueError):
    pass


class CorruptFile(FlowFaultError, ValueError):
    pass


# residue analysis / alarms
class NoOverlap(FlowFaultError, ValueError):
    pass


class WindowTooLarge(FlowFaultError, ValueError):
    pass


class WindowTooSmall(FlowFaultError, ValueError):
    pass


class EmptyStats(FlowFaultError, ValueError):
    pass


class UnsortedEvents(FlowFaultError, ValueError):
    pass


# fault injection
class InvalidSpec(FlowFaultError, ValueError):
    pass


class ReplayWindowUnavailable(FlowFaultError, ValueError):
    pass


# evaluation
class NoCommonRange(FlowFaultError, ValueError):
    pass


class NoFaultInMask(FlowFaultError, ValueError):
    pass


class UsageError(FlowFaultError):
    pass
