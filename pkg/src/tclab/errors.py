"""Exception hierarchy. Every error names the offending object or index."""


class TclabError(Exception):
    """Base class for all library errors."""


# filtered space construction and access
class SpaceError(TclabError):
    pass


class BadProbabilities(SpaceError):
    pass


class NontrivialRoot(SpaceError):
    pass


class NonRefiningFiltration(SpaceError):
    pass


class TimeOutOfRange(SpaceError):
    pass


class NotMeasurable(SpaceError):
    pass


class SpaceMismatch(SpaceError):
    pass


class AdaptednessError(NotMeasurable):
    pass


# conditional operators and measures
class BadAlpha(TclabError):
    pass


class BadX(TclabError):
    pass


class EmptyFamily(TclabError):
    pass


# update rules
class NotOneStep(TclabError):
    pass


class TimeOrder(TclabError):
    pass


class EmptyBenchmark(TclabError):
    pass


class NonInvertibleTransform(TclabError):
    pass


# consistency checking
class KindMismatch(TclabError):
    pass


class EquivalenceBroken(TclabError):
    """Conditions that must coincide disagreed: an implementation bug."""


class NotProjective(TclabError):
    pass


class HypothesisFailed(TclabError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# converters
class NotDecreasingFamily(TclabError):
    pass


class NotTranslationInvariant(TclabError):
    pass


class BracketExhausted(TclabError):
    pass


# ingestion
class SchemaError(TclabError):
    pass


class UnknownIdentifier(TclabError):
    """A measure, rule, family or payoff name that the registry does not know."""


class UsageError(TclabError):
    """Command-line options that contradict each other."""
