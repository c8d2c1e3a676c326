"""Exception hierarchy.

Input problems (bad files, bad configs, malformed policies) derive from
:class:`InputError`; out-of-domain arguments to the math routines derive from
:class:`MathDomainError`.  The CLI maps these to exit codes 2 and 3.
"""


class BonError(ValueError):
    """Base class for every error raised by this package."""


class InputError(BonError):
    pass


class MathDomainError(BonError):
    pass


# policy validation
class DuplicateReward(InputError):
    pass


class NonPositiveProb(InputError):
    pass


class ProbSumMismatch(InputError):
    pass


class DuplicateOutcomeId(InputError):
    pass


class EmptyPolicy(InputError):
    pass


class InvalidEnsemble(InputError):
    pass


class ParseError(InputError):
    pass


class ConfigError(InputError):
    pass


class UnknownScenario(InputError):
    pass


class EmptyData(InputError):
    pass


# math domain
class InvalidN(MathDomainError):
    pass


class InvalidSampleCount(MathDomainError):
    pass


class InvalidAlpha(MathDomainError):
    pass


class OutOfRange(MathDomainError):
    pass


class InvalidEps(MathDomainError):
    pass


class InvalidDelta(MathDomainError):
    pass


class InvalidInterval(MathDomainError):
    pass


class InvariantViolation(BonError):
    """A computed report broke one of the proven inequalities."""
