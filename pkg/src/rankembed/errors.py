"""Exception types raised across the package."""


class RankEmbedError(Exception):
    """Base class for all package errors."""


class IllegalType(RankEmbedError, ValueError):
    pass


class RootNotInSystem(RankEmbedError, ValueError):
    pass


class PostconditionViolated(RankEmbedError, AssertionError):
    pass


class RankTooLarge(RankEmbedError, ValueError):
    pass


class WrongCardinality(RankEmbedError, ValueError):
    pass


class NotFound(RankEmbedError, LookupError):
    pass


class DegenerateBarycenter(RankEmbedError, ArithmeticError):
    pass


class NotSPD(RankEmbedError, ValueError):
    pass


class EmptyBin(RankEmbedError, RuntimeError):
    pass


class NotAsymptotic(RankEmbedError, ValueError):
    pass


class NoSharedChamber(RankEmbedError, ValueError):
    pass


class SingularBasis(RankEmbedError, ValueError):
    pass


class RadiusTooLarge(RankEmbedError, ValueError):
    pass


class DisconnectedXDelta(RankEmbedError, RuntimeError):
    pass


class ConfigError(RankEmbedError, ValueError):
    pass
