"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`SietError`,
so callers (the CLI in particular) can map them to exit codes.
"""


class SietError(Exception):
    """Base class for all package errors."""


class ConfigError(SietError, ValueError):
    """Invalid channel configuration."""


class KTooSmall(ConfigError):
    pass


class BadDimension(ConfigError):
    pass


class NormViolation(ConfigError):
    pass


class NonPositiveVariance(ConfigError):
    pass


class NegativePower(ConfigError):
    pass


class NegativeDemand(SietError, ValueError):
    """A minimum energy rate b < 0 was requested."""


class InfeasibleDemand(SietError, ValueError):
    """The energy demand exceeds the cooperative maximum b_coop."""


class EmptySubset(SietError, ValueError):
    pass


class OutOfRange(SietError, ValueError):
    pass


class BadPermutation(SietError, ValueError):
    pass


class UnsupportedK(SietError, ValueError):
    pass


class UnsupportedDecoder(SietError, ValueError):
    pass


class NoFeasibleResponse(SietError):
    """No power split of ``user`` meets the energy demand given the others.

    ``round`` is filled in by the best-response dynamics; it is ``None`` for
    a one-shot best response.
    """

    def __init__(self, user, energy_at_zero, b, round=None):
        self.user = user
        self.energy_at_zero = energy_at_zero
        self.b = b
        self.round = round
        where = f" in round {round}" if round is not None else ""
        super().__init__(
            f"user {user + 1}{where}: energy rate {energy_at_zero:.12g} at full "
            f"cooperation is below the demand b={b:.12g}"
        )
