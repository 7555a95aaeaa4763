"""Exception hierarchy shared by every auction_lab module."""


class AuctionLabError(Exception):
    """Base class for all errors raised by this package."""


class MechanismViolation(AuctionLabError):
    """A mechanism produced payments or removals outside its allowed range."""


class NumericalFailure(AuctionLabError):
    """Quadrature or a search routine did not reach its tolerance."""


class UnboundedHazard(AuctionLabError):
    """sup (1 - F) / f is infinite, so no finite asymptotic lock exists."""


class DegenerateDistribution(AuctionLabError):
    """E[B2] is zero, so the fee coefficient is undefined."""


class ConfigError(AuctionLabError):
    """A configuration document failed validation."""


class GridTooLarge(AuctionLabError):
    """An exhaustive search was asked to enumerate too many candidates."""


class ProtocolError(AuctionLabError):
    """An auction operation was rejected. The auction state is unchanged."""


class InvalidParams(ProtocolError):
    pass


class NotOwner(ProtocolError):
    pass


class WrongPhase(ProtocolError):
    pass


class WrongAccount(ProtocolError):
    pass


class InsufficientFunds(ProtocolError):
    pass


class WrongDeposit(ProtocolError):
    pass


class MalformedCommit(ProtocolError):
    pass


class BadReveal(ProtocolError):
    pass


class WrongAmount(ProtocolError):
    pass


class AlreadyWithdrawn(ProtocolError):
    pass


class NotRevealed(ProtocolError):
    pass


class AlreadyClaimed(ProtocolError):
    pass


class NothingToClaim(ProtocolError):
    pass
