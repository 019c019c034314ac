"""Exception hierarchy shared by the library and the command line."""


class SgdOutageError(Exception):
    """Base class for all errors raised by this package."""


class SizeLimitError(SgdOutageError):
    """An enumeration-based method was asked for more gateways than it supports."""


class InfeasibleDemandError(SgdOutageError):
    """Traffic demand exceeds what the gateway set can ever carry."""


class InternalConsistencyError(SgdOutageError):
    """A numerical result violated an invariant beyond round-off."""


class ScenarioError(SgdOutageError):
    """A scenario or experiment file could not be parsed or validated."""
