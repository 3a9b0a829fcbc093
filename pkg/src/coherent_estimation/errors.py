"""Exception types raised across the package."""


class SingularQFIM(ValueError):
    """The quantum Fisher information matrix cannot be inverted."""


class InfeasibleError(ValueError):
    """A requested parameter choice violates a feasibility bound."""


class ProtocolError(InfeasibleError):
    """The settings negotiation cannot proceed with the given choice."""
