"""Exception hierarchy shared by the planners and the CLI."""


class OwplanError(Exception):
    """Base class for all package errors."""


class ValidationError(OwplanError, ValueError):
    """Malformed input: bad layout, bad config, unreadable file."""


class DomainError(OwplanError, ValueError):
    """A well-formed argument outside the operation's domain (e.g. point outside the layout)."""


class PlannerError(OwplanError):
    """The planner cannot produce a deployment for this instance."""


class DisconnectedAreaError(PlannerError):
    """Part of the service area can never be reached by a LoS backhaul chain."""


class InternalInvariantError(OwplanError, RuntimeError):
    """A guarantee the algorithms rely on was violated; indicates a bug."""
