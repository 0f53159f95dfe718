"""Exception hierarchy for the replicator-dynamics core.

Every error raised by ``app.dynamics`` derives from :class:`DynamicsError` so
the HTTP and CLI layers can translate them in one place.
"""


class DynamicsError(Exception):
    """Base class for all analysis errors"""


class InvalidParams(DynamicsError, ValueError):
    """Numerical parameters out of range (tie payoffs, step sizes, thresholds)"""


class InvalidState(DynamicsError, ValueError):
    """A point that is not in the product of simplices"""


class StepRejected(DynamicsError):
    """An integration step left the state space"""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class InvalidContext(DynamicsError, ValueError):
    """Incoming/outgoing node pair that does not describe a cycle passage"""


class NotAVertex(DynamicsError, ValueError):
    """Linearisation requested away from an equilibrium"""


class NodeNotInCycle(DynamicsError, ValueError):
    """Node or connection not traversed by the requested cycle"""


class OutsideDomain(DynamicsError):
    """A point lies outside the domain of a local or return map"""

    def __init__(self, reason, message=None):
        super().__init__(message or reason)
        self.reason = reason


class DegenerateTrace(DynamicsError):
    """Routh-Hurwitz table undefined because the trace vanishes"""


class TieBreak(DynamicsError):
    """Two distinct dominant eigenvalues of equal modulus"""


class BoundaryParams(DynamicsError):
    """Parameters on (or numerically at) a stability boundary"""


class EigenMismatch(DynamicsError):
    """Closed-form and dense eigenvalues disagree"""
