"""Exception types shared across the package."""


class QuantnetError(Exception):
    """Base class for all errors raised by this package."""


class InvalidEdge(QuantnetError):
    """An edge references a subsystem index outside [0, M)."""


class DisconnectedGraph(QuantnetError):
    """The communication graph is not connected."""


class DimensionMismatch(QuantnetError):
    """Vector or matrix dimensions do not match the block layout."""


class NotStronglyConvex(QuantnetError):
    """The global Hessian is not positive definite within tolerance."""


class InvalidStepSize(QuantnetError):
    """Step size is outside the admissible range (0, 1/L]."""


class NonpositiveInterval(QuantnetError):
    """Quantization interval must be strictly positive."""


class MalformedMessage(QuantnetError):
    """Encoded message bytes are inconsistent with the expected layout."""


class NegativeEpsilon(QuantnetError):
    """Projection error budgets must be non-negative."""


class InadmissibleKappa(QuantnetError):
    """Interval decrease rate is outside the admissible range for the variant."""


class Infeasible(QuantnetError):
    """No non-negative initial intervals satisfy the design inequalities."""


class NoFeasibleBits(QuantnetError):
    """No bit count up to the cap makes the interval design feasible."""


class SeriesTooShort(QuantnetError):
    """An error series does not cover the requested iteration range."""


class GenerationFailed(QuantnetError):
    """Random instance generation exhausted its retry budget."""


class MalformedTrace(QuantnetError):
    """A trace CSV file does not follow the expected schema."""


class SchemaError(QuantnetError):
    """A JSON document does not follow the expected schema."""
