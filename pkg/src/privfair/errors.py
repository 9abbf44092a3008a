"""Exception types shared across the package."""


class DataError(ValueError):
    """Malformed or schema-incompatible input data."""


class ParameterError(ValueError):
    """Privacy or learner parameter outside its admissible range."""


class MechanismError(ValueError):
    """Unknown or disallowed mechanism requested."""


class UnsupportedCheckError(ValueError):
    """Analytic privacy check requested for a mechanism it cannot cover."""


class RoutingError(KeyError):
    """An instance lacks a feature the tree needs for routing."""


class BudgetRefusal(RuntimeError):
    """The curator refused a query; leaks only the remaining budget."""

    def __init__(self, remaining_epsilon: float):
        super().__init__(f"privacy budget exhausted (remaining={remaining_epsilon})")
        self.remaining_epsilon = remaining_epsilon


class ProtocolError(RuntimeError):
    """Malformed frame or contract violation on the curator wire protocol."""


class DegenerateEstimateError(RuntimeError):
    """The estimate is undefined (nonpositive group total or all-zero rates)."""

    def __init__(self, message: str, accept_rates=None):
        super().__init__(message)
        self.accept_rates = accept_rates


class MetricError(ValueError):
    """A fairness metric is undefined for the given predictions."""
