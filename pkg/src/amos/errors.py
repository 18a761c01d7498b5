"""Exception hierarchy shared by all modules."""


class AmosError(Exception):
    """Base class for library errors."""


class GraphFormatError(AmosError, ValueError):
    """Malformed graph input. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphError(AmosError, ValueError):
    """A graph violates an operation's precondition."""


class DisconnectedGraphError(GraphError):
    pass


class EigensolverError(AmosError, RuntimeError):
    """Iterative eigensolver failed to converge or produced large residuals."""


class ClusterTooSmallError(AmosError, ValueError):
    """A cluster has fewer than K nodes, so the partial eigenvalue sum is undefined."""

    def __init__(self, cluster, size, k):
        self.cluster, self.size, self.k = cluster, size, k
        super().__init__(
            f"cluster {cluster} has {size} nodes but K={k}; "
            "partial eigenvalue sum S_2:K is undefined"
        )


class DegenerateVTestError(AmosError, ValueError):
    """V-test statistic undefined (fewer than 2 columns)."""


class SpecError(AmosError, ValueError):
    """Invalid generator or sweep specification."""
