"""Exception hierarchy shared across the package."""


class WSPSError(Exception):
    """Base class for all package errors."""


class ParameterError(WSPSError, ValueError):
    """Invalid parameter or argument value."""


class ModelInconsistencyError(WSPSError):
    """A solution refers to nodes, commodities or sub-nodes the instance does not have."""


class InstanceFormatError(WSPSError, ValueError):
    """Malformed instance, solution, network or manifest file."""


class ConstructionError(WSPSError):
    """The construction heuristic could not place a node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class RepairError(WSPSError):
    """No feasible insertion exists for an unassigned item."""


class EnumerationSizeError(WSPSError):
    """Instance is too large for exhaustive enumeration."""


class InfeasibleError(WSPSError):
    """No feasible solution exists; ``binding`` names the limiting capacity."""

    def __init__(self, message, binding=None):
        super().__init__(message)
        self.binding = binding


class AssignmentError(WSPSError):
    """A MILP variable assignment is incomplete."""


class AggregationError(WSPSError):
    """Metric aggregation over empty or failed replications."""
