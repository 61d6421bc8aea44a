"""Exception hierarchy shared across the package."""


class GridbidError(Exception):
    """Base class for all package errors."""


class LpStructureError(GridbidError):
    """Linear program is malformed (dimension mismatch, crossed bounds, NaN)."""


class LpInternalError(GridbidError):
    """The simplex kernel hit a state that should be unreachable."""


class OracleGuardError(GridbidError):
    """Vertex-enumeration oracle refused an instance (combinatorial guard)."""


class OpfInfeasibleError(GridbidError):
    """Dispatch problem has no feasible allocation for the requested demands."""

    def __init__(self, total_demand: float, total_capacity: float):
        self.total_demand = total_demand
        self.total_capacity = total_capacity
        super().__init__(
            f"dispatch infeasible: total demand {total_demand:.9g} MW exceeds "
            f"deliverable capacity {total_capacity:.9g} MW"
        )


class DegenerateMarketError(GridbidError):
    """Clearing price undefined because total dispatched supply is zero."""


class NoProfitableAllocationError(GridbidError):
    """Soft supply bounds do not exist: price below the profitability threshold."""


class ClearingNotConvergedError(GridbidError):
    """Clearing-price fixed point failed to settle within the iteration budget."""

    def __init__(self, prices, iterations: int, last_price: float):
        self.prices = tuple(prices)
        self.iterations = iterations
        self.last_price = last_price
        super().__init__(
            f"clearing loop did not converge after {iterations} iterations "
            f"at prices {tuple(round(p, 6) for p in prices)} (last P={last_price:.6g})"
        )


class RoundError(GridbidError):
    """An entire game round could not be completed (all candidates failed)."""


class CaseFormatError(GridbidError):
    """Case file failed to parse or validate; message carries field context."""
