"""Demand response, clearing price, and the clearing fixed point.

The retailer charges one price to every consumer.  Total demand responds
linearly to that price down to an inflexible floor, each load takes a fixed
share, dispatch comes from the economic-dispatch LP, and the price is then
re-derived as the supply-weighted mean of the generator bids.  Iterating that
loop to a fixed point (the clearing state) is what every move of the bidding
game is evaluated against.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from typing import NamedTuple

from .dcopf import DispatchSolution, template_for
from .errors import DegenerateMarketError, NoProfitableAllocationError
from .network import Load, PowerNetwork, validate


@dataclass(frozen=True)
class MarketParams:
    d_max: float                    # MW demanded at price 0
    d_min: float                    # MW of inflexible demand
    p_max: float                    # price at which flexible demand vanishes
    clearing_tol: float = 1e-6      # |dP| below which the loop stops
    clearing_max_iters: int = 100

    def __post_init__(self):
        if not 0 <= self.d_min <= self.d_max:
            raise ValueError(f"need 0 <= d_min <= d_max, got [{self.d_min}, {self.d_max}]")
        if not self.p_max > 0:
            raise ValueError(f"p_max must be > 0, got {self.p_max}")
        if not self.clearing_tol > 0:
            raise ValueError(f"clearing_tol must be > 0, got {self.clearing_tol}")
        if self.clearing_max_iters < 1:
            raise ValueError("clearing_max_iters must be >= 1")


@dataclass(frozen=True)
class ClearingState:
    clearing_price: float
    total_demand: float
    per_load_demands: tuple[float, ...]
    dispatch: DispatchSolution
    iterations_used: int
    converged: bool


def total_demand(P: float, params: MarketParams) -> float:
    """Linear demand response, clamped to the inflexible floor above p_max."""
    if P < 0:
        raise ValueError(f"price must be nonnegative, got {P}")
    if P > params.p_max:
        return params.d_min
    return (params.d_max - params.d_min) * (1.0 - P / params.p_max) + params.d_min


def split_demand(D: float, loads) -> tuple[float, ...]:
    """Proportional split; the last load absorbs the rounding remainder."""
    if not loads:
        return ()
    vals = [ld.share * D for ld in loads[:-1]]
    s = 0.0
    for v in vals:
        s += v
    vals.append(D - s)
    return tuple(vals)


def clearing_price(supplies, prices) -> float:
    """Supply-weighted mean of the generator prices.

    Exact passthrough when all prices coincide; clamped to [min p, max p]
    so rounding can never push the mean outside the convex hull.
    """
    total = 0.0
    acc = 0.0
    for s, p in zip(supplies, prices):
        total += s
        acc += s * p
    if not total > 0.0:
        raise DegenerateMarketError(f"total supply {total} is not positive")
    p_lo = min(prices)
    p_hi = max(prices)
    if p_lo == p_hi:
        return p_lo
    mean = acc / total
    if mean < p_lo:
        return p_lo
    if mean > p_hi:
        return p_hi
    return mean


def utility(price: float, supply: float, cost_coeff: float) -> float:
    """Supplier net utility: revenue at the bid price minus quadratic cost."""
    return price * supply - cost_coeff * supply * supply


def soft_bounds(price: float, cost_coeff: float, u_min: float) -> tuple[float, float]:
    """Supply range over which utility stays at least u_min.

    Roots of price*S - cost_coeff*S^2 = u_min; exists only when
    price >= 2*sqrt(cost_coeff*u_min).
    """
    if u_min < 0:
        raise ValueError(f"u_min must be >= 0, got {u_min}")
    if not cost_coeff > 0:
        raise ValueError(f"cost_coeff must be > 0, got {cost_coeff}")
    if price < 2.0 * math.sqrt(cost_coeff * u_min):
        raise NoProfitableAllocationError(
            f"price {price} below profitability threshold "
            f"{2.0 * math.sqrt(cost_coeff * u_min):.9g}")
    disc = price * price - 4.0 * cost_coeff * u_min
    if disc < 0.0:
        disc = 0.0  # price == threshold up to rounding
    root = math.sqrt(disc)
    return ((price - root) / (2.0 * cost_coeff),
            (price + root) / (2.0 * cost_coeff))


def consumer_utility(D: float, params: MarketParams) -> float:
    """Aggregate consumer value of demand D; the inverse demand curve is its
    derivative, which is what makes the linear response self-consistent."""
    if params.d_max == params.d_min:
        raise ValueError("consumer utility undefined without flexible demand")
    if not params.d_min <= D <= params.d_max:
        raise ValueError(f"D={D} outside [{params.d_min}, {params.d_max}]")
    dmax = params.d_max
    return (params.p_max / 2.0) * (dmax * dmax - (dmax - D) * (dmax - D)) \
        / (dmax - params.d_min)


class CompactClearing(NamedTuple):
    """Clearing loop outcome without the full dispatch (hot-path record)."""
    clearing_price: float
    total_demand: float
    per_load_demands: tuple[float, ...]
    supplies: tuple[float, ...]
    iterations_used: int
    converged: bool


_CACHE_MAX = 2_000_000


class ClearingEngine:
    """Clearing fixed point for one (network, params) pair, memoized by price
    vector.  Results are pure functions of the inputs, so memoization (and any
    eviction) is invisible in outputs."""

    def __init__(self, network: PowerNetwork, params: MarketParams):
        problems = validate(network)
        if problems:
            raise ValueError("invalid network: " + "; ".join(problems))
        if not network.generators:
            raise ValueError("market clearing needs at least one generator")
        self.network = network
        self.params = params
        self.template = template_for(network)
        self.loads: tuple[Load, ...] = network.loads
        self._cache: dict[tuple[float, ...], CompactClearing] = {}

    def clear(self, prices: tuple[float, ...]) -> CompactClearing:
        hit = self._cache.get(prices)
        if hit is not None:
            return hit
        out = self._run(prices)
        if len(self._cache) >= _CACHE_MAX:
            self._cache.clear()
        self._cache[prices] = out
        return out

    def _run(self, prices: tuple[float, ...]) -> CompactClearing:
        params = self.params
        s = 0.0
        for p in prices:
            if p < 0:
                raise ValueError(f"prices must be nonnegative, got {p}")
            s += p
        P = s / len(prices)  # initial clearing price: unweighted mean
        template = self.template
        nG = template.nG

        D = 0.0
        dvec: tuple[float, ...] = ()
        supplies: tuple[float, ...] = ()
        Pn = P
        for it in range(1, params.clearing_max_iters + 1):
            D = total_demand(P, params)
            dvec = split_demand(D, self.loads)
            x = template.solve_raw(prices, dvec)
            supplies = tuple(x[:nG])
            try:
                Pn = clearing_price(supplies, prices)
            except DegenerateMarketError:
                Pn = s / len(prices)
            if abs(Pn - P) < params.clearing_tol:
                return CompactClearing(Pn, D, dvec, supplies, it, True)
            P = Pn
        return CompactClearing(Pn, D, dvec, supplies, params.clearing_max_iters, False)

    def state(self, prices: tuple[float, ...]) -> ClearingState:
        """Full clearing state (re-derives the dispatch for the final demands)."""
        compact = self.clear(prices)
        dispatch = self.template.dispatch(prices, compact.per_load_demands)
        return ClearingState(
            clearing_price=compact.clearing_price,
            total_demand=compact.total_demand,
            per_load_demands=compact.per_load_demands,
            dispatch=dispatch,
            iterations_used=compact.iterations_used,
            converged=compact.converged,
        )


_engines: "weakref.WeakKeyDictionary[PowerNetwork, dict]" = weakref.WeakKeyDictionary()


def engine_for(network: PowerNetwork, params: MarketParams) -> ClearingEngine:
    per_net = _engines.get(network)
    if per_net is None:
        per_net = {}
        _engines[network] = per_net
    eng = per_net.get(params)
    if eng is None:
        eng = ClearingEngine(network, params)
        per_net[params] = eng
    return eng


def clearing_fixed_point(network: PowerNetwork, prices,
                         params: MarketParams) -> ClearingState:
    """Iterate demand -> dispatch -> weighted mean price until the price
    settles within clearing_tol (or the iteration budget runs out, in which
    case the state is returned with converged=False)."""
    return engine_for(network, params).state(tuple(prices))
