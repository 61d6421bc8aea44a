"""Demand curve, clearing price, fixed point, and utility identities."""

import math
import random

import pytest
from hypothesis import given, strategies as st

from gridbid import (DegenerateMarketError, Load,
                     MarketParams, NoProfitableAllocationError,
                     clearing_fixed_point, clearing_price, consumer_utility,
                     soft_bounds, split_demand, total_demand, utility)

BENCH9 = MarketParams(d_max=770.0, d_min=30.0, p_max=5.0)


# -- demand curve -------------------------------------------------------------

def test_total_demand_endpoints():
    assert total_demand(BENCH9.p_max, BENCH9) == 30.0
    assert total_demand(0.0, BENCH9) == 770.0


def test_total_demand_midpoint_value():
    # (770-30) * (1 - 2.5/5) + 30
    assert abs(total_demand(2.5, BENCH9) - 400.0) < 1e-12


def test_total_demand_clamped_above_pmax():
    assert total_demand(6.0, BENCH9) == 30.0
    assert total_demand(500.0, BENCH9) == 30.0


def test_total_demand_negative_price_rejected():
    with pytest.raises(ValueError):
        total_demand(-0.1, BENCH9)


@given(st.floats(min_value=0.0, max_value=20.0),
       st.floats(min_value=0.0, max_value=20.0))
def test_total_demand_monotone_and_in_range(p1, p2):
    d1 = total_demand(p1, BENCH9)
    d2 = total_demand(p2, BENCH9)
    assert BENCH9.d_min <= d1 <= BENCH9.d_max
    if p1 <= p2:
        assert d1 >= d2
    else:
        assert d1 <= d2


def test_market_params_invariants():
    with pytest.raises(ValueError):
        MarketParams(d_max=10.0, d_min=20.0, p_max=5.0)
    with pytest.raises(ValueError):
        MarketParams(d_max=10.0, d_min=0.0, p_max=0.0)
    with pytest.raises(ValueError):
        MarketParams(d_max=10.0, d_min=0.0, p_max=5.0, clearing_tol=0.0)


# -- demand split -------------------------------------------------------------

def test_split_demand_equal_thirds():
    loads = (Load(0, 1 / 3), Load(1, 1 / 3), Load(2, 1 / 3))
    assert split_demand(300.0, loads) == (100.0, 100.0, 100.0)


def test_split_demand_zero():
    loads = (Load(0, 0.5), Load(1, 0.5))
    assert split_demand(0.0, loads) == (0.0, 0.0)


def test_split_demand_proportional():
    loads = (Load(0, 0.5), Load(1, 0.3), Load(2, 0.2))
    parts = split_demand(100.0, loads)
    assert abs(parts[0] - 50.0) < 1e-9
    assert abs(parts[1] - 30.0) < 1e-9
    assert abs(parts[2] - 20.0) < 1e-9


@given(st.floats(min_value=0.0, max_value=1000.0))
def test_split_demand_sums_exactly(D):
    loads = (Load(0, 0.2), Load(1, 0.45), Load(2, 0.35))
    parts = split_demand(D, loads)
    assert sum(parts) == D


# -- clearing price -----------------------------------------------------------

def test_clearing_price_equal_prices_exact():
    # exact passthrough, not a rounded weighted mean
    assert clearing_price((101.3, 87.2, 55.9), (3.15, 3.15, 3.15)) == 3.15


def test_clearing_price_symmetric_weights():
    assert clearing_price((100.0, 100.0), (2.0, 4.0)) == 3.0


def test_clearing_price_weighted():
    assert abs(clearing_price((250.0, 50.0), (2.0, 4.0)) - 7 / 3) < 1e-12


def test_clearing_price_zero_supply_degenerate():
    with pytest.raises(DegenerateMarketError):
        clearing_price((0.0, 0.0), (2.0, 4.0))


@given(st.lists(st.tuples(st.floats(min_value=0.0, max_value=300.0),
                          st.floats(min_value=0.01, max_value=5.0)),
                min_size=1, max_size=5))
def test_clearing_price_within_convex_hull(pairs):
    supplies = tuple(s for s, _ in pairs)
    prices = tuple(p for _, p in pairs)
    if sum(supplies) <= 0:
        with pytest.raises(DegenerateMarketError):
            clearing_price(supplies, prices)
        return
    P = clearing_price(supplies, prices)
    assert min(prices) <= P <= max(prices)


# -- clearing fixed point -----------------------------------------------------

def test_equal_prices_converge_in_one_iteration(net9, case9):
    for p in (0.5, 1.0, 2.2, 3.15, 4.99):
        state = clearing_fixed_point(net9, (p, p, p), case9.market)
        assert state.converged
        assert state.iterations_used == 1
        assert state.clearing_price == p


def test_benchmark_equilibrium_demand(net9, case9):
    state = clearing_fixed_point(net9, (3.15, 3.15, 3.15), case9.market)
    assert state.clearing_price == 3.15
    assert abs(state.total_demand - 303.8) < 1e-9
    assert abs(sum(state.per_load_demands) - state.total_demand) < 1e-9


def test_demand_floor_at_price_cap(net9, case9):
    state = clearing_fixed_point(net9, (5.0, 5.0, 5.0), case9.market)
    assert state.clearing_price == 5.0
    assert state.total_demand == 30.0
    assert abs(sum(state.dispatch.supplies) - 30.0) < 1e-6


def test_unequal_prices_converge(net9, case9):
    state = clearing_fixed_point(net9, (2.0, 3.0, 4.0), case9.market)
    assert state.converged
    assert min((2.0, 3.0, 4.0)) <= state.clearing_price <= 4.0
    # dispatch matches the demands of the final iteration
    assert abs(sum(state.dispatch.supplies) - sum(state.per_load_demands)) < 1e-6


def test_nonconvergent_clearing_reported_not_fatal(net9):
    # one iteration cannot settle an unequal-price instance
    tight = MarketParams(d_max=770.0, d_min=30.0, p_max=5.0,
                         clearing_tol=1e-12, clearing_max_iters=1)
    state = clearing_fixed_point(net9, (1.0, 3.0, 4.5), tight)
    assert not state.converged
    assert state.iterations_used == 1


# -- supplier utility and soft bounds ----------------------------------------

def test_utility_values():
    assert utility(2.0, 0.0, 0.01) == 0.0
    assert utility(2.0, 10.0, 0.01) == 19.0
    assert utility(2.0, 200.0, 0.01) == 0.0  # revenue equals cost


def test_soft_bounds_zero_floor():
    lo, hi = soft_bounds(2.0, 0.01, 0.0)
    assert abs(lo) < 1e-9
    assert abs(hi - 200.0) < 1e-9


def test_soft_bounds_discriminant_zero():
    # price exactly at the profitability threshold: both bounds p/(2a)
    a, u_min = 0.01, 25.0
    p = 2.0 * math.sqrt(a * u_min)
    lo, hi = soft_bounds(p, a, u_min)
    assert abs(lo - p / (2 * a)) < 1e-6
    assert abs(hi - p / (2 * a)) < 1e-6


def test_soft_bounds_worked_example():
    lo, hi = soft_bounds(2.0, 0.01, 19.0)
    assert abs(lo - 10.0) < 1e-9
    assert abs(hi - 190.0) < 1e-9
    assert abs(utility(2.0, lo, 0.01) - 19.0) < 1e-9
    assert abs(utility(2.0, hi, 0.01) - 19.0) < 1e-9


def test_soft_bounds_below_threshold_rejected():
    with pytest.raises(NoProfitableAllocationError):
        soft_bounds(0.1, 0.01, 25.0)


@given(st.floats(min_value=0.001, max_value=0.05),
       st.floats(min_value=0.0, max_value=200.0),
       st.floats(min_value=0.0, max_value=5.0))
def test_soft_bounds_endpoints_reproduce_u_min(a, u_min, extra):
    p = 2.0 * math.sqrt(a * u_min) + extra
    lo, hi = soft_bounds(p, a, u_min)
    assert lo <= hi
    assert abs(utility(p, lo, a) - u_min) < 1e-9
    assert abs(utility(p, hi, a) - u_min) < 1e-9


# -- consumer utility ---------------------------------------------------------

def test_consumer_utility_at_dmax():
    v = consumer_utility(770.0, BENCH9)
    assert abs(v - BENCH9.p_max * 770.0 ** 2 / (2 * 740.0)) < 1e-9


def test_consumer_utility_worked_value():
    v = consumer_utility(30.0, BENCH9)
    assert abs(v - 2.5 * (770.0 ** 2 - 740.0 ** 2) / 740.0) < 1e-9
    assert abs(v - 153.04054054054055) < 1e-8


def test_consumer_utility_domain():
    with pytest.raises(ValueError):
        consumer_utility(29.0, BENCH9)
    with pytest.raises(ValueError):
        consumer_utility(771.0, BENCH9)


def test_consumer_utility_concave():
    h = 1.0
    for D in range(31, 769, 7):
        second = (consumer_utility(D + h, BENCH9)
                  - 2 * consumer_utility(D, BENCH9)
                  + consumer_utility(D - h, BENCH9))
        assert second <= 1e-9


def test_marginal_value_matches_inverse_demand():
    """dV/dD at D(P) equals P: the demand curve is exactly where marginal
    consumer value meets the clearing price."""
    h = 1e-3
    rng = random.Random(5)
    for _ in range(100):
        P = rng.uniform(0.01, BENCH9.p_max - 0.01)
        D = total_demand(P, BENCH9)
        dv = (consumer_utility(D + h, BENCH9)
              - consumer_utility(D - h, BENCH9)) / (2 * h)
        assert abs(dv - P) < 1e-4
