"""Economic dispatch: hand-solved cases, oracle cross-checks, LP properties."""

import random

import pytest

from gridbid import (Branch, Bus, Generator, Load, OpfInfeasibleError,
                     OpfRequest, PowerNetwork, build_opf, solve_opf,
                     enumerate_vertices_oracle, solve_lp, validate)

from conftest import check_dispatch


def test_two_bus_hand_solved(net2bus):
    # one branch x=0.1, demand 50: the two nodal equations force S=50 and
    # theta_1 - theta_0 = -5 (flow stored in the from,to orientation is -50)
    disp = solve_opf(OpfRequest(net2bus, (1.0,), (50.0,)))
    assert abs(disp.supplies[0] - 50.0) < 1e-9
    assert abs((disp.angles[1] - disp.angles[0]) + 5.0) < 1e-9
    assert abs(disp.flows[(0, 1)] + 50.0) < 1e-9
    assert disp.flow(1, 0) == -disp.flows[(0, 1)]
    check_dispatch(net2bus, (50.0,), disp)


def test_zero_demand_zero_dispatch(net2bus):
    disp = solve_opf(OpfRequest(net2bus, (1.0,), (0.0,)))
    assert disp.supplies == (0.0,)
    assert max(disp.angles) - min(disp.angles) < 1e-12
    assert disp.dispatch_cost == 0.0


def test_merit_order_cheap_generator_takes_all(net3bus):
    net = net3bus()
    disp = solve_opf(OpfRequest(net, (1.0, 2.0), (80.0,)))
    assert abs(disp.supplies[0] - 80.0) < 1e-9
    assert abs(disp.supplies[1]) < 1e-9
    oracle = enumerate_vertices_oracle(build_opf(OpfRequest(net, (1.0, 2.0), (80.0,))))
    assert abs(oracle.objective_value - disp.dispatch_cost) < 1e-6
    check_dispatch(net, (80.0,), disp)


def test_merit_order_capacity_constrained(net3bus):
    net = net3bus(s_max_a=50.0)
    disp = solve_opf(OpfRequest(net, (1.0, 2.0), (80.0,)))
    assert abs(disp.supplies[0] - 50.0) < 1e-9
    assert abs(disp.supplies[1] - 30.0) < 1e-9
    oracle = enumerate_vertices_oracle(build_opf(OpfRequest(net, (1.0, 2.0), (80.0,))))
    assert abs(oracle.objective_value - disp.dispatch_cost) < 1e-6


def test_case9_full_demand_feasible(net9):
    d = 770.0 / 3
    disp = solve_opf(OpfRequest(net9, (1.0, 1.0, 1.0), (d, d, d)))
    assert abs(sum(disp.supplies) - 770.0) < 1e-6
    check_dispatch(net9, (d, d, d), disp)


def test_case9_over_capacity_infeasible(net9):
    d = 800.0 / 3
    with pytest.raises(OpfInfeasibleError) as exc:
        solve_opf(OpfRequest(net9, (1.0, 1.0, 1.0), (d, d, d)))
    assert abs(exc.value.total_capacity - 770.0) < 1e-9
    assert abs(exc.value.total_demand - 800.0) < 1e-9


def test_equal_prices_tie_break_equal_split(net9):
    d = 303.8 / 3
    disp = solve_opf(OpfRequest(net9, (3.15, 3.15, 3.15), (d, d, d)))
    target = 303.8 / 3
    for s in disp.supplies:
        assert abs(s - target) < 1e-6
    check_dispatch(net9, (d, d, d), disp)


def test_equal_prices_tie_break_respects_limits(net9):
    # at full demand the equal split (256.7) exceeds two effective caps;
    # the tie-break finds the nearest feasible allocation instead
    d = 770.0 / 3
    disp = solve_opf(OpfRequest(net9, (2.0, 2.0, 2.0), (d, d, d)))
    assert abs(sum(disp.supplies) - 770.0) < 1e-6
    assert disp.supplies[0] <= 250.0 + 1e-9
    check_dispatch(net9, (d, d, d), disp)


def test_dispatch_cost_matches_lp_objective(net9):
    req = OpfRequest(net9, (2.5, 3.0, 2.0), (90.0, 110.0, 70.0))
    disp = solve_opf(req)
    sol = solve_lp(build_opf(req))
    assert abs(disp.dispatch_cost - sol.objective_value) < 1e-7


def test_build_opf_structure(net9):
    lp = build_opf(OpfRequest(net9, (1.0, 2.0, 3.0), (50.0, 50.0, 50.0)))
    n_vars = 3 + 9 + 9  # supplies, angles, flows
    assert lp.num_vars == n_vars
    assert lp.num_rows == 9 + 9  # nodal balance + flow definitions
    assert lp.objective_coeffs[:3] == (1.0, 2.0, 3.0)
    assert all(c == 0.0 for c in lp.objective_coeffs[3:])
    assert lp.var_names[0] == "gen0_supply"
    assert lp.var_names[3] == "bus0_angle"
    # reference angle pinned
    assert lp.var_lower[3] == 0.0 == lp.var_upper[3]


def test_request_validation(net9):
    with pytest.raises(ValueError):
        solve_opf(OpfRequest(net9, (1.0, 2.0), (50.0, 50.0, 50.0)))
    with pytest.raises(ValueError):
        solve_opf(OpfRequest(net9, (1.0, -2.0, 3.0), (50.0, 50.0, 50.0)))
    with pytest.raises(ValueError):
        solve_opf(OpfRequest(net9, (1.0, 2.0, 3.0), (50.0, -50.0, 50.0)))


def test_repeated_solves_identical(net9):
    req = OpfRequest(net9, (2.5, 3.0, 2.0), (90.0, 110.0, 70.0))
    first = solve_opf(req)
    for _ in range(3):
        again = solve_opf(req)
        assert again.supplies == first.supplies
        assert again.angles == first.angles
        assert again.flows == first.flows


def random_star_network(rng, n_gens):
    """Generators on a star around one load bus, unbounded branches."""
    buses = [Bus(0, "load")]
    branches = []
    gens = []
    for g in range(n_gens):
        buses.append(Bus(g + 1, "generator"))
        branches.append(Branch(g + 1, 0, round(rng.uniform(0.05, 0.2), 3)))
        gens.append(Generator(g + 1, 0.0, round(rng.uniform(50, 150), 1),
                              round(rng.uniform(0.005, 0.02), 4)))
    net = PowerNetwork(tuple(buses), tuple(branches), tuple(gens),
                       (Load(0, 1.0),))
    assert validate(net) == []
    return net


def test_merit_order_property_uncongested():
    """With unbounded branches and strictly ordered prices, generators fill in
    ascending price order up to their limits (checked against the oracle)."""
    rng = random.Random(31)
    for _ in range(20):
        n_gens = rng.randint(2, 4)
        net = random_star_network(rng, n_gens)
        prices = rng.sample([1.0, 1.5, 2.0, 2.5, 3.0, 3.5], n_gens)
        total_cap = sum(g.s_max for g in net.generators)
        demand = rng.uniform(0.1, 0.95) * total_cap
        disp = solve_opf(OpfRequest(net, tuple(prices), (demand,)))
        # expected greedy fill
        order = sorted(range(n_gens), key=lambda g: prices[g])
        remaining = demand
        for g in order:
            take = min(remaining, net.generators[g].s_max)
            assert abs(disp.supplies[g] - take) < 1e-6, (prices, demand)
            remaining -= take
        oracle = enumerate_vertices_oracle(
            build_opf(OpfRequest(net, tuple(prices), (demand,))))
        assert abs(oracle.objective_value - disp.dispatch_cost) < 1e-6
        check_dispatch(net, (demand,), disp)


def test_raising_own_price_never_increases_supply(net9):
    rng = random.Random(17)
    for _ in range(15):
        prices = [round(rng.uniform(0.5, 5.0), 2) for _ in range(3)]
        demand = rng.uniform(40, 700)
        d = (demand / 3, demand / 3, demand / 3)
        g = rng.randrange(3)
        disp = solve_opf(OpfRequest(net9, tuple(prices), d))
        bumped = list(prices)
        bumped[g] = bumped[g] + rng.uniform(0.01, 1.0)
        disp2 = solve_opf(OpfRequest(net9, tuple(bumped), d))
        assert disp2.supplies[g] <= disp.supplies[g] + 1e-6


def test_uniform_price_shift_leaves_supplies_unchanged(net9):
    rng = random.Random(23)
    for _ in range(10):
        prices = tuple(round(rng.uniform(0.5, 4.0), 2) for _ in range(3))
        demand = rng.uniform(40, 700)
        d = (demand / 3, demand / 3, demand / 3)
        disp = solve_opf(OpfRequest(net9, prices, d))
        shift = 0.75
        shifted = tuple(p + shift for p in prices)
        disp2 = solve_opf(OpfRequest(net9, shifted, d))
        for a, b in zip(disp.supplies, disp2.supplies):
            assert abs(a - b) < 1e-6
        assert abs(disp2.dispatch_cost - disp.dispatch_cost
                   - shift * sum(d)) < 1e-6


def test_conservation_on_random_case9_solves(net9):
    rng = random.Random(101)
    for _ in range(40):
        prices = tuple(round(rng.uniform(0.01, 5.0), 2) for _ in range(3))
        demand = rng.uniform(30, 770)
        d = (demand / 3, demand / 3, demand - 2 * (demand / 3))
        disp = solve_opf(OpfRequest(net9, prices, d))
        check_dispatch(net9, d, disp)
