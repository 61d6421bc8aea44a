"""Solver and oracle behavior on bounded-variable linear programs."""

import math
import random

import pytest

from gridbid import (LinearProgram, LpStructureError, OracleGuardError,
                     enumerate_vertices_oracle, feasibility_residuals,
                     solve_lp)
from gridbid.dcopf import OpfRequest, build_opf

INF = math.inf


def random_bounded_lp(rng, max_vars=8, max_rows=4):
    """A random LP with finite bounds and a guaranteed-feasible rhs."""
    n = rng.randint(1, max_vars)
    m = rng.randint(0, min(max_rows, n))
    A = tuple(tuple(round(rng.uniform(-3, 3), 3) for _ in range(n))
              for _ in range(m))
    lo = tuple(round(rng.uniform(-5, 0), 3) for _ in range(n))
    up = tuple(l + round(rng.uniform(0.1, 6), 3) for l in lo)
    x0 = [l + (u - l) * rng.random() for l, u in zip(lo, up)]
    b = tuple(sum(A[i][j] * x0[j] for j in range(n)) for i in range(m))
    c = tuple(round(rng.uniform(-2, 2), 3) for _ in range(n))
    return LinearProgram(c, A, b, lo, up)


def test_bound_attaining_minimum():
    lp = LinearProgram((1.0,), (), (), (1.0,), (5.0,))
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.values == (1.0,)
    assert sol.objective_value == 1.0
    assert enumerate_vertices_oracle(lp).objective_value == 1.0


def test_objective_constant_on_feasible_set():
    lp = LinearProgram((1.0, 1.0), ((1.0, 1.0),), (2.0,), (0.0, 0.0), (5.0, 5.0))
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert abs(sol.objective_value - 2.0) < 1e-12
    assert abs(enumerate_vertices_oracle(lp).objective_value - 2.0) < 1e-12


def test_contradictory_equalities_infeasible():
    lp = LinearProgram((1.0,), ((1.0,), (1.0,)), (1.0, 2.0), (-INF,), (INF,))
    assert solve_lp(lp).status == "infeasible"
    assert enumerate_vertices_oracle(lp).status == "infeasible"


def test_unbounded_detected():
    lp = LinearProgram((-1.0,), (), (), (0.0,), (INF,))
    assert solve_lp(lp).status == "unbounded"


def test_dimension_mismatch_is_structural_not_infeasible():
    lp = LinearProgram((1.0, 2.0), ((1.0,),), (1.0,), (0.0, 0.0), (1.0, 1.0))
    with pytest.raises(LpStructureError):
        solve_lp(lp)
    lp2 = LinearProgram((1.0,), ((1.0,),), (1.0, 2.0), (0.0,), (1.0,))
    with pytest.raises(LpStructureError):
        solve_lp(lp2)


def test_crossed_bounds_rejected():
    lp = LinearProgram((1.0,), (), (), (2.0,), (1.0,))
    with pytest.raises(LpStructureError):
        solve_lp(lp)


def test_random_four_var_two_eq_match_oracle():
    rng = random.Random(20240901)
    for _ in range(200):
        n = 4
        A = tuple(tuple(round(rng.uniform(-2, 2), 3) for _ in range(n))
                  for _ in range(2))
        lo = tuple(round(rng.uniform(-4, 0), 3) for _ in range(n))
        up = tuple(l + round(rng.uniform(0.5, 5), 3) for l in lo)
        x0 = [l + (u - l) * rng.random() for l, u in zip(lo, up)]
        b = tuple(sum(A[i][j] * x0[j] for j in range(n)) for i in range(2))
        c = tuple(round(rng.uniform(-2, 2), 3) for _ in range(n))
        lp = LinearProgram(c, A, b, lo, up)
        sol = solve_lp(lp)
        oracle = enumerate_vertices_oracle(lp)
        assert sol.status == "optimal" == oracle.status
        assert abs(sol.objective_value - oracle.objective_value) < 1e-7


def test_optimal_solutions_feasible_within_tolerance():
    rng = random.Random(7)
    for _ in range(150):
        lp = random_bounded_lp(rng)
        sol = solve_lp(lp)
        assert sol.status == "optimal"
        row_viol, bound_viol = feasibility_residuals(lp, sol.values)
        assert row_viol < 1e-8
        assert bound_viol < 1e-9


def test_determinism_repeated_solves():
    rng = random.Random(99)
    for _ in range(25):
        lp = random_bounded_lp(rng)
        first = solve_lp(lp)
        for _ in range(3):
            again = solve_lp(lp)
            assert again.values == first.values
            assert again.objective_value == first.objective_value


@pytest.mark.parametrize("lam", [2.0, 10.0])
def test_objective_scaling_leaves_solution_vector_identical(lam):
    rng = random.Random(4242)
    for _ in range(50):
        lp = random_bounded_lp(rng)
        scaled = LinearProgram(
            tuple(lam * ci for ci in lp.objective_coeffs),
            lp.constraint_matrix, lp.constraint_rhs,
            lp.var_lower, lp.var_upper)
        assert solve_lp(scaled).values == solve_lp(lp).values


def test_oracle_guard_refuses_large_instances():
    n = 13
    lp = LinearProgram(tuple([1.0] * n), (), (), tuple([0.0] * n),
                       tuple([1.0] * n))
    with pytest.raises(OracleGuardError):
        enumerate_vertices_oracle(lp)


def test_oracle_handles_free_variables_via_elimination(net9):
    # the 9-bus dispatch LP has 8 free angle variables; only the 12 bounded
    # supply/flow variables drive the enumeration
    req = OpfRequest(net9, (2.0, 3.0, 1.5), (120.0, 90.0, 100.0))
    lp = build_opf(req)
    sol = solve_lp(lp)
    oracle = enumerate_vertices_oracle(lp)
    assert sol.status == "optimal" == oracle.status
    assert abs(sol.objective_value - oracle.objective_value) < 1e-6


def test_oracle_same_trivial_instances_as_solver():
    lp = LinearProgram((1.0,), (), (), (1.0,), (5.0,))
    assert enumerate_vertices_oracle(lp).values == solve_lp(lp).values


def test_infinite_coefficient_rejected():
    lp = LinearProgram((math.inf,), (), (), (0.0,), (1.0,))
    with pytest.raises(LpStructureError):
        solve_lp(lp)


def test_nan_rejected():
    lp = LinearProgram((math.nan,), (), (), (0.0,), (1.0,))
    with pytest.raises(LpStructureError):
        solve_lp(lp)


def test_fixed_variables_and_mixed_bounds():
    # x fixed at 2, y free in a single equality, z in [0, 1]
    lp = LinearProgram(
        (0.0, 1.0, -1.0),
        ((1.0, 1.0, 0.0),),
        (5.0,),
        (2.0, -INF, 0.0),
        (2.0, INF, 1.0),
    )
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert abs(sol.values[0] - 2.0) < 1e-12
    assert abs(sol.values[1] - 3.0) < 1e-9
    assert abs(sol.values[2] - 1.0) < 1e-12


def test_oracle_refuses_unpointed_feasible_set():
    # two free variables with proportional columns: the feasible set contains
    # a line, so vertex enumeration cannot decide feasibility
    lp = LinearProgram(
        (0.0, 0.0, 1.0),
        ((1.0, 2.0, 0.0), (0.0, 0.0, 1.0)),
        (1.0, 0.5),
        (-INF, -INF, 0.0),
        (INF, INF, 2.0),
    )
    assert solve_lp(lp).status == "optimal"
    with pytest.raises(OracleGuardError):
        enumerate_vertices_oracle(lp)


def test_degenerate_fuzz_against_oracle():
    """Adversarial instances: dependent rows, duplicate columns, fixed and
    free variables, zero objectives.  The solver must terminate (anti-cycling)
    and agree with the oracle wherever the oracle is applicable."""
    rng = random.Random(555)
    checked = 0
    for _ in range(400):
        n = rng.randint(1, 6)
        m = rng.randint(0, n + 1)
        A = []
        for i in range(m):
            if i > 0 and rng.random() < 0.25:
                A.append(tuple(v * rng.choice([1.0, -1.0, 2.0]) for v in A[i - 1]))
            else:
                A.append(tuple(rng.choice([-2.0, -1.0, 0.0, 0.0, 1.0, 2.0])
                               for _ in range(n)))
        lo = [0.0] * n
        up = [0.0] * n
        for j in range(n):
            kind = rng.random()
            if kind < 0.2:
                lo[j] = up[j] = rng.choice([0.0, 1.0, -1.0])
            elif kind < 0.35:
                lo[j], up[j] = -INF, INF
            elif kind < 0.5:
                lo[j], up[j] = 0.0, INF
            else:
                lo[j] = rng.choice([-2.0, -1.0, 0.0])
                up[j] = lo[j] + rng.choice([0.0, 1.0, 2.0])
        if rng.random() < 0.7:
            x0 = [l if l == u else min(max(0.0, l), u) if l > -INF else 0.0
                  for l, u in zip(lo, up)]
            b = tuple(sum(A[i][j] * x0[j] for j in range(n)) for i in range(m))
        else:
            b = tuple(rng.choice([-1.0, 0.0, 1.0, 3.0]) for _ in range(m))
        c = tuple(rng.choice([-1.0, 0.0, 0.0, 1.0, 2.0]) for _ in range(n))
        lp = LinearProgram(c, tuple(A), b, tuple(lo), tuple(up))
        sol = solve_lp(lp)
        assert sol.status in ("optimal", "infeasible", "unbounded")
        if sol.status == "optimal":
            rv, bv = feasibility_residuals(lp, sol.values)
            assert rv < 1e-8 and bv < 1e-9
        if sol.status in ("optimal", "infeasible"):
            try:
                oracle = enumerate_vertices_oracle(lp)
            except OracleGuardError:
                continue
            checked += 1
            if sol.status == "optimal":
                assert oracle.status == "optimal"
                assert abs(sol.objective_value - oracle.objective_value) < 1e-6
            else:
                assert oracle.status == "infeasible"
    assert checked > 200  # the guard must not swallow the whole sample
