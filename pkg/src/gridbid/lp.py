"""Bounded-variable linear programs: public types, solver front end, oracle.

The solver itself lives in the kernel modules (compiled when available, pure
Python otherwise); this module owns validation, the result types, and an
independent brute-force oracle used by the test suite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .errors import LpInternalError, LpStructureError, OracleGuardError

FEASIBILITY_TOL = 1e-8   # max |A x - b| accepted on an optimal solution
BOUND_TOL = 1e-9         # max bound violation accepted on an optimal solution

# refuse oracle instances with more than this many non-fixed bounded variables
ORACLE_MAX_BOUNDED = 12
_ORACLE_MAX_COMBOS = 5_000_000


@dataclass(frozen=True)
class LinearProgram:
    """min objective_coeffs . x  s.t.  constraint_matrix x = constraint_rhs,
    var_lower <= x <= var_upper.  Bounds may be +-inf."""

    objective_coeffs: tuple[float, ...]
    constraint_matrix: tuple[tuple[float, ...], ...]
    constraint_rhs: tuple[float, ...]
    var_lower: tuple[float, ...]
    var_upper: tuple[float, ...]
    var_names: tuple[str, ...] = field(default=())

    @property
    def num_vars(self) -> int:
        return len(self.objective_coeffs)

    @property
    def num_rows(self) -> int:
        return len(self.constraint_rhs)


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    values: tuple[float, ...] | None = None
    objective_value: float | None = None


def _validate(lp: LinearProgram) -> tuple[np.ndarray, np.ndarray, np.ndarray,
                                          np.ndarray, np.ndarray]:
    n = lp.num_vars
    m = lp.num_rows
    if n == 0:
        raise LpStructureError("program has no variables")
    if len(lp.constraint_matrix) != m:
        raise LpStructureError(
            f"matrix has {len(lp.constraint_matrix)} rows, rhs has {m}")
    for i, row in enumerate(lp.constraint_matrix):
        if len(row) != n:
            raise LpStructureError(f"row {i} has {len(row)} columns, expected {n}")
    if len(lp.var_lower) != n or len(lp.var_upper) != n:
        raise LpStructureError("bound vectors do not match variable count")
    A = np.array(lp.constraint_matrix, dtype=np.float64).reshape(m, n)
    b = np.asarray(lp.constraint_rhs, dtype=np.float64)
    c = np.asarray(lp.objective_coeffs, dtype=np.float64)
    lo = np.asarray(lp.var_lower, dtype=np.float64)
    up = np.asarray(lp.var_upper, dtype=np.float64)
    if np.isnan(A).any() or np.isnan(b).any() or np.isnan(c).any():
        raise LpStructureError("NaN in program data")
    if np.isinf(A).any() or np.isinf(b).any() or np.isinf(c).any():
        raise LpStructureError("infinite coefficient in matrix/rhs/objective")
    bad = np.nonzero(lo > up)[0]
    if bad.size:
        j = int(bad[0])
        raise LpStructureError(f"variable {_name(lp, j)}: lower {lo[j]} > upper {up[j]}")
    return A, b, c, lo, up


def _name(lp: LinearProgram, j: int) -> str:
    return lp.var_names[j] if j < len(lp.var_names) else f"x{j}"


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve with the deterministic simplex kernel.

    Identical inputs produce identical solution vectors: Bland's rule fixes
    the pivot path, and both kernels perform the same arithmetic.
    """
    A, b, c, lo, up = _validate(lp)
    status, x, obj, _iters, _unique = kernel.solve(A, b, c, lo, up)
    if status == kernel.OPTIMAL:
        return LpSolution("optimal", tuple(x), obj)
    if status == kernel.INFEASIBLE:
        return LpSolution("infeasible")
    if status == kernel.UNBOUNDED:
        return LpSolution("unbounded")
    raise LpInternalError(f"kernel returned status {status} "
                          f"({lp.num_rows} rows, {lp.num_vars} vars)")


def enumerate_vertices_oracle(lp: LinearProgram) -> LpSolution:
    """Exact optimum by brute-force enumeration of basic solutions.

    Independent of the simplex kernel on purpose: pins every variable subset
    of the right size to bound combinations and solves the remaining square
    system with numpy.  Intended for tests; refuses instances whose bounded
    variable count exceeds ORACLE_MAX_BOUNDED (the combinatorial driver --
    fixed variables and free variables do not multiply the search).
    """
    A, b, c, lo, up = _validate(lp)
    m, n = A.shape

    # equalities inconsistent regardless of bounds?
    if m > 0:
        aug = np.hstack([A, b.reshape(-1, 1)])
        if np.linalg.matrix_rank(aug) > np.linalg.matrix_rank(A):
            return LpSolution("infeasible")

    # keep a maximal independent row subset (redundant rows add nothing)
    rows: list[int] = []
    rank = 0
    for i in range(m):
        cand = A[rows + [i], :]
        r = np.linalg.matrix_rank(cand)
        if r > rank:
            rows.append(i)
            rank = r
    Ar = A[rows, :]
    br = b[rows]
    r = rank

    bounded = [j for j in range(n) if lo[j] < up[j]
               and (lo[j] > -math.inf or up[j] < math.inf)]
    fixed = [j for j in range(n) if lo[j] == up[j]]
    free = [j for j in range(n) if lo[j] == -math.inf and up[j] == math.inf]
    if len(bounded) > ORACLE_MAX_BOUNDED:
        raise OracleGuardError(
            f"{len(bounded)} bounded variables exceed the oracle guard "
            f"({ORACLE_MAX_BOUNDED})")
    if len(free) > r:
        raise OracleGuardError(
            "feasible set has no vertices (more free variables than "
            "independent rows)")
    if free and np.linalg.matrix_rank(Ar[:, free]) < len(free):
        # dependent free columns span a line: the polyhedron is not pointed,
        # so "no vertex" would not imply "infeasible"
        raise OracleGuardError(
            "feasible set has no vertices (free variables with dependent "
            "columns)")

    # choose which variables are solved from the equalities ("basic"): all
    # free variables plus a combination of pinnable ones
    pinnable = bounded + fixed
    k_extra = r - len(free)
    total = 0
    best_obj = math.inf
    best_x: np.ndarray | None = None
    feasible_found = False

    for extra in itertools.combinations(pinnable, k_extra):
        basic = free + list(extra)
        pinned = [j for j in pinnable if j not in extra]
        choices = []
        for j in pinned:
            if lo[j] == up[j]:
                choices.append((lo[j],))
            elif lo[j] > -math.inf and up[j] < math.inf:
                choices.append((lo[j], up[j]))
            elif lo[j] > -math.inf:
                choices.append((lo[j],))
            else:
                choices.append((up[j],))
        n_combo = 1
        for ch in choices:
            n_combo *= len(ch)
        total += n_combo
        if total > _ORACLE_MAX_COMBOS:
            raise OracleGuardError("bound-combination count exceeds oracle guard")

        B = Ar[:, basic]
        if B.shape[0] != B.shape[1]:
            continue
        pin_matrix = np.array(list(itertools.product(*choices)), dtype=np.float64)
        if pinned:
            rhs = br.reshape(-1, 1) - Ar[:, pinned] @ pin_matrix.T
        else:
            rhs = np.repeat(br.reshape(-1, 1), pin_matrix.shape[0] or 1, axis=1)
        if B.size:
            try:
                sol = np.linalg.solve(B, rhs)
            except np.linalg.LinAlgError:
                continue
            resid = np.abs(B @ sol - rhs).max(axis=0)
        else:
            sol = np.zeros((0, rhs.shape[1]))
            resid = np.abs(rhs).max(axis=0) if rhs.size else np.zeros(rhs.shape[1])

        for col in range(pin_matrix.shape[0]):
            if resid[col] > 1e-6 * (1.0 + np.abs(br).max(initial=0.0)):
                continue
            xv = np.empty(n)
            xv[basic] = sol[:, col]
            xv[pinned] = pin_matrix[col]
            if np.any(xv < lo - 1e-7) or np.any(xv > up + 1e-7):
                continue
            feasible_found = True
            objv = float(c @ xv)
            if objv < best_obj:
                best_obj = objv
                best_x = xv

    if not feasible_found:
        return LpSolution("infeasible")
    assert best_x is not None
    return LpSolution("optimal", tuple(best_x.tolist()), best_obj)


def feasibility_residuals(lp: LinearProgram, values) -> tuple[float, float]:
    """(max equality-row violation after row scaling, max bound violation)."""
    A, b, _c, lo, up = _validate(lp)
    x = np.asarray(values, dtype=np.float64)
    if A.shape[0]:
        scale = np.maximum(1.0, np.abs(A).sum(axis=1) + np.abs(b))
        row_viol = float((np.abs(A @ x - b) / scale).max())
    else:
        row_viol = 0.0
    bound_viol = float(np.maximum(lo - x, x - up).clip(min=0.0).max(initial=0.0))
    return row_viol, bound_viol
