"""Economic dispatch under the DC approximation.

For fixed generator prices and fixed per-load demands, build the dispatch LP

    min sum_g p_g S_g
    s.t. nodal balance at every bus, flow = (theta_to - theta_from)/x on every
         branch, s_min <= S <= s_max, |flow| <= capacity, theta_ref = 0

and solve it with the deterministic simplex kernel.  Variables are ordered
supplies, then angles, then branch flows; the flow variables carry the branch
limits as plain bounds.

Cost ties (equal prices make the objective flat on a face) are resolved by a
second LP over the optimal face minimizing the L1 deviation of supplies from
the equal split D_total/|G|, so equal-price dispatches come out equal and the
result never depends on pivot order.  The second stage is skipped when the
kernel proves the first optimum unique, which changes nothing but time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernel
from .errors import LpInternalError, OpfInfeasibleError
from .lp import LinearProgram
from .network import PowerNetwork, total_effective_capacity

REF_BUS = 0  # angle reference: first bus pinned to theta = 0

BALANCE_TOL = 1e-6  # MW; |sum S - sum D| accepted on a dispatch
LIMIT_TOL = 1e-9    # bound/flow-limit violation accepted on a dispatch


@dataclass(frozen=True)
class OpfRequest:
    network: PowerNetwork
    prices: tuple[float, ...]   # per generator
    demands: tuple[float, ...]  # per load, MW


@dataclass(frozen=True)
class DispatchSolution:
    supplies: tuple[float, ...]           # MW per generator
    angles: tuple[float, ...]             # radians per bus
    flows: dict                           # (from_bus, to_bus) -> MW into from_bus
    dispatch_cost: float                  # sum p_g S_g

    def flow(self, i: int, j: int) -> float:
        """Signed flow for either orientation; antisymmetric by construction."""
        if (i, j) in self.flows:
            return self.flows[(i, j)]
        return -self.flows[(j, i)]


def _check_request(req: OpfRequest) -> None:
    nG = len(req.network.generators)
    nL = len(req.network.loads)
    if len(req.prices) != nG:
        raise ValueError(f"expected {nG} prices, got {len(req.prices)}")
    if len(req.demands) != nL:
        raise ValueError(f"expected {nL} demands, got {len(req.demands)}")
    for p in req.prices:
        if p < 0:
            raise ValueError(f"prices must be nonnegative, got {p}")
    for d in req.demands:
        if d < 0:
            raise ValueError(f"demands must be nonnegative, got {d}")


class OpfTemplate:
    """Per-network LP skeleton reused across solves.

    Only the objective (prices) and rhs (demands) change between calls, so the
    constraint matrix, bounds and the tie-break extension are built once.
    """

    def __init__(self, network: PowerNetwork):
        self.network = network
        nG = len(network.generators)
        nB = len(network.buses)
        nR = len(network.branches)
        self.nG, self.nB, self.nR = nG, nB, nR
        n = nG + nB + nR
        m = nB + nR
        self.n, self.m = n, m

        A = np.zeros((m, n), dtype=np.float64)
        lo = np.empty(n, dtype=np.float64)
        up = np.empty(n, dtype=np.float64)

        # nodal balance, one row per bus, written as
        #   sum(outflow) - sum(inflow) - S_bus = -D_bus
        # with flow variable f_k oriented as power delivered INTO from_bus
        # (f_k = (theta_to - theta_from)/x), so f_k enters the from_bus row
        # with -1 and the to_bus row with +1.
        for g, gen in enumerate(network.generators):
            A[gen.bus, g] = -1.0
            lo[g] = gen.s_min
            up[g] = gen.s_max
        for k, br in enumerate(network.branches):
            col = nG + nB + k
            A[br.from_bus, col] -= 1.0
            A[br.to_bus, col] += 1.0
            # flow definition: f_k - (theta_to - theta_from)/x = 0
            row = nB + k
            A[row, col] = 1.0
            inv_x = 1.0 / br.reactance
            A[row, nG + br.from_bus] += inv_x
            A[row, nG + br.to_bus] -= inv_x
            cap = br.capacity
            lo[col] = -cap
            up[col] = cap
        for bidx in range(nB):
            col = nG + bidx
            if bidx == REF_BUS:
                lo[col] = 0.0
                up[col] = 0.0
            else:
                lo[col] = -math.inf
                up[col] = math.inf

        self._A = A
        self._lo = lo
        self._up = up
        self._c_base = np.zeros(n, dtype=np.float64)
        self._b_base = np.zeros(m, dtype=np.float64)
        self._load_rows = np.array([ld.bus for ld in network.loads], dtype=np.intp)

        self._names = tuple(
            [f"gen{g}_supply" for g in range(nG)]
            + [f"bus{bidx}_angle" for bidx in range(nB)]
            + [f"branch{br.from_bus}_{br.to_bus}_flow" for br in network.branches]
        )

        self._build_tiebreak()

    def _build_tiebreak(self) -> None:
        # variables: original n, then t_g, then slacks for t_g >= +-(S_g - T)
        nG, n, m = self.nG, self.n, self.m
        n2 = n + 3 * nG
        m2 = m + 1 + 2 * nG
        A2 = np.zeros((m2, n2), dtype=np.float64)
        A2[:m, :n] = self._A
        lo2 = np.concatenate([self._lo, np.zeros(3 * nG)])
        up2 = np.concatenate([self._up, np.full(3 * nG, math.inf)])
        cost_row = m
        for g in range(nG):
            t_col = n + g
            s1 = n + nG + 2 * g
            s2 = n + nG + 2 * g + 1
            r1 = m + 1 + 2 * g       # t_g - S_g - s1 = -T
            r2 = m + 1 + 2 * g + 1   # t_g + S_g - s2 = +T
            A2[r1, t_col] = 1.0
            A2[r1, g] = -1.0
            A2[r1, s1] = -1.0
            A2[r2, t_col] = 1.0
            A2[r2, g] = 1.0
            A2[r2, s2] = -1.0
        c2 = np.zeros(n2, dtype=np.float64)
        c2[n:n + nG] = 1.0
        self._A2 = A2
        self._lo2 = lo2
        self._up2 = up2
        self._c2 = c2
        self._cost_row = cost_row
        self._m2, self._n2 = m2, n2

    def linear_program(self, prices, demands) -> LinearProgram:
        c = self._c_base.copy()
        c[:self.nG] = prices
        b = self._b_base.copy()
        b[self._load_rows] = -np.asarray(demands, dtype=np.float64)
        return LinearProgram(
            objective_coeffs=tuple(c.tolist()),
            constraint_matrix=tuple(tuple(row) for row in self._A.tolist()),
            constraint_rhs=tuple(b.tolist()),
            var_lower=tuple(self._lo.tolist()),
            var_upper=tuple(self._up.tolist()),
            var_names=self._names,
        )

    def solve_raw(self, prices, demands) -> list[float]:
        """Kernel solve (with tie-break) returning the raw variable vector."""
        nG = self.nG
        c = self._c_base.copy()
        c[:nG] = prices
        b = self._b_base.copy()
        b[self._load_rows] = -np.asarray(demands, dtype=np.float64)

        status, x, _obj, _iters, unique = kernel.solve(
            self._A, b, c, self._lo, self._up)
        if status == kernel.INFEASIBLE:
            total_d = 0.0
            for d in demands:
                total_d += d
            raise OpfInfeasibleError(total_d, total_effective_capacity(self.network))
        if status == kernel.UNBOUNDED:
            # finite supply bounds make the objective bounded on the feasible set
            raise LpInternalError("dispatch LP reported unbounded")
        if status != kernel.OPTIMAL:
            raise LpInternalError(f"dispatch LP kernel status {status}")
        if unique:
            return x

        # optimal face is not a point: minimize L1 deviation from equal split
        total_d = 0.0
        for d in demands:
            total_d += d
        target = total_d / nG
        cost_opt = 0.0
        for g in range(nG):
            cost_opt += prices[g] * x[g]

        b2 = np.zeros(self._m2, dtype=np.float64)
        b2[:self.m] = b
        b2[self._cost_row] = cost_opt
        A2 = self._A2.copy()  # cost row differs per call; keep the template shared
        A2[self._cost_row, :nG] = prices
        for g in range(nG):
            b2[self.m + 1 + 2 * g] = -target
            b2[self.m + 1 + 2 * g + 1] = target
        status2, x2, _o2, _i2, _u2 = kernel.solve(
            A2, b2, self._c2, self._lo2, self._up2)
        if status2 != kernel.OPTIMAL:
            raise LpInternalError(f"tie-break LP kernel status {status2}")
        return x2[:self.n]

    def dispatch(self, prices, demands) -> DispatchSolution:
        x = self.solve_raw(prices, demands)
        nG, nB = self.nG, self.nB
        supplies = tuple(x[:nG])
        angles = tuple(x[nG:nG + nB])
        flows = {}
        for k, br in enumerate(self.network.branches):
            flows[(br.from_bus, br.to_bus)] = x[nG + nB + k]
        cost = 0.0
        for g in range(nG):
            cost += prices[g] * supplies[g]
        return DispatchSolution(supplies, angles, flows, cost)


_templates: "dict[int, tuple[PowerNetwork, OpfTemplate]]" = {}


def template_for(network: PowerNetwork) -> OpfTemplate:
    """Template cache keyed by network identity (networks are immutable)."""
    key = id(network)
    hit = _templates.get(key)
    if hit is not None and hit[0] is network:
        return hit[1]
    tpl = OpfTemplate(network)
    if len(_templates) > 256:
        _templates.clear()
    _templates[key] = (network, tpl)
    return tpl


def build_opf(req: OpfRequest) -> LinearProgram:
    """The dispatch LP for fixed prices and demands, as a plain LinearProgram."""
    _check_request(req)
    return template_for(req.network).linear_program(req.prices, req.demands)


def solve_opf(req: OpfRequest) -> DispatchSolution:
    """Dispatch minimizing payment at the requested prices and demands.

    Raises OpfInfeasibleError (carrying demand and deliverable capacity) when
    the demands cannot be served within supply and branch limits.
    """
    _check_request(req)
    return template_for(req.network).dispatch(req.prices, req.demands)
