"""Iterated supplier game: best-response and better-response price dynamics.

Each round every (unfrozen) supplier picks a new price against the incoming
vector -- by grid argmax of its utility at the consistent clearing state
(best response) or by a small derivative-guided step (better response) --
and the trajectory of price vectors is recorded and classified as a fixed
point, a limit cycle, a boundary fixed point, or non-terminated.

Utility evaluations at candidate prices can legitimately fail (the dispatch
may be infeasible, or the clearing loop may not settle); best-response search
skips such candidates, and a round where nothing can be evaluated terminates
the run with its cause attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (ClearingNotConvergedError, DegenerateMarketError,
                     OpfInfeasibleError, RoundError)
from .market import ClearingEngine, ClearingState, MarketParams, engine_for, utility
from .network import PowerNetwork, effective_capacity

# failures that abort a single evaluation rather than the whole process
EVAL_FAILURES = (OpfInfeasibleError, ClearingNotConvergedError,
                 DegenerateMarketError)

MODES = ("best_response", "better_response")
UPDATE_ORDERS = ("simultaneous", "sequential")
GRID_ANCHORS = ("lower", "incumbent")

LABEL_FIXED = "fixed_point"
LABEL_CYCLE = "limit_cycle"
LABEL_BOUNDARY = "boundary_fixed_point"
LABEL_NONTERM = "non_terminated"


@dataclass(frozen=True)
class GameConfig:
    mode: str = "best_response"
    price_lower: float = 0.01
    price_upper: float = 5.0
    br_grid_step: float = 0.01
    deriv_eps: float = 1e-6
    zeta_fraction: float = 0.005
    zeta_min: float = 5e-5
    max_rounds: int = 200
    convergence_tol: float = 1e-6
    cycle_detect_window: int = 20
    update_order: str = "simultaneous"
    br_grid_anchor: str = "lower"  # where the search grid is anchored

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.update_order not in UPDATE_ORDERS:
            raise ValueError(f"update_order must be one of {UPDATE_ORDERS}")
        if self.br_grid_anchor not in GRID_ANCHORS:
            raise ValueError(f"br_grid_anchor must be one of {GRID_ANCHORS}")
        if not 0 <= self.price_lower < self.price_upper:
            raise ValueError("need 0 <= price_lower < price_upper")
        if not self.br_grid_step > 0:
            raise ValueError("br_grid_step must be > 0")
        if not self.deriv_eps > 0:
            raise ValueError("deriv_eps must be > 0")
        if not 0 < self.zeta_fraction < 1:
            raise ValueError("zeta_fraction must be in (0, 1)")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


@dataclass(frozen=True)
class RoundRecord:
    prices: tuple[float, ...]
    clearing_state: ClearingState
    utilities: tuple[float, ...]


@dataclass(frozen=True)
class Trajectory:
    rounds: tuple[RoundRecord, ...]

    def price_history(self) -> list[tuple[float, ...]]:
        return [r.prices for r in self.rounds]


@dataclass(frozen=True)
class Classification:
    label: str
    rounds_used: int
    fixed_point_prices: tuple[float, ...] | None = None
    cycle_period: int | None = None
    cycle_points: tuple[tuple[float, ...], ...] | None = None
    cause: str | None = field(default=None, compare=False)


class GameEngine:
    """Binds a clearing engine to a game configuration; stateless otherwise."""

    def __init__(self, network: PowerNetwork, params: MarketParams,
                 config: GameConfig):
        self.clearing: ClearingEngine = engine_for(network, params)
        self.config = config
        self.cost_coeffs = tuple(g.cost_coeff for g in network.generators)
        self.n_players = len(network.generators)
        # per-player utility ceiling ingredients: any dispatch keeps S_g within
        # [s_min, effective capacity], so c*S - a*S^2 maximized over that range
        # bounds the frozen utility at candidate price c from above
        self._s_lo = tuple(g.s_min for g in network.generators)
        self._s_hi = tuple(
            max(effective_capacity(network, g), network.generators[g].s_min)
            for g in range(self.n_players))

    # -- single evaluations ------------------------------------------------

    def frozen_utility(self, g: int, candidate: float,
                       prices: tuple[float, ...]) -> float:
        """Utility of player g at its candidate price, everyone else frozen.

        Runs the clearing fixed point at the full candidate vector; a
        non-convergent clearing loop raises rather than returning a number.
        """
        vec = list(prices)
        vec[g] = candidate
        vec_t = tuple(vec)
        compact = self.clearing.clear(vec_t)
        if not compact.converged:
            raise ClearingNotConvergedError(vec_t, compact.iterations_used,
                                            compact.clearing_price)
        return utility(candidate, compact.supplies[g], self.cost_coeffs[g])

    # -- best response -----------------------------------------------------

    def _candidate_grid(self, incumbent: float) -> list[float]:
        cfg = self.config
        lo, hi, step = cfg.price_lower, cfg.price_upper, cfg.br_grid_step
        cands: list[float] = []
        if cfg.br_grid_anchor == "lower":
            k_max = int(math.floor((hi - lo) / step + 1e-9))
            while lo + k_max * step > hi:
                k_max -= 1
            cands = [lo + k * step for k in range(k_max + 1)]
            if cands[-1] < hi - 1e-12:
                cands.append(hi)
        else:  # anchored at the incumbent price
            k_lo = int(math.ceil((lo - incumbent) / step - 1e-9))
            k_hi = int(math.floor((hi - incumbent) / step + 1e-9))
            cands = [incumbent + k * step for k in range(k_lo, k_hi + 1)
                     if lo <= incumbent + k * step <= hi]
            if not cands or cands[0] > lo + 1e-12:
                cands.insert(0, lo)
            if cands[-1] < hi - 1e-12:
                cands.append(hi)
        if incumbent not in cands:
            cands.append(incumbent)
            cands.sort()
        return cands

    def _utility_ceiling(self, g: int, c: float) -> float:
        a = self.cost_coeffs[g]
        s = c / (2.0 * a)
        if s < self._s_lo[g]:
            s = self._s_lo[g]
        elif s > self._s_hi[g]:
            s = self._s_hi[g]
        return c * s - a * s * s

    def best_response(self, g: int, prices: tuple[float, ...]) -> float:
        """Grid argmax of frozen utility; the incumbent price is always a
        candidate.  Exact utility ties go to the candidate nearest the
        incumbent, then to the lower price.  Candidates whose evaluation fails
        are skipped; if every candidate fails the round cannot proceed.

        Candidates whose utility ceiling is strictly below the best utility
        seen so far are skipped without evaluation -- they can neither win nor
        tie, so the argmax (and its tie-breaking) is unchanged.  Scanning from
        the incumbent outward makes that prune bite early.
        """
        incumbent = prices[g]
        order = sorted(self._candidate_grid(incumbent),
                       key=lambda c: (abs(c - incumbent), c))
        best_c = None
        best_u = -math.inf
        best_dist = math.inf
        for c in order:
            if best_c is not None and self._utility_ceiling(g, c) < best_u:
                continue
            try:
                u = self.frozen_utility(g, c, prices)
            except EVAL_FAILURES:
                continue
            if best_c is None or u > best_u:
                best_c, best_u, best_dist = c, u, abs(c - incumbent)
            elif u == best_u:
                d = abs(c - incumbent)
                if d < best_dist or (d == best_dist and c < best_c):
                    best_c, best_dist = c, d
        if best_c is None:
            raise RoundError(f"player {g}: every grid candidate failed to evaluate")
        return best_c

    # -- better response ---------------------------------------------------

    def better_response_step(self, g: int, prices: tuple[float, ...]) -> float:
        """One derivative-guided price step.

        One-sided difference quotients at +-deriv_eps pick a direction (a
        step outside the price bounds counts as a flat direction); the step
        size starts at zeta_fraction * p and is halved until the move strictly
        improves the frozen utility, giving up below zeta_min.
        """
        cfg = self.config
        p = prices[g]
        u0 = self.frozen_utility(g, p, prices)
        eps = cfg.deriv_eps
        if p + eps <= cfg.price_upper:
            du_plus = (self.frozen_utility(g, p + eps, prices) - u0) / eps
        else:
            du_plus = 0.0
        if p - eps >= cfg.price_lower:
            du_minus = (u0 - self.frozen_utility(g, p - eps, prices)) / eps
        else:
            du_minus = 0.0

        if du_minus > 0.0 and du_plus < 0.0:
            return p  # local maximum
        if du_minus < 0.0 and du_plus > 0.0:
            # local minimum: move toward the steeper side
            direction = 1.0 if abs(du_plus) > abs(du_minus) else -1.0
        elif du_plus > 0.0 and du_minus >= 0.0:
            direction = 1.0
        elif du_minus < 0.0 and du_plus <= 0.0:
            direction = -1.0
        else:
            return p  # flat (or improving only outside the bounds)

        zeta = cfg.zeta_fraction * p
        while zeta >= cfg.zeta_min:
            cand = p + direction * zeta
            if cand > cfg.price_upper:
                cand = cfg.price_upper
            elif cand < cfg.price_lower:
                cand = cfg.price_lower
            if cand != p:
                if self.frozen_utility(g, cand, prices) > u0:
                    return cand
            zeta *= 0.5
        return p

    # -- rounds and runs ----------------------------------------------------

    def _respond(self, g: int, prices: tuple[float, ...]) -> float:
        if self.config.mode == "best_response":
            return self.best_response(g, prices)
        return self.better_response_step(g, prices)

    def play_round(self, prices: tuple[float, ...],
                   freeze_mask=None) -> tuple[float, ...]:
        freeze = _normalize_mask(freeze_mask, self.n_players)
        if self.config.update_order == "simultaneous":
            new = list(prices)
            for g in range(self.n_players):
                if not freeze[g]:
                    new[g] = self._respond(g, prices)
            return tuple(new)
        cur = list(prices)
        for g in range(self.n_players):
            if not freeze[g]:
                cur[g] = self._respond(g, tuple(cur))
        return tuple(cur)

    def _record(self, prices: tuple[float, ...]) -> RoundRecord:
        state = self.clearing.state(prices)
        if not state.converged:
            raise ClearingNotConvergedError(prices, state.iterations_used,
                                            state.clearing_price)
        utils = tuple(
            utility(prices[g], state.dispatch.supplies[g], self.cost_coeffs[g])
            for g in range(self.n_players))
        return RoundRecord(prices, state, utils)

    def run(self, initial_prices, freeze_mask=None) -> tuple[Trajectory, Classification]:
        cfg = self.config
        prices = tuple(float(p) for p in initial_prices)
        if len(prices) != self.n_players:
            raise ValueError(f"expected {self.n_players} prices, got {len(prices)}")
        for p in prices:
            if not cfg.price_lower <= p <= cfg.price_upper:
                raise ValueError(f"initial price {p} outside "
                                 f"[{cfg.price_lower}, {cfg.price_upper}]")
        freeze = _normalize_mask(freeze_mask, self.n_players)

        rounds = [self._record(prices)]
        hist = [prices]
        cause = None
        label = LABEL_NONTERM
        for _ in range(cfg.max_rounds):
            try:
                new = self.play_round(prices, freeze)
                rounds.append(self._record(new))
            except (RoundError, *EVAL_FAILURES) as exc:
                cause = str(exc)
                break
            hist.append(new)
            prices = new
            label = _classify_history(hist, cfg, freeze)
            if label != LABEL_NONTERM:
                break

        traj = Trajectory(tuple(rounds))
        cls = _build_classification(hist, cfg, freeze, label, cause)
        return traj, cls

    def quiver_field(self, grid, free: tuple[int, int], frozen_prices):
        """Simultaneous better-response displacement at each grid node.

        grid is (lo, hi, step) applied to both axes, or a pair of such
        triples.  Returns (rows, missing): rows are (p_i, p_j, dp_i, dp_j)
        sorted by node, missing are nodes whose evaluation failed.
        """
        if self.config.mode != "better_response":
            raise ValueError("quiver fields are defined for better_response mode")
        i, j = free
        if i == j:
            raise ValueError("free indices must differ")
        base = list(frozen_prices)
        if len(base) != self.n_players:
            raise ValueError(f"expected {self.n_players} base prices")
        axis_i, axis_j = _expand_grid_spec(grid)
        rows = []
        missing = []
        for a in _axis_points(axis_i):
            for bpt in _axis_points(axis_j):
                vec = list(base)
                vec[i] = a
                vec[j] = bpt
                vec_t = tuple(vec)
                try:
                    ni = self.better_response_step(i, vec_t)
                    nj = self.better_response_step(j, vec_t)
                except EVAL_FAILURES:
                    missing.append((a, bpt))
                    continue
                rows.append((a, bpt, ni - a, nj - bpt))
        return rows, missing


def _normalize_mask(mask, n: int) -> tuple[bool, ...]:
    if mask is None:
        return (False,) * n
    mask = tuple(bool(v) for v in mask)
    if len(mask) != n:
        raise ValueError(f"freeze mask has {len(mask)} entries, expected {n}")
    return mask


def _expand_grid_spec(grid):
    if isinstance(grid, (tuple, list)) and len(grid) == 3 \
            and all(isinstance(v, (int, float)) for v in grid):
        return tuple(grid), tuple(grid)
    if isinstance(grid, (tuple, list)) and len(grid) == 2:
        return tuple(grid[0]), tuple(grid[1])
    raise ValueError("grid spec must be (lo, hi, step) or a pair of them")


def _axis_points(spec) -> list[float]:
    lo, hi, step = spec
    if not step > 0 or hi < lo:
        raise ValueError(f"bad axis spec {spec}")
    k_max = int(math.floor((hi - lo) / step + 1e-9))
    pts = [lo + k * step for k in range(k_max + 1)]
    if pts[-1] > hi:
        pts.pop()
    return pts


def _close(a: tuple[float, ...], b: tuple[float, ...], tol: float) -> bool:
    for x, v in zip(a, b):
        if abs(x - v) >= tol:
            return False
    return True


def _classify_history(hist, cfg: GameConfig, freeze) -> str:
    """Label the price history as it stands; LABEL_NONTERM means keep playing."""
    if len(hist) >= 2 and _close(hist[-1], hist[-2], cfg.convergence_tol):
        last = hist[-1]
        at_bound = any(
            (abs(p - cfg.price_lower) < cfg.convergence_tol
             or abs(p - cfg.price_upper) < cfg.convergence_tol)
            for g, p in enumerate(last) if not freeze[g])
        return LABEL_BOUNDARY if at_bound else LABEL_FIXED
    n = len(hist)
    for k in range(2, cfg.cycle_detect_window + 1):
        if n < 2 * k:
            break
        if all(_close(hist[-1 - i], hist[-1 - i - k], cfg.convergence_tol)
               for i in range(k)):
            return LABEL_CYCLE
    return LABEL_NONTERM


def _build_classification(hist, cfg: GameConfig, freeze, label: str,
                          cause: str | None) -> Classification:
    rounds_used = len(hist) - 1
    if label in (LABEL_FIXED, LABEL_BOUNDARY):
        return Classification(label, rounds_used, fixed_point_prices=hist[-1],
                              cause=cause)
    if label == LABEL_CYCLE:
        for k in range(2, cfg.cycle_detect_window + 1):
            if len(hist) >= 2 * k and all(
                    _close(hist[-1 - i], hist[-1 - i - k], cfg.convergence_tol)
                    for i in range(k)):
                pts = tuple(hist[len(hist) - k:])
                return Classification(label, rounds_used, cycle_period=k,
                                      cycle_points=pts, cause=cause)
    return Classification(LABEL_NONTERM, rounds_used, cause=cause)


# -- module-level operations (thin wrappers over GameEngine) -----------------

def frozen_utility(g: int, candidate: float, prices, network: PowerNetwork,
                   params: MarketParams) -> float:
    """Utility of player g bidding `candidate` with all other prices frozen
    at `prices` (g's own slot in `prices` is ignored)."""
    eng = GameEngine(network, params, GameConfig())
    return eng.frozen_utility(g, candidate, tuple(prices))


def best_response(g: int, prices, network: PowerNetwork, params: MarketParams,
                  config: GameConfig) -> float:
    return GameEngine(network, params, config).best_response(g, tuple(prices))


def better_response_step(g: int, prices, network: PowerNetwork,
                         params: MarketParams, config: GameConfig) -> float:
    return GameEngine(network, params, config).better_response_step(g, tuple(prices))


def play_round(prices, network: PowerNetwork, params: MarketParams,
               config: GameConfig, freeze_mask=None) -> tuple[float, ...]:
    return GameEngine(network, params, config).play_round(tuple(prices), freeze_mask)


def run_game(initial_prices, network: PowerNetwork, params: MarketParams,
             config: GameConfig, freeze_mask=None):
    return GameEngine(network, params, config).run(initial_prices, freeze_mask)


def classify_trajectory(traj: Trajectory, config: GameConfig,
                        freeze_mask=None) -> Classification:
    """Re-derive the attractor label from a recorded trajectory.

    freeze_mask, when given, excludes frozen players from the boundary test
    (a player pinned at a bound should not turn every fixed point into a
    boundary fixed point).
    """
    if not traj.rounds:
        raise ValueError("trajectory has no rounds")
    hist = traj.price_history()
    n = len(traj.rounds[0].prices)
    freeze = _normalize_mask(freeze_mask, n)
    label = _classify_history(hist, config, freeze)
    return _build_classification(hist, config, freeze, label, None)


def quiver_field(grid, free: tuple[int, int], frozen_prices,
                 network: PowerNetwork, params: MarketParams,
                 config: GameConfig):
    return GameEngine(network, params, config).quiver_field(
        grid, free, frozen_prices)
