"""Batch runs over grids of initial prices, with optional process parallelism.

Each cell is an independent run_game invocation, so results do not depend on
execution order or worker count; the output list is always in row-major cell
order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

from .cases import CaseFile
from .errors import GridbidError
from .game import GameConfig, GameEngine


@dataclass(frozen=True)
class SweepSpec:
    """Axes assign a (lo, hi, step) range to a player; frozen entries pin a
    player's price for the whole run.  Every player must appear in exactly one
    of the two."""
    axes: tuple[tuple[int, tuple[float, float, float]], ...]
    frozen: tuple[tuple[int, float], ...] = field(default=())
    mode: str | None = None  # overrides the case's game mode when set

    def axis_points(self) -> list[list[float]]:
        pts = []
        for _player, (lo, hi, step) in self.axes:
            if not step > 0 or hi < lo:
                raise ValueError(f"bad axis range {lo}:{hi}:{step}")
            k = int((hi - lo) / step + 1e-9)
            vals = [lo + i * step for i in range(k + 1)]
            if vals[-1] > hi:
                vals.pop()
            pts.append(vals)
        return pts


@dataclass(frozen=True)
class SweepCell:
    start: tuple[float, ...]
    label: str
    terminal: tuple[float, ...] | None
    cycle_period: int | None
    rounds_used: int
    error: str | None = None


def _cell_starts(spec: SweepSpec, n_players: int) -> tuple[list, tuple]:
    assigned = {p for p, _ in spec.axes} | {p for p, _ in spec.frozen}
    if assigned != set(range(n_players)):
        raise ValueError(
            f"sweep must assign every player an axis or a frozen price; "
            f"got players {sorted(assigned)} of {n_players}")
    if len(assigned) < len(spec.axes) + len(spec.frozen):
        raise ValueError("a player appears in both axes and frozen prices")
    freeze_mask = tuple(any(p == g for p, _ in spec.frozen)
                        for g in range(n_players))
    starts = []
    for combo in product(*spec.axis_points()):
        vec = [0.0] * n_players
        for (player, _), value in zip(spec.axes, combo):
            vec[player] = value
        for player, value in spec.frozen:
            vec[player] = value
        starts.append(tuple(vec))
    return starts, freeze_mask


def _config_for(case: CaseFile, spec: SweepSpec, max_rounds: int | None) -> GameConfig:
    cfg = case.game
    changes = {}
    if spec.mode is not None and spec.mode != cfg.mode:
        changes["mode"] = spec.mode
    if max_rounds is not None and max_rounds != cfg.max_rounds:
        changes["max_rounds"] = max_rounds
    if changes:
        from dataclasses import replace
        cfg = replace(cfg, **changes)
    return cfg


def _run_cell(engine: GameEngine, start, freeze_mask) -> SweepCell:
    try:
        _traj, cls = engine.run(start, freeze_mask)
    except GridbidError as exc:
        return SweepCell(start, "error", None, None, 0, error=str(exc))
    terminal = cls.fixed_point_prices
    if cls.label == "limit_cycle" and cls.cycle_points:
        terminal = cls.cycle_points[-1]
    return SweepCell(start, cls.label, terminal, cls.cycle_period,
                     cls.rounds_used, error=cls.cause)


_worker_engine: GameEngine | None = None
_worker_freeze = None


def _worker_init(case: CaseFile, cfg: GameConfig, freeze_mask) -> None:
    global _worker_engine, _worker_freeze
    _worker_engine = GameEngine(case.network, case.market, cfg)
    _worker_freeze = freeze_mask


def _worker_run(start) -> SweepCell:
    return _run_cell(_worker_engine, start, _worker_freeze)


def run_sweep(case: CaseFile, spec: SweepSpec, jobs: int = 1,
              max_rounds: int | None = None) -> list[SweepCell]:
    """All cells of the sweep, in row-major axis order."""
    n_players = len(case.network.generators)
    starts, freeze_mask = _cell_starts(spec, n_players)
    cfg = _config_for(case, spec, max_rounds)
    if jobs <= 1 or len(starts) < 4:
        engine = GameEngine(case.network, case.market, cfg)
        return [_run_cell(engine, s, freeze_mask) for s in starts]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_worker_init,
                             initargs=(case, cfg, freeze_mask)) as pool:
        return list(pool.map(_worker_run, starts, chunksize=8))
