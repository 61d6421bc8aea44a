"""Case files: a TOML description of a network, market and game defaults.

Strict schema: unknown keys are rejected so a typo cannot silently change an
experiment.  Files round-trip exactly (floats are written with repr), and the
package bundles the 9-bus benchmark case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .errors import CaseFormatError
from .game import GameConfig
from .market import MarketParams
from .network import Branch, Bus, Generator, Load, PowerNetwork, validate

BUNDLED_CASES = ("case9",)

_META_KEYS = {"name", "provenance"}
_MARKET_KEYS = {"d_max", "d_min", "p_max", "clearing_tol", "clearing_max_iters"}
_GAME_KEYS = {"mode", "price_lower", "price_upper", "br_grid_step", "deriv_eps",
              "zeta_fraction", "zeta_min", "max_rounds", "convergence_tol",
              "cycle_detect_window", "update_order", "br_grid_anchor"}
_BUS_KEYS = {"id", "kind"}
_BRANCH_KEYS = {"from", "to", "reactance", "capacity"}
_GEN_KEYS = {"bus", "s_min", "s_max", "cost_coeff"}
_LOAD_KEYS = {"bus", "share"}


@dataclass(frozen=True)
class CaseFile:
    network: PowerNetwork
    market: MarketParams
    game: GameConfig
    name: str = ""
    provenance: str = ""


def _reject_unknown(table: dict, allowed: set, where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise CaseFormatError(f"{where}: unknown key(s) {sorted(unknown)}")


def _need(table: dict, key: str, where: str):
    if key not in table:
        raise CaseFormatError(f"{where}: missing required key {key!r}")
    return table[key]


def _num(table: dict, key: str, where: str) -> float:
    v = _need(table, key, where)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise CaseFormatError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def _int(table: dict, key: str, where: str) -> int:
    v = _need(table, key, where)
    if isinstance(v, bool) or not isinstance(v, int):
        raise CaseFormatError(f"{where}.{key}: expected an integer, got {v!r}")
    return v


def _str(table: dict, key: str, where: str) -> str:
    v = _need(table, key, where)
    if not isinstance(v, str):
        raise CaseFormatError(f"{where}.{key}: expected a string, got {v!r}")
    return v


def parse_case(text: str, origin: str = "<string>") -> CaseFile:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise CaseFormatError(f"{origin}: TOML parse error: {exc}") from exc

    _reject_unknown(doc, {"meta", "market", "game", "network"}, origin)
    meta = doc.get("meta", {})
    _reject_unknown(meta, _META_KEYS, f"{origin}:meta")
    name = meta.get("name", "")
    provenance = meta.get("provenance", "")

    mkt_tab = _need(doc, "market", origin)
    _reject_unknown(mkt_tab, _MARKET_KEYS, f"{origin}:market")
    try:
        market = MarketParams(
            d_max=_num(mkt_tab, "d_max", "market"),
            d_min=_num(mkt_tab, "d_min", "market"),
            p_max=_num(mkt_tab, "p_max", "market"),
            clearing_tol=float(mkt_tab.get("clearing_tol", 1e-6)),
            clearing_max_iters=int(mkt_tab.get("clearing_max_iters", 100)),
        )
    except ValueError as exc:
        raise CaseFormatError(f"{origin}:market: {exc}") from exc

    game_tab = doc.get("game", {})
    _reject_unknown(game_tab, _GAME_KEYS, f"{origin}:game")
    try:
        game = GameConfig(**game_tab)
    except (TypeError, ValueError) as exc:
        raise CaseFormatError(f"{origin}:game: {exc}") from exc

    net_tab = _need(doc, "network", origin)
    _reject_unknown(net_tab, {"buses", "branches", "generators", "loads"},
                    f"{origin}:network")

    buses = []
    for i, row in enumerate(net_tab.get("buses", [])):
        where = f"{origin}:network.buses[{i}]"
        _reject_unknown(row, _BUS_KEYS, where)
        buses.append(Bus(id=_int(row, "id", where), kind=_str(row, "kind", where)))
    branches = []
    for i, row in enumerate(net_tab.get("branches", [])):
        where = f"{origin}:network.branches[{i}]"
        _reject_unknown(row, _BRANCH_KEYS, where)
        cap = float(row["capacity"]) if "capacity" in row else math.inf
        branches.append(Branch(
            from_bus=_int(row, "from", where), to_bus=_int(row, "to", where),
            reactance=_num(row, "reactance", where), capacity=cap))
    generators = []
    for i, row in enumerate(net_tab.get("generators", [])):
        where = f"{origin}:network.generators[{i}]"
        _reject_unknown(row, _GEN_KEYS, where)
        generators.append(Generator(
            bus=_int(row, "bus", where), s_min=_num(row, "s_min", where),
            s_max=_num(row, "s_max", where),
            cost_coeff=_num(row, "cost_coeff", where)))
    loads = []
    for i, row in enumerate(net_tab.get("loads", [])):
        where = f"{origin}:network.loads[{i}]"
        _reject_unknown(row, _LOAD_KEYS, where)
        loads.append(Load(bus=_int(row, "bus", where),
                          share=_num(row, "share", where)))

    network = PowerNetwork(tuple(buses), tuple(branches), tuple(generators),
                           tuple(loads), name=name)
    problems = validate(network)
    if problems:
        raise CaseFormatError(f"{origin}: invalid network: " + "; ".join(problems))
    return CaseFile(network=network, market=market, game=game,
                    name=name, provenance=provenance)


def load_case(path) -> tuple[PowerNetwork, MarketParams, GameConfig]:
    """Parse and validate a case file; also resolves bundled case names."""
    case = load_case_file(path)
    return case.network, case.market, case.game


def load_case_file(path) -> CaseFile:
    p = resolve_case_path(path)
    return parse_case(p.read_text(encoding="utf-8"), origin=str(p))


def resolve_case_path(path) -> Path:
    """A real file path, or the name of a bundled case (e.g. "case9")."""
    p = Path(path)
    if p.exists():
        return p
    if str(path) in BUNDLED_CASES:
        return bundled_case_path(str(path))
    raise CaseFormatError(f"case file not found: {path}")


def bundled_case_path(name: str = "case9") -> Path:
    if name not in BUNDLED_CASES:
        raise CaseFormatError(f"no bundled case named {name!r}; "
                              f"available: {BUNDLED_CASES}")
    return Path(str(resources.files("gridbid.data").joinpath(f"{name}.toml")))


def load_case9() -> CaseFile:
    return load_case_file(bundled_case_path("case9"))


# -- serialization ------------------------------------------------------------

def _toml_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {v!r}")


def dump_case(case: CaseFile) -> str:
    """Serialize a CaseFile; parse_case(dump_case(c)) reproduces c exactly."""
    out = []
    out.append("[meta]")
    out.append(f"name = {_toml_scalar(case.name)}")
    out.append(f"provenance = {_toml_scalar(case.provenance)}")
    out.append("")
    out.append("[market]")
    m = case.market
    for key in ("d_max", "d_min", "p_max", "clearing_tol"):
        out.append(f"{key} = {_toml_scalar(getattr(m, key))}")
    out.append(f"clearing_max_iters = {m.clearing_max_iters}")
    out.append("")
    out.append("[game]")
    g = case.game
    for key in ("mode", "price_lower", "price_upper", "br_grid_step",
                "deriv_eps", "zeta_fraction", "zeta_min", "max_rounds",
                "convergence_tol", "cycle_detect_window", "update_order",
                "br_grid_anchor"):
        out.append(f"{key} = {_toml_scalar(getattr(g, key))}")
    out.append("")
    for bus in case.network.buses:
        out.append("[[network.buses]]")
        out.append(f"id = {bus.id}")
        out.append(f"kind = {_toml_scalar(bus.kind)}")
        out.append("")
    for br in case.network.branches:
        out.append("[[network.branches]]")
        out.append(f"from = {br.from_bus}")
        out.append(f"to = {br.to_bus}")
        out.append(f"reactance = {_toml_scalar(br.reactance)}")
        if not math.isinf(br.capacity):
            out.append(f"capacity = {_toml_scalar(br.capacity)}")
        out.append("")
    for gen in case.network.generators:
        out.append("[[network.generators]]")
        out.append(f"bus = {gen.bus}")
        out.append(f"s_min = {_toml_scalar(gen.s_min)}")
        out.append(f"s_max = {_toml_scalar(gen.s_max)}")
        out.append(f"cost_coeff = {_toml_scalar(gen.cost_coeff)}")
        out.append("")
    for ld in case.network.loads:
        out.append("[[network.loads]]")
        out.append(f"bus = {ld.bus}")
        out.append(f"share = {_toml_scalar(ld.share)}")
        out.append("")
    return "\n".join(out)


def save_case(case: CaseFile, path) -> None:
    Path(path).write_text(dump_case(case), encoding="utf-8")
