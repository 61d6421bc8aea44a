"""Physical and economic description of the grid.

Buses carry a kind tag (generator / load / junction), branches carry per-unit
reactance and an optional MW capacity, generators carry supply limits and the
quadratic cost coefficient, loads carry their share of total demand.  All
types are frozen; a network that passes validate() never changes under you.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

BUS_KINDS = ("generator", "load", "junction")

SHARE_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str  # one of BUS_KINDS


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    reactance: float          # per-unit, > 0
    capacity: float = math.inf  # MW flow limit, inf = unbounded


@dataclass(frozen=True)
class Generator:
    bus: int
    s_min: float       # MW
    s_max: float       # MW
    cost_coeff: float  # price per MW^2


@dataclass(frozen=True)
class Load:
    bus: int
    share: float  # fraction of total demand, in (0, 1]


@dataclass(frozen=True)
class PowerNetwork:
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    generators: tuple[Generator, ...]
    loads: tuple[Load, ...]
    name: str = field(default="", compare=False)

    def bus_count(self) -> int:
        return len(self.buses)

    def generator_at(self, bus_id: int) -> int | None:
        for g, gen in enumerate(self.generators):
            if gen.bus == bus_id:
                return g
        return None

    def load_at(self, bus_id: int) -> int | None:
        for l, load in enumerate(self.loads):
            if load.bus == bus_id:
                return l
        return None


def validate(network: PowerNetwork) -> list[str]:
    """Return a list of violation descriptions; empty iff the network is sound.

    Violations are data, not exceptions: callers decide whether to stop.
    """
    out: list[str] = []
    buses = network.buses
    ids = [b.id for b in buses]
    if sorted(ids) != list(range(len(buses))):
        out.append(f"bus ids must be unique and contiguous from 0, got {ids}")
        return out  # everything below indexes by bus id
    kind_of = {}
    for b in buses:
        if b.kind not in BUS_KINDS:
            out.append(f"bus {b.id}: unknown kind {b.kind!r}")
        kind_of[b.id] = b.kind

    seen_pairs = set()
    for k, br in enumerate(network.branches):
        label = f"branch {k} ({br.from_bus}-{br.to_bus})"
        if br.from_bus == br.to_bus:
            out.append(f"{label}: connects a bus to itself")
        for end in (br.from_bus, br.to_bus):
            if end not in kind_of:
                out.append(f"{label}: endpoint bus {end} does not exist")
        if not br.reactance > 0:
            out.append(f"{label}: reactance must be > 0, got {br.reactance}")
        if not br.capacity > 0:
            out.append(f"{label}: capacity must be > 0 or unbounded, got {br.capacity}")
        pair = (min(br.from_bus, br.to_bus), max(br.from_bus, br.to_bus))
        if pair in seen_pairs:
            out.append(f"{label}: duplicate branch between buses {pair[0]} and {pair[1]}")
        seen_pairs.add(pair)

    gen_buses = set()
    for g, gen in enumerate(network.generators):
        label = f"generator {g} (bus {gen.bus})"
        if gen.bus not in kind_of:
            out.append(f"{label}: bus does not exist")
        elif kind_of[gen.bus] != "generator":
            out.append(f"{label}: bus kind is {kind_of[gen.bus]!r}, expected 'generator'")
        if gen.bus in gen_buses:
            out.append(f"{label}: bus already hosts a generator")
        gen_buses.add(gen.bus)
        if not 0 <= gen.s_min <= gen.s_max:
            out.append(f"{label}: need 0 <= s_min <= s_max, got [{gen.s_min}, {gen.s_max}]")
        if not gen.cost_coeff > 0:
            out.append(f"{label}: cost_coeff must be > 0, got {gen.cost_coeff}")

    load_buses = set()
    share_sum = 0.0
    for l, load in enumerate(network.loads):
        label = f"load {l} (bus {load.bus})"
        if load.bus not in kind_of:
            out.append(f"{label}: bus does not exist")
        elif kind_of[load.bus] != "load":
            out.append(f"{label}: bus kind is {kind_of[load.bus]!r}, expected 'load'")
        if load.bus in load_buses:
            out.append(f"{label}: bus already hosts a load")
        load_buses.add(load.bus)
        if not 0 < load.share <= 1:
            out.append(f"{label}: share must be in (0, 1], got {load.share}")
        share_sum += load.share
    if network.loads and abs(share_sum - 1.0) > SHARE_SUM_TOL:
        out.append(f"load shares must sum to 1, got {share_sum!r}")

    if buses and not _connected(network):
        out.append("branch graph is not connected (angles would be under-determined)")
    return out


def _connected(network: PowerNetwork) -> bool:
    n = len(network.buses)
    adj: list[list[int]] = [[] for _ in range(n)]
    for br in network.branches:
        if 0 <= br.from_bus < n and 0 <= br.to_bus < n:
            adj[br.from_bus].append(br.to_bus)
            adj[br.to_bus].append(br.from_bus)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(v)
    return count == n


def effective_capacity(network: PowerNetwork, g: int) -> float:
    """Upper bound on deliverable supply from generator g.

    min(s_max, sum of incident branch capacities): an incident-cut bound, not
    a max-flow computation.  Exact whenever the generator hangs off a single
    branch, which is the only case the bundled benchmark exercises.
    """
    if not 0 <= g < len(network.generators):
        raise IndexError(f"generator index {g} out of range")
    gen = network.generators[g]
    cut = 0.0
    for br in network.branches:
        if br.from_bus == gen.bus or br.to_bus == gen.bus:
            cut += br.capacity
            if math.isinf(cut):
                return gen.s_max
    return min(gen.s_max, cut)


def total_effective_capacity(network: PowerNetwork) -> float:
    return sum(effective_capacity(network, g) for g in range(len(network.generators)))
