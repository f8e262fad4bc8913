"""Static world of a ride-sharing game: road network, trips, edge costs.

Nodes are identified by integers ``1..V``.  Every node carries a self-loop,
which is how a player (or vehicle) waits in place for one period.

Validators in this module never raise on malformed data.  They return a
:class:`ValidationResult` listing every violation found.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

Edge = tuple[int, int]


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def messages(self) -> list[str]:
        return [v.message for v in self.violations]

    def prefixed(self, prefix: str) -> ValidationResult:
        return ValidationResult(tuple(
            Violation(v.code, f"{prefix}: {v.message}") for v in self.violations))

    def __add__(self, other: ValidationResult) -> ValidationResult:
        return ValidationResult(self.violations + other.violations)


def _result(violations: Iterable[Violation]) -> ValidationResult:
    return ValidationResult(tuple(violations))


@dataclass(frozen=True)
class RoadNetwork:
    """Directed graph on nodes ``1..node_count``.

    Edges are kept exactly as given (duplicates included) so that
    :func:`validate_network` can report them.
    """

    node_count: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    @classmethod
    def complete(cls, node_count: int) -> RoadNetwork:
        """All ordered pairs, loops included."""
        nodes = range(1, node_count + 1)
        return cls(node_count, tuple((u, v) for u in nodes for v in nodes))

    @property
    def nodes(self) -> range:
        return range(1, self.node_count + 1)

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    @cached_property
    def _successors(self) -> dict[int, tuple[int, ...]]:
        succ: dict[int, set[int]] = {}
        for u, v in self.edges:
            succ.setdefault(u, set()).add(v)
        return {u: tuple(sorted(vs)) for u, vs in succ.items()}

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edge_set

    def successors(self, u: int) -> tuple[int, ...]:
        return self._successors.get(u, ())

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edge_set)


@dataclass(frozen=True)
class Trip:
    """A walk of exactly ``horizon`` nodes: one player's day."""

    nodes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(int(v) for v in self.nodes))

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    @property
    def start(self) -> int:
        return self.nodes[0]

    @property
    def end(self) -> int:
        return self.nodes[-1]

    def edge(self, t: int) -> Edge:
        """Edge traversed during period ``t`` (0-based)."""
        return self.nodes[t], self.nodes[t + 1]

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(zip(self.nodes[:-1], self.nodes[1:]))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.nodes)) + ")"


@dataclass(frozen=True)
class EdgeCostTable:
    """Cost per rider on one edge, indexed by occupancy ``s = 0..capacity``.

    ``s = 0`` is the cost of covering the edge without a vehicle.
    """

    costs: tuple[float, ...]
    capacity: int

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(float(c) for c in self.costs))

    @classmethod
    def of(cls, costs: Sequence[float]) -> EdgeCostTable:
        return cls(tuple(costs), len(costs) - 1)

    def cost(self, occupancy: int) -> float:
        if occupancy < 0 or occupancy > self.capacity:
            raise CapacityError(
                f"occupancy {occupancy} outside 0..{self.capacity}")
        return self.costs[occupancy]


class CapacityError(ValueError):
    """Occupancy exceeded the seating capacity."""


@dataclass(frozen=True, eq=False)
class GameDefinition:
    """The ride-sharing game: who travels where, and what edges cost."""

    network: RoadNetwork
    horizon: int
    capacity: int
    cost_tables: Mapping[Edge, EdgeCostTable]
    strategy_sets: tuple[tuple[Trip, ...], ...]
    player_starts: tuple[int, ...]
    vehicle_starts: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "strategy_sets", tuple(
            tuple(t if isinstance(t, Trip) else Trip(t) for t in s)
            for s in self.strategy_sets))
        object.__setattr__(self, "player_starts", tuple(self.player_starts))
        object.__setattr__(self, "vehicle_starts", tuple(self.vehicle_starts))
        object.__setattr__(self, "cost_tables", dict(self.cost_tables))

    @property
    def player_count(self) -> int:
        return len(self.player_starts)

    @property
    def vehicle_count(self) -> int:
        return len(self.vehicle_starts)

    @property
    def strategy_shape(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.strategy_sets)

    def table(self, edge: Edge) -> EdgeCostTable:
        return self.cost_tables[tuple(edge)]


def uniform_cost_tables(network: RoadNetwork, ride: Sequence[float],
                        loop: Sequence[float] | None = None
                        ) -> dict[Edge, EdgeCostTable]:
    """One shared table for proper edges, another for self-loops."""
    ride_table = EdgeCostTable.of(ride)
    loop_table = EdgeCostTable.of(loop) if loop is not None else ride_table
    return {e: loop_table if e[0] == e[1] else ride_table
            for e in network.sorted_edges()}


def validate_network(net: RoadNetwork) -> ValidationResult:
    out = []
    if net.node_count < 1:
        out.append(Violation("bad-node-count",
                             f"node count {net.node_count} < 1"))
    for edge, n in sorted(Counter(net.edges).items()):
        if n > 1:
            out.append(Violation("duplicate-edge",
                                 f"duplicate edge {edge} ({n} copies)"))
    for u, v in net.edges:
        if not (1 <= u <= net.node_count and 1 <= v <= net.node_count):
            out.append(Violation("dangling-endpoint",
                                 f"dangling endpoint in edge {(u, v)}"))
    for v in net.nodes:
        if (v, v) not in net.edge_set:
            out.append(Violation("missing-loop", f"missing loop at node {v}"))
    return _result(out)


def validate_trip(net: RoadNetwork, trip: Trip | Sequence[int],
                  horizon: int) -> ValidationResult:
    nodes = tuple(trip)
    out = []
    if len(nodes) != horizon:
        out.append(Violation("bad-length",
                             f"length {len(nodes)} != {horizon}"))
    for v in nodes:
        if not 1 <= v <= net.node_count:
            out.append(Violation("unknown-node", f"unknown node {v}"))
    for t, (u, v) in enumerate(zip(nodes[:-1], nodes[1:])):
        if not net.has_edge(u, v):
            out.append(Violation("missing-edge",
                                 f"no edge {(u, v)} at step {t + 1}"))
    return _result(out)


def validate_cost_table(table: EdgeCostTable) -> ValidationResult:
    out = []
    c = table.costs
    if table.capacity < 1:
        out.append(Violation("bad-capacity", f"capacity {table.capacity} < 1"))
    if len(c) != table.capacity + 1:
        out.append(Violation(
            "table-size",
            f"{len(c)} entries, expected {table.capacity + 1} (s = 0..w)"))
    for s, x in enumerate(c):
        if not math.isfinite(x):
            out.append(Violation("non-finite-cost", f"cost at s={s} is {x}"))
        elif x < 0:
            out.append(Violation("negative-cost", f"cost at s={s} is {x} < 0"))
    finite = all(math.isfinite(x) for x in c)
    if finite and len(c) >= 2:
        if any(c[s + 1] > c[s] for s in range(1, len(c) - 1)):
            out.append(Violation("not-decreasing", "not decreasing on 1..w"))
        if c[0] < c[1]:
            out.append(Violation(
                "walk-below-ride",
                f"walking cost {c[0]} below riding-alone cost {c[1]}"))
    return _result(out)


def validate_game(game: GameDefinition) -> ValidationResult:
    """Run every structural check over a game definition."""
    net = game.network
    res = validate_network(net).prefixed("network")
    out = []
    if game.player_count < 1:
        out.append(Violation("no-players", "at least one player required"))
    if game.horizon < 2:
        out.append(Violation("bad-horizon", f"horizon {game.horizon} < 2"))
    if game.capacity < 1:
        out.append(Violation("bad-capacity", f"capacity {game.capacity} < 1"))
    if len(game.strategy_sets) != game.player_count:
        out.append(Violation(
            "strategy-count",
            f"{len(game.strategy_sets)} strategy sets for "
            f"{game.player_count} players"))
    for m, v in enumerate(game.vehicle_starts):
        if not 1 <= v <= net.node_count:
            out.append(Violation("unknown-node",
                                 f"vehicle {m + 1} starts at unknown node {v}"))
    res += _result(out)
    for i, (start, trips) in enumerate(zip(game.player_starts,
                                            game.strategy_sets)):
        if not 1 <= start <= net.node_count:
            res += _result([Violation(
                "unknown-node", f"player {i + 1} starts at unknown node {start}")])
        if not trips:
            res += _result([Violation(
                "empty-strategy-set", f"player {i + 1} has no strategies")])
        for k, trip in enumerate(trips):
            where = f"player {i + 1} strategy {k + 1}"
            res += validate_trip(net, trip, game.horizon).prefixed(where)
            if len(trip) and trip.start != start:
                res += _result([Violation(
                    "wrong-start",
                    f"{where}: starts at {trip.start}, player starts at {start}")])
    for edge in net.sorted_edges():
        table = game.cost_tables.get(edge)
        if table is None:
            res += _result([Violation("missing-cost-table",
                                      f"no cost table for edge {edge}")])
            continue
        res += validate_cost_table(table).prefixed(f"edge {edge}")
        if table.capacity != game.capacity:
            res += _result([Violation(
                "capacity-mismatch",
                f"edge {edge}: table capacity {table.capacity} "
                f"!= game capacity {game.capacity}")])
    for edge in sorted(set(game.cost_tables) - net.edge_set):
        res += _result([Violation("unknown-edge",
                                  f"cost table for unknown edge {edge}")])
    return res


def enumerate_trips(net: RoadNetwork, start: int, end: int,
                    must_visit: Iterable[int], horizon: int) -> list[Trip]:
    """All walks of ``horizon`` nodes from ``start`` to ``end`` that visit
    every node of ``must_visit``, in lexicographic order."""
    must = frozenset(must_visit)
    out: list[Trip] = []
    if horizon < 1:
        return out
    path = [start]

    def extend():
        if len(path) == horizon:
            if path[-1] == end and must <= set(path):
                out.append(Trip(tuple(path)))
            return
        for v in net.successors(path[-1]):
            path.append(v)
            extend()
            path.pop()

    extend()
    return out
