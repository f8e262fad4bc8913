"""One-day simulation: who rides which vehicle, and what everybody pays.

Players, vehicles and periods are 0-based here; nodes keep their network
identifiers.  Period ``t`` is the move from time ``t`` to ``t + 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from numbers import Integral
from typing import Optional, Sequence

from .model import CapacityError, Edge, EdgeCostTable, GameDefinition, Trip

__all__ = [
    "AllocationTrace", "CostVector", "InvalidProfileError", "StateInstance",
    "edge_cost", "simulate_day", "step_allocation", "system_cost",
]


class InvalidProfileError(ValueError):
    def __init__(self, player: int, reason: str):
        super().__init__(f"player {player + 1}: {reason}")
        self.player = player


@dataclass(frozen=True)
class StateInstance:
    """Realized world for one exogenous state (which vehicles exist, where)."""

    vehicle_starts: tuple[int, ...] = ()
    player_starts: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "vehicle_starts", tuple(self.vehicle_starts))
        if self.player_starts is not None:
            object.__setattr__(self, "player_starts", tuple(self.player_starts))

    @property
    def vehicle_count(self) -> int:
        return len(self.vehicle_starts)


@dataclass(frozen=True)
class AllocationTrace:
    assignment: dict[tuple[int, int], Optional[int]]
    vehicle_path: dict[tuple[int, int], int]
    occupancy: dict[tuple[int, int], int]
    player_edges: dict[tuple[int, int], Edge]
    periods: int

    def riders(self, vehicle: int, t: int) -> list[int]:
        return sorted(i for (i, s), m in self.assignment.items()
                      if s == t and m == vehicle)


@dataclass(frozen=True)
class CostVector:
    per_player: tuple[float, ...]

    @property
    def system_cost(self) -> float:
        return float(sum(self.per_player))

    def __iter__(self):
        return iter(self.per_player)

    def __getitem__(self, i):
        return self.per_player[i]

    def __len__(self):
        return len(self.per_player)


def edge_cost(table: EdgeCostTable, occupancy: int) -> float:
    return table.cost(occupancy)


def system_cost(costs: CostVector | Sequence[float]) -> float:
    return float(sum(costs))


def step_allocation(player_positions: Sequence[int],
                    chosen_edges: Sequence[Edge],
                    vehicle_positions: Sequence[int],
                    capacity: int) -> list[Optional[int]]:
    """Board players onto vehicles for a single period.

    At each node holding vehicles, players are grouped by chosen edge.
    Larger groups are served first (ties: smaller edge).  Vehicles at the
    node go out in ascending id, each taking up to ``capacity`` players of
    the current group in ascending player id.  Everyone else walks.
    """
    for i, (pos, edge) in enumerate(zip(player_positions, chosen_edges)):
        if edge[0] != pos:
            raise InvalidProfileError(i, f"edge {edge} does not leave node {pos}")
    assignment: list[Optional[int]] = [None] * len(player_positions)
    vehicles_at: dict[int, list[int]] = {}
    for m, pos in enumerate(vehicle_positions):
        vehicles_at.setdefault(pos, []).append(m)
    for node, fleet in sorted(vehicles_at.items()):
        groups: dict[Edge, list[int]] = {}
        for i, pos in enumerate(player_positions):
            if pos == node:
                groups.setdefault(tuple(chosen_edges[i]), []).append(i)
        order = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        free = iter(fleet)
        for _, players in order:
            waiting = list(players)
            while waiting:
                m = next(free, None)
                if m is None:
                    break
                for i in waiting[:capacity]:
                    assignment[i] = m
                waiting = waiting[capacity:]
    return assignment


def _resolve_profile(game: GameDefinition, profile) -> list[Trip]:
    if len(profile) != game.player_count:
        raise InvalidProfileError(
            min(len(profile), game.player_count - 1),
            f"profile has {len(profile)} entries for {game.player_count} players")
    trips = []
    for i, a in enumerate(profile):
        options = game.strategy_sets[i]
        if isinstance(a, Integral):
            if not 0 <= a < len(options):
                raise InvalidProfileError(i, f"strategy index {a} out of range")
            trip = options[a]
        else:
            trip = a if isinstance(a, Trip) else Trip(a)
            if trip not in options:
                raise InvalidProfileError(i, f"trip {trip} not in strategy set")
        trips.append(trip)
    return trips


def simulate_day(game: GameDefinition, profile,
                 state: StateInstance | None = None
                 ) -> tuple[AllocationTrace, CostVector]:
    """Play out one day for a joint strategy profile.

    ``profile`` holds one strategy index (or :class:`Trip`) per player.
    Without ``state`` the game's own vehicle placement is used.
    """
    trips = _resolve_profile(game, profile)
    if state is None:
        state = StateInstance(game.vehicle_starts)
    starts = state.player_starts or game.player_starts
    for i, trip in enumerate(trips):
        if trip.start != starts[i]:
            raise InvalidProfileError(
                i, f"trip {trip} does not start at node {starts[i]}")
        if len(trip) != game.horizon:
            raise InvalidProfileError(i, f"trip {trip} has wrong length")
    periods = game.horizon - 1
    vehicles = list(state.vehicle_starts)
    assignment, vehicle_path, occupancy, player_edges = {}, {}, {}, {}
    costs = [0.0] * len(trips)
    for m, v in enumerate(vehicles):
        vehicle_path[(m, 0)] = v
    for t in range(periods):
        positions = [trip.nodes[t] for trip in trips]
        edges = [trip.edge(t) for trip in trips]
        step = step_allocation(positions, edges, vehicles, game.capacity)
        load = [0] * len(vehicles)
        for i, m in enumerate(step):
            assignment[(i, t)] = m
            player_edges[(i, t)] = edges[i]
            if m is not None:
                load[m] += 1
        for m in range(len(vehicles)):
            occupancy[(m, t)] = load[m]
            if load[m] > game.capacity:
                raise CapacityError(f"vehicle {m + 1} over capacity at period {t}")
        for i, m in enumerate(step):
            s = 0 if m is None else load[m]
            costs[i] += edge_cost(game.table(edges[i]), s)
            if m is not None:
                vehicles[m] = edges[i][1]
        for m, v in enumerate(vehicles):
            vehicle_path[(m, t + 1)] = v
    trace = AllocationTrace(assignment, vehicle_path, occupancy,
                            player_edges, periods)
    return trace, CostVector(tuple(costs))
