import numpy as np
import pytest

from rideshare_bce.engine import (
    CostVector, InvalidProfileError, StateInstance, edge_cost, simulate_day,
    step_allocation, system_cost,
)
from rideshare_bce.model import CapacityError, EdgeCostTable

import gen

C, D = 0, 1


@pytest.mark.parametrize("s,cost", [(0, 8), (1, 6), (2, 1)])
def test_edge_cost_lookup(s, cost):
    assert edge_cost(EdgeCostTable.of([8, 6, 1]), s) == cost


def test_edge_cost_over_capacity():
    with pytest.raises(CapacityError):
        edge_cost(EdgeCostTable.of([8, 6, 1]), 3)


def test_two_players_share():
    assert step_allocation([2, 2], [(2, 3), (2, 3)], [2], 2) == [0, 0]


def test_split_choices_lower_edge_wins():
    assert step_allocation([2, 2], [(2, 3), (2, 1)], [2], 2) == [None, 0]


def test_larger_group_first():
    got = step_allocation([1, 1, 1], [(1, 3), (1, 2), (1, 2)], [1], 2)
    assert got == [None, 0, 0]


def test_capacity_overflow_walks():
    got = step_allocation([1, 1, 1], [(1, 2)] * 3, [1], 2)
    assert got == [0, 0, None]


def test_second_vehicle_takes_overflow():
    got = step_allocation([1, 1, 1], [(1, 2)] * 3, [1, 1], 2)
    assert got == [0, 0, 1]


def test_no_player_at_vehicle():
    assert step_allocation([1, 3], [(1, 2), (3, 1)], [2], 2) == [None, None]


def test_bad_edge_rejected():
    with pytest.raises(InvalidProfileError):
        step_allocation([1], [(2, 3)], [], 2)


@pytest.mark.parametrize("profile,state,costs", [
    ((C, D), 1, (15, 9)),
    ((D, C), 1, (9, 15)),
    ((C, C), 1, (10, 10)),
    ((D, D), 1, (16, 16)),
    ((D, D), 0, (16, 16)),
    ((C, D), 0, (24, 16)),
    ((C, C), 0, (24, 24)),
])
def test_example_costs(engine_game, states, profile, state, costs):
    _, cv = simulate_day(engine_game, profile, states[state])
    assert cv.per_player == costs


def test_example_trace(engine_game, states):
    trace, _ = simulate_day(engine_game, (C, C), states[1])
    assert [trace.assignment[(0, t)] for t in range(3)] == [None, 0, 0]
    assert [trace.vehicle_path[(0, t)] for t in range(4)] == [2, 2, 3, 1]
    assert [trace.occupancy[(0, t)] for t in range(3)] == [0, 2, 2]


def test_system_cost():
    assert system_cost(CostVector((15, 9))) == 24
    assert system_cost((16, 16)) == 32
    assert CostVector((10, 10)).system_cost == 20


def test_invalid_profile_names_player(engine_game):
    with pytest.raises(InvalidProfileError) as exc:
        simulate_day(engine_game, (C, 5))
    assert exc.value.player == 1


def test_trip_profile_accepted(engine_game, states):
    _, cv = simulate_day(engine_game, ((1, 2, 3, 1), (1, 1, 3, 1)), states[1])
    assert cv.per_player == (15, 9)


def check_invariants(game, profile, state):
    trace, cv = simulate_day(game, profile, state)
    trips = [game.strategy_sets[i][a] for i, a in enumerate(profile)]
    M, T = state.vehicle_count, game.horizon
    for t in range(T - 1):
        for m in range(M):
            riders = [i for i in range(len(trips)) if trace.assignment[(i, t)] == m]
            assert trace.occupancy[(m, t)] == len(riders) <= game.capacity
            assert len({trips[i].edge(t) for i in riders}) <= 1
            for i in riders:
                assert trips[i].nodes[t] == trace.vehicle_path[(m, t)]
    for m in range(M):
        path = [trace.vehicle_path[(m, t)] for t in range(T)]
        assert path[0] == state.vehicle_starts[m]
        for u, v in zip(path[:-1], path[1:]):
            assert game.network.has_edge(u, v)
    for i, trip in enumerate(trips):
        total = 0.0
        for t in range(T - 1):
            m = trace.assignment[(i, t)]
            s = 0 if m is None else trace.occupancy[(m, t)]
            total += game.table(trip.edge(t)).cost(s)
        assert cv.per_player[i] == pytest.approx(total, abs=0)
    if M == 0:
        assert all(v is None for v in trace.assignment.values())
        for i, trip in enumerate(trips):
            walk = sum(game.table(e).cost(0) for e in trip.edges)
            assert cv.per_player[i] == walk
    again = simulate_day(game, profile, state)
    assert again[0] == trace and again[1] == cv


def test_invariants_fuzz():
    rng = np.random.default_rng(7)
    for _ in range(150):
        check_invariants(*gen.random_world(rng))


def test_no_vehicle_reduction(engine_game):
    for prof in [(C, C), (C, D), (D, C), (D, D)]:
        check_invariants(engine_game, prof, StateInstance(()))
