import pytest

from rideshare_bce.cli.gamefile import load_game_file
from rideshare_bce.engine import StateInstance
from rideshare_bce.model import GameDefinition, RoadNetwork, Trip, uniform_cost_tables

import gen

C = Trip((1, 2, 3, 1))
D = Trip((1, 1, 3, 1))


@pytest.fixture
def net3():
    return RoadNetwork.complete(3)


@pytest.fixture
def example_bg():
    return gen.example_game()


@pytest.fixture
def example_file():
    return load_game_file("paper_example.game")


@pytest.fixture
def engine_game(net3):
    tables = uniform_cost_tables(net3, ride=[8, 6, 1], loop=[0, 0, 0])
    return GameDefinition(net3, 4, 2, tables, ((C, D), (C, D)), (1, 1), (2,))


@pytest.fixture
def states():
    return {0: StateInstance(()), 1: StateInstance((2,))}
