"""Exogenous states, beliefs and expected costs.

A :class:`BayesianGame` gets its per-state costs from one of two sources:
simulating every profile with :func:`~rideshare_bce.engine.simulate_day`,
or cost matrices supplied directly.  Direct matrices win when both exist.

Cost arrays have shape ``(n_states, |A_1|, ..., |A_N|, N)``; the last axis
is the player whose cost is stored.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from numbers import Integral
from typing import Optional, Sequence

import numpy as np

from .engine import StateInstance, simulate_day
from .model import GameDefinition, ValidationResult, Violation, validate_game

PRIOR_TOL = 1e-9

Profile = tuple[int, ...]


class PriorError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Prior:
    """Per-player beliefs over states, shape ``(N, n_states)``."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float)
        if p.ndim != 2:
            raise PriorError(f"prior must be 2-d (players x states), got {p.shape}")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def common(cls, probs: Sequence[float], player_count: int) -> Prior:
        return cls(np.tile(np.asarray(probs, dtype=float), (player_count, 1)))

    @property
    def player_count(self) -> int:
        return self.probabilities.shape[0]

    @property
    def state_count(self) -> int:
        return self.probabilities.shape[1]

    def for_player(self, i: int) -> np.ndarray:
        return self.probabilities[i]

    @property
    def is_common(self) -> bool:
        p = self.probabilities
        return bool(np.all(np.abs(p - p[0]) <= PRIOR_TOL))

    def validate(self) -> ValidationResult:
        out = []
        for i, row in enumerate(self.probabilities):
            if np.any(~np.isfinite(row)) or np.any(row < 0):
                out.append(Violation(
                    "negative-probability",
                    f"player {i + 1}: prior has negative or non-finite entries"))
            total = float(row.sum())
            if abs(total - 1.0) > PRIOR_TOL:
                out.append(Violation(
                    "prior-sum", f"player {i + 1}: prior sums to {total:g}, not 1"))
        return ValidationResult(tuple(out))


@dataclass(frozen=True, eq=False)
class NormalFormTable:
    """Cost of every player at every joint profile for one state."""

    costs: np.ndarray

    def __post_init__(self):
        c = np.array(self.costs, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "costs", c)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.costs.shape[:-1]

    @property
    def player_count(self) -> int:
        return self.costs.shape[-1]

    def __getitem__(self, profile) -> tuple[float, ...]:
        return tuple(float(x) for x in self.costs[tuple(profile)])

    def system_costs(self) -> np.ndarray:
        return self.costs.sum(axis=-1)

    def profiles(self):
        return itertools.product(*(range(k) for k in self.shape))

    def as_dict(self) -> dict[Profile, tuple[float, ...]]:
        return {p: self[p] for p in self.profiles()}


@dataclass(frozen=True, eq=False)
class BayesianGame:
    """Players, strategies, states, priors and a cost source.

    Either ``game`` together with ``state_instances`` (one per state), or
    ``direct_costs`` of shape ``(n_states, *strategy_shape, N)`` must be set.
    ``mediator_prior`` is the belief used for system-level quantities; it
    defaults to the players' common prior.
    """

    states: tuple[str, ...]
    prior: Prior
    strategy_labels: tuple[tuple[str, ...], ...]
    game: Optional[GameDefinition] = None
    state_instances: Optional[tuple[StateInstance, ...]] = None
    direct_costs: Optional[np.ndarray] = None
    mediator_prior: Optional[np.ndarray] = None
    name: str = "game"

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        object.__setattr__(self, "strategy_labels",
                           tuple(tuple(str(x) for x in s)
                                 for s in self.strategy_labels))
        if self.state_instances is not None:
            object.__setattr__(self, "state_instances",
                               tuple(self.state_instances))
        if self.direct_costs is not None:
            d = np.array(self.direct_costs, dtype=float)
            d.setflags(write=False)
            object.__setattr__(self, "direct_costs", d)
        if self.mediator_prior is not None:
            object.__setattr__(self, "mediator_prior",
                               np.asarray(self.mediator_prior, dtype=float))

    @classmethod
    def from_matrices(cls, matrices: Sequence, prior, *,
                      states: Sequence[str] | None = None,
                      strategy_labels=None, **kwargs) -> BayesianGame:
        """Build from direct cost arrays; ``prior`` may be per-state (common)
        or per-player."""
        costs = np.asarray(matrices, dtype=float)
        n_players = costs.shape[-1]
        shape = costs.shape[1:-1]
        if states is None:
            states = [str(x) for x in range(costs.shape[0])]
        if strategy_labels is None:
            strategy_labels = [[str(k + 1) for k in range(n)] for n in shape]
        p = np.asarray(prior, dtype=float)
        prior_obj = Prior.common(p, n_players) if p.ndim == 1 else Prior(p)
        return cls(tuple(states), prior_obj, tuple(map(tuple, strategy_labels)),
                   direct_costs=costs, **kwargs)

    @property
    def player_count(self) -> int:
        return len(self.strategy_labels)

    @property
    def state_count(self) -> int:
        return len(self.states)

    @property
    def strategy_shape(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.strategy_labels)

    def profiles(self):
        """Joint profiles as index tuples, in lexicographic order."""
        return itertools.product(*(range(k) for k in self.strategy_shape))

    def state_index(self, label) -> int:
        label = str(label)
        try:
            return self.states.index(label)
        except ValueError:
            raise KeyError(f"unknown state {label!r}") from None

    def resolve_profile(self, profile) -> Profile:
        """Accept index tuples, label tuples, or a comma-separated string."""
        if isinstance(profile, str):
            profile = [p.strip() for p in profile.split(",")]
        if len(profile) != self.player_count:
            raise ValueError(f"profile needs {self.player_count} entries, "
                             f"got {len(profile)}")
        out = []
        for i, a in enumerate(profile):
            labels = self.strategy_labels[i]
            if isinstance(a, Integral):
                if not 0 <= a < len(labels):
                    raise ValueError(f"player {i + 1}: strategy {a} out of range")
                out.append(int(a))
            elif str(a) in labels:
                out.append(labels.index(str(a)))
            else:
                raise ValueError(f"player {i + 1}: unknown strategy {a!r}")
        return tuple(out)

    def profile_labels(self, profile: Profile) -> tuple[str, ...]:
        return tuple(self.strategy_labels[i][a] for i, a in enumerate(profile))

    def format_profile(self, profile: Profile) -> str:
        return "(" + ",".join(self.profile_labels(profile)) + ")"

    @property
    def system_prior(self) -> np.ndarray:
        """Belief used for the mediator's objective and welfare benchmarks."""
        if self.mediator_prior is not None:
            return self.mediator_prior
        if not self.prior.is_common:
            raise PriorError(
                "full-information benchmark undefined without a common prior")
        return self.prior.probabilities[0]

    @cached_property
    def cost_array(self) -> np.ndarray:
        """Per-state costs, shape ``(n_states, *strategy_shape, N)``."""
        if self.direct_costs is not None:
            return self.direct_costs
        if self.game is None or self.state_instances is None:
            raise ValueError("game has neither direct costs nor a simulator")
        out = np.zeros((self.state_count, *self.strategy_shape,
                        self.player_count))
        for x, inst in enumerate(self.state_instances):
            for prof in self.profiles():
                _, cv = simulate_day(self.game, prof, inst)
                out[(x, *prof)] = cv.per_player
        out.setflags(write=False)
        return out

    def simulated_cost_array(self) -> np.ndarray:
        """Engine costs, ignoring any direct matrices."""
        if self.direct_costs is None:
            return self.cost_array
        return BayesianGame(self.states, self.prior, self.strategy_labels,
                            self.game, self.state_instances).cost_array

    def system_cost_array(self, objective=None) -> np.ndarray:
        """Per-state system cost, shape ``(n_states, *strategy_shape)``."""
        return system_objective(self.cost_array, objective)


def system_objective(costs: np.ndarray, objective=None) -> np.ndarray:
    """Reduce per-player costs to a system cost.

    ``objective`` may be ``None``/``"sum"``, ``"max"``, a callable applied to
    the cost array, or an explicit array of shape ``costs.shape[:-1]``.
    """
    if objective is None or objective == "sum":
        return costs.sum(axis=-1)
    if objective == "max":
        return costs.max(axis=-1)
    if callable(objective):
        return np.asarray(objective(costs), dtype=float)
    arr = np.asarray(objective, dtype=float)
    if arr.shape != costs.shape[:-1]:
        raise ValueError(f"objective array shape {arr.shape} != {costs.shape[:-1]}")
    return arr


def validate_bayesian_game(bg: BayesianGame) -> ValidationResult:
    out = []
    res = ValidationResult()
    if bg.state_count < 1:
        out.append(Violation("no-states", "at least one state required"))
    if len(set(bg.states)) != len(bg.states):
        out.append(Violation("duplicate-state", "state labels must be unique"))
    if bg.prior.player_count != bg.player_count:
        out.append(Violation(
            "prior-shape",
            f"prior covers {bg.prior.player_count} players, game has "
            f"{bg.player_count}"))
    if bg.prior.state_count != bg.state_count:
        out.append(Violation(
            "prior-shape",
            f"prior covers {bg.prior.state_count} states, game has {bg.state_count}"))
    res += ValidationResult(tuple(out)) + bg.prior.validate()
    if bg.mediator_prior is not None:
        res += Prior(bg.mediator_prior[None, :]).validate().prefixed("mediator")
    if bg.game is not None:
        res += validate_game(bg.game)
        if bg.game.strategy_shape != bg.strategy_shape:
            res += ValidationResult((Violation(
                "label-shape", "strategy labels do not match strategy sets"),))
        if bg.state_instances is None or len(bg.state_instances) != bg.state_count:
            res += ValidationResult((Violation(
                "state-instances", "one state instance per state required"),))
        else:
            n = bg.game.network.node_count
            for x, inst in enumerate(bg.state_instances):
                for m, v in enumerate(inst.vehicle_starts):
                    if not 1 <= v <= n:
                        res += ValidationResult((Violation(
                            "unknown-node",
                            f"state {bg.states[x]}: vehicle {m + 1} starts at "
                            f"unknown node {v}"),))
    if bg.direct_costs is not None:
        want = (bg.state_count, *bg.strategy_shape, bg.player_count)
        d = bg.direct_costs
        if d.shape != want:
            res += ValidationResult((Violation(
                "matrix-shape", f"cost matrices have shape {d.shape}, need {want}"),))
        elif np.any(~np.isfinite(d)) or np.any(d < 0):
            res += ValidationResult((Violation(
                "negative-cost", "cost matrices must be finite and nonnegative"),))
    elif bg.game is None:
        res += ValidationResult((Violation(
            "no-cost-source", "need direct matrices or a simulatable game"),))
    return res


def build_state_tables(bg: BayesianGame) -> dict[str, NormalFormTable]:
    return {label: NormalFormTable(bg.cost_array[x])
            for x, label in enumerate(bg.states)}


def expected_cost(bg: BayesianGame, profile, player: int) -> float:
    """Player's prior-weighted cost at a joint profile."""
    prof = bg.resolve_profile(profile)
    per_state = bg.cost_array[(slice(None), *prof, player)]
    return float(np.dot(bg.prior.for_player(player), per_state))


def expected_table(bg: BayesianGame) -> NormalFormTable:
    """Every player's expected cost, each under their own prior."""
    costs = bg.cost_array
    p = bg.prior.probabilities
    out = np.empty(costs.shape[1:])
    for i in range(bg.player_count):
        out[..., i] = np.tensordot(p[i], costs[..., i], axes=(0, 0))
    return NormalFormTable(out)
