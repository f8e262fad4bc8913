"""Mediator signaling: the Bayes correlated equilibrium linear program.

The mediator observes the state ``x`` and draws a recommended profile from
``sigma(. | x)``.  A policy is obedient when no player, knowing only their
own recommendation, expects to save by deviating from it.  Among obedient
policies the mediator picks one minimizing expected system cost.

LP variables are ``sigma(a | x)`` laid out state-major, profiles in
lexicographic order within each state.
"""
from __future__ import annotations

import bisect
import itertools
import random
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .bayes import BayesianGame, Profile
from .equilibria import full_info_optimum, price_of_anarchy
from .lp import DEFAULT_TOL, LinearProgram, LPSolution, LPStatus, solve_lp

IC_TOL = 1e-8
NORM_TOL = 1e-9


class PolicyError(ValueError):
    pass


class SolverFault(RuntimeError):
    """The LP solver returned something impossible for a well-posed game."""


@dataclass(frozen=True, eq=False)
class SignalingPolicy:
    """``probabilities[x, a_1, ..., a_N] = sigma(a | x)``."""

    states: tuple[str, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        p = np.array(self.probabilities, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.probabilities.shape[1:]

    def state_index(self, state) -> int:
        try:
            return self.states.index(str(state))
        except ValueError:
            raise KeyError(f"unknown state {state!r}") from None

    def distribution(self, state) -> np.ndarray:
        return self.probabilities[self.state_index(state)]

    def prob(self, state, profile: Profile) -> float:
        return float(self.distribution(state)[tuple(profile)])

    def check(self, tol: float = NORM_TOL) -> None:
        p = self.probabilities
        if p.shape[0] != len(self.states):
            raise PolicyError(f"policy covers {p.shape[0]} states, "
                              f"labels name {len(self.states)}")
        if np.any(~np.isfinite(p)) or np.any(p < -tol) or np.any(p > 1 + tol):
            raise PolicyError("policy probabilities must lie in [0, 1]")
        sums = p.reshape(p.shape[0], -1).sum(axis=1)
        for label, s in zip(self.states, sums):
            if abs(s - 1.0) > tol:
                raise PolicyError(f"sigma(.|{label}) sums to {s:.12g}, not 1")

    def entries(self, min_prob: float = 0.0):
        """``(state, profile, probability)`` rows with probability above
        ``min_prob``."""
        for x, label in enumerate(self.states):
            dist = self.probabilities[x]
            for prof in itertools.product(*(range(k) for k in dist.shape)):
                v = float(dist[prof])
                if v > min_prob:
                    yield label, prof, v


def point_mass_policy(bg: BayesianGame, profile=None, *,
                      per_state: Sequence | None = None) -> SignalingPolicy:
    """Always recommend ``profile``, or ``per_state[x]`` in state ``x``."""
    if (profile is None) == (per_state is None):
        raise PolicyError("give exactly one of profile / per_state")
    profiles = list(per_state) if per_state is not None \
        else [profile] * bg.state_count
    if len(profiles) != bg.state_count:
        raise PolicyError(f"{len(profiles)} profiles for {bg.state_count} states")
    p = np.zeros((bg.state_count, *bg.strategy_shape))
    for x, prof in enumerate(profiles):
        p[(x, *bg.resolve_profile(prof))] = 1.0
    return SignalingPolicy(bg.states, p)


def policy_from_entries(bg: BayesianGame,
                        entries: Iterable[tuple]) -> SignalingPolicy:
    """Build from ``(state, profile, probability)`` rows; missing rows are 0."""
    p = np.zeros((bg.state_count, *bg.strategy_shape))
    for state, profile, prob in entries:
        p[(bg.state_index(state), *bg.resolve_profile(profile))] += float(prob)
    return SignalingPolicy(bg.states, p)


def _name_token(s: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "_", s)


def build_bce_lp(bg: BayesianGame, objective=None,
                 include_ic: bool = True) -> LinearProgram:
    """Obedience-constrained LP over ``sigma``.

    One normalization equality per state.  For each player ``i``, recommended
    ``r`` and deviation ``d != r`` a ``<=``-row with coefficient
    ``p_i(x) * (c_i(r, a_-i | x) - c_i(d, a_-i | x))`` on ``sigma(r, a_-i | x)``.
    """
    costs = bg.cost_array
    sc = bg.system_cost_array(objective)
    shape = bg.strategy_shape
    n_states, n_prof = bg.state_count, int(np.prod(shape))
    n = n_states * n_prof
    prior = bg.system_prior
    c = (prior[:, None] * sc.reshape(n_states, n_prof)).reshape(-1)

    A_eq = np.zeros((n_states, n))
    for x in range(n_states):
        A_eq[x, x * n_prof:(x + 1) * n_prof] = 1.0
    b_eq = np.ones(n_states)

    var_names = []
    for x in range(n_states):
        for prof in bg.profiles():
            labels = "_".join(_name_token(s) for s in bg.profile_labels(prof))
            var_names.append(f"s_x{_name_token(bg.states[x])}_{labels}")

    rows, names = [], []
    if include_ic:
        for i in range(bg.player_count):
            p_i = bg.prior.for_player(i)
            for r in range(shape[i]):
                for d in range(shape[i]):
                    if d == r:
                        continue
                    row = np.zeros((n_states, *shape))
                    obey = [slice(None)] * (1 + len(shape))
                    dev = list(obey)
                    obey[1 + i] = r
                    dev[1 + i] = d
                    gain = costs[(*obey, i)] - costs[(*dev, i)]
                    row[tuple(obey)] = p_i.reshape(-1, *[1] * (len(shape) - 1)) * gain
                    rows.append(row.reshape(-1))
                    names.append(f"ic_p{i + 1}_"
                                 f"{_name_token(bg.strategy_labels[i][r])}_to_"
                                 f"{_name_token(bg.strategy_labels[i][d])}")
    A_le = np.array(rows).reshape(len(rows), n)
    return LinearProgram(c, A_eq, b_eq, A_le, np.zeros(len(rows)),
                         var_names=var_names,
                         eq_names=[f"norm_x{_name_token(s)}" for s in bg.states],
                         le_names=names)


@dataclass(frozen=True, eq=False)
class BCESolution:
    policy: SignalingPolicy
    value: float
    lp: LinearProgram
    lp_solution: LPSolution

    def __iter__(self):
        yield self.policy
        yield self.value


def solve_bce(bg: BayesianGame, objective=None, include_ic: bool = True,
              tolerance: float = DEFAULT_TOL) -> BCESolution:
    lp = build_bce_lp(bg, objective, include_ic)
    sol = solve_lp(lp, tolerance)
    if sol.status is not LPStatus.OPTIMAL:
        raise SolverFault(f"BCE linear program reported {sol.status}")
    probs = np.clip(sol.x, 0.0, None).reshape(bg.state_count, *bg.strategy_shape)
    policy = SignalingPolicy(bg.states, probs)
    return BCESolution(policy, sol.objective_value, lp, sol)


@dataclass(frozen=True)
class ICReport:
    """``slacks[(player, recommended, deviation)]`` is the expected cost of
    deviating minus the expected cost of obeying."""

    slacks: dict[tuple[int, int, int], float]
    tolerance: float

    @property
    def min_slack(self) -> float:
        return min(self.slacks.values(), default=float("inf"))

    @property
    def feasible(self) -> bool:
        return self.min_slack >= -self.tolerance

    def violations(self) -> list[tuple[int, int, int]]:
        return [k for k, v in self.slacks.items() if v < -self.tolerance]


def verify_ic(bg: BayesianGame, policy: SignalingPolicy,
              tolerance: float = IC_TOL) -> ICReport:
    """Recompute every obedience slack straight from the cost tables."""
    if policy.shape != bg.strategy_shape or policy.states != bg.states:
        raise PolicyError("policy does not match the game's states/strategies")
    policy.check()
    costs = bg.cost_array
    sigma = policy.probabilities
    slacks = {}
    for i in range(bg.player_count):
        p_i = bg.prior.for_player(i)
        for r in range(bg.strategy_shape[i]):
            for d in range(bg.strategy_shape[i]):
                if d == r:
                    continue
                obey = deviate = 0.0
                for x in range(bg.state_count):
                    for prof in bg.profiles():
                        if prof[i] != r:
                            continue
                        w = p_i[x] * sigma[(x, *prof)]
                        if w == 0.0:
                            continue
                        alt = prof[:i] + (d,) + prof[i + 1:]
                        obey += w * costs[(x, *prof, i)]
                        deviate += w * costs[(x, *alt, i)]
                slacks[(i, r, d)] = float(deviate - obey)
    return ICReport(slacks, tolerance)


def policy_value(bg: BayesianGame, policy: SignalingPolicy,
                 objective=None) -> float:
    sc = bg.system_cost_array(objective)
    per_state = (policy.probabilities * sc).reshape(bg.state_count, -1).sum(axis=1)
    return float(np.dot(bg.system_prior, per_state))


def bce_poa(bg: BayesianGame, value: Optional[float] = None,
            objective=None) -> float:
    """BCE value over the full-information optimum."""
    if value is None:
        value = solve_bce(bg, objective).value
    return price_of_anarchy(value, full_info_optimum(bg, objective).value)


def is_symmetric(bg: BayesianGame, tol: float = 1e-12) -> bool:
    """Costs invariant under every relabeling of players."""
    labels = bg.strategy_labels
    if any(s != labels[0] for s in labels):
        return False
    costs = bg.cost_array
    n = bg.player_count
    for perm in itertools.permutations(range(n)):
        moved = np.transpose(costs, (0, *(1 + k for k in perm), n + 1))
        moved = moved[..., list(perm)]
        if not np.allclose(moved, costs, atol=tol, rtol=0):
            return False
    if not bg.prior.is_common:
        return False
    return True


def symmetrize(bg: BayesianGame, policy: SignalingPolicy) -> SignalingPolicy:
    """Average the policy over all player relabelings.

    On a symmetric game this keeps obedience and the objective value.
    """
    if not is_symmetric(bg):
        raise PolicyError("symmetrize requires a symmetric game")
    n = bg.player_count
    p = policy.probabilities
    perms = list(itertools.permutations(range(n)))
    acc = sum(np.transpose(p, (0, *(1 + k for k in perm))) for perm in perms)
    return SignalingPolicy(policy.states, acc / len(perms))


def sample_recommendation(policy: SignalingPolicy, state, seed: int) -> Profile:
    """Draw a recommended profile from ``sigma(. | state)``.

    The same ``(policy, state, seed)`` always gives the same draw.
    """
    dist = policy.distribution(state)
    flat = np.clip(dist.reshape(-1), 0.0, None)
    cum = np.cumsum(flat)
    u = random.Random(seed).random() * cum[-1]
    k = bisect.bisect_right(cum.tolist(), u)
    k = min(k, flat.size - 1)
    return tuple(int(a) for a in np.unravel_index(k, dist.shape))
