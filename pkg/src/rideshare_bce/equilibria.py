"""Pure Bayesian Nash equilibria, welfare benchmarks and price of anarchy."""
from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Optional

import numpy as np

from .bayes import BayesianGame, Profile, expected_table

EQ_TOL = 1e-9


class UndefinedRatioError(ZeroDivisionError):
    pass


def pure_bayes_nash(bg: BayesianGame, tol: float = EQ_TOL) -> list[Profile]:
    """Profiles where no player gains more than ``tol`` by deviating alone.

    Returned in lexicographic order.
    """
    exp = expected_table(bg).costs
    stable = np.ones(bg.strategy_shape, dtype=bool)
    for i in range(bg.player_count):
        own = exp[..., i]
        best = own.min(axis=i, keepdims=True)
        stable &= own <= best + tol
    return [tuple(int(a) for a in p) for p in np.argwhere(stable)]


def expected_system_cost(bg: BayesianGame, profile, objective=None) -> float:
    prof = bg.resolve_profile(profile)
    sc = bg.system_cost_array(objective)[(slice(None), *prof)]
    return float(np.dot(bg.system_prior, sc))


def _minimizers(values: np.ndarray, tol: float) -> list[Profile]:
    best = values.min()
    return [tuple(int(a) for a in p)
            for p in np.argwhere(values <= best + tol)]


@dataclass(frozen=True)
class FullInfoOptimum:
    minimizers: tuple[tuple[Profile, ...], ...]
    state_values: tuple[float, ...]
    value: float

    def best_profiles(self) -> tuple[Profile, ...]:
        return tuple(m[0] for m in self.minimizers)


def full_info_optimum(bg: BayesianGame, objective=None,
                      tol: float = EQ_TOL) -> FullInfoOptimum:
    """Planner who sees the state and picks the best profile for it."""
    prior = bg.system_prior
    sc = bg.system_cost_array(objective)
    mins, vals = [], []
    for x in range(bg.state_count):
        mins.append(tuple(_minimizers(sc[x], tol)))
        vals.append(float(sc[x].min()))
    return FullInfoOptimum(tuple(mins), tuple(vals),
                           float(np.dot(prior, vals)))


@dataclass(frozen=True)
class ExAnteOptimum:
    profiles: tuple[Profile, ...]
    value: float


def ex_ante_optimum(bg: BayesianGame, objective=None,
                    tol: float = EQ_TOL) -> ExAnteOptimum:
    """Best single profile chosen before the state is known."""
    sc = bg.system_cost_array(objective)
    expected = np.tensordot(bg.system_prior, sc, axes=(0, 0))
    return ExAnteOptimum(tuple(_minimizers(expected, tol)),
                         float(expected.min()))


def price_of_anarchy(equilibrium_value: float, optimum_value: float) -> float:
    if optimum_value == 0:
        raise UndefinedRatioError("price of anarchy undefined for zero optimum")
    return equilibrium_value / optimum_value


def format_ratio(ratio: float, places: int = 2) -> str:
    """Round half-even on the decimal representation."""
    q = Decimal(1).scaleb(-places)
    return str(Decimal(repr(float(ratio))).quantize(q, rounding=ROUND_HALF_EVEN))


@dataclass(frozen=True)
class EquilibriumReport:
    pure_bne: tuple[Profile, ...]
    bne_system_costs: tuple[float, ...]
    full_info: FullInfoOptimum
    ex_ante: ExAnteOptimum
    poa_bne: Optional[float]
    poa_best_bne: Optional[float]

    @property
    def worst_bne_cost(self) -> Optional[float]:
        return max(self.bne_system_costs) if self.bne_system_costs else None

    @property
    def best_bne_cost(self) -> Optional[float]:
        return min(self.bne_system_costs) if self.bne_system_costs else None


def analyze_equilibria(bg: BayesianGame, objective=None,
                       tol: float = EQ_TOL) -> EquilibriumReport:
    """PoA uses the worst equilibrium; the best one is reported alongside."""
    bne = tuple(pure_bayes_nash(bg, tol))
    costs = tuple(expected_system_cost(bg, p, objective) for p in bne)
    fio = full_info_optimum(bg, objective, tol)
    exa = ex_ante_optimum(bg, objective, tol)
    poa = best = None
    if bne and fio.value != 0:
        poa = price_of_anarchy(max(costs), fio.value)
        best = price_of_anarchy(min(costs), fio.value)
    return EquilibriumReport(bne, costs, fio, exa, poa, best)
