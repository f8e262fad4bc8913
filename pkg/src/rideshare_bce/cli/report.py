"""Analysis pipeline results as plain dicts, and their text rendering.

The dicts are what ``--export`` writes; the text views only format them, so
both always show the same numbers.
"""
from __future__ import annotations

from typing import Any, Optional

import numpy as np

from ..bayes import BayesianGame, build_state_tables, expected_table
from ..engine import simulate_day
from ..equilibria import analyze_equilibria, format_ratio, price_of_anarchy
from ..signaling import (
    SignalingPolicy, policy_value, sample_recommendation, solve_bce, verify_ic,
)
from .gamefile import GameFile, policy_to_dict


def num(v: Optional[float], places: int = 4) -> str:
    if v is None:
        return "n/a"
    text = f"{v:.{places}f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def _table_rows(bg: BayesianGame, costs: np.ndarray) -> list[dict]:
    return [{"profile": list(bg.profile_labels(p)),
             "costs": [float(c) for c in costs[p]]} for p in bg.profiles()]


def _profiles(bg: BayesianGame, profiles) -> list[list[str]]:
    return [list(bg.profile_labels(p)) for p in profiles]


def ic_rows(bg: BayesianGame, report) -> list[dict]:
    return [{"player": i + 1,
             "recommended": bg.strategy_labels[i][r],
             "deviation": bg.strategy_labels[i][d],
             "slack": s} for (i, r, d), s in report.slacks.items()]


def policy_result(bg: BayesianGame, policy: SignalingPolicy, optimum: float,
                  ic_tol: float, objective=None) -> dict:
    rep = verify_ic(bg, policy, ic_tol)
    value = policy_value(bg, policy, objective)
    return {
        "value": value,
        "poa": price_of_anarchy(value, optimum) if optimum else None,
        "ic_feasible": rep.feasible,
        "min_slack": rep.min_slack,
        "ic_slacks": ic_rows(bg, rep),
        "policy": policy_to_dict(bg, policy, min_prob=-1.0)["entries"],
    }


def simulation_divergences(bg: BayesianGame) -> list[dict]:
    """Entries where given matrices disagree with the engine."""
    if bg.direct_costs is None or bg.game is None:
        return []
    sim = bg.simulated_cost_array()
    out = []
    for x, s in enumerate(bg.states):
        for p in bg.profiles():
            for i in range(bg.player_count):
                given, got = bg.direct_costs[(x, *p, i)], sim[(x, *p, i)]
                if given != got:
                    out.append({"state": s, "profile": list(bg.profile_labels(p)),
                                "player": i + 1, "matrix": float(given),
                                "simulated": float(got)})
    return out


def bne_result(bg: BayesianGame, objective=None) -> dict:
    eq = analyze_equilibria(bg, objective)
    return {
        "bne": [{"profile": list(bg.profile_labels(p)), "system_cost": c}
                for p, c in zip(eq.pure_bne, eq.bne_system_costs)],
        "full_info_optimum": {
            "value": eq.full_info.value,
            "per_state": [{"state": s, "value": v, "minimizers": _profiles(bg, m)}
                          for s, v, m in zip(bg.states, eq.full_info.state_values,
                                             eq.full_info.minimizers)],
        },
        "ex_ante_optimum": {"value": eq.ex_ante.value,
                            "minimizers": _profiles(bg, eq.ex_ante.profiles)},
        "poa_bne": eq.poa_bne,
        "poa_best_bne": eq.poa_best_bne,
    }


def bce_result(gf: GameFile, include_ic: bool = True,
               tolerance: Optional[float] = None,
               seed: Optional[int] = None, state: Optional[str] = None,
               extra_policies: tuple = ()) -> dict:
    bg = gf.game
    objective = gf.options.objective
    tol = tolerance if tolerance is not None else gf.options.tolerance
    ic_tol = gf.options.ic_tolerance
    sol = solve_bce(bg, objective, include_ic, tol)
    optimum = bne_result(bg, objective)["full_info_optimum"]["value"]
    out = {"include_ic": include_ic, "tolerance": tol}
    res = policy_result(bg, sol.policy, optimum, ic_tol, objective)
    res["value"] = sol.value
    res["poa"] = price_of_anarchy(sol.value, optimum) if optimum else None
    res["lp_iterations"] = sol.lp_solution.iterations
    out.update(res)
    if seed is not None:
        states = [state] if state is not None else list(bg.states)
        out["samples"] = [
            {"state": s, "seed": seed,
             "profile": list(bg.profile_labels(
                 sample_recommendation(sol.policy, s, seed)))}
            for s in states]
    refs = []
    for name, policy in [(r.name, r.policy) for r in gf.reference_policies] + \
            list(extra_policies):
        r = policy_result(bg, policy, optimum, ic_tol, objective)
        r["name"] = name
        refs.append(r)
    out["reference_policies"] = refs
    return out


def analyze(gf: GameFile, include_ic: bool = True,
            tolerance: Optional[float] = None, seed: Optional[int] = None,
            state: Optional[str] = None, extra_policies: tuple = ()) -> dict:
    bg = gf.game
    tables = build_state_tables(bg)
    out: dict[str, Any] = {
        "game": bg.name,
        "players": bg.player_count,
        "states": list(bg.states),
        "strategies": [list(s) for s in bg.strategy_labels],
        "prior": bg.prior.probabilities.tolist(),
        "objective": gf.options.objective,
        "state_tables": {s: _table_rows(bg, t.costs) for s, t in tables.items()},
        "expected_table": _table_rows(bg, expected_table(bg).costs),
    }
    out.update(bne_result(bg, gf.options.objective))
    out["bce"] = bce_result(gf, include_ic, tolerance, seed, state, extra_policies)
    out["simulation_divergences"] = simulation_divergences(bg)
    return out


def simulate_result(bg: BayesianGame, profile, state: str) -> dict:
    prof = bg.resolve_profile(profile)
    x = bg.state_index(state)
    trace, costs = simulate_day(bg.game, prof, bg.state_instances[x])
    periods = []
    for t in range(trace.periods):
        rows = []
        for i in range(bg.player_count):
            m = trace.assignment[(i, t)]
            occ = 0 if m is None else trace.occupancy[(m, t)]
            edge = trace.player_edges[(i, t)]
            rows.append({"player": i + 1, "edge": list(edge),
                         "vehicle": None if m is None else m + 1,
                         "occupancy": occ,
                         "cost": bg.game.table(edge).cost(occ)})
        periods.append({"period": t + 1, "moves": rows,
                        "vehicles": [trace.vehicle_path[(m, t)]
                                     for m in range(len(bg.state_instances[x].vehicle_starts))]})
    return {"game": bg.name, "state": bg.states[x],
            "profile": list(bg.profile_labels(prof)),
            "periods": periods, "costs": list(costs.per_player),
            "system_cost": costs.system_cost}


# text rendering ----------------------------------------------------------

def _grid(bg: BayesianGame, rows: list[dict], fmt) -> list[str]:
    if bg.player_count != 2:
        width = max(len(",".join(r["profile"])) for r in rows)
        return ["  " + ",".join(r["profile"]).ljust(width) + "  " + fmt(r)
                for r in rows]
    lab1, lab2 = bg.strategy_labels
    cells = {tuple(r["profile"]): fmt(r) for r in rows}
    head = [""] + list(lab2)
    body = [[a] + [cells[(a, b)] for b in lab2] for a in lab1]
    widths = [max(len(row[k]) for row in [head] + body) for k in range(len(head))]
    def line(row):
        return "  " + "  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip()
    return [line(head)] + [line(r) for r in body]


def _costs_fmt(r):
    return ", ".join(num(c) for c in r["costs"])


def _prof(p) -> str:
    return "(" + ",".join(p) + ")"


def _ratio(r: Optional[float]) -> str:
    return "n/a" if r is None else f"{format_ratio(r)} ({num(r, 6)})"


def render_bne(bg: BayesianGame, res: dict) -> list[str]:
    lines = []
    if res["bne"]:
        lines.append("pure BNE: " + ", ".join(
            f"{_prof(b['profile'])} system cost {num(b['system_cost'])}"
            for b in res["bne"]))
    else:
        lines.append("pure BNE: none")
    fio = res["full_info_optimum"]
    lines.append(f"full-information optimum: {num(fio['value'])}")
    for ps in fio["per_state"]:
        lines.append(f"  x={ps['state']}: "
                     + ", ".join(_prof(p) for p in ps["minimizers"])
                     + f"  system cost {num(ps['value'])}")
    exa = res["ex_ante_optimum"]
    lines.append(f"ex-ante optimum: {num(exa['value'])}  "
                 + ", ".join(_prof(p) for p in exa["minimizers"]))
    lines.append(f"PoA under BNE: {_ratio(res['poa_bne'])}")
    if res["bne"] and len(res["bne"]) > 1:
        lines.append(f"PoA under best BNE: {_ratio(res['poa_best_bne'])}")
    return lines


def _render_policy(bg: BayesianGame, entries: list[dict]) -> list[str]:
    lines = []
    for s in bg.states:
        rows = [{"profile": e["profile"], "p": e["probability"]}
                for e in entries if e["state"] == s]
        lines.append(f"  sigma(a | x={s})")
        lines += ["  " + l for l in _grid(bg, rows, lambda r: num(max(r["p"], 0.0)))]
    return lines


def _render_slacks(rows: list[dict]) -> list[str]:
    head = ["player", "recommended", "deviation", "slack"]
    body = [[str(r["player"]), r["recommended"], r["deviation"], num(r["slack"])]
            for r in rows]
    widths = [max(len(x[k]) for x in [head] + body) for k in range(4)]
    return ["  " + "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
            for row in [head] + body]


def render_bce(bg: BayesianGame, res: dict) -> list[str]:
    lines = []
    tag = "" if res["include_ic"] else " (obedience constraints dropped)"
    lines.append(f"BCE value{tag}: {num(res['value'])}")
    lines.append(f"PoA under BCE: {_ratio(res['poa'])}")
    lines.append("optimal signaling policy:")
    lines += _render_policy(bg, res["policy"])
    feas = "feasible" if res["ic_feasible"] else "VIOLATED"
    lines.append(f"obedience check: {feas} (min slack {num(res['min_slack'])})")
    lines += _render_slacks(res["ic_slacks"])
    for s in res.get("samples", []):
        lines.append(f"recommendation x={s['state']} seed={s['seed']}: "
                     f"{_prof(s['profile'])}")
    for ref in res["reference_policies"]:
        feas = "IC-feasible" if ref["ic_feasible"] else "NOT IC-feasible"
        lines.append(f"reference policy '{ref['name']}': {feas}, value "
                     f"{num(ref['value'])} ({num(ref['value'], 1)}), "
                     f"PoA {_ratio(ref['poa'])}")
        lines += _render_slacks(ref["ic_slacks"])
    return lines


def render_analysis(bg: BayesianGame, res: dict) -> str:
    lines = [f"game: {res['game']}",
             f"players: {res['players']}  states: {', '.join(res['states'])}  "
             f"profiles: {len(res['expected_table'])}",
             f"objective: {res['objective']}", ""]
    for s, rows in res["state_tables"].items():
        lines.append(f"costs c_i(a | x={s}):")
        lines += _grid(bg, rows, _costs_fmt)
        lines.append("")
    lines.append("expected costs E_x[c_i(a | x)]:")
    lines += _grid(bg, res["expected_table"], _costs_fmt)
    lines.append("")
    lines += render_bne(bg, res)
    lines.append("")
    lines += render_bce(bg, res["bce"])
    div = res["simulation_divergences"]
    if div:
        lines.append("")
        lines.append("matrix entries differing from simulation:")
        for d in div:
            lines.append(f"  x={d['state']} {_prof(d['profile'])} player "
                         f"{d['player']}: matrix {num(d['matrix'])}, "
                         f"simulated {num(d['simulated'])}")
    return "\n".join(lines) + "\n"


def render_simulation(res: dict) -> str:
    lines = [f"game: {res['game']}  state: {res['state']}  "
             f"profile: {_prof(res['profile'])}"]
    for per in res["periods"]:
        lines.append(f"period {per['period']}: vehicles at "
                     f"{per['vehicles'] or 'none'}")
        for mv in per["moves"]:
            veh = "walks" if mv["vehicle"] is None else \
                f"vehicle {mv['vehicle']} (occupancy {mv['occupancy']})"
            e = mv["edge"]
            lines.append(f"  player {mv['player']}: {e[0]}->{e[1]} {veh} "
                         f"cost {num(mv['cost'])}")
    lines.append("costs: " + ", ".join(num(c) for c in res["costs"])
                 + f"  system cost {num(res['system_cost'])}")
    return "\n".join(lines) + "\n"
