"""JSON game files: schema, loading, validation and export.

See ``docs/game-format.md`` for the field reference.  Structural problems
are reported by the JSON schema; everything else (priors, trips, cost
tables) by the model and bayes validators.  All problems found are
reported together, each prefixed with the field path.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np

from ..bayes import BayesianGame, Prior, validate_bayesian_game
from ..engine import StateInstance
from ..model import (
    EdgeCostTable, GameDefinition, RoadNetwork, Trip, enumerate_trips,
    validate_game, validate_network, validate_trip,
)
from ..signaling import SignalingPolicy, policy_from_entries

BUNDLED = ("paper_example.game",)

_num = {"type": "number"}
_node = {"type": "integer"}
_costs = {"type": "array", "items": {"type": "number"}, "minItems": 2}
_profile = {"type": "array", "items": {"type": "string"}, "minItems": 1}
_policy_entries = {
    "type": "array",
    "items": {
        "type": "object",
        "additionalProperties": False,
        "required": ["state", "profile", "probability"],
        "properties": {
            "state": {"type": "string"},
            "profile": _profile,
            "probability": _num,
        },
    },
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "players", "states", "prior"],
    "properties": {
        "name": {"type": "string"},
        "notes": {"type": "array", "items": {"type": "string"}},
        "network": {
            "type": "object",
            "additionalProperties": False,
            "required": ["nodes", "edges"],
            "properties": {
                "nodes": _node,
                "edges": {
                    "type": "array",
                    "items": {"type": "array", "items": _node,
                              "minItems": 2, "maxItems": 2},
                },
            },
        },
        "horizon": _node,
        "capacity": _node,
        "edge_costs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "default": _costs,
                "loop": _costs,
                "edges": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["edge", "costs"],
                        "properties": {
                            "edge": {"type": "array", "items": _node,
                                     "minItems": 2, "maxItems": 2},
                            "costs": _costs,
                        },
                    },
                },
            },
        },
        "players": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "start": _node,
                    "strategies": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["label"],
                            "properties": {
                                "label": {"type": "string"},
                                "trip": {"type": "array", "items": _node},
                            },
                        },
                    },
                    "enumerate": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {
                            "end": _node,
                            "must_visit": {"type": "array", "items": _node},
                        },
                    },
                },
            },
        },
        "states": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["label"],
                "properties": {
                    "label": {"type": "string"},
                    "vehicles": {"type": "array", "items": _node},
                },
            },
        },
        "prior": {
            "oneOf": [
                {"type": "object", "additionalProperties": _num},
                {"type": "array",
                 "items": {"type": "object", "additionalProperties": _num}},
            ],
        },
        "mediator_prior": {"type": "object", "additionalProperties": _num},
        "matrices": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["state", "entries"],
                "properties": {
                    "state": {"type": "string"},
                    "entries": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["profile", "costs"],
                            "properties": {
                                "profile": _profile,
                                "costs": {"type": "array", "items": _num},
                            },
                        },
                    },
                },
            },
        },
        "options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "objective": {"enum": ["sum", "max"]},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
                "ic_tolerance": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "reference_policies": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "entries"],
                "properties": {
                    "name": {"type": "string"},
                    "notes": {"type": "string"},
                    "entries": _policy_entries,
                },
            },
        },
    },
}

POLICY_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["entries"],
    "properties": {"name": {"type": "string"}, "entries": _policy_entries},
}


class GameFileError(Exception):
    exit_code = 2


class GameSyntaxError(GameFileError):
    exit_code = 2


class GameValidationError(GameFileError):
    exit_code = 3

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Options:
    objective: str = "sum"
    tolerance: float = 1e-9
    ic_tolerance: float = 1e-8


@dataclass(frozen=True, eq=False)
class ReferencePolicy:
    name: str
    policy: SignalingPolicy
    notes: str = ""


@dataclass(frozen=True, eq=False)
class GameFile:
    game: BayesianGame
    options: Options = Options()
    notes: tuple[str, ...] = ()
    reference_policies: tuple[ReferencePolicy, ...] = ()
    player_names: tuple[str, ...] = ()
    # enumeration constraints per player, kept for export
    enumerate_rules: tuple[Optional[dict], ...] = field(default=())
    source: Optional[str] = None


def resolve_path(path: str | Path) -> Path | resources.abc.Traversable:
    """Existing paths win; otherwise bundled scenario names are looked up."""
    p = Path(path)
    if p.exists() or p.name not in BUNDLED:
        return p
    return resources.files("rideshare_bce").joinpath("data", p.name)


def read_json(path: str | Path) -> Any:
    p = resolve_path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise GameFileError(f"{path}: cannot read ({exc.strerror or exc})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameSyntaxError(
            f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _fmt_path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _schema_errors(doc, schema) -> list[str]:
    v = jsonschema.Draft202012Validator(schema)
    errs = sorted(v.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    return [f"{_fmt_path(e.absolute_path)}: {e.message}" for e in errs]


def parse_game_file(path: str | Path) -> BayesianGame:
    return load_game_file(path).game


def load_game_file(path: str | Path) -> GameFile:
    doc = read_json(path)
    gf = game_from_dict(doc)
    return GameFile(gf.game, gf.options, gf.notes, gf.reference_policies,
                    gf.player_names, gf.enumerate_rules, str(path))


def _cost_tables(doc, net: RoadNetwork, capacity: int,
                 errors: list[str]) -> Optional[dict]:
    ec = doc.get("edge_costs")
    if ec is None:
        return None
    tables = {}
    edges = net.sorted_edges()
    for e in edges:
        key = "loop" if e[0] == e[1] and "loop" in ec else "default"
        if key in ec:
            tables[e] = EdgeCostTable(tuple(ec[key]), capacity)
    for k, item in enumerate(ec.get("edges", [])):
        e = tuple(item["edge"])
        if e not in net.edge_set:
            errors.append(f"$.edge_costs.edges[{k}]: edge {e} not in network")
            continue
        tables[e] = EdgeCostTable(tuple(item["costs"]), capacity)
    for e in edges:
        if e not in tables:
            errors.append(f"$.edge_costs: no cost table for edge {e}")
    return tables


def _prior_rows(doc, states, n_players, errors) -> np.ndarray:
    raw = doc["prior"]
    rows = raw if isinstance(raw, list) else [raw] * n_players
    where = "$.prior" if not isinstance(raw, list) else None
    if len(rows) != n_players:
        errors.append(f"$.prior: {len(rows)} player priors for {n_players} players")
        rows = (rows + [raw[0] if raw else {}] * n_players)[:n_players]
    out = np.zeros((n_players, len(states)))
    for i, row in enumerate(rows):
        loc = where or f"$.prior[{i}]"
        unknown = sorted(set(row) - set(states))
        if unknown:
            errors.append(f"{loc}: unknown states {unknown}")
        missing = [s for s in states if s not in row]
        if missing:
            errors.append(f"{loc}: missing states {missing}")
        out[i] = [row.get(s, 0.0) for s in states]
    return out


def game_from_dict(doc: Any) -> GameFile:
    errs = _schema_errors(doc, SCHEMA)
    if errs:
        raise GameValidationError(errs)
    errors: list[str] = []
    name = doc["name"]
    states = [s["label"] for s in doc["states"]]
    n_players = len(doc["players"])

    net = game = None
    instances = None
    enum_rules: list[Optional[dict]] = []
    labels: list[list[str]] = []
    trips: list[list[Trip]] = []
    starts: list[int] = []
    if "network" in doc:
        net = RoadNetwork(doc["network"]["nodes"],
                          tuple(tuple(e) for e in doc["network"]["edges"]))
        errors += [f"$.network: {m}" for m in validate_network(net).messages()]
    horizon = doc.get("horizon")
    capacity = doc.get("capacity")
    if net is not None:
        for key in ("horizon", "capacity"):
            if key not in doc:
                errors.append(f"$.{key}: required with a network")
    for i, pl in enumerate(doc["players"]):
        loc = f"$.players[{i}]"
        start = pl.get("start")
        starts.append(start)
        enum_rules.append(pl.get("enumerate"))
        labels.append([])
        trips.append([])
        if ("strategies" in pl) == ("enumerate" in pl):
            errors.append(f"{loc}: give exactly one of strategies / enumerate")
            continue
        if "enumerate" in pl:
            if net is None or horizon is None or start is None:
                errors.append(f"{loc}.enumerate: needs network, horizon and start")
                continue
            rule = pl["enumerate"]
            found = enumerate_trips(net, start, rule.get("end", start),
                                    rule.get("must_visit", ()), horizon)
            if not found:
                errors.append(f"{loc}.enumerate: no trip satisfies the constraints")
            labels[i] = ["-".join(map(str, t.nodes)) for t in found]
            trips[i] = found
            continue
        labels[i] = [st["label"] for st in pl["strategies"]]
        if len(set(labels[i])) != len(labels[i]):
            errors.append(f"{loc}.strategies: duplicate labels")
        if net is None:
            if any("trip" in st for st in pl["strategies"]):
                errors.append(f"{loc}.strategies: trips require a network")
            continue
        if start is None:
            errors.append(f"{loc}.start: required with a network")
        for k, st in enumerate(pl["strategies"]):
            sloc = f"{loc}.strategies[{k}]"
            if "trip" not in st:
                errors.append(f"{sloc}.trip: required with a network")
                continue
            trip = Trip(tuple(st["trip"]))
            if horizon is not None:
                errors += [f"{sloc}.trip: {m}"
                           for m in validate_trip(net, trip, horizon).messages()]
            if start is not None and trip.nodes and trip.start != start:
                errors.append(f"{sloc}.trip: starts at {trip.start}, "
                              f"player starts at {start}")
            trips[i].append(trip)

    for x, st in enumerate(doc["states"]):
        if "vehicles" in st and net is None:
            errors.append(f"$.states[{x}].vehicles: requires a network")
        for m, v in enumerate(st.get("vehicles", ())):
            if net is not None and not 1 <= v <= net.node_count:
                errors.append(f"$.states[{x}].vehicles[{m}]: unknown node {v}")

    if net is not None and horizon is not None and capacity is not None:
        tables = _cost_tables(doc, net, capacity, errors)
        if tables is not None and not errors:
            game = GameDefinition(net, horizon, capacity, tables,
                                  tuple(tuple(t) for t in trips), tuple(starts))
            errors += [f"$: {m}" for m in validate_game(game).messages()]
            instances = tuple(StateInstance(tuple(st.get("vehicles", ())))
                              for st in doc["states"])
    has_sim = game is not None

    direct = None
    if "matrices" in doc:
        direct = _matrices(doc, states, labels, errors)
    elif not has_sim and not errors:
        errors.append("$: costs need either matrices or network + edge_costs")

    prior = _prior_rows(doc, states, n_players, errors)
    errors += [f"$.prior: {m}" for m in Prior(prior).validate().messages()]
    mediator = None
    if "mediator_prior" in doc:
        mp = doc["mediator_prior"]
        mediator = np.array([mp.get(s, 0.0) for s in states])
        if set(mp) != set(states):
            errors.append("$.mediator_prior: must list every state exactly")

    if errors:
        raise GameValidationError(errors)
    bg = BayesianGame(tuple(states), Prior(prior), tuple(map(tuple, labels)),
                      game=game, state_instances=instances, direct_costs=direct,
                      mediator_prior=mediator, name=name)
    res = validate_bayesian_game(bg)
    if not res.ok:
        raise GameValidationError([f"$: {m}" for m in res.messages()])

    refs = []
    for k, rp in enumerate(doc.get("reference_policies", [])):
        refs.append(ReferencePolicy(
            rp["name"],
            _policy(bg, rp["entries"], f"$.reference_policies[{k}]"),
            rp.get("notes", "")))
    options = Options(**doc.get("options", {}))
    names = tuple(pl.get("name", str(i + 1)) for i, pl in enumerate(doc["players"]))
    return GameFile(bg, options, tuple(doc.get("notes", [])), tuple(refs),
                    names, tuple(enum_rules))


def _matrices(doc, states, labels, errors) -> Optional[np.ndarray]:
    n = len(labels)
    shape = tuple(len(l) for l in labels)
    out = np.full((len(states), *shape, n), np.nan)
    seen_states = set()
    for k, block in enumerate(doc["matrices"]):
        loc = f"$.matrices[{k}]"
        if block["state"] not in states:
            errors.append(f"{loc}.state: unknown state {block['state']!r}")
            continue
        if block["state"] in seen_states:
            errors.append(f"{loc}.state: duplicate state {block['state']!r}")
        seen_states.add(block["state"])
        x = states.index(block["state"])
        for j, entry in enumerate(block["entries"]):
            eloc = f"{loc}.entries[{j}]"
            prof = entry["profile"]
            if len(prof) != n:
                errors.append(f"{eloc}.profile: needs {n} strategies")
                continue
            try:
                idx = tuple(labels[i].index(a) for i, a in enumerate(prof))
            except ValueError:
                errors.append(f"{eloc}.profile: unknown strategy in {prof}")
                continue
            if len(entry["costs"]) != n:
                errors.append(f"{eloc}.costs: needs {n} values")
                continue
            if not np.all(np.isnan(out[(x, *idx)])):
                errors.append(f"{eloc}: duplicate profile {prof}")
            out[(x, *idx)] = entry["costs"]
    for x, s in enumerate(states):
        if s not in seen_states:
            errors.append(f"$.matrices: no matrix for state {s!r}")
        elif np.isnan(out[x]).any():
            errors.append(f"$.matrices: state {s!r} does not cover every profile")
    return out


def _policy(bg: BayesianGame, entries, loc: str) -> SignalingPolicy:
    errors = []
    rows = []
    for k, e in enumerate(entries):
        try:
            bg.state_index(e["state"])
            bg.resolve_profile(e["profile"])
        except (KeyError, ValueError) as exc:
            errors.append(f"{loc}.entries[{k}]: {exc}")
            continue
        rows.append((e["state"], e["profile"], e["probability"]))
    if errors:
        raise GameValidationError(errors)
    return policy_from_entries(bg, rows)


def load_policy_file(bg: BayesianGame, path: str | Path) -> SignalingPolicy:
    doc = read_json(path)
    errs = _schema_errors(doc, POLICY_SCHEMA)
    if errs:
        raise GameValidationError(errs)
    return _policy(bg, doc["entries"], "$")


def policy_to_dict(bg: BayesianGame, policy: SignalingPolicy,
                   name: str = "policy", min_prob: float = 0.0) -> dict:
    return {
        "name": name,
        "entries": [
            {"state": s, "profile": list(bg.profile_labels(p)), "probability": v}
            for s, p, v in policy.entries(min_prob)
        ],
    }


def game_to_dict(gf: GameFile) -> dict:
    """Explicit form of a parsed game; re-parsing yields an equivalent game."""
    bg = gf.game
    doc: dict[str, Any] = {"name": bg.name}
    if gf.notes:
        doc["notes"] = list(gf.notes)
    g = bg.game
    if g is not None:
        doc["network"] = {"nodes": g.network.node_count,
                          "edges": [list(e) for e in g.network.edges]}
        doc["horizon"] = g.horizon
        doc["capacity"] = g.capacity
        doc["edge_costs"] = {"edges": [
            {"edge": list(e), "costs": list(g.cost_tables[e].costs)}
            for e in g.network.sorted_edges()]}
    players = []
    for i in range(bg.player_count):
        pl: dict[str, Any] = {}
        if gf.player_names:
            pl["name"] = gf.player_names[i]
        if g is not None:
            pl["start"] = g.player_starts[i]
            pl["strategies"] = [
                {"label": lab, "trip": list(t.nodes)}
                for lab, t in zip(bg.strategy_labels[i], g.strategy_sets[i])]
        else:
            pl["strategies"] = [{"label": lab} for lab in bg.strategy_labels[i]]
        players.append(pl)
    doc["players"] = players
    states = []
    for x, s in enumerate(bg.states):
        st: dict[str, Any] = {"label": s}
        if bg.state_instances is not None:
            st["vehicles"] = list(bg.state_instances[x].vehicle_starts)
        states.append(st)
    doc["states"] = states
    p = bg.prior.probabilities
    if bg.prior.is_common:
        doc["prior"] = dict(zip(bg.states, map(float, p[0])))
    else:
        doc["prior"] = [dict(zip(bg.states, map(float, row))) for row in p]
    if bg.mediator_prior is not None:
        doc["mediator_prior"] = dict(zip(bg.states, map(float, bg.mediator_prior)))
    if bg.direct_costs is not None:
        doc["matrices"] = [
            {"state": s, "entries": [
                {"profile": list(bg.profile_labels(prof)),
                 "costs": [float(v) for v in bg.direct_costs[(x, *prof)]]}
                for prof in bg.profiles()]}
            for x, s in enumerate(bg.states)]
    doc["options"] = {"objective": gf.options.objective,
                      "tolerance": gf.options.tolerance,
                      "ic_tolerance": gf.options.ic_tolerance}
    if gf.reference_policies:
        doc["reference_policies"] = []
        for rp in gf.reference_policies:
            d = policy_to_dict(bg, rp.policy, rp.name)
            if rp.notes:
                d["notes"] = rp.notes
            doc["reference_policies"].append(d)
    return doc


_FLAT_ARRAY = re.compile(r"\[\s*([^\[\]{}]*?)\s*\]", re.S)


def dumps(doc: Any, width: int = 72) -> str:
    """JSON with short arrays of scalars kept on one line."""
    def flat(m):
        inner = re.sub(r"\s*\n\s*", " ", m.group(1)).strip()
        return "[" + inner + "]" if len(inner) <= width else m.group(0)

    text = json.dumps(doc, indent=2, ensure_ascii=False)
    return _FLAT_ARRAY.sub(flat, text) + "\n"
