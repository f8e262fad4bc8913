"""Command line entry point.

Exit codes: 0 ok, 2 syntax/usage, 3 validation, 4 solver fault.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .. import __version__
from ..bayes import PriorError
from ..lp import to_lp_format
from ..model import enumerate_trips
from ..signaling import PolicyError, SolverFault, build_bce_lp
from . import report
from .gamefile import GameFileError, dumps, game_to_dict, load_game_file, load_policy_file

EXIT_OK, EXIT_SYNTAX, EXIT_VALIDATION, EXIT_SOLVER = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _export(path, payload) -> None:
    if path:
        Path(path).write_text(dumps(payload), encoding="utf-8")


def _extra_policies(gf, args):
    return tuple((Path(p).stem, load_policy_file(gf.game, p))
                 for p in args.policy or ())


def _check_state(gf, state):
    if state is not None and state not in gf.game.states:
        raise UsageError(f"unknown state {state!r}; states are "
                         f"{', '.join(gf.game.states)}")


def cmd_analyze(args, out) -> int:
    gf = load_game_file(args.game)
    _check_state(gf, args.state)
    res = report.analyze(gf, not args.no_ic, args.tolerance, args.seed,
                         args.state, _extra_policies(gf, args))
    out.write(report.render_analysis(gf.game, res))
    _export(args.export, res)
    return EXIT_OK


def cmd_bne(args, out) -> int:
    gf = load_game_file(args.game)
    res = report.bne_result(gf.game, gf.options.objective)
    out.write("\n".join(report.render_bne(gf.game, res)) + "\n")
    _export(args.export, res)
    return EXIT_OK


def cmd_bce(args, out) -> int:
    gf = load_game_file(args.game)
    _check_state(gf, args.state)
    res = report.bce_result(gf, not args.no_ic, args.tolerance, args.seed,
                            args.state, _extra_policies(gf, args))
    out.write("\n".join(report.render_bce(gf.game, res)) + "\n")
    if args.lp_out:
        lp = build_bce_lp(gf.game, gf.options.objective, not args.no_ic)
        Path(args.lp_out).write_text(
            to_lp_format(lp, f"BCE program for {gf.game.name}"), encoding="utf-8")
    _export(args.export, res)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    gf = load_game_file(args.game)
    bg = gf.game
    if bg.game is None:
        raise UsageError("game file has no network/edge costs to simulate")
    if args.profile is None:
        raise UsageError("--profile is required, e.g. --profile C,D")
    states = [args.state] if args.state is not None else list(bg.states)
    for s in states:
        _check_state(gf, s)
    try:
        bg.resolve_profile(args.profile)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    results = [report.simulate_result(bg, args.profile, s) for s in states]
    out.write("\n".join(report.render_simulation(r) for r in results))
    _export(args.export, results[0] if len(results) == 1 else results)
    return EXIT_OK


def cmd_enumerate(args, out) -> int:
    gf = load_game_file(args.game)
    g = gf.game.game
    if g is None:
        raise UsageError("game file has no network to enumerate trips on")
    players = [args.player - 1] if args.player else range(g.player_count)
    must = [int(v) for v in args.must.split(",") if v] if args.must else []
    res = []
    for i in players:
        if not 0 <= i < g.player_count:
            raise UsageError(f"no player {i + 1}")
        start = g.player_starts[i]
        end = args.end if args.end is not None else start
        trips = enumerate_trips(g.network, start, end, must, g.horizon)
        res.append({"player": i + 1, "start": start, "end": end,
                    "must_visit": must, "trips": [list(t.nodes) for t in trips]})
        current = {t: lab for lab, t in zip(gf.game.strategy_labels[i],
                                            g.strategy_sets[i])}
        out.write(f"player {i + 1}: {len(trips)} trips {start} -> {end}"
                  + (f" via {must}" if must else "") + "\n")
        for t in trips:
            mark = f"  [strategy {current[t]}]" if t in current else ""
            out.write(f"  {t}{mark}\n")
    _export(args.export, res)
    return EXIT_OK


def cmd_export_game(args, out) -> int:
    gf = load_game_file(args.game)
    text = dumps(game_to_dict(gf))
    if args.export:
        Path(args.export).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rideshare-bce",
        description="Ride-sharing games: equilibria, mediator signaling, "
                    "price of anarchy.")
    parser.add_argument("-V", "--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="<command>")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("game", help="game file (JSON); bundled names such as "
                                    "paper_example.game also work")
        p.add_argument("--export", metavar="PATH",
                       help="write machine-readable results as JSON")
        p.set_defaults(func=func)
        return p

    def solver_flags(p):
        p.add_argument("--no-ic", action="store_true",
                       help="drop the obedience constraints")
        p.add_argument("--tolerance", type=float, default=None,
                       help="LP pivot tolerance (default from the game file)")
        p.add_argument("--seed", type=int, default=None,
                       help="sample a recommendation from the optimal policy")
        p.add_argument("--state", default=None,
                       help="state for --seed sampling (default: every state)")
        p.add_argument("--policy", action="append", metavar="PATH",
                       help="also check a policy file (repeatable)")

    solver_flags(add("analyze", cmd_analyze, "full report"))
    add("bne", cmd_bne, "pure Bayesian Nash equilibria and optima")
    p = add("bce", cmd_bce, "optimal signaling policy")
    solver_flags(p)
    p.add_argument("--lp-out", metavar="PATH",
                   help="write the BCE program in CPLEX LP format")
    p = add("simulate", cmd_simulate, "simulate one day")
    p.add_argument("--profile", help="comma-separated strategy labels")
    p.add_argument("--state", default=None, help="state label (default: all)")
    p = add("enumerate", cmd_enumerate, "list candidate trips")
    p.add_argument("--player", type=int, default=None, help="1-based player")
    p.add_argument("--end", type=int, default=None,
                   help="end node (default: the player's start)")
    p.add_argument("--must", default="", help="comma-separated nodes to visit")
    add("export-game", cmd_export_game,
        "write the parsed game in explicit form (to --export or stdout)")
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = create_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(err)
        return EXIT_SYNTAX
    try:
        return args.func(args, out)
    except GameFileError as exc:
        violations = getattr(exc, "violations", None) or [str(exc)]
        for v in violations:
            err.write(f"error: {v}\n")
        return getattr(exc, "exit_code", EXIT_VALIDATION)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_SYNTAX
    except (PriorError, PolicyError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except SolverFault as exc:
        err.write(f"solver fault: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
