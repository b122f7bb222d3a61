"""Command-line entry point: ``ne-forge <command> ...``.

Exit codes: 0 when a command completes (whatever the verdict), 1 when
``conjecture`` finds a counterexample, 2 on any input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from typing import Any, Sequence

from .equilibrium import (
    Certificate,
    achievable_outcomes,
    find_ne,
    is_ne,
    is_une,
    ne_inventory,
    nonterminal_starts,
    refute_ne,
    verify_certificate,
)
from .game import (
    Game,
    GameError,
    Mode,
    check_condition_C,
    check_condition_C22,
    check_condition_Cprime,
    check_condition_Cprime22,
    contract_game,
    game_from_json,
    game_to_json,
    k_c,
    k_interior,
    merge_cyclic_outcomes,
)
from .graph import Digraph, GraphError, scc_decompose, to_dot
from .lab.enumerate import FILTERS, EnumSpec, SpecError
from .lab.random_games import random_game
from .lab.scan import CONJECTURES, COUNTEREXAMPLE, SearchReport, check_conjecture, run_scan
from .lab.surgery import extend_with_prefix, remove_initial
from .play import ProfileError, StrategyProfile, game_to_dot, profile_from_json, profile_to_json, resolve_play
from .solvers import SolverError, backward_induction, solve_two_person

log = logging.getLogger("ne_forge")

JOBS_ENV = "NE_FORGE_JOBS"


class InputError(Exception):
    """Bad user input; ``code`` names the diagnostic class."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# -- I/O --------------------------------------------------------------------


def _read_json(path: str) -> Any:
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError("io", f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError("json", f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc


def _load_game(path: str) -> Game:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InputError("json", f"{path}: a game must be a JSON object")
    return game_from_json(data)


def _load_profile(game: Game, path: str) -> StrategyProfile:
    data = _read_json(path)
    if isinstance(data, dict) and "profile" in data:
        data = data["profile"]
    if not isinstance(data, dict):
        raise InputError("json", f"{path}: a profile must map vertex ids to successors")
    try:
        return profile_from_json(game, data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ProfileError):
            raise
        raise InputError("json", f"{path}: malformed profile ({exc})") from exc


def dumps(obj: Any) -> str:
    """Byte-stable JSON rendering."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _emit(args: argparse.Namespace, payload: Any, text: str | None = None, dot: str | None = None) -> None:
    fmt = args.format
    if fmt == "dot":
        if dot is None:
            raise InputError("flags", f"--format dot is not available for '{args.command}'")
        out = dot
    elif fmt == "text" and text is not None:
        out = text if text.endswith("\n") else text + "\n"
    else:
        out = dumps(payload)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _parse_shard(text: str) -> tuple[int, int]:
    try:
        i, m = (int(x) for x in text.split("/"))
    except ValueError as exc:
        raise InputError("flags", f"--shard expects i/m, got {text!r}") from exc
    if m < 1 or not 0 <= i < m:
        raise InputError("flags", f"--shard {text}: need 0 <= i < m")
    return i, m


def _jobs(args: argparse.Namespace) -> int:
    raw = args.jobs if args.jobs is not None else os.environ.get(JOBS_ENV, "1")
    try:
        jobs = int(raw)
    except ValueError as exc:
        raise InputError("flags", f"jobs must be an integer, got {raw!r}") from exc
    if jobs < 1:
        raise InputError("flags", "jobs must be at least 1")
    return jobs


def _label(game: Game, o) -> str:
    return game.form.outcome_label(o)


# -- commands -----------------------------------------------------------------


def cmd_scc(args: argparse.Namespace) -> int:
    data = _read_json(args.input)
    if not isinstance(data, dict) or "edges" not in data:
        raise InputError("json", f"{args.input}: expected an object with 'edges'")
    try:
        edges = [(int(u), int(v)) for u, v in data["edges"]]
    except (TypeError, ValueError) as exc:
        raise InputError("json", f"{args.input}: malformed edge list") from exc
    g = Digraph.from_edges(edges, data.get("vertices"))
    part = scc_decompose(g)
    payload = {
        "components": [
            {"id": cid, "vertices": sorted(comp), "class": part.scc_class[cid].value}
            for cid, comp in enumerate(part.components)
        ],
        "condensation": [list(e) for e in part.condensation.sorted_edges()],
    }
    text = "\n".join(
        f"{cid}: {part.scc_class[cid].value:<9} {sorted(comp)}" for cid, comp in enumerate(part.components)
    )
    _emit(args, payload, text, to_dot(g, part))
    return 0


def cmd_conditions(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    players = range(1, game.n + 1)
    if game.mode is Mode.DG:
        ok22, pair = check_condition_C22(game)
        payload = {
            "mode": "dg",
            "k_c": {str(i): k_c(game, i) for i in players},
            "C": check_condition_C(game),
            "C22": ok22,
            "witnesses": list(pair) if pair else None,
        }
        text = f"C: {str(payload['C']).lower()}\nC22: {str(ok22).lower()}"
        if pair:
            text += f" (players {pair[0]} and {pair[1]})"
    else:
        ok22, pair = check_condition_Cprime22(game)
        payload = {
            "mode": "dgms",
            "k": {
                str(i): {str(j): k_interior(game, i, j) for j in range(1, game.form.q + 1)} for i in players
            },
            "Cprime": check_condition_Cprime(game),
            "Cprime22": ok22,
            "witnesses": [list(w) for w in pair] if pair else None,
        }
        text = f"C': {str(payload['Cprime']).lower()}\nC'22: {str(ok22).lower()}"
        if pair:
            text += f" (witnesses {pair[0]}, {pair[1]})"
    _emit(args, payload, text)
    return 0


def _start_of(game: Game, start: int | None) -> int:
    if start is None:
        if game.initial is None:
            raise InputError("flags", "game has no initial vertex; pass --start")
        return game.initial
    if not 0 <= start < game.graph.vertex_count:
        raise InputError("flags", f"--start {start} is not a vertex")
    return start


def cmd_resolve(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    s = _load_profile(game, args.profile)
    start = _start_of(game, args.start)
    play = resolve_play(game, s, start)
    payload = {
        "start": start,
        "path": list(play.path),
        "shape": "finite" if play.is_finite else "lasso",
        "cycle": list(play.cycle),
        "outcome": _label(game, play.outcome),
    }
    text = f"{' -> '.join(map(str, play.path))}  [{payload['shape']}] outcome {payload['outcome']}"
    _emit(args, payload, text, game_to_dot(game, s, start))
    return 0


def cmd_check_ne(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    s = _load_profile(game, args.profile)
    start = _start_of(game, args.start)
    ok = is_ne(game, s, start)
    outcome = resolve_play(game, s, start).outcome
    achievable = {
        str(i): sorted(_label(game, o) for o in achievable_outcomes(game, s, i, start)) for i in range(1, game.n + 1)
    }
    payload = {"start": start, "is_ne": ok, "outcome": _label(game, outcome), "achievable": achievable}
    _emit(args, payload, f"is_ne: {str(ok).lower()} (outcome {payload['outcome']})")
    return 0


def cmd_check_une(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    s = _load_profile(game, args.profile)
    per_start = {str(v): is_ne(game, s, v) for v in nonterminal_starts(game)}
    ok = is_une(game, s)
    payload = {"is_une": ok, "is_ne_from": per_start}
    _emit(args, payload, f"is_une: {str(ok).lower()}")
    return 0


def _solution(game: Game, s: StrategyProfile | None, cert: Certificate | None = None) -> dict[str, Any]:
    out: dict[str, Any] = {"profile": None if s is None else profile_to_json(s)}
    if s is not None and game.initial is not None:
        out["outcome"] = _label(game, resolve_play(game, s, game.initial).outcome)
    if cert is not None:
        out["certificate"] = cert.to_json()
    return out


def cmd_solve(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    if game.initial is None:
        raise InputError("flags", "find_ne needs a game with an initial vertex")
    s = find_ne(game)
    payload = _solution(game, s, refute_ne(game) if s is None else None)
    text = "no NE (certificate in JSON output)" if s is None else f"NE {profile_to_json(s)} outcome {payload['outcome']}"
    _emit(args, payload, text, None if s is None else game_to_dot(game, s))
    return 0


def cmd_solve2(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    s = solve_two_person(game)
    payload = _solution(game, s)
    _emit(args, payload, f"NE {profile_to_json(s)} outcome {payload['outcome']}", game_to_dot(game, s))
    return 0


def cmd_bi(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    s = backward_induction(game)
    payload = _solution(game, s)
    _emit(args, payload, f"BI {profile_to_json(s)}", game_to_dot(game, s))
    return 0


def cmd_inventory(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    if game.initial is None:
        raise InputError("flags", "inventory needs a game with an initial vertex")
    inv = ne_inventory(game)

    def rows(items):
        return [{"profile": profile_to_json(s), "outcome": _label(game, o)} for s, o in items]

    payload = {
        "terminal_ne": rows(inv.terminal_ne),
        "cyclic_ne": rows(inv.cyclic_ne),
        "vt_reachable_from_initial": inv.vt_reachable_from_initial,
    }
    text = (
        f"terminal NE: {len(inv.terminal_ne)}\ncyclic NE: {len(inv.cyclic_ne)}\n"
        f"terminals reachable from v0: {str(inv.vt_reachable_from_initial).lower()}"
    )
    _emit(args, payload, text)
    return 0


def cmd_merge(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    if args.contract:
        game, _ = contract_game(game)
    merged = merge_cyclic_outcomes(game)
    _emit(args, game_to_json(merged), None, game_to_dot(merged))
    return 0


def cmd_remove_initial(args: argparse.Namespace) -> int:
    sub = remove_initial(_load_game(args.game))
    _emit(args, game_to_json(sub), None, game_to_dot(sub))
    return 0


def cmd_extend(args: argparse.Namespace) -> int:
    core = _load_game(args.game)
    data = _read_json(args.prefix)
    try:
        prefix = Digraph.from_edges([(int(u), int(v)) for u, v in data["edges"]], data.get("vertices"))
        attach = {int(x): int(y) for x, y in data["attach"].items()}
        owner = {int(v): int(i) for v, i in data["owner"].items()}
        initial = data.get("initial")
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError("json", f"{args.prefix}: prefix needs 'edges', 'attach' and 'owner' ({exc})") from exc
    game = extend_with_prefix(core, prefix, attach, owner, None if initial is None else int(initial))
    _emit(args, game_to_json(game), None, game_to_dot(game))
    return 0


def _spec(args: argparse.Namespace, mode: Mode) -> EnumSpec:
    filters = set()
    for f in args.filter or ():
        name = f[len("require_") :] if f.startswith("require_") else f
        if name not in FILTERS:
            raise InputError("flags", f"unknown filter {f!r}; choose from {', '.join(FILTERS)}")
        filters.add(name)
    return EnumSpec(
        n=args.players,
        max_nonterminal=args.max_nonterminal,
        max_terminals=args.max_terminals,
        max_outdeg=args.max_outdeg,
        mode=mode,
        filters=frozenset(filters),
        shard=_parse_shard(args.shard),
        canonical_dedup=args.dedup,
        min_nonterminal=args.min_nonterminal,
        min_terminals=args.min_terminals,
        min_outdeg=args.min_outdeg,
        max_interior=args.max_interior,
    )


def _report_text(report: SearchReport) -> str:
    lines = [f"{k}: {v}" for k, v in sorted(report.counts.items())]
    if report.verdict:
        lines.append(f"verdict: {report.verdict}")
    return "\n".join(lines)


def cmd_search(args: argparse.Namespace) -> int:
    spec = _spec(args, Mode(args.mode or "dg"))
    report = run_scan(spec, args.kind, None, args.max_examples, _jobs(args))
    _emit(args, report.to_json(), _report_text(report))
    return 0


def _conjecture_id(text: str) -> str:
    name = text.strip().lower().replace("_", "-")
    if name not in CONJECTURES:
        raise InputError("flags", f"unknown conjecture {text!r}; choose from {', '.join(sorted(CONJECTURES))}")
    return name


def cmd_conjecture(args: argparse.Namespace) -> int:
    which = _conjecture_id(args.which)
    mode = Mode(args.mode) if args.mode else CONJECTURES[which].mode
    spec = _spec(args, mode)
    report = check_conjecture(spec, which, max_examples=args.max_examples, jobs=_jobs(args))
    _emit(args, report.to_json(), _report_text(report))
    return 1 if report.verdict == COUNTEREXAMPLE else 0


def _certificates_in(data: dict[str, Any]) -> list[dict[str, Any]]:
    if "refutations" in data:
        return [data]
    if "counts" in data and "examples" in data:
        entries = list(data["examples"])
        if data.get("first_counterexample"):
            entries.append(data["first_counterexample"])
        return [e["certificate"] for e in entries]
    raise InputError("json", "expected a certificate or a search report")


def cmd_verify_certificate(args: argparse.Namespace) -> int:
    data = _read_json(args.input)
    if not isinstance(data, dict):
        raise InputError("json", f"{args.input}: expected a JSON object")
    results = []
    for raw in _certificates_in(data):
        try:
            cert = Certificate.from_json(raw)
        except (KeyError, TypeError) as exc:
            raise InputError("json", f"malformed certificate ({exc})") from exc
        results.append(verify_certificate(cert))
    bad = [p for p in results if p]
    payload = {"certificates": len(results), "valid": not bad, "problems": [p for ps in results for p in ps]}
    _emit(args, payload, f"{len(results)} certificate(s): {'valid' if not bad else 'INVALID'}")
    if bad:
        raise InputError("certificate", f"{len(bad)} certificate(s) failed replay: {bad[0][0]}")
    return 0


def cmd_export_dot(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    s = _load_profile(game, args.profile) if args.profile else None
    start = None if args.start is None else _start_of(game, args.start)
    dot = game_to_dot(game, s, start)
    args.format = "dot"
    _emit(args, None, None, dot)
    return 0


def cmd_random_game(args: argparse.Namespace) -> int:
    rng = random.Random(args.seed)
    game = random_game(
        rng,
        args.players,
        args.max_nonterminal,
        args.max_terminals,
        args.max_outdeg,
        Mode(args.mode or "dg"),
        acyclic=args.acyclic,
    )
    _emit(args, game_to_json(game), None, game_to_dot(game))
    return 0


# -- parser -------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "dot", "text"), default="json")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")


def _game_cmd(sub, name: str, func, help_text: str, profile: bool = False, start: bool = False):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("game", help="game JSON file ('-' for stdin)")
    if profile:
        p.add_argument("profile", help="profile JSON file: {vertex: successor}")
    if start:
        p.add_argument("--start", type=int, help="start vertex (default: the initial vertex)")
    _common(p)
    p.set_defaults(func=func)
    return p


def _scan_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--players", type=int, required=True)
    p.add_argument("--max-nonterminal", type=int, required=True)
    p.add_argument("--max-terminals", type=int, required=True)
    p.add_argument("--max-outdeg", type=int, default=2)
    p.add_argument("--min-nonterminal", type=int, default=1)
    p.add_argument("--min-terminals", type=int, default=0)
    p.add_argument("--min-outdeg", type=int, default=1)
    p.add_argument("--max-interior", type=int, help="DGMS only: skip digraphs with more interior SCCs")
    p.add_argument("--mode", choices=("dg", "dgms"))
    p.add_argument("--filter", action="append", help=f"hypothesis filter, repeatable: {', '.join(FILTERS)}")
    p.add_argument("--dedup", action="store_true", help="canonical digraph deduplication")
    p.add_argument("--shard", default="0/1", help="i/m: scan every m-th digraph starting at i")
    p.add_argument("--jobs", type=int, help=f"worker processes (default: ${JOBS_ENV} or 1)")
    p.add_argument("--max-examples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; scans are exhaustive")
    _common(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ne-forge", description="Nash equilibria of DG and DGMS games.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scc", help="SCC decomposition and classification of a digraph or game")
    p.add_argument("input", help="JSON with 'edges' (and optional 'vertices')")
    _common(p)
    p.set_defaults(func=cmd_scc)

    _game_cmd(sub, "conditions", cmd_conditions, "conditions C/C22 (DG) or C'/C'22 (DGMS) with witnesses")
    _game_cmd(sub, "resolve", cmd_resolve, "play and outcome of a profile", profile=True, start=True)
    _game_cmd(sub, "check-ne", cmd_check_ne, "is the profile a NE from the start vertex", profile=True, start=True)
    _game_cmd(sub, "check-une", cmd_check_une, "is the profile a uniform NE", profile=True)
    _game_cmd(sub, "solve", cmd_solve, "lexicographically first NE, or a refutation certificate")
    _game_cmd(sub, "solve2", cmd_solve2, "two-person solver")
    _game_cmd(sub, "bi", cmd_bi, "backward induction on an acyclic game")
    _game_cmd(sub, "inventory", cmd_inventory, "all NE split into terminal and cyclic")
    p = _game_cmd(sub, "merge", cmd_merge, "merge the cyclic outcomes of a DGMS game into c")
    p.add_argument("--contract", action="store_true", help="contract terminal SCCs to sinks first")
    _game_cmd(sub, "remove-initial", cmd_remove_initial, "subgame without the initial vertex")
    p = _game_cmd(sub, "extend", cmd_extend, "glue an acyclic prefix above a game")
    p.add_argument("--prefix", required=True, help="JSON with 'edges', 'attach', 'owner', optional 'initial'")

    p = sub.add_parser("search", help="exhaustive scan for NE-free or UNE-free games")
    _scan_flags(p)
    p.add_argument("--kind", choices=("ne", "une"), default="ne")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("conjecture", help="check a Nash-solvability conjecture up to a bound")
    _scan_flags(p)
    p.add_argument("--which", required=True, help=", ".join(sorted(CONJECTURES)))
    p.set_defaults(func=cmd_conjecture)

    p = sub.add_parser("verify-certificate", help="replay a certificate or every certificate of a report")
    p.add_argument("input")
    _common(p)
    p.set_defaults(func=cmd_verify_certificate)

    p = sub.add_parser("export-dot", help="DOT rendering of a game, optionally with a profile")
    p.add_argument("game")
    p.add_argument("--profile")
    p.add_argument("--start", type=int)
    _common(p)
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("random-game", help="a seeded random game")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--players", type=int, default=2)
    p.add_argument("--max-nonterminal", type=int, default=4)
    p.add_argument("--max-terminals", type=int, default=3)
    p.add_argument("--max-outdeg", type=int, default=3)
    p.add_argument("--mode", choices=("dg", "dgms"))
    p.add_argument("--acyclic", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_random_game)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        code, msg = exc.code, str(exc)
    except GameError as exc:
        code, msg = exc.code, str(exc)
    except ProfileError as exc:
        code, msg = "profile", str(exc)
    except GraphError as exc:
        code, msg = "graph", str(exc)
    except SpecError as exc:
        code, msg = "spec", str(exc)
    except SolverError as exc:
        code, msg = "solver", str(exc)
    print(f"ne-forge: error[{code}]: {msg}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
