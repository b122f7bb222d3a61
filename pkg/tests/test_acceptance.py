"""Acceptance criteria 1-10; a PASS/FAIL line per criterion is printed at the end of the run.

Run alone with ``pytest tests/test_acceptance.py`` (about 15 minutes on one core).
"""
from __future__ import annotations

import itertools
import json
import random
import time
from contextlib import contextmanager

import pytest

from ne_forge.cli import dumps, main
from ne_forge.equilibrium import (
    Certificate,
    achievable_outcomes,
    find_ne,
    find_une,
    is_ne,
    is_une,
    verify_certificate,
)
from ne_forge.game import Game, GameError, Mode, game_from_json, k_c
from ne_forge.graph import Digraph
from ne_forge.lab import (
    EnumSpec,
    SearchReport,
    check_conjecture,
    enumerate_games,
    extend_une_to_ne,
    extend_with_prefix,
    merge_reports,
    remove_initial,
    run_scan,
)
from ne_forge.lab.enumerate import iter_graphs, iter_owners
from ne_forge.lab.random_games import random_game
from ne_forge.lab.suites import merge_suite, two_person_suite
from ne_forge.play import enumerate_profiles
from ne_forge.solvers import backward_induction, solve_two_person
from oracles import achievable_oracle, first_ne_oracle, first_une_oracle

TITLES = {
    1: "two-person DG games are Nash-solvable",
    2: "two-person DGMS solver returns a NE",
    3: "every NE-free 3-person game has two players with k_c >= 2",
    4: "conjecture scans at the criterion-3 bounds",
    5: "achievable outcomes match brute-force deviations",
    6: "backward induction is subgame perfect",
    7: "NE-free games have a UNE-free subgame",
    8: "a UNE extends to a NE at v_0",
    9: "merging cyclic outcomes respects NE",
    10: "reports are byte-identical across jobs and shards",
}
RESULTS: dict[int, dict[str, tuple[bool, str]]] = {}

# 3-person DG bounds shared by criteria 3, 4 and 7
THREE = dict(
    n=3, min_nonterminal=4, max_nonterminal=4, min_terminals=3, max_terminals=3,
    min_outdeg=2, max_outdeg=2, canonical_dedup=True,
)
# two-person DGMS bounds shared by criteria 2 and 9
TWO_DGMS = EnumSpec(n=2, max_nonterminal=4, max_terminals=1, max_outdeg=2, mode="dgms", canonical_dedup=True, max_interior=2)


def summary_lines() -> list[str]:
    lines = []
    for num in sorted(TITLES):
        parts = RESULTS.get(num)
        if not parts:
            continue
        ok = all(p for p, _ in parts.values())
        lines.append(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {TITLES[num]}")
        for name, (p, detail) in sorted(parts.items()):
            lines.append(f"    {'ok  ' if p else 'FAIL'} {name}: {detail}")
    return lines


@contextmanager
def criterion(num: int, part: str = "main"):
    """Record the outcome of one criterion part; ``detail`` is filled in by the body."""
    detail: dict[str, str] = {"text": ""}
    ok = False
    try:
        yield detail
        ok = True
    finally:
        RESULTS.setdefault(num, {})[part] = (ok, detail["text"] or ("passed" if ok else "assertion failed"))


def sample_games(spec: EnumSpec, step: int, limit: int):
    return itertools.islice((g for k, (_, g) in enumerate(enumerate_games(spec)) if k % step == 0), limit)


# -- criterion 1 ------------------------------------------------------------


def test_criterion_1_two_person_dg():
    with criterion(1) as d:
        spec = EnumSpec(n=2, max_nonterminal=3, max_terminals=2, max_outdeg=3)
        t0 = time.perf_counter()
        report = run_scan(spec, "ne", max_examples=5)
        elapsed = time.perf_counter() - t0
        c = report.counts
        assert c["games_scanned"] == c["games_total"] > 0
        assert c["free"] == 0, report.examples
        # object-level find_ne on a spread sample of the same stream
        sampled = 0
        for game in sample_games(spec, 9973, 3000):
            s = find_ne(game)
            assert s is not None and is_ne(game, s, 0)
            sampled += 1
        d["text"] = f"{c['games_scanned']} games, 0 NE-free, {sampled} re-solved by find_ne, {elapsed:.0f}s"


# -- criterion 2 ------------------------------------------------------------


def test_criterion_2_two_person_dgms():
    with criterion(2) as d:
        res = two_person_suite(TWO_DGMS)
        assert res.failures == [] and res.games > 0
        rng = random.Random(20)
        checked = 0
        for _ in range(300):  # public API on random games inside the same bounds
            game = random_game(rng, 2, 4, 1, 2, Mode.DGMS)
            s = solve_two_person(game)
            assert is_ne(game, s, 0)
            checked += 1
        d["text"] = f"{res.forms} forms, {res.games} games, 0 failures; {checked} random games via solve_two_person"


# -- criteria 3, 4, 7 ---------------------------------------------------------


@pytest.fixture(scope="module")
def two_witness_report():
    return check_conjecture(EnumSpec(**THREE), "two-witnesses", max_examples=10_000)


def test_criterion_3_two_witnesses(two_witness_report):
    with criterion(3) as d:
        report = two_witness_report
        c = report.counts
        assert c["games_scanned"] == c["games_total"]
        assert c["free"] > 0 and len(report.examples) == c["free"]
        assert c["counterexamples"] == 0
        for entry in report.examples:
            game = game_from_json(entry["game"])
            assert first_ne_oracle(game) is None  # brute force agrees the game is NE-free
            heavy = [i for i in range(1, game.n + 1) if k_c(game, i) >= 2]
            assert len(heavy) >= 2
        # deterministic counts: the shard holding the NE-free games reproduces them
        shard = {e["index"][0] % 97 for e in report.examples}
        parts = [check_conjecture(EnumSpec(**THREE, shard=(i, 97)), "two-witnesses", max_examples=10_000) for i in shard]
        again = sum(p.counts["free"] for p in parts)
        assert again == c["free"]
        assert sorted(e["index"] for p in parts for e in p.examples) == [e["index"] for e in report.examples]
        d["text"] = f"{c['games_scanned']} games, {c['free']} NE-free, all with >= 2 heavy players"


def test_criterion_4_catch22():
    with criterion(4, "catch22") as d:
        report = check_conjecture(EnumSpec(**THREE), "catch22")
        assert report.verdict == "verified-up-to-bound" and report.counts["counterexamples"] == 0
        d["text"] = f"verified, {report.counts['games_scanned']} games satisfy C22"


def test_criterion_4_bidirected():
    with criterion(4, "bidirected-ns") as d:
        report = check_conjecture(EnumSpec(**THREE), "bidirected-ns")
        assert report.verdict == "verified-up-to-bound" and report.counts["counterexamples"] == 0
        d["text"] = f"verified, {report.counts['games_scanned']} games on bidirected digraphs"


@pytest.fixture(scope="module")
def cprime22_report():
    return check_conjecture(EnumSpec(**THREE, mode="dgms"), "cprime22-ns", max_examples=50)


def test_criterion_4_counterexamples_are_certified(cprime22_report, tmp_path, capsys):
    with criterion(4, "counterexample handling") as d:
        report = cprime22_report
        entries = report.examples + [report.first_counterexample]
        for e in entries:
            assert verify_certificate(Certificate.from_json(e["certificate"])) == []
            assert find_ne(game_from_json(e["game"])) is None
        # the CLI exits 1 on a shard holding a counterexample and replays its output
        g = report.first_counterexample["index"][0]
        out = tmp_path / "cx.json"
        code = main([
            "conjecture", "--which", "cprime22-ns", "--players", "3", "--mode", "dgms", "--dedup",
            "--min-nonterminal", "4", "--max-nonterminal", "4", "--min-terminals", "3", "--max-terminals", "3",
            "--min-outdeg", "2", "--max-outdeg", "2", "--shard", f"{g % 4999}/4999", "--output", str(out),
        ])
        assert code == 1
        assert main(["verify-certificate", str(out)]) == 0
        capsys.readouterr()
        d["text"] = f"{len(entries)} certificates replayed, CLI exit code 1"


@pytest.mark.xfail(strict=True, reason="(C'22) => NS has counterexamples at these bounds; see the decisions ledger")
def test_criterion_4_cprime22_zero_counterexamples(cprime22_report):
    with criterion(4, "cprime22-ns") as d:
        c = cprime22_report.counts
        d["text"] = f"{c['counterexamples']} NE-free DGMS games satisfy C'22 (first: {cprime22_report.first_counterexample['index']})"
        assert c["counterexamples"] == 0


def test_criterion_7_une_free_subgames(two_witness_report):
    with criterion(7) as d:
        checked = skipped = 0
        for entry in two_witness_report.examples:
            game = game_from_json(entry["game"])
            try:
                sub = remove_initial(game)
            except GameError:
                skipped += 1
                continue
            assert find_une(sub) is None
            assert first_une_oracle(sub) is None
            checked += 1
        assert checked > 0
        d["text"] = f"{checked} subgames UNE-free, {skipped} outside the precondition"


# -- criterion 5 --------------------------------------------------------------


def test_criterion_5_achievable_micro_suite():
    with criterion(5, "exhaustive") as d:
        checks = forms = 0
        for mode in (Mode.DG, Mode.DGMS):
            spec = EnumSpec(n=3, max_nonterminal=3, max_terminals=2, max_outdeg=2, mode=mode, canonical_dedup=True)
            for item in iter_graphs(spec):
                for owner in iter_owners(3, item.nonterminal):
                    form = item.form(3, mode, owner)
                    game = Game(form, (form.outcomes,) * 3)
                    forms += 1
                    for s in enumerate_profiles(game):
                        choice = s.as_dict()
                        for i in (1, 2, 3):
                            for v in form.graph.nonterminals:
                                assert achievable_outcomes(game, s, i, v) == achievable_oracle(game, choice, i, v)
                                checks += 1
        d["text"] = f"{forms} forms, {checks} (profile, player, start) triples"


def test_criterion_5_achievable_random():
    with criterion(5, "random") as d:
        rng = random.Random(5)
        checks = 0
        for k in range(1000):
            game = random_game(rng, rng.randint(1, 3), 5, 3, 3, Mode.DGMS if k % 2 else Mode.DG)
            profiles = list(enumerate_profiles(game))
            for s in rng.sample(profiles, min(4, len(profiles))):
                choice = s.as_dict()
                for i in range(1, game.n + 1):
                    for v in game.graph.nonterminals:
                        assert achievable_outcomes(game, s, i, v) == achievable_oracle(game, choice, i, v)
                        checks += 1
        d["text"] = f"1000 games, {checks} triples"


# -- criterion 6 --------------------------------------------------------------


def test_criterion_6_backward_induction():
    with criterion(6) as d:
        rng = random.Random(6)
        for _ in range(500):
            nt = rng.randint(1, 6)
            game = random_game(rng, rng.randint(1, 3), nt, 8 - nt, 3, acyclic=True)
            assert game.graph.vertex_count <= 8
            s = backward_induction(game)
            assert is_une(game, s)
        d["text"] = "500 random acyclic games"


# -- criterion 8 --------------------------------------------------------------


def random_prefix(rng: random.Random, core: Game, inner: int):
    """Acyclic prefix with ``inner`` non-sinks (0 is the source) and one sink per core target."""
    targets = rng.sample(range(core.graph.vertex_count), rng.randint(1, min(3, core.graph.vertex_count)))
    sinks = list(range(inner, inner + len(targets)))
    edges = set()
    for v in range(inner):
        later = list(range(v + 1, inner)) + sinks
        for w in rng.sample(later, rng.randint(1, min(2, len(later)))):
            edges.add((v, w))
    for v in range(1, inner):  # keep 0 the only source
        if not any(b == v for _, b in edges):
            edges.add((rng.randrange(v), v))
    for x in sinks:
        if not any(b == x for _, b in edges):
            edges.add((rng.randrange(inner), x))
    prefix = Digraph(inner + len(sinks), frozenset(edges))
    attach = dict(zip(sinks, targets))
    owner = {v: rng.randint(1, core.n) for v in range(inner)}
    return prefix, attach, owner


def test_criterion_8_une_extension():
    with criterion(8) as d:
        rng = random.Random(8)
        cases = deep = 0
        while cases < 500:
            core = random_game(rng, rng.randint(1, 3), 4, 3, 3, Mode.DGMS if rng.random() < 0.3 else Mode.DG)
            inner = 1 if cases % 2 == 0 else rng.randint(2, 3)
            prefix, attach, owner = random_prefix(rng, core, inner)
            game = extend_with_prefix(core, prefix, attach, owner)
            sub = remove_initial(game)
            une = find_une(sub)
            if inner == 1:
                assert sub.graph == core.graph
                core_une = find_une(core)
                if core_une is None:
                    continue
                assert une is not None
            elif une is None:
                continue
            else:
                deep += 1
            s = extend_une_to_ne(game, une)
            assert is_ne(game, s, game.initial)
            cases += 1
        d["text"] = f"500 cases ({deep} with multi-vertex prefixes)"


# -- criterion 9 --------------------------------------------------------------


def test_criterion_9_merge_respects_ne():
    with criterion(9) as d:
        res = merge_suite(TWO_DGMS)
        assert res.failures == [] and res.equilibria > 0
        d["text"] = (
            f"{res.games} games, {res.equilibria} NE mapped to merged NE, "
            f"{res.skipped_graphs} digraphs with v_0 in a terminal SCC skipped"
        )


# -- criterion 10 -------------------------------------------------------------


def cli_bytes(capsys, argv) -> tuple[int, str]:
    code = main(argv)
    return code, capsys.readouterr().out


SEARCH = ["search", "--kind", "une", "--players", "2", "--max-nonterminal", "3", "--max-terminals", "2"]
CONJ_BASE = [
    "conjecture", "--which", "cprime22-ns", "--players", "3", "--mode", "dgms", "--dedup",
    "--min-nonterminal", "4", "--max-nonterminal", "4", "--min-terminals", "2", "--max-terminals", "2",
]
CP_DIGRAPH = 105794  # carries the minimal C'22 counterexample


@pytest.mark.parametrize("which", ["search", "conjecture"])
def test_criterion_10_determinism(which, capsys):
    with criterion(10, which) as d:
        if which == "search":
            base = SEARCH
        else:
            base = CONJ_BASE + ["--shard", f"{CP_DIGRAPH % 4999}/4999"]
        outputs = {}
        for jobs in (1, 2, 8):
            code, out = cli_bytes(capsys, base + ["--jobs", str(jobs)])
            outputs[jobs] = out
            assert code == (1 if which == "conjecture" else 0)
        assert outputs[1] == outputs[2] == outputs[8]
        # shard recombination: split into three finer shards and merge
        if which == "search":
            shards = [f"{i}/3" for i in range(3)]
        else:
            x = CP_DIGRAPH % 4999
            shards = [f"{x + 4999 * j}/{3 * 4999}" for j in range(3)]
            base = CONJ_BASE
        parts = []
        for sh in shards:
            _, out = cli_bytes(capsys, base + ["--shard", sh])
            parts.append(SearchReport.from_json(json.loads(out)))
        for perm in itertools.permutations(parts):
            assert dumps(merge_reports(list(perm)).to_json()) == outputs[1]
        d["text"] = f"{len(outputs[1])} bytes identical for jobs 1/2/8 and 3-way shard merges"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
