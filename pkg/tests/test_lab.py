from __future__ import annotations

import itertools
import json
import random

import pytest

from ne_forge.equilibrium import find_ne, find_une, is_ne, is_une, ne_inventory, verify_certificate
from ne_forge.game import Game, GameError, check_condition_C, check_condition_C22, check_condition_Cprime22, game_from_json
from ne_forge.graph import Digraph, GraphError, is_bidirected
from ne_forge.lab import (
    EnumSpec,
    SearchReport,
    SpecError,
    check_conjecture,
    enumerate_games,
    extend_une_to_ne,
    extend_with_prefix,
    find_ne_free,
    find_une_free,
    merge_reports,
    remove_initial,
    run_scan,
    scan_shard,
)
from ne_forge.lab.random_games import random_game
from ne_forge.play import StrategyProfile, enumerate_profiles, resolve_play
from ne_forge.solvers import backward_induction
from oracles import first_une_oracle
from test_equilibrium import NE_FREE

# NE-free 3-person DGMS game satisfying (C'22): two chained 2-cycles, two sinks
CPRIME22_FREE = {
    "players": 3,
    "edges": [[0, 1], [0, 2], [1, 0], [1, 3], [2, 3], [2, 4], [3, 2], [3, 5]],
    "owner": {"0": 1, "1": 2, "2": 3, "3": 2},
    "initial": 0,
    "mode": "dgms",
    "preferences": [["a:2", "c:2", "c:1", "a:1"], ["a:1", "c:1", "a:2", "c:2"], ["c:1", "c:2", "a:1", "a:2"]],
}


def slow_free_count(spec: EnumSpec, kind: str = "ne") -> tuple[int, int]:
    """(games, free games) by object-level enumeration and per-profile checks."""
    games = free = 0
    for _, game in enumerate_games(spec):
        games += 1
        if kind == "ne":
            ok = any(is_ne(game, s, 0) for s in enumerate_profiles(game))
        else:
            ok = any(is_une(game, s) for s in enumerate_profiles(game))
        free += not ok
    return games, free


def test_count_example_36():
    spec = EnumSpec(n=1, min_nonterminal=1, max_nonterminal=1, min_terminals=2, max_terminals=2, max_outdeg=2)
    assert sum(1 for _ in enumerate_games(spec)) == 36
    report = scan_shard(spec)
    assert report.counts["games_scanned"] == report.counts["games_total"] == 36


def test_stream_is_deterministic_and_sharded():
    spec = EnumSpec(n=2, max_nonterminal=2, max_terminals=1, max_outdeg=2)
    full = [idx for idx, _ in enumerate_games(spec)]
    assert full == [idx for idx, _ in enumerate_games(spec)]
    assert len(set(full)) == len(full)
    for m in (2, 3, 8):
        parts = [[idx for idx, _ in enumerate_games(spec.with_shard(i, m))] for i in range(m)]
        assert sorted(itertools.chain(*parts)) == sorted(full)
        for i, part in enumerate(parts):
            assert all(idx[0] % m == i for idx in part)


def test_dedup_never_increases_and_keeps_verdicts():
    for n, kind in ((2, "ne"), (2, "une"), (3, "ne")):
        spec = EnumSpec(n=n, max_nonterminal=3, max_terminals=2, max_outdeg=2)
        from dataclasses import replace

        a = run_scan(spec, kind, max_examples=0)
        b = run_scan(replace(spec, canonical_dedup=True), kind, max_examples=0)
        assert b.counts["games_scanned"] <= a.counts["games_scanned"]
        assert b.counts["graphs_scanned"] < a.counts["graphs_scanned"]
        assert (a.counts["free"] > 0) == (b.counts["free"] > 0)


@pytest.mark.parametrize(
    "spec,kind",
    [
        (EnumSpec(n=2, max_nonterminal=2, max_terminals=2, max_outdeg=2), "ne"),
        (EnumSpec(n=2, max_nonterminal=2, max_terminals=2, max_outdeg=2), "une"),
        (EnumSpec(n=3, max_nonterminal=2, max_terminals=1, max_outdeg=2), "ne"),
        (EnumSpec(n=2, max_nonterminal=2, max_terminals=1, max_outdeg=2, mode="dgms"), "une"),
        (EnumSpec(n=2, max_nonterminal=2, max_terminals=2, max_outdeg=2, filters={"C22"}), "une"),
        (EnumSpec(n=2, max_nonterminal=2, max_terminals=2, max_outdeg=2, filters={"C"}), "une"),
        (EnumSpec(n=2, max_nonterminal=2, max_terminals=1, max_outdeg=2, mode="dgms", filters={"Cprime"}), "une"),
        (EnumSpec(n=2, max_nonterminal=2, max_terminals=2, max_outdeg=2, filters={"bidirected"}), "une"),
    ],
)
def test_engine_matches_slow_path(spec, kind):
    report = scan_shard(spec, kind, max_examples=1000)
    games, free = slow_free_count(spec, kind)
    assert report.counts["games_scanned"] == games
    assert report.counts["free"] == free == len(report.examples)


def test_filters_are_sound():
    spec = EnumSpec(n=3, max_nonterminal=2, max_terminals=2, max_outdeg=2, filters={"C22"})
    for _, game in itertools.islice(enumerate_games(spec), 0, 20000, 7):
        assert check_condition_C22(game)[0]
    spec = EnumSpec(n=2, max_nonterminal=2, max_terminals=2, max_outdeg=2, filters={"C", "bidirected"})
    for _, game in enumerate_games(spec):
        assert check_condition_C(game) and is_bidirected(game.graph)
    spec = EnumSpec(n=3, max_nonterminal=2, max_terminals=2, max_outdeg=2, mode="dgms", filters={"Cprime22"})
    for _, game in itertools.islice(enumerate_games(spec), 0, 20000, 7):
        assert check_condition_Cprime22(game)[0]


def test_spec_validation():
    with pytest.raises(SpecError):
        EnumSpec(n=2, max_nonterminal=2, max_terminals=1, max_outdeg=2, shard=(2, 2))
    with pytest.raises(SpecError):
        EnumSpec(n=2, max_nonterminal=0, max_terminals=1, max_outdeg=2)
    with pytest.raises(SpecError):
        EnumSpec(n=2, max_nonterminal=2, max_terminals=1, max_outdeg=2, filters={"Cprime"})
    spec = EnumSpec(n=2, max_nonterminal=2, max_terminals=1, max_outdeg=2, mode="dgms")
    with pytest.raises(SpecError):
        check_conjecture(spec, "catch22")
    with pytest.raises(SpecError):
        check_conjecture(EnumSpec(n=2, max_nonterminal=2, max_terminals=1, max_outdeg=2), "nope")
    with pytest.raises(SpecError):
        check_conjecture(EnumSpec(n=2, max_nonterminal=2, max_terminals=1, max_outdeg=2, filters={"C22"}), "two-witnesses")


def test_catch22_two_person_verified():
    report = check_conjecture(EnumSpec(n=2, max_nonterminal=3, max_terminals=2, max_outdeg=2), "catch22")
    assert report.verdict == "verified-up-to-bound" and report.counts["counterexamples"] == 0
    assert report.spec["filters"] == ["C22"]


def test_planted_c22_violation_is_filtered():
    game = game_from_json(NE_FREE)
    assert find_ne(game) is None and not check_condition_C22(game)[0]
    spec = EnumSpec(n=3, max_nonterminal=4, max_terminals=3, max_outdeg=2)
    report = check_conjecture(spec, "catch22", games=[game])
    assert report.counts["games_scanned"] == 0 and report.verdict == "verified-up-to-bound"
    report = check_conjecture(spec, "two-witnesses", games=[game])
    assert report.counts["free"] == 1 and report.verdict == "verified-up-to-bound"


def test_planted_cprime22_counterexample():
    game = game_from_json(CPRIME22_FREE)
    assert check_condition_Cprime22(game) == (True, None)
    spec = EnumSpec(n=3, max_nonterminal=4, max_terminals=2, max_outdeg=2, mode="dgms")
    report = check_conjecture(spec, "cprime22-ns", games=[game])
    assert report.verdict == "counterexample"
    cert = report.first_counterexample["certificate"]
    from ne_forge.equilibrium import Certificate

    assert verify_certificate(Certificate.from_json(cert)) == []


def test_report_merge_is_associative_and_commutative():
    spec = EnumSpec(n=2, max_nonterminal=2, max_terminals=2, max_outdeg=2)
    whole = scan_shard(spec, "une", max_examples=3)
    parts = [scan_shard(spec.with_shard(i, 4), "une", max_examples=3) for i in range(4)]
    target = json.dumps(whole.to_json(), sort_keys=True)
    for perm in itertools.permutations(parts):
        assert json.dumps(merge_reports(list(perm)).to_json(), sort_keys=True) == target
    left = merge_reports([merge_reports(parts[:2]), merge_reports(parts[2:])])
    right = merge_reports([parts[0], merge_reports([parts[1], merge_reports(parts[2:])])])
    assert json.dumps(left.to_json(), sort_keys=True) == json.dumps(right.to_json(), sort_keys=True) == target
    # mixed granularity: 2-shard piece with two 4-shard pieces
    half = scan_shard(spec.with_shard(0, 2), "une", max_examples=3)
    mixed = merge_reports([parts[1], half, parts[3]])
    assert json.dumps(mixed.to_json(), sort_keys=True) == target
    with pytest.raises(ValueError):
        merge_reports([half, parts[0]])
    round_trip = SearchReport.from_json(json.loads(target))
    assert json.dumps(round_trip.to_json(), sort_keys=True) == target


def test_jobs_do_not_change_reports():
    spec = EnumSpec(n=2, max_nonterminal=2, max_terminals=2, max_outdeg=2)
    one = run_scan(spec, "une", max_examples=2, jobs=1).to_json()
    two = run_scan(spec, "une", max_examples=2, jobs=2).to_json()
    assert one == two


def test_find_ne_free_two_person_empty():
    assert list(find_ne_free(EnumSpec(n=2, max_nonterminal=3, max_terminals=2, max_outdeg=2))) == []


def test_find_une_free_two_person():
    spec = EnumSpec(n=2, max_nonterminal=2, max_terminals=2, max_outdeg=2)
    found = list(find_une_free(spec))
    assert found
    for game, cert in found:
        assert first_une_oracle(game) is None
        assert not game.graph.is_acyclic()
        assert verify_certificate(cert) == []


def test_ne_free_games_are_une_free():
    # shard 59 of 97 holds the digraph carrying every NE-free game at these bounds
    spec = EnumSpec(
        n=3, min_nonterminal=4, max_nonterminal=4, min_terminals=3, max_terminals=3,
        min_outdeg=2, max_outdeg=2, canonical_dedup=True, shard=(59, 97),
    )
    found = list(find_ne_free(spec))
    assert len(found) == 48
    for game, _ in found:
        assert find_une(game) is None


def test_ne_free_inventory_empty():
    game = game_from_json(NE_FREE)
    inv = ne_inventory(game)
    assert inv.terminal_ne == inv.cyclic_ne == ()


# -- surgery ---------------------------------------------------------------


def test_remove_initial_g1(g1):
    sub = remove_initial(g1)
    assert sub.initial is None and sub.graph.vertex_count == 3
    assert sub.graph.edges == {(0, 2)}  # v -> a_2 survives, v -> u is gone
    assert sub.owner[0] == 2 and sub.prefs == g1.prefs


def test_remove_initial_rejects_new_sink():
    g = Digraph.from_edges([(0, 1), (1, 0), (0, 2)])
    game = Game.build(g, {0: 1, 1: 2}, [["a:1", "c"], ["c", "a:1"]])
    with pytest.raises(GameError) as err:
        remove_initial(game)
    assert err.value.code == "new-sink"


def test_remove_initial_on_ne_free_game():
    game = game_from_json(NE_FREE)
    sub = remove_initial(game)
    assert find_une(sub) is None


def test_extend_une_to_ne_acyclic_matches_bi():
    rng = random.Random(2)
    checked = 0
    while checked < 100:
        game = random_game(rng, rng.randint(1, 3), 5, 3, 3, acyclic=True)
        if game.graph.pred[0]:
            continue
        try:
            sub = remove_initial(game)
        except GameError:
            continue
        s = extend_une_to_ne(game, backward_induction(sub))
        full = backward_induction(game)
        assert resolve_play(game, s, 0).outcome == resolve_play(game, full, 0).outcome
        assert is_ne(game, s, 0)
        checked += 1


def test_extend_une_terminal_successor():
    core = Game.build(Digraph.from_edges([(0, 1), (0, 2)]), {0: 2}, [["a:2", "a:1", "c"], ["a:1", "a:2", "c"]])
    game = extend_with_prefix(
        Game(core.form.__class__(core.graph, 2, core.owner, None, core.mode), core.prefs),
        Digraph.from_edges([(0, 1), (0, 2)]),
        {1: 2, 2: 0},
        {0: 1},
    )
    sub = remove_initial(game)
    une = StrategyProfile.from_mapping(sub, {0: 1})
    s = extend_une_to_ne(game, une)
    assert s.choice[game.initial] == 2  # straight to a_2, player 1's favourite
    assert resolve_play(game, s, game.initial).outcome.index == 2


def test_extend_une_rejects_non_une():
    g = Digraph.from_edges([(0, 1), (1, 2), (1, 3)])
    game = Game.build(g, {0: 1, 1: 2}, [["a:2", "a:1", "c"], ["a:1", "a:2", "c"]], initial=0)
    sub = remove_initial(game)
    bad = StrategyProfile.from_mapping(sub, {0: 2})  # player 2 settles for a_2
    with pytest.raises(GameError):
        extend_une_to_ne(game, bad)
    s = extend_une_to_ne(game, StrategyProfile.from_mapping(sub, {0: 1}))
    assert s.as_dict() == {0: 1, 1: 2}


def test_prefix_inverse_pair():
    core = remove_initial(game_from_json(NE_FREE))
    prefix = Digraph.from_edges([(0, 1), (0, 2)])
    game = extend_with_prefix(core, prefix, {1: 0, 2: 1}, {0: 1})
    assert game.initial == core.graph.vertex_count
    back = remove_initial(game)
    assert back.graph == core.graph and back.owner == core.owner and back.prefs == core.prefs


def test_prefix_rejections():
    core = remove_initial(game_from_json(NE_FREE))
    with pytest.raises(GraphError):
        extend_with_prefix(core, Digraph.from_edges([(0, 1), (1, 0), (0, 2)]), {2: 0}, {0: 1, 1: 1})
    with pytest.raises(GraphError):
        extend_with_prefix(core, Digraph.from_edges([(0, 1)]), {1: 99}, {0: 1})
    with pytest.raises(GraphError):
        extend_with_prefix(core, Digraph(1, frozenset()), {0: 0}, {})
    with pytest.raises(GameError):
        extend_with_prefix(core, Digraph.from_edges([(0, 1)]), {1: 0}, {})
