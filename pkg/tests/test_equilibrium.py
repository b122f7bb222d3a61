from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ne_forge.equilibrium import (
    Certificate,
    achievable_outcomes,
    best_deviation,
    find_ne,
    find_une,
    is_ne,
    is_une,
    ne_inventory,
    refute_ne,
    refute_une,
    verify_certificate,
)
from ne_forge.game import C, Game, Terminal, game_from_json
from ne_forge.graph import Digraph
from ne_forge.lab.random_games import random_game
from ne_forge.play import StrategyProfile, enumerate_profiles, profile_at, profile_count, resolve_play
from oracles import achievable_oracle, first_ne_oracle, first_une_oracle, is_ne_oracle, is_une_oracle

# a 3-person NE-free DG game found by the exhaustive scan (7 positions, 4 outcomes)
NE_FREE = {
    "players": 3,
    "edges": [[0, 1], [0, 2], [1, 3], [1, 4], [2, 3], [2, 5], [3, 1], [3, 6]],
    "owner": {"0": 1, "1": 2, "2": 3, "3": 3},
    "initial": 0,
    "mode": "dg",
    "preferences": [["a:3", "c", "a:2", "a:1"], ["a:2", "c", "a:1", "a:3"], ["a:1", "a:2", "a:3", "c"]],
}


def sp(game, mapping):
    return StrategyProfile.from_mapping(game, mapping)


def test_g1_achievable(g1):
    s = sp(g1, {0: 1, 1: 0})
    assert achievable_outcomes(g1, s, 2, 0) == {C, Terminal(2)}
    assert achievable_outcomes(g1, s, 2, 0) == achievable_oracle(g1, s.as_dict(), 2, 0)


def test_player_without_vertices():
    g = Digraph.from_edges([(0, 1), (0, 2)])
    game = Game.build(g, {0: 1}, [["a:1", "a:2", "c"], ["a:2", "a:1", "c"]])
    s = sp(game, {0: 2})
    assert achievable_outcomes(game, s, 2, 0) == {Terminal(2)}


def test_single_owner_acyclic_reaches_all_terminals():
    g = Digraph.from_edges([(0, 1), (0, 2), (1, 3), (1, 4), (2, 4), (2, 5)])
    game = Game.build(g, {0: 1, 1: 1, 2: 1}, [["a:1", "a:2", "a:3", "c"]])
    s = sp(game, {0: 1, 1: 3, 2: 4})
    assert achievable_outcomes(game, s, 1, 0) == {Terminal(1), Terminal(2), Terminal(3)}
    assert achievable_outcomes(game, s, 1, 0) == achievable_oracle(game, s.as_dict(), 1, 0)


def test_g1_ne_checks(g1):
    assert is_ne(g1, sp(g1, {0: 1, 1: 3}), 0)
    assert not is_ne(g1, sp(g1, {0: 1, 1: 0}), 0)
    for s in enumerate_profiles(g1):
        assert is_ne(g1, s, 0) == is_ne_oracle(g1, s.as_dict(), 0)
        assert is_une(g1, s) == is_une_oracle(g1, s.as_dict())


def test_one_player_top_choice_is_ne():
    g = Digraph.from_edges([(0, 1), (0, 2), (0, 0)])
    game = Game.build(g, {0: 1}, [["a:2", "c", "a:1"]])
    assert is_ne(game, sp(game, {0: 2}), 0)
    assert not is_ne(game, sp(game, {0: 0}), 0)


def test_find_ne_g1(g1):
    s = find_ne(g1)
    assert s is not None and s.as_dict() == first_ne_oracle(g1)
    assert s.as_dict() == {0: 1, 1: 3}


def test_ne_free_game_certificate():
    game = game_from_json(NE_FREE)
    assert find_ne(game) is None and first_ne_oracle(game) is None
    cert = refute_ne(game)
    assert len(cert.refutations) == profile_count(game) == 16
    assert verify_certificate(cert) == []
    again = Certificate.from_json(json.loads(json.dumps(cert.to_json())))
    assert verify_certificate(again) == []
    inv = ne_inventory(game)
    assert inv.terminal_ne == () and inv.cyclic_ne == ()
    assert find_une(game) is None
    assert verify_certificate(refute_une(game)) == []


def test_tampered_certificate_is_caught():
    game = game_from_json(NE_FREE)
    data = refute_ne(game).to_json()
    data["refutations"][3]["improved_outcome"] = data["refutations"][3]["outcome"]
    assert verify_certificate(Certificate.from_json(data))
    data = refute_ne(game).to_json()
    del data["refutations"][0]
    assert verify_certificate(Certificate.from_json(data))


def test_refute_rejects_solvable(g1):
    with pytest.raises(ValueError):
        refute_ne(g1)


def test_inventory_g1(g1):
    inv = ne_inventory(g1)
    assert inv.terminal_ne and inv.vt_reachable_from_initial
    for s, o in inv.terminal_ne + inv.cyclic_ne:
        assert is_ne(g1, s, 0) and resolve_play(g1, s, 0).outcome == o


def test_inventory_single_interior():
    g = Digraph.from_edges([(0, 1), (1, 2), (2, 0), (1, 0)])
    game = Game.build(g, {0: 1, 1: 2, 2: 1}, [["c"], ["c"]])
    inv = ne_inventory(game)
    assert len(inv.cyclic_ne) == profile_count(game) and inv.terminal_ne == ()
    assert not inv.vt_reachable_from_initial


@st.composite
def random_instances(draw, max_nt=4):
    rng = random.Random(draw(st.integers(0, 10**9)))
    mode = draw(st.sampled_from(["dg", "dgms"]))
    game = random_game(rng, draw(st.integers(1, 3)), max_nt, 3, 3, mode)
    s = profile_at(game, draw(st.integers(0, profile_count(game) - 1)))
    return game, s


@settings(max_examples=300, deadline=None)
@given(random_instances(), st.data())
def test_achievable_matches_oracle(inst, data):
    game, s = inst
    start = data.draw(st.sampled_from(game.graph.nonterminals))
    for i in range(1, game.n + 1):
        fast = achievable_outcomes(game, s, i, start)
        assert fast == achievable_oracle(game, s.as_dict(), i, start)
        assert resolve_play(game, s, start).outcome in fast


@settings(max_examples=200, deadline=None)
@given(random_instances())
def test_best_deviation_replays(inst):
    game, s = inst
    for i in range(1, game.n + 1):
        dev = best_deviation(game, s, i, 0)
        if dev is None:
            continue
        target, t = dev
        from ne_forge.play import deviate

        assert resolve_play(game, deviate(game, s, i, t), 0).outcome == target
        assert game.prefers(i, target, resolve_play(game, s, 0).outcome)


@settings(max_examples=150, deadline=None)
@given(random_instances(max_nt=3))
def test_find_matches_oracle(inst):
    game, s = inst
    assert is_ne(game, s, 0) == is_ne_oracle(game, s.as_dict(), 0)
    assert is_une(game, s) == is_une_oracle(game, s.as_dict())
    if is_une(game, s):
        assert is_ne(game, s, 0)
    ne = find_ne(game)
    assert (None if ne is None else ne.as_dict()) == first_ne_oracle(game)
    une = find_une(game)
    assert (None if une is None else une.as_dict()) == first_une_oracle(game)
    if une is not None:
        assert all(is_ne(game, une, v) for v in game.graph.nonterminals)
