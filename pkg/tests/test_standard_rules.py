import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alliancevote import fixtures
from alliancevote.election import Election, ElectionError, condorcet_winner
from alliancevote.rules import STANDARD_IDS, get_rule
from alliancevote.standard_rules import (
    borda_winner,
    compute_strengths,
    copeland_winner,
    maximin_winner,
    plurality_winner,
    positional_winner,
    schulze_winner,
    stv_winner,
)

import oracles
from strategies import elections


def label(e, result):
    return e.labels[result.winner]


def test_intro_plurality_elects_bob():
    e = fixtures.intro()
    r = plurality_winner(e)
    assert label(e, r) == "Bob" and r.scores[2] == 49


def test_rules_differ_plurality():
    e = fixtures.rules_differ()
    r = plurality_winner(e)
    assert label(e, r) == "a1" and r.scores[0] == 35


def test_borda_single_voter():
    e = Election.from_rankings([[0, 1, 2]])
    r = borda_winner(e)
    assert r.winner == 0 and r.scores[0] == 2


def test_score_vector_validation():
    e = Election.from_rankings([[0, 1, 2]])
    with pytest.raises(ElectionError):
        positional_winner(e, [1, 0])
    with pytest.raises(ElectionError):
        positional_winner(e, [0, 1, 2])


def test_copeland_three_cycle_ties_to_first():
    r = copeland_winner(fixtures.three_cycle())
    assert r.winner == 0
    assert set(r.scores.values()) == {1.0}


def test_copeland_unanimous():
    r = copeland_winner(Election.from_rankings([[0, 1, 2]]))
    assert r.winner == 0 and r.scores[0] == 2


def test_copeland_rules_differ_elects_a2():
    e = fixtures.rules_differ()
    r = copeland_winner(e)
    assert label(e, r) == "a2" and r.scores[1] == 4


def test_copeland_counts_pairwise_ties_as_half():
    e = Election.from_rankings([[0, 1], [1, 0]])
    assert copeland_winner(e).scores == {0: 0.5, 1: 0.5}


def test_maximin_key_ally_cycle():
    e = fixtures.key_ally_cycle()
    r = maximin_winner(e)
    assert label(e, r) == "a2"
    assert r.scores == {0: 40, 1: 49, 2: 48}


def test_maximin_unanimous():
    e = Election.from_rankings([[0, 1]] * 4)
    r = maximin_winner(e)
    assert r.winner == 0 and r.scores[0] == 4


def test_maximin_inside_rules_differ_alliance():
    e = fixtures.rules_differ()
    scores = maximin_winner(e).scores
    assert [scores[c] for c in range(4)] == [35, 40, 30, 30]


def test_stv_intro_elects_bob():
    e = fixtures.intro()
    r = stv_winner(e)
    assert label(e, r) == "Bob"
    assert r.trace["eliminated"] == [1, 0]


def test_stv_unanimous():
    assert stv_winner(Election.from_rankings([[0, 1, 2]])).winner == 0


def test_stv_eliminates_last_among_tied_lowest():
    e = Election.from_rankings([[0, 1, 2], [1, 2, 0], [2, 0, 1]])
    assert stv_winner(e).trace["eliminated"][0] == 2
    assert stv_winner(e, eliminate="first").trace["eliminated"][0] == 0


def test_stv_equals_plurality_on_two_candidates():
    for n in range(1, 6):
        for k in range(n + 1):
            kept = [(r, c) for r, c in (([0, 1], k), ([1, 0], n - k)) if c]
            e = Election.from_rankings([r for r, _ in kept], [c for _, c in kept])
            assert stv_winner(e).winner == plurality_winner(e).winner


def test_schulze_three_cycle():
    assert schulze_winner(fixtures.three_cycle()).winner == 0


def test_schulze_six_candidate_fixture():
    e = fixtures.six_candidate_alternative_sw(allied=False)
    assert label(e, schulze_winner(e)) in {"a1", "a2"}
    assert label(e, maximin_winner(e)) in {"a1", "a2"}


# -- oracle agreement and properties -------------------------------------------

ORACLES = {
    "plurality": lambda e: oracles.standard_winner(e, "plurality"),
    "maximin": lambda e: oracles.standard_winner(e, "maximin"),
    "schulze": lambda e: oracles.standard_winner(e, "schulze"),
    "borda": oracles.borda_winner,
    "copeland": oracles.copeland_winner,
    "stv": oracles.stv_winner,
}


@pytest.mark.parametrize("rule_id", STANDARD_IDS)
@settings(max_examples=80, deadline=None)
@given(e=elections(max_m=5))
def test_matches_definitional_oracle(rule_id, e):
    assert get_rule(rule_id).winner(e) == ORACLES[rule_id](e)


@pytest.mark.parametrize("rule_id", STANDARD_IDS)
@settings(max_examples=60, deadline=None)
@given(e=elections(), data=st.data())
def test_ballot_order_and_doubling_do_not_matter(rule_id, e, data):
    rule = get_rule(rule_id)
    order = data.draw(st.permutations(range(len(e.counts))))
    shuffled = Election.from_rankings(e.ballots[list(order)], e.counts[list(order)], e.alliances)
    doubled = Election.from_rankings(e.ballots, e.counts * 2, e.alliances)
    w = rule.winner(e)
    assert rule.winner(shuffled) == w
    assert rule.winner(doubled) == w


@settings(max_examples=100, deadline=None)
@given(elections())
def test_schulze_domination_is_transitive(e):
    s = compute_strengths(e.pref)
    beats = {(a, b) for a, b in itertools.permutations(range(e.m), 2) if s[a, b] > s[b, a]}
    for a, b, c in itertools.permutations(range(e.m), 3):
        assert not ((a, b) in beats and (b, c) in beats and (c, a) in beats)
    assert max(schulze_winner(e).scores.values()) == e.m - 1


@settings(max_examples=100, deadline=None)
@given(elections())
def test_condorcet_methods_elect_condorcet_winner(e):
    cw = condorcet_winner(e)
    if cw is not None:
        assert maximin_winner(e).winner == cw
        assert schulze_winner(e).winner == cw


@settings(max_examples=100, deadline=None)
@given(elections())
def test_strength_at_least_direct_edge(e):
    s = compute_strengths(e.pref)
    off = ~np.eye(e.m, dtype=bool)
    assert (s[off] >= e.pref[off]).all()
