import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alliancevote import fixtures
from alliancevote.election import (
    AllianceStructure,
    Election,
    ElectionError,
    are_similar,
    condorcet_winner,
    demote_candidate,
    find_clone_sets,
    is_clone_set,
    majority_winner,
    merge_alliances,
    promote_candidate,
    reinsert,
    remove_candidates,
    split_alliance,
    wins_head_to_head,
)
from alliancevote.standard_rules import plurality_winner

from strategies import elections


def test_single_ballot_pref():
    e = Election.from_rankings([[0, 1]])
    assert e.pref[0, 1] == 1 and e.pref[1, 0] == 0


def test_key_ally_cycle_pref():
    e = fixtures.key_ally_cycle()
    a1, a2, b = 0, 1, 2
    assert e.pref[a2, a1] == 60
    assert e.pref[a1, b] == 52
    assert e.pref[b, a2] == 51
    assert condorcet_winner(e) is None
    assert wins_head_to_head(e.pref, a1, b)


def test_rules_differ_pref():
    e = fixtures.rules_differ()
    assert e.pref[3, 2] == 70


def test_head_to_head_tie_is_not_a_win():
    e = Election.from_rankings([[0, 1], [1, 0]])
    assert not wins_head_to_head(e.pref, 0, 1)
    assert not wins_head_to_head(e.pref, 1, 0)
    with pytest.raises(ElectionError):
        wins_head_to_head(e.pref, 0, 0)


def test_intro_head_to_head():
    e = fixtures.intro()
    assert e.n == 100
    assert wins_head_to_head(e.pref, 2, 0)


def test_unanimous_majority_and_condorcet():
    e = Election.from_rankings([[0, 1, 2]] * 3)
    assert majority_winner(e) == 0
    assert condorcet_winner(e) == 0


def test_three_cycle_has_no_condorcet_winner():
    assert condorcet_winner(fixtures.three_cycle()) is None


def test_remove_from_similar_vs_clone():
    e = fixtures.similar_vs_clone()
    r = remove_candidates(e, [1])
    assert r.labels == ("a1", "a3", "b")
    assert [[r.labels[c] for c in row] for row in r.unit_rankings().tolist()] == [["b", "a1", "a3"]] * 2
    assert r.origin == (0, 2, 3)


def test_remove_nothing_is_identity():
    e = fixtures.intro()
    assert remove_candidates(e, []) is e


def test_remove_everyone_fails():
    e = fixtures.intro()
    with pytest.raises(ElectionError):
        remove_candidates(e, [0, 1, 2])


def test_removing_adam_makes_alice_plurality_winner():
    e = fixtures.intro()
    r = remove_candidates(e, [0])
    result = plurality_winner(r)
    assert r.labels[result.winner] == "Alice"
    assert result.scores[result.winner] == 51


def test_removal_drops_emptied_alliance():
    e = fixtures.intro()
    r = remove_candidates(e, [2])
    assert len(r.alliances) == 1


def test_split_and_merge_are_inverse():
    e = fixtures.key_ally_cycle()
    split = split_alliance(e, {0, 1}, {0})
    assert sorted(sorted(s) for s in split.alliances.sets) == [[0], [1], [2]]
    merged = merge_alliances(split, {0}, {1})
    assert merged.alliances == e.alliances
    assert np.array_equal(split.pref, e.pref)


def test_split_no_independent_winner_gives_no_ally():
    e = fixtures.no_independent_winner()
    e = split_alliance(e, {0, 1}, {0})
    e = split_alliance(e, {2, 3}, {2})
    assert all(len(s) == 1 for s in e.alliances.sets)


def test_split_rejects_bad_part():
    e = fixtures.key_ally_cycle()
    with pytest.raises(ElectionError):
        split_alliance(e, {0, 1}, {0, 1})
    with pytest.raises(ElectionError):
        split_alliance(e, {0, 1}, {2})


def test_laminar_violation_rejected():
    with pytest.raises(ElectionError):
        AllianceStructure.laminar_family([[0, 1], [1, 2]]).validate(3)


def test_partition_must_cover_and_be_disjoint():
    with pytest.raises(ElectionError):
        AllianceStructure.partition([[0, 1], [1, 2]]).validate(3)
    with pytest.raises(ElectionError):
        AllianceStructure.partition([[0, 1]]).validate(3)


@pytest.mark.parametrize(
    "rankings",
    [[[0, 1, 1]], [[0, 1, 3]], []],
)
def test_invalid_rankings(rankings):
    with pytest.raises(ElectionError):
        Election.from_rankings(rankings)


def test_nonpositive_multiplicity():
    with pytest.raises(ElectionError):
        Election.from_rankings([[0, 1]], [0])


def test_promote_adjacent_swap():
    e = Election.from_labels(["a", "b", "c"], [(1, "b a c")])
    p = promote_candidate(e, 0, 0)
    assert p.ballots.tolist() == [[0, 1, 2]]
    assert demote_candidate(p, 0, 0) == e


def test_promote_top_candidate_fails():
    e = Election.from_labels(["a", "b"], [(1, "a b")])
    with pytest.raises(ElectionError):
        promote_candidate(e, 0, 0)


def test_promote_splits_compressed_row():
    e = Election.from_labels(["a", "b", "c"], [(3, "b a c")])
    p = promote_candidate(e, 1, 0)
    assert p.n == 3
    assert p.canonical_ballots() == [((0, 1, 2), 1), ((1, 0, 2), 2)]


def test_similar_vs_clone_structure():
    e = fixtures.similar_vs_clone()
    a1, a2, a3, b = 0, 1, 2, 3
    assert is_clone_set(e, {b, a1})
    assert not is_clone_set(e, {a1, a3})
    assert are_similar(e, a1, a3)
    assert not are_similar(e, a1, a2)


def test_are_similar_rejects_opponents():
    e = fixtures.similar_vs_clone()
    with pytest.raises(ElectionError):
        are_similar(e, 0, 3)


def test_one_directional_similarity_flag():
    # a1 > b > a2 for one voter and a2 > a1 > b for the other: a2 ≻ a1 is never split
    e = Election.from_labels(["a1", "a2", "b"], [(1, "a1 b a2"), (1, "a2 a1 b")], alliances=[["a1", "a2"], ["b"]])
    assert not are_similar(e, 0, 1)
    assert not are_similar(e, 0, 1, symmetric=False)
    assert are_similar(e, 1, 0, symmetric=False)


def test_single_voter_clone_sets():
    e = Election.from_rankings([[2, 0, 3, 1]])
    found = find_clone_sets(e)
    assert sorted(map(sorted, found)) == [[0, 1, 3], [0, 2, 3]]


def test_equality_ignores_row_order_and_compression():
    a = Election.from_rankings([[0, 1], [1, 0], [0, 1]])
    b = Election.from_rankings([[1, 0], [0, 1]], [1, 2])
    assert a == b
    assert hash(a) == hash(b)
    assert not a.identical(b)


# -- properties -------------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(elections())
def test_pref_sums_to_n(e):
    off = ~np.eye(e.m, dtype=bool)
    assert ((e.pref + e.pref.T)[off] == e.n).all()
    assert (np.diag(e.pref) == 0).all()


@settings(max_examples=100, deadline=None)
@given(elections(), st.data())
def test_removal_preserves_pairwise_counts(e, data):
    gone = data.draw(st.sets(st.integers(0, e.m - 1), max_size=e.m - 1))
    r = remove_candidates(e, gone)
    for i, j in itertools.permutations(range(r.m), 2):
        assert r.pref[i, j] == e.pref[r.origin[i], r.origin[j]]


@settings(max_examples=100, deadline=None)
@given(elections(min_alliance=2), st.data())
def test_split_never_changes_pref(e, data):
    big = [s for s in e.alliances.sets if len(s) >= 2]
    if not big:
        return
    whole = data.draw(st.sampled_from(big))
    part = data.draw(st.sets(st.sampled_from(sorted(whole)), min_size=1, max_size=len(whole) - 1))
    assert np.array_equal(split_alliance(e, whole, part).pref, e.pref)


@settings(max_examples=150, deadline=None)
@given(elections(), st.data())
def test_promotion_moves_one_pair_by_one(e, data):
    voter = data.draw(st.integers(0, e.n - 1))
    row = e.unit_rankings()[voter].tolist()
    p = data.draw(st.integers(1, e.m - 1))
    c = row[p]
    after = promote_candidate(e, voter, c)
    diff = after.pref - e.pref
    assert diff[c, row[p - 1]] == 1 and diff[row[p - 1], c] == -1
    assert np.abs(diff).sum() == 2


@settings(max_examples=100, deadline=None)
@given(elections(), st.data())
def test_repeated_promotion_equals_reinsertion(e, data):
    voter = data.draw(st.integers(0, e.n - 1))
    row = e.unit_rankings()[voter].tolist()
    p = data.draw(st.integers(0, e.m - 1))
    target = data.draw(st.integers(0, p))
    c = row[p]
    stepped = e
    for _ in range(p - target):
        stepped = promote_candidate(stepped, voter, c)
    assert stepped == reinsert(e, voter, c, target)


@settings(max_examples=100, deadline=None)
@given(elections())
def test_clone_sets_are_blocks_in_every_ballot(e):
    for group in find_clone_sets(e):
        assert 2 <= len(group) < e.m
        for row in e.unit_rankings().tolist():
            spots = sorted(row.index(c) for c in group)
            assert spots[-1] - spots[0] == len(group) - 1


@settings(max_examples=100, deadline=None)
@given(elections(min_alliance=3))
def test_similarity_symmetric_and_transitive(e):
    for s in e.alliances.sets:
        members = sorted(s)
        for a, b in itertools.permutations(members, 2):
            assert are_similar(e, a, b) == are_similar(e, b, a)
        for a, b, c in itertools.permutations(members, 3):
            if are_similar(e, a, b) and are_similar(e, b, c):
                assert are_similar(e, a, c)
