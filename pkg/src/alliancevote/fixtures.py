"""Hand-built elections used as golden inputs, regression seeds and CLI demos."""

from __future__ import annotations

from alliancevote.election import Election


def intro() -> Election:
    """Two parties; Adam splits the vote of his ally Alice (percentages as counts)."""
    return Election.from_labels(
        ["Adam", "Alice", "Bob"],
        [
            (46, "Adam Alice Bob"),
            (5, "Alice Bob Adam"),
            (43, "Bob Alice Adam"),
            (6, "Bob Adam Alice"),
        ],
        alliances=[["Adam", "Alice"], ["Bob"]],
        alliance_names=["PartyA", "PartyB"],
    )


def key_ally_cycle() -> Election:
    """Three candidates, a1 and a2 allied, majority cycle a2 > a1 > b > a2."""
    return Election.from_labels(
        ["a1", "a2", "b"],
        [
            (3, "a1 b a2"),
            (37, "b a1 a2"),
            (11, "b a2 a1"),
            (49, "a2 a1 b"),
        ],
        alliances=[["a1", "a2"], ["b"]],
    )


def similar_vs_clone() -> Election:
    """b and a1 are clones but not similar; a1 and a3 are similar but not clones."""
    return Election.from_labels(
        ["a1", "a2", "a3", "b"],
        [(1, "b a1 a2 a3"), (1, "a2 b a1 a3")],
        alliances=[["a1", "a2", "a3"], ["b"]],
    )


def no_independent_winner() -> Election:
    return Election.from_labels(
        ["a1", "a2", "b1", "b2"],
        [(1, "b2 a1 b1 a2"), (1, "a2 b2 a1 b1"), (1, "b1 a1 a2 b2")],
        alliances=[["a1", "a2"], ["b1", "b2"]],
    )


def rules_differ() -> Election:
    """Four-member alliance where IW/SW plurality/maximin all disagree."""
    return Election.from_labels(
        ["a1", "a2", "a3", "a4", "b", "c"],
        [
            (30, "b a2 a4 a3 a1 c"),
            (35, "a1 a2 a4 a3 b c"),
            (5, "a2 a1 a4 a3 b c"),
            (30, "a3 c a4 b a2 a1"),
        ],
        alliances=[["a1", "a2", "a3", "a4"], ["b"], ["c"]],
    )


def three_cycle(allied: tuple[str, ...] = ()) -> Election:
    """a > b > c, b > c > a, c > a > b; optionally with some candidates allied."""
    labels = ["a", "b", "c"]
    groups = [list(allied)] + [[x] for x in labels if x not in allied] if allied else [[x] for x in labels]
    return Election.from_labels(labels, [(1, "a b c"), (1, "b c a"), (1, "c a b")], alliances=groups)


def maximin_alternative_sw() -> Election:
    """Four candidates, only a1 and a2 allied (alternative solitary-winner discussion)."""
    return Election.from_labels(
        ["a1", "a2", "b", "c"],
        [
            (5, "a2 a1 b c"),
            (5, "c a1 b a2"),
            (3, "b a2 c a1"),
            (1, "a2 b c a1"),
            (1, "a2 b a1 c"),
        ],
        alliances=[["a1", "a2"], ["b"], ["c"]],
    )


def plurality_alternative_sw() -> Election:
    return Election.from_labels(
        ["a1", "a2", "b", "c", "d"],
        [
            (10, "a1 a2 b c d"),
            (35, "a1 b c d a2"),
            (10, "c b d a1 a2"),
            (10, "c d b a1 a2"),
            (35, "a2 d c b a1"),
        ],
        alliances=[["a1", "a2"], ["b"], ["c"], ["d"]],
    )


def six_candidate_alternative_sw(allied: bool = True) -> Election:
    """Six-candidate election where Maximin and Schulze elect a1 or a2."""
    return Election.from_labels(
        ["a1", "a2", "b", "c", "d", "e"],
        [
            (1, "b a2 c e d a1"),
            (1, "a1 e d c b a2"),
            (1, "d a1 e c b a2"),
            (1, "a2 c b e d a1"),
            (2, "a2 e d a1 c b"),
            (2, "a1 c b a2 e d"),
            (2, "a2 c b a1 e d"),
            (2, "d a1 e b a2 c"),
        ],
        alliances=[["a1", "a2"], ["b"], ["c"], ["d"], ["e"]] if allied else None,
    )


# -- constructions refuting alliance-aware extensions of other rules ----------

def copeland_chain() -> tuple[Election, Election, Election]:
    """(E, E', E''): 3-cycle, then c' cloned under c, then {c, c'} merged."""
    e = three_cycle()
    e1 = Election.from_labels(
        ["a", "b", "c", "c'"],
        [(1, "a b c c'"), (1, "b c c' a"), (1, "c c' a b")],
    )
    e2 = Election.from_labels(
        ["a", "b", "c", "c'"],
        [(1, "a b c c'"), (1, "b c c' a"), (1, "c c' a b")],
        alliances=[["a"], ["b"], ["c", "c'"]],
    )
    return e, e1, e2


def scoring_chain() -> tuple[Election, Election, Election]:
    """(E, E', E''): two symmetric voters, then b' below b, then {b, b'} merged."""
    e = Election.from_labels(["a", "b"], [(1, "a b"), (1, "b a")])
    e1 = Election.from_labels(["a", "b", "b'"], [(1, "a b b'"), (1, "b b' a")])
    e2 = Election.from_labels(
        ["a", "b", "b'"], [(1, "a b b'"), (1, "b b' a")], alliances=[["a"], ["b", "b'"]]
    )
    return e, e1, e2


def stv_nonmonotone() -> Election:
    """No-ally election where one single-step promotion of the STV winner makes it lose.

    Smallest witness (seven voters) of an exhaustive search over
    three-candidate profiles; tests/test_axioms.py re-derives it.  Promoting
    a over c in the single ``c a b`` ballot turns the winner from a into b.
    """
    return Election.from_labels(
        ["a", "b", "c"],
        [(2, "a c b"), (2, "b a c"), (1, "c a b"), (2, "c b a")],
    )


ALL = {
    "intro": intro,
    "key-ally-cycle": key_ally_cycle,
    "similar-vs-clone": similar_vs_clone,
    "no-independent-winner": no_independent_winner,
    "rules-differ": rules_differ,
    "maximin-alternative-sw": maximin_alternative_sw,
    "plurality-alternative-sw": plurality_alternative_sw,
    "six-candidate-alternative-sw": six_candidate_alternative_sw,
    "stv-nonmonotone": stv_nonmonotone,
}
