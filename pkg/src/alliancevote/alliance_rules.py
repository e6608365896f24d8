"""Alliance-aware rules: IW-f and SW-f for f in {plurality, maximin, schulze}.

The alliance-aware f-score of ``c`` is its standard f-score once every ally
of ``c`` is deleted.  IW-f picks the alliance of the best alliance-aware
score and then the member with the best standard score; SW-f keeps the
candidates whose alliance-aware score beats ``n/2`` and runs f among them.
Nested (laminar) alliances and the reduced-ballot protocol for the
plurality variants live here too.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from alliancevote import _kernels
from alliancevote.election import AllianceStructure, Election, ElectionError
from alliancevote.standard_rules import (
    TallyResult,
    maximin_scores,
    plurality_scores,
    schulze_scores,
)

FAMILIES = ("plurality", "maximin", "schulze")
LAMINAR_FAMILIES = ("plurality", "maximin")


def _check_family(f: str, allowed=FAMILIES) -> None:
    if f not in allowed:
        raise ValueError(f"unsupported score family {f!r}; expected one of {allowed}")


def _partition_only(election: Election) -> None:
    if election.laminar:
        raise ElectionError("laminar alliances: use the laminar_* variants")


def _aware_scores(election: Election, f: str, active: np.ndarray, alliance_of: np.ndarray) -> np.ndarray:
    if f == "plurality":
        return _kernels.prefix_counts(election.ballots, election.counts, active, alliance_of)
    if f == "maximin":
        return _kernels.maximin_scores(election.pref, active, alliance_of, True, election.n)
    strength = _kernels.restricted_strengths(election.pref, active, alliance_of)
    return _kernels.beatpath_scores(strength, active, alliance_of, True)


def standard_scores(election: Election, f: str, active: np.ndarray | None = None) -> np.ndarray:
    _check_family(f)
    if f == "plurality":
        return plurality_scores(election, active)
    if f == "maximin":
        return maximin_scores(election, active)
    return schulze_scores(election, active)


def alliance_aware_scores(election: Election, f: str) -> np.ndarray:
    """Alliance-aware f-score of every candidate (partition alliances)."""
    _check_family(f)
    _partition_only(election)
    return _aware_scores(election, f, np.ones(election.m, dtype=np.bool_), election.alliance_of)


def alliance_aware_score(election: Election, f: str, c: int) -> int:
    if election.laminar:
        return laminar_alliance_aware_score(election, f, c)
    return int(alliance_aware_scores(election, f)[c])


@dataclass
class AllianceAwareScores:
    family: str
    aware: dict[int, int]
    standard: dict[int, int]


def score_table(election: Election, f: str) -> AllianceAwareScores:
    aware = alliance_aware_scores(election, f)
    std = standard_scores(election, f)
    return AllianceAwareScores(f, dict(enumerate(aware.tolist())), dict(enumerate(std.tolist())))


def _pick(scores: np.ndarray, eligible: np.ndarray) -> int:
    return _kernels.first_best(scores, eligible)


def _as_dict(scores: np.ndarray, eligible: np.ndarray) -> dict[int, int]:
    return {int(c): int(scores[c]) for c in np.flatnonzero(eligible)}


def iw_winner(election: Election, f: str) -> TallyResult:
    """Independent-winner-consistent two-round rule IW-f."""
    _check_family(f)
    _partition_only(election)
    m = election.m
    everyone = np.ones(m, dtype=np.bool_)
    alliance_of = election.alliance_of
    aware = _aware_scores(election, f, everyone, alliance_of)
    leader = _pick(aware, everyone)
    chosen = alliance_of == alliance_of[leader]
    std = standard_scores(election, f)
    winner = _pick(std, chosen)
    trace = {
        "round1": _as_dict(aware, everyone),
        "alliance": np.flatnonzero(chosen).tolist(),
    }
    return TallyResult(winner, _as_dict(std, chosen), trace)


def _beats_every_opponent(election: Election) -> np.ndarray:
    beats = 2 * election.pref > election.n
    opp = election.alliance_of[:, None] != election.alliance_of[None, :]
    return (beats | ~opp).all(axis=1)


def sw_winner(election: Election, f: str) -> TallyResult:
    """Solitary-winner-consistent two-round rule SW-f."""
    _check_family(f)
    _partition_only(election)
    m = election.m
    everyone = np.ones(m, dtype=np.bool_)
    aware = _aware_scores(election, f, everyone, election.alliance_of)
    if f == "schulze":
        advanced = _beats_every_opponent(election)
    else:
        advanced = 2 * aware > election.n
    trace = {"round1": _as_dict(aware, everyone), "advanced": np.flatnonzero(advanced).tolist()}
    if not advanced.any():
        return TallyResult(_pick(aware, everyone), _as_dict(aware, everyone), trace)
    # restricting the active set is the same as deleting C \ T
    std = standard_scores(election, f, advanced)
    return TallyResult(_pick(std, advanced), _as_dict(std, advanced), trace)


def iw_schulze(election: Election) -> TallyResult:
    return iw_winner(election, "schulze")


def sw_schulze(election: Election) -> TallyResult:
    return sw_winner(election, "schulze")


# ---------------------------------------------------------------------------
# nested alliances
# ---------------------------------------------------------------------------

def _with_closure(election: Election) -> Election:
    structure = election.alliances
    if not structure.laminar:
        structure = structure.as_laminar()
    missing = [c for c in range(election.m) if frozenset([c]) not in structure.sets]
    if missing:
        warnings.warn("laminar family lacks singleton alliances; adding them", stacklevel=3)
        structure = structure.with_singletons(election.m)
    elif structure is election.alliances:
        return election
    return election.with_alliances(structure)


def _outermost(sets: Iterable[frozenset[int]], m: int, active: np.ndarray) -> np.ndarray:
    """Alliance id per candidate, taken from the largest live set containing it."""
    alive = frozenset(np.flatnonzero(active).tolist())
    live = {s & alive for s in sets} - {frozenset()}
    label = np.full(m, -1, dtype=np.int64)
    gid = 0
    # in a laminar family the first (largest) set seen for c is its outermost one
    for s in sorted(live, key=lambda s: (-len(s), sorted(s))):
        fresh = [c for c in s if label[c] < 0]
        if fresh:
            label[fresh] = gid
            gid += 1
    for c in np.flatnonzero(active & (label < 0)):
        label[c] = gid
        gid += 1
    label[label < 0] = 0
    return label


def laminar_alliance_aware_scores(election: Election, f: str, sets=None, active=None) -> np.ndarray:
    _check_family(f, LAMINAR_FAMILIES)
    m = election.m
    active = np.ones(m, dtype=np.bool_) if active is None else active
    sets = election.alliances.sets if sets is None else sets
    return _aware_scores(election, f, active, _outermost(sets, m, active))


def laminar_alliance_aware_score(election: Election, f: str, c: int) -> int:
    election = _with_closure(election)
    return int(laminar_alliance_aware_scores(election, f)[c])


def laminar_iw_winner(election: Election, f: str) -> TallyResult:
    """Multi-round IW-f over a laminar family (singletons closed in)."""
    _check_family(f, LAMINAR_FAMILIES)
    election = _with_closure(election)
    m = election.m
    family = list(election.alliances.sets)
    potential = frozenset(range(m))
    everyone = np.ones(m, dtype=np.bool_)
    rounds = []
    while len(potential) > 1:
        scores = laminar_alliance_aware_scores(election, f, family, everyone)
        eligible = np.zeros(m, dtype=np.bool_)
        eligible[list(potential)] = True
        best = _pick(scores, eligible)
        chain = sorted((s for s in family if best in s), key=len, reverse=True)
        chosen = chain[0]
        rounds.append({"scores": _as_dict(scores, eligible), "alliance": sorted(chosen)})
        potential = chosen
        family.remove(chosen)
    (winner,) = potential
    return TallyResult(int(winner), rounds[-1]["scores"] if rounds else {int(winner): 0}, {"rounds": rounds})


def laminar_sw_winner(election: Election, f: str) -> TallyResult:
    """Multi-round SW-f over a laminar family (singletons closed in)."""
    _check_family(f, LAMINAR_FAMILIES)
    election = _with_closure(election)
    m = election.m
    family = list(election.alliances.sets)
    active = np.ones(m, dtype=np.bool_)
    rounds = []
    while True:
        scores = laminar_alliance_aware_scores(election, f, family, active)
        advanced = active & (2 * scores > election.n)
        rounds.append({"scores": _as_dict(scores, active), "advanced": np.flatnonzero(advanced).tolist()})
        if not advanced.any():
            return TallyResult(_pick(scores, active), _as_dict(scores, active), {"rounds": rounds})
        if advanced.sum() == 1:
            winner = int(np.flatnonzero(advanced)[0])
            return TallyResult(winner, _as_dict(scores, advanced), {"rounds": rounds})
        kept = frozenset(np.flatnonzero(advanced).tolist())
        shrunk = [s for s in family if not kept <= s]
        if kept == frozenset(np.flatnonzero(active).tolist()) and len(shrunk) == len(family):
            raise RuntimeError("laminar SW rule made no progress")  # unreachable for valid families
        family = shrunk
        active = advanced


# ---------------------------------------------------------------------------
# reduced ballots for the plurality variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedBallot:
    top_choice: int
    prefix: frozenset[int]
    weight: int = 1


def reduce_ballots(election: Election) -> list[ReducedBallot]:
    """Top choice plus the longest single-alliance prefix of every ballot row."""
    _partition_only(election)
    alliance_of = election.alliance_of
    out = []
    for row, w in zip(election.ballots.tolist(), election.counts.tolist()):
        lead = alliance_of[row[0]]
        prefix = []
        for c in row:
            if alliance_of[c] != lead:
                break
            prefix.append(c)
        out.append(ReducedBallot(row[0], frozenset(prefix), w))
    return out


def _approvals(reduced: Sequence[ReducedBallot], m: int) -> np.ndarray:
    counts = np.zeros(m, dtype=np.int64)
    for r in reduced:
        for c in r.prefix:
            counts[c] += r.weight
    return counts


def iw_plurality_from_reduced(reduced: Sequence[ReducedBallot], alliances: AllianceStructure) -> TallyResult:
    m = sum(len(s) for s in alliances.sets)
    approvals = _approvals(reduced, m)
    everyone = np.ones(m, dtype=np.bool_)
    leader = _pick(approvals, everyone)
    chosen = np.zeros(m, dtype=np.bool_)
    chosen[list(alliances.members(leader))] = True
    tops = np.zeros(m, dtype=np.int64)
    for r in reduced:
        tops[r.top_choice] += r.weight
    winner = _pick(tops, chosen)
    trace = {"round1": _as_dict(approvals, everyone), "alliance": np.flatnonzero(chosen).tolist()}
    return TallyResult(winner, _as_dict(tops, chosen), trace)


def sw_plurality_two_round(
    reduced: Sequence[ReducedBallot],
    second_round: Election | Callable[[frozenset[int]], Sequence[tuple[int, int]]],
    m: int | None = None,
) -> TallyResult:
    """Approval round on prefix sets, then a plurality runoff among survivors.

    ``second_round`` is either the full election (fresh plurality ballots are
    read off its rankings) or a callable mapping the survivor set to a list
    of ``(candidate, weight)`` plurality ballots.
    """
    if isinstance(second_round, Election):
        m = second_round.m
        election = second_round

        def second_round(survivors):
            mask = np.zeros(m, dtype=np.bool_)
            mask[list(survivors)] = True
            tops = _kernels.top_counts(election.ballots, election.counts, mask)
            return [(int(c), int(tops[c])) for c in sorted(survivors) if tops[c] > 0]

    if m is None:
        m = 1 + max(max(r.prefix) for r in reduced)
    n = sum(r.weight for r in reduced)
    approvals = _approvals(reduced, m)
    everyone = np.ones(m, dtype=np.bool_)
    survivors = frozenset(np.flatnonzero(2 * approvals > n).tolist())
    trace = {"approvals": _as_dict(approvals, everyone), "survivors": sorted(survivors)}
    if not survivors:
        return TallyResult(_pick(approvals, everyone), _as_dict(approvals, everyone), trace)
    ballots = second_round(survivors)
    if sum(w for _, w in ballots) != n:
        raise ElectionError("runoff ballot count differs from the approval round")
    tops = np.zeros(m, dtype=np.int64)
    for c, w in ballots:
        if c not in survivors:
            raise ElectionError("runoff ballot for a non-surviving candidate")
        tops[c] += w
    eligible = np.zeros(m, dtype=np.bool_)
    eligible[list(survivors)] = True
    return TallyResult(_pick(tops, eligible), _as_dict(tops, eligible), trace)
