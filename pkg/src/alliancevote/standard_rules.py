"""Alliance-blind single-winner rules.

Every rule returns a :class:`TallyResult` whose winner is the lowest-indexed
candidate among those with the best score.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from alliancevote import _kernels
from alliancevote.election import Election, ElectionError


@dataclass
class TallyResult:
    winner: int
    scores: dict[int, float]
    trace: dict = field(default_factory=dict)

    def to_json(self, election: Election | None = None) -> dict:
        def name(c):
            return election.labels[c] if election is not None else c

        return {
            "winner": self.winner,
            "winner_label": name(self.winner),
            "scores": {str(name(c)): s for c, s in self.scores.items()},
            "trace": _jsonable(self.trace),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, frozenset):
        return sorted(obj)
    return obj


def _all(m: int) -> np.ndarray:
    return np.ones(m, dtype=np.bool_)


def _result(scores: np.ndarray, eligible: np.ndarray | None = None, trace=None) -> TallyResult:
    if eligible is None:
        eligible = _all(len(scores))
    winner = _kernels.first_best(scores, eligible)
    out = {int(c): scores[c].item() for c in np.flatnonzero(eligible)}
    return TallyResult(winner, out, trace or {})


# ---------------------------------------------------------------------------
# score vectors (shared with the alliance-aware rules)
# ---------------------------------------------------------------------------

def plurality_scores(election: Election, active: np.ndarray | None = None) -> np.ndarray:
    active = _all(election.m) if active is None else active
    return _kernels.top_counts(election.ballots, election.counts, active)


def maximin_scores(election: Election, active: np.ndarray | None = None) -> np.ndarray:
    active = _all(election.m) if active is None else active
    dummy = np.zeros(election.m, dtype=np.int64)
    return _kernels.maximin_scores(election.pref, active, dummy, False, election.n)


def schulze_scores(election: Election, active: np.ndarray | None = None) -> np.ndarray:
    active = _all(election.m) if active is None else active
    strength = _kernels.widest_paths(election.pref, active, _all(election.m))
    dummy = np.zeros(election.m, dtype=np.int64)
    return _kernels.beatpath_scores(strength, active, dummy, False)


def copeland_scores(election: Election) -> np.ndarray:
    pref = election.pref
    twice = 2 * pref
    n = election.n
    wins = (twice > n).sum(axis=1)
    ties = ((twice == n) & ~np.eye(election.m, dtype=bool)).sum(axis=1)
    return wins + 0.5 * ties


# ---------------------------------------------------------------------------
# rules
# ---------------------------------------------------------------------------

def check_score_vector(scores: Sequence[float], m: int) -> np.ndarray:
    vec = np.asarray(scores, dtype=float)
    if vec.shape != (m,):
        raise ElectionError(f"score vector has length {len(vec)}, election has {m} candidates")
    if (np.diff(vec) > 0).any():
        raise ElectionError("score vector must be non-increasing")
    return vec


def positional_scores(election: Election, scores: Sequence[float]) -> np.ndarray:
    vec = check_score_vector(scores, election.m)
    pts = vec[election.pos]
    return (pts * election.counts[:, None]).sum(axis=0)


def positional_winner(election: Election, scores: Sequence[float]) -> TallyResult:
    return _result(positional_scores(election, scores))


def plurality_winner(election: Election) -> TallyResult:
    return _result(plurality_scores(election))


def borda_vector(m: int) -> list[int]:
    return list(range(m - 1, -1, -1))


def borda_winner(election: Election) -> TallyResult:
    return positional_winner(election, borda_vector(election.m))


def copeland_winner(election: Election) -> TallyResult:
    scores = copeland_scores(election)
    return _result(scores, trace={"pairwise": election.pref.tolist()})


def maximin_winner(election: Election) -> TallyResult:
    return _result(maximin_scores(election))


def stv_winner(election: Election, eliminate: str = "last") -> TallyResult:
    """Single transferable vote (single winner).

    ``eliminate`` decides ties among the lowest tallies: ``"last"`` removes
    the highest-indexed candidate, ``"first"`` the lowest-indexed one.
    """
    if eliminate not in ("last", "first"):
        raise ValueError("eliminate must be 'last' or 'first'")
    active = _all(election.m)
    order = []
    rounds = []
    while active.sum() > 1:
        tally = _kernels.top_counts(election.ballots, election.counts, active)
        live = np.flatnonzero(active)
        low = tally[live].min()
        losers = live[tally[live] == low]
        out = int(losers[-1] if eliminate == "last" else losers[0])
        rounds.append({int(c): int(tally[c]) for c in live})
        order.append(out)
        active[out] = False
    winner = int(np.flatnonzero(active)[0])
    final = rounds[-1] if rounds else {winner: election.n}
    return TallyResult(winner, final, {"eliminated": order, "rounds": rounds})


def compute_strengths(
    pref: np.ndarray,
    allowed_intermediates: Callable[[int], Sequence[int]] | None = None,
) -> np.ndarray:
    """Strongest-path (max over paths of the min edge) matrix.

    ``allowed_intermediates(b)`` may restrict which candidates can appear
    inside a path ending at ``b``; ``None`` admits everyone.
    """
    pref = np.asarray(pref, dtype=np.int64)
    m = pref.shape[0]
    active = _all(m)
    if allowed_intermediates is None:
        return _kernels.widest_paths(pref, active, active)
    out = np.zeros((m, m), dtype=np.int64)
    cache: dict[tuple[int, ...], np.ndarray] = {}
    for b in range(m):
        key = tuple(sorted(int(c) for c in allowed_intermediates(b)))
        if key not in cache:
            admit = np.zeros(m, dtype=np.bool_)
            admit[list(key)] = True
            cache[key] = _kernels.widest_paths(pref, active, admit)
        out[:, b] = cache[key][:, b]
    return out


def schulze_winner(election: Election) -> TallyResult:
    active = _all(election.m)
    strength = _kernels.widest_paths(election.pref, active, active)
    dummy = np.zeros(election.m, dtype=np.int64)
    scores = _kernels.beatpath_scores(strength, active, dummy, False)
    return _result(scores, trace={"strengths": strength.tolist()})
