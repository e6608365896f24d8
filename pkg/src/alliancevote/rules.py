"""Rule identifiers and lookup.

Identifiers accepted by :func:`get_rule`::

    plurality  borda  scoring:<l1>,<l2>,...  copeland  maximin  stv  schulze
    iw-plurality sw-plurality iw-maximin sw-maximin iw-schulze sw-schulze
    laminar-iw-plurality laminar-sw-plurality laminar-iw-maximin laminar-sw-maximin
    iw:<standard id>            generic ally-pruned IW extension of a scoring-type rule
    <standard id>+primaries:joint | <standard id>+primaries:disjoint
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

from alliancevote import alliance_rules as ar
from alliancevote import standard_rules as sr
from alliancevote.election import Election, remove_candidates

STANDARD_IDS = ("plurality", "borda", "copeland", "maximin", "stv", "schulze")
ALLIANCE_IDS = tuple(f"{kind}-{f}" for f in ar.FAMILIES for kind in ("iw", "sw"))
LAMINAR_IDS = tuple(f"laminar-{kind}-{f}" for f in ar.LAMINAR_FAMILIES for kind in ("iw", "sw"))


class UnknownRuleError(KeyError):
    pass


@dataclass(frozen=True)
class Rule:
    id: str
    tally: Callable[[Election], sr.TallyResult]
    alliance_aware: bool = False

    def __call__(self, election: Election) -> sr.TallyResult:
        return self.tally(election)

    def winner(self, election: Election) -> int:
        return self.tally(election).winner

    def __repr__(self) -> str:
        return f"Rule({self.id!r})"


def _scoring(vector: list[float], election: Election) -> sr.TallyResult:
    return sr.positional_winner(election, vector)


def _standard_score_fn(base: str) -> Callable[[Election], np.ndarray]:
    if base == "plurality":
        return sr.plurality_scores
    if base == "maximin":
        return sr.maximin_scores
    if base == "borda":
        return lambda e: sr.positional_scores(e, sr.borda_vector(e.m))
    if base == "copeland":
        return sr.copeland_scores
    if base == "schulze":
        return sr.schulze_scores
    raise UnknownRuleError(f"iw:{base} needs a score-based standard rule")


def _generic_iw(score_fn, election: Election) -> sr.TallyResult:
    """IW extension of any score-based rule: prune allies, then score within the alliance."""
    m = election.m
    aware = np.empty(m, dtype=float)
    for c in range(m):
        allies = election.ally_set(c) - {c}
        reduced = remove_candidates(election, allies)
        aware[c] = score_fn(reduced)[reduced.origin.index(election.origin[c])]
    everyone = np.ones(m, dtype=np.bool_)
    leader = ar._pick(aware, everyone)
    chosen = election.alliance_of == election.alliance_of[leader]
    std = np.asarray(score_fn(election), dtype=float)
    winner = ar._pick(std, chosen)
    return sr.TallyResult(
        winner,
        {int(c): float(std[c]) for c in np.flatnonzero(chosen)},
        {"round1": {c: float(aware[c]) for c in range(m)}, "alliance": np.flatnonzero(chosen).tolist()},
    )


def get_rule(rule_id: str) -> Rule:
    rid = rule_id.strip().lower()
    if "+primaries:" in rid:
        from alliancevote.experiments import PrimaryMode, primaries_rule

        base, mode = rid.split("+primaries:", 1)
        if base not in STANDARD_IDS and not base.startswith("scoring:"):
            raise UnknownRuleError(f"primaries compose only standard rules, got {base!r}")
        try:
            pm = PrimaryMode(mode)
        except ValueError:
            raise UnknownRuleError(f"unknown primary mode {mode!r}") from None
        inner = get_rule(base)
        return Rule(rid, partial(primaries_rule, rule=inner, mode=pm), True)
    if rid == "plurality":
        return Rule(rid, sr.plurality_winner)
    if rid == "borda":
        return Rule(rid, sr.borda_winner)
    if rid.startswith("scoring:"):
        try:
            vector = [float(x) for x in rid.split(":", 1)[1].split(",")]
        except ValueError:
            raise UnknownRuleError(f"bad score vector in {rule_id!r}") from None
        return Rule(rid, partial(_scoring, vector))
    if rid == "copeland":
        return Rule(rid, sr.copeland_winner)
    if rid == "maximin":
        return Rule(rid, sr.maximin_winner)
    if rid == "stv":
        return Rule(rid, sr.stv_winner)
    if rid == "schulze":
        return Rule(rid, sr.schulze_winner)
    if rid in ALLIANCE_IDS:
        kind, f = rid.split("-", 1)
        fn = ar.iw_winner if kind == "iw" else ar.sw_winner
        return Rule(rid, partial(fn, f=f), True)
    if rid in LAMINAR_IDS:
        _, kind, f = rid.split("-", 2)
        fn = ar.laminar_iw_winner if kind == "iw" else ar.laminar_sw_winner
        return Rule(rid, partial(fn, f=f), True)
    if rid.startswith("iw:"):
        base = rid[3:]
        return Rule(rid, partial(_generic_iw, _standard_score_fn(base)), True)
    raise UnknownRuleError(f"unknown rule id {rule_id!r}")


def as_rule(rule) -> Rule:
    if isinstance(rule, Rule):
        return rule
    if isinstance(rule, str):
        return get_rule(rule)
    if callable(rule):
        return Rule(getattr(rule, "__name__", "custom"), rule)
    raise TypeError(f"not a rule: {rule!r}")
