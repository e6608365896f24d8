"""Per-instance axiom checks and seeded counterexample mining.

A checker enumerates the axiom's whole perturbation family on one election
and tallies every perturbed election.  A ``holds-on-instance`` verdict is a
certificate about that election only; it says nothing about the rule in
general.  A ``counterexample`` carries a :class:`Witness` that can be replayed.

All candidate indices inside reports refer to the checked election.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from alliancevote.cultures import CultureFamily, as_family, derive_seed, make_rng, sample
from alliancevote.election import (
    Election,
    condorcet_winner,
    find_clone_sets,
    majority_winner,
    promote_in_row,
    remove_candidates,
    split_alliance,
    are_similar,
)
from alliancevote.rules import Rule, as_rule

HOLDS = "holds-on-instance"
HOLDS_SAMPLED = "holds-on-sampled-splits"
COUNTEREXAMPLE = "counterexample"

SPLIT_CAP = 2**15

SCOPE_NOTE = "per-instance check; a pass certifies this election only, not the rule"


class AxiomError(ValueError):
    """The axiom does not apply to the given election."""


class NotTwoAllianceError(AxiomError):
    """Solitary-winner consistency is only defined for two-alliance elections."""


class UnknownAxiomError(KeyError):
    pass


class MultipleIndependentWinnersError(AxiomError):
    pass


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

# Each condition names the implication the perturbation must respect;
# ``group`` is the candidate set the implication talks about.
CONDITIONS = {
    "stays-out": "winner outside group => perturbed winner outside group",
    "unchanged-if-out": "winner outside group => perturbed winner equals winner",
    "stays-in": "winner inside group => perturbed winner inside group",
    "similar": "winner inside group => perturbed winner inside group; otherwise winner unchanged",
    "unchanged": "perturbed winner equals winner",
    "elect": "winner inside group",
}


def violates(condition: str, group: frozenset[int], before: int, after: int | None) -> bool:
    inside = before in group
    if condition == "stays-out":
        return not inside and after in group
    if condition == "unchanged-if-out":
        return not inside and after != before
    if condition == "stays-in":
        return inside and after not in group
    if condition == "similar":
        return after not in group if inside else after != before
    if condition == "unchanged":
        return after != before
    if condition == "elect":
        return bool(group) and not inside
    raise ValueError(f"unknown condition {condition!r}")


@dataclass
class Witness:
    original: Election
    perturbed: Election | None
    perturbation: dict
    condition: str
    group: frozenset[int]
    winner_before: int
    winner_after: int | None

    def to_json(self) -> dict:
        out = {
            "perturbation": self.perturbation,
            "condition": self.condition,
            "condition_text": CONDITIONS[self.condition],
            "group": sorted(self.group),
            "winner_before": self.winner_before,
            "winner_after": self.winner_after,
        }
        if self.perturbed is not None:
            out["perturbed_to_original"] = to_original_map(self.original, self.perturbed)
        return out


@dataclass
class AxiomReport:
    axiom: str
    rule: str
    verdict: str
    witness: Witness | None = None
    tried: int = 0
    note: str = SCOPE_NOTE
    trial: int | None = None
    seed: int | None = None

    @property
    def holds(self) -> bool:
        return self.verdict != COUNTEREXAMPLE

    def to_json(self, with_elections: bool = True) -> dict:
        out = {
            "axiom": self.axiom,
            "rule": self.rule,
            "verdict": self.verdict,
            "perturbations_tried": self.tried,
            "note": self.note,
        }
        if self.trial is not None:
            out["trial"] = self.trial
            out["seed"] = self.seed
        if self.witness is not None:
            w = self.witness
            out["witness"] = w.to_json()
            if with_elections:
                from alliancevote.io import serialize_election

                out["witness"]["original"] = serialize_election(w.original)
                if w.perturbed is not None:
                    out["witness"]["perturbed"] = serialize_election(w.perturbed)
        return out

    def replay(self, rule) -> bool:
        """Re-tally the witness and confirm the recorded winners and the violation."""
        if self.witness is None:
            return False
        rule = as_rule(rule)
        w = self.witness
        before = rule.winner(w.original)
        if before != w.winner_before:
            return False
        if w.perturbed is not None:
            after = _to_original(w.original, w.perturbed, rule.winner(w.perturbed))
            if after != w.winner_after:
                return False
        else:
            after = None
        group = w.group
        if w.condition == "elect":
            group = frozenset(_ELECT_GROUPS[self.axiom](w.original, rule))
            if group != w.group:
                return False
        return violates(w.condition, group, before, after)


def to_original_map(original: Election, perturbed: Election) -> list[int]:
    where = {o: i for i, o in enumerate(original.origin)}
    return [where[o] for o in perturbed.origin]


def _to_original(original: Election, perturbed: Election, c: int) -> int:
    if perturbed.origin is original.origin:
        return c
    return original.origin.index(perturbed.origin[c])


# ---------------------------------------------------------------------------
# enumeration driver
# ---------------------------------------------------------------------------

Perturbation = tuple[Election, dict, str, frozenset]


def _drive(axiom: str, election: Election, rule: Rule, before: int, family: Iterable[Perturbation], verdict=HOLDS) -> AxiomReport:
    tried = 0
    for perturbed, desc, condition, group in family:
        tried += 1
        after = _to_original(election, perturbed, rule.winner(perturbed))
        if violates(condition, group, before, after):
            witness = Witness(election, perturbed, desc, condition, group, before, after)
            return AxiomReport(axiom, rule.id, COUNTEREXAMPLE, witness, tried)
    return AxiomReport(axiom, rule.id, verdict, None, tried)


def _require_partition(election: Election) -> None:
    if election.laminar:
        raise AxiomError("this axiom is defined for disjoint alliances only")


def _removal(election: Election, c: int, condition: str, group: frozenset[int]) -> Perturbation:
    return remove_candidates(election, [c]), {"kind": "remove", "candidate": c}, condition, group


# ---------------------------------------------------------------------------
# basic axioms
# ---------------------------------------------------------------------------

def check_ally_no_harm(election: Election, rule) -> AxiomReport:
    """Removing a member of a losing alliance must not hand that alliance the win."""
    rule = as_rule(rule)
    _require_partition(election)
    before = rule.winner(election)

    def family():
        for c in range(election.m):
            group = election.ally_set(c)
            # a singleton alliance disappears with c, nothing to test
            if len(group) == 1 or before in group:
                continue
            yield _removal(election, c, "stays-out", group)

    return _drive("ally-no-harm", election, rule, before, family())


def _split_parts(members: list[int], cap: int, seed: int) -> tuple[list[frozenset[int]], bool]:
    """Parts containing ``members[0]``; each names one 2-partition of the alliance."""
    head, rest = members[0], members[1:]
    total = 2 ** len(rest) - 1
    if total <= cap:
        masks: Iterable[int] = range(total)
        sampled = False
    else:
        rng = make_rng(derive_seed(seed, len(members)))
        masks = sorted(int(x) for x in rng.choice(total, size=cap, replace=False))
        sampled = True
    parts = []
    for mask in masks:
        part = {head} | {rest[i] for i in range(len(rest)) if mask >> i & 1}
        parts.append(frozenset(part))
    return parts, sampled


def check_resistance_splitting(election: Election, rule, cap: int = SPLIT_CAP, seed: int = 0) -> AxiomReport:
    """Splitting a losing alliance in two must leave the winner unchanged.

    Alliances with more than ``cap`` splits are sub-sampled with ``seed``;
    the verdict then reads ``holds-on-sampled-splits``.
    """
    rule = as_rule(rule)
    _require_partition(election)
    before = rule.winner(election)
    sampled_any = False
    plans = []
    for whole in election.alliances.sets:
        if len(whole) < 2 or before in whole:
            continue
        parts, sampled = _split_parts(sorted(whole), cap, seed)
        sampled_any |= sampled
        plans.append((whole, parts))

    def family():
        for whole, parts in plans:
            for part in parts:
                desc = {"kind": "split", "alliance": sorted(whole), "part": sorted(part)}
                yield split_alliance(election, whole, part), desc, "unchanged-if-out", whole

    verdict = HOLDS_SAMPLED if sampled_any else HOLDS
    return _drive("resistance-splitting", election, rule, before, family(), verdict)


def check_independence_similar_allies(election: Election, rule, symmetric: bool = True) -> AxiomReport:
    """Dropping a candidate with a similar ally must keep the alliance's fate and the outsider winner."""
    rule = as_rule(rule)
    _require_partition(election)
    before = rule.winner(election)

    def family():
        for c in range(election.m):
            group = election.ally_set(c)
            if any(are_similar(election, c, other, symmetric, alliance=group) for other in sorted(group - {c})):
                yield _removal(election, c, "similar", group)

    return _drive("similar-allies", election, rule, before, family())


def _promotions(election: Election, candidates: Iterable[int], condition: str, group: frozenset[int]) -> Iterator[Perturbation]:
    pos = election.pos
    for c in candidates:
        for row in range(len(election.counts)):
            if pos[row, c] == 0:
                continue
            desc = {"kind": "promote", "candidate": c, "row": row, "from_position": int(pos[row, c])}
            yield promote_in_row(election, row, c), desc, condition, group


def check_alliance_monotonicity(election: Election, rule) -> AxiomReport:
    """Promoting any member of the winning alliance by one place keeps the alliance winning."""
    rule = as_rule(rule)
    _require_partition(election)
    before = rule.winner(election)
    group = election.ally_set(before)
    return _drive("alliance-monotonicity", election, rule, before, _promotions(election, sorted(group), "stays-in", group))


def check_monotonicity(election: Election, rule) -> AxiomReport:
    """Promoting the winner by one place in any ballot keeps them winning."""
    rule = as_rule(rule)
    before = rule.winner(election)
    return _drive("monotonicity", election, rule, before, _promotions(election, [before], "unchanged", frozenset([before])))


def check_cloneproof(election: Election, rule) -> AxiomReport:
    """Removing one member of a maximal clone set keeps the set's fate and any outsider winner."""
    rule = as_rule(rule)
    before = rule.winner(election)

    def family():
        for clones in find_clone_sets(election):
            for c in sorted(clones):
                yield _removal(election, c, "similar", clones)

    return _drive("cloneproof", election, rule, before, family())


# ---------------------------------------------------------------------------
# consistency axioms
# ---------------------------------------------------------------------------

def _elect_report(axiom: str, election: Election, rule: Rule, group: Iterable[int], tried: int, desc: dict) -> AxiomReport:
    group = frozenset(group)
    before = rule.winner(election)
    if violates("elect", group, before, None):
        witness = Witness(election, None, desc, "elect", group, before, None)
        return AxiomReport(axiom, rule.id, COUNTEREXAMPLE, witness, tried)
    return AxiomReport(axiom, rule.id, HOLDS, None, tried)


def _majority_group(election: Election, rule=None) -> list[int]:
    w = majority_winner(election)
    return [] if w is None else [w]


def _condorcet_group(election: Election, rule=None) -> list[int]:
    w = condorcet_winner(election)
    return [] if w is None else [w]


def check_majority(election: Election, rule) -> AxiomReport:
    rule = as_rule(rule)
    return _elect_report("majority", election, rule, _majority_group(election), 1, {"kind": "majority-winner"})


def check_condorcet(election: Election, rule) -> AxiomReport:
    rule = as_rule(rule)
    return _elect_report("condorcet", election, rule, _condorcet_group(election), 1, {"kind": "condorcet-winner"})


def independent_winners(election: Election, rule) -> list[int]:
    """Every candidate who wins once split out of their alliance as a singleton."""
    rule = as_rule(rule)
    _require_partition(election)
    found = []
    for c in range(election.m):
        group = election.ally_set(c)
        split = election if len(group) == 1 else split_alliance(election, group, [c])
        if rule.winner(split) == c:
            found.append(c)
    return found


def independent_winner(election: Election, rule) -> int | None:
    found = independent_winners(election, rule)
    if len(found) > 1:
        raise MultipleIndependentWinnersError(f"several independent winners: {found}")
    return found[0] if found else None


def solitary_winners(election: Election, rule, two_alliances_only: bool = True) -> list[int]:
    """Candidates who win once all of their allies are deleted.

    ``two_alliances_only=False`` evaluates the unrestricted variant on any
    number of alliances; it is exposed for exploration and never asserted.
    """
    rule = as_rule(rule)
    _require_partition(election)
    if two_alliances_only and len(election.alliances) != 2:
        raise NotTwoAllianceError(f"need exactly two alliances, got {len(election.alliances)}")
    found = []
    for c in range(election.m):
        allies = election.ally_set(c) - {c}
        reduced = remove_candidates(election, allies)
        if _to_original(election, reduced, rule.winner(reduced)) == c:
            found.append(c)
    return found


def check_iw_consistency(election: Election, rule) -> AxiomReport:
    rule = as_rule(rule)
    group = independent_winners(election, rule)
    return _elect_report("iw-consistency", election, rule, group, election.m, {"kind": "independent-winners"})


def check_sw_consistency(election: Election, rule) -> AxiomReport:
    rule = as_rule(rule)
    group = solitary_winners(election, rule)
    return _elect_report("sw-consistency", election, rule, group, election.m, {"kind": "solitary-winners"})


_ELECT_GROUPS: dict[str, Callable] = {
    "majority": _majority_group,
    "condorcet": _condorcet_group,
    "iw-consistency": independent_winners,
    "sw-consistency": solitary_winners,
}

CHECKERS: dict[str, Callable[..., AxiomReport]] = {
    "ally-no-harm": check_ally_no_harm,
    "resistance-splitting": check_resistance_splitting,
    "similar-allies": check_independence_similar_allies,
    "alliance-monotonicity": check_alliance_monotonicity,
    "monotonicity": check_monotonicity,
    "majority": check_majority,
    "condorcet": check_condorcet,
    "iw-consistency": check_iw_consistency,
    "sw-consistency": check_sw_consistency,
    "cloneproof": check_cloneproof,
}

BASIC_AXIOMS = ("ally-no-harm", "resistance-splitting", "similar-allies", "alliance-monotonicity")


def get_checker(axiom: str) -> Callable[..., AxiomReport]:
    try:
        return CHECKERS[axiom.strip().lower()]
    except KeyError:
        raise UnknownAxiomError(f"unknown axiom {axiom!r}; known: {', '.join(CHECKERS)}") from None


def check(axiom: str, election: Election, rule) -> AxiomReport:
    return get_checker(axiom)(election, rule)


# ---------------------------------------------------------------------------
# fuzzing
# ---------------------------------------------------------------------------

@dataclass
class FuzzResult:
    axiom: str
    rule: str
    culture: str
    seed: int
    trials: int
    counterexamples: list[AxiomReport] = field(default_factory=list)
    skipped: int = 0
    trials_run: int = 0

    def __iter__(self):
        return iter(self.counterexamples)

    def __len__(self) -> int:
        return len(self.counterexamples)

    def summary(self) -> dict:
        return {
            "axiom": self.axiom,
            "rule": self.rule,
            "culture": self.culture,
            "seed": self.seed,
            "trials": self.trials,
            "trials_run": self.trials_run,
            "skipped_not_applicable": self.skipped,
            "counterexamples": len(self.counterexamples),
            "counterexample_trials": [r.trial for r in self.counterexamples],
            "note": "statistical search; zero counterexamples is not a proof",
        }


def trial_election(family: CultureFamily, seed: int, trial: int) -> tuple[Election, int]:
    """Election for one fuzz trial and the 64-bit seed that regenerates it."""
    trial_seed = derive_seed(seed, trial)
    return sample(family.spec_for(trial_seed)), trial_seed


def _run_trials(rule_id: str, axiom: str, family: CultureFamily, seed: int, start: int, stop: int, first_k: int | None):
    rule = as_rule(rule_id)
    checker = get_checker(axiom)
    found, skipped = [], []
    for trial in range(start, stop):
        election, trial_seed = trial_election(family, seed, trial)
        try:
            report = checker(election, rule)
        except AxiomError:
            skipped.append(trial)
            continue
        if not report.holds:
            report.trial, report.seed = trial, trial_seed
            found.append(report)
            if first_k is not None and len(found) >= first_k:
                return found, skipped, trial + 1
    return found, skipped, stop


def _run_chunk(args):
    return _run_trials(*args)


def fuzz(
    rule,
    axiom: str,
    culture,
    trials: int,
    seed: int,
    first_k: int | None = None,
    workers: int = 1,
    chunk: int = 1000,
) -> FuzzResult:
    """Search ``trials`` sampled elections for violations of ``axiom`` under ``rule``.

    Trial ``t`` uses the seed ``derive_seed(seed, t)``, so the outcome does not
    depend on ``workers``.  Elections where the axiom does not apply (for
    example SW consistency with three alliances) are counted as skipped.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    get_checker(axiom)
    rule = as_rule(rule)
    family = as_family(culture)
    rule_id = rule.id
    result = FuzzResult(axiom, rule_id, family.describe(), int(seed), trials)
    bounds = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
    jobs = [(rule_id, axiom, family, seed, a, b, first_k) for a, b in bounds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_chunk, jobs))
    else:
        outcomes = []
        for job in jobs:
            outcomes.append(_run_chunk(job))
            if first_k is not None and sum(len(o[0]) for o in outcomes) >= first_k:
                break
    ran_until = trials
    for found, _, _ in outcomes:
        result.counterexamples.extend(found)
    result.counterexamples.sort(key=lambda r: r.trial)
    if first_k is not None and len(result.counterexamples) >= first_k:
        result.counterexamples = result.counterexamples[:first_k]
        ran_until = result.counterexamples[-1].trial + 1
    result.trials_run = ran_until
    # parallel chunks may run past the stopping trial; count only what precedes it
    result.skipped = sum(t < ran_until for _, skipped, _ in outcomes for t in skipped)
    return result


def replay_trial(rule, axiom: str, culture, seed: int, trial: int) -> AxiomReport:
    family = as_family(culture)
    election, trial_seed = trial_election(family, seed, trial)
    report = get_checker(axiom)(election, as_rule(rule))
    report.trial, report.seed = trial, trial_seed
    return report


def iter_splits(members: Iterable[int]) -> Iterator[tuple[frozenset[int], frozenset[int]]]:
    """All unordered 2-partitions of ``members`` into non-empty parts."""
    members = sorted(members)
    parts, _ = _split_parts(members, 2 ** len(members), 0)
    whole = frozenset(members)
    for part in parts:
        yield part, whole - part


__all__ = [
    "AxiomReport",
    "Witness",
    "FuzzResult",
    "check",
    "fuzz",
    "replay_trial",
    "independent_winner",
    "independent_winners",
    "solitary_winners",
    *(fn.__name__ for fn in CHECKERS.values()),
]
