"""Election model: ballots, alliance structures and perturbation operators.

Candidates are integers ``0..m-1``.  Ballots are stored compressed as a
``(b, m)`` array of rankings (best first) with a parallel array of
multiplicities.  Every election also carries ``origin``: for each current
candidate index, the index it had in the election it was derived from.
Perturbations compose ``origin`` so that checkers can compare winners across
candidate removals by original identity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from alliancevote import _kernels


class ElectionError(ValueError):
    """Raised for structurally invalid elections or perturbation arguments."""


def _canon_sets(sets, names):
    order = sorted(range(len(sets)), key=lambda i: (min(sets[i]), -len(sets[i]), sorted(sets[i])))
    return tuple(sets[i] for i in order), tuple(names[i] for i in order)


@dataclass(frozen=True)
class AllianceStructure:
    """Either a partition of the candidates or a laminar family over them.

    ``sets`` is kept in canonical order (by smallest member, larger sets
    first).  Names are carried for display and file round trips only; they
    do not take part in equality.
    """

    sets: tuple[frozenset[int], ...]
    laminar: bool = False
    names: tuple[str, ...] = field(default=(), compare=False)

    @classmethod
    def partition(cls, groups: Iterable[Iterable[int]], names: Sequence[str] | None = None) -> "AllianceStructure":
        sets = [frozenset(int(c) for c in g) for g in groups]
        names = list(names) if names is not None else [f"A{i}" for i in range(len(sets))]
        if len(names) != len(sets):
            raise ElectionError("one name per alliance expected")
        sets, names = _canon_sets(sets, names)
        return cls(sets, False, names)

    @classmethod
    def laminar_family(cls, groups: Iterable[Iterable[int]], names: Sequence[str] | None = None) -> "AllianceStructure":
        sets = [frozenset(int(c) for c in g) for g in groups]
        names = list(names) if names is not None else [f"L{i}" for i in range(len(sets))]
        if len(names) != len(sets):
            raise ElectionError("one name per alliance expected")
        # duplicate sets carry no information
        uniq: dict[frozenset[int], str] = {}
        for s, nm in zip(sets, names):
            uniq.setdefault(s, nm)
        sets, names = _canon_sets(list(uniq), list(uniq.values()))
        return cls(sets, True, names)

    @classmethod
    def no_ally(cls, m: int) -> "AllianceStructure":
        return cls.partition([[c] for c in range(m)], [f"A{c}" for c in range(m)])

    @classmethod
    def from_labels(cls, alliance_ids: Sequence[int]) -> "AllianceStructure":
        """Partition from a per-candidate alliance id list."""
        groups: dict[int, list[int]] = {}
        for c, a in enumerate(alliance_ids):
            groups.setdefault(int(a), []).append(c)
        keys = sorted(groups)
        return cls.partition([groups[k] for k in keys], [f"A{k}" for k in keys])

    def __len__(self) -> int:
        return len(self.sets)

    def validate(self, m: int) -> None:
        if not self.sets:
            raise ElectionError("no alliances given")
        for s in self.sets:
            if not s:
                raise ElectionError("empty alliance")
            if min(s) < 0 or max(s) >= m:
                raise ElectionError(f"alliance member out of range 0..{m - 1}")
        if not self.laminar:
            seen: set[int] = set()
            for s in self.sets:
                if seen & s:
                    raise ElectionError("alliances are not pairwise disjoint")
                seen |= s
            if len(seen) != m:
                raise ElectionError("alliances do not cover every candidate")
        else:
            for s, t in itertools.combinations(self.sets, 2):
                small, big = (s, t) if len(s) <= len(t) else (t, s)
                if not (small <= big or not (small & big)):
                    raise ElectionError("alliances do not form a laminar family")

    @cached_property
    def alliance_of(self) -> np.ndarray:
        if self.laminar:
            raise ElectionError("alliance_of is undefined for laminar families")
        size = max(max(s) for s in self.sets) + 1
        out = np.empty(size, dtype=np.int64)
        for i, s in enumerate(self.sets):
            out[list(s)] = i
        return out

    def members(self, c: int) -> frozenset[int]:
        """The alliance of ``c`` (partition case)."""
        return self.sets[int(self.alliance_of[c])]

    def containing(self, c: int) -> list[frozenset[int]]:
        """All alliances containing ``c``, largest first."""
        return sorted((s for s in self.sets if c in s), key=len, reverse=True)

    def name_of(self, s: frozenset[int]) -> str:
        return self.names[self.sets.index(s)]

    def restrict(self, keep: Sequence[int]) -> "AllianceStructure":
        """Relabel onto the surviving candidates ``keep`` (old indices, ascending)."""
        remap = {old: new for new, old in enumerate(keep)}
        sets, names = [], []
        for s, nm in zip(self.sets, self.names):
            t = frozenset(remap[c] for c in s if c in remap)
            if t:
                sets.append(t)
                names.append(nm)
        if self.laminar:
            return AllianceStructure.laminar_family(sets, names)
        return AllianceStructure.partition(sets, names)

    def with_singletons(self, m: int) -> "AllianceStructure":
        """Laminar closure adding ``{c}`` for every candidate."""
        sets = list(self.sets) + [frozenset([c]) for c in range(m)]
        names = list(self.names) + [f"{{{c}}}" for c in range(m)]
        return AllianceStructure.laminar_family(sets, names)

    def as_laminar(self) -> "AllianceStructure":
        return AllianceStructure.laminar_family(self.sets, self.names)


@dataclass(frozen=True, eq=False)
class Election:
    """An ordinal election with an alliance structure.

    Equality is semantic: same candidates, same alliance sets and the same
    multiset of rankings (ballot order and row compression are ignored).
    """

    ballots: np.ndarray
    counts: np.ndarray
    alliances: AllianceStructure
    labels: tuple[str, ...]
    origin: tuple[int, ...]

    # -- construction -------------------------------------------------------

    @classmethod
    def from_rankings(
        cls,
        rankings: Sequence[Sequence[int]],
        counts: Sequence[int] | None = None,
        alliances: AllianceStructure | Iterable[Iterable[int]] | None = None,
        labels: Sequence[str] | None = None,
    ) -> "Election":
        ballots = np.asarray(rankings, dtype=np.int64)
        if ballots.ndim != 2 or ballots.shape[0] == 0:
            raise ElectionError("at least one ranking is required")
        m = ballots.shape[1]
        counts_arr = np.ones(len(ballots), dtype=np.int64) if counts is None else np.asarray(counts, dtype=np.int64)
        if alliances is None:
            alliances = AllianceStructure.no_ally(m)
        elif not isinstance(alliances, AllianceStructure):
            alliances = AllianceStructure.partition(alliances)
        labels = tuple(labels) if labels is not None else tuple(f"c{i}" for i in range(m))
        e = cls(ballots, counts_arr, alliances, labels, tuple(range(m)))
        e.validate()
        return e

    @classmethod
    def from_labels(
        cls,
        labels: Sequence[str],
        votes: Sequence[tuple[int, str | Sequence[str]]],
        alliances: Sequence[Sequence[str]] | None = None,
        alliance_names: Sequence[str] | None = None,
        laminar: bool = False,
    ) -> "Election":
        """Build from candidate names, e.g. ``(46, "Adam Alice Bob")``."""
        index = {name: i for i, name in enumerate(labels)}
        rankings, counts = [], []
        for count, order in votes:
            names = order.split() if isinstance(order, str) else order
            rankings.append([index[x] for x in names])
            counts.append(count)
        if alliances is None:
            structure = AllianceStructure.no_ally(len(labels))
        else:
            groups = [[index[x] for x in g] for g in alliances]
            make = AllianceStructure.laminar_family if laminar else AllianceStructure.partition
            structure = make(groups, alliance_names)
        return cls.from_rankings(rankings, counts, structure, labels)

    @classmethod
    def _trusted(cls, ballots, counts, alliances, labels, origin) -> "Election":
        return cls(ballots, counts, alliances, labels, origin)

    def validate(self) -> None:
        b = self.ballots
        if b.ndim != 2 or b.shape[0] == 0 or b.shape[1] == 0:
            raise ElectionError("at least one ranking over at least one candidate is required")
        m = b.shape[1]
        if len(self.labels) != m:
            raise ElectionError("one label per candidate expected")
        if len(set(self.labels)) != m:
            raise ElectionError("candidate labels must be distinct")
        if self.counts.shape != (b.shape[0],):
            raise ElectionError("one multiplicity per ranking expected")
        if (self.counts <= 0).any():
            raise ElectionError("multiplicities must be positive")
        if not np.array_equal(np.sort(b, axis=1), np.broadcast_to(np.arange(m), b.shape)):
            raise ElectionError("every ranking must be a permutation of 0..m-1")
        self.alliances.validate(m)

    # -- basic properties ---------------------------------------------------

    @property
    def m(self) -> int:
        return self.ballots.shape[1]

    @cached_property
    def n(self) -> int:
        return int(self.counts.sum())

    @cached_property
    def pos(self) -> np.ndarray:
        return _kernels.positions(self.ballots)

    @cached_property
    def pref(self) -> np.ndarray:
        return _kernels.pref_matrix(self.pos, self.counts)

    @cached_property
    def alliance_of(self) -> np.ndarray:
        return self.alliances.alliance_of

    @property
    def laminar(self) -> bool:
        return self.alliances.laminar

    def ally_set(self, c: int) -> frozenset[int]:
        return self.alliances.members(c)

    def are_allies(self, a: int, b: int) -> bool:
        return bool(self.alliance_of[a] == self.alliance_of[b])

    def original(self, c: int) -> int:
        return self.origin[c]

    def unit_rankings(self) -> np.ndarray:
        """One row per voter (multiplicities expanded)."""
        return np.repeat(self.ballots, self.counts, axis=0)

    def canonical_ballots(self) -> list[tuple[tuple[int, ...], int]]:
        agg: dict[tuple[int, ...], int] = {}
        for row, w in zip(self.ballots.tolist(), self.counts.tolist()):
            key = tuple(row)
            agg[key] = agg.get(key, 0) + w
        return sorted(agg.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Election):
            return NotImplemented
        return (
            self.m == other.m
            and self.labels == other.labels
            and self.alliances == other.alliances
            and self.canonical_ballots() == other.canonical_ballots()
        )

    def __hash__(self) -> int:
        return hash((self.labels, self.alliances, tuple(self.canonical_ballots())))

    def identical(self, other: "Election") -> bool:
        """Row-for-row equality, including ballot order and compression."""
        return (
            self == other
            and np.array_equal(self.ballots, other.ballots)
            and np.array_equal(self.counts, other.counts)
            and self.alliances.names == other.alliances.names
        )

    def with_alliances(self, alliances: AllianceStructure) -> "Election":
        alliances.validate(self.m)
        return Election._trusted(self.ballots, self.counts, alliances, self.labels, self.origin)

    def __repr__(self) -> str:
        rows = ", ".join(
            f"{w}:" + ">".join(self.labels[c] for c in row) for row, w in zip(self.ballots.tolist(), self.counts.tolist())
        )
        groups = " | ".join("{" + ",".join(self.labels[c] for c in sorted(s)) + "}" for s in self.alliances.sets)
        return f"Election(m={self.m}, n={self.n}, alliances=[{groups}], votes=[{rows}])"


# ---------------------------------------------------------------------------
# pairwise comparisons
# ---------------------------------------------------------------------------

def build_pref_matrix(election: Election) -> np.ndarray:
    """``pref[a, b]`` = number of voters ranking ``a`` above ``b``."""
    return election.pref.copy()


def wins_head_to_head(pref: np.ndarray, a: int, b: int) -> bool:
    if a == b:
        raise ElectionError("a candidate is not compared with itself")
    n = pref[a, b] + pref[b, a]
    return bool(2 * pref[a, b] > n)


def majority_winner(election: Election) -> int | None:
    tops = _kernels.top_counts(election.ballots, election.counts, np.ones(election.m, dtype=np.bool_))
    c = int(np.argmax(tops))
    return c if 2 * tops[c] > election.n else None


def condorcet_winner(election: Election) -> int | None:
    beats = 2 * election.pref > election.n
    for c in range(election.m):
        if beats[c].sum() == election.m - 1:
            return c
    return None


# ---------------------------------------------------------------------------
# perturbations
# ---------------------------------------------------------------------------

def remove_candidates(election: Election, removed: Iterable[int]) -> Election:
    """Delete ``removed`` from every ranking and alliance, re-indexing the rest.

    The survivors keep their relative order, so index-order tie-breaking is
    unaffected.  ``result.origin`` maps new indices back to the originals.
    """
    gone = {int(c) for c in removed}
    if not gone:
        return election
    m = election.m
    if any(c < 0 or c >= m for c in gone):
        raise ElectionError("removed candidate out of range")
    keep = [c for c in range(m) if c not in gone]
    if not keep:
        raise ElectionError("cannot remove every candidate")
    lookup = np.full(m, -1, dtype=np.int64)
    lookup[keep] = np.arange(len(keep))
    mapped = lookup[election.ballots]
    ballots = mapped[mapped >= 0].reshape(len(mapped), len(keep))
    return Election._trusted(
        ballots,
        election.counts,
        election.alliances.restrict(keep),
        tuple(election.labels[c] for c in keep),
        tuple(election.origin[c] for c in keep),
    )


def restrict_to(election: Election, kept: Iterable[int]) -> Election:
    keep = set(int(c) for c in kept)
    return remove_candidates(election, [c for c in range(election.m) if c not in keep])


def restrict_voters(election: Election, rows_mask: np.ndarray) -> Election:
    """Keep only the ballot rows selected by ``rows_mask``."""
    if not rows_mask.any():
        raise ElectionError("no voters left")
    return Election._trusted(
        election.ballots[rows_mask], election.counts[rows_mask], election.alliances, election.labels, election.origin
    )


def _as_set(election: Election, alliance) -> frozenset[int]:
    if isinstance(alliance, (int, np.integer)):
        return election.alliances.sets[int(alliance)]
    return frozenset(int(c) for c in alliance)


def split_alliance(election: Election, alliance, part: Iterable[int]) -> Election:
    """Split ``alliance`` into ``part`` and the remainder; votes are unchanged."""
    whole = _as_set(election, alliance)
    part = frozenset(int(c) for c in part)
    structure = election.alliances
    if whole not in structure.sets:
        raise ElectionError("alliance not present in the structure")
    if not part or not part < whole:
        raise ElectionError("split part must be a non-empty proper subset of the alliance")
    rest = whole - part
    name = structure.name_of(whole)
    sets = [s for s in structure.sets if s != whole] + [part, rest]
    names = [structure.name_of(s) for s in structure.sets if s != whole] + [f"{name}.1", f"{name}.2"]
    if structure.laminar:
        new = AllianceStructure.laminar_family(sets, names)
    else:
        new = AllianceStructure.partition(sets, names)
    new.validate(election.m)
    return Election._trusted(election.ballots, election.counts, new, election.labels, election.origin)


def merge_alliances(election: Election, first, second) -> Election:
    a, b = _as_set(election, first), _as_set(election, second)
    structure = election.alliances
    if a not in structure.sets or b not in structure.sets:
        raise ElectionError("alliance not present in the structure")
    if a & b:
        raise ElectionError("only disjoint alliances can be merged")
    sets = [s for s in structure.sets if s not in (a, b)] + [a | b]
    names = [structure.name_of(s) for s in structure.sets if s not in (a, b)]
    names.append(f"{structure.name_of(a)}+{structure.name_of(b)}")
    if structure.laminar:
        new = AllianceStructure.laminar_family(sets, names)
    else:
        new = AllianceStructure.partition(sets, names)
    new.validate(election.m)
    return Election._trusted(election.ballots, election.counts, new, election.labels, election.origin)


def _row_of_voter(election: Election, voter: int) -> int:
    if voter < 0 or voter >= election.n:
        raise ElectionError("voter index out of range")
    return int(np.searchsorted(np.cumsum(election.counts), voter, side="right"))


def _replace_voter(election: Election, voter: int, ranking) -> Election:
    """Give one voter a new ranking; that voter keeps its expanded index."""
    row = _row_of_voter(election, voter)
    count = int(election.counts[row])
    changed = np.asarray(ranking, dtype=election.ballots.dtype)
    if count == 1:
        ballots = election.ballots.copy()
        ballots[row] = changed
        return Election._trusted(ballots, election.counts, election.alliances, election.labels, election.origin)
    before = voter - int(election.counts[:row].sum())
    after = count - before - 1
    pieces = [(election.ballots[row], before), (changed, 1), (election.ballots[row], after)]
    rows = [r for r, k in pieces if k]
    counts = [k for _, k in pieces if k]
    ballots = np.concatenate([election.ballots[:row], np.stack(rows), election.ballots[row + 1 :]])
    counts = np.concatenate([election.counts[:row], np.asarray(counts, dtype=election.counts.dtype), election.counts[row + 1 :]])
    return Election._trusted(ballots, counts, election.alliances, election.labels, election.origin)


def _swap_voter(election: Election, voter: int, candidate: int, step: int) -> Election:
    ranking = election.ballots[_row_of_voter(election, voter)]
    p = int(np.flatnonzero(ranking == candidate)[0])
    q = p - step
    if q < 0:
        raise ElectionError("candidate is already ranked first by that voter")
    if q >= election.m:
        raise ElectionError("candidate is already ranked last by that voter")
    changed = ranking.copy()
    changed[p], changed[q] = changed[q], changed[p]
    return _replace_voter(election, voter, changed)


def promote_in_row(election: Election, row: int, candidate: int) -> Election:
    """Move ``candidate`` one place up in a single voter of ballot row ``row``."""
    return _swap_voter(election, int(election.counts[:row].sum()), candidate, 1)


def promote_candidate(election: Election, voter: int, candidate: int) -> Election:
    """Swap ``candidate`` one position upward in voter ``voter``'s ranking.

    ``voter`` indexes individual voters (multiplicities expanded); a
    compressed row with several voters is split so exactly one voter changes
    and keeps its index.
    """
    return _swap_voter(election, voter, candidate, 1)


def demote_candidate(election: Election, voter: int, candidate: int) -> Election:
    return _swap_voter(election, voter, candidate, -1)


def reinsert(election: Election, voter: int, candidate: int, new_position: int) -> Election:
    """Move ``candidate`` directly to ``new_position`` in one voter's ranking."""
    row = _row_of_voter(election, voter)
    ranking = [c for c in election.ballots[row].tolist() if c != candidate]
    ranking.insert(new_position, candidate)
    return _replace_voter(election, voter, ranking)


# ---------------------------------------------------------------------------
# clones and similar allies
# ---------------------------------------------------------------------------

def is_clone_set(election: Election, group: Iterable[int]) -> bool:
    members = sorted(set(group))
    if len(members) < 2 or len(members) >= election.m:
        return False
    p = election.pos[:, members]
    return bool(((p.max(axis=1) - p.min(axis=1)) == len(members) - 1).all())


def find_clone_sets(election: Election) -> list[frozenset[int]]:
    """All inclusion-maximal proper clone sets of size at least two.

    Any clone set is a contiguous block of the first ranking, so only those
    O(m^2) blocks need checking.
    """
    first = election.ballots[0].tolist()
    m = election.m
    found = []
    for size in range(m - 1, 1, -1):
        for start in range(0, m - size + 1):
            block = frozenset(first[start : start + size])
            if any(block < f for f in found):
                continue
            if is_clone_set(election, block):
                found.append(block)
    return sorted(found, key=lambda s: (sorted(s), len(s)))


def all_clone_sets(election: Election) -> list[frozenset[int]]:
    first = election.ballots[0].tolist()
    m = election.m
    out = []
    for size in range(2, m):
        for start in range(0, m - size + 1):
            block = frozenset(first[start : start + size])
            if is_clone_set(election, block):
                out.append(block)
    return out


def _alliance_for_pair(election: Election, a: int, b: int) -> frozenset[int]:
    if election.laminar:
        shared = [s for s in election.alliances.sets if a in s and b in s]
        if not shared:
            raise ElectionError("candidates are not allies")
        return min(shared, key=len)
    if not election.are_allies(a, b):
        raise ElectionError("similarity is only defined for allies")
    return election.ally_set(a)


def are_similar(election: Election, a: int, b: int, symmetric: bool = True, alliance=None) -> bool:
    """True iff no voter ranks an opponent strictly between ``a`` and ``b``.

    With ``symmetric=False`` only voters ranking ``a`` above ``b`` are
    inspected (the literal one-directional reading).
    """
    if a == b:
        raise ElectionError("similarity needs two distinct candidates")
    group = _as_set(election, alliance) if alliance is not None else _alliance_for_pair(election, a, b)
    if a not in group or b not in group:
        raise ElectionError("candidates are not allies with respect to that alliance")
    opponents = [c for c in range(election.m) if c not in group]
    if not opponents:
        return True
    pos = election.pos
    pa, pb = pos[:, a][:, None], pos[:, b][:, None]
    po = pos[:, opponents]
    between = ((pa < po) & (po < pb)).any(axis=1)
    if symmetric:
        between |= ((pb < po) & (po < pa)).any(axis=1)
    return not bool(between.any())


def similar_pairs(election: Election, symmetric: bool = True) -> list[tuple[int, int]]:
    pairs = []
    for s in election.alliances.sets:
        for a, b in itertools.combinations(sorted(s), 2):
            if are_similar(election, a, b, symmetric, alliance=s):
                pairs.append((a, b))
    return pairs
