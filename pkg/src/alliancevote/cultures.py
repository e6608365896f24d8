"""Seeded statistical cultures producing elections with alliances.

Random streams come from numpy's PCG64 seeded with a 64-bit integer.  Child
seeds (per trial, per experiment cell) are derived with
``SeedSequence(master, spawn_key=keys)``, so a trial's election depends only
on ``(master seed, keys)`` and never on execution order.

Culture strings look like ``ic:m=10,n=101,k=2`` or
``euclid:d=2,m=3..6,n=3..15,k=2..3``; ranges are inclusive and are drawn per
trial.  ``alliances=none`` yields no-ally elections and ``alliances=clones``
turns disjoint clone sets into alliances.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from alliancevote.election import AllianceStructure, Election, all_clone_sets

CULTURES = ("ic", "euclid")
ALLIANCE_MODES = ("uniform", "none", "clones")
MAX_RESAMPLES = 10_000


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for ``keys`` under ``master``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(hi) << 32 | int(lo)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class CultureSpec:
    culture: str
    m: int
    n: int
    k: int = 2
    seed: int = 0
    d: int = 1
    alliances: str = "uniform"

    def __post_init__(self):
        if self.culture not in CULTURES:
            raise ValueError(f"unknown culture {self.culture!r}")
        if self.alliances not in ALLIANCE_MODES:
            raise ValueError(f"unknown alliance mode {self.alliances!r}")
        if self.n < 1 or self.m < 1:
            raise ValueError("need at least one voter and one candidate")
        if self.alliances == "uniform" and not 2 <= self.k <= self.m:
            raise ValueError("need 2 <= k <= m")
        if self.culture == "euclid" and self.d < 1:
            raise ValueError("dimension must be positive")

    def label(self) -> str:
        name = "IC" if self.culture == "ic" else f"Euc {self.d}D"
        return f"{name} m={self.m} n={self.n} k={self.k}"

    def to_json(self) -> dict:
        return {
            "culture": self.culture,
            "d": self.d if self.culture == "euclid" else None,
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "seed": self.seed,
            "alliances": self.alliances,
        }


def _compress(rankings: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge identical rankings, keeping first-appearance order."""
    uniq, first, counts = np.unique(rankings, axis=0, return_index=True, return_counts=True)
    order = np.argsort(first, kind="stable")
    return uniq[order].astype(np.int64), counts[order].astype(np.int64)


def _finish(rankings: np.ndarray, structure: AllianceStructure) -> Election:
    ballots, counts = _compress(rankings)
    m = rankings.shape[1]
    return Election._trusted(ballots, counts, structure, tuple(f"c{i}" for i in range(m)), tuple(range(m)))


def _clone_alliances(rankings: np.ndarray) -> AllianceStructure:
    m = rankings.shape[1]
    probe = _finish(rankings, AllianceStructure.no_ally(m))
    taken: set[int] = set()
    groups = []
    # smallest clone sets first, so alliances stay tight
    for s in sorted(all_clone_sets(probe), key=lambda s: (len(s), sorted(s))):
        if not s & taken:
            groups.append(sorted(s))
            taken |= s
    groups += [[c] for c in range(m) if c not in taken]
    return AllianceStructure.partition(groups)


def _structure(spec: CultureSpec, rng: np.random.Generator, rankings: np.ndarray):
    if spec.alliances == "none":
        return AllianceStructure.no_ally(spec.m), 0
    if spec.alliances == "clones":
        return _clone_alliances(rankings), 0
    for attempt in range(MAX_RESAMPLES):
        labels = rng.integers(0, spec.k, size=spec.m)
        if len(np.unique(labels)) == spec.k:
            return AllianceStructure.from_labels(labels.tolist()), attempt
    raise RuntimeError("could not draw non-empty alliances")


def sample_ic(spec: CultureSpec, with_stats: bool = False):
    """Impartial culture: uniform rankings and uniform alliance labels.

    Alliance labels are redrawn until all ``k`` alliances are non-empty.
    """
    rng = make_rng(spec.seed)
    rankings = rng.permuted(np.tile(np.arange(spec.m, dtype=np.int64), (spec.n, 1)), axis=1)
    structure, resamples = _structure(spec, rng, rankings)
    election = _finish(rankings, structure)
    return (election, {"resamples": resamples}) if with_stats else election


def sample_euclidean(spec: CultureSpec, with_stats: bool = False):
    """Uniform ideal points in the unit cube; rankings by increasing distance.

    Draw order per attempt: alliance points, candidate points, voter points.
    A candidate joins its nearest alliance point; an attempt that leaves an
    alliance empty is discarded and the whole instance redrawn.
    """
    rng = make_rng(spec.seed)
    d = spec.d
    for attempt in range(MAX_RESAMPLES):
        centres = rng.random((spec.k, d))
        cands = rng.random((spec.m, d))
        voters = rng.random((spec.n, d))
        near = np.linalg.norm(cands[:, None, :] - centres[None, :, :], axis=2).argmin(axis=1)
        if spec.alliances == "uniform" and len(np.unique(near)) < spec.k:
            continue
        dist = np.linalg.norm(voters[:, None, :] - cands[None, :, :], axis=2)
        rankings = np.argsort(dist, axis=1, kind="stable").astype(np.int64)
        if spec.alliances == "uniform":
            structure = AllianceStructure.from_labels(near.tolist())
        else:
            structure, _ = _structure(spec, rng, rankings)
        election = _finish(rankings, structure)
        return (election, {"resamples": attempt}) if with_stats else election
    raise RuntimeError("could not draw non-empty alliances")


def sample(spec: CultureSpec, with_stats: bool = False):
    if spec.culture == "ic":
        return sample_ic(spec, with_stats)
    return sample_euclidean(spec, with_stats)


# ---------------------------------------------------------------------------
# culture families (parameter ranges drawn per trial)
# ---------------------------------------------------------------------------

def _parse_range(text: str) -> tuple[int, int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo_i, hi_i = int(lo), int(hi)
    else:
        lo_i = hi_i = int(text)
    if lo_i > hi_i:
        raise ValueError(f"empty range {text!r}")
    return lo_i, hi_i


@dataclass(frozen=True)
class CultureFamily:
    culture: str
    m: tuple[int, int]
    n: tuple[int, int]
    k: tuple[int, int] = (2, 2)
    d: int = 1
    alliances: str = "uniform"

    @classmethod
    def parse(cls, text: str) -> "CultureFamily":
        name, _, rest = text.strip().partition(":")
        name = name.lower()
        aliases = {"euc1d": ("euclid", 1), "euc2d": ("euclid", 2), "euc3d": ("euclid", 3)}
        d = 1
        if name in aliases:
            name, d = aliases[name]
        if name not in CULTURES:
            raise ValueError(f"unknown culture {name!r}")
        params = {"m": "5", "n": "9", "k": "2"}
        alliances = "uniform"
        for item in filter(None, rest.split(",")):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"bad culture parameter {item!r}")
            key = key.strip()
            if key == "d":
                d = int(value)
            elif key == "alliances":
                alliances = value.strip()
            elif key in params:
                params[key] = value.strip()
            else:
                raise ValueError(f"unknown culture parameter {key!r}")
        return cls(name, _parse_range(params["m"]), _parse_range(params["n"]), _parse_range(params["k"]), d, alliances)

    def spec_for(self, seed: int) -> CultureSpec:
        """Concrete spec for one trial; ``seed`` fixes both the sizes and the sample."""
        rng = make_rng(derive_seed(seed, 0))
        m = int(rng.integers(self.m[0], self.m[1] + 1))
        n = int(rng.integers(self.n[0], self.n[1] + 1))
        k = int(rng.integers(self.k[0], self.k[1] + 1))
        if self.alliances == "uniform":
            k = min(k, m)
        return CultureSpec(self.culture, m, n, k, derive_seed(seed, 1), self.d, self.alliances)

    def describe(self) -> str:
        def r(x):
            return str(x[0]) if x[0] == x[1] else f"{x[0]}..{x[1]}"

        extra = f"d={self.d}," if self.culture == "euclid" else ""
        tail = "" if self.alliances == "uniform" else f",alliances={self.alliances}"
        return f"{self.culture}:{extra}m={r(self.m)},n={r(self.n)},k={r(self.k)}{tail}"


def as_family(culture) -> CultureFamily:
    if isinstance(culture, CultureFamily):
        return culture
    if isinstance(culture, CultureSpec):
        return CultureFamily(
            culture.culture, (culture.m, culture.m), (culture.n, culture.n), (culture.k, culture.k), culture.d, culture.alliances
        )
    return CultureFamily.parse(str(culture))


def with_seed(spec: CultureSpec, seed: int) -> CultureSpec:
    return replace(spec, seed=int(seed))
