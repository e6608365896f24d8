"""Primary-election compositions, spoiler detection and welfare experiments.

A primary picks one representative per alliance; the main election is then
tallied on the representatives only.  ``run_experiment`` sweeps a grid of
cultures and emits per-cell spoiler rates and mean welfare as CSV and JSON.
Every aggregate is built from exact integer sums, so output bytes do not
depend on how trials are spread over worker processes.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from alliancevote.cultures import CultureSpec, derive_seed, sample
from alliancevote.election import Election, ElectionError, remove_candidates, restrict_voters
from alliancevote.standard_rules import TallyResult

SCHEMA_VERSION = 1


class PrimaryMode(str, enum.Enum):
    JOINT = "joint"
    DISJOINT = "disjoint"


def _winner_in(election: Election, sub: Election, rule) -> int:
    w = rule.winner(sub)
    return election.origin.index(sub.origin[w])


def _restrict(election: Election, keep) -> Election:
    keep = set(keep)
    return remove_candidates(election, [c for c in range(election.m) if c not in keep])


def primary_winner(election: Election, alliance, mode: PrimaryMode, rule) -> int:
    """Representative of ``alliance`` chosen by ``rule`` among its members.

    Joint primaries use every ballot; disjoint primaries only the voters whose
    top choice is in the alliance.  An alliance nobody ranks first gets its
    lowest-indexed member under disjoint primaries.
    """
    from alliancevote.rules import as_rule

    rule = as_rule(rule)
    members = sorted(int(c) for c in alliance)
    if not members:
        raise ElectionError("empty alliance")
    if len(members) == 1:
        return members[0]
    mode = PrimaryMode(mode)
    base = election
    if mode is PrimaryMode.DISJOINT:
        supporters = np.isin(election.ballots[:, 0], members)
        if not supporters.any():
            return members[0]
        base = restrict_voters(election, supporters)
    return _winner_in(election, _restrict(base, members), rule)


def representatives(election: Election, mode: PrimaryMode, rule) -> list[int]:
    """One primary winner per alliance, in alliance order."""
    return [primary_winner(election, s, mode, rule) for s in election.alliances.sets]


def main_election_with_representatives(election: Election, reps, rule) -> int:
    from alliancevote.rules import as_rule

    rule = as_rule(rule)
    reps = [int(r) for r in reps]
    sets = election.alliances.sets
    if len(reps) != len(sets):
        raise ElectionError("need exactly one representative per alliance")
    for rep, s in zip(reps, sets):
        if rep not in s:
            raise ElectionError(f"representative {rep} is not in its alliance")
    return _winner_in(election, _restrict(election, reps), rule)


def primaries_rule(election: Election, rule, mode: PrimaryMode) -> TallyResult:
    """``rule`` composed with primaries: representatives first, then the main election."""
    if election.laminar:
        raise ElectionError("primaries need disjoint alliances")
    reps = representatives(election, mode, rule)
    winner = main_election_with_representatives(election, reps, rule)
    return TallyResult(winner, {r: float(r == winner) for r in reps}, {"representatives": reps, "mode": PrimaryMode(mode).value})


COUNTERFACTUALS = ("fixed", "rerun")


def has_nonoptimal_primary_winner(election: Election, mode: PrimaryMode, rule, counterfactual: str = "fixed") -> bool:
    """True iff some losing alliance would win with a different representative.

    ``fixed`` swaps one alliance's representative and keeps the others;
    ``rerun`` recomputes every other alliance's primary after the swap.
    """
    from alliancevote.rules import as_rule

    if counterfactual not in COUNTERFACTUALS:
        raise ValueError(f"counterfactual must be one of {COUNTERFACTUALS}")
    rule = as_rule(rule)
    sets = election.alliances.sets
    reps = representatives(election, mode, rule)
    winner = main_election_with_representatives(election, reps, rule)
    for i, s in enumerate(sets):
        if winner in s or len(s) == 1:
            continue
        for alt in sorted(s - {reps[i]}):
            if counterfactual == "fixed":
                trial = list(reps)
            else:
                trial = [primary_winner(election, t, mode, rule) for t in sets]
            trial[i] = alt
            if main_election_with_representatives(election, trial, rule) in s:
                return True
    return False


def social_welfare(election: Election, c: int) -> int:
    """Borda score of ``c``: each voter contributes m - 1 - position."""
    pos = election.pos[:, int(c)]
    return int(((election.m - 1 - pos) * election.counts).sum())


def welfare_of_rule(election: Election, rule) -> int:
    from alliancevote.rules import as_rule

    return social_welfare(election, as_rule(rule).winner(election))


# ---------------------------------------------------------------------------
# experiment grid
# ---------------------------------------------------------------------------

CULTURE_NAMES = {"ic": ("ic", 1), "euc1d": ("euclid", 1), "euc2d": ("euclid", 2), "euc3d": ("euclid", 3)}


def _culture(name: str) -> tuple[str, int]:
    key = name.strip().lower()
    if key in CULTURE_NAMES:
        return CULTURE_NAMES[key]
    if key.startswith("euc") and key.endswith("d") and key[3:-1].isdigit():
        return "euclid", int(key[3:-1])
    raise ValueError(f"unknown culture {name!r}")


@dataclass
class ExperimentManifest:
    cultures: list[str] = field(default_factory=lambda: ["ic", "euc3d", "euc2d", "euc1d"])
    m: list[int] = field(default_factory=lambda: [8, 10, 12])
    k: list[int] = field(default_factory=lambda: [2, 3])
    n: list[int] = field(default_factory=lambda: [101])
    spoiler_rules: list[str] = field(default_factory=lambda: ["plurality", "maximin", "schulze"])
    welfare_rules: list[str] = field(default_factory=lambda: ["plurality", "maximin", "schulze"])
    trials: int = 1000
    seed: int = 0
    counterfactual: str = "fixed"
    per_trial: bool = False
    workers: int = 1
    chunk: int = 250

    def __post_init__(self):
        for name in self.cultures:
            _culture(name)
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.counterfactual not in COUNTERFACTUALS:
            raise ValueError(f"counterfactual must be one of {COUNTERFACTUALS}")
        bad = [f for f in self.spoiler_rules + self.welfare_rules if f not in ("plurality", "maximin", "schulze")]
        if bad:
            raise ValueError(f"experiment rules must be plurality, maximin or schulze, got {bad}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentManifest":
        data = dict(data)
        data.pop("schema_version", None)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown manifest keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentManifest":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        out = asdict(self)
        # execution knobs never change results, so they stay out of the fingerprint
        out.pop("workers")
        out.pop("chunk")
        return {"schema_version": SCHEMA_VERSION, **out}

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def cells(self) -> list["Cell"]:
        out = []
        for name in self.cultures:
            culture, d = _culture(name)
            for m in self.m:
                for k in self.k:
                    for n in self.n:
                        out.append(Cell(name, culture, d, m, n, k))
        return out


@dataclass(frozen=True)
class Cell:
    name: str
    culture: str
    d: int
    m: int
    n: int
    k: int

    @property
    def key(self) -> str:
        return f"{self.name}-m{self.m}-n{self.n}-k{self.k}"

    def seed(self, master: int) -> int:
        code = 0 if self.culture == "ic" else 1
        return derive_seed(master, code, self.d, self.m, self.n, self.k)

    def spec(self, master: int, trial: int) -> CultureSpec:
        return CultureSpec(self.culture, self.m, self.n, self.k, derive_seed(self.seed(master), trial), self.d)


def welfare_rule_ids(base: str) -> list[str]:
    return [base, f"{base}+primaries:joint", f"{base}+primaries:disjoint", f"iw-{base}", f"sw-{base}"]


def spoiler_columns(manifest: ExperimentManifest) -> list[tuple[str, str]]:
    return [(f, mode.value) for f in manifest.spoiler_rules for mode in PrimaryMode]


def welfare_columns(manifest: ExperimentManifest) -> list[str]:
    return [rid for f in manifest.welfare_rules for rid in welfare_rule_ids(f)]


def evaluate_trial(election: Election, manifest: ExperimentManifest) -> dict:
    """Spoiler flags and winners for one sampled election."""
    from alliancevote.rules import get_rule

    spoilers = [
        int(has_nonoptimal_primary_winner(election, PrimaryMode(mode), get_rule(f), manifest.counterfactual))
        for f, mode in spoiler_columns(manifest)
    ]
    winners = [get_rule(rid).winner(election) for rid in welfare_columns(manifest)]
    welfare = [social_welfare(election, w) for w in winners]
    return {"spoilers": spoilers, "winners": winners, "welfare": welfare}


def _run_cell_chunk(args):
    manifest_dict, cell, start, stop = args
    manifest = ExperimentManifest.from_dict(manifest_dict)
    rows = []
    for t in range(start, stop):
        spec = cell.spec(manifest.seed, t)
        rows.append((t, spec.seed, evaluate_trial(sample(spec), manifest)))
    return rows


def _aggregate(cell: Cell, manifest: ExperimentManifest, rows) -> dict:
    rows = sorted(rows, key=lambda r: r[0])
    spoiler = np.array([r[2]["spoilers"] for r in rows], dtype=np.int64).reshape(len(rows), -1)
    welfare = np.array([r[2]["welfare"] for r in rows], dtype=np.int64).reshape(len(rows), -1)
    out = {
        "cell": asdict(cell),
        "trials": len(rows),
        "seed": cell.seed(manifest.seed),
        "spoiler_hits": spoiler.sum(axis=0).tolist(),
        "welfare_sum": welfare.sum(axis=0).tolist(),
        "welfare_sumsq": (welfare * welfare).sum(axis=0).tolist(),
    }
    if manifest.per_trial:
        out["per_trial"] = [
            {"trial": t, "seed": s, "winners": r["winners"], "welfare": r["welfare"], "spoilers": r["spoilers"]}
            for t, s, r in rows
        ]
    return out


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _rate_stderr(hits: int, trials: int) -> float:
    p = hits / trials
    return math.sqrt(p * (1 - p) / trials)


def _mean_stderr(total: int, sumsq: int, trials: int) -> tuple[float, float]:
    mean = total / trials
    if trials < 2:
        return mean, 0.0
    # integer arithmetic keeps the variance exact before the final division
    var = (trials * sumsq - total * total) / (trials * (trials - 1))
    return mean, math.sqrt(max(var, 0.0) / trials)


@dataclass
class ExperimentResult:
    manifest: ExperimentManifest
    cells: list[dict]

    def spoiler_rows(self) -> list[dict]:
        rows = []
        columns = spoiler_columns(self.manifest)
        for cell in self.cells:
            c = cell["cell"]
            for (f, mode), hits in zip(columns, cell["spoiler_hits"]):
                rows.append(
                    {
                        "schema_version": SCHEMA_VERSION,
                        "culture": c["culture"],
                        "d": c["d"] if c["culture"] == "euclid" else "",
                        "m": c["m"],
                        "n": c["n"],
                        "k": c["k"],
                        "rule": f,
                        "mode": mode,
                        "rate": f"{hits / cell['trials']:.6f}",
                        "stderr": f"{_rate_stderr(hits, cell['trials']):.6f}",
                        "trials": cell["trials"],
                        "seed": cell["seed"],
                    }
                )
        return rows

    def welfare_rows(self) -> list[dict]:
        rows = []
        for cell in self.cells:
            c = cell["cell"]
            for rid, total, sq in zip(welfare_columns(self.manifest), cell["welfare_sum"], cell["welfare_sumsq"]):
                mean, se = _mean_stderr(total, sq, cell["trials"])
                rule, _, mode = rid.partition("+primaries:")
                rows.append(
                    {
                        "schema_version": SCHEMA_VERSION,
                        "culture": c["culture"],
                        "d": c["d"] if c["culture"] == "euclid" else "",
                        "m": c["m"],
                        "n": c["n"],
                        "k": c["k"],
                        "rule": rule,
                        "mode": mode or "none",
                        "mean_welfare": f"{mean:.4f}",
                        "stderr": f"{se:.4f}",
                        "trials": cell["trials"],
                        "seed": cell["seed"],
                    }
                )
        return rows

    def rate(self, cell_name: str, m: int, k: int, rule: str, mode: str) -> float:
        col = spoiler_columns(self.manifest).index((rule, mode))
        cell = self._cell(cell_name, m, k)
        return cell["spoiler_hits"][col] / cell["trials"]

    def mean_welfare(self, cell_name: str, m: int, k: int, rule_id: str) -> float:
        col = welfare_columns(self.manifest).index(rule_id)
        cell = self._cell(cell_name, m, k)
        return cell["welfare_sum"][col] / cell["trials"]

    def _cell(self, name: str, m: int, k: int) -> dict:
        for cell in self.cells:
            c = cell["cell"]
            if c["name"] == name and c["m"] == m and c["k"] == k:
                return cell
        raise KeyError((name, m, k))

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "manifest": self.manifest.to_dict(),
            "spoilers": self.spoiler_rows(),
            "welfare": self.welfare_rows(),
            "welfare_columns": welfare_columns(self.manifest),
            "cells": self.cells,
        }


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def run_experiment(manifest: ExperimentManifest, out_dir=None, log=sys.stderr, resume: bool = True) -> ExperimentResult:
    """Run every cell of ``manifest``; write CSV/JSON and per-cell checkpoints under ``out_dir``.

    With ``resume`` a finished cell whose checkpoint matches the manifest
    fingerprint is loaded instead of recomputed.
    """
    out = Path(out_dir) if out_dir is not None else None
    ckpt_dir = None
    if out is not None:
        ckpt_dir = out / "checkpoints"
        ckpt_dir.mkdir(parents=True, exist_ok=True)
    fp = manifest.fingerprint()
    mdict = manifest.to_dict()
    cells = manifest.cells()
    done: dict[str, dict] = {}
    pending = []
    for cell in cells:
        path = ckpt_dir / f"{cell.key}.json" if ckpt_dir else None
        if resume and path is not None and path.exists():
            saved = json.loads(path.read_text(encoding="utf-8"))
            if saved.get("fingerprint") == fp:
                done[cell.key] = saved["result"]
                _log(log, f"cell {cell.key}: loaded from checkpoint")
                continue
        pending.append(cell)

    jobs = [
        (mdict, cell, a, min(a + manifest.chunk, manifest.trials))
        for cell in pending
        for a in range(0, manifest.trials, manifest.chunk)
    ]
    by_cell: dict[str, list] = {cell.key: [] for cell in pending}
    remaining = {cell.key: math.ceil(manifest.trials / manifest.chunk) for cell in pending}
    pool = ProcessPoolExecutor(max_workers=manifest.workers) if manifest.workers > 1 and len(jobs) > 1 else None
    try:
        outcomes = pool.map(_run_cell_chunk, jobs) if pool else map(_run_cell_chunk, jobs)
        for job, rows in zip(jobs, outcomes):
            cell = job[1]
            by_cell[cell.key].extend(rows)
            remaining[cell.key] -= 1
            if remaining[cell.key] == 0:
                result = _aggregate(cell, manifest, by_cell.pop(cell.key))
                done[cell.key] = result
                if ckpt_dir is not None:
                    blob = json.dumps({"fingerprint": fp, "result": result}, sort_keys=True)
                    _atomic_write(ckpt_dir / f"{cell.key}.json", blob)
                _log(log, f"cell {cell.key}: {manifest.trials} trials done")
    finally:
        if pool is not None:
            pool.shutdown()

    result = ExperimentResult(manifest, [done[cell.key] for cell in cells])
    if out is not None:
        _atomic_write(out / "spoilers.csv", _csv_text(result.spoiler_rows()))
        _atomic_write(out / "welfare.csv", _csv_text(result.welfare_rows()))
        _atomic_write(out / "results.json", json.dumps(result.to_json(), indent=2, sort_keys=True) + "\n")
    return result


def _log(stream, message: str) -> None:
    if stream is not None:
        print(message, file=stream, flush=True)
