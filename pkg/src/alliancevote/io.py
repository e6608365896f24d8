"""Line-oriented election files.

Grammar (UTF-8, one item per line; blank lines and ``# ...`` comments ignored;
headers have no space after the ``#``)::

    #candidates: 3
    #laminar: true                      optional, allows nested alliances
    candidate: 0 Adam
    alliance: PartyA 0 1
    46: 0 ≻ 1 ≻ 2                       '>' is accepted in place of '≻'

Without any ``alliance:`` line every candidate runs alone.
"""

from __future__ import annotations

import re

import numpy as np

from alliancevote.election import AllianceStructure, Election, ElectionError

FORMAT_VERSION = 1
SEPARATOR = "≻"


class ParseError(ElectionError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


_HEADER = re.compile(r"#([A-Za-z_]+)\s*:\s*(.*)$")
_BALLOT = re.compile(r"(\d+)\s*:(.*)$")


def _col(raw: str, token: str, start: int = 0) -> int:
    return raw.find(token, start) + 1 if token else 1


def parse_election(text: str) -> Election:
    m = None
    laminar = False
    labels: dict[int, str] = {}
    alliances: list[tuple[str, list[int], int]] = []
    rankings: list[list[int]] = []
    counts: list[int] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        header = _HEADER.match(line)
        if header:
            key, value = header.group(1).lower(), header.group(2).strip()
            if key == "candidates":
                if not value.isdigit() or int(value) < 1:
                    raise ParseError(f"candidate count must be a positive integer, got {value!r}", lineno, _col(raw, value))
                m = int(value)
            elif key == "laminar":
                if value.lower() not in ("true", "false"):
                    raise ParseError("laminar must be true or false", lineno, _col(raw, value))
                laminar = value.lower() == "true"
            elif key == "format":
                pass
            else:
                raise ParseError(f"unknown header {key!r}", lineno)
            continue
        if line.startswith("#"):
            continue
        if m is None:
            raise ParseError("missing '#candidates: m' header before content", lineno)
        if line.startswith("candidate:"):
            parts = line[len("candidate:") :].split(None, 1)
            if len(parts) != 2 or not parts[0].isdigit():
                raise ParseError("expected 'candidate: <index> <label>'", lineno)
            idx = int(parts[0])
            if idx >= m:
                raise ParseError(f"candidate index {idx} out of range 0..{m - 1}", lineno, _col(raw, parts[0]))
            if idx in labels:
                raise ParseError(f"candidate {idx} declared twice", lineno, _col(raw, parts[0]))
            labels[idx] = parts[1].strip()
            continue
        if line.startswith("alliance:"):
            parts = line[len("alliance:") :].split()
            if len(parts) < 2:
                raise ParseError("expected 'alliance: <name> <index> ...'", lineno)
            members = []
            search = raw.find(parts[0], raw.find(":")) + len(parts[0])
            for tok in parts[1:]:
                col = _col(raw, tok, search)
                search = col - 1 + len(tok)
                if not tok.isdigit():
                    raise ParseError(f"alliance member {tok!r} is not an index", lineno, col)
                c = int(tok)
                if c >= m:
                    raise ParseError(f"candidate index {c} out of range 0..{m - 1}", lineno, col)
                if c in members:
                    raise ParseError(f"candidate {c} listed twice in alliance", lineno, col)
                members.append(c)
            alliances.append((parts[0], members, lineno))
            continue
        ballot = _BALLOT.match(line)
        if not ballot:
            raise ParseError(f"unrecognised line {line!r}", lineno)
        mult = int(ballot.group(1))
        if mult < 1:
            raise ParseError("multiplicity must be positive", lineno, _col(raw, ballot.group(1)))
        body = ballot.group(2).replace(">", SEPARATOR)
        tokens = [t.strip() for t in body.split(SEPARATOR)]
        order: list[int] = []
        search = raw.find(":") + 1
        for tok in tokens:
            col = _col(raw, tok, search) if tok else search + 1
            if tok:
                search = raw.find(tok, search) + len(tok)
            if not tok.isdigit():
                raise ParseError(f"ranking entry {tok!r} is not a candidate index", lineno, col)
            c = int(tok)
            if c >= m:
                raise ParseError(f"candidate index {c} out of range 0..{m - 1}", lineno, col)
            if c in order:
                raise ParseError(f"duplicate candidate {c} in ranking", lineno, col)
            order.append(c)
        if len(order) != m:
            missing = sorted(set(range(m)) - set(order))
            raise ParseError(f"ranking is incomplete, missing {missing}", lineno)
        rankings.append(order)
        counts.append(mult)

    if m is None:
        raise ParseError("missing '#candidates: m' header", 1)
    if not rankings:
        raise ParseError("no ballots given", max(1, len(text.splitlines())))
    missing = [c for c in range(m) if c not in labels]
    if labels and missing:
        raise ParseError(f"candidates {missing} have no 'candidate:' line", 1)
    names = [labels.get(c, f"c{c}") for c in range(m)]
    if len(set(names)) != m:
        raise ParseError("candidate labels must be distinct", 1)

    if alliances:
        groups = [members for _, members, _ in alliances]
        anames = [name for name, _, _ in alliances]
        make = AllianceStructure.laminar_family if laminar else AllianceStructure.partition
        structure = make(groups, anames)
        try:
            structure.validate(m)
        except ElectionError as exc:
            raise ParseError(str(exc), alliances[0][2]) from None
    else:
        structure = AllianceStructure.no_ally(m)
        if laminar:
            structure = structure.as_laminar()

    return Election.from_rankings(rankings, counts, structure, names)


def serialize_election(election: Election) -> str:
    """Canonical text: alliances in canonical order, ballot rows in stored order."""
    lines = [f"#format: alliancevote-election {FORMAT_VERSION}", f"#candidates: {election.m}"]
    if election.laminar:
        lines.append("#laminar: true")
    lines += [f"candidate: {c} {label}" for c, label in enumerate(election.labels)]
    structure = election.alliances
    names = structure.names or tuple(f"A{i}" for i in range(len(structure)))
    for name, s in zip(names, structure.sets):
        safe = name.replace(" ", "_") or "A"
        lines.append(f"alliance: {safe} " + " ".join(str(c) for c in sorted(s)))
    sep = f" {SEPARATOR} "
    for row, count in zip(election.ballots.tolist(), election.counts.tolist()):
        lines.append(f"{count}: " + sep.join(str(c) for c in row))
    return "\n".join(lines) + "\n"


def read_election(path) -> Election:
    with open(path, encoding="utf-8") as fh:
        return parse_election(fh.read())


def write_election(election: Election, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_election(election))


def witness_files(report) -> dict[str, str]:
    """Election texts plus a JSON sidecar describing the perturbation."""
    import json

    w = report.witness
    if w is None:
        raise ValueError("report has no witness")
    files = {"original.elect": serialize_election(w.original)}
    if w.perturbed is not None:
        files["perturbed.elect"] = serialize_election(w.perturbed)
    sidecar = {"schema_version": FORMAT_VERSION, **report.to_json(with_elections=False)}
    files["witness.json"] = json.dumps(sidecar, indent=2, sort_keys=True) + "\n"
    return files


def election_summary(election: Election) -> dict:
    return {
        "m": election.m,
        "n": election.n,
        "labels": list(election.labels),
        "alliances": [sorted(s) for s in election.alliances.sets],
        "laminar": election.laminar,
        "distinct_rankings": int(len(np.unique(election.ballots, axis=0))),
    }
