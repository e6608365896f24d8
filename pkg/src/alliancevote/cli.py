"""Command-line interface.

Exit codes: 0 success / axiom holds, 1 invalid input, 2 usage error,
3 counterexample found.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from alliancevote import __version__
from alliancevote.axioms import CHECKERS, AxiomError, UnknownAxiomError, fuzz, get_checker
from alliancevote.cultures import CultureFamily, sample
from alliancevote.election import ElectionError
from alliancevote.experiments import ExperimentManifest, run_experiment
from alliancevote.io import election_summary, read_election, serialize_election, witness_files
from alliancevote.rules import UnknownRuleError, get_rule

SCHEMA_VERSION = 1

EXIT_OK, EXIT_INPUT, EXIT_USAGE, EXIT_COUNTEREXAMPLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(payload: dict, stream=None) -> None:
    stream = stream or sys.stdout
    json.dump({"schema_version": SCHEMA_VERSION, **payload}, stream, indent=2, sort_keys=True, ensure_ascii=False)
    stream.write("\n")


def _rule(rule_id: str):
    try:
        return get_rule(rule_id)
    except UnknownRuleError as exc:
        raise UsageError(exc.args[0]) from None


def _checker(axiom: str):
    try:
        return get_checker(axiom)
    except UnknownAxiomError as exc:
        raise UsageError(exc.args[0]) from None


def _culture(text: str) -> CultureFamily:
    try:
        return CultureFamily.parse(text)
    except ValueError as exc:
        raise UsageError(f"bad culture {text!r}: {exc}") from None


def cmd_tally(args) -> int:
    rule = _rule(args.rule)
    election = read_election(args.file)
    result = rule(election)
    _emit({"rule": rule.id, "election": election_summary(election), "result": result.to_json(election)})
    return EXIT_OK


def _write_witness(report, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for name, text in witness_files(report).items():
        (directory / name).write_text(text, encoding="utf-8")


def cmd_check(args) -> int:
    rule = _rule(args.rule)
    checker = _checker(args.axiom)
    election = read_election(args.file)
    report = checker(election, rule)
    payload = report.to_json()
    if report.witness is not None:
        w = report.witness
        payload["witness"]["winner_before_label"] = election.labels[w.winner_before]
        if w.winner_after is not None:
            payload["witness"]["winner_after_label"] = election.labels[w.winner_after]
        if args.out:
            _write_witness(report, Path(args.out))
    _emit(payload)
    return EXIT_OK if report.holds else EXIT_COUNTEREXAMPLE


def cmd_fuzz(args) -> int:
    rule = _rule(args.rule)
    _checker(args.axiom)
    family = _culture(args.culture)
    result = fuzz(rule, args.axiom, family, args.trials, args.seed, first_k=args.first_k, workers=args.workers)
    if args.out:
        for report in result:
            _write_witness(report, Path(args.out) / f"trial-{report.trial:06d}")
    _emit({"summary": result.summary(), "counterexamples": [r.to_json() for r in result]})
    return EXIT_COUNTEREXAMPLE if len(result) else EXIT_OK


def cmd_sample(args) -> int:
    family = _culture(args.culture)
    spec = family.spec_for(args.seed)
    text = serialize_election(sample(spec))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _emit({"culture": spec.to_json(), "out": str(args.out)}, sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        manifest = ExperimentManifest.load(args.manifest)
    except (ValueError, TypeError) as exc:
        raise ElectionError(f"invalid manifest: {exc}") from None
    if args.workers is not None:
        manifest.workers = args.workers
    run_experiment(manifest, args.out, resume=not args.no_resume)
    _emit({"manifest": manifest.to_dict(), "out": str(args.out), "files": ["spoilers.csv", "welfare.csv", "results.json"]})
    return EXIT_OK


def cmd_list(args) -> int:
    from alliancevote.rules import ALLIANCE_IDS, LAMINAR_IDS, STANDARD_IDS

    _emit(
        {
            "rules": list(STANDARD_IDS + ALLIANCE_IDS + LAMINAR_IDS),
            "rule_patterns": ["scoring:<l1>,<l2>,...", "iw:<standard rule>", "<standard rule>+primaries:<joint|disjoint>"],
            "axioms": list(CHECKERS),
        }
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alliancevote", description="Alliance-aware voting rules, axiom checks and experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tally", help="elect a winner and print scores and trace")
    p.add_argument("--rule", required=True)
    p.add_argument("file")
    p.set_defaults(func=cmd_tally)

    p = sub.add_parser("check", help="check one axiom on one election")
    p.add_argument("--axiom", required=True)
    p.add_argument("--rule", required=True)
    p.add_argument("--out", help="directory for witness files")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fuzz", help="search sampled elections for axiom violations")
    p.add_argument("--axiom", required=True)
    p.add_argument("--rule", required=True)
    p.add_argument("--culture", required=True, help="e.g. ic:m=3..6,n=3..15,k=2..3")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--first-k", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="directory for counterexample files")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("sample", help="draw one election from a culture")
    p.add_argument("--culture", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("experiment", help="run a primaries and welfare experiment grid")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-resume", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("list", help="list rule and axiom identifiers")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) is not None and getattr(args, "trials", 1) < 1:
        parser.error("--trials must be at least 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ElectionError, AxiomError, OSError, UnicodeDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
