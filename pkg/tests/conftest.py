"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

CRITERIA = {
    1: "golden alliance-aware scores and winners on rules-differ",
    2: "intro election narrative",
    3: "extension property on no-ally elections",
    4: "axiom table over fuzzed IC elections",
    5: "extensions of Copeland, Borda and STV refuted",
    6: "non-optimal primary winner rates",
    7: "welfare equalities and directions",
    8: "oracle equivalences",
    9: "byte-identical seeded output",
}


class AcceptanceLog:
    def __init__(self):
        self.checks = {k: [] for k in CRITERIA}

    def record(self, criterion: int, name: str, ok: bool, detail: str = "") -> bool:
        self.checks[criterion].append((name, bool(ok), detail))
        return bool(ok)

    def lines(self):
        for k, title in CRITERIA.items():
            checks = self.checks[k]
            if not checks:
                continue
            ok = all(c[1] for c in checks)
            yield f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {title} ({sum(c[1] for c in checks)}/{len(checks)} checks)"
            for name, passed, detail in checks:
                if not passed or len(checks) <= 12:
                    yield f"    {'ok ' if passed else 'BAD'} {name}{': ' + detail if detail else ''}"


LOG = AcceptanceLog()


@pytest.fixture(scope="session")
def acceptance():
    return LOG


def pytest_terminal_summary(terminalreporter):
    lines = list(LOG.lines())
    if lines:
        terminalreporter.section("acceptance")
        for line in lines:
            terminalreporter.write_line(line)
