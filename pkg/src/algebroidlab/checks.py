"""Tiny pass/fail report type shared by the identity checkers."""

from __future__ import annotations


class CheckRow:
    __slots__ = ("name", "passed", "witness")

    def __init__(self, name: str, passed: bool, witness: str = ""):
        self.name = name
        self.passed = bool(passed)
        self.witness = witness

    def __repr__(self):
        state = "ok" if self.passed else "FAIL"
        tail = (" [%s]" % self.witness) if self.witness and not self.passed else ""
        return "%s: %s%s" % (self.name, state, tail)


class CheckReport:
    """An ordered list of named boolean outcomes with optional witnesses."""

    def __init__(self):
        self.rows: list[CheckRow] = []

    def add(self, name: str, passed: bool, witness: str = "") -> None:
        self.rows.append(CheckRow(name, passed, witness))

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[CheckRow]:
        return [r for r in self.rows if not r.passed]

    def merge(self, other: "CheckReport", prefix: str = "") -> "CheckReport":
        if prefix:
            self.rows.extend(CheckRow(prefix + r.name, r.passed, r.witness)
                             for r in other.rows)
        else:
            self.rows.extend(other.rows)
        return self

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "rows": [
                {"name": r.name, "passed": r.passed, "witness": r.witness}
                for r in self.rows
            ],
        }

    def __repr__(self):
        return "\n".join(repr(r) for r in self.rows) or "(empty report)"
