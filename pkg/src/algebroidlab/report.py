"""Run reports: structured text for humans, canonical JSON for machines.

The machine rendering is byte-stable for a fixed (manifest, seed, tool
version): keys are sorted, separators fixed, and the timing field is
always null there (wall-clock numbers only appear in the text rendering).
"""

from __future__ import annotations

import json

from .checks import CheckReport


class Report:
    def __init__(self, manifest_hash: str, seed: int, version: str):
        self.manifest_hash = manifest_hash
        self.seed = seed
        self.version = version
        self.tasks: list[dict] = []

    def add_task(self, name: str, report: CheckReport | None = None,
                 payload: dict | None = None, elapsed: float | None = None,
                 error: str | None = None) -> None:
        """File one task's outcome.  ``error`` marks a hard failure that
        produced no check rows (e.g. an unsolvable comparison)."""
        if error is not None:
            status, checks, failures = "fail", 0, [{"name": "error", "witness": error}]
        elif report is None:
            status, checks, failures = "pass", 0, []
        else:
            failures = [{"name": row.name, "witness": row.witness}
                        for row in report.failures()]
            status = "pass" if report.ok else "fail"
            checks = len(report.rows)
        self.tasks.append({
            "name": name,
            "status": status,
            "checks": checks,
            "failures": failures,
            "payload": payload,
            "elapsed": elapsed,
        })

    def add_cached(self, entry: dict) -> None:
        """Replay a task entry recovered from the result cache."""
        row = dict(entry)
        row["elapsed"] = None
        self.tasks.append(row)

    def task_entry(self, index: int = -1) -> dict:
        """The cacheable slice of a filed task (everything but wall clock)."""
        return {k: v for k, v in self.tasks[index].items() if k != "elapsed"}

    @property
    def ok(self) -> bool:
        return all(t["status"] == "pass" for t in self.tasks)

    def as_dict(self) -> dict:
        return {
            "format": 1,
            "tool": "algebroidlab",
            "version": self.version,
            "manifest_sha256": self.manifest_hash,
            "seed": self.seed,
            "status": "pass" if self.ok else "fail",
            "tasks": [
                {
                    "name": t["name"],
                    "status": t["status"],
                    "checks": t["checks"],
                    "failures": t["failures"],
                    "payload": t["payload"],
                    "timing": None,
                }
                for t in self.tasks
            ],
        }

    def to_machine(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":")) + "\n"

    def to_text(self) -> str:
        lines = ["algebroidlab %s  manifest %s  seed %d"
                 % (self.version, self.manifest_hash[:12], self.seed)]
        for t in self.tasks:
            mark = "ok  " if t["status"] == "pass" else "FAIL"
            timing = "" if t["elapsed"] is None else "  (%.2fs)" % t["elapsed"]
            lines.append("  [%s] %-16s %d checks%s" % (mark, t["name"], t["checks"], timing))
            for f in t["failures"]:
                lines.append("         %s: %s" % (f["name"], f["witness"]))
        lines.append("result: %s" % ("pass" if self.ok else "fail"))
        return "\n".join(lines) + "\n"
