"""Append-only JSON-lines event store.

One line per record: {"seq": n, "kind": k, "body": {...}}.  Sequence
numbers are gap-free and strictly increasing; all writes go through one
lock.  Replaying the file rebuilds identical state, which is the whole
persistence story: no database, desk-scale studies only.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

KINDS = ("lineup_public", "lineup_private", "evaluation", "session")


class EventStore:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: list[dict] = []
        self._seq = 0
        if self.path.exists():
            self._load()
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.touch()

    def _load(self) -> None:
        with self.path.open() as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                if rec.get("seq") != self._seq + 1:
                    raise ValueError(
                        f"{self.path}:{line_no}: sequence gap "
                        f"(expected {self._seq + 1}, found {rec.get('seq')})"
                    )
                if rec.get("kind") not in KINDS:
                    raise ValueError(f"{self.path}:{line_no}: unknown record kind")
                self._records.append(rec)
                self._seq = rec["seq"]

    def append(self, kind: str, body: dict) -> dict:
        if kind not in KINDS:
            raise ValueError(f"unknown record kind {kind!r}")
        with self._lock:
            self._seq += 1
            rec = {"seq": self._seq, "kind": kind, "body": body}
            with self.path.open("a") as fh:
                fh.write(json.dumps(rec) + "\n")
                fh.flush()
            self._records.append(rec)
            return rec

    def records(self, kind: str | None = None) -> list[dict]:
        """Snapshot of the log, optionally filtered by kind."""
        with self._lock:
            snapshot = list(self._records)
        if kind is None:
            return snapshot
        return [r for r in snapshot if r["kind"] == kind]

    @property
    def seq(self) -> int:
        return self._seq
