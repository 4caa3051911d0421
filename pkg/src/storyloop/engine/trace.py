"""Append-only session trace: line-delimited JSON records.

Each line is a schema-versioned record with a monotonically increasing
sequence number.  Records are serialized with sorted keys and compact
separators so a scripted episode replays to byte-identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Iterable

TRACE_SCHEMA_VERSION = 1

KIND_SESSION_START = "session_start"
KIND_CALL = "call"
KIND_BLUEPRINT = "blueprint"
KIND_MESSAGE = "message"
KIND_TURN_BEGIN = "turn_begin"
KIND_TURN_COMMIT = "turn_commit"
KIND_GUIDANCE = "guidance"
KIND_ARTIFACT = "artifact"
KIND_VIOLATION = "violation"
KIND_FEEDBACK = "feedback"
KIND_SESSION_END = "session_end"


def encode_record(record: dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class TraceWriter:
    """One append-only JSONL file per session."""

    def __init__(self, path: str | Path, *, fresh: bool = True) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if fresh and self.path.exists():
            self.path.unlink()
        self._seq = 0
        if not fresh and self.path.exists():
            with self.path.open("r", encoding="utf-8") as fh:
                self._seq = sum(1 for _ in fh)

    def append(self, kind: str, **payload: Any) -> dict[str, Any]:
        self._seq += 1
        record = {"v": TRACE_SCHEMA_VERSION, "seq": self._seq, "kind": kind, **payload}
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(encode_record(record) + "\n")
        return record

    @property
    def seq(self) -> int:
        return self._seq


def read_trace(path: str | Path) -> list[dict[str, Any]]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def trace_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def incomplete_turns(records: Iterable[dict[str, Any]]) -> list[int]:
    """Turn numbers that began but never committed (crash markers)."""
    begun: dict[int, bool] = {}
    for rec in records:
        if rec["kind"] == KIND_TURN_BEGIN:
            begun[rec["turn"]] = False
        elif rec["kind"] == KIND_TURN_COMMIT:
            begun[rec["turn"]] = True
    return [turn for turn, committed in begun.items() if not committed]
