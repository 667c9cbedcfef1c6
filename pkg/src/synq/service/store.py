"""Append-only annotation log with crash recovery.

One record per line (AnnotationRecord TSV order). Appends are durably
flushed (write, flush, fsync) before they are acknowledged, and the
in-memory view keyed by (sentence_id, annotator_id) is updated only after
the write lands; the latest record per key wins. Reloading a log truncated
at any record boundary yields exactly the replay of that prefix; a torn
trailing line without a newline is ignored.
"""

from __future__ import annotations

import os
import threading

from ..errors import StorageFailure
from ..ontology_eval import AnnotationRecord


class AnnotationStore:
    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._view: dict[tuple[str, str], AnnotationRecord] = {}
        self._log: list[AnnotationRecord] = []
        self._replay()

    def _replay(self) -> None:
        if not os.path.exists(self.path):
            return
        with open(self.path, "rb") as f:
            data = f.read()
        text = data.decode("utf-8")
        lines = text.split("\n")
        if lines and lines[-1] != "":
            lines = lines[:-1]  # torn trailing write: drop it
        else:
            lines = lines[:-1] if lines else []
        for line_no, line in enumerate(lines, start=1):
            if not line:
                continue
            try:
                record = AnnotationRecord.from_line(line)
            except Exception as e:
                raise StorageFailure(
                    f"{self.path}: corrupt record at line {line_no}: {e}"
                ) from e
            self._apply(record)

    def _apply(self, record: AnnotationRecord) -> None:
        self._log.append(record)
        self._view[(record.sentence_id, record.annotator_id)] = record

    def append(self, record: AnnotationRecord) -> None:
        """Durably append one record; the view is updated after the fsync."""
        line = record.to_line() + "\n"
        with self._lock:
            try:
                fd = os.open(self.path, os.O_WRONLY | os.O_CREAT | os.O_APPEND,
                             0o644)
                try:
                    os.write(fd, line.encode("utf-8"))
                    os.fsync(fd)
                finally:
                    os.close(fd)
            except OSError as e:
                raise StorageFailure(f"append to {self.path} failed: {e}") \
                    from e
            self._apply(record)

    def records(self) -> list[AnnotationRecord]:
        """Latest record per (sentence, annotator), sorted by key."""
        with self._lock:
            return [self._view[k] for k in sorted(self._view)]

    def log_records(self) -> list[AnnotationRecord]:
        """The full append order, including superseded records."""
        with self._lock:
            return list(self._log)

    def __len__(self) -> int:
        return len(self._view)
