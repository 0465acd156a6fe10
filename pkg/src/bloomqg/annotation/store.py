"""Append-only judgment persistence.

Every accepted judgment is one JSON line in the log; replaying the log
rebuilds the store, with repeat submissions for the same (task, annotator)
resolving last-write-wins. Appends hold a lock so concurrent annotators
cannot interleave partial lines.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from pathlib import Path

from .tasks import AnnotationTask, Judgment

log = logging.getLogger(__name__)


class JudgmentStore:
    def __init__(self, tasks: list[AnnotationTask], log_path: Path | str | None = None):
        self.tasks: dict[str, AnnotationTask] = {t.task_id: t for t in tasks}
        self.order: list[str] = [t.task_id for t in tasks]
        self.judgments: dict[tuple[str, str], Judgment] = {}
        self.log_path = Path(log_path) if log_path else None
        self._lock = threading.Lock()
        if self.log_path and self.log_path.exists():
            self._replay()

    def _replay(self) -> None:
        with open(self.log_path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                judgment = Judgment.from_json(json.loads(line))
                self.judgments[(judgment.task_id, judgment.annotator_id)] = judgment
        log.info("replayed %d judgments from %s", len(self.judgments), self.log_path)

    def add_judgment(self, task_id: str, annotator_id: str, verdict: dict) -> tuple[Judgment, bool]:
        """Append a judgment; returns it plus whether it overwrote one."""
        judgment = Judgment(task_id, annotator_id, verdict, time.time())
        key = (task_id, annotator_id)
        with self._lock:
            overwritten = key in self.judgments
            self.judgments[key] = judgment
            if self.log_path:
                self.log_path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.log_path, "a", encoding="utf-8") as handle:
                    handle.write(json.dumps(judgment.to_json(), ensure_ascii=False) + "\n")
        if overwritten:
            log.warning("judgment overwritten for task %s by %s", task_id, annotator_id)
        return judgment, overwritten

    def next_task(self, annotator_id: str, kind=None) -> AnnotationTask | None:
        """First task, in bundle order, the annotator has not judged yet."""
        for task_id in self.order:
            task = self.tasks[task_id]
            if kind is not None and task.kind is not kind:
                continue
            if (task_id, annotator_id) not in self.judgments:
                return task
        return None

    def judgments_list(self) -> list[Judgment]:
        return list(self.judgments.values())

    def progress(self) -> dict:
        per_annotator: dict[str, int] = {}
        per_kind: dict[str, int] = {}
        for (task_id, annotator_id), _ in self.judgments.items():
            per_annotator[annotator_id] = per_annotator.get(annotator_id, 0) + 1
            kind = self.tasks[task_id].kind.value if task_id in self.tasks else "unknown"
            per_kind[kind] = per_kind.get(kind, 0) + 1
        return {
            "n_tasks": len(self.tasks),
            "n_judgments": len(self.judgments),
            "per_annotator": per_annotator,
            "per_kind": per_kind,
        }
