"""Annotation task construction for the three evaluation aspects.

Pairwise tasks compare a system's question against the designated baseline
under one quality aspect with sides shuffled per task; skill tasks ask the
annotator to pick evidence sentences and a comprehension skill; knowledge
tasks ask two yes/no questions about the elicited knowledge text. System
identities stay in a server-side ``hidden`` section that never reaches a
served payload.
"""

from __future__ import annotations

import datetime as _dt
import json
import logging
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from ..errors import AlignmentError
from ..skills import Skill

log = logging.getLogger(__name__)

PAIRWISE_ASPECTS = ("grammaticality", "answerability", "relevance")


class TaskKind(Enum):
    PAIRWISE = "pairwise"
    SKILL = "skill"
    KNOWLEDGE = "knowledge"

    @classmethod
    def from_string(cls, name: str) -> "TaskKind":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown task kind: {name!r}") from None


@dataclass(frozen=True)
class AnnotationTask:
    task_id: str
    kind: TaskKind
    context: str
    payload: dict
    hidden: dict = field(default_factory=dict)

    def public_json(self) -> dict:
        """The served representation; hidden fields are stripped."""
        return {
            "task_id": self.task_id,
            "kind": self.kind.value,
            "context": self.context,
            "payload": self.payload,
        }

    def to_json(self) -> dict:
        return {**self.public_json(), "hidden": self.hidden}

    @classmethod
    def from_json(cls, record: dict) -> "AnnotationTask":
        return cls(
            record["task_id"],
            TaskKind.from_string(record["kind"]),
            record["context"],
            record["payload"],
            record.get("hidden", {}),
        )


@dataclass(frozen=True)
class Judgment:
    task_id: str
    annotator_id: str
    verdict: dict
    timestamp: float

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "annotator_id": self.annotator_id,
            "verdict": self.verdict,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, record: dict) -> "Judgment":
        return cls(record["task_id"], record["annotator_id"], record["verdict"], record["timestamp"])


def split_sentences(text: str) -> list[str]:
    parts = re.split(r"(?<=[.!?])\s+", text.strip())
    return [p for p in parts if p]


def _align(questions_by_system: dict[str, list[dict]]) -> dict[tuple, dict[str, dict]]:
    """Index rank-0 rows of every system by the shared (context, answer, skill) key."""
    indexed: dict[str, dict[tuple, dict]] = {}
    for system, rows in questions_by_system.items():
        table: dict[tuple, dict] = {}
        for row in rows:
            key = (row["context"], row["answer"], row["skill"])
            current = table.get(key)
            if current is None or row.get("beam_rank", 0) < current.get("beam_rank", 0):
                table[key] = row
        indexed[system] = table
    shared = None
    for system, table in indexed.items():
        shared = set(table) if shared is None else shared & set(table)
    aligned = {}
    for key in shared or ():
        aligned[key] = {system: indexed[system][key] for system in indexed}
    return aligned


def create_annotation_bundle(
    questions_by_system: dict[str, list[dict]],
    baseline: str,
    n_samples: int,
    kinds: set[TaskKind] | set[str],
    seed: int,
    aspects: tuple[str, ...] = PAIRWISE_ASPECTS,
) -> tuple[list[AnnotationTask], dict]:
    """Build tasks plus a manifest recording the de-anonymization seed.

    Pairwise kinds need a baseline plus at least one comparison system with
    aligned inputs; ``n_samples`` tasks are drawn per comparison pair and
    aspect (per system for the other kinds). Misalignment raises with the
    offending keys listed.
    """
    kinds = {TaskKind.from_string(k) if isinstance(k, str) else k for k in kinds}
    if baseline not in questions_by_system:
        raise AlignmentError(f"baseline system {baseline!r} has no question file")
    aligned = _align(questions_by_system)
    if not aligned:
        missing = {
            system: len(rows) for system, rows in questions_by_system.items()
        }
        raise AlignmentError(f"no aligned (context, answer, skill) keys across systems: {missing}")
    rng = random.Random(seed)
    ordered_keys = sorted(aligned)
    tasks: list[AnnotationTask] = []
    serial = 0

    def next_id() -> str:
        nonlocal serial
        serial += 1
        return f"task-{serial:06d}"

    def draw(count: int) -> list[tuple]:
        if count >= len(ordered_keys):
            return list(ordered_keys)
        return rng.sample(ordered_keys, count)

    if TaskKind.PAIRWISE in kinds:
        comparisons = [s for s in questions_by_system if s != baseline]
        if not comparisons:
            raise AlignmentError("pairwise tasks need a baseline plus at least one other system")
        for system in sorted(comparisons):
            for aspect in aspects:
                for key in draw(n_samples):
                    rows = aligned[key]
                    base_row, other_row = rows[baseline], rows[system]
                    swap = rng.random() < 0.5
                    first, second = (other_row, base_row) if not swap else (base_row, other_row)
                    first_system, second_system = (
                        (system, baseline) if not swap else (baseline, system)
                    )
                    tasks.append(
                        AnnotationTask(
                            task_id=next_id(),
                            kind=TaskKind.PAIRWISE,
                            context=key[0],
                            payload={
                                "question_a": first["question"],
                                "question_b": second["question"],
                                "answer": key[1],
                                "aspect": aspect,
                            },
                            hidden={
                                "system_a": first_system,
                                "system_b": second_system,
                                "baseline": baseline,
                            },
                        )
                    )

    if TaskKind.SKILL in kinds:
        for system in sorted(questions_by_system):
            for key in draw(n_samples):
                row = aligned[key][system]
                sentences = split_sentences(key[0])
                tasks.append(
                    AnnotationTask(
                        task_id=next_id(),
                        kind=TaskKind.SKILL,
                        context=key[0],
                        payload={
                            "question": row["question"],
                            "answer": key[1],
                            "sentences": [
                                {"index": i, "text": s} for i, s in enumerate(sentences)
                            ],
                        },
                        hidden={"system": system, "conditioned_skill": row["skill"]},
                    )
                )

    if TaskKind.KNOWLEDGE in kinds:
        for system in sorted(questions_by_system):
            keys_with_knowledge = [
                key for key in ordered_keys if aligned[key][system].get("knowledge")
            ]
            if not keys_with_knowledge:
                log.info("system %s has no knowledge text; skipping knowledge tasks", system)
                continue
            chosen = (
                keys_with_knowledge
                if n_samples >= len(keys_with_knowledge)
                else rng.sample(keys_with_knowledge, n_samples)
            )
            for key in chosen:
                row = aligned[key][system]
                tasks.append(
                    AnnotationTask(
                        task_id=next_id(),
                        kind=TaskKind.KNOWLEDGE,
                        context=key[0],
                        payload={
                            "question": row["question"],
                            "answer": key[1],
                            "knowledge_text": row["knowledge"],
                        },
                        hidden={"system": system},
                    )
                )

    manifest = {
        "seed": seed,
        "systems": sorted(questions_by_system),
        "baseline": baseline,
        "n_samples": n_samples,
        "kinds": sorted(k.value for k in kinds),
        "aspects": list(aspects),
        "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    return tasks, manifest


def write_bundle(tasks: list[AnnotationTask], manifest: dict, path: Path | str) -> None:
    payload = {"manifest": manifest, "tasks": [t.to_json() for t in tasks]}
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False), encoding="utf-8")


def read_bundle(path: Path | str) -> tuple[list[AnnotationTask], dict]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    tasks = [AnnotationTask.from_json(t) for t in payload["tasks"]]
    return tasks, payload["manifest"]
