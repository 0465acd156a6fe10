"""Beam-search question decoding from a trained artifact."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ..errors import SerializationError
from .records import GeneratorRecord, serialize_input, truncate_for_budget
from .training import ModelArtifact


@dataclass(frozen=True)
class GenerationConfig:
    beam_size: int = 8
    max_question_tokens: int = 48
    keep_all_beams: bool = True

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be at least 1")
        if self.max_question_tokens < 1:
            raise ValueError("max_question_tokens must be at least 1")


@dataclass(frozen=True)
class QuestionCandidate:
    text: str
    beam_rank: int
    score: float


def generate(
    record: GeneratorRecord, artifact: ModelArtifact, gen: GenerationConfig
) -> list[QuestionCandidate]:
    """Decode ranked question candidates for one record.

    The record must use the serialization mode the artifact was trained
    with; inputs are truncated to the trained token budget the same way
    training inputs were.
    """
    if record.mode is not artifact.mode:
        raise SerializationError(
            f"record mode {record.mode.value!r} does not match artifact mode "
            f"{artifact.mode.value!r}"
        )
    backend = artifact.backend()
    limit = artifact.manifest["max_sequence_length"]
    fitted = truncate_for_budget(record, backend.token_count, limit)
    if fitted is None:
        raise SerializationError("record exceeds the token budget even when truncated")
    ranked = backend.beam_generate(
        serialize_input(fitted), beam_size=gen.beam_size, max_new_tokens=gen.max_question_tokens
    )
    candidates = [
        QuestionCandidate(text, rank, score) for rank, (text, score) in enumerate(ranked)
    ]
    if not gen.keep_all_beams:
        candidates = candidates[:1]
    return candidates


def question_record_json(
    record: GeneratorRecord, candidate: QuestionCandidate
) -> dict:
    """One generated-question JSONL row."""
    return {
        "context": record.context,
        "answer": record.answer,
        "skill": str(record.skill),
        "question": candidate.text,
        "beam_rank": candidate.beam_rank,
        "score": candidate.score,
        "focus": record.chain.focus.text if record.chain else None,
        "knowledge": record.chain.knowledge.text if record.chain else None,
        "mode": record.mode.value,
    }


def write_question_jsonl(rows: Iterable[dict], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
