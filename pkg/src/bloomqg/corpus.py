"""Dataset ingestion and the normalized JSONL sample contract.

Two on-disk layouts are accepted:

* normalized JSONL, one record per line:
  ``{"story_id", "section_ids", "context", "question", "answer",
  "annotation", "skill", "split"}``
* a FairytaleQA-style directory with per-story CSV pairs
  (``<story>-story.csv`` holding numbered sections and
  ``<story>-questions.csv`` holding question/answer/attribute rows that
  reference the relevant sections).

Everything is normalized into :class:`QASample` at ingest; downstream code
never sees the raw files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DatasetError, MappingError
from .skills import ANNOTATION_TO_SKILL, Skill, map_annotation_to_skill

SPLITS = ("train", "dev", "test")

# on-disk split directories/files seen in upstream distributions
_SPLIT_ALIASES = {"train": ("train",), "dev": ("dev", "val", "validation"), "test": ("test",)}


@dataclass(frozen=True)
class QASample:
    """One (context, question, answer) unit with its skill annotation."""

    story_id: str
    section_ids: tuple[int, ...]
    context: str
    question: str
    answer: str
    annotation: str
    skill: Skill
    split: str
    synthetic: bool = False
    beam_rank: int | None = None

    def __post_init__(self):
        if not self.context:
            raise DatasetError(f"story {self.story_id!r}: empty context")
        if not self.answer:
            raise DatasetError(f"story {self.story_id!r}: empty answer")
        if self.annotation:
            expected = map_annotation_to_skill(self.annotation)
            if expected is not self.skill:
                raise DatasetError(
                    f"story {self.story_id!r}: skill {self.skill} does not match "
                    f"annotation {self.annotation!r} (expected {expected})"
                )

    def to_json(self) -> dict:
        record = {
            "story_id": self.story_id,
            "section_ids": list(self.section_ids),
            "context": self.context,
            "question": self.question,
            "answer": self.answer,
            "annotation": self.annotation,
            "skill": str(self.skill),
            "split": self.split,
        }
        if self.synthetic:
            record["synthetic"] = True
            record["beam_rank"] = self.beam_rank
        return record


def canonicalize_annotation(raw: str) -> str:
    """Normalize a raw annotation label to the canonical seven-label form.

    Trims whitespace and folds case; abbreviations seen in upstream files
    ("causal rel.", "outcome res.") are expanded. Unknown labels raise
    :class:`MappingError`.
    """
    trimmed = raw.strip()
    if trimmed in ANNOTATION_TO_SKILL:
        return trimmed
    lowered = trimmed.lower().rstrip(".")
    for label in ANNOTATION_TO_SKILL:
        if lowered == label.lower():
            return label
    expansions = {
        "causal rel": "Causal relationship",
        "outcome res": "Outcome resolution",
        "outcome reso": "Outcome resolution",
    }
    if lowered in expansions:
        return expansions[lowered]
    raise MappingError(f"unknown annotation label: {trimmed!r}")


def _record_to_sample(record: dict, split: str, line_no: int) -> QASample:
    required = ("story_id", "context", "question", "answer", "annotation")
    story_id = record.get("story_id", f"<line {line_no}>")
    for key in required:
        if key not in record or record[key] in (None, ""):
            raise DatasetError(f"story {story_id!r}: missing field {key!r}")
    annotation = canonicalize_annotation(record["annotation"])
    skill = map_annotation_to_skill(annotation)
    if "skill" in record and record["skill"]:
        declared = Skill.from_string(record["skill"])
        if declared is not skill:
            raise DatasetError(
                f"story {story_id!r}: declared skill {record['skill']!r} "
                f"contradicts annotation {annotation!r}"
            )
    return QASample(
        story_id=record["story_id"],
        section_ids=tuple(int(s) for s in record.get("section_ids", [])),
        context=record["context"],
        question=record["question"],
        answer=record["answer"],
        annotation=annotation,
        skill=skill,
        split=record.get("split", split) or split,
    )


def read_samples_jsonl(path: Path | str, split: str | None = None) -> list[QASample]:
    samples = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            samples.append(_record_to_sample(record, split or record.get("split", ""), line_no))
    return samples


def write_samples_jsonl(samples: Iterable[QASample], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for sample in samples:
            handle.write(json.dumps(sample.to_json(), ensure_ascii=False) + "\n")


def _pick(row: dict, *names: str) -> str | None:
    for name in names:
        if name in row and row[name] not in (None, ""):
            return row[name]
    return None


def _parse_section_ids(raw: str, story_id: str) -> tuple[int, ...]:
    ids = []
    for token in str(raw).replace(";", ",").split(","):
        token = token.strip()
        if not token:
            continue
        try:
            ids.append(int(float(token)))
        except ValueError:
            raise DatasetError(f"story {story_id!r}: bad section reference {token!r}") from None
    if not ids:
        raise DatasetError(f"story {story_id!r}: no section references")
    return tuple(ids)


def _load_story_sections(path: Path) -> dict[int, str]:
    sections: dict[int, str] = {}
    with open(path, encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            number = _pick(row, "section", "section_id", "id")
            text = _pick(row, "text", "section_text", "story_section")
            if number is None or text is None:
                raise DatasetError(f"{path.name}: story row missing section/text")
            sections[int(float(number))] = text.strip()
    return sections


def _load_story_dir(directory: Path, split: str) -> list[QASample]:
    samples = []
    for question_file in sorted(directory.glob("*-questions.csv")):
        story_id = question_file.name[: -len("-questions.csv")]
        story_file = directory / f"{story_id}-story.csv"
        if not story_file.exists():
            raise DatasetError(f"story {story_id!r}: missing {story_file.name}")
        sections = _load_story_sections(story_file)
        with open(question_file, encoding="utf-8", newline="") as handle:
            for row in csv.DictReader(handle):
                question = _pick(row, "question", "question_text")
                answer = _pick(row, "answer", "answer1")
                attribute = _pick(row, "attribute", "attribute1", "annotation")
                section_ref = _pick(row, "cor_section", "corr_sec", "section_ids", "sections")
                if None in (question, answer, attribute, section_ref):
                    raise DatasetError(
                        f"story {story_id!r}: question row missing one of "
                        "question/answer/attribute/cor_section"
                    )
                section_ids = _parse_section_ids(section_ref, story_id)
                missing = [s for s in section_ids if s not in sections]
                if missing:
                    raise DatasetError(f"story {story_id!r}: unknown sections {missing}")
                # referenced sections are concatenated in document order
                ordered = sorted(set(section_ids))
                context = " ".join(sections[s] for s in ordered)
                annotation = canonicalize_annotation(attribute)
                samples.append(
                    QASample(
                        story_id=story_id,
                        section_ids=tuple(ordered),
                        context=context,
                        question=question.strip(),
                        answer=answer.strip(),
                        annotation=annotation,
                        skill=map_annotation_to_skill(annotation),
                        split=split,
                    )
                )
    return samples


def load_dataset(path: Path | str, split: str) -> list[QASample]:
    """Load one split from ``path``, normalizing either accepted layout.

    ``path`` may contain ``<split>.jsonl`` files or per-split directories of
    story CSV pairs. Returns an empty list when the split exists but holds no
    records; raises on an unknown split name or a malformed record.
    """
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}; expected one of {SPLITS}")
    root = Path(path)
    if not root.exists():
        raise DatasetError(f"dataset path does not exist: {root}")
    for alias in _SPLIT_ALIASES[split]:
        jsonl = root / f"{alias}.jsonl"
        if jsonl.exists():
            return read_samples_jsonl(jsonl, split)
    for alias in _SPLIT_ALIASES[split]:
        directory = root / alias
        if directory.is_dir():
            return _load_story_dir(directory, split)
    # an empty directory is a vacuous-but-valid dataset
    if not any(root.iterdir()):
        return []
    raise DatasetError(f"no {split!r} split found under {root}")


def relabel_split(samples: Sequence[QASample], split: str) -> list[QASample]:
    return [replace(s, split=split) for s in samples]
