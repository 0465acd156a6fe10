"""Entity-recognizer and role-labeler contracts with deterministic backends.

Third-party NLP pipelines drift across versions, so tests run against
fixture-backed analyzers whose outputs are frozen JSON. A lightweight
heuristic pair is bundled for running the pipeline on arbitrary text without
model downloads, and a spaCy adapter is available when spaCy is installed.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, runtime_checkable

from .errors import BackendError


@dataclass(frozen=True)
class Entity:
    surface: str
    label: str
    start: int
    end: int


@dataclass(frozen=True)
class Frame:
    """One predicate with its subject and object argument surfaces."""

    verb: str
    subject: str | None
    object_: str | None


@runtime_checkable
class EntityRecognizer(Protocol):
    def entities(self, text: str) -> list[Entity]: ...


@runtime_checkable
class RoleLabeler(Protocol):
    def frames(self, text: str) -> list[Frame]: ...


class FixtureRecognizer:
    """Replays frozen entity outputs keyed by exact input text."""

    def __init__(self, table: dict[str, list[dict]], strict: bool = False):
        self.table = table
        self.strict = strict

    @classmethod
    def from_file(cls, path: Path | str, strict: bool = False) -> "FixtureRecognizer":
        with open(path, encoding="utf-8") as handle:
            return cls(json.load(handle), strict=strict)

    def entities(self, text: str) -> list[Entity]:
        if text not in self.table:
            if self.strict:
                raise BackendError(f"no frozen entities for text: {text[:60]!r}")
            return []
        return [Entity(e["surface"], e.get("label", "ENT"), e["start"], e["end"]) for e in self.table[text]]


class FixtureRoleLabeler:
    """Replays frozen predicate frames keyed by exact input text."""

    def __init__(self, table: dict[str, list[dict]], strict: bool = False):
        self.table = table
        self.strict = strict

    @classmethod
    def from_file(cls, path: Path | str, strict: bool = False) -> "FixtureRoleLabeler":
        with open(path, encoding="utf-8") as handle:
            return cls(json.load(handle), strict=strict)

    def frames(self, text: str) -> list[Frame]:
        if text not in self.table:
            if self.strict:
                raise BackendError(f"no frozen frames for text: {text[:60]!r}")
            return []
        return [Frame(f["verb"], f.get("subject"), f.get("object")) for f in self.table[text]]


_WORD = re.compile(r"[A-Za-z][A-Za-z'-]*")


class CapitalizedSpanRecognizer:
    """Heuristic recognizer: maximal runs of capitalized words.

    Sentence-initial discourse words (The, Then, One, ...) never start a
    span; other sentence-initial words only count when the run extends
    beyond them or the word also appears capitalized mid-sentence.
    """

    DISCOURSE_STARTERS = frozenset(
        {"The", "A", "An", "It", "Then", "One", "After", "Before", "When",
         "While", "Finally", "Later", "There", "That", "This", "So", "But", "And"}
    )

    def entities(self, text: str) -> list[Entity]:
        tokens = list(_WORD.finditer(text))
        sentence_starts = self._sentence_start_offsets(text)
        midsentence_caps = {
            m.group(0)
            for m in tokens
            if m.group(0)[0].isupper() and m.start() not in sentence_starts
        }
        entities: list[Entity] = []
        i = 0
        while i < len(tokens):
            word = tokens[i].group(0)
            skip_discourse = (
                tokens[i].start() in sentence_starts and word in self.DISCOURSE_STARTERS
            )
            if not word[0].isupper() or skip_discourse:
                i += 1
                continue
            j = i
            while j + 1 < len(tokens) and tokens[j + 1].group(0)[0].isupper():
                j += 1
            start, end = tokens[i].start(), tokens[j].end()
            surface = text[start:end]
            initial_only = tokens[i].start() in sentence_starts and i == j
            if not initial_only or surface in midsentence_caps:
                entities.append(Entity(surface, "ENT", start, end))
            i = j + 1
        return entities

    @staticmethod
    def _sentence_start_offsets(text: str) -> set[int]:
        # a word starts a sentence when only whitespace, or a terminator plus
        # whitespace, precedes it
        starts = set()
        prev_end = 0
        pending = True
        for match in _WORD.finditer(text):
            gap = text[prev_end : match.start()]
            if pending or any(ch in ".!?\n" for ch in gap):
                starts.add(match.start())
            pending = False
            prev_end = match.end()
        return starts


class VerbLexiconRoleLabeler:
    """Heuristic labeler: split clauses on a small closed verb lexicon.

    Subject is the text before the verb in its clause, object the text after
    it up to the next clause connective; adjunct clauses ("because ...") are
    not part of an argument. Meant for templated fixture text, not
    open-domain prose.
    """

    DEFAULT_VERBS = (
        "met", "went", "got", "saw", "said", "made", "took", "came", "ran",
        "felt", "found", "lived", "climbed", "baked", "crossed", "hid",
        "wandered", "visited", "built", "carried", "shared", "lost",
        "followed", "helped", "watched", "opened", "returned", "promised",
        "thanked", "rescued", "repaired", "planted", "guarded", "sold",
        "borrowed", "chased", "fixed", "gathered", "painted", "cooked",
    )

    CONNECTIVES = ("because", "so", "when", "while", "after", "before", "and", "then", "but")

    # sentence-initial discourse cues that are not part of the subject
    LEADING_CUES = ("one morning", "then", "after that", "finally", "later")

    def __init__(self, verbs: tuple[str, ...] | None = None):
        self.verbs = set(verbs or self.DEFAULT_VERBS)

    def frames(self, text: str) -> list[Frame]:
        frames = []
        for sentence in re.split(r"[.!?\n]+", text):
            sentence = sentence.strip()
            lowered = sentence.lower()
            for cue in self.LEADING_CUES:
                if lowered.startswith(cue + " ") or lowered.startswith(cue + ","):
                    sentence = sentence[len(cue) :].lstrip(", ")
                    break
            for clause in re.split(r",\s*|\s+and\s+|\s+then\s+", sentence):
                words = clause.split()
                for idx, word in enumerate(words):
                    token = word.strip(",;:\"'").lower()
                    if token in self.verbs or (token.endswith("ed") and len(token) > 4):
                        subject = " ".join(words[:idx]).strip(",;: ") or None
                        tail = words[idx + 1 :]
                        for stop, tail_word in enumerate(tail):
                            if tail_word.strip(",;:").lower() in self.CONNECTIVES:
                                tail = tail[:stop]
                                break
                        object_ = " ".join(tail).strip(",;: ") or None
                        frames.append(Frame(word.strip(",;:\"'"), subject, object_))
                        break
        return frames


class SpacyRecognizer:
    """Adapter over a spaCy pipeline, when spaCy and a model are installed."""

    def __init__(self, model: str = "en_core_web_sm"):
        try:
            import spacy
        except ImportError as exc:
            raise BackendError("spaCy is not installed; pip install spacy") from exc
        try:
            self.nlp = spacy.load(model)
        except OSError as exc:
            raise BackendError(f"spaCy model {model!r} is not available") from exc

    def entities(self, text: str) -> list[Entity]:
        doc = self.nlp(text)
        return [Entity(ent.text, ent.label_, ent.start_char, ent.end_char) for ent in doc.ents]
