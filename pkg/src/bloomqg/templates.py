"""Paired focus/knowledge elicitation templates.

Each comprehension skill carries a set of template pairs. The focus template
(F) asks what a question should be about and holds a single ``<blank>``; the
knowledge template (K) asks for information about that focus and holds one
``<focus>`` and one ``<blank>``. Pairs whose F-blank sits mid-sentence are
cloze-style and cannot be completed left-to-right by a causal LM, so they are
routed to entity extraction instead (see :mod:`bloomqg.prompting`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import TemplateError
from .skills import Skill

BLANK = "<blank>"
FOCUS = "<focus>"
_PLACEHOLDERS = (BLANK, FOCUS)


class TemplateStyle(Enum):
    PREFIX = "prefix"
    CLOZE = "cloze"


def classify_style(f_text: str) -> TemplateStyle:
    """A template is cloze-style iff content follows the blank.

    Trailing whitespace and the characters ``?.`` do not count as content, so
    "What is the definition of <blank>" is PREFIX while
    "How would <blank> feel afterwards?" is CLOZE.
    """
    tail = f_text.split(BLANK, 1)[1]
    stripped = "".join(ch for ch in tail if not ch.isspace() and ch not in "?.")
    return TemplateStyle.CLOZE if stripped else TemplateStyle.PREFIX


@dataclass(frozen=True)
class TemplatePair:
    skill: Skill
    f_text: str
    k_text: str

    def __post_init__(self):
        if self.f_text.count(BLANK) != 1 or FOCUS in self.f_text:
            raise TemplateError(f"focus template needs exactly one {BLANK}: {self.f_text!r}")
        if self.k_text.count(BLANK) != 1 or self.k_text.count(FOCUS) != 1:
            raise TemplateError(
                f"knowledge template needs exactly one {FOCUS} and one {BLANK}: {self.k_text!r}"
            )

    @property
    def style(self) -> TemplateStyle:
        return classify_style(self.f_text)


class TemplateRegistry:
    """Ordered collection of template pairs, loadable from a JSON file."""

    def __init__(self, pairs: list[TemplatePair]):
        if not pairs:
            raise TemplateError("registry must contain at least one pair")
        self.pairs = tuple(pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __getitem__(self, index: int) -> TemplatePair:
        return self.pairs[index]

    def pairs_for(self, skill: Skill) -> list[TemplatePair]:
        return [pair for pair in self.pairs if pair.skill is skill]

    def indexed_pairs_for(self, skill: Skill) -> list[tuple[int, TemplatePair]]:
        return [(i, pair) for i, pair in enumerate(self.pairs) if pair.skill is skill]

    @classmethod
    def from_file(cls, path: Path | str) -> "TemplateRegistry":
        with open(path, encoding="utf-8") as handle:
            records = json.load(handle)
        pairs = [
            TemplatePair(Skill.from_string(r["skill"]), r["f_text"], r["k_text"])
            for r in records
        ]
        return cls(pairs)

    @classmethod
    def default(cls) -> "TemplateRegistry":
        data = resources.files("bloomqg.data").joinpath("templates.json").read_text("utf-8")
        records = json.loads(data)
        return cls(
            [TemplatePair(Skill.from_string(r["skill"]), r["f_text"], r["k_text"]) for r in records]
        )


def _check_fill_argument(name: str, value: str) -> None:
    if not value:
        raise TemplateError(f"{name} must be non-empty")
    for token in _PLACEHOLDERS:
        if token in value:
            raise TemplateError(f"{name} must not contain placeholder token {token!r}")


def fill_focus_template(pair: TemplatePair, focus: str) -> str:
    """Substitute the focus into the F-template. Single-pass, exact-string."""
    _check_fill_argument("focus", focus)
    return pair.f_text.replace(BLANK, focus, 1)


def fill_knowledge_template(pair: TemplatePair, focus: str, knowledge: str) -> str:
    """Substitute focus and knowledge into the K-template."""
    _check_fill_argument("focus", focus)
    _check_fill_argument("knowledge", knowledge)
    return pair.k_text.replace(FOCUS, focus, 1).replace(BLANK, knowledge, 1)


def completion_stub(template_text: str, bindings: dict[str, str] | None = None) -> str:
    """Cut a template at its blank so a causal LM can complete it.

    All non-blank placeholders must be bound; the text up to the blank is
    returned with trailing whitespace trimmed.
    """
    bindings = bindings or {}
    text = template_text
    for name, value in bindings.items():
        token = f"<{name}>"
        _check_fill_argument(name, value)
        text = text.replace(token, value, 1)
    before_blank = text.split(BLANK, 1)[0]
    if "<" in before_blank and ">" in before_blank:
        unbound = before_blank[before_blank.index("<") : before_blank.index(">") + 1]
        raise TemplateError(f"unbound placeholder {unbound!r} in {template_text!r}")
    return before_blank.rstrip()
