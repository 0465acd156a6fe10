"""Five-level comprehension-skill schema and the narrative-element mapping.

The skill levels are ordered by cognitive complexity (lowest to highest).
FairytaleQA-style narrative-element annotations map onto the schema through
``map_annotation_to_skill``.
"""

from __future__ import annotations

from enum import Enum

from .errors import MappingError


class Skill(Enum):
    """Comprehension skill, ordered by level of cognition."""

    REMEMBER = 1
    UNDERSTAND = 2
    ANALYZE = 3
    CREATE = 4
    EVALUATE = 5

    @property
    def rank(self) -> int:
        return self.value

    def __str__(self) -> str:
        # the lowercase name is the canonical string form used in files and
        # serialized generator inputs
        return self.name.lower()

    @classmethod
    def from_string(cls, name: str) -> "Skill":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise MappingError(f"unknown skill name: {name!r}") from None


#: The seven narrative-element annotation labels and their target skill.
ANNOTATION_TO_SKILL: dict[str, Skill] = {
    "Character": Skill.REMEMBER,
    "Setting": Skill.REMEMBER,
    "Action": Skill.UNDERSTAND,
    "Feeling": Skill.EVALUATE,
    "Causal relationship": Skill.ANALYZE,
    "Outcome resolution": Skill.ANALYZE,
    "Prediction": Skill.CREATE,
}

ANNOTATION_LABELS = tuple(ANNOTATION_TO_SKILL)


def map_annotation_to_skill(label: str) -> Skill:
    """Map a narrative-element annotation label to its comprehension skill.

    Labels are trimmed of surrounding whitespace and matched case-sensitively
    against the closed seven-label vocabulary.
    """
    trimmed = label.strip()
    try:
        return ANNOTATION_TO_SKILL[trimmed]
    except KeyError:
        raise MappingError(
            f"unknown annotation label: {trimmed!r} "
            f"(expected one of {', '.join(ANNOTATION_LABELS)})"
        ) from None


def skill_histogram(samples) -> dict[Skill, int]:
    """Count samples per skill. Buckets for all five skills are always present."""
    counts = {skill: 0 for skill in Skill}
    for sample in samples:
        counts[sample.skill] += 1
    return counts
