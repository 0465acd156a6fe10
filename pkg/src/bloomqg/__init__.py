"""Skill-conditioned question generation toolkit."""

__version__ = "0.1.0"

from .skills import Skill, map_annotation_to_skill, skill_histogram
from .corpus import QASample, load_dataset
from .templates import TemplatePair, TemplateRegistry, TemplateStyle

__all__ = [
    "Skill",
    "map_annotation_to_skill",
    "skill_histogram",
    "QASample",
    "load_dataset",
    "TemplatePair",
    "TemplateRegistry",
    "TemplateStyle",
    "__version__",
]
