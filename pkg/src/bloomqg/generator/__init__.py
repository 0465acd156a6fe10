from .records import (
    GeneratorRecord,
    SerializationMode,
    augment_context,
    parse_input,
    serialize_input,
    truncate_for_budget,
)
from .loss import nll_loss
from .training import ModelArtifact, TrainingConfig, train
from .inference import GenerationConfig, QuestionCandidate, generate

__all__ = [
    "GeneratorRecord",
    "SerializationMode",
    "augment_context",
    "parse_input",
    "serialize_input",
    "truncate_for_budget",
    "nll_loss",
    "ModelArtifact",
    "TrainingConfig",
    "train",
    "GenerationConfig",
    "QuestionCandidate",
    "generate",
]
