from .tasks import AnnotationTask, Judgment, TaskKind, create_annotation_bundle
from .store import JudgmentStore
from .aggregate import (
    AggregateReport,
    agreement,
    aggregate_knowledge,
    aggregate_pairwise,
    aggregate_skill_accuracy,
    build_report,
)
from .service import create_app

__all__ = [
    "AnnotationTask",
    "Judgment",
    "TaskKind",
    "create_annotation_bundle",
    "JudgmentStore",
    "AggregateReport",
    "agreement",
    "aggregate_knowledge",
    "aggregate_pairwise",
    "aggregate_skill_accuracy",
    "build_report",
    "create_app",
]
