"""Aggregations over collected judgments.

Pairwise judgments de-anonymize through the tasks' hidden system labels and
pool across annotators into wins/ties percentages per (system, aspect).
Skill accuracy compares the annotated skill with the skill the question was
conditioned on. Knowledge quality is the percentage of yes answers per
question. Agreement is Krippendorff's alpha per aspect.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from ..errors import UndefinedValueError
from ..metrics import krippendorff_alpha
from .store import JudgmentStore
from .tasks import AnnotationTask, Judgment, TaskKind


@dataclass
class AggregateReport:
    pairwise: dict = field(default_factory=dict)
    skill: dict = field(default_factory=dict)
    skill_by_system: dict = field(default_factory=dict)
    knowledge: dict = field(default_factory=dict)
    agreement: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "pairwise": self.pairwise,
            "skill": self.skill,
            "skill_by_system": self.skill_by_system,
            "knowledge": self.knowledge,
            "agreement": self.agreement,
            "counts": self.counts,
        }


def _tasks_by_id(tasks) -> dict[str, AnnotationTask]:
    if isinstance(tasks, dict):
        return tasks
    return {t.task_id: t for t in tasks}


def aggregate_pairwise(judgments: list[Judgment], tasks) -> dict:
    """wins%/ties% of each comparison system against the baseline, per aspect."""
    index = _tasks_by_id(tasks)
    cells: dict[tuple[str, str], list[str]] = defaultdict(list)
    for judgment in judgments:
        task = index.get(judgment.task_id)
        if task is None or task.kind is not TaskKind.PAIRWISE:
            continue
        aspect = task.payload["aspect"]
        choice = judgment.verdict["choice"]
        baseline = task.hidden["baseline"]
        side = {"A": task.hidden["system_a"], "B": task.hidden["system_b"]}
        system = side["A"] if side["A"] != baseline else side["B"]
        if choice == "TIE":
            outcome = "tie"
        else:
            outcome = "win" if side[choice] == system else "loss"
        cells[(system, aspect)].append(outcome)
    report: dict = {}
    for (system, aspect), outcomes in sorted(cells.items()):
        total = len(outcomes)
        report.setdefault(system, {})[aspect] = {
            "wins_pct": 100.0 * outcomes.count("win") / total,
            "ties_pct": 100.0 * outcomes.count("tie") / total,
            "n": total,
        }
    return report


def aggregate_skill_accuracy(judgments: list[Judgment], tasks) -> tuple[dict, dict]:
    """Accuracy per conditioned skill (pooled, plus a per-system breakdown)."""
    index = _tasks_by_id(tasks)
    pooled: dict[str, list[bool]] = defaultdict(list)
    by_system: dict[str, dict[str, list[bool]]] = defaultdict(lambda: defaultdict(list))
    for judgment in judgments:
        task = index.get(judgment.task_id)
        if task is None or task.kind is not TaskKind.SKILL:
            continue
        conditioned = task.hidden["conditioned_skill"]
        annotated = judgment.verdict["skill"]
        hit = annotated == conditioned
        pooled[conditioned].append(hit)
        by_system[task.hidden.get("system", "unknown")][conditioned].append(hit)
    accuracy = {
        skill: sum(hits) / len(hits) for skill, hits in sorted(pooled.items())
    }
    breakdown = {
        system: {skill: sum(hits) / len(hits) for skill, hits in sorted(per_skill.items())}
        for system, per_skill in sorted(by_system.items())
    }
    return accuracy, breakdown


def aggregate_knowledge(judgments: list[Judgment], tasks) -> dict:
    """Percentage of yes answers to each knowledge question, per system."""
    index = _tasks_by_id(tasks)
    answers: dict[str, dict[str, list[bool]]] = defaultdict(lambda: {"makes_sense": [], "relevant": []})
    for judgment in judgments:
        task = index.get(judgment.task_id)
        if task is None or task.kind is not TaskKind.KNOWLEDGE:
            continue
        system = task.hidden.get("system", "unknown")
        answers[system]["makes_sense"].append(bool(judgment.verdict["makes_sense"]))
        answers[system]["relevant"].append(bool(judgment.verdict["relevant"]))
    report = {}
    for system, columns in sorted(answers.items()):
        report[system] = {
            "makes_sense_pct": 100.0 * sum(columns["makes_sense"]) / len(columns["makes_sense"]),
            "relevant_pct": 100.0 * sum(columns["relevant"]) / len(columns["relevant"]),
            "n": len(columns["makes_sense"]),
        }
    return report


def _alpha_or_none(matrix: list[list]) -> float | None:
    try:
        return krippendorff_alpha(matrix)
    except UndefinedValueError:
        return None


def agreement(judgments: list[Judgment], tasks) -> dict:
    """Krippendorff's alpha per aspect; absent where no two raters overlap."""
    index = _tasks_by_id(tasks)
    labels: dict[str, dict[str, dict[str, object]]] = defaultdict(lambda: defaultdict(dict))
    for judgment in judgments:
        task = index.get(judgment.task_id)
        if task is None:
            continue
        if task.kind is TaskKind.PAIRWISE:
            labels[task.payload["aspect"]][judgment.task_id][judgment.annotator_id] = (
                judgment.verdict["choice"]
            )
        elif task.kind is TaskKind.SKILL:
            labels["skill"][judgment.task_id][judgment.annotator_id] = judgment.verdict["skill"]
        else:
            labels["knowledge_makes_sense"][judgment.task_id][judgment.annotator_id] = (
                judgment.verdict["makes_sense"]
            )
            labels["knowledge_relevant"][judgment.task_id][judgment.annotator_id] = (
                judgment.verdict["relevant"]
            )
    report = {}
    for aspect, items in sorted(labels.items()):
        raters = sorted({r for cells in items.values() for r in cells})
        matrix = [
            [cells.get(rater) for rater in raters] for cells in items.values()
        ]
        report[aspect] = _alpha_or_none(matrix)
    return report


def render_text(report: AggregateReport) -> str:
    """Human-readable summary of an aggregate report."""
    lines = []
    if report.pairwise:
        lines.append("pairwise (vs baseline)")
        for system, aspects in report.pairwise.items():
            for aspect, cell in aspects.items():
                lines.append(
                    f"  {system:<20} {aspect:<15} wins {cell['wins_pct']:5.1f}%  "
                    f"ties {cell['ties_pct']:5.1f}%  (n={cell['n']})"
                )
    if report.skill:
        lines.append("skill accuracy")
        for skill, accuracy in report.skill.items():
            lines.append(f"  {skill:<12} {accuracy:6.3f}")
    if report.knowledge:
        lines.append("knowledge quality (% yes)")
        for system, cell in report.knowledge.items():
            lines.append(
                f"  {system:<20} makes sense {cell['makes_sense_pct']:5.1f}%  "
                f"relevant {cell['relevant_pct']:5.1f}%  (n={cell['n']})"
            )
    if report.agreement:
        lines.append("agreement (krippendorff alpha)")
        for aspect, value in report.agreement.items():
            shown = "n/a" if value is None else f"{value:.4f}"
            lines.append(f"  {aspect:<22} {shown}")
    counts = report.counts
    lines.append(
        f"judgments: {counts.get('n_judgments', 0)} over {counts.get('n_tasks', 0)} tasks"
    )
    return "\n".join(lines)


def build_report(store: JudgmentStore) -> AggregateReport:
    judgments = store.judgments_list()
    tasks = store.tasks
    skill_accuracy, skill_breakdown = aggregate_skill_accuracy(judgments, tasks)
    return AggregateReport(
        pairwise=aggregate_pairwise(judgments, tasks),
        skill=skill_accuracy,
        skill_by_system=skill_breakdown,
        knowledge=aggregate_knowledge(judgments, tasks),
        agreement=agreement(judgments, tasks),
        counts=store.progress(),
    )
