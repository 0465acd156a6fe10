"""Two-stage (skill, answer) extraction from unlabeled passages.

The joint distribution factorizes into a learned multi-label skill
classifier over the context followed by rule-based answer extraction whose
path depends on the skill: entity-style skills draw named entities, event-
style skills compose subject + verb + object from predicate frames. The
resulting triples feed the question generator, and a seeded selection of the
beam outputs augments the training set.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

import joblib
import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer
from sklearn.linear_model import LogisticRegression
from sklearn.metrics import f1_score

from .analyzers import EntityRecognizer, RoleLabeler
from .corpus import QASample
from .errors import BackendError
from .skills import Skill

log = logging.getLogger(__name__)

#: Skills answered by named entities (characters, settings, feelings about
#: them); the remaining skills are answered by composed action events.
ENTITY_SKILLS = frozenset({Skill.REMEMBER, Skill.EVALUATE})
EVENT_SKILLS = frozenset({Skill.UNDERSTAND, Skill.ANALYZE, Skill.CREATE})


@dataclass(frozen=True)
class AnswerCandidate:
    text: str
    source: str  # "NER" or "SRL"
    span: tuple[int, int] | None = None


@dataclass(frozen=True)
class ExtractionTriple:
    context: str
    skill: Skill
    answer: AnswerCandidate

    def to_json(self) -> dict:
        return {
            "context": self.context,
            "skill": str(self.skill),
            "answer": self.answer.text,
            "answer_source": self.answer.source,
            "span": list(self.answer.span) if self.answer.span else None,
        }


@dataclass
class ClassifierConfig:
    max_features: int = 20_000
    ngram_max: int = 2
    C: float = 4.0
    seed: int = 0


class TfidfSkillClassifier:
    """One-vs-rest logistic regression over tf-idf features.

    Skills absent from the training data fall back to a constant prior so
    ``predict_scores`` stays total over all five skills.
    """

    def __init__(self, cfg: ClassifierConfig | None = None):
        self.cfg = cfg or ClassifierConfig()
        self.vectorizer = TfidfVectorizer(
            max_features=self.cfg.max_features,
            ngram_range=(1, self.cfg.ngram_max),
            lowercase=True,
        )
        self.heads: dict[Skill, LogisticRegression | float] = {}
        self.dev_f1: dict[str, float] | None = None

    def fit(self, contexts: list[str], targets: list[set[Skill]]) -> "TfidfSkillClassifier":
        matrix = self.vectorizer.fit_transform(contexts)
        for skill in Skill:
            labels = np.array([skill in t for t in targets], dtype=int)
            if labels.min() == labels.max():
                prior = float(labels.mean())
                log.warning(
                    "skill %s has a single class in training data; using prior %.2f",
                    skill,
                    prior,
                )
                self.heads[skill] = min(max(prior, 0.01), 0.99)
                continue
            head = LogisticRegression(C=self.cfg.C, max_iter=2000, random_state=self.cfg.seed)
            head.fit(matrix, labels)
            self.heads[skill] = head
        return self

    def predict_scores(self, context: str) -> dict[Skill, float]:
        matrix = self.vectorizer.transform([context])
        scores = {}
        for skill in Skill:
            head = self.heads[skill]
            if isinstance(head, float):
                scores[skill] = head
            else:
                scores[skill] = float(head.predict_proba(matrix)[0, 1])
        return scores

    def save(self, path: Path | str) -> None:
        joblib.dump(self, path)

    @classmethod
    def load(cls, path: Path | str) -> "TfidfSkillClassifier":
        return joblib.load(path)


def multi_label_targets(samples: list[QASample]) -> tuple[list[str], list[set[Skill]]]:
    """Union the skills of all questions sharing a context string."""
    by_context: dict[str, set[Skill]] = {}
    for sample in samples:
        by_context.setdefault(sample.context, set()).add(sample.skill)
    contexts = list(by_context)
    return contexts, [by_context[c] for c in contexts]


def train_skill_classifier(
    samples: list[QASample],
    cfg: ClassifierConfig | None = None,
    dev_samples: list[QASample] | None = None,
) -> TfidfSkillClassifier:
    """Fit the skill classifier on per-context multi-label targets."""
    if not samples:
        raise ValueError("cannot train a classifier on an empty sample list")
    contexts, targets = multi_label_targets(samples)
    clf = TfidfSkillClassifier(cfg).fit(contexts, targets)
    if dev_samples:
        clf.dev_f1 = _dev_f1(clf, dev_samples)
        for name, value in clf.dev_f1.items():
            log.info("dev F1 %s: %.3f", name, value)
    return clf


def _dev_f1(clf: TfidfSkillClassifier, dev_samples: list[QASample], threshold: float = 0.5) -> dict[str, float]:
    contexts, targets = multi_label_targets(dev_samples)
    truth = np.array([[skill in t for skill in Skill] for t in targets], dtype=int)
    predicted = np.array(
        [
            [clf.predict_scores(c)[skill] >= threshold for skill in Skill]
            for c in contexts
        ],
        dtype=int,
    )
    out = {}
    for index, skill in enumerate(Skill):
        if truth[:, index].max() == 0 and predicted[:, index].max() == 0:
            out[str(skill)] = 1.0
        else:
            out[str(skill)] = float(f1_score(truth[:, index], predicted[:, index], zero_division=0))
    return out


def predict_skills(context: str, clf, threshold: float = 0.5) -> set[Skill]:
    """Thresholded skill set; falls back to the argmax so it is never empty."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    scores = clf.predict_scores(context)
    admitted = {skill for skill, score in scores.items() if score >= threshold}
    if not admitted:
        best = max(scores.items(), key=lambda item: (item[1], -item[0].rank))
        admitted = {best[0]}
    return admitted


def extract_entity_answers(context: str, ner: EntityRecognizer) -> list[AnswerCandidate]:
    """One candidate per distinct entity surface with its first span."""
    try:
        found = ner.entities(context)
    except BackendError:
        raise
    except Exception as exc:
        raise BackendError(f"entity recognizer failed: {exc}") from exc
    seen = set()
    out = []
    for entity in found:
        if entity.surface in seen:
            continue
        seen.add(entity.surface)
        if context[entity.start : entity.end] != entity.surface:
            raise BackendError(
                f"recognizer span mismatch for {entity.surface!r} at {entity.start}"
            )
        out.append(AnswerCandidate(entity.surface, "NER", (entity.start, entity.end)))
    return out


def extract_event_answers(context: str, srl: RoleLabeler) -> list[AnswerCandidate]:
    """Compose subject + verb + object per predicate, skipping bare verbs."""
    try:
        frames = srl.frames(context)
    except BackendError:
        raise
    except Exception as exc:
        raise BackendError(f"role labeler failed: {exc}") from exc
    out = []
    for frame in frames:
        if not frame.subject and not frame.object_:
            continue
        parts = [p for p in (frame.subject, frame.verb, frame.object_) if p]
        out.append(AnswerCandidate(" ".join(parts), "SRL"))
    return out


def sample_combinations(
    context: str,
    clf,
    ner: EntityRecognizer,
    srl: RoleLabeler,
    threshold: float = 0.5,
) -> list[ExtractionTriple]:
    """All (skill, answer) pairs admitted by the two-stage factorization.

    Output is ordered by skill rank, then candidate order within the skill's
    extraction path. No candidates is an empty list, not an error.
    """
    if not context:
        raise ValueError("context must be non-empty")
    admitted = predict_skills(context, clf, threshold)
    entity_answers = None
    event_answers = None
    triples = []
    for skill in sorted(admitted, key=lambda s: s.rank):
        if skill in ENTITY_SKILLS:
            if entity_answers is None:
                entity_answers = extract_entity_answers(context, ner)
            answers = entity_answers
        else:
            if event_answers is None:
                event_answers = extract_event_answers(context, srl)
            answers = event_answers
        triples.extend(ExtractionTriple(context, skill, answer) for answer in answers)
    return triples


@dataclass
class AugmentedDataset:
    base: list[QASample]
    synthetic: list[QASample]

    @property
    def all_samples(self) -> list[QASample]:
        return self.base + self.synthetic


def build_augmented_dataset(
    base: list[QASample],
    triples: list[ExtractionTriple],
    generator_fn,
    n_select: int,
    seed: int,
) -> AugmentedDataset:
    """Generate per-triple beam candidates, dedup, and sample the additions.

    ``generator_fn(triple)`` returns ranked question candidates. Exact
    duplicate (context, question) pairs collapse before the seeded uniform
    selection of ``min(n_select, pool)`` synthetic records.
    """
    if n_select <= 0:
        raise ValueError("n_select must be positive")
    pool = []
    seen: set[tuple[str, str]] = set()
    for triple in triples:
        for candidate in generator_fn(triple):
            key = (triple.context, candidate.text)
            if key in seen or not candidate.text:
                continue
            seen.add(key)
            pool.append((triple, candidate))
    size = min(n_select, len(pool))
    if size < n_select:
        log.warning("requested %d synthetic records but the pool holds %d", n_select, len(pool))
    rng = random.Random(seed)
    picked = rng.sample(range(len(pool)), size)
    synthetic = []
    for serial, index in enumerate(sorted(picked)):
        triple, candidate = pool[index]
        synthetic.append(
            QASample(
                story_id=f"synthetic-{serial:06d}",
                section_ids=(),
                context=triple.context,
                question=candidate.text,
                answer=triple.answer.text,
                annotation="",
                skill=triple.skill,
                split="train",
                synthetic=True,
                beam_rank=candidate.beam_rank,
            )
        )
    return AugmentedDataset(list(base), synthetic)


def write_triples_jsonl(triples, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for triple in triples:
            handle.write(json.dumps(triple.to_json(), ensure_ascii=False) + "\n")


def read_triples_jsonl(path: Path | str) -> list[ExtractionTriple]:
    triples = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            span = tuple(record["span"]) if record.get("span") else None
            triples.append(
                ExtractionTriple(
                    record["context"],
                    Skill.from_string(record["skill"]),
                    AnswerCandidate(record["answer"], record["answer_source"], span),
                )
            )
    return triples
