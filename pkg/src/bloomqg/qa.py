"""Small generative QA probe used to measure augmentation utility.

Trains the same word-level seq2seq backend to map "question: q context: c"
onto the answer string, and scores predictions with answer-level ROUGE-L F1.
This is the downstream consumer of augmented datasets, not a competitive QA
system.
"""

from __future__ import annotations

from collections import defaultdict

from .corpus import QASample
from .generator.backend import BackendConfig, TinySeq2SeqBackend
from .generator.training import TrainingConfig, fit_pairs
from .metrics import rouge_l


def qa_input(sample: QASample) -> str:
    return f"question: {sample.question} context: {sample.context}"


def train_qa(
    samples: list[QASample],
    cfg: TrainingConfig,
    backend_config: BackendConfig | None = None,
) -> TinySeq2SeqBackend:
    if not samples:
        raise ValueError("cannot train QA on an empty sample list")
    pairs = [(qa_input(s), s.answer) for s in samples]
    backend, _ = fit_pairs(pairs, cfg, backend_config=backend_config)
    return backend


def predict_answer(backend: TinySeq2SeqBackend, sample: QASample, max_tokens: int = 24) -> str:
    decoded = backend.beam_generate(qa_input(sample), beam_size=1, max_new_tokens=max_tokens)
    return decoded[0][0] if decoded else ""


def evaluate_qa(
    backend: TinySeq2SeqBackend, samples: list[QASample], max_tokens: int = 24
) -> tuple[float, dict[str, float]]:
    """Mean answer ROUGE-L F1, overall and per conditioning skill."""
    if not samples:
        raise ValueError("no samples to evaluate")
    per_skill: dict[str, list[float]] = defaultdict(list)
    scores = []
    for sample in samples:
        predicted = predict_answer(backend, sample, max_tokens)
        f1 = rouge_l(predicted, sample.answer)[2]
        scores.append(f1)
        per_skill[str(sample.skill)].append(f1)
    breakdown = {skill: sum(vals) / len(vals) for skill, vals in sorted(per_skill.items())}
    return sum(scores) / len(scores), breakdown
