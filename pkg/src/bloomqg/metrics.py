"""Generation-quality metrics and annotator-agreement statistics.

The n-gram metrics (BLEU-4, ROUGE-L, answerability-weighted Q-BLEU-4) are
implemented natively with an explicit, fingerprinted tokenization: lowercase,
punctuation split off, whitespace split. Model-backed scorers (BERTScore,
CTC factuality, BARTScore) enter only through the :class:`ScorerContract`
adapter; when a scorer is unavailable the report marks the metric omitted
rather than failing the run.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

from .errors import ConfigError, UndefinedValueError

log = logging.getLogger(__name__)

_TOKEN = re.compile(r"[a-z0-9]+|[^\sa-z0-9]")
_CASED_TOKEN = re.compile(r"[A-Za-z0-9']+|[^\sA-Za-z0-9']")


def tokenize(text: str) -> list[str]:
    """Lowercase, separate punctuation, split on whitespace."""
    return _TOKEN.findall(text.lower())


def _ngrams(tokens: Sequence[str], order: int) -> Counter:
    return Counter(tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1))


def bleu4(candidate: str, references: list[str], smooth: bool = True) -> float:
    """4-gram BLEU with brevity penalty.

    When an n-gram order (n >= 2) has zero matches, smoothing adds one to
    that order's numerator and denominator; unigram precision is never
    smoothed, so sharing no unigram scores 0.
    """
    cand = tokenize(candidate)
    refs = [tokenize(r) for r in references if r is not None]
    if not cand:
        log.warning("bleu4: empty candidate scores 0")
        return 0.0
    if not refs or all(not r for r in refs):
        log.warning("bleu4: empty reference set scores 0")
        return 0.0
    log_precisions = []
    for order in range(1, 5):
        cand_counts = _ngrams(cand, order)
        total = sum(cand_counts.values())
        clipped: Counter = Counter()
        for ref in refs:
            ref_counts = _ngrams(ref, order)
            for gram, count in cand_counts.items():
                clipped[gram] = max(clipped[gram], min(count, ref_counts.get(gram, 0)))
        matched = sum(clipped.values())
        if matched == 0:
            if order == 1 or not smooth:
                return 0.0
            matched, total = matched + 1, total + 1
        log_precisions.append(math.log(matched / total))
    # closest reference length; ties go to the shorter reference
    closest = min((abs(len(r) - len(cand)), len(r)) for r in refs)[1]
    brevity = 1.0 if len(cand) >= closest else math.exp(1.0 - closest / len(cand))
    return brevity * math.exp(sum(log_precisions) / 4.0)


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token_a in a:
        current = [0]
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(candidate: str, reference: str) -> tuple[float, float, float]:
    """LCS precision, recall and F1 over the shared tokenization."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand and not ref:
        log.warning("rouge_l: both strings empty")
        return (0.0, 0.0, 0.0)
    if not cand or not ref:
        return (0.0, 0.0, 0.0)
    lcs = _lcs_length(cand, ref)
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return (precision, recall, f1)


# -- answerability-weighted BLEU ---------------------------------------------


@dataclass(frozen=True)
class QBleuConfig:
    delta: float
    weights: dict[str, float]
    question_words: frozenset[str]
    function_words: frozenset[str]

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigError("delta must lie in [0, 1]")
        expected = {"ner", "qt", "re", "fw"}
        if set(self.weights) != expected:
            raise ConfigError(f"weights must cover exactly {sorted(expected)}")
        if abs(sum(self.weights.values()) - 1.0) > 1e-9:
            raise ConfigError("component weights must sum to 1")
        if not self.question_words or not self.function_words:
            raise ConfigError("question/function word lexicons must be non-empty")


def load_metric_config(path: Path | str | None = None) -> dict:
    if path is None:
        raw = resources.files("bloomqg.data").joinpath("metric_config.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    return json.loads(raw)


def qbleu_config_from(config: dict | None = None) -> QBleuConfig:
    config = config or load_metric_config()
    section = config.get("qbleu")
    if not section:
        raise ConfigError("metric config lacks a 'qbleu' section")
    return QBleuConfig(
        delta=section["delta"],
        weights=dict(section["weights"]),
        question_words=frozenset(section["question_words"]),
        function_words=frozenset(section["function_words"]),
    )


def answerability_components(text: str, cfg: QBleuConfig) -> dict[str, Counter]:
    """Partition tokens into entity / question-word / content / function bags.

    Entities are capitalized tokens off the sentence start (a lexicon-free
    stand-in for an NER pass, recorded in the config fingerprint).
    """
    bags = {"ner": Counter(), "qt": Counter(), "re": Counter(), "fw": Counter()}
    for position, token in enumerate(_CASED_TOKEN.findall(text)):
        lowered = token.lower()
        if position > 0 and token[:1].isupper():
            bags["ner"][lowered] += 1
        elif lowered in cfg.question_words:
            bags["qt"][lowered] += 1
        elif lowered in cfg.function_words:
            bags["fw"][lowered] += 1
        elif lowered.isalnum():
            bags["re"][lowered] += 1
    return bags


def q_bleu4(candidate: str, reference: str, cfg: QBleuConfig | None = None) -> float:
    """Interpolation of component-wise answerability and BLEU-4."""
    cfg = cfg or qbleu_config_from()
    cand_bags = answerability_components(candidate, cfg)
    ref_bags = answerability_components(reference, cfg)
    weighted_p = weighted_r = active_weight = 0.0
    for name, weight in cfg.weights.items():
        cand_bag, ref_bag = cand_bags[name], ref_bags[name]
        cand_total, ref_total = sum(cand_bag.values()), sum(ref_bag.values())
        if cand_total == 0 and ref_total == 0:
            continue
        matched = sum((cand_bag & ref_bag).values())
        weighted_p += weight * (matched / cand_total if cand_total else 0.0)
        weighted_r += weight * (matched / ref_total if ref_total else 0.0)
        active_weight += weight
    if active_weight > 0:
        precision = weighted_p / active_weight
        recall = weighted_r / active_weight
        answerability = (
            2 * precision * recall / (precision + recall) if precision + recall else 0.0
        )
    else:
        answerability = 0.0
    return cfg.delta * answerability + (1.0 - cfg.delta) * bleu4(candidate, [reference])


# -- model-backed scorer adapters ---------------------------------------------


@runtime_checkable
class ScorerContract(Protocol):
    identity: str

    def score(self, candidate: str, paired_text: str) -> float: ...


def model_scores(
    candidates: Sequence[str],
    references: Sequence[str],
    contexts: Sequence[str],
    pairing: str,
    scorer: ScorerContract,
) -> list[float]:
    """Route each candidate with its reference or its context to the scorer."""
    if pairing not in ("reference", "context"):
        raise ValueError(f"pairing must be 'reference' or 'context', got {pairing!r}")
    paired = references if pairing == "reference" else contexts
    if len(paired) != len(candidates):
        raise ValueError("candidates and paired texts must align")
    return [scorer.score(candidate, other) for candidate, other in zip(candidates, paired)]


# -- inter-annotator agreement --------------------------------------------------


def krippendorff_alpha(matrix: Sequence[Sequence]) -> float:
    """Krippendorff's alpha for nominal data; rows are items, columns raters.

    Missing cells are ``None`` and are excluded pairwise; items with fewer
    than two ratings do not contribute. Raises when fewer than two ratings
    overlap anywhere.
    """
    unit_counts: list[Counter] = []
    for row in matrix:
        values = [v for v in row if v is not None]
        if len(values) >= 2:
            unit_counts.append(Counter(values))
    if not unit_counts:
        raise UndefinedValueError("alpha needs at least one item rated by two raters")
    totals: Counter = Counter()
    for counts in unit_counts:
        totals.update(counts)
    n = sum(totals.values())
    observed = 0.0
    for counts in unit_counts:
        m_u = sum(counts.values())
        disagreements = sum(
            counts[c] * counts[k] for c in counts for k in counts if c != k
        )
        observed += disagreements / (m_u - 1)
    observed /= n
    expected = sum(
        totals[c] * totals[k] for c in totals for k in totals if c != k
    ) / (n * (n - 1))
    if expected == 0.0:
        # no label variation anywhere: treat as perfect agreement
        return 1.0
    return 1.0 - observed / expected


# -- corpus-level evaluation -----------------------------------------------------


@dataclass
class MetricReport:
    corpus: dict[str, float]
    per_sample: list[dict]
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"corpus": self.corpus, "per_sample": self.per_sample, "metadata": self.metadata}

    def table(self) -> str:
        """Human-readable corpus table mirroring the standard column names."""
        order = ["Q-B4", "R-L", "B4", "BE.S", "CTC", "BA.S"]
        columns = [c for c in order if c in self.corpus]
        columns += [c for c in sorted(self.corpus) if c not in columns]
        header = " | ".join(f"{c:>8}" for c in columns)
        values = " | ".join(f"{self.corpus[c]:>8.4f}" for c in columns)
        lines = [header, "-" * len(header), values]
        omitted = self.metadata.get("omitted", [])
        if omitted:
            lines.append(f"omitted: {', '.join(omitted)}")
        return "\n".join(lines)


def _config_fingerprint(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def evaluate_corpus(
    generated: Sequence[dict],
    gold,
    config: dict | None = None,
    scorers: dict[str, tuple[str, ScorerContract]] | None = None,
) -> MetricReport:
    """Score generated questions against gold samples.

    ``generated`` rows follow the generated-question JSONL schema and align
    to gold samples on the (context, answer, skill) key; when several beam
    rows share a key the lowest beam rank wins. ``scorers`` maps a column
    name to (pairing, scorer). Unaligned rows are listed in the metadata and
    excluded from the means.
    """
    if not generated:
        raise ValueError("no generated records to evaluate")
    config = config or load_metric_config()
    qcfg = qbleu_config_from(config)

    gold_index = {}
    for sample in gold:
        gold_index[(sample.context, sample.answer, str(sample.skill))] = sample

    chosen: dict[tuple, dict] = {}
    unaligned = []
    for row in generated:
        key = (row["context"], row["answer"], row["skill"])
        if key not in gold_index:
            unaligned.append(row.get("question", "")[:60])
            continue
        best = chosen.get(key)
        if best is None or row.get("beam_rank", 0) < best.get("beam_rank", 0):
            chosen[key] = row
    if not chosen:
        raise ValueError("no generated record aligned with the gold set")

    per_sample = []
    candidates, references, contexts = [], [], []
    for key, row in chosen.items():
        sample = gold_index[key]
        candidate = row["question"]
        scores = {
            "Q-B4": q_bleu4(candidate, sample.question, qcfg),
            "R-L": rouge_l(candidate, sample.question)[2],
            "B4": bleu4(candidate, [sample.question]),
        }
        per_sample.append(
            {"context": sample.context, "answer": sample.answer, "skill": str(sample.skill), **scores}
        )
        candidates.append(candidate)
        references.append(sample.question)
        contexts.append(sample.context)

    omitted = []
    for column, (pairing, scorer) in (scorers or {}).items():
        if scorer is None:
            omitted.append(column)
            continue
        try:
            values = model_scores(candidates, references, contexts, pairing, scorer)
        except Exception as exc:
            log.warning("scorer %s unavailable: %s", column, exc)
            omitted.append(column)
            continue
        for entry, value in zip(per_sample, values):
            entry[column] = float(value)

    metric_names = [k for k in per_sample[0] if k not in ("context", "answer", "skill")]
    corpus = {
        name: sum(entry[name] for entry in per_sample) / len(per_sample)
        for name in metric_names
    }
    metadata = {
        "n_samples": len(per_sample),
        "config_fingerprint": _config_fingerprint(config),
        "omitted": omitted,
        "unaligned": unaligned,
    }
    return MetricReport(corpus, per_sample, metadata)


def write_report(report: MetricReport, path: Path | str) -> None:
    """Write the corpus table plus a per-sample JSONL sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        report.table() + "\n\n" + json.dumps(
            {"corpus": report.corpus, "metadata": report.metadata}, indent=2
        ) + "\n",
        encoding="utf-8",
    )
    sidecar = path.with_suffix(path.suffix + ".samples.jsonl")
    with open(sidecar, "w", encoding="utf-8") as handle:
        for entry in report.per_sample:
            handle.write(json.dumps(entry, ensure_ascii=False) + "\n")
