"""Fine-tuning loop for the question generator.

Optimization follows the fixed recipe: AdamW with weight decay 5e-4 and
epsilon 1e-8, linear warmup over the first 10% of steps then linear decay to
zero, batch size 16, inputs capped at 384 tokens. The loss is the summed
per-sequence NLL averaged across the batch.
"""

from __future__ import annotations

import csv
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

import torch

from .backend import BackendConfig, TinySeq2SeqBackend, WordVocab
from .records import GeneratorRecord, SerializationMode, serialize_input, truncate_for_budget

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
FORMAT_VERSION = 1


@dataclass
class TrainingConfig:
    learning_rate: float = 5e-4
    warmup_fraction: float = 0.10
    weight_decay: float = 5e-4
    adam_epsilon: float = 1e-8
    batch_size: int = 16
    max_iterations: int = 40_000
    max_sequence_length: int = 384
    seed: int = 0
    eval_every: int | None = 2_000
    log_every: int = 50

    def __post_init__(self):
        if self.batch_size <= 0:
            raise ValueError("batch_size must be positive")
        if self.max_iterations <= 0 or self.max_sequence_length <= 0:
            raise ValueError("max_iterations and max_sequence_length must be positive")
        if not 0.0 < self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must lie in (0, 1)")
        if self.learning_rate <= 0 or self.weight_decay < 0 or self.adam_epsilon <= 0:
            raise ValueError("optimizer hyperparameters must be positive")


@dataclass
class ModelArtifact:
    """A trained checkpoint directory plus its manifest."""

    path: Path
    manifest: dict
    _backend: TinySeq2SeqBackend | None = field(default=None, repr=False, compare=False)

    @property
    def mode(self) -> SerializationMode:
        return SerializationMode.from_string(self.manifest["mode"])

    def backend(self) -> TinySeq2SeqBackend:
        if self._backend is None:
            self._backend = TinySeq2SeqBackend.load(self.path / "checkpoint")
        return self._backend

    @classmethod
    def load(cls, path: Path | str) -> "ModelArtifact":
        path = Path(path)
        manifest_file = path / MANIFEST_NAME
        if not manifest_file.exists():
            raise FileNotFoundError(f"no {MANIFEST_NAME} under {path}")
        manifest = json.loads(manifest_file.read_text(encoding="utf-8"))
        if manifest.get("format_version") != FORMAT_VERSION:
            raise ValueError(
                f"artifact format {manifest.get('format_version')!r} not supported "
                f"(expected {FORMAT_VERSION})"
            )
        return cls(path, manifest)


def _lr_lambda(total_steps: int, warmup_fraction: float):
    warmup = max(1, int(total_steps * warmup_fraction))

    def schedule(step: int) -> float:
        if step < warmup:
            return (step + 1) / warmup
        remaining = max(1, total_steps - warmup)
        return max(0.0, (total_steps - step) / remaining)

    return schedule


def prepare_training_pairs(
    records: list[GeneratorRecord], token_count, limit: int
) -> list[tuple[str, str]]:
    """Serialize records under the token budget; over-budget records are skipped."""
    pairs = []
    skipped = 0
    for record in records:
        if not record.question:
            raise ValueError("training records must carry a reference question")
        fitted = truncate_for_budget(record, token_count, limit)
        if fitted is None:
            skipped += 1
            continue
        pairs.append((serialize_input(fitted), record.question))
    if skipped:
        log.warning("skipped %d records whose inputs exceed %d tokens", skipped, limit)
    return pairs


def fit_pairs(
    pairs: list[tuple[str, str]],
    cfg: TrainingConfig,
    *,
    backend: TinySeq2SeqBackend | None = None,
    backend_config: BackendConfig | None = None,
    dev_pairs: list[tuple[str, str]] | None = None,
    checkpoint_dir: Path | None = None,
) -> tuple[TinySeq2SeqBackend, list[tuple[int, float, float]]]:
    """Core optimization loop over serialized (source, target) pairs.

    Returns the fitted backend plus the (step, loss, lr) log rows. With dev
    pairs and ``cfg.eval_every`` set, the best dev-ROUGE checkpoint is kept
    in ``checkpoint_dir``.
    """
    if not pairs:
        raise ValueError("no training pairs")
    torch.manual_seed(cfg.seed)
    if backend is None:
        vocab = WordVocab.build([s for s, _ in pairs] + [q for _, q in pairs])
        backend_config = backend_config or BackendConfig()
        backend_config.max_positions = max(
            backend_config.max_positions, cfg.max_sequence_length + 2
        )
        backend = TinySeq2SeqBackend(vocab, backend_config)

    optimizer = torch.optim.AdamW(
        backend.model.parameters(),
        lr=cfg.learning_rate,
        weight_decay=cfg.weight_decay,
        eps=cfg.adam_epsilon,
    )
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer, _lr_lambda(cfg.max_iterations, cfg.warmup_fraction)
    )

    rng = random.Random(cfg.seed)
    order = list(range(len(pairs)))
    log_rows: list[tuple[int, float, float]] = []
    best_dev = float("-inf")
    step = 0

    backend.model.train()
    while step < cfg.max_iterations:
        rng.shuffle(order)
        for start in range(0, len(order), cfg.batch_size):
            if step >= cfg.max_iterations:
                break
            batch = [pairs[i] for i in order[start : start + cfg.batch_size]]
            src, tgt_in, labels = backend.batch_tensors(
                [s for s, _ in batch], [t for _, t in batch]
            )
            loss = backend.sequence_nll(src, tgt_in, labels)
            optimizer.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(backend.model.parameters(), 1.0)
            optimizer.step()
            scheduler.step()
            step += 1
            lr = scheduler.get_last_lr()[0]
            if step == 1 or step % cfg.log_every == 0 or step == cfg.max_iterations:
                log_rows.append((step, float(loss.item()), lr))
            if dev_pairs and cfg.eval_every and step % cfg.eval_every == 0:
                dev_score = _dev_rouge(backend, dev_pairs)
                log.info("step %d dev rouge-l %.4f", step, dev_score)
                if dev_score > best_dev and checkpoint_dir is not None:
                    best_dev = dev_score
                    backend.save(checkpoint_dir)
                backend.model.train()

    if checkpoint_dir is not None:
        final_score = _dev_rouge(backend, dev_pairs) if dev_pairs and best_dev > float("-inf") else None
        # keep the best dev checkpoint unless the final weights match or beat it
        if final_score is None or final_score >= best_dev:
            backend.save(checkpoint_dir)
        else:
            backend = TinySeq2SeqBackend.load(checkpoint_dir)
    return backend, log_rows


def train(
    records: list[GeneratorRecord],
    cfg: TrainingConfig,
    out_dir: Path | str,
    *,
    backend: TinySeq2SeqBackend | None = None,
    backend_config: BackendConfig | None = None,
    dev_records: list[GeneratorRecord] | None = None,
) -> ModelArtifact:
    """Fine-tune on serialized (input, question) pairs and save an artifact.

    When no backend is supplied a fresh word-level one is built over the
    training texts. Checkpoint selection uses dev ROUGE-L every
    ``cfg.eval_every`` steps when dev records are given.
    """
    if not records:
        raise ValueError("training requires at least one record")
    modes = {record.mode for record in records}
    if len(modes) > 1:
        raise ValueError(f"records mix serialization modes: {sorted(m.value for m in modes)}")
    mode = modes.pop()

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    word_count = lambda text: len(text.split())
    pairs = prepare_training_pairs(records, word_count, cfg.max_sequence_length)
    if not pairs:
        raise ValueError("no record fits the token budget")
    dev_pairs = (
        prepare_training_pairs(dev_records, word_count, cfg.max_sequence_length)
        if dev_records
        else None
    )

    backend, log_rows = fit_pairs(
        pairs,
        cfg,
        backend=backend,
        backend_config=backend_config,
        dev_pairs=dev_pairs,
        checkpoint_dir=out_dir / "checkpoint",
    )

    with open(out_dir / "training_log.csv", "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["step", "loss", "learning_rate"])
        writer.writerows(log_rows)

    manifest = {
        "format_version": FORMAT_VERSION,
        "mode": mode.value,
        "special_tokens": ["[CXT]", "[ANS]", "[SKL]"],
        "special_tokens_atomic": True,
        "max_sequence_length": cfg.max_sequence_length,
        "seed": cfg.seed,
        "backend": "tiny-word-seq2seq",
        "n_training_records": len(pairs),
    }
    (out_dir / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return ModelArtifact(out_dir, manifest, backend)


def _dev_rouge(backend: TinySeq2SeqBackend, dev_pairs: list[tuple[str, str]], limit: int = 32) -> float:
    from ..metrics import rouge_l

    backend.model.eval()
    scores = []
    for source, reference in dev_pairs[:limit]:
        decoded = backend.beam_generate(source, beam_size=1, max_new_tokens=48)
        text = decoded[0][0] if decoded else ""
        scores.append(rouge_l(text, reference)[2])
    return sum(scores) / len(scores) if scores else 0.0
