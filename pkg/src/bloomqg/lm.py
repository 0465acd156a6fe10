"""Causal-LM backend contract plus deterministic stand-ins.

The elicitation pipeline only needs ``generate(prompt, sampling) ->
[(completion, sequence_log_prob), ...]`` with determinism under a fixed
``(prompt, seed)``. Real models plug in through :class:`HFCausalBackend`;
tests and offline runs use the seeded stub, which builds completions out of
words taken from the prompt itself.
"""

from __future__ import annotations

import hashlib
import math
import random
import re
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from .errors import BackendError


@dataclass(frozen=True)
class SamplingConfig:
    top_p: float = 0.2
    num_samples: int = 5
    max_new_tokens: int = 16
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError("top_p must lie in (0, 1]")
        if self.num_samples < 1 or self.max_new_tokens < 1:
            raise ValueError("num_samples and max_new_tokens must be positive")


FOCUS_SAMPLING = SamplingConfig(top_p=0.2, num_samples=5, max_new_tokens=16)
KNOWLEDGE_SAMPLING = SamplingConfig(top_p=0.5, num_samples=10, max_new_tokens=48)


@runtime_checkable
class LMBackend(Protocol):
    def generate(self, prompt: str, sampling: SamplingConfig) -> list[tuple[str, float]]: ...


class CannedBackend:
    """Returns pre-scripted completions per prompt; handy in unit tests."""

    def __init__(self, table: dict[str, list[tuple[str, float]]], default: list[tuple[str, float]] | None = None):
        self.table = table
        self.default = default
        self.calls: list[str] = []

    def generate(self, prompt: str, sampling: SamplingConfig) -> list[tuple[str, float]]:
        self.calls.append(prompt)
        if prompt in self.table:
            return list(self.table[prompt][: sampling.num_samples])
        if self.default is not None:
            return list(self.default[: sampling.num_samples])
        raise BackendError(f"no scripted completion for prompt: {prompt[:60]!r}")


class SeededStubBackend:
    """Deterministic pseudo-LM that completes prompts with prompt words.

    Each sample draws a short span of words from the prompt's leading segment
    (the context, for elicitation prompts), seeded by a hash of
    ``(seed, sample index, prompt, top_p)``. Scores fall with span length so
    selection has a stable, meaningful ordering.
    """

    _word = re.compile(r"[A-Za-z][A-Za-z'-]*")

    def generate(self, prompt: str, sampling: SamplingConfig) -> list[tuple[str, float]]:
        head = prompt.split(" From the context: ", 1)[0]
        words = self._word.findall(head) or self._word.findall(prompt)
        if not words:
            return []
        out = []
        for i in range(sampling.num_samples):
            digest = hashlib.sha256(
                f"{sampling.seed}|{i}|{sampling.top_p}|{prompt}".encode("utf-8")
            ).digest()
            rng = random.Random(int.from_bytes(digest[:8], "big"))
            length = min(rng.randint(1, 4), sampling.max_new_tokens, len(words))
            start = rng.randrange(len(words))
            span = [words[(start + k) % len(words)] for k in range(length)]
            text = " ".join(span)
            log_prob = -(0.3 * length + rng.random())
            out.append((text, log_prob))
        return out


class HFCausalBackend:
    """Adapter over a HuggingFace causal LM (e.g. a local GPT-2 checkpoint).

    The model stays frozen; only sampling happens here. Requires the
    ``transformers`` package and a locally available model.
    """

    def __init__(self, model_path: str, device: str = "cpu"):
        try:
            import torch
            from transformers import AutoModelForCausalLM, AutoTokenizer
        except ImportError as exc:
            raise BackendError("transformers is required for HFCausalBackend") from exc
        self.torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_path)
        self.model = AutoModelForCausalLM.from_pretrained(model_path).to(device).eval()
        self.device = device

    def generate(self, prompt: str, sampling: SamplingConfig) -> list[tuple[str, float]]:
        torch = self.torch
        torch.manual_seed(sampling.seed)
        inputs = self.tokenizer(prompt, return_tensors="pt").to(self.device)
        with torch.no_grad():
            result = self.model.generate(
                **inputs,
                do_sample=True,
                top_p=sampling.top_p,
                num_return_sequences=sampling.num_samples,
                max_new_tokens=sampling.max_new_tokens,
                output_scores=True,
                return_dict_in_generate=True,
                pad_token_id=self.tokenizer.eos_token_id,
            )
        prompt_len = inputs["input_ids"].shape[1]
        transition = self.model.compute_transition_scores(
            result.sequences, result.scores, normalize_logits=True
        )
        completions = []
        for row, scores in zip(result.sequences, transition):
            text = self.tokenizer.decode(row[prompt_len:], skip_special_tokens=True)
            finite = [float(s) for s in scores if math.isfinite(float(s))]
            completions.append((text, sum(finite)))
        return completions
