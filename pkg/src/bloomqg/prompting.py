"""Focus and knowledge elicitation through templated LM prompts.

For each sample the pipeline runs a two-step self-talk: prompt the LM with
the context plus a focus-template stub to get question focuses, then with the
filled focus template plus a knowledge-template stub to get knowledge text.
Cloze-style focus templates cannot be completed left-to-right, so their
focuses come from named entities instead. The best (focus, knowledge) pair
per sample is kept as a :class:`ThoughtChain`.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .analyzers import EntityRecognizer
from .errors import BackendError, EmptyResultError, StyleError, TemplateError
from .lm import FOCUS_SAMPLING, KNOWLEDGE_SAMPLING, LMBackend, SamplingConfig
from .skills import Skill
from .templates import (
    BLANK,
    FOCUS,
    TemplatePair,
    TemplateRegistry,
    TemplateStyle,
    completion_stub,
    fill_focus_template,
)

CONTEXT_JOINER = " From the context: "

_TERMINATORS = ".?!\n"


@dataclass(frozen=True)
class FocusCandidate:
    text: str
    source: str  # "LM" or "NER"
    pair_index: int
    log_prob: float | None = None

    @property
    def score(self) -> float:
        # entity-sourced focuses carry no LM score and count as 0
        return 0.0 if self.log_prob is None else self.log_prob


@dataclass(frozen=True)
class KnowledgeCandidate:
    text: str
    pair_index: int
    focus: FocusCandidate
    log_prob: float


@dataclass(frozen=True)
class ThoughtChain:
    context: str
    skill: Skill
    pair: TemplatePair
    focus: FocusCandidate
    knowledge: KnowledgeCandidate
    chain_score: float

    def __post_init__(self):
        if self.knowledge.focus != self.focus:
            raise ValueError("knowledge candidate was elicited for a different focus")
        if self.pair.skill is not self.skill:
            raise ValueError("template pair belongs to a different skill")


def build_focus_prompt(context: str, pair: TemplatePair) -> str:
    """Context + joiner + the focus-template stub, for prefix templates only."""
    if not context:
        raise ValueError("context must be non-empty")
    if pair.style is TemplateStyle.CLOZE:
        raise StyleError(
            f"cloze template {pair.f_text!r} cannot prompt a causal LM; "
            "use entity_focuses instead"
        )
    return context + CONTEXT_JOINER + completion_stub(pair.f_text, {})


def build_knowledge_prompt(context: str, pair: TemplatePair, focus: FocusCandidate) -> str:
    """Context + joiner + filled focus template + knowledge-template stub."""
    if not context:
        raise ValueError("context must be non-empty")
    filled = fill_focus_template(pair, focus.text)
    stub = completion_stub(pair.k_text, {"focus": focus.text})
    return context + CONTEXT_JOINER + filled + " " + stub


def clean_completion(text: str) -> str:
    """Trim a raw completion and cut it at the first sentence terminator."""
    text = text.strip()
    cut = len(text)
    for terminator in _TERMINATORS:
        idx = text.find(terminator)
        if idx != -1:
            cut = min(cut, idx)
    return text[:cut].strip()


def _usable(text: str) -> bool:
    return bool(text) and BLANK not in text and FOCUS not in text


def entity_focuses(
    context: str, ner: EntityRecognizer, pair_index: int = -1
) -> list[FocusCandidate]:
    """One candidate per distinct entity surface, in order of first appearance."""
    try:
        found = ner.entities(context)
    except BackendError:
        raise
    except Exception as exc:
        raise BackendError(f"entity recognizer failed: {exc}") from exc
    seen = set()
    out = []
    for entity in found:
        if entity.surface in seen or not _usable(entity.surface):
            continue
        seen.add(entity.surface)
        out.append(FocusCandidate(entity.surface, "NER", pair_index))
    return out


def generate_focuses(
    context: str,
    skill: Skill,
    backend: LMBackend,
    cfg: SamplingConfig | None = None,
    *,
    registry: TemplateRegistry | None = None,
    ner: EntityRecognizer | None = None,
) -> list[FocusCandidate]:
    """Sample focuses from every template of the skill.

    Prefix templates are completed by the LM (``cfg.num_samples`` draws each,
    cleaned and deduplicated per template); cloze templates take named
    entities. Raises :class:`EmptyResultError` when nothing usable remains.
    """
    cfg = cfg or FOCUS_SAMPLING
    registry = registry or TemplateRegistry.default()
    candidates: list[FocusCandidate] = []
    for index, pair in registry.indexed_pairs_for(skill):
        if pair.style is TemplateStyle.PREFIX:
            prompt = build_focus_prompt(context, pair)
            seen = set()
            for raw, log_prob in backend.generate(prompt, cfg):
                text = clean_completion(raw)
                if not _usable(text) or text in seen:
                    continue
                seen.add(text)
                candidates.append(FocusCandidate(text, "LM", index, log_prob))
        elif ner is not None:
            candidates.extend(entity_focuses(context, ner, index))
    if not candidates:
        raise EmptyResultError(f"no usable focus candidates for skill {skill}")
    return candidates


def generate_knowledge(
    context: str,
    pair: TemplatePair,
    focus: FocusCandidate,
    backend: LMBackend,
    cfg: SamplingConfig | None = None,
) -> list[KnowledgeCandidate]:
    """Sample knowledge completions for one (template, focus) pair."""
    cfg = cfg or KNOWLEDGE_SAMPLING
    prompt = build_knowledge_prompt(context, pair, focus)
    seen = set()
    out = []
    for raw, log_prob in backend.generate(prompt, cfg):
        text = clean_completion(raw)
        if not _usable(text) or text in seen:
            continue
        seen.add(text)
        out.append(KnowledgeCandidate(text, focus.pair_index, focus, log_prob))
    if not out:
        raise EmptyResultError(
            f"no usable knowledge candidates for focus {focus.text!r} ({pair.f_text!r})"
        )
    return out


def rank_chains(
    context: str,
    skill: Skill,
    focuses: Sequence[FocusCandidate],
    knowledge_lists: Sequence[Sequence[KnowledgeCandidate]],
    *,
    registry: TemplateRegistry | None = None,
) -> list[ThoughtChain]:
    """All (focus, knowledge) pairs as chains, best summed log-prob first.

    Entity-sourced focuses score 0. Ties break on pair index, then focus
    text, then knowledge text, so the ranking is order-independent.
    """
    registry = registry or TemplateRegistry.default()
    if len(focuses) != len(knowledge_lists):
        raise ValueError("focuses and knowledge_lists must be parallel")
    keyed = []
    for focus, knowledge_options in zip(focuses, knowledge_lists):
        for knowledge in knowledge_options:
            score = focus.score + knowledge.log_prob
            keyed.append(((-score, knowledge.pair_index, focus.text, knowledge.text),
                          focus, knowledge, score))
    if not keyed:
        raise EmptyResultError(f"no (focus, knowledge) pairs to select for skill {skill}")
    keyed.sort(key=lambda item: item[0])
    return [
        ThoughtChain(context, skill, registry[knowledge.pair_index], focus, knowledge, score)
        for _, focus, knowledge, score in keyed
    ]


def select_chain(
    context: str,
    skill: Skill,
    focuses: Sequence[FocusCandidate],
    knowledge_lists: Sequence[Sequence[KnowledgeCandidate]],
    *,
    registry: TemplateRegistry | None = None,
) -> ThoughtChain:
    """The single best chain; see :func:`rank_chains` for the full ranking."""
    return rank_chains(context, skill, focuses, knowledge_lists, registry=registry)[0]


def elicit_chain(
    context: str,
    skill: Skill,
    backend: LMBackend,
    *,
    registry: TemplateRegistry | None = None,
    ner: EntityRecognizer | None = None,
    focus_cfg: SamplingConfig | None = None,
    knowledge_cfg: SamplingConfig | None = None,
) -> ThoughtChain:
    """Run the full two-step elicitation for one (context, skill)."""
    registry = registry or TemplateRegistry.default()
    focuses = generate_focuses(context, skill, backend, focus_cfg, registry=registry, ner=ner)
    kept_focuses = []
    knowledge_lists = []
    for focus in focuses:
        pair = registry[focus.pair_index]
        try:
            options = generate_knowledge(context, pair, focus, backend, knowledge_cfg)
        except (EmptyResultError, TemplateError):
            continue
        kept_focuses.append(focus)
        knowledge_lists.append(options)
    if not kept_focuses:
        raise EmptyResultError(f"knowledge elicitation produced nothing for skill {skill}")
    return select_chain(context, skill, kept_focuses, knowledge_lists, registry=registry)


def context_hash(context: str) -> str:
    return hashlib.sha1(context.encode("utf-8")).hexdigest()


def chain_to_cache_record(chain: ThoughtChain) -> dict:
    return {
        "context_hash": context_hash(chain.context),
        "skill": str(chain.skill),
        "pair_index": chain.knowledge.pair_index,
        "focus": chain.focus.text,
        "knowledge": chain.knowledge.text,
        "chain_score": chain.chain_score,
    }


def write_chain_cache(chains: Iterable[ThoughtChain], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for chain in chains:
            handle.write(json.dumps(chain_to_cache_record(chain), ensure_ascii=False) + "\n")


def read_chain_cache(path: Path | str) -> dict[tuple[str, str], dict]:
    """Load cached elicitations keyed by (context_hash, skill)."""
    out = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            out[(record["context_hash"], record["skill"])] = record
    return out


def chain_from_cache_record(record: dict, context: str, registry: TemplateRegistry) -> ThoughtChain:
    """Rebuild a chain from a cache row; LM scores are not retained."""
    if context_hash(context) != record["context_hash"]:
        raise ValueError("cache record does not match the supplied context")
    pair = registry[record["pair_index"]]
    source = "NER" if pair.style is TemplateStyle.CLOZE else "LM"
    focus = FocusCandidate(record["focus"], source, record["pair_index"])
    knowledge = KnowledgeCandidate(
        record["knowledge"], record["pair_index"], focus, record["chain_score"]
    )
    return ThoughtChain(
        context, Skill.from_string(record["skill"]), pair, focus, knowledge, record["chain_score"]
    )
