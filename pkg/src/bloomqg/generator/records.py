"""Generator input records and their serialized string forms.

Four serialization modes cover the ablation grid: plain concatenation,
special-token delimiters, a natural-language prompt, and the full form that
combines both. The full and symbol modes are loss-free and round-trip back
into their fields.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from ..errors import SerializationError, TemplateError
from ..prompting import ThoughtChain
from ..skills import Skill
from ..templates import BLANK, FOCUS, fill_focus_template, fill_knowledge_template

CXT = "[CXT]"
ANS = "[ANS]"
SKL = "[SKL]"
ASK = "Ask a question:"


class SerializationMode(Enum):
    CONCAT = "concat"
    SYMBOL = "symbol"
    PROMPT = "prompt"
    FULL = "full"

    @classmethod
    def from_string(cls, name: str) -> "SerializationMode":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown serialization mode: {name!r}") from None


@dataclass(frozen=True)
class GeneratorRecord:
    context: str
    answer: str
    skill: Skill
    chain: ThoughtChain | None = None
    question: str | None = None
    mode: SerializationMode = SerializationMode.FULL

    def __post_init__(self):
        if self.chain is not None and self.chain.context != self.context:
            raise ValueError("chain was elicited for a different context")


def augment_context(context: str, chain: ThoughtChain | None) -> str:
    """Append the filled focus and knowledge templates to the context.

    Without a chain the context passes through unchanged (the
    no-knowledge ablation path).
    """
    if chain is None:
        return context
    return augment_context_multi(context, [chain])


def augment_context_multi(context: str, chains) -> str:
    """Append several chains' filled templates in ranking order."""
    segments = [context]
    for chain in chains:
        if chain.context != context:
            raise ValueError("chain was elicited for a different context")
        segments.append(fill_focus_template(chain.pair, chain.focus.text))
        segments.append(
            fill_knowledge_template(chain.pair, chain.focus.text, chain.knowledge.text)
        )
    augmented = " ".join(segments)
    if BLANK in augmented or FOCUS in augmented:
        raise TemplateError("placeholder token leaked into augmented context")
    return augmented


def serialize_input(record: GeneratorRecord) -> str:
    """Render the (context, answer, skill) triple in the record's mode."""
    if not record.context:
        raise ValueError("record context must be non-empty")
    if not record.answer:
        raise ValueError("record answer must be non-empty")
    c_aug = augment_context(record.context, record.chain)
    answer = record.answer
    skill = str(record.skill)
    mode = record.mode
    if mode is SerializationMode.FULL:
        return f"{CXT} {c_aug} {ANS} {answer} {SKL} {skill} {ASK}"
    if mode is SerializationMode.SYMBOL:
        return f"{CXT} {c_aug} {ANS} {answer} {SKL} {skill}"
    if mode is SerializationMode.PROMPT:
        return f"context: {c_aug} answer: {answer} skill: {skill} {ASK}"
    return f"{c_aug} {answer} {skill}"


def parse_input(serialized: str, mode: SerializationMode) -> tuple[str, str, Skill]:
    """Recover (context, answer, skill) from a FULL or SYMBOL serialization."""
    if mode not in (SerializationMode.FULL, SerializationMode.SYMBOL):
        raise SerializationError(f"mode {mode.value} is not parseable")
    text = serialized
    if mode is SerializationMode.FULL:
        suffix = f" {ASK}"
        if not text.endswith(suffix):
            raise SerializationError(f"missing trailing prompt {ASK!r}")
        text = text[: -len(suffix)]
    for marker in (CXT, ANS, SKL):
        if marker not in text:
            raise SerializationError(f"missing marker token {marker!r}")
    if not text.startswith(f"{CXT} "):
        raise SerializationError(f"serialized input must start with {CXT!r}")
    body = text[len(CXT) + 1 :]
    context, _, rest = body.partition(f" {ANS} ")
    answer, _, skill_name = rest.partition(f" {SKL} ")
    if not rest or not skill_name:
        raise SerializationError("marker tokens out of order")
    return context, answer, Skill.from_string(skill_name)


def truncate_for_budget(
    record: GeneratorRecord, token_count, limit: int
) -> GeneratorRecord | None:
    """Shrink the raw context from its right end until the input fits.

    ``token_count`` maps a string to its token length under the training
    tokenizer. The elicited focus/knowledge text, answer, skill, and prompt
    segments are preserved; when the budget cannot be met even with the raw
    context emptied to a single word, ``None`` is returned and the caller
    skips the record.
    """
    if token_count(serialize_input(record)) <= limit:
        return record
    words = record.context.split()
    lo, hi = 1, len(words)
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        candidate = _with_context(record, " ".join(words[:mid]))
        if token_count(serialize_input(candidate)) <= limit:
            best = candidate
            lo = mid + 1
        else:
            hi = mid - 1
    return best


def _with_context(record: GeneratorRecord, context: str) -> GeneratorRecord:
    # the chain's augmentation text survives truncation; only the raw context
    # shrinks, so rebind the chain to the shortened context
    chain = record.chain
    if chain is not None:
        chain = replace(chain, context=context)
    return replace(record, context=context, chain=chain)
