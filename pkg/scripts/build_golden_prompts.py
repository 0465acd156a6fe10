#!/usr/bin/env python3
"""Freeze golden strings for prompt construction and input serialization.

Expected values are assembled here by hand from the documented display
formats (plain string surgery on the template table), NOT by calling the
library, so the goldens stay an independent check against drift.
"""

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
TEMPLATES = json.loads((ROOT / "src/bloomqg/data/templates.json").read_text("utf-8"))

CONTEXT = "The troll lived under the bridge."
FOCUS = "the troll"
KNOWLEDGE = "a giant creature"
ANSWER = "the princess"


def stub(text: str, bindings=None) -> str:
    for name, value in (bindings or {}).items():
        text = text.replace(f"<{name}>", value, 1)
    return text.split("<blank>", 1)[0].rstrip()


def is_cloze(f_text: str) -> bool:
    tail = f_text.split("<blank>", 1)[1]
    return bool("".join(ch for ch in tail if not ch.isspace() and ch not in "?."))


def main():
    entries = []
    for index, row in enumerate(TEMPLATES):
        f_text, k_text, skill = row["f_text"], row["k_text"], row["skill"]
        filled_f = f_text.replace("<blank>", FOCUS, 1)
        filled_k = k_text.replace("<focus>", FOCUS, 1).replace("<blank>", KNOWLEDGE, 1)
        augmented = CONTEXT + " " + filled_f + " " + filled_k
        entry = {
            "pair_index": index,
            "skill": skill,
            "style": "cloze" if is_cloze(f_text) else "prefix",
            "focus_prompt": (
                None if is_cloze(f_text)
                else CONTEXT + " From the context: " + stub(f_text)
            ),
            "knowledge_prompt": (
                CONTEXT + " From the context: " + filled_f + " " + stub(k_text, {"focus": FOCUS})
            ),
            "augmented_context": augmented,
            "serialized": {
                "full": f"[CXT] {augmented} [ANS] {ANSWER} [SKL] {skill} Ask a question:",
                "symbol": f"[CXT] {augmented} [ANS] {ANSWER} [SKL] {skill}",
                "prompt": f"context: {augmented} answer: {ANSWER} skill: {skill} Ask a question:",
                "concat": f"{augmented} {ANSWER} {skill}",
            },
        }
        entries.append(entry)
    payload = {
        "context": CONTEXT,
        "focus": FOCUS,
        "knowledge": KNOWLEDGE,
        "answer": ANSWER,
        "entries": entries,
    }
    out = ROOT / "tests" / "data" / "golden_prompts.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(payload, indent=2, ensure_ascii=False), encoding="utf-8")
    print(f"wrote {len(entries)} golden entries to {out}")


if __name__ == "__main__":
    main()
