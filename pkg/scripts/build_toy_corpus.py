#!/usr/bin/env python3
"""Build the bundled toy corpus and analyzer fixtures.

Deterministic: re-running reproduces the shipped files byte for byte.
The corpus mimics the narrative-QA layout (sections, annotated questions)
with a small closed vocabulary so desk-scale models can learn it.
"""

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "bloomqg" / "data"

NAMES = ["Anna", "Timmy", "Greta", "Oskar", "Mira", "Bruno", "Lena", "Felix", "Nora", "Ivan", "Clara", "Hugo"]
PLACES = ["Willowbrook", "Stonebridge", "Greenhollow", "Maplewood", "Riverdale", "Thornfield"]
COMPANIONS = ["grey cat", "small dog", "tame raven", "old goat"]
LANDMARKS = ["stone well", "apple tree", "wooden gate", "river bend"]
ACTIONS = [
    ("baked a honey cake", "bake a honey cake"),
    ("hid in the old barn", "hide in the old barn"),
    ("crossed the wide river", "cross the wide river"),
    ("climbed the stone tower", "climb the stone tower"),
    ("planted a rose garden", "plant a rose garden"),
    ("built a wooden boat", "build a wooden boat"),
    ("gathered red berries", "gather red berries"),
    ("painted the front door", "paint the front door"),
]
CAUSES = [
    "the king asked for help",
    "winter was coming soon",
    "the harvest had failed",
    "a storm was near",
    "the bridge had broken",
    "the well had run dry",
]
OUTCOMES = [
    "the village held a great feast",
    "the animals returned to the meadow",
    "the gate was finally repaired",
    "the lanterns were lit again",
    "the garden bloomed all summer",
    "the mill started turning again",
]
FEELINGS = ["happy", "proud", "grateful", "hopeful", "peaceful", "cheerful"]
FUTURES = [
    "visit the market",
    "guard the orchard",
    "learn to fish",
    "help the baker",
    "watch the stars",
    "plant more trees",
]

OPTIONAL_LABELS = ["Character", "Setting", "Feeling", "Outcome resolution", "Prediction"]


def build_story(rng, story_id):
    """One story with several questions per (context, skill) where possible.

    Both protagonists act, feel, and plan, so the same context carries e.g.
    two Action questions with different answers. A generator that ignores the
    answer slot cannot fit this corpus.
    """
    a, b = rng.sample(NAMES, 2)
    place = rng.choice(PLACES)
    companion = rng.choice(COMPANIONS)
    landmark = rng.choice(LANDMARKS)
    action_a, action_a_inf = rng.choice(ACTIONS)
    action_b, action_b_inf = rng.choice([x for x in ACTIONS if x[0] != action_a])
    cause_a = rng.choice(CAUSES)
    cause_b = rng.choice([c for c in CAUSES if c != cause_a])
    outcome = rng.choice(OUTCOMES)
    feeling_a = rng.choice(FEELINGS)
    feeling_b = rng.choice([f for f in FEELINGS if f != feeling_a])
    future_a = rng.choice(FUTURES)
    future_b = rng.choice([f for f in FUTURES if f != future_a])

    sections = {
        1: f"{a} lived in {place} with a {companion}.",
        2: (
            f"One morning {a} met {b} by the {landmark}. "
            f"{a} {action_a} because {cause_a}. "
            f"Then {b} {action_b} because {cause_b}."
        ),
        3: (
            f"After that, {outcome}. {a} felt {feeling_a} and promised to {future_a}. "
            f"{b} felt {feeling_b} and planned to {future_b}."
        ),
    }
    # each label maps to its question variants; two-variant labels differ
    # only in which protagonist they ask about
    variants = {
        "Character": [
            (f"Who met {b} by the {landmark}?", a, [2]),
            (f"Who {action_b} that morning?", b, [2]),
        ],
        "Setting": [(f"Where did {a} live?", f"In {place}", [1])],
        "Action": [
            (f"What did {a} do after meeting {b}?", f"{a} {action_a}", [2]),
            (f"What did {b} do that morning?", f"{b} {action_b}", [2]),
        ],
        "Feeling": [
            (f"How did {a} feel at the end?", feeling_a, [3]),
            (f"How did {b} feel at the end?", feeling_b, [3]),
        ],
        "Causal relationship": [
            (f"Why did {a} {action_a_inf}?", f"Because {cause_a}", [2]),
            (f"Why did {b} {action_b_inf}?", f"Because {cause_b}", [2]),
        ],
        "Outcome resolution": [
            (f"What happened after {a} {action_a_inf}?", outcome, [3])
        ],
        "Prediction": [
            (f"What will {a} do next?", f"{a} will {future_a}", [3]),
            (f"What will {b} do next?", f"{b} will {future_b}", [3]),
        ],
    }
    labels = ["Action", "Action", "Causal relationship", "Causal relationship"]
    for label in rng.sample(OPTIONAL_LABELS, k=rng.randint(2, 3)):
        count = 2 if len(variants[label]) > 1 and rng.random() < 0.7 else 1
        labels.extend([label] * count)
    picked: dict[str, int] = {}
    records = []
    for label in labels:
        index = picked.get(label, 0)
        if index >= len(variants[label]):
            continue
        picked[label] = index + 1
        question, answer, section_ids = variants[label][index]
        context = " ".join(sections[s] for s in sorted(section_ids))
        records.append(
            {
                "story_id": story_id,
                "section_ids": section_ids,
                "context": context,
                "question": question,
                "answer": answer,
                "annotation": label,
            }
        )
    return records


def write_split(rng, name, n_stories, offset):
    rows = []
    for i in range(n_stories):
        rows.extend(build_story(rng, f"toy-{offset + i:04d}"))
    for row in rows:
        row["skill"] = {
            "Character": "remember",
            "Setting": "remember",
            "Action": "understand",
            "Feeling": "evaluate",
            "Causal relationship": "analyze",
            "Outcome resolution": "analyze",
            "Prediction": "create",
        }[row["annotation"]]
        row["split"] = name
    out = DATA / "toy_corpus" / f"{name}.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
    print(f"{name}: {len(rows)} records from {n_stories} stories -> {out}")
    return rows


def build_analyzer_fixtures():
    sentences_entities = {
        "Timmy met Anna in Warsaw.": ["Timmy", "Anna", "Warsaw"],
        "Timmy got in the hamper quickly.": ["Timmy"],
        "Anna saw Anna.": ["Anna", "Anna"],
        "The troll lived under the bridge.": [],
        "Greta carried the basket to Stonebridge.": ["Greta", "Stonebridge"],
        "Oskar and Mira repaired the wooden gate.": ["Oskar", "Mira"],
        "The rain fell all night.": [],
        "Bruno found a lantern near the river bend.": ["Bruno"],
        "Lena promised to visit Riverdale with Felix.": ["Lena", "Riverdale", "Felix"],
        "Nora felt proud of the rose garden.": ["Nora"],
    }
    ner = {}
    for sentence, surfaces in sentences_entities.items():
        entities = []
        cursor = 0
        for surface in surfaces:
            start = sentence.index(surface, cursor)
            entities.append(
                {"surface": surface, "label": "ENT", "start": start, "end": start + len(surface)}
            )
            cursor = start + len(surface)
        ner[sentence] = entities

    srl = {
        "Timmy met Anna in Warsaw.": [
            {"verb": "met", "subject": "Timmy", "object": "Anna in Warsaw"}
        ],
        "Timmy got in the hamper quickly.": [
            {"verb": "got", "subject": "Timmy", "object": "in the hamper"}
        ],
        "Anna saw Anna.": [{"verb": "saw", "subject": "Anna", "object": "Anna"}],
        "The troll lived under the bridge.": [
            {"verb": "lived", "subject": "The troll", "object": "under the bridge"}
        ],
        "Greta carried the basket to Stonebridge.": [
            {"verb": "carried", "subject": "Greta", "object": "the basket to Stonebridge"}
        ],
        "Oskar and Mira repaired the wooden gate.": [
            {"verb": "repaired", "subject": "Oskar and Mira", "object": "the wooden gate"}
        ],
        "The rain fell all night.": [
            {"verb": "fell", "subject": "The rain", "object": "all night"}
        ],
        "Bruno found a lantern near the river bend.": [
            {"verb": "found", "subject": "Bruno", "object": "a lantern near the river bend"}
        ],
        "Lena promised to visit Riverdale with Felix.": [
            {"verb": "promised", "subject": "Lena", "object": "to visit Riverdale with Felix"},
            {"verb": "visit", "subject": None, "object": "Riverdale with Felix"},
        ],
        "Nora felt proud of the rose garden.": [
            {"verb": "felt", "subject": "Nora", "object": "proud of the rose garden"},
            {"verb": "sighed", "subject": None, "object": None},
        ],
    }
    out = DATA / "analyzer_fixtures.json"
    out.write_text(json.dumps({"ner": ner, "srl": srl}, indent=2, ensure_ascii=False), encoding="utf-8")
    print(f"analyzer fixtures -> {out}")


def build_schema_fixture():
    labels = [
        "Character", "Character", "Setting", "Action", "Action", "Action",
        "Feeling", "Causal relationship", "Outcome resolution", "Prediction",
    ]
    skills = {
        "Character": "remember", "Setting": "remember", "Action": "understand",
        "Feeling": "evaluate", "Causal relationship": "analyze",
        "Outcome resolution": "analyze", "Prediction": "create",
    }
    out = DATA / "schema_fixture.jsonl"
    with open(out, "w", encoding="utf-8") as handle:
        for i, label in enumerate(labels):
            row = {
                "story_id": f"fixture-{i:02d}",
                "section_ids": [1],
                "context": f"Fixture context number {i} for the schema check.",
                "question": f"Fixture question number {i}?",
                "answer": f"fixture answer {i}",
                "annotation": label,
                "skill": skills[label],
                "split": "train",
            }
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
    print(f"schema fixture (10 records) -> {out}")


def main():
    rng = random.Random(20240817)
    write_split(rng, "train", 120, 0)
    write_split(rng, "dev", 30, 1000)
    write_split(rng, "test", 30, 2000)
    build_analyzer_fixtures()
    build_schema_fixture()


if __name__ == "__main__":
    sys.exit(main())
