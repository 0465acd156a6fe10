import csv
import json
from importlib import resources

import pytest
from hypothesis import given, strategies as st

from bloomqg.corpus import (
    QASample,
    canonicalize_annotation,
    load_dataset,
    read_samples_jsonl,
    write_samples_jsonl,
)
from bloomqg.errors import DatasetError, MappingError
from bloomqg.skills import (
    ANNOTATION_LABELS,
    ANNOTATION_TO_SKILL,
    Skill,
    map_annotation_to_skill,
    skill_histogram,
)

TABLE_MAPPING = {
    "Character": Skill.REMEMBER,
    "Setting": Skill.REMEMBER,
    "Action": Skill.UNDERSTAND,
    "Feeling": Skill.EVALUATE,
    "Causal relationship": Skill.ANALYZE,
    "Outcome resolution": Skill.ANALYZE,
    "Prediction": Skill.CREATE,
}


def test_skill_enum_is_a_rank_bijection():
    ranks = sorted(skill.rank for skill in Skill)
    assert ranks == [1, 2, 3, 4, 5]
    assert [str(s) for s in Skill] == ["remember", "understand", "analyze", "create", "evaluate"]


@pytest.mark.parametrize("label,expected", sorted(TABLE_MAPPING.items()))
def test_mapping_matches_schema_table(label, expected):
    assert map_annotation_to_skill(label) is expected


def test_mapping_total_over_the_seven_labels():
    assert set(ANNOTATION_LABELS) == set(TABLE_MAPPING)
    for label in ANNOTATION_LABELS:
        map_annotation_to_skill(label)


@given(st.text(max_size=30))
def test_mapping_rejects_everything_else(text):
    if text.strip() in ANNOTATION_TO_SKILL:
        return
    with pytest.raises(MappingError):
        map_annotation_to_skill(text)


def test_mapping_error_names_the_label():
    with pytest.raises(MappingError, match="Dialogue"):
        map_annotation_to_skill("Dialogue")


def test_mapping_trims_whitespace_but_stays_case_sensitive():
    assert map_annotation_to_skill("  Character ") is Skill.REMEMBER
    with pytest.raises(MappingError):
        map_annotation_to_skill("character")


def _sample(annotation: str, i: int = 0) -> QASample:
    return QASample(
        story_id=f"s{i}",
        section_ids=(1,),
        context="Some context.",
        question="Some question?",
        answer="an answer",
        annotation=annotation,
        skill=map_annotation_to_skill(annotation),
        split="train",
    )


def test_histogram_empty_is_all_zero():
    assert skill_histogram([]) == {skill: 0 for skill in Skill}


def test_histogram_single_action_sample():
    counts = skill_histogram([_sample("Action")])
    assert counts[Skill.UNDERSTAND] == 1
    assert sum(counts.values()) == 1


def test_histogram_partitions_and_increments_one_bucket():
    samples = [_sample(label, i) for i, label in enumerate(ANNOTATION_LABELS)]
    counts = skill_histogram(samples)
    assert sum(counts.values()) == len(samples)
    more = counts.copy()
    extended = skill_histogram(samples + [_sample("Prediction", 99)])
    bumped = [s for s in Skill if extended[s] != more[s]]
    assert bumped == [Skill.CREATE]
    assert extended[Skill.CREATE] == more[Skill.CREATE] + 1


def test_schema_fixture_histogram_exact():
    with resources.as_file(resources.files("bloomqg.data") / "schema_fixture.jsonl") as path:
        samples = read_samples_jsonl(path)
    assert len(samples) == 10
    assert skill_histogram(samples) == {
        Skill.REMEMBER: 3,
        Skill.UNDERSTAND: 3,
        Skill.ANALYZE: 2,
        Skill.CREATE: 1,
        Skill.EVALUATE: 1,
    }


def test_sample_invariants_enforced():
    with pytest.raises(DatasetError, match="empty context"):
        QASample("s", (1,), "", "q", "a", "Action", Skill.UNDERSTAND, "train")
    with pytest.raises(DatasetError, match="empty answer"):
        QASample("s", (1,), "c", "q", "", "Action", Skill.UNDERSTAND, "train")
    with pytest.raises(DatasetError, match="does not match"):
        QASample("s", (1,), "c", "q", "a", "Action", Skill.CREATE, "train")


def test_canonicalize_annotation_variants():
    assert canonicalize_annotation("causal relationship") == "Causal relationship"
    assert canonicalize_annotation(" outcome resolution ") == "Outcome resolution"
    assert canonicalize_annotation("Causal rel.") == "Causal relationship"
    with pytest.raises(MappingError):
        canonicalize_annotation("Dialogue")


def _write_story_dir(root, split="train"):
    story_dir = root / split
    story_dir.mkdir(parents=True)
    with open(story_dir / "tale-story.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["section", "text"])
        writer.writerow([1, "Anna lived by the mill."])
        writer.writerow([2, "One day Anna met Bruno."])
        writer.writerow([3, "They baked bread together."])
    with open(story_dir / "tale-questions.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["question", "answer1", "attribute1", "cor_section"])
        writer.writerow(["Who met Bruno?", "Anna", "character", "2"])
        writer.writerow(["What did they do?", "baked bread", "action", "2,3"])
    return story_dir


def test_load_dataset_from_story_csvs(tmp_path):
    _write_story_dir(tmp_path)
    samples = load_dataset(tmp_path, "train")
    assert len(samples) == 2
    assert samples[0].skill is Skill.REMEMBER
    assert samples[0].context == "One day Anna met Bruno."
    # referenced sections join with single spaces in document order
    assert samples[1].context == "One day Anna met Bruno. They baked bread together."
    assert samples[1].section_ids == (2, 3)


def test_load_dataset_is_deterministic(tmp_path):
    _write_story_dir(tmp_path)
    assert load_dataset(tmp_path, "train") == load_dataset(tmp_path, "train")


def test_load_dataset_empty_directory(tmp_path):
    assert load_dataset(tmp_path, "train") == []


def test_load_dataset_unknown_split(tmp_path):
    with pytest.raises(ValueError, match="unknown split"):
        load_dataset(tmp_path, "validation")


def test_load_dataset_unknown_annotation_names_label(tmp_path):
    story_dir = _write_story_dir(tmp_path)
    with open(story_dir / "tale-questions.csv", "a", newline="") as handle:
        csv.writer(handle).writerow(["Said what?", "words", "Dialogue", "1"])
    with pytest.raises(MappingError, match="Dialogue"):
        load_dataset(tmp_path, "train")


def test_load_dataset_missing_field_names_story(tmp_path):
    story_dir = _write_story_dir(tmp_path)
    with open(story_dir / "tale-questions.csv", "a", newline="") as handle:
        csv.writer(handle).writerow(["Who?", "", "character", "1"])
    with pytest.raises(DatasetError, match="tale"):
        load_dataset(tmp_path, "train")


def test_load_dataset_accepts_val_alias_for_dev(tmp_path):
    rows = [_sample("Action").to_json()]
    with open(tmp_path / "val.jsonl", "w") as handle:
        for row in rows:
            row["split"] = "dev"
            handle.write(json.dumps(row) + "\n")
    samples = load_dataset(tmp_path, "dev")
    assert len(samples) == 1 and samples[0].split == "dev"


def test_jsonl_round_trip(tmp_path):
    samples = [_sample(label, i) for i, label in enumerate(ANNOTATION_LABELS)]
    path = tmp_path / "out.jsonl"
    write_samples_jsonl(samples, path)
    assert read_samples_jsonl(path) == samples


def test_jsonl_rejects_contradictory_skill(tmp_path):
    row = _sample("Action").to_json()
    row["skill"] = "create"
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps(row) + "\n")
    with pytest.raises(DatasetError, match="contradicts"):
        read_samples_jsonl(path)


def test_toy_corpus_loads_and_covers_all_skills(toy_train):
    counts = skill_histogram(toy_train)
    assert sum(counts.values()) == len(toy_train)
    assert all(counts[skill] > 0 for skill in Skill)
