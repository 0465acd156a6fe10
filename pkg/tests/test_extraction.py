import logging

import pytest

from bloomqg.analyzers import FixtureRoleLabeler
from bloomqg.extraction import (
    ENTITY_SKILLS,
    EVENT_SKILLS,
    AnswerCandidate,
    ClassifierConfig,
    ExtractionTriple,
    build_augmented_dataset,
    extract_entity_answers,
    extract_event_answers,
    multi_label_targets,
    predict_skills,
    read_triples_jsonl,
    sample_combinations,
    train_skill_classifier,
    write_triples_jsonl,
)
from bloomqg.generator import QuestionCandidate
from bloomqg.skills import Skill


class FakeClassifier:
    def __init__(self, scores):
        self.scores = {Skill.from_string(k) if isinstance(k, str) else k: v for k, v in scores.items()}

    def predict_scores(self, context):
        return dict(self.scores)


def test_train_classifier_covers_all_skills(toy_train, toy_dev):
    clf = train_skill_classifier(toy_train[:200], ClassifierConfig(seed=1), toy_dev[:60])
    scores = clf.predict_scores(toy_train[0].context)
    assert set(scores) == set(Skill)
    assert all(0.0 <= v <= 1.0 for v in scores.values())
    assert clf.dev_f1 is not None and set(clf.dev_f1) == {str(s) for s in Skill}


def test_train_classifier_empty_errors():
    with pytest.raises(ValueError):
        train_skill_classifier([])


def test_multi_label_targets_union_per_context(toy_train):
    contexts, targets = multi_label_targets(toy_train)
    assert len(contexts) == len(targets)
    by_context = dict(zip(contexts, targets))
    for sample in toy_train:
        assert sample.skill in by_context[sample.context]


def test_single_skill_contexts_give_one_hot_targets(toy_train):
    sample = toy_train[0]
    contexts, targets = multi_label_targets([sample])
    assert targets == [{sample.skill}]


def test_classifier_handles_absent_skill(caplog, toy_train):
    only_action = [s for s in toy_train if s.skill is Skill.UNDERSTAND][:30]
    with caplog.at_level(logging.WARNING):
        clf = train_skill_classifier(only_action)
    assert "single class" in caplog.text
    scores = clf.predict_scores(only_action[0].context)
    assert set(scores) == set(Skill)


def test_predict_skills_thresholding():
    clf = FakeClassifier({"remember": 0.9, "understand": 0.2, "analyze": 0.7,
                          "create": 0.1, "evaluate": 0.3})
    assert predict_skills("ctx", clf, 0.5) == {Skill.REMEMBER, Skill.ANALYZE}


def test_predict_skills_argmax_fallback():
    clf = FakeClassifier({"remember": 0.1, "understand": 0.4, "analyze": 0.2,
                          "create": 0.1, "evaluate": 0.3})
    assert predict_skills("ctx", clf, 0.5) == {Skill.UNDERSTAND}


def test_predict_skills_threshold_range():
    clf = FakeClassifier({str(s): 0.5 for s in Skill})
    with pytest.raises(ValueError):
        predict_skills("ctx", clf, 1.5)
    with pytest.raises(ValueError):
        predict_skills("ctx", clf, 0.0)


def test_entity_answers_fixture(fixture_ner):
    found = extract_entity_answers("Timmy met Anna in Warsaw.", fixture_ner)
    assert [(a.text, a.span) for a in found] == [
        ("Timmy", (0, 5)), ("Anna", (10, 14)), ("Warsaw", (18, 24)),
    ]
    assert all(a.source == "NER" for a in found)


def test_entity_answers_substring_invariant(fixture_ner, analyzer_tables):
    for sentence in analyzer_tables["ner"]:
        for answer in extract_entity_answers(sentence, fixture_ner):
            start, end = answer.span
            assert sentence[start:end] == answer.text


def test_entity_answers_dedup_keeps_first_span(fixture_ner):
    found = extract_entity_answers("Anna saw Anna.", fixture_ner)
    assert len(found) == 1
    assert found[0].span == (0, 4)


def test_entity_answers_empty(fixture_ner):
    assert extract_entity_answers("The rain fell all night.", fixture_ner) == []


def test_event_answers_composition(fixture_srl):
    found = extract_event_answers("Timmy got in the hamper quickly.", fixture_srl)
    assert [a.text for a in found] == ["Timmy got in the hamper"]
    assert found[0].source == "SRL" and found[0].span is None


def test_event_answers_skip_bare_predicates(fixture_srl):
    found = extract_event_answers("Nora felt proud of the rose garden.", fixture_srl)
    # the frozen second frame has neither subject nor object and is dropped
    assert [a.text for a in found] == ["Nora felt proud of the rose garden"]


def test_event_answers_two_predicates_in_order(fixture_srl):
    found = extract_event_answers("Lena promised to visit Riverdale with Felix.", fixture_srl)
    assert len(found) == 2
    assert found[0].text.startswith("Lena promised")
    assert found[1].text == "visit Riverdale with Felix"


def test_event_answers_contain_their_verb(fixture_srl, analyzer_tables):
    labeler = FixtureRoleLabeler(analyzer_tables["srl"])
    for sentence, frames in analyzer_tables["srl"].items():
        answers = extract_event_answers(sentence, labeler)
        with_args = [f for f in frames if f.get("subject") or f.get("object")]
        assert len(answers) == len(with_args)
        for answer, frame in zip(answers, with_args):
            assert frame["verb"] in answer.text.split()


def test_sample_combinations_cross_product(fixture_ner, fixture_srl):
    clf = FakeClassifier({"remember": 0.9, "understand": 0.1, "analyze": 0.8,
                          "create": 0.6, "evaluate": 0.2})
    triples = sample_combinations("Timmy met Anna in Warsaw.", clf, fixture_ner, fixture_srl)
    # REMEMBER -> 3 entities; ANALYZE and CREATE -> 1 event each
    assert len(triples) == 5
    assert [str(t.skill) for t in triples] == ["remember"] * 3 + ["analyze", "create"]


def test_sample_combinations_path_discipline(fixture_ner, fixture_srl, analyzer_tables):
    clf = FakeClassifier({str(s): 0.9 for s in Skill})
    for sentence in analyzer_tables["ner"]:
        for triple in sample_combinations(sentence, clf, fixture_ner, fixture_srl):
            if triple.skill in ENTITY_SKILLS:
                assert triple.answer.source == "NER"
                start, end = triple.answer.span
                assert sentence[start:end] == triple.answer.text
            else:
                assert triple.skill in EVENT_SKILLS
                assert triple.answer.source == "SRL"


def test_sample_combinations_factorization_soundness(fixture_ner, fixture_srl, toy_train, toy_dev):
    clf = train_skill_classifier(toy_train[:150], ClassifierConfig(seed=3))
    for sentence in list(fixture_ner.table)[:5]:
        triples = sample_combinations(sentence, clf, fixture_ner, fixture_srl, 0.5)
        admitted = predict_skills(sentence, clf, 0.5)
        entity_texts = {a.text for a in extract_entity_answers(sentence, fixture_ner)}
        event_texts = {a.text for a in extract_event_answers(sentence, fixture_srl)}
        for triple in triples:
            assert triple.skill in admitted
            expected = entity_texts if triple.skill in ENTITY_SKILLS else event_texts
            assert triple.answer.text in expected


def test_sample_combinations_empty_context(fixture_ner, fixture_srl):
    clf = FakeClassifier({str(s): 0.9 for s in Skill})
    with pytest.raises(ValueError):
        sample_combinations("", clf, fixture_ner, fixture_srl)


def test_sample_combinations_no_candidates_is_empty(fixture_ner, fixture_srl):
    clf = FakeClassifier({"remember": 0.9, "understand": 0.1, "analyze": 0.1,
                          "create": 0.1, "evaluate": 0.1})
    # only REMEMBER is admitted and this sentence has no frozen entities
    triples = sample_combinations("The troll lived under the bridge.", clf, fixture_ner, fixture_srl)
    assert triples == []


# -- augmented dataset -------------------------------------------------------------


def _mock_generator(n_beams=8):
    def fn(triple):
        return [
            QuestionCandidate(f"What about {triple.answer.text} v{i}?", i, -float(i))
            for i in range(n_beams)
        ]

    return fn


def _triples(k):
    out = []
    for i in range(k):
        out.append(
            ExtractionTriple(
                f"Context number {i}.",
                Skill.REMEMBER,
                AnswerCandidate(f"entity {i}", "NER", (0, 6)),
            )
        )
    return out


def test_build_augmented_dataset_counts(toy_train):
    augmented = build_augmented_dataset(toy_train[:5], _triples(10), _mock_generator(), 20, seed=4)
    assert len(augmented.synthetic) == 20
    assert all(s.synthetic for s in augmented.synthetic)
    assert len(augmented.base) == 5
    assert len(augmented.all_samples) == 25


def test_build_augmented_dataset_clamps_with_warning(toy_train, caplog):
    with caplog.at_level(logging.WARNING):
        augmented = build_augmented_dataset(
            toy_train[:2], _triples(10), _mock_generator(), 10_000, seed=4
        )
    assert len(augmented.synthetic) == 80
    assert "pool holds 80" in caplog.text


def test_build_augmented_dataset_seed_determinism(toy_train):
    a = build_augmented_dataset(toy_train[:2], _triples(10), _mock_generator(), 20, seed=9)
    b = build_augmented_dataset(toy_train[:2], _triples(10), _mock_generator(), 20, seed=9)
    assert a.synthetic == b.synthetic
    c = build_augmented_dataset(toy_train[:2], _triples(10), _mock_generator(), 20, seed=10)
    assert c.synthetic != a.synthetic


def test_build_augmented_dataset_dedup():
    def duplicating(triple):
        return [QuestionCandidate("Same question?", 0, -1.0)] * 4

    augmented = build_augmented_dataset([], _triples(3), duplicating, 12, seed=0)
    assert len(augmented.synthetic) == 3  # one per context after dedup
    keys = {(s.context, s.question) for s in augmented.synthetic}
    assert len(keys) == len(augmented.synthetic)


def test_build_augmented_dataset_rejects_bad_n():
    with pytest.raises(ValueError):
        build_augmented_dataset([], _triples(1), _mock_generator(), 0, seed=0)


def test_triples_jsonl_round_trip(tmp_path):
    triples = _triples(4)
    path = tmp_path / "triples.jsonl"
    write_triples_jsonl(triples, path)
    assert read_triples_jsonl(path) == triples
