import random

import pytest
from hypothesis import given, strategies as st

from bloomqg.errors import BackendError, EmptyResultError, StyleError
from bloomqg.lm import CannedBackend, SamplingConfig, SeededStubBackend
from bloomqg.prompting import (
    CONTEXT_JOINER,
    FocusCandidate,
    KnowledgeCandidate,
    ThoughtChain,
    build_focus_prompt,
    build_knowledge_prompt,
    chain_from_cache_record,
    chain_to_cache_record,
    clean_completion,
    elicit_chain,
    entity_focuses,
    generate_focuses,
    generate_knowledge,
    read_chain_cache,
    select_chain,
    write_chain_cache,
)
from bloomqg.skills import Skill
from bloomqg.templates import TemplateRegistry, TemplateStyle, fill_focus_template

CONTEXT = "The princess climbed out the window."


def test_focus_prompt_matches_display(registry):
    pair = registry.pairs_for(Skill.REMEMBER)[0]
    assert (
        build_focus_prompt(CONTEXT, pair)
        == "The princess climbed out the window. From the context: What is the definition of"
    )


def test_focus_prompt_golden_over_registry(registry, golden_prompts):
    context = golden_prompts["context"]
    for entry in golden_prompts["entries"]:
        pair = registry[entry["pair_index"]]
        if entry["style"] == "prefix":
            assert build_focus_prompt(context, pair) == entry["focus_prompt"]
        else:
            with pytest.raises(StyleError):
                build_focus_prompt(context, pair)


def test_focus_prompt_rejects_empty_context(registry):
    with pytest.raises(ValueError):
        build_focus_prompt("", registry.pairs[0])


def test_focus_prompt_prefix_preservation(registry):
    for pair in registry.pairs:
        if pair.style is not TemplateStyle.PREFIX:
            continue
        prompt = build_focus_prompt(CONTEXT, pair)
        assert prompt.startswith(CONTEXT)
        assert prompt.count(CONTEXT_JOINER) == 1
        assert "<blank>" not in prompt and "<focus>" not in prompt


def test_knowledge_prompt_golden_over_registry(registry, golden_prompts):
    context = golden_prompts["context"]
    focus = FocusCandidate(golden_prompts["focus"], "LM", 0, -1.0)
    for entry in golden_prompts["entries"]:
        pair = registry[entry["pair_index"]]
        assert build_knowledge_prompt(context, pair, focus) == entry["knowledge_prompt"]


def test_knowledge_prompt_contains_filled_focus_template(registry):
    focus = FocusCandidate("the princess", "NER", 9)
    pair = registry[9]  # cloze: How would <blank> feel afterwards?
    prompt = build_knowledge_prompt(CONTEXT, pair, focus)
    assert prompt == (
        "The princess climbed out the window. From the context: "
        "How would the princess feel afterwards? the princess felt"
    )
    assert fill_focus_template(pair, focus.text) in prompt


def test_entity_focuses_fixture(fixture_ner):
    found = entity_focuses("Timmy met Anna in Warsaw.", fixture_ner)
    assert [f.text for f in found] == ["Timmy", "Anna", "Warsaw"]
    assert all(f.source == "NER" and f.log_prob is None for f in found)


def test_entity_focuses_deduplicates(fixture_ner):
    found = entity_focuses("Anna saw Anna.", fixture_ner)
    assert [f.text for f in found] == ["Anna"]


def test_entity_focuses_empty(fixture_ner):
    assert entity_focuses("The rain fell all night.", fixture_ner) == []


def test_entity_focuses_wraps_backend_failure():
    class Broken:
        def entities(self, text):
            raise RuntimeError("boom")

    with pytest.raises(BackendError, match="boom"):
        entity_focuses(CONTEXT, Broken())


def test_generate_focuses_shape_with_canned_backend(registry):
    backend = CannedBackend({}, default=[("the window", -1.0), ("the tower.", -2.0), ("", -9.0)])
    found = generate_focuses(CONTEXT, Skill.REMEMBER, backend, registry=registry)
    # 3 prefix templates x at most 2 usable completions (empty one dropped)
    assert 0 < len(found) <= 15
    assert all(f.text and "<" not in f.text for f in found)
    assert {f.pair_index for f in found} == {0, 1, 2}
    assert all(f.source == "LM" for f in found)


def test_generate_focuses_cloze_only_registry_uses_ner(registry, fixture_ner):
    cloze_only = TemplateRegistry([p for p in registry.pairs if p.style is TemplateStyle.CLOZE])
    found = generate_focuses(
        "Timmy met Anna in Warsaw.",
        Skill.ANALYZE,
        CannedBackend({}),  # would raise if the LM were consulted
        registry=cloze_only,
        ner=fixture_ner,
    )
    assert found and all(f.source == "NER" for f in found)
    assert {f.text for f in found} == {"Timmy", "Anna", "Warsaw"}


def test_generate_focuses_deterministic_under_seed(registry):
    backend = SeededStubBackend()
    cfg = SamplingConfig(top_p=0.2, num_samples=5, max_new_tokens=16, seed=11)
    first = generate_focuses(CONTEXT, Skill.UNDERSTAND, backend, cfg, registry=registry)
    second = generate_focuses(CONTEXT, Skill.UNDERSTAND, backend, cfg, registry=registry)
    assert first == second


def test_generate_focuses_all_degenerate_errors(registry):
    backend = CannedBackend({}, default=[("", -1.0), ("<blank>", -2.0)])
    with pytest.raises(EmptyResultError, match="remember"):
        generate_focuses(CONTEXT, Skill.REMEMBER, backend, registry=registry)


def test_generate_knowledge_dedup_and_scores(registry):
    pair = registry.pairs_for(Skill.REMEMBER)[0]
    focus = FocusCandidate("the window", "LM", 0, -0.5)
    backend = CannedBackend(
        {}, default=[("an opening", -1.0), ("an opening", -1.0), ("glass. And more", -2.0)]
    )
    found = generate_knowledge(CONTEXT, pair, focus, backend)
    assert [k.text for k in found] == ["an opening", "glass"]
    assert found[0].log_prob == -1.0
    assert all(k.focus == focus and k.pair_index == 0 for k in found)


def test_generate_knowledge_empty_errors(registry):
    pair = registry.pairs[0]
    focus = FocusCandidate("x", "LM", 0, -0.5)
    backend = CannedBackend({}, default=[("", -1.0)])
    with pytest.raises(EmptyResultError):
        generate_knowledge(CONTEXT, pair, focus, backend)


def test_clean_completion_truncates_at_terminators():
    assert clean_completion("  a tall tower. And then some") == "a tall tower"
    assert clean_completion("why?\nmore") == "why"
    assert clean_completion("plain phrase ") == "plain phrase"


def _chain_inputs(registry):
    f0 = FocusCandidate("alpha", "LM", 0, -2.0)
    f1 = FocusCandidate("beta", "LM", 1, -0.5)
    k0 = [KnowledgeCandidate("k-a", 0, f0, -1.0)]
    k1 = [KnowledgeCandidate("k-b", 1, f1, -0.5)]
    return [f0, f1], [k0, k1]


def test_select_chain_argmax(registry):
    focuses, knowledge = _chain_inputs(registry)
    chain = select_chain(CONTEXT, Skill.REMEMBER, focuses, knowledge, registry=registry)
    assert chain.focus.text == "beta" and chain.chain_score == -1.0
    assert chain.pair is registry[1]


def test_select_chain_tie_breaks_on_pair_index(registry):
    f0 = FocusCandidate("same", "LM", 0, -1.0)
    f2 = FocusCandidate("same", "LM", 2, -1.0)
    k0 = [KnowledgeCandidate("k", 0, f0, -1.0)]
    k2 = [KnowledgeCandidate("k", 2, f2, -1.0)]
    chain = select_chain(CONTEXT, Skill.REMEMBER, [f2, f0], [k2, k0], registry=registry)
    assert chain.knowledge.pair_index == 0


def test_select_chain_single_candidate(registry):
    focus = FocusCandidate("only", "NER", 0)
    knowledge = [KnowledgeCandidate("thing", 0, focus, -3.0)]
    chain = select_chain(CONTEXT, Skill.REMEMBER, [focus], [knowledge], registry=registry)
    assert chain.focus is focus
    # entity focuses score 0, so the chain score is the knowledge score
    assert chain.chain_score == -3.0


def test_select_chain_empty_errors(registry):
    with pytest.raises(EmptyResultError):
        select_chain(CONTEXT, Skill.REMEMBER, [], [], registry=registry)


def test_select_chain_permutation_invariant(registry):
    rng = random.Random(3)
    focuses, knowledge = _chain_inputs(registry)
    f_extra = FocusCandidate("gamma", "NER", 2)
    focuses = focuses + [f_extra]
    knowledge = knowledge + [[KnowledgeCandidate("k-c", 2, f_extra, -0.4)]]
    baseline = select_chain(CONTEXT, Skill.REMEMBER, focuses, knowledge, registry=registry)
    for _ in range(10):
        order = list(range(len(focuses)))
        rng.shuffle(order)
        shuffled = select_chain(
            CONTEXT,
            Skill.REMEMBER,
            [focuses[i] for i in order],
            [knowledge[i] for i in order],
            registry=registry,
        )
        assert shuffled == baseline


def test_chain_invariants(registry):
    focus = FocusCandidate("a", "LM", 0, -1.0)
    other = FocusCandidate("b", "LM", 0, -1.0)
    knowledge = KnowledgeCandidate("k", 0, other, -1.0)
    with pytest.raises(ValueError, match="different focus"):
        ThoughtChain(CONTEXT, Skill.REMEMBER, registry[0], focus, knowledge, -2.0)
    good = KnowledgeCandidate("k", 0, focus, -1.0)
    with pytest.raises(ValueError, match="different skill"):
        ThoughtChain(CONTEXT, Skill.CREATE, registry[0], focus, good, -2.0)


def test_elicit_chain_and_cache_round_trip(registry, fixture_ner, stub_lm, tmp_path):
    chain = elicit_chain(
        "Timmy met Anna in Warsaw.", Skill.ANALYZE, stub_lm, registry=registry, ner=fixture_ner
    )
    assert chain.skill is Skill.ANALYZE
    path = tmp_path / "cache.jsonl"
    write_chain_cache([chain], path)
    cache = read_chain_cache(path)
    record = cache[(chain_to_cache_record(chain)["context_hash"], "analyze")]
    rebuilt = chain_from_cache_record(record, "Timmy met Anna in Warsaw.", registry)
    assert rebuilt.focus.text == chain.focus.text
    assert rebuilt.knowledge.text == chain.knowledge.text
    assert rebuilt.pair is chain.pair


def test_no_placeholders_in_any_stub_prompt(registry, stub_lm):
    cfg = SamplingConfig(seed=5)
    for skill in Skill:
        focuses = generate_focuses(CONTEXT, skill, stub_lm, cfg, registry=registry)
        for focus in focuses:
            assert "<blank>" not in focus.text and "<focus>" not in focus.text


@given(seed=st.integers(min_value=0, max_value=2**31))
def test_stub_backend_deterministic(seed):
    backend = SeededStubBackend()
    cfg = SamplingConfig(top_p=0.5, num_samples=4, max_new_tokens=8, seed=seed)
    assert backend.generate(CONTEXT, cfg) == backend.generate(CONTEXT, cfg)


def test_rank_chains_orders_by_score(registry):
    from bloomqg.prompting import rank_chains

    focuses, knowledge = _chain_inputs(registry)
    ranked = rank_chains(CONTEXT, Skill.REMEMBER, focuses, knowledge, registry=registry)
    assert [c.chain_score for c in ranked] == [-1.0, -3.0]
    assert ranked[0].focus.text == "beta"
