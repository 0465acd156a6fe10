"""Command-line entry points for every pipeline stage."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import corpus
from .analyzers import CapitalizedSpanRecognizer, FixtureRecognizer, FixtureRoleLabeler, VerbLexiconRoleLabeler
from .extraction import (
    ClassifierConfig,
    TfidfSkillClassifier,
    build_augmented_dataset,
    read_triples_jsonl,
    sample_combinations,
    train_skill_classifier,
    write_triples_jsonl,
)
from .generator import (
    GenerationConfig,
    GeneratorRecord,
    SerializationMode,
    TrainingConfig,
    generate as generate_questions,
    train as train_generator,
)
from .generator.inference import question_record_json, write_question_jsonl
from .generator.training import ModelArtifact
from .lm import SeededStubBackend, SamplingConfig, FOCUS_SAMPLING, KNOWLEDGE_SAMPLING
from .metrics import evaluate_corpus, load_metric_config, write_report
from .prompting import (
    chain_from_cache_record,
    context_hash,
    elicit_chain,
    read_chain_cache,
    write_chain_cache,
)
from .skills import Skill
from .templates import TemplateRegistry

log = logging.getLogger(__name__)

_SKILL_NAMES = [str(s) for s in Skill]


def _read_jsonl(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def _make_lm_backend(name: str):
    if name == "stub":
        return SeededStubBackend()
    if name.startswith("hf:"):
        from .lm import HFCausalBackend

        return HFCausalBackend(name[3:])
    raise click.UsageError(f"unknown LM backend {name!r}; use 'stub' or 'hf:<model-path>'")


def _make_analyzers(fixtures: str | None):
    if fixtures:
        payload = json.loads(Path(fixtures).read_text(encoding="utf-8"))
        return FixtureRecognizer(payload["ner"]), FixtureRoleLabeler(payload["srl"])
    return CapitalizedSpanRecognizer(), VerbLexiconRoleLabeler()


def _records_from_samples(rows: list[dict], mode: SerializationMode, cache: dict | None, registry) -> list[GeneratorRecord]:
    records = []
    for row in rows:
        skill = Skill.from_string(row["skill"])
        chain = None
        if cache is not None:
            cached = cache.get((context_hash(row["context"]), str(skill)))
            if cached:
                chain = chain_from_cache_record(cached, row["context"], registry)
        records.append(
            GeneratorRecord(
                context=row["context"],
                answer=row["answer"],
                skill=skill,
                chain=chain,
                question=row.get("question"),
                mode=mode,
            )
        )
    return records


@click.group()
@click.option("--verbose", is_flag=True, help="Enable info-level logging.")
def main(verbose: bool):
    """Skill-conditioned question generation toolkit."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING)


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--split", required=True, type=click.Choice(corpus.SPLITS))
@click.option("--out", "out_path", required=True, type=click.Path())
def ingest(in_path: str, split: str, out_path: str):
    """Normalize a dataset directory into the JSONL contract."""
    samples = corpus.load_dataset(in_path, split)
    corpus.write_samples_jsonl(samples, out_path)
    click.echo(f"wrote {len(samples)} samples to {out_path}")


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--skill", "skills", multiple=True, type=click.Choice(_SKILL_NAMES))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", default=0, type=int)
@click.option("--lm-backend", default="stub", show_default=True)
@click.option("--analyzer-fixtures", type=click.Path(exists=True), default=None)
def elicit(in_path: str, skills, out_path: str, seed: int, lm_backend: str, analyzer_fixtures):
    """Elicit (focus, knowledge) chains for every context and skill."""
    rows = _read_jsonl(in_path)
    contexts = list(dict.fromkeys(row["context"] for row in rows))
    chosen = [Skill.from_string(s) for s in skills] or list(Skill)
    backend = _make_lm_backend(lm_backend)
    ner, _ = _make_analyzers(analyzer_fixtures)
    registry = TemplateRegistry.default()
    focus_cfg = SamplingConfig(
        FOCUS_SAMPLING.top_p, FOCUS_SAMPLING.num_samples, FOCUS_SAMPLING.max_new_tokens, seed
    )
    knowledge_cfg = SamplingConfig(
        KNOWLEDGE_SAMPLING.top_p, KNOWLEDGE_SAMPLING.num_samples, KNOWLEDGE_SAMPLING.max_new_tokens, seed
    )
    chains = []
    for context in contexts:
        for skill in chosen:
            chains.append(
                elicit_chain(
                    context, skill, backend,
                    registry=registry, ner=ner,
                    focus_cfg=focus_cfg, knowledge_cfg=knowledge_cfg,
                )
            )
    write_chain_cache(chains, out_path)
    click.echo(f"wrote {len(chains)} chains to {out_path}")


@main.command("train-qg")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--dev", "dev_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--mode", default="full", type=click.Choice([m.value for m in SerializationMode]))
@click.option("--cache", "cache_path", type=click.Path(exists=True), default=None)
@click.option("--max-iterations", default=2000, show_default=True, type=int)
@click.option("--batch-size", default=16, show_default=True, type=int)
@click.option("--learning-rate", default=5e-4, show_default=True, type=float)
@click.option("--max-sequence-length", default=384, show_default=True, type=int)
@click.option("--eval-every", default=0, show_default=True, type=int, help="0 disables dev evaluation.")
@click.option("--seed", default=0, type=int)
def train_qg(train_path, dev_path, out_dir, mode, cache_path, max_iterations, batch_size,
             learning_rate, max_sequence_length, eval_every, seed):
    """Fine-tune the question generator on serialized inputs."""
    registry = TemplateRegistry.default()
    cache = read_chain_cache(cache_path) if cache_path else None
    mode = SerializationMode.from_string(mode)
    records = _records_from_samples(_read_jsonl(train_path), mode, cache, registry)
    dev_records = (
        _records_from_samples(_read_jsonl(dev_path), mode, cache, registry) if dev_path else None
    )
    cfg = TrainingConfig(
        learning_rate=learning_rate,
        batch_size=batch_size,
        max_iterations=max_iterations,
        max_sequence_length=max_sequence_length,
        seed=seed,
        eval_every=eval_every or None,
    )
    artifact = train_generator(records, cfg, out_dir, dev_records=dev_records)
    click.echo(f"trained {max_iterations} steps; artifact at {artifact.path}")


@main.command("generate")
@click.option("--model", "model_dir", required=True, type=click.Path(exists=True))
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--cache", "cache_path", type=click.Path(exists=True), default=None)
@click.option("--beam-size", default=8, show_default=True, type=click.IntRange(min=1))
@click.option("--max-question-tokens", default=48, show_default=True, type=int)
@click.option("--top-only", is_flag=True, help="Keep only the best beam per input.")
def generate_cmd(model_dir, in_path, out_path, cache_path, beam_size, max_question_tokens, top_only):
    """Decode questions for (context, answer, skill) rows."""
    artifact = ModelArtifact.load(model_dir)
    registry = TemplateRegistry.default()
    cache = read_chain_cache(cache_path) if cache_path else None
    rows = _read_jsonl(in_path)
    records = _records_from_samples(rows, artifact.mode, cache, registry)
    gen = GenerationConfig(beam_size=beam_size, max_question_tokens=max_question_tokens,
                           keep_all_beams=not top_only)
    out_rows = []
    for record in records:
        for candidate in generate_questions(record, artifact, gen):
            out_rows.append(question_record_json(record, candidate))
    write_question_jsonl(out_rows, out_path)
    click.echo(f"wrote {len(out_rows)} question candidates to {out_path}")


@main.command("train-skill-clf")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--dev", "dev_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", default=0, type=int)
def train_skill_clf(train_path, dev_path, out_path, seed):
    """Train the multi-label skill classifier."""
    samples = corpus.read_samples_jsonl(train_path)
    dev = corpus.read_samples_jsonl(dev_path) if dev_path else None
    clf = train_skill_classifier(samples, ClassifierConfig(seed=seed), dev)
    clf.save(out_path)
    if clf.dev_f1:
        click.echo("dev F1: " + ", ".join(f"{k}={v:.3f}" for k, v in clf.dev_f1.items()))
    click.echo(f"classifier saved to {out_path}")


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--clf", "clf_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--threshold", default=0.5, show_default=True,
              type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True))
@click.option("--analyzer-fixtures", type=click.Path(exists=True), default=None)
def extract(in_path, clf_path, out_path, threshold, analyzer_fixtures):
    """Extract (context, skill, answer) triples from unlabeled passages."""
    clf = TfidfSkillClassifier.load(clf_path)
    ner, srl = _make_analyzers(analyzer_fixtures)
    contexts = list(dict.fromkeys(row["context"] for row in _read_jsonl(in_path)))
    triples = []
    for context in contexts:
        triples.extend(sample_combinations(context, clf, ner, srl, threshold))
    write_triples_jsonl(triples, out_path)
    click.echo(f"wrote {len(triples)} triples to {out_path}")


@main.command()
@click.option("--base", "base_path", required=True, type=click.Path(exists=True))
@click.option("--triples", "triples_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--n-select", required=True, type=click.IntRange(min=1))
@click.option("--beam-size", default=8, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, type=int)
@click.option("--lm-backend", default="stub", show_default=True)
def augment(base_path, triples_path, model_dir, out_path, n_select, beam_size, seed, lm_backend):
    """Generate synthetic questions for triples and augment the base set."""
    base = corpus.read_samples_jsonl(base_path)
    triples = read_triples_jsonl(triples_path)
    artifact = ModelArtifact.load(model_dir)
    registry = TemplateRegistry.default()
    backend = _make_lm_backend(lm_backend)
    gen = GenerationConfig(beam_size=beam_size, max_question_tokens=48, keep_all_beams=True)
    focus_cfg = SamplingConfig(0.2, 5, 16, seed)
    knowledge_cfg = SamplingConfig(0.5, 10, 48, seed)
    ner = CapitalizedSpanRecognizer()

    def generator_fn(triple):
        chain = elicit_chain(
            triple.context, triple.skill, backend,
            registry=registry, ner=ner, focus_cfg=focus_cfg, knowledge_cfg=knowledge_cfg,
        )
        record = GeneratorRecord(
            context=triple.context, answer=triple.answer.text, skill=triple.skill,
            chain=chain, mode=artifact.mode,
        )
        return generate_questions(record, artifact, gen)

    augmented = build_augmented_dataset(base, triples, generator_fn, n_select, seed)
    corpus.write_samples_jsonl(augmented.all_samples, out_path)
    click.echo(
        f"wrote {len(augmented.base)} base + {len(augmented.synthetic)} synthetic samples to {out_path}"
    )


@main.command()
@click.option("--generated", "generated_path", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
def evaluate(generated_path, gold_path, config_path, out_path):
    """Score generated questions against gold references."""
    generated = _read_jsonl(generated_path)
    gold = corpus.read_samples_jsonl(gold_path)
    config = load_metric_config(config_path)
    report = evaluate_corpus(generated, gold, config)
    write_report(report, out_path)
    click.echo(report.table())
    click.echo(f"report written to {out_path}")


@main.command("make-bundle")
@click.option("--questions", "question_specs", multiple=True, required=True,
              help="system=path pairs, repeatable.")
@click.option("--baseline", required=True)
@click.option("--n-samples", default=300, show_default=True, type=click.IntRange(min=1))
@click.option("--kinds", default="pairwise,skill,knowledge", show_default=True)
@click.option("--seed", default=0, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
def make_bundle(question_specs, baseline, n_samples, kinds, seed, out_path):
    """Assemble anonymized annotation tasks from per-system question files."""
    from .annotation.tasks import create_annotation_bundle, write_bundle

    questions = {}
    for spec in question_specs:
        if "=" not in spec:
            raise click.UsageError(f"--questions expects system=path, got {spec!r}")
        system, _, path = spec.partition("=")
        questions[system] = _read_jsonl(path)
    kind_set = {k.strip() for k in kinds.split(",") if k.strip()}
    tasks, manifest = create_annotation_bundle(questions, baseline, n_samples, kind_set, seed)
    write_bundle(tasks, manifest, out_path)
    click.echo(f"wrote {len(tasks)} tasks to {out_path}")


@main.command("serve-annotation")
@click.option("--bundle", "bundle_path", required=True, type=click.Path(exists=True))
@click.option("--store-path", required=True, type=click.Path())
@click.option("--port", default=8345, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--token", default=None)
def serve_annotation(bundle_path, store_path, port, host, token):
    """Serve annotation tasks over HTTP."""
    import uvicorn

    from .annotation.service import create_app
    from .annotation.store import JudgmentStore
    from .annotation.tasks import read_bundle

    tasks, manifest = read_bundle(bundle_path)
    store = JudgmentStore(tasks, store_path)
    app = create_app(store, token)
    click.echo(f"serving {len(tasks)} tasks (bundle seed {manifest['seed']}) on {host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--bundle", "bundle_path", required=True, type=click.Path(exists=True))
@click.option("--store-path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default=None)
def report(bundle_path, store_path, out_path):
    """Aggregate a judgment log offline."""
    from .annotation.aggregate import build_report, render_text
    from .annotation.store import JudgmentStore
    from .annotation.tasks import read_bundle

    tasks, _ = read_bundle(bundle_path)
    store = JudgmentStore(tasks, store_path)
    result = build_report(store)
    payload = json.dumps(result.to_json(), indent=2, ensure_ascii=False)
    if out_path:
        Path(out_path).write_text(payload + "\n", encoding="utf-8")
        click.echo(render_text(result))
        click.echo(f"report written to {out_path}")
    else:
        click.echo(payload)


if __name__ == "__main__":
    sys.exit(main())
