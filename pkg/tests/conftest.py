import json
from importlib import resources
from pathlib import Path

import pytest

from bloomqg.analyzers import FixtureRecognizer, FixtureRoleLabeler
from bloomqg.corpus import read_samples_jsonl
from bloomqg.generator import GeneratorRecord, SerializationMode, TrainingConfig, train
from bloomqg.generator.backend import BackendConfig
from bloomqg.lm import SeededStubBackend
from bloomqg.prompting import elicit_chain
from bloomqg.templates import TemplateRegistry

TESTS_DIR = Path(__file__).parent


def _data_text(name: str) -> str:
    return resources.files("bloomqg.data").joinpath(name).read_text("utf-8")


@pytest.fixture(scope="session")
def registry() -> TemplateRegistry:
    return TemplateRegistry.default()


@pytest.fixture(scope="session")
def golden_prompts() -> dict:
    return json.loads((TESTS_DIR / "data" / "golden_prompts.json").read_text("utf-8"))


@pytest.fixture(scope="session")
def analyzer_tables() -> dict:
    return json.loads(_data_text("analyzer_fixtures.json"))


@pytest.fixture(scope="session")
def fixture_ner(analyzer_tables) -> FixtureRecognizer:
    return FixtureRecognizer(analyzer_tables["ner"])


@pytest.fixture(scope="session")
def fixture_srl(analyzer_tables) -> FixtureRoleLabeler:
    return FixtureRoleLabeler(analyzer_tables["srl"])


@pytest.fixture(scope="session")
def toy_train():
    with resources.as_file(resources.files("bloomqg.data") / "toy_corpus" / "train.jsonl") as p:
        return read_samples_jsonl(p)


@pytest.fixture(scope="session")
def toy_dev():
    with resources.as_file(resources.files("bloomqg.data") / "toy_corpus" / "dev.jsonl") as p:
        return read_samples_jsonl(p)


@pytest.fixture(scope="session")
def stub_lm() -> SeededStubBackend:
    return SeededStubBackend()


def make_chain_records(samples, registry, backend, mode=SerializationMode.FULL):
    """Attach an elicited chain to each sample and wrap as generator records."""
    records = []
    for sample in samples:
        chain = elicit_chain(sample.context, sample.skill, backend, registry=registry)
        records.append(
            GeneratorRecord(
                context=sample.context,
                answer=sample.answer,
                skill=sample.skill,
                chain=chain,
                question=sample.question,
                mode=mode,
            )
        )
    return records


@pytest.fixture(scope="session")
def overfit_run(tmp_path_factory, toy_train, registry, stub_lm):
    """The 100-record overfit training run shared by the heavier tests.

    Returns (artifact, records, epoch_losses): the trained artifact, the
    training records (with chains), and per-epoch mean losses from the log.
    """
    records = make_chain_records(toy_train[:100], registry, stub_lm)
    out_dir = tmp_path_factory.mktemp("overfit-artifact")
    cfg = TrainingConfig(
        learning_rate=8e-4,
        batch_size=16,
        max_iterations=280,
        max_sequence_length=384,
        seed=13,
        eval_every=None,
        log_every=1,
    )
    artifact = train(
        records, cfg, out_dir, backend_config=BackendConfig(dropout=0.0)
    )
    import csv

    with open(out_dir / "training_log.csv", newline="") as handle:
        rows = [(int(r["step"]), float(r["loss"])) for r in csv.DictReader(handle)]
    steps_per_epoch = (len(records) + cfg.batch_size - 1) // cfg.batch_size
    epoch_losses = []
    for start in range(0, len(rows), steps_per_epoch):
        bucket = rows[start : start + steps_per_epoch]
        if bucket:
            epoch_losses.append(sum(loss for _, loss in bucket) / len(bucket))
    return artifact, records, epoch_losses
