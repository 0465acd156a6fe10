import json
from importlib import resources
from pathlib import Path

import pytest
from click.testing import CliRunner

from bloomqg.cli import main
from bloomqg.corpus import read_samples_jsonl


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def toy_dir(tmp_path_factory):
    """A dataset directory with normalized JSONL splits."""
    root = tmp_path_factory.mktemp("toyset")
    for split in ("train", "dev", "test"):
        data = resources.files("bloomqg.data").joinpath(f"toy_corpus/{split}.jsonl").read_text("utf-8")
        (root / f"{split}.jsonl").write_text(data)
    return root


def test_unknown_command_exits_2(runner):
    result = runner.invoke(main, ["frobnicate"])
    assert result.exit_code == 2


def test_ingest_normalizes(runner, toy_dir, tmp_path):
    out = tmp_path / "train.jsonl"
    result = runner.invoke(main, ["ingest", "--in", str(toy_dir), "--split", "train", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert len(read_samples_jsonl(out)) == 911


def test_ingest_unknown_split_exits_2(runner, toy_dir, tmp_path):
    result = runner.invoke(
        main, ["ingest", "--in", str(toy_dir), "--split", "validation", "--out", str(tmp_path / "x")]
    )
    assert result.exit_code == 2


def test_elicit_writes_cache(runner, toy_dir, tmp_path):
    contexts = tmp_path / "contexts.jsonl"
    rows = [json.loads(line) for line in (toy_dir / "train.jsonl").read_text().splitlines()[:3]]
    contexts.write_text("\n".join(json.dumps({"context": r["context"]}) for r in rows))
    out = tmp_path / "cache.jsonl"
    result = runner.invoke(main, [
        "elicit", "--in", str(contexts), "--skill", "analyze", "--out", str(out), "--seed", "3",
    ])
    assert result.exit_code == 0, result.output
    cache_rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert cache_rows and all(r["skill"] == "analyze" for r in cache_rows)
    assert set(cache_rows[0]) == {"context_hash", "skill", "pair_index", "focus", "knowledge", "chain_score"}


def test_elicit_is_seed_deterministic(runner, toy_dir, tmp_path):
    contexts = tmp_path / "c.jsonl"
    row = json.loads((toy_dir / "train.jsonl").read_text().splitlines()[0])
    contexts.write_text(json.dumps({"context": row["context"]}))
    outputs = []
    for name in ("one", "two"):
        out = tmp_path / f"{name}.jsonl"
        result = runner.invoke(main, [
            "elicit", "--in", str(contexts), "--out", str(out), "--seed", "9",
        ])
        assert result.exit_code == 0, result.output
        outputs.append(out.read_text())
    assert outputs[0] == outputs[1]


def test_extract_threshold_out_of_range_exits_2(runner, tmp_path):
    stub_in = tmp_path / "in.jsonl"
    stub_in.write_text(json.dumps({"context": "Some context."}) + "\n")
    stub_clf = tmp_path / "clf.joblib"
    stub_clf.write_text("placeholder")
    result = runner.invoke(main, [
        "extract", "--in", str(stub_in), "--clf", str(stub_clf),
        "--out", str(tmp_path / "t.jsonl"), "--threshold", "1.5",
    ])
    assert result.exit_code == 2
    assert "threshold" in result.output.lower()


def test_train_skill_clf_then_extract(runner, toy_dir, tmp_path):
    clf_path = tmp_path / "clf.joblib"
    result = runner.invoke(main, [
        "train-skill-clf", "--train", str(toy_dir / "train.jsonl"),
        "--dev", str(toy_dir / "dev.jsonl"), "--out", str(clf_path), "--seed", "2",
    ])
    assert result.exit_code == 0, result.output
    assert clf_path.exists()
    triples = tmp_path / "triples.jsonl"
    result = runner.invoke(main, [
        "extract", "--in", str(toy_dir / "dev.jsonl"), "--clf", str(clf_path),
        "--out", str(triples), "--threshold", "0.5",
    ])
    assert result.exit_code == 0, result.output
    rows = [json.loads(line) for line in triples.read_text().splitlines()]
    assert rows
    assert {"context", "skill", "answer", "answer_source", "span"} == set(rows[0])


def test_evaluate_command(runner, toy_dir, tmp_path):
    gold_rows = [json.loads(line) for line in (toy_dir / "dev.jsonl").read_text().splitlines()[:5]]
    generated = tmp_path / "generated.jsonl"
    with open(generated, "w") as handle:
        for row in gold_rows:
            handle.write(json.dumps({
                "context": row["context"], "answer": row["answer"], "skill": row["skill"],
                "question": row["question"], "beam_rank": 0, "score": -1.0,
                "focus": None, "knowledge": None, "mode": "full",
            }) + "\n")
    gold = tmp_path / "gold.jsonl"
    gold.write_text("\n".join(json.dumps(r) for r in gold_rows))
    report_path = tmp_path / "report.txt"
    result = runner.invoke(main, [
        "evaluate", "--generated", str(generated), "--gold", str(gold), "--out", str(report_path),
    ])
    assert result.exit_code == 0, result.output
    assert report_path.exists()
    assert "1.0000" in report_path.read_text()
    assert report_path.with_suffix(".txt.samples.jsonl").exists()


def test_make_bundle_and_report(runner, tmp_path):
    def rows(flavor):
        out = []
        for i in range(4):
            out.append({
                "context": f"Context {i}.", "answer": f"a{i}", "skill": "remember",
                "question": f"Question {flavor} {i}?", "beam_rank": 0, "score": -1.0,
                "focus": None, "knowledge": "some knowledge" if flavor == "deluxe" else None,
                "mode": "full",
            })
        return out

    qa = tmp_path / "sys_a.jsonl"
    qb = tmp_path / "sys_b.jsonl"
    qa.write_text("\n".join(json.dumps(r) for r in rows("plain")))
    qb.write_text("\n".join(json.dumps(r) for r in rows("deluxe")))
    bundle = tmp_path / "bundle.json"
    result = runner.invoke(main, [
        "make-bundle", "--questions", f"sys_a={qa}", "--questions", f"sys_b={qb}",
        "--baseline", "sys_a", "--n-samples", "2", "--kinds", "pairwise,knowledge",
        "--seed", "5", "--out", str(bundle),
    ])
    assert result.exit_code == 0, result.output
    payload = json.loads(bundle.read_text())
    assert payload["manifest"]["baseline"] == "sys_a"
    assert len(payload["tasks"]) == 8  # 2x3 aspects pairwise + 2 knowledge

    store_path = tmp_path / "log.jsonl"
    task = payload["tasks"][0]
    store_path.write_text(json.dumps({
        "task_id": task["task_id"], "annotator_id": "a1",
        "verdict": {"choice": "TIE"}, "timestamp": 0.0,
    }) + "\n")
    result = runner.invoke(main, [
        "report", "--bundle", str(bundle), "--store-path", str(store_path),
    ])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["counts"]["n_judgments"] == 1


def test_cli_help_lists_commands(runner):
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for command in ("ingest", "elicit", "train-qg", "generate", "train-skill-clf",
                    "extract", "augment", "evaluate", "serve-annotation", "report"):
        assert command in result.output
