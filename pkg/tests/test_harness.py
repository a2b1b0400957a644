import json
from dataclasses import replace

import pytest

from belinkit import harness
from belinkit.cli import main
from belinkit.corpus import dump_corpus
from belinkit.errors import SchemaError, StageError
from belinkit.harness import (
    ExperimentConfig, ModelSettings, RunRecord, SplitSettings, compare,
    relative_change, render_report, run_experiment,
)
from belinkit.metrics import METRIC_KEYS
from belinkit.model import DecodeConfig, TrainingConfig
from belinkit.preprocess import SEP
from belinkit.synthetic import sentiment_keyed_corpus


@pytest.fixture(scope="module")
def config(tmp_path_factory):
    root = tmp_path_factory.mktemp("exp")
    dump_corpus(sentiment_keyed_corpus(n_records=40, article_words=6), root / "c.jsonl")
    return ExperimentConfig(
        corpus_path=str(root / "c.jsonl"),
        split=SplitSettings(28, 4, 8, seed=1),
        model=ModelSettings(d_model=16, n_heads=2, n_encoder_layers=1, n_decoder_layers=1, d_ff=16),
        training=TrainingConfig(learning_rate=1e-3, epochs=3, batch_size=8),
        decode=DecodeConfig(max_target_length=6),
        output_dir=str(root / "runs"),
    )


@pytest.fixture(scope="module")
def runs(config):
    return {m: run_experiment(config, m) for m in ("baseline", "multigen")}


def test_relative_change_examples():
    assert relative_change(16.08, 18.61) == 15.7
    assert relative_change(7.90, 7.78) == -1.5
    assert relative_change(3.0, 3.0) == 0.0
    assert relative_change(0.0, 1.0) is None
    # half-up on an exact tie: 1 -> 1.0005 is +0.05%
    assert relative_change(1.0, 1.0005) == 0.1


def test_compare_tables():
    t = compare({"bleu": 16.08, "rouge2": 7.90}, {"bleu": 18.61, "rouge2": 7.78}, label="x")
    assert t["bleu"].delta_text() == "+15.7%"
    assert t["rouge2"].delta_text() == "-1.5%"
    assert compare({"bleu": 0.0}, {"bleu": 2.0})["bleu"].delta_text() == "—"
    with pytest.raises(SchemaError):
        compare({"bleu": 1.0}, {"rouge1": 1.0})


def test_identical_runs_zero_delta(runs):
    t = compare(runs["multigen"], runs["multigen"])
    assert [r.metric for r in t.rows] == list(METRIC_KEYS)
    assert all(r.delta_text() in ("+0.0%", "—") for r in t.rows)


def test_config_rejects_unknown_keys(tmp_path):
    with pytest.raises(SchemaError, match="bogus"):
        ExperimentConfig.from_dict({"corpus_path": "x", "bogus": 1})
    with pytest.raises(SchemaError, match="training"):
        ExperimentConfig.from_dict({"corpus_path": "x", "training": {"lr": 1}})


def test_config_json_round_trip(config, tmp_path):
    (tmp_path / "c.json").write_text(config.to_json())
    assert ExperimentConfig.load(tmp_path / "c.json") == config
    seeded = config.with_seed(9)
    assert seeded.split.seed == seeded.model.seed == seeded.training.seed == 9


def test_separator_counts_per_mode(runs):
    assert all(s.input_rendered.split().count(SEP) == 0 for s in runs["baseline"].samples)
    assert all(s.input_rendered.split().count(SEP) == 3 for s in runs["multigen"].samples)


def test_same_test_split_across_modes(runs, config):
    assert runs["baseline"].split == runs["multigen"].split
    assert [s.id for s in runs["baseline"].samples] == list(runs["baseline"].split.test)
    assert len(runs["multigen"].samples) == config.split.test


def test_run_directory_layout(runs, config):
    d = harness.Path(config.output_dir) / runs["multigen"].run_id
    for name in ("config.json", "samples.jsonl", "metrics.json", "loss.csv", "run.json"):
        assert (d / name).is_file()
    line = json.loads((d / "samples.jsonl").read_text(encoding="utf-8").splitlines()[0])
    assert set(line) == {"id", "input_rendered", "reference", "generated"}
    doc = json.loads((d / "metrics.json").read_text())
    assert doc["percent"]["scale"] == "percent" and doc["unit"]["scale"] == "unit"


def test_run_record_round_trip(runs, config):
    rec = runs["multigen"]
    loaded = RunRecord.load(harness.Path(config.output_dir) / rec.run_id)
    assert loaded == rec


def test_determinism_except_identity(config, runs):
    again = run_experiment(config, "multigen", persist=False)
    first = runs["multigen"]
    assert again.run_id != first.run_id
    assert replace(again, run_id="", timestamp="") == replace(first, run_id="", timestamp="")


def test_run_ids_unique(config):
    a = run_experiment(config, "baseline")
    b = run_experiment(config, "baseline")
    assert a.run_id != b.run_id


def test_stage_errors(config, tmp_path):
    with pytest.raises(StageError, match="load") as err:
        run_experiment(replace(config, corpus_path=str(tmp_path / "missing.jsonl")), "baseline")
    assert err.value.exit_code == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(StageError, match="persist") as err:
        run_experiment(replace(config, output_dir=str(blocker / "sub")), "baseline")
    assert err.value.exit_code == 2


def test_render_report_formats(runs):
    both = [runs["baseline"], runs["multigen"]]
    table = compare(runs["baseline"], runs["multigen"])
    tsv = render_report(both, [table], "tsv", n_samples=3).split("\n")
    assert tsv[0] == "metric\tbaseline\tproposed\tdelta"
    assert [line.split("\t")[0] for line in tsv[1:7]] == list(METRIC_KEYS)
    assert tsv[8] == "id\treference\tbaseline\tmultigen"
    doc = json.loads(render_report(both, [table], "json", n_samples=3))
    assert [r["delta_percent"] for r in doc["comparisons"][0]["rows"]] == [r.delta_percent for r in table.rows]
    assert len(doc["samples"]) == 3
    assert len(json.loads(render_report(both, [], "json", n_samples=100))["samples"]) == 8
    md = render_report(both, [table], "markdown")
    assert md.startswith("| metric | baseline | proposed | Δ |")
    with pytest.raises(harness.ParameterError):
        render_report(both, [table], "html")


def test_histogram_csv():
    assert harness.histogram_csv({1: 4, 0: 2}) == "bin,count\n0,2\n1,4\n"


# ------------------------------------------------------------------- CLI

def test_cli_run_compare_report(config, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(config.to_json())
    out = tmp_path / "runs"
    assert main(["run", "--config", str(cfg), "--mode", "baseline", "--out", str(out)]) == 0
    assert main(["run", "--config", str(cfg), "--mode", "multigen", "--out", str(out)]) == 0
    dirs = sorted(out.iterdir())
    capsys.readouterr()
    assert main(["compare", str(dirs[0]), str(dirs[1])]) == 0
    assert capsys.readouterr().out.splitlines()[0].startswith("bleu\t")
    assert main(["report", *map(str, dirs), "--format", "markdown"]) == 0
    assert "| metric |" in capsys.readouterr().out


def test_cli_stages(config, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(config.to_json())
    assert main(["stats", config.corpus_path, "--out", str(tmp_path / "s")]) == 0
    assert (tmp_path / "s" / "stats.json").is_file()
    assert main(["split", config.corpus_path, "--counts", "30", "5", "5", "--seed", "2"]) == 0
    assert len(json.loads(capsys.readouterr().out.splitlines()[-1])["test"]) == 5
    assert main(["preprocess", "--config", str(cfg), "--out", str(tmp_path / "p")]) == 0
    assert (tmp_path / "p" / "inputs.tsv").read_text(encoding="utf-8").count(SEP) == 3 * 40
    assert main(["train", "--config", str(cfg), "--mode", "baseline", "--out", str(tmp_path / "t")]) == 0
    ckpt = tmp_path / "t" / "model.ckpt"
    assert main(["generate", "--config", str(cfg), "--mode", "baseline",
                 "--checkpoint", str(ckpt), "--out", str(tmp_path / "g")]) == 0
    lines = (tmp_path / "g" / "samples.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 8
    gen, ref = tmp_path / "gen.txt", tmp_path / "ref.txt"
    gen.write_text("a b c d\nx y\n")
    ref.write_text("a b c d\nx z\n")
    capsys.readouterr()
    assert main(["evaluate", str(gen), str(ref)]) == 0
    assert json.loads(capsys.readouterr().out)["unit"]["rouge1"] == pytest.approx(0.75)


def test_cli_exit_codes(config, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(config.to_json())
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"corpus_path": config.corpus_path, "unknown": 1}))
    assert main(["run", "--config", str(bad)]) == 1
    assert main(["stats", str(tmp_path / "nope.jsonl")]) == 2
    diverge = json.loads(config.to_json())
    diverge["training"].update(learning_rate=1e308, override_search_space=True, clip_norm=None)
    dv = tmp_path / "dv.json"
    dv.write_text(json.dumps(diverge))
    assert main(["train", "--config", str(dv), "--out", str(tmp_path / "d")]) == 3
