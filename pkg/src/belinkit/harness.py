"""Experiment orchestration: configuration, baseline/multigen runs, run
persistence, relative-change comparison tables and reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timezone
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import CorpusSplit, load_corpus, split_corpus
from .errors import BelinError, ParameterError, SchemaError, StageError
from .fusion import FusionConfig, build_input, render, vocabulary_texts
from .metrics import METRIC_KEYS, CooccurrenceEmbedder, HashEmbedder, MetricReport, evaluate_corpus
from .model import DecodeConfig, ModelConfig, TrainingConfig, generate, init_model, loss_csv, train
from .model.checkpoint import save_checkpoint
from .preprocess import (
    EOS_ID,
    TokenSequence,
    Vocabulary,
    build_vocabulary,
    detokenize,
    normalize_text,
    tokenize,
)

log = logging.getLogger(__name__)

MODES = ("baseline", "multigen")


@dataclass(frozen=True)
class SplitSettings:
    train: int = 1870
    validation: int = 150
    test: int = 500
    seed: int = 0

    @property
    def counts(self) -> tuple[int, int, int]:
        return self.train, self.validation, self.test


@dataclass(frozen=True)
class VocabSettings:
    max_size: int = 30000
    min_frequency: int = 1


@dataclass(frozen=True)
class ModelSettings:
    """Model shape; the vocabulary size is filled in from the built vocabulary."""

    d_model: int = 64
    n_heads: int = 4
    n_encoder_layers: int = 2
    n_decoder_layers: int = 2
    d_ff: int = 128
    max_positions: int = 1024
    seed: int = 0

    def resolve(self, vocab_size: int) -> ModelConfig:
        return ModelConfig(vocab_size=vocab_size, **asdict(self))


@dataclass(frozen=True)
class MetricSettings:
    embedder: str = "hash"
    embedding_dim: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.embedder not in ("hash", "cooccurrence"):
            raise ParameterError(f"unknown embedder {self.embedder!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    corpus_path: str
    corpus_format: str | None = None
    split: SplitSettings = SplitSettings()
    vocab: VocabSettings = VocabSettings()
    fusion: FusionConfig = FusionConfig()
    model: ModelSettings = ModelSettings()
    training: TrainingConfig = TrainingConfig()
    decode: DecodeConfig = DecodeConfig()
    metrics: MetricSettings = MetricSettings()
    output_dir: str = "runs"

    _SECTIONS = {
        "split": SplitSettings, "vocab": VocabSettings, "fusion": FusionConfig,
        "model": ModelSettings, "training": TrainingConfig, "decode": DecodeConfig,
        "metrics": MetricSettings,
    }

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExperimentConfig":
        """Build a config, rejecting unknown keys at every level."""
        _reject_unknown(data, cls, "config")
        kwargs = dict(data)
        for name, section in cls._SECTIONS.items():
            if name in kwargs:
                value = kwargs[name]
                if not isinstance(value, Mapping):
                    raise SchemaError(f"config.{name} must be an object")
                _reject_unknown(value, section, f"config.{name}")
                kwargs[name] = section(**value)
        if "corpus_path" not in kwargs:
            raise SchemaError("config lacks 'corpus_path'")
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Same config with every seed (split, model, training) set to ``seed``."""
        return replace(
            self,
            split=replace(self.split, seed=seed),
            model=replace(self.model, seed=seed),
            training=replace(self.training, seed=seed),
        )


def _reject_unknown(data: Mapping, cls, where: str) -> None:
    known = {f.name for f in fields(cls)}
    extra = sorted(set(data) - known)
    if extra:
        raise SchemaError(f"{where}: unknown key {extra[0]!r}")


# ------------------------------------------------------------------ records

@dataclass(frozen=True)
class Sample:
    id: int
    input_rendered: str
    reference: str
    generated: str


@dataclass
class RunRecord:
    run_id: str
    timestamp: str
    mode: str
    config: ExperimentConfig
    split: CorpusSplit
    samples: list[Sample]
    metrics: MetricReport
    losses: list[float] = field(default_factory=list)

    def save(self, directory) -> Path:
        """Write ``config.json``, ``samples.jsonl``, ``metrics.json``,
        ``loss.csv`` and ``run.json`` (identity and split) into ``directory``."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "config.json").write_text(self.config.to_json() + "\n", encoding="utf-8")
        (d / "samples.jsonl").write_text(
            "".join(json.dumps(asdict(s), ensure_ascii=False) + "\n" for s in self.samples),
            encoding="utf-8",
        )
        (d / "metrics.json").write_text(metrics_json(self.metrics), encoding="utf-8")
        (d / "loss.csv").write_text(loss_csv(self.losses), encoding="utf-8")
        run = {
            "run_id": self.run_id, "timestamp": self.timestamp, "mode": self.mode,
            "split": {"train": list(self.split.train), "validation": list(self.split.validation),
                      "test": list(self.split.test), "seed": self.split.seed},
        }
        (d / "run.json").write_text(json.dumps(run) + "\n", encoding="utf-8")
        return d

    @classmethod
    def load(cls, directory) -> "RunRecord":
        d = Path(directory)
        run = json.loads((d / "run.json").read_text(encoding="utf-8"))
        samples = [Sample(**json.loads(line))
                   for line in (d / "samples.jsonl").read_text(encoding="utf-8").splitlines() if line]
        with (d / "loss.csv").open(encoding="utf-8", newline="") as fh:
            losses = [float(row["loss"]) for row in csv.DictReader(fh)]
        sp = run["split"]
        return cls(
            run_id=run["run_id"], timestamp=run["timestamp"], mode=run["mode"],
            config=ExperimentConfig.load(d / "config.json"),
            split=CorpusSplit(tuple(sp["train"]), tuple(sp["validation"]), tuple(sp["test"]), sp["seed"]),
            samples=samples,
            metrics=load_metrics(d / "metrics.json"),
            losses=losses,
        )


def metrics_json(report: MetricReport) -> str:
    """Flat unrounded unit-scale values, the same at percent scale rounded to
    two decimals, and the full precision/recall/F1 breakdown."""
    doc = {
        "unit": report.flat(),
        "percent": report.to_percent().flat(2),
        "detail": report.to_dict(),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_metrics(path) -> MetricReport:
    return MetricReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8"))["detail"])


# ------------------------------------------------------------------ stages

@dataclass
class PreparedData:
    records: list
    split: CorpusSplit
    vocab: Vocabulary
    inputs: dict          # record id -> FusionInput
    targets: dict         # record id -> TokenSequence (ends with EOS)


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)

    def __exit__(self, exc_type, exc, tb):
        if exc is None or isinstance(exc, StageError):
            return False
        if isinstance(exc, (BelinError, OSError, ValueError, KeyError)):
            raise StageError(self.name, exc) from exc
        return False


def headline_target(headline: str, vocab: Vocabulary, max_len: int) -> TokenSequence:
    """Tokenized headline cut to ``max_len - 1`` ids, then EOS."""
    ids = tokenize(normalize_text(headline), vocab).ids[:max(max_len - 1, 0)]
    return TokenSequence(ids + (EOS_ID,))


def prepare(config: ExperimentConfig, mode: str) -> PreparedData:
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    with _Stage("load"):
        records = load_corpus(config.corpus_path, config.corpus_format)
    with _Stage("split"):
        split = split_corpus(records, config.split.counts, config.split.seed)
    with _Stage("preprocess"):
        texts = []
        for i in split.train:
            texts.append(normalize_text(records[i].article))
            texts.append(normalize_text(records[i].headline))
        vocab = build_vocabulary(texts + vocabulary_texts(config.fusion),
                                 config.vocab.max_size, config.vocab.min_frequency)
    with _Stage("build_inputs"):
        max_len = min(config.training.input_token_length, config.model.max_positions)
        inputs = {i: build_input(r, vocab, config.fusion, max_len, mode) for i, r in enumerate(records)}
        targets = {i: headline_target(r.headline, vocab, config.training.target_token_length)
                   for i, r in enumerate(records)}
    return PreparedData(records, split, vocab, inputs, targets)


def train_stage(config: ExperimentConfig, data: PreparedData):
    with _Stage("train"):
        params = init_model(config.model.resolve(len(data.vocab)))
        pairs = [(data.inputs[i], data.targets[i]) for i in data.split.train]
        return train(params, pairs, config.training)


def generate_stage(config: ExperimentConfig, data: PreparedData, params, ids=None) -> list[Sample]:
    with _Stage("generate"):
        samples = []
        for i in (data.split.test if ids is None else ids):
            out = [t for t in generate(params, data.inputs[i], config.decode).ids if t != EOS_ID]
            samples.append(Sample(
                id=i,
                input_rendered=render(data.inputs[i], data.vocab),
                reference=normalize_text(data.records[i].headline),
                generated=detokenize(out, data.vocab),
            ))
        return samples


def make_embedder(settings: MetricSettings, texts: Sequence[str] = ()):
    if settings.embedder == "hash":
        return HashEmbedder(settings.embedding_dim, settings.seed)
    from .corpus import word_tokenize
    return CooccurrenceEmbedder([word_tokenize(t) for t in texts], dim=settings.embedding_dim, seed=settings.seed)


def evaluate_stage(config: ExperimentConfig, data: PreparedData, samples: Sequence[Sample]) -> MetricReport:
    with _Stage("evaluate"):
        train_text = [data.records[i].article for i in data.split.train]
        embedder = make_embedder(config.metrics, train_text)
        return evaluate_corpus([s.generated for s in samples], [s.reference for s in samples],
                               embedder=embedder)


def _new_run_id(out_dir: Path, mode: str, stamp: str) -> str:
    base = f"{mode}-{stamp.replace(':', '').replace('-', '')[:15]}"
    run_id, k = base, 1
    while (out_dir / run_id).exists():
        k += 1
        run_id = f"{base}-{k}"
    return run_id


def run_experiment(config: ExperimentConfig, mode: str, persist: bool = True) -> RunRecord:
    """Load, split, preprocess, build inputs for ``mode``, train, generate on
    the test split and evaluate. With ``persist`` the run is written to a
    fresh directory under ``config.output_dir``."""
    data = prepare(config, mode)
    params, losses = train_stage(config, data)
    samples = generate_stage(config, data, params)
    report = evaluate_stage(config, data, samples)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    record = RunRecord("", stamp, mode, config, data.split, samples, report, losses)
    if persist:
        with _Stage("persist"):
            out = Path(config.output_dir)
            out.mkdir(parents=True, exist_ok=True)
            if not os.access(out, os.W_OK):
                raise PermissionError(f"output directory {out} is not writable")
            record.run_id = _new_run_id(out, mode, stamp)
            d = record.save(out / record.run_id)
            data.vocab.save(d / "vocab.txt")
            save_checkpoint(params, d / "model.ckpt")
    else:
        record.run_id = f"{mode}-{stamp}"
    return record


# --------------------------------------------------------------- comparison

@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    baseline: float
    proposed: float
    delta_percent: float | None

    def delta_text(self) -> str:
        return "—" if self.delta_percent is None else f"{self.delta_percent:+.1f}%"


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]
    label: str = ""

    def __getitem__(self, metric: str) -> ComparisonRow:
        for row in self.rows:
            if row.metric == metric:
                return row
        raise KeyError(metric)

    def to_dict(self) -> dict:
        return {"label": self.label, "rows": [asdict(r) for r in self.rows]}


def relative_change(baseline: float, proposed: float) -> float | None:
    """``(proposed - baseline) / baseline * 100`` rounded half-up to one
    decimal, computed in decimal arithmetic on the values' shortest reprs;
    None when the baseline is zero."""
    b, p = Decimal(repr(float(baseline))), Decimal(repr(float(proposed)))
    if b == 0:
        return None
    delta = (p - b) / b * 100
    return float(delta.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def _metric_map(side) -> dict:
    if isinstance(side, RunRecord):
        flat = side.metrics.to_percent().flat()
        return {k: flat[k] for k in METRIC_KEYS}
    if isinstance(side, MetricReport):
        flat = side.to_percent().flat()
        return {k: flat[k] for k in METRIC_KEYS}
    return dict(side)


def compare(baseline, proposed, label: str = "") -> ComparisonTable:
    """Per-metric relative change of ``proposed`` over ``baseline``. Either
    side may be a RunRecord, a MetricReport or a metric -> value mapping."""
    b, p = _metric_map(baseline), _metric_map(proposed)
    if set(b) != set(p):
        raise SchemaError(f"metric keys differ: {sorted(set(b) ^ set(p))}")
    rows = tuple(ComparisonRow(k, b[k], p[k], relative_change(b[k], p[k])) for k in b)
    return ComparisonTable(rows, label)


# ------------------------------------------------------------------ reports

REPORT_FORMATS = ("tsv", "json", "markdown")


def _side_by_side(runs: Sequence[RunRecord], n_samples: int) -> tuple[list[str], list[list]]:
    by_mode = {}
    for run in runs:
        by_mode.setdefault(run.mode, run)
    first = runs[0]
    columns = ["id", "reference"] + [m for m in MODES if m in by_mode]
    lookup = {m: {s.id: s.generated for s in r.samples} for m, r in by_mode.items()}
    rows = []
    for s in first.samples[:max(n_samples, 0)]:
        rows.append([s.id, s.reference] + [lookup[m].get(s.id, "") for m in columns[2:]])
    return columns, rows


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_report(
    runs: Sequence[RunRecord],
    comparisons: Sequence[ComparisonTable] = (),
    format: str = "tsv",
    n_samples: int = 10,
) -> str:
    """Comparison tables (metric, baseline, proposed, relative change) followed
    by a reference/baseline/multigen side-by-side dump of up to ``n_samples``
    test items."""
    if format not in REPORT_FORMATS:
        raise ParameterError(f"unknown report format {format!r}; expected one of {REPORT_FORMATS}")
    if not runs:
        raise ParameterError("render_report needs at least one run")
    columns, sample_rows = _side_by_side(runs, n_samples)

    if format == "json":
        doc = {
            "runs": [{"run_id": r.run_id, "mode": r.mode, "metrics": r.metrics.to_percent().flat(2)}
                     for r in runs],
            "comparisons": [c.to_dict() for c in comparisons],
            "samples": [dict(zip(columns, row)) for row in sample_rows],
        }
        return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"

    if format == "tsv":
        out = io.StringIO()
        w = csv.writer(out, delimiter="\t", lineterminator="\n")
        for i, table in enumerate(comparisons):
            if i:
                out.write("\n")
            w.writerow(["metric", "baseline", "proposed", "delta"])
            for row in table.rows:
                w.writerow([row.metric, _fmt(row.baseline), _fmt(row.proposed), row.delta_text()])
        if comparisons:
            out.write("\n")
        w.writerow(columns)
        w.writerows(sample_rows)
        return out.getvalue()

    lines = []
    for table in comparisons:
        if table.label:
            lines.append(f"### {table.label}\n")
        lines += ["| metric | baseline | proposed | Δ |", "|---|---:|---:|---:|"]
        lines += [f"| {r.metric} | {_fmt(r.baseline)} | {_fmt(r.proposed)} | {r.delta_text()} |"
                  for r in table.rows]
        lines.append("")
    lines.append("| " + " | ".join(columns) + " |")
    lines.append("|" + "---|" * len(columns))
    for row in sample_rows:
        lines.append("| " + " | ".join(str(c).replace("|", "\\|") for c in row) + " |")
    return "\n".join(lines) + "\n"


def histogram_csv(histogram: Mapping[int, int]) -> str:
    return "bin,count\n" + "".join(f"{b},{c}\n" for b, c in sorted(histogram.items()))
