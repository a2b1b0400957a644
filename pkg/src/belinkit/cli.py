"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 training divergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .corpus import DEFAULT_SPLIT, compute_statistics, load_corpus, split_corpus
from .errors import BelinError, ParameterError
from .fusion import debug_dump
from .metrics import evaluate_corpus
from .model import load_checkpoint, loss_csv, save_checkpoint


def _config(args) -> harness.ExperimentConfig:
    if not args.config:
        raise ParameterError("--config is required for this command")
    cfg = harness.ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def _out_dir(args) -> Path:
    d = Path(args.out or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_stats(args):
    stats = compute_statistics(load_corpus(args.corpus))
    sys.stdout.write(stats.to_tsv())
    if args.out:
        d = _out_dir(args)
        (d / "stats.tsv").write_text(stats.to_tsv(), encoding="utf-8")
        (d / "stats.json").write_text(stats.to_json() + "\n", encoding="utf-8")
        (d / "article_lengths.csv").write_text(harness.histogram_csv(stats.article_length_histogram))
        (d / "headline_lengths.csv").write_text(harness.histogram_csv(stats.headline_length_histogram))


def cmd_split(args):
    records = load_corpus(args.corpus)
    sp = split_corpus(records, args.counts, args.seed or 0)
    doc = json.dumps({"train": sp.train, "validation": sp.validation, "test": sp.test, "seed": sp.seed})
    if args.out:
        (_out_dir(args) / "split.json").write_text(doc + "\n")
    else:
        print(doc)


def cmd_preprocess(args):
    cfg = _config(args)
    data = harness.prepare(cfg, args.mode)
    d = _out_dir(args)
    data.vocab.save(d / "vocab.txt")
    (d / "inputs.tsv").write_text(debug_dump(sorted(data.inputs.items()), data.vocab), encoding="utf-8")
    print(f"vocabulary size {len(data.vocab)}; wrote {d}")


def cmd_train(args):
    cfg = _config(args)
    data = harness.prepare(cfg, args.mode)
    params, losses = harness.train_stage(cfg, data)
    d = _out_dir(args)
    save_checkpoint(params, d / "model.ckpt")
    data.vocab.save(d / "vocab.txt")
    (d / "loss.csv").write_text(loss_csv(losses))
    print(f"final loss {losses[-1]:.6f}; wrote {d}")


def cmd_generate(args):
    cfg = _config(args)
    data = harness.prepare(cfg, args.mode)
    params = load_checkpoint(args.checkpoint)
    samples = harness.generate_stage(cfg, data, params)
    d = _out_dir(args)
    with (d / "samples.jsonl").open("w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps(s.__dict__, ensure_ascii=False) + "\n")
    print(f"{len(samples)} samples; wrote {d / 'samples.jsonl'}")


def cmd_evaluate(args):
    gen = Path(args.generated).read_text(encoding="utf-8").splitlines()
    ref = Path(args.references).read_text(encoding="utf-8").splitlines()
    report = evaluate_corpus(gen, ref)
    text = harness.metrics_json(report)
    if args.out:
        (_out_dir(args) / "metrics.json").write_text(text)
    sys.stdout.write(text)


def cmd_run(args):
    cfg = _config(args)
    record = harness.run_experiment(cfg, args.mode)
    print(Path(cfg.output_dir) / record.run_id)
    print(json.dumps(record.metrics.to_percent().flat(2)))


def _metrics_side(path: str):
    p = Path(path)
    if p.is_dir():
        return harness.RunRecord.load(p)
    doc = json.loads(p.read_text(encoding="utf-8"))
    return doc.get("percent", doc)


def cmd_compare(args):
    b, p = _metrics_side(args.baseline), _metrics_side(args.proposed)
    if isinstance(b, dict):
        b = {k: v for k, v in b.items() if k != "scale"}
    if isinstance(p, dict):
        p = {k: v for k, v in p.items() if k != "scale"}
    table = harness.compare(b, p)
    for row in table.rows:
        print(f"{row.metric}\t{row.baseline:.2f}\t{row.proposed:.2f}\t{row.delta_text()}")


def cmd_report(args):
    runs = [harness.RunRecord.load(d) for d in args.runs]
    base = [r for r in runs if r.mode == "baseline"]
    prop = [r for r in runs if r.mode == "multigen"]
    comparisons = [harness.compare(base[0], prop[0])] if base and prop else []
    text = harness.render_report(runs, comparisons, args.format, args.samples)
    if args.out:
        ext = {"tsv": "tsv", "json": "json", "markdown": "md"}[args.format]
        (_out_dir(args) / f"report.{ext}").write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config JSON")
    common.add_argument("--seed", type=int, help="override every seed")
    common.add_argument("--mode", choices=harness.MODES, default="multigen")
    common.add_argument("--out", help="output directory")

    parser = argparse.ArgumentParser(prog="belinkit", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[common], help="corpus statistics")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", parents=[common], help="seeded train/validation/test split")
    p.add_argument("corpus")
    p.add_argument("--counts", type=int, nargs=3, default=list(DEFAULT_SPLIT))
    p.set_defaults(func=cmd_split)

    for name, func, text in (
        ("preprocess", cmd_preprocess, "build vocabulary and dump model inputs"),
        ("train", cmd_train, "train a model and save a checkpoint"),
        ("run", cmd_run, "full experiment: train, generate, evaluate, persist"),
    ):
        sub.add_parser(name, parents=[common], help=text).set_defaults(func=func)

    p = sub.add_parser("generate", parents=[common], help="generate headlines for the test split")
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", parents=[common], help="score generated lines against references")
    p.add_argument("generated")
    p.add_argument("references")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", parents=[common], help="relative change between two runs")
    p.add_argument("baseline", help="run directory or metrics JSON")
    p.add_argument("proposed", help="run directory or metrics JSON")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", parents=[common], help="comparison table and sample dump")
    p.add_argument("runs", nargs="+")
    p.add_argument("--format", choices=harness.REPORT_FORMATS, default="tsv")
    p.add_argument("--samples", type=int, default=10)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except BelinError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 2
    return 0
