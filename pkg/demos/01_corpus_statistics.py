"""Corpus validation, splitting and descriptive statistics.

The real articles are not shipped, so this walk-through uses a synthetic
corpus whose label cross-tabulation equals the published one. Pass a JSONL
or CSV path as the first argument to run it on real data instead.
"""
# %%
import sys
import tempfile
from pathlib import Path

from belinkit import reference_values as ref
from belinkit.corpus import compute_statistics, dump_corpus, load_corpus, novel_ngram_rate, split_corpus
from belinkit.harness import histogram_csv
from belinkit.synthetic import label_replica_corpus

if len(sys.argv) > 1:
    records = load_corpus(sys.argv[1])
else:
    path = Path(tempfile.mkdtemp()) / "replica.jsonl"
    dump_corpus(label_replica_corpus(seed=0), path)
    records = load_corpus(path)
print(f"{len(records)} records loaded")

# %% Label cross-tabs, text averages and novelty in one pass
stats = compute_statistics(records)
print(stats.to_tsv())
print("published totals match:", stats.category_totals == ref.CATEGORY_TOTALS)

# %% Novelty under the alternative aggregation rules
for n in (1, 2, 3, 4):
    micro = novel_ngram_rate(records, n)
    macro = novel_ngram_rate(records, n, average="macro")
    unique = novel_ngram_rate(records, n, dedupe=True)
    print(f"n={n}: micro {micro:6.2f}  macro {macro:6.2f}  distinct {unique:6.2f}")

# %% Seeded split with explicit counts
split = split_corpus(records, ref.SPLIT_COUNTS, seed=0)
print("split sizes:", len(split.train), len(split.validation), len(split.test))

# %% Histogram data for a length-distribution plot
print(histogram_csv(stats.headline_length_histogram))
