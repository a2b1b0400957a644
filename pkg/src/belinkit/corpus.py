"""Loading, validation, splitting and descriptive statistics for annotated
religious-news corpora (article, headline, category, aspect, sentiment)."""

from __future__ import annotations

import csv
import functools
import io
import json
import re
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    CorpusDecodeError,
    EmptyCorpusError,
    LabelError,
    ParameterError,
    SchemaError,
    SizeError,
)
from .preprocess import is_punctuation, normalize_text

CATEGORIES = ("Islam", "Hinduism", "Christianity", "Buddhism", "Others")
ASPECTS = ("Report", "Festival", "Education", "Culture")
SENTIMENTS = ("Positive", "Negative", "Neutral")
FIELDS = ("article", "headline", "category", "aspect", "sentiment")

LABELS = {"category": CATEGORIES, "aspect": ASPECTS, "sentiment": SENTIMENTS}
_LOOKUP = {name: {v.lower(): v for v in values} for name, values in LABELS.items()}

DEFAULT_SPLIT = (1870, 150, 500)


def canonical_label(kind: str, value: str) -> str:
    """Return the canonical spelling of a label; matching ignores case and
    surrounding whitespace."""
    try:
        return _LOOKUP[kind][str(value).strip().lower()]
    except KeyError:
        raise LabelError(f"unknown {kind} label {value!r}; expected one of {LABELS[kind]}") from None


@dataclass(frozen=True)
class NewsRecord:
    article: str
    headline: str
    category: str
    aspect: str
    sentiment: str

    def __post_init__(self):
        for kind in LABELS:
            object.__setattr__(self, kind, canonical_label(kind, getattr(self, kind)))

    @classmethod
    def from_row(cls, row: dict, where: str = "") -> "NewsRecord":
        missing = [f for f in FIELDS if f not in row]
        if missing:
            raise SchemaError(f"{where}missing field {missing[0]!r}")
        for f in FIELDS:
            if not isinstance(row[f], str):
                raise SchemaError(f"{where}field {f!r} must be a string")
        for f in ("article", "headline"):
            if not normalize_text(row[f]):
                raise SchemaError(f"{where}field {f!r} is empty after normalization")
        try:
            labels = {k: canonical_label(k, row[k]) for k in LABELS}
        except LabelError as e:
            raise LabelError(f"{where}{e}") from None
        return cls(article=row["article"], headline=row["headline"], **labels)

    def to_row(self) -> dict:
        return {f: getattr(self, f) for f in FIELDS}


def _infer_format(path: Path, fmt: str | None) -> str:
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if fmt not in ("jsonl", "csv"):
        raise ParameterError(f"unsupported corpus format {fmt!r}")
    return fmt


def load_corpus(path: str | Path, format: str | None = None) -> list[NewsRecord]:
    """Read a JSONL or CSV corpus and validate every row.

    Errors name the offending line (JSONL) or data row (CSV, 1-based, header
    excluded).
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    raw = path.read_bytes()
    if fmt == "jsonl":
        records = []
        for lineno, line in enumerate(raw.split(b"\n"), start=1):
            try:
                text = line.decode("utf-8")
            except UnicodeDecodeError as e:
                raise CorpusDecodeError(f"{path}:{lineno}: invalid UTF-8 ({e.reason})") from None
            if not text.strip():
                continue
            try:
                row = json.loads(text)
            except json.JSONDecodeError as e:
                raise SchemaError(f"{path}:{lineno}: malformed JSON ({e.msg})") from None
            if not isinstance(row, dict):
                raise SchemaError(f"{path}:{lineno}: expected a JSON object")
            records.append(NewsRecord.from_row(row, where=f"line {lineno}: "))
        return records

    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        raise CorpusDecodeError(f"{path}: invalid UTF-8 at byte {e.start}") from None
    reader = csv.DictReader(io.StringIO(text, newline=""))
    missing = [f for f in FIELDS if f not in (reader.fieldnames or ())]
    if missing:
        raise SchemaError(f"{path}: header lacks column {missing[0]!r}")
    return [
        NewsRecord.from_row(row, where=f"row {i}: ")
        for i, row in enumerate(reader, start=1)
    ]


def dump_corpus(records: Iterable[NewsRecord], path: str | Path, format: str | None = None) -> None:
    path = Path(path)
    fmt = _infer_format(path, format)
    if fmt == "jsonl":
        lines = [json.dumps(r.to_row(), ensure_ascii=False) + "\n" for r in records]
        path.write_text("".join(lines), encoding="utf-8")
        return
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=FIELDS, lineterminator="\r\n")
        writer.writeheader()
        writer.writerows(r.to_row() for r in records)


@dataclass(frozen=True)
class CorpusSplit:
    train: tuple[int, ...]
    validation: tuple[int, ...]
    test: tuple[int, ...]
    seed: int

    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.validation), len(self.test)


def split_corpus(records: Sequence[NewsRecord], counts: Sequence[int] = DEFAULT_SPLIT, seed: int = 0) -> CorpusSplit:
    """Shuffle record ids with a seeded generator, then cut them into
    train/validation/test blocks of exactly the requested sizes."""
    n_train, n_val, n_test = (int(c) for c in counts)
    if min(n_train, n_val, n_test) < 0 or n_train + n_val + n_test != len(records):
        raise SizeError(f"split counts {tuple(counts)} do not sum to {len(records)} records")
    order = np.random.default_rng(seed).permutation(len(records)).tolist()
    return CorpusSplit(
        train=tuple(order[:n_train]),
        validation=tuple(order[n_train:n_train + n_val]),
        test=tuple(order[n_train + n_val:]),
        seed=seed,
    )


# ---------------------------------------------------------------- statistics

_SENTENCE_END = re.compile(r"[।?!.]+")


def word_tokenize(text: str) -> list[str]:
    """Whitespace split of the normalized text, with leading and trailing
    punctuation stripped from each piece; empty residues are dropped."""
    out = []
    for piece in normalize_text(text).split():
        start, end = 0, len(piece)
        while start < end and is_punctuation(piece[start]):
            start += 1
        while end > start and is_punctuation(piece[end - 1]):
            end -= 1
        if start < end:
            out.append(piece[start:end])
    return out


def sentence_split(text: str) -> list[str]:
    """Split on danda, '?', '!' and '.'; runs of terminators count once and
    fragments without any letter or digit are discarded."""
    parts = _SENTENCE_END.split(normalize_text(text))
    return [p.strip() for p in parts if any(ch.isalnum() for ch in p)]


def ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def novel_ngram_rate(
    records: Sequence[NewsRecord],
    n: int,
    tokenizer: Callable[[str], list[str]] = word_tokenize,
    average: str = "micro",
    dedupe: bool = False,
) -> float:
    """Percentage of headline n-grams that never occur in the paired article.

    ``average="micro"`` pools counts over the corpus; ``"macro"`` averages
    per-record rates over records whose headline has at least ``n`` tokens.
    With ``dedupe=True`` each distinct headline n-gram counts once per record.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if average not in ("micro", "macro"):
        raise ParameterError(f"average must be 'micro' or 'macro', got {average!r}")
    novel_total = grams_total = 0
    rates = []
    for rec in records:
        head = ngrams(tokenizer(rec.headline), n)
        if dedupe:
            head = list(dict.fromkeys(head))
        if not head:
            continue
        article = set(ngrams(tokenizer(rec.article), n))
        novel = sum(g not in article for g in head)
        novel_total += novel
        grams_total += len(head)
        rates.append(novel / len(head))
    if not grams_total:
        return 0.0
    if average == "micro":
        return 100.0 * novel_total / grams_total
    return 100.0 * sum(rates) / len(rates)


def length_histogram(
    records: Sequence[NewsRecord],
    field: str,
    bin_width: int,
    tokenizer: Callable[[str], list[str]] = word_tokenize,
) -> dict[int, int]:
    """Bin index -> number of records whose word count falls in
    ``[bin * bin_width, (bin + 1) * bin_width)``. Empty bins are omitted."""
    if bin_width < 1:
        raise ParameterError(f"bin_width must be >= 1, got {bin_width}")
    if field not in ("article", "headline"):
        raise ParameterError(f"field must be 'article' or 'headline', got {field!r}")
    counts = Counter(len(tokenizer(getattr(r, field))) // bin_width for r in records)
    return dict(sorted(counts.items()))


@dataclass
class CorpusStatistics:
    category_by_aspect: dict[str, dict[str, int]]
    category_by_sentiment: dict[str, dict[str, int]]
    category_totals: dict[str, int]
    aspect_totals: dict[str, int]
    sentiment_totals: dict[str, int]
    total: int
    avg_article_words: float
    avg_article_sentences: float
    article_vocab_size: int
    avg_headline_words: float
    avg_headline_sentences: float
    headline_vocab_size: int
    novel_ngram_rate: dict[int, float]
    article_length_histogram: dict[int, int]
    headline_length_histogram: dict[int, int]
    notes: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        # JSON object keys must be strings
        for key in ("novel_ngram_rate", "article_length_histogram", "headline_length_histogram"):
            d[key] = {str(k): v for k, v in d[key].items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    def to_tsv(self) -> str:
        """Human-readable tab-separated tables."""
        lines = ["category\t" + "\t".join(ASPECTS + SENTIMENTS) + "\ttotal"]
        for c in CATEGORIES:
            row = [self.category_by_aspect[c][a] for a in ASPECTS]
            row += [self.category_by_sentiment[c][s] for s in SENTIMENTS]
            lines.append("\t".join([c, *map(str, row), str(self.category_totals[c])]))
        lines.append("\t".join(
            ["Total"]
            + [str(self.aspect_totals[a]) for a in ASPECTS]
            + [str(self.sentiment_totals[s]) for s in SENTIMENTS]
            + [str(self.total)]
        ))
        lines += [
            "",
            "field\tavg_words\tavg_sentences\tvocabulary",
            f"article\t{self.avg_article_words:.2f}\t{self.avg_article_sentences:.2f}\t{self.article_vocab_size}",
            f"headline\t{self.avg_headline_words:.2f}\t{self.avg_headline_sentences:.2f}\t{self.headline_vocab_size}",
            "",
            "n\tnovel_ngram_percent",
        ]
        lines += [f"{n}\t{rate:.2f}" for n, rate in sorted(self.novel_ngram_rate.items())]
        if self.notes:
            lines.append("")
            lines += [f"# {k}: {v}" for k, v in self.notes.items()]
        return "\n".join(lines) + "\n"


TOKENIZER_NOTE = (
    "word counts use whitespace splitting of NFKC-normalized text with edge "
    "punctuation stripped; sentence counts split on danda, '?', '!' and '.'; "
    "other tokenizers give different averages, vocabularies and novelty rates"
)


def compute_statistics(
    records: Sequence[NewsRecord],
    tokenizer: Callable[[str], list[str]] = word_tokenize,
    segmenter: Callable[[str], list[str]] = sentence_split,
    article_bin_width: int = 100,
    headline_bin_width: int = 2,
    max_n: int = 4,
) -> CorpusStatistics:
    if not records:
        raise EmptyCorpusError("cannot compute statistics of an empty corpus")
    # every text is tokenized by several passes below
    tokenizer = functools.lru_cache(maxsize=None)(tokenizer)
    by_aspect = {c: dict.fromkeys(ASPECTS, 0) for c in CATEGORIES}
    by_sentiment = {c: dict.fromkeys(SENTIMENTS, 0) for c in CATEGORIES}
    art_words = art_sents = head_words = head_sents = 0
    art_vocab: set[str] = set()
    head_vocab: set[str] = set()
    for rec in records:
        by_aspect[rec.category][rec.aspect] += 1
        by_sentiment[rec.category][rec.sentiment] += 1
        a_tok = tokenizer(rec.article)
        h_tok = tokenizer(rec.headline)
        art_words += len(a_tok)
        head_words += len(h_tok)
        art_vocab.update(a_tok)
        head_vocab.update(h_tok)
        art_sents += len(segmenter(rec.article))
        head_sents += len(segmenter(rec.headline))
    n = len(records)
    return CorpusStatistics(
        category_by_aspect=by_aspect,
        category_by_sentiment=by_sentiment,
        category_totals={c: sum(by_aspect[c].values()) for c in CATEGORIES},
        aspect_totals={a: sum(by_aspect[c][a] for c in CATEGORIES) for a in ASPECTS},
        sentiment_totals={s: sum(by_sentiment[c][s] for c in CATEGORIES) for s in SENTIMENTS},
        total=n,
        avg_article_words=art_words / n,
        avg_article_sentences=art_sents / n,
        article_vocab_size=len(art_vocab),
        avg_headline_words=head_words / n,
        avg_headline_sentences=head_sents / n,
        headline_vocab_size=len(head_vocab),
        novel_ngram_rate={k: novel_ngram_rate(records, k, tokenizer) for k in range(1, max_n + 1)},
        article_length_histogram=length_histogram(records, "article", article_bin_width, tokenizer),
        headline_length_histogram=length_histogram(records, "headline", headline_bin_width, tokenizer),
        notes={"tokenizer": TOKENIZER_NOTE},
    )
