"""Model-input construction: content-only baseline inputs and fused inputs
that append category, aspect and sentiment segments behind separators.

Fused layout (segments switched off by config are dropped together with
their separator)::

    prefix  article  [SEP] category  [SEP] aspect  [SEP] sentiment
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .corpus import NewsRecord
from .errors import ConfigError, EmptyInputError, ParameterError
from .preprocess import (
    INPUT_MAX_LEN,
    RESERVED,
    SEP,
    TokenSequence,
    Vocabulary,
    detokenize,
    normalize_text,
    tokenize,
)

DEFAULT_PREFIX = "Summarize the Article as Headlines"
SEGMENTS = ("prefix", "article", "category", "aspect", "sentiment")
CONTEXT_SEGMENTS = SEGMENTS[2:]


@dataclass(frozen=True)
class FusionConfig:
    include_category: bool = True
    include_aspect: bool = True
    include_sentiment: bool = True
    separator: str = SEP
    task_prefix: str = DEFAULT_PREFIX

    def __post_init__(self):
        if self.separator not in RESERVED:
            raise ConfigError(f"separator {self.separator!r} is not a reserved token")

    @classmethod
    def baseline(cls, **kwargs) -> "FusionConfig":
        return cls(include_category=False, include_aspect=False, include_sentiment=False, **kwargs)

    def included(self) -> tuple[str, ...]:
        flags = (self.include_category, self.include_aspect, self.include_sentiment)
        return tuple(name for name, on in zip(CONTEXT_SEGMENTS, flags) if on)


@dataclass(frozen=True)
class FusionInput:
    ids: TokenSequence
    segment_spans: dict[str, tuple[int, int]]

    def __len__(self) -> int:
        return len(self.ids)

    def separator_count(self, vocab: Vocabulary, separator: str = SEP) -> int:
        sep = vocab.token_to_id[separator]
        return sum(1 for i in self.ids if i == sep)


def vocabulary_texts(config: FusionConfig = FusionConfig()) -> list[str]:
    """Texts that must be covered by any vocabulary used with fusion: the task
    prefix and every label name."""
    from .corpus import ASPECTS, CATEGORIES, SENTIMENTS

    return [normalize_text(config.task_prefix), *CATEGORIES, *ASPECTS, *SENTIMENTS]


def _pieces(record: NewsRecord, vocab: Vocabulary, config: FusionConfig):
    article = tokenize(normalize_text(record.article), vocab).ids
    if not article:
        raise EmptyInputError("article is empty after normalization")
    prefix = tokenize(normalize_text(config.task_prefix), vocab).ids
    return prefix, article


def _assemble(prefix, article, context, sep_id, max_len):
    if max_len < 1:
        raise ParameterError(f"max_len must be >= 1, got {max_len}")
    context_len = sum(len(toks) + 1 for _, toks in context)
    budget = max_len - len(prefix) - context_len
    if budget >= 0:
        article = article[:budget]
    ids: list[int] = []
    spans = dict.fromkeys(SEGMENTS, (0, 0))
    spans["prefix"] = (0, len(prefix))
    ids += prefix
    spans["article"] = (len(ids), len(article))
    ids += article
    for name, toks in context:
        ids.append(sep_id)
        spans[name] = (len(ids), len(toks))
        ids += toks
    if len(ids) > max_len:
        # prefix plus context alone exceed the budget: plain head truncation
        ids = ids[:max_len]
        spans = {k: (min(s, max_len), max(0, min(s + n, max_len) - min(s, max_len)))
                 for k, (s, n) in spans.items()}
        spans = {k: (s if n else 0, n) for k, (s, n) in spans.items()}
    return FusionInput(TokenSequence(ids), spans)


def build_baseline_input(
    record: NewsRecord,
    vocab: Vocabulary,
    config: FusionConfig = FusionConfig(),
    max_len: int = INPUT_MAX_LEN,
) -> FusionInput:
    """Prefix followed by the article, head-truncated to ``max_len``."""
    prefix, article = _pieces(record, vocab, config)
    return _assemble(prefix, article, [], vocab.token_to_id[config.separator], max_len)


def build_multigen_input(
    record: NewsRecord,
    vocab: Vocabulary,
    config: FusionConfig = FusionConfig(),
    max_len: int = INPUT_MAX_LEN,
) -> FusionInput:
    """Prefix, article, then one separator-led segment per enabled label.

    When the sequence is too long the article is shortened from its tail so
    that every context segment survives.
    """
    prefix, article = _pieces(record, vocab, config)
    context = [
        (name, tokenize(normalize_text(getattr(record, name)), vocab).ids)
        for name in config.included()
    ]
    return _assemble(prefix, article, context, vocab.token_to_id[config.separator], max_len)


def build_input(record, vocab, config, max_len=INPUT_MAX_LEN, mode="multigen") -> FusionInput:
    if mode == "baseline":
        return build_baseline_input(record, vocab, config, max_len)
    if mode == "multigen":
        return build_multigen_input(record, vocab, config, max_len)
    raise ParameterError(f"unknown mode {mode!r}")


def render(fusion_input: FusionInput, vocab: Vocabulary) -> str:
    return detokenize(fusion_input.ids, vocab)


def debug_dump(items: Iterable[tuple[object, FusionInput]], vocab: Vocabulary) -> str:
    """One ``id<TAB>rendered input`` line per record, separators visible."""
    return "".join(f"{rid}\t{render(fi, vocab)}\n" for rid, fi in items)
