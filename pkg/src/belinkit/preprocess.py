"""Text normalization, word-level vocabularies and bounded token sequences."""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from itertools import groupby
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import regex

from .errors import ParameterError, RangeError

PAD = "<pad>"
UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"
SEP = "[SEP]"
RESERVED = (PAD, UNK, BOS, EOS, SEP)
PAD_ID, UNK_ID, BOS_ID, EOS_ID, SEP_ID = range(5)

INPUT_MAX_LEN = 512
TARGET_MAX_LEN = 64

URL_RE = regex.compile(r"(?:https?://|www\.)\S*", regex.IGNORECASE)

# Emoji property minus ASCII (digits, '#' and '*' carry the property too).
_EMOJI_CHAR = r"[\p{Emoji}--\p{ASCII}]"
_EMOJI_TAIL = r"[\uFE0E\uFE0F\u20E3\U0001F3FB-\U0001F3FF\U000E0020-\U000E007F]"
EMOJI_RE = regex.compile(
    rf"(?V1){_EMOJI_CHAR}(?:{_EMOJI_TAIL}|\u200D(?={_EMOJI_CHAR}))*"
    rf"|\u200D(?={_EMOJI_CHAR})"
    r"|[\uFE0E\uFE0F\u20E3]"
)

_MAX_PASSES = 16


def is_punctuation(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


@dataclass(frozen=True)
class NormalizationConfig:
    apply_nfkc: bool = True
    strip_urls: bool = True
    strip_emoji: bool = True
    dedupe_punctuation: bool = True
    collapse_whitespace: bool = True


def _dedupe_punct(text: str) -> str:
    out = []
    for ch, run in groupby(text):
        out.append(ch if is_punctuation(ch) else "".join(run))
    return "".join(out)


def _normalize_once(text: str, config: NormalizationConfig) -> str:
    if config.apply_nfkc:
        text = unicodedata.normalize("NFKC", text)
    if config.strip_urls:
        text = URL_RE.sub(" ", text)
    if config.strip_emoji:
        text = EMOJI_RE.sub("", text)
    if config.dedupe_punctuation:
        text = _dedupe_punct(text)
    if config.collapse_whitespace:
        text = " ".join(text.split())
    return text


def normalize_text(text: str, config: NormalizationConfig | None = None) -> str:
    """Normalize raw article or headline text.

    Steps run in order: NFKC, URL removal, emoji removal, reduction of runs of
    an identical punctuation mark to a single mark, whitespace collapse.
    The pipeline is repeated until the text stops changing, because a removal
    can expose new material for an earlier step (for example a combining
    mark that NFKC composes once the emoji separating it is gone). This
    makes the function idempotent.

    >>> normalize_text("a   b!!!")
    'a b!'
    """
    config = config or NormalizationConfig()
    for _ in range(_MAX_PASSES):
        new = _normalize_once(text, config)
        if new == text:
            break
        text = new
    return text


@dataclass(frozen=True)
class TokenSequence:
    ids: tuple[int, ...]

    def __init__(self, ids: Iterable[int]):
        object.__setattr__(self, "ids", tuple(int(i) for i in ids))

    @property
    def length(self) -> int:
        return len(self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)

    def __getitem__(self, item):
        return self.ids[item]


@dataclass(frozen=True)
class Vocabulary:
    """Immutable word-level vocabulary; the five reserved tokens take ids 0-4."""

    tokens: tuple[str, ...]
    token_to_id: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if tuple(self.tokens[:5]) != RESERVED:
            raise ParameterError("vocabulary must start with the reserved tokens")
        index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise ParameterError("duplicate token in vocabulary")
        object.__setattr__(self, "token_to_id", MappingProxyType(index))

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def id(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def save(self, path: str | Path) -> None:
        Path(path).write_text("".join(t + "\n" for t in self.tokens), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        text = Path(path).read_text(encoding="utf-8")
        return cls(tuple(text.split("\n")[:-1]))


def build_vocabulary(texts: Iterable[str], max_size: int, min_frequency: int = 1) -> Vocabulary:
    """Rank whitespace-split words by frequency (ties broken lexicographically)
    and keep the top ``max_size - 5`` after the reserved tokens."""
    if max_size <= len(RESERVED):
        raise ParameterError(f"max_size must exceed {len(RESERVED)}, got {max_size}")
    counts = Counter(tok for text in texts for tok in text.split())
    for tok in RESERVED:
        counts.pop(tok, None)
    ranked = sorted(
        (tok for tok, c in counts.items() if c >= min_frequency),
        key=lambda tok: (-counts[tok], tok),
    )
    return Vocabulary(RESERVED + tuple(ranked[: max_size - len(RESERVED)]))


def tokenize(text: str, vocab: Vocabulary) -> TokenSequence:
    """Map whitespace-separated words to ids. Unknown words, and literal
    occurrences of reserved token strings, become UNK."""
    ids = []
    for word in text.split():
        i = vocab.token_to_id.get(word, UNK_ID)
        ids.append(UNK_ID if i < len(RESERVED) else i)
    return TokenSequence(ids)


def detokenize(seq: TokenSequence | Iterable[int], vocab: Vocabulary) -> str:
    words = []
    for i in seq:
        if not 0 <= i < len(vocab):
            raise RangeError(f"id {i} outside vocabulary of size {len(vocab)}")
        words.append(vocab.tokens[i])
    return " ".join(words)


def truncate(seq: TokenSequence, max_len: int) -> TokenSequence:
    if max_len < 1:
        raise ParameterError(f"max_len must be >= 1, got {max_len}")
    if len(seq) <= max_len:
        return seq
    return TokenSequence(seq.ids[:max_len])


def id_list(seq) -> list[int]:
    """Plain list of ids from a FusionInput, TokenSequence or id iterable."""
    while hasattr(seq, "ids"):
        seq = seq.ids
    return [int(i) for i in seq]
