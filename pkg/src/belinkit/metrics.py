"""Text generation metrics implemented from first principles: ROUGE-N,
ROUGE-L, BLEU with brevity penalty, METEOR with fragmentation penalty and
BERTScore-style greedy cosine matching."""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, replace
from typing import Callable, Protocol, Sequence

import numpy as np

from .corpus import ngrams, word_tokenize
from .errors import EmptyInputError, PairingError, ParameterError

# METEOR fragmentation penalty: GAMMA * (chunks / matches) ** BETA
METEOR_GAMMA = 0.5
METEOR_BETA = 3.0
METEOR_SEARCH_BUDGET = 200_000


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, p: float, r: float) -> "PRF":
        return cls(p, r, 2 * p * r / (p + r) if p + r > 0 else 0.0)

    def scaled(self, k: float) -> "PRF":
        return PRF(self.precision * k, self.recall * k, self.f1 * k)


ZERO = PRF(0.0, 0.0, 0.0)


def lcs_length(a: Sequence, b: Sequence) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_n(candidate: Sequence, reference: Sequence, n: int = 1) -> PRF:
    """Clipped n-gram overlap; zero when either side has no n-grams."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    cand = Counter(ngrams(candidate, n))
    ref = Counter(ngrams(reference, n))
    if not cand or not ref:
        return ZERO
    match = sum((cand & ref).values())
    return PRF.from_pr(match / sum(cand.values()), match / sum(ref.values()))


def rouge_l(candidate: Sequence, reference: Sequence) -> PRF:
    if not candidate or not reference:
        return ZERO
    lcs = lcs_length(candidate, reference)
    return PRF.from_pr(lcs / len(candidate), lcs / len(reference))


def brevity_penalty(c: int, r: int) -> float:
    if c <= 0:
        return 0.0
    if c > r:
        return 1.0
    return math.exp(1.0 - r / c)


def _clipped_counts(candidate, reference, n):
    cand = Counter(ngrams(candidate, n))
    ref = Counter(ngrams(reference, n))
    return sum((cand & ref).values()), sum(cand.values())


def bleu(candidates: Sequence[Sequence], references: Sequence[Sequence], max_n: int = 4) -> float:
    """Corpus BLEU: clipped matches and candidate n-gram totals are pooled over
    all pairs before taking the geometric mean; no smoothing, so a zero
    precision at any order gives 0."""
    if len(candidates) != len(references):
        raise PairingError(f"{len(candidates)} candidates vs {len(references)} references")
    if max_n < 1:
        raise ParameterError(f"max_n must be >= 1, got {max_n}")
    matches = [0] * max_n
    totals = [0] * max_n
    for cand, ref in zip(candidates, references):
        for k in range(max_n):
            m, t = _clipped_counts(cand, ref, k + 1)
            matches[k] += m
            totals[k] += t
    if any(m == 0 for m in matches):
        return 0.0
    log_p = sum(math.log(m / t) for m, t in zip(matches, totals)) / max_n
    c = sum(len(x) for x in candidates)
    r = sum(len(x) for x in references)
    return brevity_penalty(c, r) * math.exp(log_p)


def sentence_bleu(candidate: Sequence, reference: Sequence, max_n: int = 4) -> float:
    """Single-pair BLEU with add-one smoothing for orders 2 and above."""
    if max_n < 1:
        raise ParameterError(f"max_n must be >= 1, got {max_n}")
    log_p = 0.0
    for k in range(1, max_n + 1):
        m, t = _clipped_counts(candidate, reference, k)
        if k == 1:
            if m == 0:
                return 0.0
            log_p += math.log(m / t)
        else:
            log_p += math.log((m + 1) / (t + 1))
    return brevity_penalty(len(candidate), len(reference)) * math.exp(log_p / max_n)


# ------------------------------------------------------------------ METEOR

def count_chunks(alignment: Sequence[tuple[int, int]]) -> int:
    """Number of maximal runs of matches adjacent in both sequences.
    ``alignment`` holds (candidate index, reference index) pairs."""
    chunks = 0
    prev = None
    for i, j in sorted(alignment):
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor_alignment(candidate: Sequence, reference: Sequence) -> list[tuple[int, int]]:
    """Exact-match alignment with the maximum number of matches and, among
    those, the fewest chunks.

    Branch-and-bound over candidate positions; words that occur once on each
    side have a single choice so the search is only wide where words repeat.
    If ``METEOR_SEARCH_BUDGET`` nodes are exhausted the best alignment found
    so far is returned (it is still maximum-cardinality).
    """
    positions: dict = {}
    for j, tok in enumerate(reference):
        positions.setdefault(tok, []).append(j)
    cand_count = Counter(candidate)
    ref_count = Counter(reference)
    # matches each word still has to make from position i onward
    need = {tok: min(cand_count[tok], ref_count.get(tok, 0)) for tok in cand_count}
    remaining_occ = Counter(candidate)

    best: list = [None, math.inf]
    used = [False] * len(reference)
    path: list[tuple[int, int]] = []
    budget = [METEOR_SEARCH_BUDGET]

    def search(i, chunks, prev_j, prev_matched):
        if budget[0] <= 0 or chunks >= best[1]:
            return
        budget[0] -= 1
        if i == len(candidate):
            best[0], best[1] = list(path), chunks
            return
        tok = candidate[i]
        remaining_occ[tok] -= 1
        options = [j for j in positions.get(tok, ()) if not used[j]] if need.get(tok, 0) else []
        if prev_matched and prev_j + 1 in options:
            options.remove(prev_j + 1)
            options.insert(0, prev_j + 1)
        for j in options:
            extends = prev_matched and j == prev_j + 1
            used[j] = True
            need[tok] -= 1
            path.append((i, j))
            search(i + 1, chunks + (0 if extends else 1), j, True)
            path.pop()
            need[tok] += 1
            used[j] = False
        # skipping is allowed only if the word can still reach its quota later
        if need.get(tok, 0) <= remaining_occ[tok]:
            search(i + 1, chunks, prev_j, False)
        remaining_occ[tok] += 1

    search(0, 0, -2, False)
    return best[0] or []


def meteor(candidate: Sequence, reference: Sequence) -> float:
    """Harmonic mean weighted 9:1 toward recall, scaled by
    ``1 - 0.5 * (chunks / matches) ** 3``."""
    if not candidate or not reference:
        return 0.0
    alignment = meteor_alignment(candidate, reference)
    m = len(alignment)
    if m == 0:
        return 0.0
    p = m / len(candidate)
    r = m / len(reference)
    f_mean = 10 * p * r / (r + 9 * p)
    penalty = METEOR_GAMMA * (count_chunks(alignment) / m) ** METEOR_BETA
    return f_mean * (1.0 - penalty)


# --------------------------------------------------------------- BERTScore

class EmbeddingProvider(Protocol):
    def embed(self, token: str) -> np.ndarray: ...


class HashEmbedder:
    """Unit vectors drawn from a Gaussian seeded by a BLAKE2 hash of the token,
    so equal tokens get equal vectors in every process."""

    def __init__(self, dim: int = 256, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}

    def embed(self, token: str) -> np.ndarray:
        v = self._cache.get(token)
        if v is None:
            digest = hashlib.blake2b(f"{self.seed}\x00{token}".encode("utf-8"), digest_size=16).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "little"))
            v = rng.standard_normal(self.dim)
            v /= np.linalg.norm(v)
            v.setflags(write=False)
            self._cache[token] = v
        return v


class CooccurrenceEmbedder:
    """Corpus-trained embeddings: windowed co-occurrence counts, positive PMI,
    truncated SVD, unit-normalized rows. Tokens without usable statistics fall
    back to a :class:`HashEmbedder`."""

    def __init__(self, texts: Sequence[Sequence[str]], dim: int = 64, window: int = 2,
                 min_count: int = 1, seed: int = 0):
        counts = Counter(tok for toks in texts for tok in toks)
        vocab = sorted(t for t, c in counts.items() if c >= min_count)
        index = {t: i for i, t in enumerate(vocab)}
        co = np.zeros((len(vocab), len(vocab)))
        for toks in texts:
            for i, t in enumerate(toks):
                if t not in index:
                    continue
                for u in toks[max(0, i - window):i]:
                    if u in index:
                        co[index[t], index[u]] += 1
                        co[index[u], index[t]] += 1
        self.fallback = HashEmbedder(dim=dim, seed=seed)
        self.dim = dim
        self._vectors: dict[str, np.ndarray] = {}
        total = co.sum()
        if total == 0:
            return
        row = co.sum(axis=1, keepdims=True)
        col = co.sum(axis=0, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            pmi = np.log(co * total / (row * col))
        ppmi = np.where(np.isfinite(pmi) & (pmi > 0), pmi, 0.0)
        u, s, _ = np.linalg.svd(ppmi, full_matrices=False)
        k = min(dim, int((s > 1e-10).sum()))
        vecs = np.zeros((len(vocab), dim))
        vecs[:, :k] = u[:, :k] * np.sqrt(s[:k])
        for tok, i in index.items():
            norm = np.linalg.norm(vecs[i])
            if norm > 1e-12:
                v = vecs[i] / norm
                v.setflags(write=False)
                self._vectors[tok] = v

    def embed(self, token: str) -> np.ndarray:
        v = self._vectors.get(token)
        return v if v is not None else self.fallback.embed(token)


def bertscore(candidate: Sequence[str], reference: Sequence[str], embedder: EmbeddingProvider) -> PRF:
    """Greedy matching: each candidate token takes its best cosine against the
    reference (precision) and vice versa (recall). Negative cosines count as
    zero."""
    if not candidate or not reference:
        raise EmptyInputError("bertscore needs non-empty candidate and reference")
    X = np.stack([embedder.embed(t) for t in candidate])
    Y = np.stack([embedder.embed(t) for t in reference])
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    Y = Y / np.linalg.norm(Y, axis=1, keepdims=True)
    sim = np.clip(X @ Y.T, 0.0, 1.0)
    return PRF.from_pr(float(sim.max(axis=1).mean()), float(sim.max(axis=0).mean()))


# ------------------------------------------------------------------ reports

@dataclass(frozen=True)
class MetricReport:
    bleu: float
    rouge1: PRF
    rouge2: PRF
    rougeL: PRF
    meteor: float
    bertscore: PRF
    scale: str = "unit"

    def to_percent(self) -> "MetricReport":
        if self.scale == "percent":
            return self
        return replace(
            self,
            bleu=self.bleu * 100, meteor=self.meteor * 100,
            rouge1=self.rouge1.scaled(100), rouge2=self.rouge2.scaled(100),
            rougeL=self.rougeL.scaled(100), bertscore=self.bertscore.scaled(100),
            scale="percent",
        )

    def flat(self, decimals: int | None = None) -> dict:
        """Flat mapping used for ``metrics.json``; ROUGE values are F1."""
        d = {
            "bleu": self.bleu,
            "rouge1": self.rouge1.f1,
            "rouge2": self.rouge2.f1,
            "rougeL": self.rougeL.f1,
            "meteor": self.meteor,
            "bertscore_p": self.bertscore.precision,
            "bertscore_r": self.bertscore.recall,
            "bertscore_f1": self.bertscore.f1,
        }
        if decimals is not None:
            d = {k: round(v, decimals) for k, v in d.items()}
        d["scale"] = self.scale
        return d

    def to_json(self, decimals: int | None = None) -> str:
        return json.dumps(self.flat(decimals), indent=2)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        prf = {k: PRF(**d[k]) for k in ("rouge1", "rouge2", "rougeL", "bertscore")}
        return cls(bleu=d["bleu"], meteor=d["meteor"], scale=d["scale"], **prf)


METRIC_KEYS = ("bleu", "rouge1", "rouge2", "rougeL", "bertscore_f1", "meteor")


def _mean_prf(items: list[PRF]) -> PRF:
    n = len(items)
    return PRF(sum(x.precision for x in items) / n, sum(x.recall for x in items) / n,
               sum(x.f1 for x in items) / n)


def evaluate_corpus(
    generated: Sequence[str],
    references: Sequence[str],
    tokenizer: Callable[[str], list[str]] = word_tokenize,
    embedder: EmbeddingProvider | None = None,
) -> MetricReport:
    """Score generated texts against references (unit scale).

    BLEU is corpus-level; the other metrics are averaged over pairs in input
    order. A pair with an empty side gets BERTScore 0. Use
    ``report.to_percent().flat(2)`` for two-decimal percentages.
    """
    if len(generated) != len(references):
        raise PairingError(f"{len(generated)} generated texts vs {len(references)} references")
    if not generated:
        raise EmptyInputError("no pairs to evaluate")
    embedder = embedder or HashEmbedder()
    cands = [tokenizer(t) for t in generated]
    refs = [tokenizer(t) for t in references]
    r1, r2, rl, met, bs = [], [], [], [], []
    for c, r in zip(cands, refs):
        r1.append(rouge_n(c, r, 1))
        r2.append(rouge_n(c, r, 2))
        rl.append(rouge_l(c, r))
        met.append(meteor(c, r))
        bs.append(bertscore(c, r, embedder) if c and r else ZERO)
    return MetricReport(
        bleu=bleu(cands, refs),
        rouge1=_mean_prf(r1),
        rouge2=_mean_prf(r2),
        rougeL=_mean_prf(rl),
        meteor=sum(met) / len(met),
        bertscore=_mean_prf(bs),
    )
