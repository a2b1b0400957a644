"""Synthetic corpora for demos and tests, since the real articles are not
bundled with the package."""

from __future__ import annotations

import numpy as np

from .corpus import ASPECTS, CATEGORIES, SENTIMENTS, NewsRecord
from .reference_values import CATEGORY_BY_ASPECT, CATEGORY_BY_SENTIMENT

SENTIMENT_HEADLINES = {
    "Positive": "মসজিদে শান্তির বার্তা",
    "Negative": "মন্দিরে হামলার অভিযোগ",
    "Neutral": "ধর্মীয় সভা অনুষ্ঠিত",
}


def _filler(n: int) -> list[str]:
    consonants = "কখগঘচছজঝটঠডঢতথদধনপফবভমযরলশষসহ"
    vowels = ["", "া", "ি", "ী", "ু", "ে", "ো"]
    words = []
    for i in range(n):
        a, b = divmod(i, len(consonants))
        words.append(consonants[b] + vowels[a % len(vowels)] + consonants[(b * 7 + a) % len(consonants)])
    return words


def sentiment_keyed_corpus(
    n_records: int = 512,
    article_words: int = 12,
    filler_size: int = 60,
    seed: int = 0,
) -> list[NewsRecord]:
    """Articles of random filler words whose headline is fully determined by
    the sentiment label. Category and aspect are random and carry no signal,
    so only a model that reads the sentiment segment can beat the label
    prior."""
    rng = np.random.default_rng(seed)
    words = _filler(filler_size)
    records = []
    for i in range(n_records):
        sentiment = SENTIMENTS[i % len(SENTIMENTS)]
        article = " ".join(rng.choice(words, size=article_words)) + "।"
        records.append(NewsRecord(
            article=article,
            headline=SENTIMENT_HEADLINES[sentiment],
            category=CATEGORIES[int(rng.integers(len(CATEGORIES)))],
            aspect=ASPECTS[int(rng.integers(len(ASPECTS)))],
            sentiment=sentiment,
        ))
    return records


def label_replica_corpus(seed: int = 0, article_words: int = 40, headline_words: int = 6) -> list[NewsRecord]:
    """Records whose category/aspect and category/sentiment cross-tabulations
    equal the published corpus counts. The text is filler; the headline reuses
    some article words so novelty rates are neither 0 nor 100."""
    rng = np.random.default_rng(seed)
    words = _filler(200)
    records = []
    for cat in CATEGORIES:
        aspects = [a for a in ASPECTS for _ in range(CATEGORY_BY_ASPECT[cat][a])]
        sentiments = [s for s in SENTIMENTS for _ in range(CATEGORY_BY_SENTIMENT[cat][s])]
        rng.shuffle(sentiments)
        for aspect, sentiment in zip(aspects, sentiments):
            body = list(rng.choice(words, size=article_words))
            start = int(rng.integers(0, article_words - headline_words))
            head = body[start:start + headline_words // 2] + list(rng.choice(words, size=headline_words - headline_words // 2))
            records.append(NewsRecord(" ".join(body) + "।", " ".join(head), cat, aspect, sentiment))
    order = rng.permutation(len(records))
    return [records[i] for i in order]
