"""Published corpus counts, text statistics and baseline/fused-context
metric scores, used as regression targets by the tests and the demos."""

CATEGORY_BY_ASPECT = {
    "Islam": {"Report": 860, "Festival": 68, "Education": 890, "Culture": 183},
    "Hinduism": {"Report": 135, "Festival": 67, "Education": 16, "Culture": 24},
    "Christianity": {"Report": 7, "Festival": 12, "Education": 7, "Culture": 2},
    "Buddhism": {"Report": 12, "Festival": 13, "Education": 1, "Culture": 3},
    "Others": {"Report": 190, "Festival": 1, "Education": 16, "Culture": 13},
}
CATEGORY_BY_SENTIMENT = {
    "Islam": {"Positive": 1457, "Negative": 299, "Neutral": 245},
    "Hinduism": {"Positive": 128, "Negative": 58, "Neutral": 56},
    "Christianity": {"Positive": 19, "Negative": 5, "Neutral": 4},
    "Buddhism": {"Positive": 25, "Negative": 3, "Neutral": 1},
    "Others": {"Positive": 88, "Negative": 90, "Neutral": 42},
}
CATEGORY_TOTALS = {"Islam": 2001, "Hinduism": 242, "Christianity": 28, "Buddhism": 29, "Others": 220}
ASPECT_TOTALS = {"Report": 1204, "Festival": 161, "Education": 930, "Culture": 225}
SENTIMENT_TOTALS = {"Positive": 1717, "Negative": 455, "Neutral": 348}
TOTAL = 2520

SPLIT_COUNTS = (1870, 150, 500)

TEXT_STATISTICS = {
    "avg_article_words": 1001.18,
    "avg_article_sentences": 32.75,
    "article_vocab_size": 9750,
    "avg_headline_words": 17.13,
    "avg_headline_sentences": 1.06,
    "headline_vocab_size": 1410,
}
NOVEL_NGRAM_PERCENT = {1: 4.42, 2: 21.48, 3: 42.10, 4: 56.47}

# model -> (baseline, proposed, printed relative change in %), metric order
# bleu, rouge1, rouge2, rougeL, bertscore_f1, meteor (percent scale)
COMPARISON_METRICS = ("bleu", "rouge1", "rouge2", "rougeL", "bertscore_f1", "meteor")
COMPARISON = {
    "mT5": (
        (10.31, 13.47, 4.22, 13.03, 69.34, 9.80),
        (11.66, 17.54, 5.68, 16.85, 71.74, 10.86),
        (13.1, 30.4, 34.6, 29.1, 3.5, 10.8),
    ),
    "mT0": (
        (12.08, 18.84, 7.10, 17.95, 70.34, 13.90),
        (13.13, 22.94, 7.94, 21.48, 72.62, 14.40),
        (8.7, 21.2, 11.8, 19.0, 3.2, 3.6),
    ),
    "mBART": (
        (15.23, 23.01, 7.90, 21.88, 73.21, 13.12),
        (16.58, 24.36, 7.78, 22.63, 74.63, 14.60),
        (8.8, 5.9, -1.5, 3.4, 1.9, 11.3),
    ),
    "BanglaT5": (
        (16.08, 22.84, 7.97, 23.08, 73.57, 15.40),
        (18.61, 26.70, 10.60, 24.19, 75.12, 16.65),
        (15.7, 17.0, 33.0, 4.8, 2.1, 8.1),
    ),
}


def comparison_maps(model: str) -> tuple[dict, dict, dict]:
    """(baseline, proposed, printed delta) as metric -> value mappings."""
    base, prop, delta = COMPARISON[model]
    return tuple(dict(zip(COMPARISON_METRICS, row)) for row in (base, prop, delta))
