"""How an article and its labels become one model input.

The baseline input is the task prefix plus the article. The fused input adds
one [SEP]-led segment per enabled label, and when it runs long the article is
cut first so the labels always survive.
"""
# %%
from belinkit.corpus import NewsRecord
from belinkit.fusion import FusionConfig, build_baseline_input, build_multigen_input, render, vocabulary_texts
from belinkit.preprocess import build_vocabulary, normalize_text

record = NewsRecord(
    article="ঈদ উপলক্ষে 🎉 জাতীয় মসজিদে আজ বড় জামাত হয়েছে!!! বিস্তারিত: https://example.com/eid",
    headline="জাতীয় মসজিদে ঈদের বড় জামাত",
    category="islam",
    aspect=" Festival ",
    sentiment="Positive",
)
print("labels canonicalized:", record.category, record.aspect, record.sentiment)
print("normalized article:", normalize_text(record.article))

vocab = build_vocabulary([normalize_text(record.article)] + vocabulary_texts(), max_size=100)

# %% Baseline versus fused input
base = build_baseline_input(record, vocab)
fused = build_multigen_input(record, vocab)
print("baseline:", render(base, vocab))
print("fused:   ", render(fused, vocab))
print("segment spans:", fused.segment_spans)

# %% Only the sentiment segment
only_sentiment = FusionConfig(include_category=False, include_aspect=False)
print("sentiment only:", render(build_multigen_input(record, vocab, only_sentiment), vocab))

# %% A tight length budget trims the article, not the labels
short = build_multigen_input(record, vocab, max_len=14)
print(f"max_len 14 ({len(short)} ids):", render(short, vocab))
