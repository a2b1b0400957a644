"""Scoring generated headlines: ROUGE, BLEU, METEOR and embedding matching.

Each metric is shown on a pair small enough to check by hand.
"""
# %%
import math

from belinkit.metrics import (
    CooccurrenceEmbedder, HashEmbedder, bertscore, bleu, brevity_penalty, count_chunks,
    evaluate_corpus, lcs_length, meteor, meteor_alignment, rouge_l, rouge_n, sentence_bleu,
)

cand = "the cat sat".split()
ref = "the cat sat down".split()
print("ROUGE-1:", rouge_n(cand, ref, 1))
print("LCS of abcd/acbd:", lcs_length("abcd", "acbd"), rouge_l(list("abcd"), list("acbd")))

# %% BLEU: the brevity penalty dominates a short but exact candidate
print("BP(5, 10) =", brevity_penalty(5, 10), "vs e^-1 =", math.exp(-1))
print("corpus BLEU abcd | abcde =", bleu([list("abcd")], [list("abcde")]))
print("sentence BLEU with smoothing, abc | acb =", sentence_bleu(list("abc"), list("acb")))

# %% METEOR picks the alignment with the fewest chunks
al = meteor_alignment(list("ab"), list("aab"))
print("alignment", al, "chunks", count_chunks(al))
print("METEOR identical 4 tokens:", meteor(list("abcd"), list("abcd")))

# %% Embedding matching with two providers
texts = [s.split() for s in ("রাজা দেশ শাসন করেন", "রানী দেশ শাসন করেন", "বিড়াল মাছ খায়")] * 5
hashed, learned = HashEmbedder(), CooccurrenceEmbedder(texts, dim=8)
for name, emb in (("hash", hashed), ("cooccurrence", learned)):
    print(name, bertscore(["রাজা"], ["রানী"], emb))

# %% Corpus evaluation at percent scale
report = evaluate_corpus(["জাতীয় মসজিদে ঈদের জামাত", "বৃষ্টিতে সভা স্থগিত"],
                         ["জাতীয় মসজিদে ঈদের বড় জামাত", "সভা স্থগিত"])
print(report.to_percent().to_json(decimals=2))
