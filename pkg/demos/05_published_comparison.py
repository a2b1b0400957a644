"""Recomputing the published relative improvements from the published scores.

Each printed change is compared with the value recomputed from the two
2-decimal scores next to it. Six cells disagree by more than rounding can
explain, and they are flagged below.
"""
# %%
from belinkit.harness import compare, render_report
from belinkit.reference_values import COMPARISON, comparison_maps

tables = []
for model in COMPARISON:
    base, prop, printed = comparison_maps(model)
    table = compare(base, prop, label=model)
    tables.append(table)
    for row in table.rows:
        flag = "" if abs(row.delta_percent - printed[row.metric]) <= 0.05 else "  <- printed %+.1f%%" % printed[row.metric]
        print(f"{model:9s} {row.metric:13s} {row.baseline:6.2f} -> {row.proposed:6.2f}  {row.delta_text():>7s}{flag}")
