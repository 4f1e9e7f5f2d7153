"""Enumerate and sample outcome histories for the two-slit scenario.

Run: python demos/04_reduction.py
"""
from collections import Counter
from pathlib import Path

from kgcollapse.cli_io import parse
from kgcollapse.reduction import enumerate_tree, sample_paths

e = parse(Path(__file__).parent / "data" / "two_slit.json")
print("layers:", e.decomposition.as_lists())

tree = enumerate_tree(e)
print("\nper-branch probability tables")
for prefix, table in tree.tables:
    label = " & ".join(f"{k}={v.value}" for part in prefix for k, v in part) or "(root)"
    best = max(table.to_dict()["outcomes"], key=lambda o: o["probability"])
    print(f"  after {label}: {len(table.to_dict()['outcomes'])} outcomes, most likely {best['outcome']} "
          f"p={best['probability']:.4f}")

leaves = dict(tree.leaves())
print(f"\n{len(leaves)} leaves, total probability {sum(leaves.values()):.12f}")

paths = sample_paths(e, seed=7, n=2000)
hits = Counter(tuple(sorted(k for k, v in p.outcomes().items() if v.positive)) for p in paths)
print("\nmost frequent clicks in 2000 samples:")
for clicks, n in hits.most_common(5):
    print(f"  {', '.join(clicks) or 'none':<24} {n}")
