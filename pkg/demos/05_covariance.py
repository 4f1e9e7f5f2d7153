"""Compare joint probabilities computed in the lab and in boosted frames.

Run: python demos/05_covariance.py
"""
from kgcollapse.causal_order import boost_device
from kgcollapse.experiments import covariance_report, scenario

for name in ("two_slit", "nonlocal_pair", "chain"):
    e = scenario(name)
    for chi in (-0.3, 0.3):
        r = covariance_report(e, chi)
        print(f"{name:<14} rapidity {chi:+.1f}: {len(r.pairs)} outcomes, "
              f"max |dP| = {r.max_abs_deviation:.1e}, max rel = {r.max_rel_deviation:.1e}")

# In the nonlocal pair a boost swaps which detector fires first in coordinate
# time, yet the joint probabilities stay the same.
e = scenario("nonlocal_pair")
a, b = e.device("A"), e.device("B")
for chi in (0.0, -0.3):
    ta, tb = boost_device(a, chi).segment.center.t, boost_device(b, chi).segment.center.t
    print(f"rapidity {chi:+.1f}: t_A = {ta:+.3f}, t_B = {tb:+.3f}")
