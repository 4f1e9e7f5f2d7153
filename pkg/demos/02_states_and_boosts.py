"""Prepare a positive-energy packet, watch it move and boost it.

Run: python demos/02_states_and_boosts.py
"""
from kgcollapse.kg_hilbert import MomentumGrid, boost_norm_drift, boost_state, fidelity, gaussian_packet, norm
from kgcollapse.relational_obs import expectation_X

grid = MomentumGrid.default()
print(f"grid: N={grid.N}, p_max={grid.p_max}, dx={grid.dx:.4f} Compton lengths")

s = gaussian_packet(grid, x0=0.0, p0=0.8, sigma_p=0.4)
print(f"norm {norm(s):.15f}, <p> = {s.momentum_expectation():.4f}, <v> = {s.velocity_expectation():.4f}")

for T in (0.0, 5.0, 10.0):
    print(f"  <X({T:4.1f})> = {expectation_X(s, T):8.4f}")

for chi in (-0.5, 0.5, 1.0):
    b = boost_state(s, chi)
    back = boost_state(b, -chi)
    print(f"rapidity {chi:+.1f}: <p> -> {b.momentum_expectation():+.4f}, "
          f"norm drift {boost_norm_drift(s, chi):.1e}, round-trip infidelity {1 - fidelity(back, s):.1e}")
