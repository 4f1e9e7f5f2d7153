"""Region projectors, their algebra, and how commutators fall off with distance.

Run: python demos/03_local_projectors.py
"""
from kgcollapse.experiments import commutator_scan
from kgcollapse.kg_hilbert import MomentumGrid, gaussian_packet
from kgcollapse.relational_obs import (
    complement,
    idempotence_defect,
    kernel_idempotence_defect,
    nw_projector,
    probability,
)

grid = MomentumGrid.default()
s = gaussian_packet(grid, 0.0, 0.0, 0.5)

P = nw_projector(grid, (-1.0, 1.0), T=0.0)
print(f"P(|x| < 1)           = {probability(P, s):.6f}")
print(f"P(|x| >= 1)          = {probability(complement(P), s):.6f}")
print(f"||P^2 - P||          = {idempotence_defect(P):.1e}")
print(f"raw kernel ||K^2-K|| = {kernel_idempotence_defect(grid, -1.0, 1.0):.3f}")

print("\ncommutator of two unit regions at equal clock time")
print(" d/lambda_C  ||[P1, P2]||")
for d, v in commutator_scan(grid, 1.0, 0.0, [0.5, 1, 2, 5, 10, 20]):
    print(f"  {d:8.2f}  {v:.4e}")
