"""Build an explicit separated sequence and read off a lower bound for I*.

Run: python demos/03_witness.py
"""
import numpy as np

from hilbert_mnc import AlgebraDesc, Ball, Scale, discrete_witness, lambda_profile

for blocks in [(1,), (2,)]:
    E = Scale(Ball.around_zero(AlgebraDesc(blocks), 8), 2.0)
    w = discrete_witness(E, eps=0.4, twist=len(blocks) > 1 or blocks[0] > 1)
    lam = lambda_profile(E).estimate.hi
    print(f"A = {blocks}: {len(w.points)} points, cuts {w.cuts}")
    print(f"  certified separation (delta^2 - eps)/||E|| = {w.separation:.4f}")
    print(f"  smallest pairwise p-distance          = {w.min_separation():.4f}")
    print(f"  lambda^2 = {lam ** 2:.3f} <= ||E|| I* + eps = {w.set_norm * w.istratescu_lower + w.eps:.3f}")
    print("  pairwise distances:\n", np.round(w.pairwise(), 3))
