"""Tail profiles and the lambda measure on a few sets.

Run: python demos/01_tail_profiles.py
"""
import numpy as np

from hilbert_mnc import (AlgebraDesc, AlgebraElement, Ball, ConvexHull, Finite, RightMul, Sum, lambda_profile,
                         random_vector)

rng = np.random.default_rng(0)


def show(label, expr):
    prof = lambda_profile(expr)
    print(f"{label:28s} hi = {np.round(prof.hi, 4)}  lambda ~ {prof.estimate.hi:.6g}")


# The unit ball never gets closer to a finitely generated submodule: profile 1 everywhere.
for blocks in [(1,), (2,), (2, 1)]:
    show(f"unit ball over {blocks}", Ball.around_zero(AlgebraDesc(blocks), 6))

# A finite set is precompact: its profile dies once we pass its support.
desc = AlgebraDesc((2,))
pts = Finite([random_vector(desc, 6, rng, support=3) for _ in range(4)])
show("finite set, support 3", pts)
show("convex hull of it", ConvexHull(pts))

# Right multiplication can shrink lambda by more than the norm of the multiplier.
d2 = AlgebraDesc((1, 1))
p = AlgebraElement.diag(d2, [1, 0])
E = Sum(RightMul(Ball.around_zero(d2, 6, 1.0), p), RightMul(Ball.around_zero(d2, 6, 2.0), AlgebraElement.unit(d2) - p))
show("E over C+C", E)
show("E p", RightMul(E, p))
print(f"||p|| = {p.norm():g}, so lambda(E p) = 1 < lambda(E) ||p|| = 2")
