"""Semi-norm measures: alpha, chi and I for one semi-norm, then the star versions.

Run: python demos/02_seminorm_measures.py
"""
import numpy as np

from hilbert_mnc import (AlgebraDesc, Ball, MncParams, State, make_seminorm, random_seminorm, random_vector,
                         seminorm_mnc_all, star_aggregate_all, transform_seminorm)
from hilbert_mnc.algebra import random_sample
from hilbert_mnc.seminorm import random_weights

rng = np.random.default_rng(1)
params = MncParams(samples=128, seminorms=8)

# Over C with constant weights the semi-norm is the Euclidean norm.  The unit
# ball holds orthonormal vectors sqrt(2) apart; the sampled packing bound
# approaches that from below (the grid is geometric, ratio 1.1).
C = AlgebraDesc((1,))
p = make_seminorm(State.tracial(C), random_weights(C, 8, rng, "constant"))
B = Ball.around_zero(C, 8)
for name, est in seminorm_mnc_all(B, p, params).items():
    print(f"{name:11s} [{est.lower:.4f}, {est.upper:.4f}]  ({est.validity})")

# Star measures: lower bounds are the best over sampled semi-norms; the upper
# bounds come from the lambda profile and are certified.
M2 = AlgebraDesc((2,))
for name, est in star_aggregate_all(Ball.around_zero(M2, 8, 1.5), params).items():
    print(f"{name}* over M2, radius 1.5: [{est.lower:.4f}, {est.upper:.4f}]  "
          f"lower {est.lower_validity}, upper {est.upper_validity}")

# Moving a unitary from the vector onto the semi-norm changes nothing.
q = random_seminorm(M2, 8, rng)
x = random_vector(M2, 8, rng)
u = random_sample(M2, "unitary", rng)
print("p(x u) - p^u(x) =", q(x.right_mul(u)) - transform_seminorm(q, u)(x))
