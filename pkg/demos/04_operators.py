"""Operators: lambda_0 profiles, finite-rank perturbations and star caps.

Run: python demos/04_operators.py
"""
import numpy as np

from hilbert_mnc import AlgebraDesc, MncParams, ModuleOperator, op_mnc, random_operator, random_vector, theta

rng = np.random.default_rng(4)
desc = AlgebraDesc((2, 1))
N = 6

T = random_operator(desc, N, rng)
K = theta(random_vector(desc, N, rng, support=2), random_vector(desc, N, rng, support=2))
print("||T||              ", round(T.norm(), 4))
print("lambda_0 profile T ", np.round(op_mnc(T, "lambda0").hi, 4))
print("lambda_0 profile T+K", np.round(op_mnc(T + K, "lambda0").hi, 4), " (equal from slot 2 on)")
print("lambda_0 profile K ", np.round(op_mnc(K, "lambda0").hi, 4))

params = MncParams(samples=96, seminorms=6)
I = ModuleOperator.identity(desc, N)
for m in ("chi0", "i0", "alpha0"):
    e = op_mnc(I, m, params)
    print(f"{m:6s} of the identity: [{e.lower:.4f}, {e.upper:.4f}]")
