"""Semi-norms ``p(x) = (sum_j |phi(eta_j^* xi_j)|^2)^(1/2)`` on ``A^N``.

For fixed ``(phi, eta)`` the map ``x -> (phi(eta_j^* xi_j))_j`` is complex linear
into ``C^N``, so ``p`` is the Euclidean norm of a feature vector.  All point
cloud work (covering, packing, separations) is done on those features.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraDesc, AlgebraElement, ShapeError, State, random_sample, random_unitary_matrices
from .module import ModuleVector

NORMALIZATION_TOL = 1e-10
WEIGHT_PATTERNS = ("constant", "unitary", "sparse", "random")


@dataclass(frozen=True, eq=False)
class SemiNorm:
    state: State
    weights: ModuleVector

    def __post_init__(self):
        if self.weights.desc != self.state.desc:
            raise ShapeError(f"{self.state.desc} vs {self.weights.desc}")
        # K[j] = rho eta_j^*, so that phi(eta_j^* xi_j) = sum K[j] * xi_j^T entrywise
        kernel = tuple(np.einsum("ab,jcb->jca", r, w.conj())
                       for r, w in zip(self.state.densities, self.weights.data))
        object.__setattr__(self, "_kernel", kernel)

    @property
    def desc(self) -> AlgebraDesc:
        return self.state.desc

    @property
    def N(self) -> int:
        return self.weights.N

    def weight_masses(self) -> np.ndarray:
        """``phi(eta_j^* eta_j)`` for every slot."""
        return np.array([self.state(e.H @ e).real for e in self.weights.entries()])

    def normalization(self) -> float:
        return float(self.weight_masses().max())

    def features(self, batch) -> np.ndarray:
        """``phi(eta_j^* xi_j)`` for a batch ``(S, N, k, k)`` per block; shape ``(S, N)``."""
        return sum(np.einsum("jca,sjca->sj", K, x) for K, x in zip(self._kernel, batch))

    def feature(self, x: ModuleVector) -> np.ndarray:
        return self.features([d[None] for d in x.data])[0]

    def __call__(self, x: ModuleVector) -> float:
        if x.desc != self.desc or x.N != self.N:
            raise ShapeError(f"({x.desc}, N={x.N}) vs ({self.desc}, N={self.N})")
        return float(np.linalg.norm(self.feature(x)))

    def evaluate_batch(self, batch) -> np.ndarray:
        return np.linalg.norm(self.features(batch), axis=1)

    def to_json(self) -> dict:
        return {"state": self.state.to_json(), "weights": self.weights.to_json()}


def make_seminorm(state: State, weights: ModuleVector) -> SemiNorm:
    """Rescale ``weights`` so that ``sup_j phi(eta_j^* eta_j) = 1``."""
    tmp = SemiNorm(state, weights)
    mass = tmp.normalization()
    if not mass > 1e-14:
        raise ValueError("all weights vanish under the state")
    return SemiNorm(state, weights * (1.0 / np.sqrt(mass)))


def seminorm_eval(p: SemiNorm, x: ModuleVector) -> float:
    return p(x)


def random_weights(desc: AlgebraDesc, N: int, rng: np.random.Generator, pattern: str) -> ModuleVector:
    if pattern == "constant":
        return ModuleVector.from_entries([AlgebraElement.unit(desc)] * N)
    if pattern == "unitary":
        return ModuleVector(desc, [random_unitary_matrices(rng, k, N) for k in desc.blocks])
    if pattern in ("sparse", "random"):
        entries = [random_sample(desc, "element", rng) for _ in range(N)]
        if pattern == "sparse":
            keep = rng.random(N) < 0.4
            keep[rng.integers(N)] = True
            entries = [e if kp else AlgebraElement.zero(desc) for e, kp in zip(entries, keep)]
        return ModuleVector.from_entries(entries)
    raise ValueError(f"unknown weight pattern {pattern!r}")


def random_seminorm(desc: AlgebraDesc, N: int, rng: np.random.Generator,
                    pattern: str | None = None) -> SemiNorm:
    """A random admissible semi-norm; pure and mixed states, several weight patterns."""
    pattern = pattern or WEIGHT_PATTERNS[int(rng.integers(len(WEIGHT_PATTERNS)))]
    for _ in range(100):
        state = random_sample(desc, "state", rng)
        weights = random_weights(desc, N, rng, pattern)
        if SemiNorm(state, weights).normalization() > 1e-8:
            return make_seminorm(state, weights)
    raise RuntimeError("could not draw a non-degenerate semi-norm")


def transform_seminorm(p: SemiNorm, u: AlgebraElement) -> SemiNorm:
    """The pair ``(phi^u, eta u^*)``, which satisfies ``p(x u) = q(x)``."""
    if not u.is_unitary():
        raise ValueError("transform_seminorm needs a unitary")
    return SemiNorm(p.state.conjugate(u), p.weights.right_mul(u.H))
