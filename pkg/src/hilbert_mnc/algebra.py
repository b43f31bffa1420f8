"""Finite-dimensional C*-algebras realised as block-diagonal matrix algebras.

Every finite-dimensional C*-algebra is a direct sum ``M_{k_1}(C) + ... + M_{k_m}(C)``
of full matrix algebras.  An element is stored as one dense complex matrix per
block; the C*-norm is the largest singular value over all blocks and a state is
a tuple of density blocks paired with elements through the trace.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

ATOL = 1e-10
RTOL = 1e-9


class ShapeError(ValueError):
    """Operands live over different algebras or have the wrong block shapes."""


class NotInvertibleError(ValueError):
    pass


@dataclass(frozen=True)
class AlgebraDesc:
    """Block dimensions ``(k_1, ..., k_m)`` of ``A = M_{k_1} + ... + M_{k_m}``."""

    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(k) for k in self.blocks)
        if not blocks:
            raise ValueError("an algebra needs at least one block")
        if any(k < 1 for k in blocks):
            raise ValueError(f"block dimensions must be >= 1, got {blocks}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def dim(self) -> int:
        """Complex dimension of the algebra."""
        return sum(k * k for k in self.blocks)

    @property
    def is_abelian(self) -> bool:
        return all(k == 1 for k in self.blocks)

    def to_dict(self) -> dict:
        return {"blocks": list(self.blocks)}

    @classmethod
    def from_dict(cls, data: dict) -> "AlgebraDesc":
        return cls(tuple(data["blocks"]))

    def __repr__(self):
        return "AlgebraDesc(" + "+".join(f"M{k}" for k in self.blocks) + ")"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


class AlgebraElement:
    """An element of a block-diagonal matrix algebra.

    ``a * b`` and ``a @ b`` are the algebra product; ``a * 2.0`` scales.
    Instances are immutable.
    """

    __slots__ = ("desc", "blocks")

    def __init__(self, desc: AlgebraDesc, blocks: Sequence[np.ndarray]):
        blocks = tuple(_frozen(b) for b in blocks)
        if len(blocks) != desc.n_blocks:
            raise ShapeError(f"{desc} needs {desc.n_blocks} blocks, got {len(blocks)}")
        for k, b in zip(desc.blocks, blocks):
            if b.shape != (k, k):
                raise ShapeError(f"block of shape {b.shape} in {desc}, expected {(k, k)}")
        object.__setattr__(self, "desc", desc)
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    # constructors -------------------------------------------------------
    @classmethod
    def unit(cls, desc: AlgebraDesc) -> "AlgebraElement":
        return cls(desc, [np.eye(k) for k in desc.blocks])

    @classmethod
    def zero(cls, desc: AlgebraDesc) -> "AlgebraElement":
        return cls(desc, [np.zeros((k, k)) for k in desc.blocks])

    @classmethod
    def scalar(cls, desc: AlgebraDesc, c: complex) -> "AlgebraElement":
        return cls(desc, [c * np.eye(k) for k in desc.blocks])

    @classmethod
    def diag(cls, desc: AlgebraDesc, values: Sequence[complex]) -> "AlgebraElement":
        """Diagonal element; ``values`` lists the diagonal entries block after block."""
        values = list(values)
        if len(values) != sum(desc.blocks):
            raise ShapeError(f"{desc} needs {sum(desc.blocks)} diagonal entries")
        out, i = [], 0
        for k in desc.blocks:
            out.append(np.diag(values[i:i + k]))
            i += k
        return cls(desc, out)

    # arithmetic ---------------------------------------------------------
    def _check(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.desc != self.desc:
            raise ShapeError(f"{self.desc} vs {other.desc}")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.desc, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.desc, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return AlgebraElement(self.desc, [-a for a in self.blocks])

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return self @ other
        if np.isscalar(other):
            return AlgebraElement(self.desc, [a * other for a in self.blocks])
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return AlgebraElement(self.desc, [other * a for a in self.blocks])
        return NotImplemented

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __matmul__(self, other):
        self._check(other)
        return AlgebraElement(self.desc, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.desc, [a.conj().T for a in self.blocks])

    @property
    def H(self) -> "AlgebraElement":
        return self.adjoint()

    def inverse(self, tol: float = ATOL) -> "AlgebraElement":
        if self.min_singular_value() <= tol:
            raise NotInvertibleError(f"element is not invertible (min singular value <= {tol})")
        return AlgebraElement(self.desc, [np.linalg.inv(a) for a in self.blocks])

    # spectral data ------------------------------------------------------
    def block_norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(a, 2) for a in self.blocks])

    def norm(self) -> float:
        """C*-norm: the largest singular value over all blocks."""
        return float(self.block_norms().max())

    def block_min_singular_values(self) -> np.ndarray:
        return np.array([np.linalg.svd(a, compute_uv=False).min() for a in self.blocks])

    def min_singular_value(self) -> float:
        return float(self.block_min_singular_values().min())

    def is_hermitian(self, tol: float = ATOL) -> bool:
        return all(np.abs(a - a.conj().T).max() <= tol for a in self.blocks)

    def is_positive(self, tol: float = ATOL) -> bool:
        if not self.is_hermitian(tol):
            return False
        floor = -tol * max(self.norm(), 1.0)
        return all(np.linalg.eigvalsh((a + a.conj().T) / 2).min() >= floor for a in self.blocks)

    def is_unitary(self, tol: float = ATOL) -> bool:
        return (self.H @ self - AlgebraElement.unit(self.desc)).norm() <= tol

    def is_projection(self, tol: float = ATOL) -> bool:
        return self.is_hermitian(tol) and (self @ self - self).norm() <= tol

    def is_central(self, tol: float = ATOL) -> bool:
        """True when every block is a scalar multiple of the identity."""
        return all(np.abs(a - a[0, 0] * np.eye(len(a))).max() <= tol for a in self.blocks)

    def allclose(self, other: "AlgebraElement", atol: float = ATOL) -> bool:
        self._check(other)
        return (self - other).norm() <= atol

    # serialization ------------------------------------------------------
    def to_json(self) -> list:
        """Per-block row-major nested lists of ``[re, im]`` pairs."""
        return [[[[float(z.real), float(z.imag)] for z in row] for row in b] for b in self.blocks]

    @classmethod
    def from_json(cls, desc: AlgebraDesc, data) -> "AlgebraElement":
        if isinstance(data, (int, float)):
            return cls.scalar(desc, float(data))
        if (isinstance(data, list) and len(data) == 2
                and all(isinstance(v, (int, float)) for v in data)):
            return cls.scalar(desc, complex(data[0], data[1]))
        blocks = []
        for b in data:
            arr = np.asarray(b, dtype=float)
            if arr.ndim != 3 or arr.shape[-1] != 2:
                raise ShapeError(f"block must be a matrix of [re, im] pairs, got shape {arr.shape}")
            blocks.append(arr[..., 0] + 1j * arr[..., 1])
        return cls(desc, blocks)

    def __repr__(self):
        return f"AlgebraElement({self.desc}, {[np.round(b, 6).tolist() for b in self.blocks]})"


def arithmetic(a: AlgebraElement, b=None, kind: str = "add") -> AlgebraElement:
    """Dispatch one of ``add, sub, mul, adjoint, scale, inverse``."""
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a @ b
    if kind == "adjoint":
        return a.adjoint()
    if kind == "scale":
        return a * b
    if kind == "inverse":
        return a.inverse()
    raise ValueError(f"unknown arithmetic kind {kind!r}")


def norm(a: AlgebraElement) -> float:
    return a.norm()


def positivity(a: AlgebraElement) -> bool:
    return a.is_positive()


class State:
    """A state ``phi(a) = sum_i tr(rho_i a_i)`` given by density blocks."""

    __slots__ = ("desc", "densities")

    def __init__(self, desc: AlgebraDesc, densities: Sequence[np.ndarray], tol: float = 1e-10):
        densities = tuple(_frozen(r) for r in densities)
        if len(densities) != desc.n_blocks:
            raise ShapeError(f"{desc} needs {desc.n_blocks} density blocks")
        total = 0.0
        for k, r in zip(desc.blocks, densities):
            if r.shape != (k, k):
                raise ShapeError(f"density block of shape {r.shape}, expected {(k, k)}")
            if np.abs(r - r.conj().T).max() > tol:
                raise ValueError("density blocks must be Hermitian")
            if np.linalg.eigvalsh((r + r.conj().T) / 2).min() < -tol:
                raise ValueError("density blocks must be positive semidefinite")
            total += np.trace(r).real
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"densities must have total trace 1, got {total}")
        object.__setattr__(self, "desc", desc)
        object.__setattr__(self, "densities", densities)

    def __setattr__(self, name, value):
        raise AttributeError("State is immutable")

    @classmethod
    def pure(cls, desc: AlgebraDesc, block: int, vector) -> "State":
        """Vector state ``a -> <v, a_block v>`` on one block."""
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        dens = [np.zeros((k, k), dtype=complex) for k in desc.blocks]
        dens[block] = np.outer(v, v.conj())
        return cls(desc, dens)

    @classmethod
    def tracial(cls, desc: AlgebraDesc) -> "State":
        return cls(desc, [np.eye(k) / sum(desc.blocks) for k in desc.blocks])

    def __call__(self, a: AlgebraElement) -> complex:
        if a.desc != self.desc:
            raise ShapeError(f"{self.desc} vs {a.desc}")
        return complex(sum(np.einsum("ab,ba->", r, x) for r, x in zip(self.densities, a.blocks)))

    def evaluate(self, a: AlgebraElement) -> complex:
        return self(a)

    def conjugate(self, u: AlgebraElement, tol: float = ATOL) -> "State":
        """The state ``a -> phi(u* a u)``; its densities are ``u rho u*``."""
        if not u.is_unitary(tol):
            raise ValueError("conjugate_state needs a unitary")
        dens = [ub @ r @ ub.conj().T for ub, r in zip(u.blocks, self.densities)]
        return State(self.desc, [(d + d.conj().T) / 2 for d in dens])

    def to_json(self) -> list:
        return AlgebraElement(self.desc, self.densities).to_json()

    @classmethod
    def from_json(cls, desc: AlgebraDesc, data) -> "State":
        return cls(desc, AlgebraElement.from_json(desc, data).blocks)

    def __repr__(self):
        return f"State({self.desc}, {[np.round(r, 6).tolist() for r in self.densities]})"


def state_eval(phi: State, a: AlgebraElement) -> complex:
    return phi(a)


def conjugate_state(phi: State, u: AlgebraElement) -> State:
    return phi.conjugate(u)


# random generation -----------------------------------------------------

def _ginibre(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary_matrices(rng: np.random.Generator, k: int, count: int | None = None) -> np.ndarray:
    """Haar unitaries of size ``k``; a stack of ``count`` of them when given."""
    shape = (k, k) if count is None else (count, k, k)
    q, r = np.linalg.qr(_ginibre(rng, shape))
    d = np.diagonal(r, axis1=-2, axis2=-1)
    phase = d / np.where(np.abs(d) > 0, np.abs(d), 1)
    return q * phase[..., None, :]


def random_sample(desc: AlgebraDesc, kind: str, rng: np.random.Generator):
    """Random element of the requested kind.

    ``kind`` is one of ``element``, ``hermitian``, ``positive``, ``unitary``,
    ``projection`` or ``state``.  Deterministic for a seeded ``rng``.
    """
    if kind == "element":
        return AlgebraElement(desc, [_ginibre(rng, (k, k)) / np.sqrt(k) for k in desc.blocks])
    if kind == "hermitian":
        a = random_sample(desc, "element", rng)
        return AlgebraElement(desc, [(b + b.conj().T) / 2 for b in a.blocks])
    if kind == "positive":
        a = random_sample(desc, "element", rng)
        return a.H @ a
    if kind == "unitary":
        return AlgebraElement(desc, [random_unitary_matrices(rng, k) for k in desc.blocks])
    if kind == "projection":
        blocks = []
        for k in desc.blocks:
            u = random_unitary_matrices(rng, k)
            rank = rng.integers(0, k + 1)
            p = u[:, :rank] @ u[:, :rank].conj().T
            blocks.append((p + p.conj().T) / 2)
        return AlgebraElement(desc, blocks)
    if kind == "state":
        if rng.random() < 0.5:
            block = int(rng.integers(desc.n_blocks))
            return State.pure(desc, block, _ginibre(rng, desc.blocks[block]))
        weights = rng.dirichlet(np.ones(desc.n_blocks))
        dens = []
        for w, k in zip(weights, desc.blocks):
            g = _ginibre(rng, (k, k))
            r = g @ g.conj().T
            dens.append(w * r / np.trace(r).real)
        total = sum(np.trace(r).real for r in dens)
        return State(desc, [r / total for r in dens])
    raise ValueError(f"unknown sample kind {kind!r}")
