"""The truncated standard Hilbert module ``A^N`` inside ``l^2(A)``.

A vector stores, for each algebra block ``b``, an array of shape ``(N, k_b, k_b)``
holding the ``b``-components of its entries ``xi_1, ..., xi_N``.  Stacking those
entries vertically gives an ``(N k_b) x k_b`` matrix ``X_b`` with
``<x, x>_b = X_b^* X_b``, so every module norm is a spectral norm of a dense
matrix.  Slot indices are 0-based throughout: ``truncate(x, n)`` keeps slots
``0 .. n-1``.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .algebra import AlgebraDesc, AlgebraElement, ShapeError, _frozen


# batched helpers --------------------------------------------------------
# A "batch" is a tuple over blocks of arrays shaped (S, N, k, k).

def gram_tails(blocks: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Tail Gram matrices ``sum_{j >= n} xi_j^* xi_j`` for every ``n = 0..N``.

    Input arrays have shape ``(..., N, k, k)``; outputs ``(..., N + 1, k, k)``.
    """
    out = []
    for x in blocks:
        g = np.einsum("...jba,...jbc->...jac", x.conj(), x)
        tails = np.flip(np.cumsum(np.flip(g, axis=-3), axis=-3), axis=-3)
        pad = np.zeros(g.shape[:-3] + (1,) + g.shape[-2:], dtype=complex)
        out.append(np.concatenate([tails, pad], axis=-3))
    return out


def _top_eig(g: np.ndarray) -> np.ndarray:
    g = (g + np.swapaxes(g.conj(), -1, -2)) / 2
    return np.sqrt(np.clip(np.linalg.eigvalsh(g)[..., -1], 0.0, None))


def block_tail_norms(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Norms of ``(I - P_n) x`` per block, shape ``(..., n_blocks, N + 1)``."""
    return np.stack([_top_eig(g) for g in gram_tails(blocks)], axis=-2)


def batch_norms(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Module norms of a batch, shape ``(S,)``."""
    grams = [np.einsum("sjba,sjbc->sac", x.conj(), x) for x in blocks]
    return np.max(np.stack([_top_eig(g) for g in grams], axis=-1), axis=-1)


class ModuleVector:
    """A vector ``(xi_1, ..., xi_N)`` of the free module ``A^N``.

    ``x * a`` multiplies on the right by an algebra element, ``c * x`` scales.
    """

    __slots__ = ("desc", "data")

    def __init__(self, desc: AlgebraDesc, data: Sequence[np.ndarray]):
        data = tuple(_frozen(d) for d in data)
        if len(data) != desc.n_blocks:
            raise ShapeError(f"{desc} needs {desc.n_blocks} blocks")
        n = data[0].shape[0]
        for k, d in zip(desc.blocks, data):
            if d.shape != (n, k, k):
                raise ShapeError(f"block array of shape {d.shape}, expected {(n, k, k)}")
        object.__setattr__(self, "desc", desc)
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("ModuleVector is immutable")

    @property
    def N(self) -> int:
        return self.data[0].shape[0]

    # constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, desc: AlgebraDesc, N: int) -> "ModuleVector":
        return cls(desc, [np.zeros((N, k, k)) for k in desc.blocks])

    @classmethod
    def basis(cls, desc: AlgebraDesc, N: int, slot: int, a: AlgebraElement | None = None) -> "ModuleVector":
        """``e_slot * a``: the element ``a`` (default the unit) placed at one slot."""
        if not 0 <= slot < N:
            raise IndexError(f"slot {slot} out of range for N={N}")
        a = AlgebraElement.unit(desc) if a is None else a
        data = [np.zeros((N, k, k), dtype=complex) for k in desc.blocks]
        for d, ab in zip(data, a.blocks):
            d[slot] = ab
        return cls(desc, data)

    @classmethod
    def from_entries(cls, entries: Sequence[AlgebraElement]) -> "ModuleVector":
        entries = list(entries)
        if not entries:
            raise ShapeError("a module vector needs at least one entry")
        desc = entries[0].desc
        if any(e.desc != desc for e in entries):
            raise ShapeError("entries live over different algebras")
        return cls(desc, [np.stack([e.blocks[b] for e in entries]) for b in range(desc.n_blocks)])

    def entry(self, j: int) -> AlgebraElement:
        return AlgebraElement(self.desc, [d[j] for d in self.data])

    def entries(self) -> list[AlgebraElement]:
        return [self.entry(j) for j in range(self.N)]

    # arithmetic ---------------------------------------------------------
    def _check(self, other: "ModuleVector"):
        if not isinstance(other, ModuleVector):
            raise TypeError(f"expected ModuleVector, got {type(other).__name__}")
        if other.desc != self.desc or other.N != self.N:
            raise ShapeError(f"({self.desc}, N={self.N}) vs ({other.desc}, N={other.N})")

    def __add__(self, other):
        self._check(other)
        return ModuleVector(self.desc, [a + b for a, b in zip(self.data, other.data)])

    def __sub__(self, other):
        self._check(other)
        return ModuleVector(self.desc, [a - b for a, b in zip(self.data, other.data)])

    def __neg__(self):
        return ModuleVector(self.desc, [-a for a in self.data])

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return self.right_mul(other)
        if np.isscalar(other):
            return ModuleVector(self.desc, [a * other for a in self.data])
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return ModuleVector(self.desc, [other * a for a in self.data])
        return NotImplemented

    def right_mul(self, a: AlgebraElement) -> "ModuleVector":
        if a.desc != self.desc:
            raise ShapeError(f"{self.desc} vs {a.desc}")
        return ModuleVector(self.desc, [x @ ab for x, ab in zip(self.data, a.blocks)])

    # geometry -----------------------------------------------------------
    def inner(self, other: "ModuleVector") -> AlgebraElement:
        """``<x, y> = sum_j xi_j^* eta_j``."""
        self._check(other)
        return AlgebraElement(self.desc, [np.einsum("jba,jbc->ac", x.conj(), y)
                                          for x, y in zip(self.data, other.data)])

    def block_norms(self) -> np.ndarray:
        return block_tail_norms(self.data)[:, 0]

    def norm(self) -> float:
        """``||<x, x>||^(1/2)``."""
        return float(self.block_norms().max())

    def truncate(self, n: int) -> "ModuleVector":
        """``P_n x``: keep slots ``0 .. n-1``."""
        if not 0 <= n <= self.N:
            raise IndexError(f"truncation index {n} out of range 0..{self.N}")
        data = [np.array(d) for d in self.data]
        for d in data:
            d[n:] = 0
        return ModuleVector(self.desc, data)

    def tail(self, n: int) -> "ModuleVector":
        """``(I - P_n) x``."""
        return self - self.truncate(n)

    def tail_norms(self) -> np.ndarray:
        """``||(I - P_n) x||`` for ``n = 0..N``."""
        return block_tail_norms(self.data).max(axis=0)

    def support(self, tol: float = 0.0) -> int:
        """Smallest ``m`` such that all slots ``>= m`` vanish."""
        mags = np.max(np.stack([np.abs(d).reshape(self.N, -1).max(axis=1) for d in self.data]), axis=0)
        nz = np.nonzero(mags > tol)[0]
        return int(nz[-1] + 1) if len(nz) else 0

    def flat(self) -> np.ndarray:
        """All coordinates as one complex vector (blocks concatenated)."""
        return np.concatenate([d.ravel() for d in self.data])

    @classmethod
    def from_flat(cls, desc: AlgebraDesc, N: int, v: np.ndarray) -> "ModuleVector":
        data, i = [], 0
        for k in desc.blocks:
            data.append(np.asarray(v[i:i + N * k * k]).reshape(N, k, k))
            i += N * k * k
        return cls(desc, data)

    def allclose(self, other: "ModuleVector", atol: float = 1e-10) -> bool:
        return (self - other).norm() <= atol

    def to_json(self) -> list:
        return [e.to_json() for e in self.entries()]

    def __repr__(self):
        return f"ModuleVector({self.desc}, N={self.N}, norm={self.norm():.6g})"


def inner_product(x: ModuleVector, y: ModuleVector) -> AlgebraElement:
    return x.inner(y)


def vec_norm(x: ModuleVector) -> float:
    return x.norm()


def truncate(x: ModuleVector, n: int) -> ModuleVector:
    return x.truncate(n)


def tail(x: ModuleVector, n: int) -> ModuleVector:
    return x.tail(n)


def random_vector(desc: AlgebraDesc, N: int, rng: np.random.Generator, support: int | None = None) -> ModuleVector:
    """Gaussian vector, optionally supported in the first ``support`` slots."""
    data = []
    for k in desc.blocks:
        d = (rng.standard_normal((N, k, k)) + 1j * rng.standard_normal((N, k, k))) / np.sqrt(2 * k)
        if support is not None:
            d[support:] = 0
        data.append(d)
    return ModuleVector(desc, data)


class ModuleOperator:
    """An adjointable operator on ``A^N``: an ``N x N`` grid over ``A``.

    ``(T x)_i = sum_j T[i][j] xi_j``.  Per block the grid is stored as an array of
    shape ``(N, N, k, k)``; ``T @ x`` applies, ``T @ S`` composes.
    """

    __slots__ = ("desc", "data")

    def __init__(self, desc: AlgebraDesc, data: Sequence[np.ndarray]):
        data = tuple(_frozen(d) for d in data)
        if len(data) != desc.n_blocks:
            raise ShapeError(f"{desc} needs {desc.n_blocks} blocks")
        n = data[0].shape[0]
        for k, d in zip(desc.blocks, data):
            if d.shape != (n, n, k, k):
                raise ShapeError(f"grid block of shape {d.shape}, expected {(n, n, k, k)}")
        object.__setattr__(self, "desc", desc)
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("ModuleOperator is immutable")

    @property
    def N(self) -> int:
        return self.data[0].shape[0]

    @classmethod
    def identity(cls, desc: AlgebraDesc, N: int) -> "ModuleOperator":
        return cls(desc, [np.einsum("ij,ab->ijab", np.eye(N), np.eye(k)) for k in desc.blocks])

    @classmethod
    def zeros(cls, desc: AlgebraDesc, N: int) -> "ModuleOperator":
        return cls(desc, [np.zeros((N, N, k, k)) for k in desc.blocks])

    @classmethod
    def from_grid(cls, grid: Sequence[Sequence[AlgebraElement]]) -> "ModuleOperator":
        desc = grid[0][0].desc
        N = len(grid)
        if any(len(row) != N for row in grid):
            raise ShapeError("operator grid must be square")
        return cls(desc, [np.array([[grid[i][j].blocks[b] for j in range(N)] for i in range(N)])
                          for b in range(desc.n_blocks)])

    def entry(self, i: int, j: int) -> AlgebraElement:
        return AlgebraElement(self.desc, [d[i, j] for d in self.data])

    def grid(self) -> list[list[AlgebraElement]]:
        return [[self.entry(i, j) for j in range(self.N)] for i in range(self.N)]

    def _check(self, other):
        if other.desc != self.desc or other.N != self.N:
            raise ShapeError(f"({self.desc}, N={self.N}) vs ({other.desc}, N={other.N})")

    def apply(self, x: ModuleVector) -> ModuleVector:
        self._check(x)
        return ModuleVector(self.desc, [np.einsum("ijab,jbc->iac", t, d) for t, d in zip(self.data, x.data)])

    def apply_batch(self, batch: Sequence[np.ndarray]) -> list[np.ndarray]:
        return [np.einsum("ijab,sjbc->siac", t, d) for t, d in zip(self.data, batch)]

    def compose(self, other: "ModuleOperator") -> "ModuleOperator":
        self._check(other)
        return ModuleOperator(self.desc, [np.einsum("ijab,jlbc->ilac", t, s) for t, s in zip(self.data, other.data)])

    def __matmul__(self, other):
        if isinstance(other, ModuleVector):
            return self.apply(other)
        if isinstance(other, ModuleOperator):
            return self.compose(other)
        return NotImplemented

    def __add__(self, other):
        self._check(other)
        return ModuleOperator(self.desc, [a + b for a, b in zip(self.data, other.data)])

    def __sub__(self, other):
        self._check(other)
        return ModuleOperator(self.desc, [a - b for a, b in zip(self.data, other.data)])

    def __neg__(self):
        return ModuleOperator(self.desc, [-a for a in self.data])

    def __mul__(self, c):
        if np.isscalar(c):
            return ModuleOperator(self.desc, [a * c for a in self.data])
        return NotImplemented

    __rmul__ = __mul__

    def adjoint(self) -> "ModuleOperator":
        """``adj(T)[i][j] = T[j][i]^*``."""
        return ModuleOperator(self.desc, [np.conj(np.transpose(d, (1, 0, 3, 2))) for d in self.data])

    @property
    def H(self) -> "ModuleOperator":
        return self.adjoint()

    def flat_blocks(self) -> list[np.ndarray]:
        """Per block the ``(N k) x (N k)`` complex matrix of the operator."""
        return [d.transpose(0, 2, 1, 3).reshape(self.N * k, self.N * k)
                for k, d in zip(self.desc.blocks, self.data)]

    def block_tail_norms(self) -> np.ndarray:
        """``||(I - P_n) T||`` per block for ``n = 0..N``, shape ``(n_blocks, N + 1)``."""
        out = np.zeros((self.desc.n_blocks, self.N + 1))
        for b, (k, m) in enumerate(zip(self.desc.blocks, self.flat_blocks())):
            for n in range(self.N):
                out[b, n] = np.linalg.norm(m[n * k:], 2)
        return out

    def tail_norms(self) -> np.ndarray:
        return self.block_tail_norms().max(axis=0)

    def norm(self) -> float:
        """C*-norm of ``M_N(A)``: the largest singular value of the flattened matrix."""
        return float(max(np.linalg.norm(m, 2) for m in self.flat_blocks()))

    def tail_norm(self, n: int) -> float:
        if not 0 <= n <= self.N:
            raise IndexError(f"truncation index {n} out of range 0..{self.N}")
        return float(self.tail_norms()[n])

    def tail_maximizer(self, n: int) -> ModuleVector:
        """A unit vector ``v`` attaining ``||(I - P_n) T v|| = ||(I - P_n) T||`` in every block."""
        data = []
        for k, m in zip(self.desc.blocks, self.flat_blocks()):
            col = np.zeros(self.N * k, dtype=complex)
            if n < self.N:
                _, s, vh = np.linalg.svd(m[n * k:])
                if s[0] > 0:
                    col = vh[0].conj()
            block = np.zeros((self.N * k, k), dtype=complex)
            block[:, 0] = col
            data.append(block.reshape(self.N, k, k))
        return ModuleVector(self.desc, data)

    def support(self, tol: float = 0.0) -> int:
        """Smallest ``m`` such that all rows ``>= m`` vanish (the range sits in the first ``m`` slots)."""
        mags = np.max(np.stack([np.abs(d).reshape(self.N, -1).max(axis=1) for d in self.data]), axis=0)
        nz = np.nonzero(mags > tol)[0]
        return int(nz[-1] + 1) if len(nz) else 0

    def allclose(self, other: "ModuleOperator", atol: float = 1e-10) -> bool:
        return (self - other).norm() <= atol

    def to_json(self) -> list:
        return [[e.to_json() for e in row] for row in self.grid()]

    def __repr__(self):
        return f"ModuleOperator({self.desc}, N={self.N}, norm={self.norm():.6g})"


def operator_algebra(T: ModuleOperator, S=None, kind: str = "apply"):
    """Dispatch one of ``apply, add, compose, adjoint, scale``."""
    if kind == "apply":
        return T.apply(S)
    if kind == "add":
        return T + S
    if kind == "compose":
        return T.compose(S)
    if kind == "adjoint":
        return T.adjoint()
    if kind == "scale":
        return T * S
    raise ValueError(f"unknown operator kind {kind!r}")


def theta(y: ModuleVector, z: ModuleVector) -> ModuleOperator:
    """The rank-one operator ``x -> z <y, x>``; its grid entry ``(i, j)`` is ``z_i y_j^*``."""
    y._check(z)
    return ModuleOperator(y.desc, [np.einsum("iab,jcb->ijac", zd, yd.conj()) for yd, zd in zip(y.data, z.data)])


def op_norm(T: ModuleOperator) -> float:
    return T.norm()


def tail_op_norm(T: ModuleOperator, n: int) -> float:
    return T.tail_norm(n)


def random_operator(desc: AlgebraDesc, N: int, rng: np.random.Generator) -> ModuleOperator:
    data = []
    for k in desc.blocks:
        shape = (N, N, k, k)
        data.append((rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2 * N * k))
    return ModuleOperator(desc, data)


def submodule_project(x: ModuleVector, generators: Sequence[ModuleVector],
                      rank_tol: float = 1e-10) -> tuple[ModuleVector, float]:
    """Orthogonal projection of ``x`` onto the right submodule spanned by ``generators``.

    The submodule's complex span is ``{g * e : g a generator, e a matrix unit of A}``.
    Projecting orthogonally for the trace inner product ``tr <x, y>`` onto that
    span gives the module projection, because the trace-orthogonal complement of
    a right submodule is its module-orthogonal complement.  Returns the
    projection and the module distance ``||x - P x||``.
    """
    generators = list(generators)
    if not generators:
        raise ValueError("need at least one generator")
    desc, N = x.desc, x.N
    cols = []
    for g in generators:
        x._check(g)
        for b, k in enumerate(desc.blocks):
            for r in range(k):
                for c in range(k):
                    unit = [np.zeros((kk, kk)) for kk in desc.blocks]
                    unit[b][r, c] = 1.0
                    cols.append(g.right_mul(AlgebraElement(desc, unit)).flat())
    m = np.stack(cols, axis=1)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        proj = np.zeros_like(x.flat())
    else:
        q = u[:, s > rank_tol * max(s[0], 1.0)]
        proj = q @ (q.conj().T @ x.flat())
    p = ModuleVector.from_flat(desc, N, proj)
    return p, (x - p).norm()


# JSON -------------------------------------------------------------------

def vector_from_json(desc: AlgebraDesc, N: int, data) -> ModuleVector:
    """Parse a vector: a list of ``N`` elements, ``"zero"``, or ``{"basis": j, "element": a}``."""
    if data is None or data == "zero":
        return ModuleVector.zeros(desc, N)
    if isinstance(data, dict):
        if "basis" not in data:
            raise ValueError(f"vector object needs a 'basis' slot, got keys {sorted(data)}")
        a = AlgebraElement.from_json(desc, data["element"]) if "element" in data else None
        return ModuleVector.basis(desc, N, int(data["basis"]), a)
    if not isinstance(data, list) or len(data) != N:
        raise ShapeError(f"vector needs {N} entries")
    return ModuleVector.from_entries([AlgebraElement.from_json(desc, e) for e in data])


def operator_from_json(desc: AlgebraDesc, N: int, data, operators: dict | None = None) -> ModuleOperator:
    """Parse an operator: an ``N x N`` grid, or a tagged object.

    Tags: ``grid``, ``identity``, ``zero``, ``theta`` (``y``, ``z``), ``sum``
    (``terms``), ``scale`` (``factor``, ``operator``), ``ref`` (``name``).
    """
    if isinstance(data, str):
        data = {"kind": data} if data in ("identity", "zero") else {"kind": "ref", "name": data}
    if isinstance(data, list):
        data = {"kind": "grid", "grid": data}
    if not isinstance(data, dict) or "kind" not in data:
        raise ValueError(f"operator must be a grid or an object with a 'kind', got {data!r}")
    kind = data["kind"]
    if kind == "grid":
        grid = data["grid"]
        if len(grid) != N or any(len(row) != N for row in grid):
            raise ShapeError(f"operator grid must be {N} x {N}")
        return ModuleOperator.from_grid([[AlgebraElement.from_json(desc, e) for e in row] for row in grid])
    if kind == "identity":
        return ModuleOperator.identity(desc, N)
    if kind == "zero":
        return ModuleOperator.zeros(desc, N)
    if kind == "theta":
        return theta(vector_from_json(desc, N, data["y"]), vector_from_json(desc, N, data["z"]))
    if kind == "sum":
        terms = [operator_from_json(desc, N, t, operators) for t in data["terms"]]
        out = terms[0]
        for t in terms[1:]:
            out = out + t
        return out
    if kind == "scale":
        return float(data["factor"]) * operator_from_json(desc, N, data["operator"], operators)
    if kind == "ref":
        if operators is None or data["name"] not in operators:
            raise KeyError(f"unknown operator reference {data['name']!r}")
        return operators[data["name"]]
    raise ValueError(f"unknown operator kind {kind!r}")
