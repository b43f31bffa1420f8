"""Expression trees for bounded subsets of ``A^N`` and certified tail bounds.

Every node answers three questions:

* ``bounds`` -- per algebra block ``b`` and level ``n = 0..N`` an interval
  containing ``sup_{x in E} ||(I - P_n) x||_b``.  Because the module norm is the
  maximum of the block norms, the tail supremum of ``E`` is the maximum of the
  block suprema, and propagating intervals block by block is much tighter than
  propagating the scalar supremum (sets such as ``B p + 2 B (1 - p)`` for a
  central projection ``p`` only come out exact this way).
* ``sample`` -- random members, drawn by construction, as an independent oracle.
* ``maximizers`` -- explicit members that attain or nearly attain the tail
  supremum at one level; used to refine lower bounds and by the witness search.

Ball exactness: ``sup_{||v|| <= r} ||(I - P_n)(c + v)||_b = ||(I - P_n) c||_b + r``
for ``n < N``.  Take ``v = r t / ||t||`` with ``t`` the block-``b`` tail of ``c``
(or ``r`` times the unit placed at slot ``n`` when that tail vanishes); ``v`` is a
positive multiple of ``t`` so the norms add.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import AlgebraDesc, AlgebraElement, ShapeError, random_unitary_matrices
from .module import ModuleOperator, ModuleVector, batch_norms, block_tail_norms

Batch = list  # per block: array of shape (S, N, k, k)

FINITE_LIMIT = 4096
MAXIMIZER_LIMIT = 16
TRANSLATE_LIMIT = 32
DEFAULT_SAMPLES = 64


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi):
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_list(self) -> list:
        return [self.lo, self.hi]

    def __iter__(self):
        yield self.lo
        yield self.hi


def _as_batch(vectors: Sequence[ModuleVector]) -> Batch:
    return [np.stack([v.data[b] for v in vectors]) for b in range(vectors[0].desc.n_blocks)]


def _unbatch(desc: AlgebraDesc, batch: Batch) -> list[ModuleVector]:
    return [ModuleVector(desc, [a[i] for a in batch]) for i in range(batch[0].shape[0])]


def _concat(batches: Sequence[Batch]) -> Batch:
    return [np.concatenate([bt[b] for bt in batches]) for b in range(len(batches[0]))]


def _take(batch: Batch, idx) -> Batch:
    return [a[idx] for a in batch]


class BoundsContext:
    """Per-call memo and refinement settings for ``bounds``."""

    def __init__(self, samples: int = DEFAULT_SAMPLES, seed: int = 0):
        self.samples = int(samples)
        self.seed = int(seed)
        # values keep their node alive so ids of temporaries are never reused
        self.memo: dict[int, tuple["SetExpr", np.ndarray, np.ndarray]] = {}


class SetExpr:
    """Base class of set expression nodes.  Nodes are immutable."""

    kind: str = ""

    def children(self) -> tuple["SetExpr", ...]:
        return ()

    @property
    def desc(self) -> AlgebraDesc:
        return self.children()[0].desc

    @property
    def N(self) -> int:
        return self.children()[0].N

    # structural flags ---------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return False

    def finite_points(self) -> Batch:
        raise TypeError(f"{self.kind} is not a finite set")

    @property
    def is_balanced(self) -> bool:
        """Closed under right multiplication by unitaries (decided structurally)."""
        return False

    @property
    def tail_uniform(self) -> bool:
        return False

    # bounds -------------------------------------------------------------
    def _analytic(self, ctx: BoundsContext) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _refines(self) -> bool:
        return False

    def bounds(self, ctx: BoundsContext | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Block-wise ``(lo, hi)`` arrays of shape ``(n_blocks, N + 1)``."""
        ctx = ctx or BoundsContext()
        key = id(self)
        if key in ctx.memo:
            return ctx.memo[key][1:]
        if self.is_finite and self._finite_count() <= FINITE_LIMIT:
            t = block_tail_norms(self.finite_points()).max(axis=0)
            lo, hi = t, t.copy()
        else:
            lo, hi = self._analytic(ctx)
            lo, hi = np.array(lo, dtype=float), np.array(hi, dtype=float)
            if self._refines() and np.any(lo < hi) and ctx.samples >= 0:
                lo = np.maximum(lo, self._cloud_tails(ctx))
            lo = np.minimum(np.maximum(lo, 0.0), hi)
        hi[:, -1] = 0.0
        lo[:, -1] = 0.0
        ctx.memo[key] = (self, lo, hi)
        return lo, hi

    def _finite_count(self) -> int:
        return self.finite_points()[0].shape[0]

    def _cloud_tails(self, ctx: BoundsContext) -> np.ndarray:
        rng = np.random.default_rng([ctx.seed, self.fingerprint()])
        parts = [self.maximizers(n) for n in range(self.N)]
        if ctx.samples > 0:
            parts.append(self.sample_batch(rng, ctx.samples))
        return block_tail_norms(_concat(parts)).max(axis=0)

    def fingerprint(self) -> int:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "little")

    # sampling -----------------------------------------------------------
    def sample_batch(self, rng: np.random.Generator, count: int) -> Batch:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> ModuleVector:
        return _unbatch(self.desc, self.sample_batch(rng, 1))[0]

    def maximizers(self, n: int) -> Batch:
        """Members of the set whose tails beyond ``n`` are (near) maximal."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    # convenience --------------------------------------------------------
    def __add__(self, other):
        return Sum(self, other)

    def __or__(self, other):
        return Union(self, other)

    def __rmul__(self, c):
        return Scale(self, c)

    def __mul__(self, a):
        if isinstance(a, AlgebraElement):
            return RightMul(self, a)
        return Scale(self, a)


def _check_same(exprs: Sequence[SetExpr]):
    d, n = exprs[0].desc, exprs[0].N
    for e in exprs[1:]:
        if e.desc != d or e.N != n:
            raise ShapeError(f"set operands over ({d}, N={n}) and ({e.desc}, N={e.N})")


def _check_vec(v: ModuleVector, desc: AlgebraDesc, N: int):
    if v.desc != desc or v.N != N:
        raise ShapeError(f"vector over ({v.desc}, N={v.N}), expected ({desc}, N={N})")


# leaves -----------------------------------------------------------------

class Finite(SetExpr):
    kind = "finite"

    def __init__(self, points: Sequence[ModuleVector]):
        points = tuple(points)
        if not points:
            raise ValueError("a finite set needs at least one point")
        for p in points[1:]:
            _check_vec(p, points[0].desc, points[0].N)
        self.points = points
        self._batch = _as_batch(points)

    @property
    def desc(self):
        return self.points[0].desc

    @property
    def N(self):
        return self.points[0].N

    @property
    def is_finite(self):
        return True

    def finite_points(self):
        return self._batch

    @property
    def is_balanced(self):
        return all(p.norm() == 0 for p in self.points)

    def sample_batch(self, rng, count):
        return _take(self._batch, rng.integers(len(self.points), size=count))

    def maximizers(self, n):
        return self._batch

    def to_dict(self):
        return {"kind": self.kind, "points": [p.to_json() for p in self.points]}


class Ball(SetExpr):
    """Closed ball ``{x : ||x - center|| <= radius}``."""

    kind = "ball"

    def __init__(self, center: ModuleVector, radius: float = 1.0):
        if radius < 0:
            raise ValueError(f"negative radius {radius}")
        self.center = center
        self.radius = float(radius)

    @classmethod
    def around_zero(cls, desc: AlgebraDesc, N: int, radius: float = 1.0) -> "Ball":
        return cls(ModuleVector.zeros(desc, N), radius)

    @property
    def desc(self):
        return self.center.desc

    @property
    def N(self):
        return self.center.N

    @property
    def is_balanced(self):
        return self.center.norm() == 0

    @property
    def tail_uniform(self):
        return True

    def _analytic(self, ctx):
        t = block_tail_norms(self.center.data)
        hi = t + self.radius
        return hi, hi.copy()

    def sample_batch(self, rng, count):
        desc, N = self.desc, self.N
        d = [(rng.standard_normal((count, N, k, k)) + 1j * rng.standard_normal((count, N, k, k)))
             for k in desc.blocks]
        # half of the draws only live beyond a random slot, to reach the tails
        cut = rng.integers(N, size=count)
        keep = (np.arange(N)[None, :] >= cut[:, None]) | (rng.random(count) < 0.5)[:, None]
        d = [a * keep[:, :, None, None] for a in d]
        nrm = batch_norms(d)
        scale = np.where(rng.random(count) < 0.5, 1.0, rng.random(count)) * self.radius
        scale = scale / np.where(nrm > 0, nrm, 1.0)
        return [c[None] + a * scale[:, None, None, None] for c, a in zip(self.center.data, d)]

    def maximizers(self, n):
        desc, N = self.desc, self.N
        c = self.center
        if n >= N:
            return [a[None] for a in c.data]
        aligned, unit = [], []
        t = c.tail(n)
        tnorms = t.block_norms()
        for b, k in enumerate(desc.blocks):
            e = np.zeros((N, k, k), dtype=complex)
            e[n] = np.eye(k)
            w = t.data[b] / tnorms[b] if tnorms[b] > 1e-14 else e
            aligned.append(c.data[b] + self.radius * w)
            unit.append(c.data[b] + self.radius * e)
        return [np.stack([a, u]) for a, u in zip(aligned, unit)]

    def to_dict(self):
        return {"kind": self.kind, "center": self.center.to_json(), "radius": self.radius}


class OperatorImage(SetExpr):
    """``T(B_1)``, the image of the closed unit ball."""

    kind = "operator_image"

    def __init__(self, operator: ModuleOperator, tail_uniform: bool = False):
        self.operator = operator
        self._tail_uniform = bool(tail_uniform)

    @property
    def desc(self):
        return self.operator.desc

    @property
    def N(self):
        return self.operator.N

    @property
    def is_balanced(self):
        return True

    @property
    def tail_uniform(self):
        return self._tail_uniform

    def _analytic(self, ctx):
        t = self.operator.block_tail_norms()
        return t, t.copy()

    def sample_batch(self, rng, count):
        ball = Ball.around_zero(self.desc, self.N, 1.0)
        return self.operator.apply_batch(ball.sample_batch(rng, count))

    def maximizers(self, n):
        v = self.operator.tail_maximizer(min(n, self.N - 1))
        return [a[None] for a in self.operator.apply(v).data]

    def to_dict(self):
        return {"kind": self.kind, "operator": self.operator.to_json(), "tail_uniform": self._tail_uniform}


# unary nodes ------------------------------------------------------------

class _Unary(SetExpr):
    def __init__(self, child: SetExpr):
        if not isinstance(child, SetExpr):
            raise TypeError(f"expected SetExpr, got {type(child).__name__}")
        self.child = child

    def children(self):
        return (self.child,)

    @property
    def is_finite(self):
        return self.child.is_finite


class Scale(_Unary):
    kind = "scale"

    def __init__(self, child: SetExpr, factor: float):
        super().__init__(child)
        if factor < 0:
            raise ValueError(f"negative scale factor {factor}")
        self.factor = float(factor)

    def finite_points(self):
        return [self.factor * a for a in self.child.finite_points()]

    @property
    def is_balanced(self):
        return self.child.is_balanced

    @property
    def tail_uniform(self):
        return self.child.tail_uniform and self.factor > 0

    def _analytic(self, ctx):
        lo, hi = self.child.bounds(ctx)
        return self.factor * lo, self.factor * hi

    def sample_batch(self, rng, count):
        return [self.factor * a for a in self.child.sample_batch(rng, count)]

    def maximizers(self, n):
        return [self.factor * a for a in self.child.maximizers(n)]

    def to_dict(self):
        return {"kind": self.kind, "factor": self.factor, "set": self.child.to_dict()}


class Translate(_Unary):
    kind = "translate"

    def __init__(self, child: SetExpr, offset: ModuleVector):
        super().__init__(child)
        _check_vec(offset, child.desc, child.N)
        self.offset = offset

    def finite_points(self):
        return [a + o[None] for a, o in zip(self.child.finite_points(), self.offset.data)]

    @property
    def is_balanced(self):
        return self.child.is_balanced and self.offset.norm() == 0

    @property
    def tail_uniform(self):
        return self.child.tail_uniform

    def _refines(self):
        return True

    def _analytic(self, ctx):
        if isinstance(self.child, Ball):
            return _shifted(self.child, self.offset)._analytic(ctx)
        lo, hi = self.child.bounds(ctx)
        t = block_tail_norms(self.offset.data)
        return np.maximum.reduce([lo - t, t - hi, np.zeros_like(lo)]), hi + t

    def sample_batch(self, rng, count):
        return [a + o[None] for a, o in zip(self.child.sample_batch(rng, count), self.offset.data)]

    def maximizers(self, n):
        return [a + o[None] for a, o in zip(self.child.maximizers(n), self.offset.data)]

    def to_dict(self):
        return {"kind": self.kind, "offset": self.offset.to_json(), "set": self.child.to_dict()}


class RightMul(_Unary):
    """``E a = {x a : x in E}``."""

    kind = "right_mul"

    def __init__(self, child: SetExpr, element: AlgebraElement):
        super().__init__(child)
        if element.desc != child.desc:
            raise ShapeError(f"{element.desc} vs {child.desc}")
        self.element = element

    def _mul(self, batch):
        return [a @ e for a, e in zip(batch, self.element.blocks)]

    def finite_points(self):
        return self._mul(self.child.finite_points())

    @property
    def is_balanced(self):
        return self.child.is_balanced and self.element.is_central()

    @property
    def tail_uniform(self):
        return self.child.tail_uniform and self.element.is_unitary()

    def _refines(self):
        return True

    def _analytic(self, ctx):
        lo, hi = self.child.bounds(ctx)
        # ||X a|| lies between ||X|| s_min(a) and ||X|| ||a|| block by block
        top = self.element.block_norms()[:, None]
        bottom = self.element.block_min_singular_values()[:, None]
        return lo * bottom, hi * top

    def sample_batch(self, rng, count):
        return self._mul(self.child.sample_batch(rng, count))

    def maximizers(self, n):
        return self._mul(self.child.maximizers(n))

    def to_dict(self):
        return {"kind": self.kind, "element": self.element.to_json(), "set": self.child.to_dict()}


class ConvexHull(_Unary):
    kind = "convex_hull"

    @property
    def is_finite(self):
        return False

    @property
    def is_balanced(self):
        return self.child.is_balanced

    @property
    def tail_uniform(self):
        return self.child.tail_uniform

    def _analytic(self, ctx):
        # a convex combination never has a longer tail than its longest vertex
        return self.child.bounds(ctx)

    def sample_batch(self, rng, count):
        parts = [self.child.sample_batch(rng, count) for _ in range(4)]
        w = rng.dirichlet(np.full(4, 0.5), size=count)
        return [sum(w[:, i, None, None, None] * parts[i][b] for i in range(4))
                for b in range(len(parts[0]))]

    def maximizers(self, n):
        return self.child.maximizers(n)

    def to_dict(self):
        return {"kind": self.kind, "set": self.child.to_dict()}


class BalancedHull(_Unary):
    """``union over unitaries u of E u``."""

    kind = "balanced_hull"

    @property
    def is_finite(self):
        return False

    @property
    def is_balanced(self):
        return True

    @property
    def tail_uniform(self):
        return self.child.tail_uniform

    def _analytic(self, ctx):
        # right multiplication by a unitary is isometric on every tail
        return self.child.bounds(ctx)

    def sample_batch(self, rng, count):
        batch = self.child.sample_batch(rng, count)
        return [a @ random_unitary_matrices(rng, k, count)[:, None]
                for a, k in zip(batch, self.desc.blocks)]

    def maximizers(self, n):
        return self.child.maximizers(n)

    def to_dict(self):
        return {"kind": self.kind, "set": self.child.to_dict()}


# binary nodes -----------------------------------------------------------

class _Binary(SetExpr):
    def __init__(self, left: SetExpr, right: SetExpr):
        _check_same([left, right])
        self.left = left
        self.right = right

    def children(self):
        return (self.left, self.right)

    def to_dict(self):
        return {"kind": self.kind, "left": self.left.to_dict(), "right": self.right.to_dict()}


class Sum(_Binary):
    """Minkowski sum ``E + F``."""

    kind = "sum"

    @property
    def is_finite(self):
        return self.left.is_finite and self.right.is_finite

    def _finite_count(self):
        return self.left._finite_count() * self.right._finite_count()

    def finite_points(self):
        a, b = self.left.finite_points(), self.right.finite_points()
        return [(x[:, None] + y[None, :]).reshape((-1,) + x.shape[1:]) for x, y in zip(a, b)]

    @property
    def is_balanced(self):
        return self.left.is_balanced and self.right.is_balanced

    @property
    def tail_uniform(self):
        l, r = self.left, self.right
        return (l.tail_uniform and (r.tail_uniform or r.is_finite)) or (r.tail_uniform and l.is_finite)

    def _refines(self):
        return True

    def _translates(self) -> list[SetExpr] | None:
        """``E + F`` as the union of ``E + f`` when ``F`` is a small finite set."""
        for fin, other in ((self.right, self.left), (self.left, self.right)):
            if fin.is_finite and fin._finite_count() <= TRANSLATE_LIMIT:
                return [_shifted(other, f) for f in _unbatch(self.desc, fin.finite_points())]
        return None

    def _analytic(self, ctx):
        parts = self._translates()
        if parts is not None:
            bounds = [p.bounds(ctx) for p in parts]
            return np.max([b[0] for b in bounds], axis=0), np.max([b[1] for b in bounds], axis=0)
        lo1, hi1 = self.left.bounds(ctx)
        lo2, hi2 = self.right.bounds(ctx)
        lo = np.maximum.reduce([lo1 - hi2, lo2 - hi1, np.zeros_like(lo1)])
        return lo, hi1 + hi2

    def sample_batch(self, rng, count):
        a = self.left.sample_batch(rng, count)
        b = self.right.sample_batch(rng, count)
        return [x + y for x, y in zip(a, b)]

    def maximizers(self, n):
        parts = self._translates()
        if parts is not None:
            return _concat([p.maximizers(n) for p in parts])
        a = _take(self.left.maximizers(n), slice(0, MAXIMIZER_LIMIT))
        b = _take(self.right.maximizers(n), slice(0, MAXIMIZER_LIMIT))
        return [(x[:, None] + y[None, :]).reshape((-1,) + x.shape[1:]) for x, y in zip(a, b)]


class Union(_Binary):
    kind = "union"

    @property
    def is_finite(self):
        return self.left.is_finite and self.right.is_finite

    def _finite_count(self):
        return self.left._finite_count() + self.right._finite_count()

    def finite_points(self):
        return _concat([self.left.finite_points(), self.right.finite_points()])

    @property
    def is_balanced(self):
        return self.left.is_balanced and self.right.is_balanced

    @property
    def tail_uniform(self):
        return self.left.tail_uniform and self.right.tail_uniform

    def _analytic(self, ctx):
        lo1, hi1 = self.left.bounds(ctx)
        lo2, hi2 = self.right.bounds(ctx)
        return np.maximum(lo1, lo2), np.maximum(hi1, hi2)

    def sample_batch(self, rng, count):
        a = self.left.sample_batch(rng, count)
        b = self.right.sample_batch(rng, count)
        pick = rng.random(count) < 0.5
        return [np.where(pick[:, None, None, None], x, y) for x, y in zip(a, b)]

    def maximizers(self, n):
        return _concat([self.left.maximizers(n), self.right.maximizers(n)])


class IntersectFinite(_Binary):
    """Intersection of two finite sets (points matched within ``1e-12``)."""

    kind = "intersect_finite"

    def __init__(self, left: SetExpr, right: SetExpr, tol: float = 1e-12):
        super().__init__(left, right)
        if not (left.is_finite and right.is_finite):
            raise ValueError("intersect_finite needs two finite operands")
        a, b = left.finite_points(), right.finite_points()
        flat_a = np.concatenate([x.reshape(x.shape[0], -1) for x in a], axis=1)
        flat_b = np.concatenate([x.reshape(x.shape[0], -1) for x in b], axis=1)
        dist = np.abs(flat_a[:, None, :] - flat_b[None, :, :]).max(axis=2)
        keep = np.nonzero((dist <= tol).any(axis=1))[0]
        if not len(keep):
            raise ValueError("empty intersection")
        self._batch = _take(a, keep)

    @property
    def is_finite(self):
        return True

    def finite_points(self):
        return self._batch

    @property
    def is_balanced(self):
        return bool(np.all(batch_norms(self._batch) == 0))

    def sample_batch(self, rng, count):
        return _take(self._batch, rng.integers(self._batch[0].shape[0], size=count))

    def maximizers(self, n):
        return self._batch


def _shifted(expr: SetExpr, offset: ModuleVector) -> SetExpr:
    if isinstance(expr, Ball):
        return Ball(expr.center + offset, expr.radius)
    return Translate(expr, offset)


# public functions -------------------------------------------------------

def block_bounds(expr: SetExpr, samples: int = DEFAULT_SAMPLES, seed: int = 0):
    return expr.bounds(BoundsContext(samples, seed))


def tail_intervals(expr: SetExpr, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> list[Interval]:
    """Intervals for ``sup_{x in E} ||(I - P_n) x||``, ``n = 0..N``."""
    lo, hi = block_bounds(expr, samples, seed)
    lo, hi = lo.max(axis=0), hi.max(axis=0)
    return [Interval(float(a), float(b)) for a, b in zip(lo, hi)]


def tail_norm(expr: SetExpr, n: int, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> Interval:
    if not 0 <= n <= expr.N:
        raise IndexError(f"level {n} out of range 0..{expr.N}")
    return tail_intervals(expr, samples, seed)[n]


def sup_norm(expr: SetExpr, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> Interval:
    """Interval for ``||E|| = sup_{x in E} ||x||``."""
    return tail_norm(expr, 0, samples, seed)


def sample(expr: SetExpr, rng: np.random.Generator) -> ModuleVector:
    return expr.sample(rng)


def sample_many(expr: SetExpr, rng: np.random.Generator, count: int) -> Batch:
    return expr.sample_batch(rng, count)


def hausdorff(A: SetExpr, B: SetExpr) -> float:
    """Hausdorff distance between two finite sets in the module norm."""
    if not (A.is_finite and B.is_finite):
        raise ValueError("hausdorff needs finite sets")
    _check_same([A, B])
    a, b = A.finite_points(), B.finite_points()
    if a[0].shape[0] == 0 or b[0].shape[0] == 0:
        raise ValueError("empty set")
    diff = [x[:, None] - y[None, :] for x, y in zip(a, b)]
    m, n = a[0].shape[0], b[0].shape[0]
    d = batch_norms([g.reshape((m * n,) + g.shape[2:]) for g in diff]).reshape(m, n)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def finite_points_as_vectors(expr: SetExpr) -> list[ModuleVector]:
    return _unbatch(expr.desc, expr.finite_points())


def batch_to_vectors(desc: AlgebraDesc, batch: Batch) -> list[ModuleVector]:
    return _unbatch(desc, batch)


def vectors_to_batch(vectors: Sequence[ModuleVector]) -> Batch:
    return _as_batch(vectors)


# JSON -------------------------------------------------------------------

def _vector(desc, N, data) -> ModuleVector:
    from .module import vector_from_json
    return vector_from_json(desc, N, data)


def expr_from_dict(data: dict, desc: AlgebraDesc, N: int,
                   sets: dict | None = None, operators: dict | None = None) -> SetExpr:
    """Parse the nested ``{"kind": ...}`` form; ``ref`` nodes resolve against ``sets``."""
    from .module import operator_from_json

    def rec(node):
        if not isinstance(node, dict) or "kind" not in node:
            raise ValueError(f"set expression must be an object with a 'kind', got {node!r}")
        kind = node["kind"]
        if kind == "ref":
            name = node["name"]
            if sets is None or name not in sets:
                raise KeyError(f"unknown set reference {name!r}")
            return sets[name]
        if kind == "finite":
            return Finite([_vector(desc, N, p) for p in node["points"]])
        if kind == "ball":
            center = _vector(desc, N, node.get("center", "zero"))
            return Ball(center, float(node.get("radius", 1.0)))
        if kind == "scale":
            return Scale(rec(node["set"]), float(node["factor"]))
        if kind == "translate":
            return Translate(rec(node["set"]), _vector(desc, N, node["offset"]))
        if kind == "right_mul":
            return RightMul(rec(node["set"]), AlgebraElement.from_json(desc, node["element"]))
        if kind in ("sum", "union", "intersect_finite"):
            cls = {"sum": Sum, "union": Union, "intersect_finite": IntersectFinite}[kind]
            return cls(rec(node["left"]), rec(node["right"]))
        if kind == "convex_hull":
            return ConvexHull(rec(node["set"]))
        if kind == "balanced_hull":
            return BalancedHull(rec(node["set"]))
        if kind == "operator_image":
            op = node["operator"]
            if isinstance(op, str):
                if operators is None or op not in operators:
                    raise KeyError(f"unknown operator reference {op!r}")
                T = operators[op]
            else:
                T = operator_from_json(desc, N, op, operators)
            return OperatorImage(T, bool(node.get("tail_uniform", False)))
        raise ValueError(f"unknown set kind {kind!r}")

    expr = rec(data)
    if expr.desc != desc or expr.N != N:
        raise ShapeError(f"set lives over ({expr.desc}, N={expr.N}), expected ({desc}, N={N})")
    return expr


def build(expr, desc: AlgebraDesc | None = None, N: int | None = None, **refs) -> SetExpr:
    """Validate an expression, or parse it from its JSON form (then ``desc`` and ``N`` are needed)."""
    if isinstance(expr, SetExpr):
        return expr
    if desc is None or N is None:
        raise ValueError("desc and N are required to build from a dict")
    return expr_from_dict(expr, desc, N, **refs)
