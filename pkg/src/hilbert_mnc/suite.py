"""Seeded property suite: every law is a generator plus a checker.

Each case returns a *slack* (``rhs - lhs`` for an inequality ``lhs <= rhs``,
``-|lhs - rhs|`` for an equality); a case fails when its slack is below
``-tol``.  Cases draw from their own RNG stream ``(seed, law, case)``, so any
failure can be replayed from its token ``seed:law:case``.

Laws in the ``exploration`` tier probe statements that are not known to hold;
they are reported as evidence and never affect the verdict.
"""
from __future__ import annotations

import csv
import io
import json
import time
import zlib
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .algebra import AlgebraDesc, AlgebraElement, random_sample
from .measures import (MEASURES, MncParams, greedy_cover, lambda_profile, op_mnc, seminorm_mnc_all,
                       seminorm_stream, star_aggregate, star_aggregate_all, tail_cloud)
from .module import (ModuleOperator, ModuleVector, inner_product, random_operator, random_vector,
                     submodule_project, theta)
from .seminorm import SemiNorm, random_seminorm, transform_seminorm
from .sets import (Ball, BalancedHull, ConvexHull, Finite, IntersectFinite, OperatorImage, RightMul,
                   Scale, SetExpr, Sum, Translate, Union, batch_to_vectors, block_bounds, hausdorff,
                   sup_norm, tail_intervals)
from .module import block_tail_norms
from .witness import discrete_witness

SELECTIONS = ("core", "seminorm", "operator", "witness", "all")
DEFAULT_POOL = ((1,), (2,), (1, 1), (2, 1), (3,))


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    algebras: tuple[tuple[int, ...], ...] = DEFAULT_POOL
    lengths: tuple[int, ...] = (4, 6, 8)
    cases: int = 200
    exploration_cases: int = 40
    tol: float = 1e-9
    exact_tol: float = 1e-10
    estimator_tol: float = 1e-6
    sample_count: int = 32
    mnc_samples: int = 48
    seminorms: int = 4

    def __post_init__(self):
        if self.cases < 1 or self.exploration_cases < 1:
            raise ValueError("case counts must be >= 1")
        if min(self.tol, self.exact_tol, self.estimator_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if not self.algebras or not self.lengths:
            raise ValueError("empty algebra or length pool")

    @property
    def mnc_params(self) -> MncParams:
        return MncParams(samples=self.mnc_samples, seminorms=self.seminorms, seed=self.seed)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["algebras"] = [list(a) for a in self.algebras]
        d["lengths"] = list(self.lengths)
        return d


@dataclass
class Case:
    """What a generator hands to a checker: RNG, algebra, length and settings."""

    rng: np.random.Generator
    desc: AlgebraDesc
    N: int
    config: SuiteConfig


@dataclass(frozen=True)
class Law:
    id: str
    tier: str
    statement: str
    check: Callable[[Case], float]
    tol: str = "tol"
    # algebra filter; the default accepts the whole pool
    pool: Callable[[tuple[int, ...]], bool] = lambda blocks: True


LAWS: dict[str, Law] = {}


def law(id: str, tier: str, statement: str, tol: str = "tol", pool=None):
    def register(fn):
        LAWS[id] = Law(id, tier, statement, fn, tol, pool or (lambda blocks: True))
        return fn
    return register


# generators -------------------------------------------------------------

def _vector(c: Case, support: int | None = None, scale: float | None = None) -> ModuleVector:
    support = c.N if support is None else support
    x = random_vector(c.desc, c.N, c.rng, support=support)
    s = c.rng.uniform(0.2, 2.0) if scale is None else scale
    return x * (s / max(x.norm(), 1e-300))


def _finite(c: Case, count: int | None = None, support: int | None = None) -> Finite:
    count = int(c.rng.integers(1, 5)) if count is None else count
    return Finite([_vector(c, support) for _ in range(count)])


def _element(c: Case) -> AlgebraElement:
    return random_sample(c.desc, "element", c.rng)


def _leaf(c: Case) -> SetExpr:
    kind = c.rng.integers(4)
    if kind == 0:
        return Ball.around_zero(c.desc, c.N, c.rng.uniform(0.1, 2.0))
    if kind == 1:
        return Ball(_vector(c), c.rng.uniform(0.1, 1.5))
    if kind == 2:
        return _finite(c)
    return OperatorImage(random_operator(c.desc, c.N, c.rng))


def random_expr(c: Case, depth: int = 2) -> SetExpr:
    """A random set expression with at most ``depth`` levels of combinators."""
    if depth == 0 or c.rng.random() < 0.3:
        return _leaf(c)
    kind = c.rng.integers(7)
    sub = lambda: random_expr(c, depth - 1)
    if kind == 0:
        return Sum(sub(), sub())
    if kind == 1:
        return Union(sub(), sub())
    if kind == 2:
        return Scale(sub(), c.rng.uniform(0.1, 2.0))
    if kind == 3:
        return RightMul(sub(), _element(c))
    if kind == 4:
        return ConvexHull(sub())
    if kind == 5:
        return BalancedHull(sub())
    return Translate(sub(), _vector(c))


def _hi(expr: SetExpr) -> np.ndarray:
    """Upper tail bounds for ``n = 0..N-1``."""
    return np.array([t.hi for t in tail_intervals(expr, samples=16)])[:-1]


def _lo(expr: SetExpr) -> np.ndarray:
    return np.array([t.lo for t in tail_intervals(expr, samples=16)])[:-1]


def _le(a, b) -> float:
    """Slack of ``a <= b`` (elementwise, worst case)."""
    return float(np.min(np.asarray(b) - np.asarray(a)))


def _eq(a, b) -> float:
    return -float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _tails(x: ModuleVector) -> np.ndarray:
    return np.array(x.tail_norms())


# core: module facts and the lambda measure ------------------------------

@law("module.orthogonal_norm", "core", "||z1 + z2|| >= ||z1|| whenever z1 and z2 are orthogonal")
def _(c):
    g = _vector(c)
    z1 = _vector(c)
    p, _ = submodule_project(z1, [g])
    z1 = z1 - p  # now <g, z1> = 0
    z2 = g * _element(c)
    return _le(z1.norm(), (z1 + z2).norm())


@law("module.projection_distance", "core",
     "distance to a finitely generated submodule is attained by the orthogonal projection")
def _(c):
    gens = [_vector(c) for _ in range(int(c.rng.integers(1, 3)))]
    x = _vector(c)
    p, dist = submodule_project(x, gens)
    r = x - p
    ortho = max(inner_product(g, r).norm() for g in gens)
    slack = -ortho if ortho > 1e-9 else 0.0
    others = [(x - sum((g * _element(c) for g in gens[1:]), gens[0] * _element(c))).norm()
              for _ in range(8)]
    return min(slack, _eq(dist, r.norm()), _le(dist, min(others)))


@law("lambda.truncation_formula", "core",
     "distance to the first-n-slots submodule equals the tail norm ||(I - P_n) x||")
def _(c):
    x = _vector(c)
    n = int(c.rng.integers(1, c.N))
    _, dist = submodule_project(x, [ModuleVector.basis(c.desc, c.N, j) for j in range(n)])
    return _eq(dist, x.tail(n).norm())


@law("lambda.profile_decreasing", "core", "the upper tail profile is non-increasing and lo <= hi")
def _(c):
    E = random_expr(c)
    ts = tail_intervals(E, samples=16)
    hi = np.array([t.hi for t in ts])
    lo = np.array([t.lo for t in ts])
    return min(_le(hi[1:], hi[:-1]), _le(lo, hi))


@law("lambda.monotone", "core", "E subset of F implies hi_E(n) <= hi_F(n)")
def _(c):
    E = random_expr(c)
    return _le(_hi(E), _hi(Union(E, random_expr(c))))


@law("lambda.intersection", "core", "hi of an intersection is at most the min of the two his")
def _(c):
    common = _finite(c)
    E = Union(common, _finite(c))
    F = Union(_finite(c), common)
    return _le(_hi(IntersectFinite(E, F)), np.minimum(_hi(E), _hi(F)))


@law("lambda.union_max", "core", "hi of a union is exactly the max of the two his")
def _(c):
    E, F = random_expr(c), random_expr(c)
    return _eq(_hi(Union(E, F)), np.maximum(_hi(E), _hi(F)))


@law("lambda.sum_subadditive", "core", "hi_{E+F}(n) <= hi_E(n) + hi_F(n)")
def _(c):
    E, F = random_expr(c), random_expr(c)
    return _le(_hi(Sum(E, F)), _hi(E) + _hi(F))


@law("lambda.right_mul", "core",
     "hi_{Ea} <= hi_E ||a||, hi_E <= hi_{Ea} ||a^-1|| for invertible a, equality for unitary a")
def _(c):
    E = random_expr(c)
    a = _element(c)
    u = random_sample(c.desc, "unitary", c.rng)
    hE = _hi(E)
    slack = min(_le(_hi(RightMul(E, a)), hE * a.norm()), _eq(_hi(RightMul(E, u)), hE))
    if a.min_singular_value() > 1e-3:
        slack = min(slack, _le(hE, _hi(RightMul(E, a)) * a.inverse().norm()))
    return slack


@law("lambda.convex_hull", "core", "the convex hull has exactly the same tail intervals")
def _(c):
    E = random_expr(c)
    return min(_eq(_hi(ConvexHull(E)), _hi(E)), _eq(_lo(ConvexHull(E)), _lo(E)))


@law("lambda.unit_ball", "core", "the unit ball has tail profile identically 1")
def _(c):
    return min(_eq(lambda_profile(Ball.around_zero(c.desc, c.N)).hi, 1.0),
               _eq(lambda_profile(Ball.around_zero(c.desc, c.N)).lo, 1.0))


@law("lambda.ball_enlargement", "core", "hi of F + delta B is at most hi_F + delta")
def _(c):
    F = random_expr(c)
    delta = c.rng.uniform(0.0, 2.0)
    return _le(_hi(Sum(F, Ball.around_zero(c.desc, c.N, delta))), _hi(F) + delta)


@law("lambda.hausdorff_lipschitz", "core", "|hi_E(n) - hi_F(n)| <= d_H(E, F) on finite sets")
def _(c):
    E, F = _finite(c), _finite(c)
    if c.rng.random() < 0.5:  # nearby pairs too
        F = Finite([x + _vector(c, scale=c.rng.uniform(0, 0.1)) for x in E.points])
    return _le(np.abs(_hi(E) - _hi(F)), hausdorff(E, F))


@law("lambda.closure", "core", "perturbing points by eta moves the profile by at most eta")
def _(c):
    E = _finite(c)
    eta = 10.0 ** -c.rng.uniform(1, 8)
    F = Finite([x + _vector(c, scale=eta * c.rng.random()) for x in E.points])
    return _le(np.abs(_hi(E) - _hi(F)), eta)


@law("lambda.precompact_zero", "core",
     "finite sets supported in the first m slots have zero profile from m on")
def _(c):
    m = int(c.rng.integers(1, c.N + 1))
    return -float(np.max(np.abs(np.array([t.hi for t in tail_intervals(_finite(c, support=m))])[m:])))


@law("lambda.norm_cap", "core", "hi_E(0) <= sup_norm(E).hi, and sampled members respect it")
def _(c):
    E = random_expr(c)
    norms = block_tail_norms(E.sample_batch(c.rng, c.config.sample_count)).max(axis=1)[:, 0]
    return min(_le(_hi(E)[0], sup_norm(E, samples=16).hi), _le(norms.max(), sup_norm(E, samples=16).hi))


@law("lambda.sampling_sound", "core", "sampled members' tail norms lie within [0, hi]")
def _(c):
    E = random_expr(c)
    tails = block_tail_norms(E.sample_batch(c.rng, c.config.sample_count)).max(axis=1)
    hi = np.array([t.hi for t in tail_intervals(E, samples=16)])
    return _le(tails.max(axis=0), hi)


@law("lambda.adjoin_head_point", "core",
     "adjoining a point supported in the first m slots leaves the profile unchanged from m on")
def _(c):
    E = random_expr(c)
    m = int(c.rng.integers(1, c.N + 1))
    F = Union(E, Finite([_vector(c, support=m)]))
    return _eq(np.array([t.hi for t in tail_intervals(F, 16)])[m:],
               np.array([t.hi for t in tail_intervals(E, 16)])[m:])


@law("lambda.balanced_hull", "core", "the balanced hull has the same tail profile")
def _(c):
    E = random_expr(c)
    F = BalancedHull(E)
    tails = block_tail_norms(F.sample_batch(c.rng, c.config.sample_count)).max(axis=1)[:, :-1]
    return min(_eq(_hi(F), _hi(E)), _le(tails.max(axis=0), _hi(F)))


def _two_blocks(blocks):
    return len(blocks) >= 2


@law("lambda.strict_right_mul", "core",
     "E = aB p + bB (1-p) for a central projection p: hi_E = max(a,b) but hi_{Ep} = a",
     pool=_two_blocks)
def _(c):
    nb = c.desc.n_blocks
    mask = c.rng.random(nb) < 0.5
    mask[0], mask[-1] = True, False
    p = AlgebraElement(c.desc, [np.eye(k) * float(m) for k, m in zip(c.desc.blocks, mask)])
    a, b = sorted(c.rng.uniform(0.1, 3.0, size=2))
    if c.rng.random() < 0.2:
        a, b = 1.0, 2.0
    one = AlgebraElement.unit(c.desc)
    E = Sum(RightMul(Ball.around_zero(c.desc, c.N, a), p), RightMul(Ball.around_zero(c.desc, c.N, b), one - p))
    lam_e, lam_ep = lambda_profile(E).estimate, lambda_profile(RightMul(E, p)).estimate
    return min(_eq([lam_e.lo, lam_e.hi], b), _eq([lam_ep.lo, lam_ep.hi], a), _le(lam_ep.hi, lam_e.lo * p.norm()))


# semi-norms and the star measures ---------------------------------------

@law("seminorm.normalization", "seminorm", "sup_j phi(eta_j^* eta_j) = 1", tol="exact_tol")
def _(c):
    return _eq(random_seminorm(c.desc, c.N, c.rng).normalization(), 1.0)


@law("seminorm.domination", "seminorm", "p(x) <= ||x||")
def _(c):
    p = random_seminorm(c.desc, c.N, c.rng)
    xs = Ball.around_zero(c.desc, c.N, 2.0).sample_batch(c.rng, c.config.sample_count)
    return _le(p.evaluate_batch(xs), block_tail_norms(xs).max(axis=1)[:, 0])


@law("seminorm.triangle", "seminorm", "p(x + z) <= p(x) + p(z) and p(c x) = |c| p(x)", tol="exact_tol")
def _(c):
    p = random_seminorm(c.desc, c.N, c.rng)
    x, z = _vector(c), _vector(c)
    s = complex(*c.rng.standard_normal(2))
    return min(_le(p(x + z), p(x) + p(z)), _eq(p(x * s), abs(s) * p(x)))


@law("seminorm.unitary_transform", "seminorm",
     "p(x u) = q(x) for q = (phi^u, eta u^*), and estimates of Eu under p equal those of E under q")
def _(c):
    p = random_seminorm(c.desc, c.N, c.rng)
    u = random_sample(c.desc, "unitary", c.rng)
    q = transform_seminorm(p, u)
    xs = [_vector(c) for _ in range(4)]
    slack = min(_eq(p(x * u), q(x)) for x in xs)
    slack = min(slack, _eq(q.normalization(), 1.0))
    E = Ball(_vector(c), c.rng.uniform(0.3, 1.5))
    Eu = RightMul(E, u)
    params = c.config.mnc_params
    cloud = tail_cloud(E, params, c.rng)
    cloud_u = [np.einsum("sjab,bc->sjac", x, ub) for x, ub in zip(cloud, u.blocks)]
    est, est_u = seminorm_mnc_all(E, q, params, cloud), seminorm_mnc_all(Eu, p, params, cloud_u)
    for m in MEASURES:
        slack = min(slack, -1e3 * abs(est[m].lower - est_u[m].lower) / max(1.0, est[m].upper),
                    -1e3 * abs(est[m].upper - est_u[m].upper) / max(1.0, est[m].upper))
    return slack


@law("star.finite_zero", "seminorm", "every estimator vanishes on finite sets")
def _(c):
    E = _finite(c)
    p = random_seminorm(c.desc, c.N, c.rng)
    ests = list(seminorm_mnc_all(E, p, c.config.mnc_params).values())
    ests += [star_aggregate(E, m, c.config.mnc_params) for m in MEASURES]
    return -max(max(e.lower, e.upper) for e in ests)


@law("star.chain", "seminorm", "chi <= I <= alpha <= 2 chi at the level of brackets")
def _(c):
    E = random_expr(c)
    p = random_seminorm(c.desc, c.N, c.rng)
    e = seminorm_mnc_all(E, p, c.config.mnc_params)
    return _chain_slack(e["chi"], e["istratescu"], e["alpha"])


def _chain_slack(chi, ist, alpha) -> float:
    return min(_le(chi.lower, ist.upper), _le(ist.lower, alpha.upper), _le(chi.lower, ist.lower),
               _le(alpha.upper, 2 * chi.upper), _le(ist.lower, 2 * chi.upper),
               *(_le(e.lower, e.upper) for e in (chi, ist, alpha)))


@law("star.lambda_cap", "seminorm", "the chi* lower bound never exceeds the lambda estimate",
     tol="estimator_tol")
def _(c):
    E = random_expr(c)
    params = c.config.mnc_params
    h = params.resolved_horizon(c.N)
    est = star_aggregate(E, "chi", params)
    return min(_le(est.lower, lambda_profile(E, h).estimate.hi), _le(est.upper, lambda_profile(E, h).estimate.hi))


@law("star.sup_aggregation", "seminorm",
     "the star bracket contains the best sampled lower bound and dominates each per-semi-norm upper bound")
def _(c):
    E = random_expr(c)
    params = c.config.mnc_params
    ps = seminorm_stream(E, params)
    cloud = tail_cloud(E, params, np.random.default_rng([params.seed, 0]))
    star = star_aggregate_all(E, params, seminorms=ps)
    per = [seminorm_mnc_all(E, p, params, cloud) for p in ps]
    return min(min(_eq(star[m].lower, max(e[m].lower for e in per)),
                   _le(max(e[m].upper for e in per), star[m].upper)) for m in MEASURES)


@law("star.monotone_in_q", "seminorm", "the star lower bound is non-decreasing in the number of semi-norms")
def _(c):
    E = random_expr(c)
    params = c.config.mnc_params
    ps = seminorm_stream(E, params, 2 * params.seminorms)
    few = star_aggregate(E, "istratescu", params, seminorms=ps[:params.seminorms])
    many = star_aggregate(E, "istratescu", params, seminorms=ps)
    return _le(few.lower, many.lower)


@law("star.subset_monotone", "seminorm", "star upper bounds are monotone under inclusion")
def _(c):
    E = random_expr(c)
    F = Union(E, random_expr(c))
    a, b = star_aggregate_all(E, c.config.mnc_params), star_aggregate_all(F, c.config.mnc_params)
    return min(_le(a[m].upper, b[m].upper) for m in MEASURES)


@law("star.ball_packing", "seminorm",
     "for A = C the radius-r ball has I* lower bound >= r from the constant-weight semi-norm",
     pool=lambda blocks: blocks == (1,))
def _(c):
    r = c.rng.uniform(0.2, 3.0)
    est = star_aggregate(Ball.around_zero(c.desc, c.N, r), "istratescu", c.config.mnc_params)
    return _le(r, est.lower)


# operators --------------------------------------------------------------

def _operator(c: Case) -> ModuleOperator:
    kind = c.rng.integers(3)
    T = random_operator(c.desc, c.N, c.rng)
    if kind == 1:
        m = int(c.rng.integers(1, c.N))
        T = theta(_vector(c, support=m), _vector(c, support=m))
    elif kind == 2:
        T = ModuleOperator.from_grid([[_element(c) if i == j else AlgebraElement.zero(c.desc)
                                               for j in range(c.N)] for i in range(c.N)])
    return T


@law("operator.lambda0_norm_cap", "operator", "the lambda_0 profile never exceeds ||T||")
def _(c):
    T = _operator(c)
    return _le(op_mnc(T, "lambda0").hi, T.norm())


@law("operator.lambda0_subadditive", "operator", "lambda_0(T + S) <= lambda_0(T) + lambda_0(S) profile-wise")
def _(c):
    T, S = _operator(c), _operator(c)
    return _le(op_mnc(T + S, "lambda0").hi, op_mnc(T, "lambda0").hi + op_mnc(S, "lambda0").hi)


@law("operator.lambda0_homogeneous", "operator", "lambda_0(cT) = c lambda_0(T) for c > 0")
def _(c):
    T = _operator(c)
    s = c.rng.uniform(0.01, 5.0)
    return _eq(op_mnc(T * s, "lambda0").hi, s * op_mnc(T, "lambda0").hi)


@law("operator.finite_rank_vanishes", "operator",
     "a theta operator supported in the first m slots has zero lambda_0 profile from m on")
def _(c):
    m = int(c.rng.integers(1, c.N))
    T = theta(_vector(c, support=m), _vector(c, support=m))
    if c.rng.random() < 0.5:
        T = T + theta(_vector(c, support=m), _vector(c, support=m))
    return -float(np.max(op_mnc(T, "lambda0", n_max=c.N).hi[m:]))


@law("operator.compact_perturbation", "operator",
     "adding a theta operator supported in the first m slots leaves the profile unchanged from m on",
     tol="exact_tol")
def _(c):
    T = _operator(c)
    m = int(c.rng.integers(1, c.N))
    K = theta(_vector(c, support=m), _vector(c, support=m))
    return _eq(op_mnc(T + K, "lambda0").hi[m:], op_mnc(T, "lambda0").hi[m:])


@law("operator.star_bounds", "operator",
     "chi_0 <= lambda_0 <= ||T||, alpha_0 and I_0 <= 2||T||, and the brackets chain", tol="estimator_tol")
def _(c):
    T = _operator(c)
    params = c.config.mnc_params
    e = star_aggregate_all(OperatorImage(T), params)
    direct = op_mnc(T, "i0", params)
    lam = op_mnc(T, "lambda0", n_max=params.resolved_horizon(c.N)).estimate.hi
    return min(_le(e["chi"].lower, lam), _le(lam, T.norm() + 0.0), _le(e["chi"].upper, T.norm()),
               _le(e["alpha"].upper, 2 * T.norm()), _le(e["istratescu"].upper, 2 * T.norm()),
               _chain_slack(e["chi"], e["istratescu"], e["alpha"]),
               _eq([direct.lower, direct.upper], [e["istratescu"].lower, e["istratescu"].upper]))


@law("operator.star_cap_subadditive", "operator",
     "certified star caps are subadditive and positively homogeneous in T")
def _(c):
    T, S = _operator(c), _operator(c)
    s = c.rng.uniform(0.1, 3.0)
    params = c.config.mnc_params
    up = lambda X: op_mnc(X, "chi0", params).upper
    return min(_le(up(T + S), up(T) + up(S)), _eq(up(T * s), s * up(T)))


# witness ----------------------------------------------------------------

def _witness_set(c: Case) -> SetExpr:
    kind = c.rng.integers(3) if c.desc.n_blocks >= 2 else c.rng.integers(2)
    if kind == 0:
        return Scale(Ball.around_zero(c.desc, c.N), c.rng.uniform(0.3, 3.0))
    if kind == 1:
        d = [AlgebraElement.scalar(c.desc, c.rng.uniform(0.5, 2.0)) * random_sample(c.desc, "unitary", c.rng)
             for _ in range(c.N)]
        return OperatorImage(ModuleOperator.from_grid(
            [[d[i] if i == j else AlgebraElement.zero(c.desc) for j in range(c.N)] for i in range(c.N)]))
    p = AlgebraElement(c.desc, [np.eye(k) * float(b == 0) for b, k in enumerate(c.desc.blocks)])
    a, b = c.rng.uniform(0.2, 2.0, size=2)
    one = AlgebraElement.unit(c.desc)
    return Sum(RightMul(Ball.around_zero(c.desc, c.N, a), p), RightMul(Ball.around_zero(c.desc, c.N, b), one - p))


@law("witness.separation", "witness",
     "witness points are pairwise p-separated by (delta^2 - eps)/||E|| and belong to E")
def _(c):
    E = _witness_set(c)
    delta = lambda_profile(E).estimate.lo
    w = discrete_witness(E, c.rng.uniform(0.05, 0.95) * delta ** 2,
                         twist=bool(c.rng.random() < 0.5), seed=int(c.rng.integers(2 ** 31)))
    slack = _le(w.separation, w.min_separation()) if len(w.points) > 1 else 0.0
    if isinstance(E, Scale):
        r = E.factor
        slack = min(slack, _le(max(x.norm() for x in w.points), r), _le(c.N, len(w.points)))
    return min(slack, _eq(w.seminorm.normalization(), 1.0))


@law("witness.lambda_bound", "witness",
     "lambda^2 <= ||E|| I*-lower + eps, and the witness bound sits inside the chain", tol="estimator_tol")
def _(c):
    E = _witness_set(c)
    lam = lambda_profile(E).estimate
    eps = c.rng.uniform(0.05, 0.95) * lam.lo ** 2
    w = discrete_witness(E, eps, seed=int(c.rng.integers(2 ** 31)))
    params = c.config.mnc_params
    star = star_aggregate_all(E, params)
    cap, chi = star["alpha"].upper, star["chi"]
    lam_h = lambda_profile(E, params.resolved_horizon(c.N)).estimate.hi
    return min(_le(lam.hi ** 2, w.set_norm * w.istratescu_lower + eps), _le(w.istratescu_lower, cap),
               _le(chi.lower, lam_h), _le(lam.hi, np.sqrt(w.set_norm * cap)))


@law("witness.operator_image", "witness",
     "for operator images lambda_0^2 <= ||T|| I_0-lower + eps", tol="estimator_tol")
def _(c):
    E = _witness_set(c)
    if not isinstance(E, OperatorImage):
        E = OperatorImage(ModuleOperator.identity(c.desc, c.N) * c.rng.uniform(0.3, 2.0))
    lam = lambda_profile(E).estimate
    eps = c.rng.uniform(0.05, 0.95) * lam.lo ** 2
    w = discrete_witness(E, eps, seed=int(c.rng.integers(2 ** 31)))
    return min(_le(lam.hi ** 2, E.operator.norm() * w.istratescu_lower + eps),
               _le(w.separation, w.min_separation()) if len(w.points) > 1 else 0.0)


# exploration ------------------------------------------------------------

@law("explore.balanced_hull_star", "exploration",
     "open: do the star measures of a set and of its balanced hull agree?")
def _(c):
    E = random_expr(c, 1)
    params = c.config.mnc_params
    a, b = star_aggregate(E, "istratescu", params), star_aggregate(BalancedHull(E), "istratescu", params)
    # evidence only: disjoint brackets would refute equality
    return min(_le(a.lower, b.upper), _le(b.lower, a.upper))


@law("explore.a_convex_hull", "exploration",
     "open: is the profile stable under the A-convex hull sum a_j^* x_j a_j with sum a_j^* a_j = 1?")
def _(c):
    E = random_expr(c, 1)
    hi = np.array([t.hi for t in tail_intervals(E, 16)])
    worst = np.inf
    for _ in range(8):
        k = int(c.rng.integers(1, 4))
        a = [_element(c) for _ in range(k)]
        s = sum((x.H @ x for x in a[1:]), a[0].H @ a[0])
        root = [np.linalg.inv(_sqrtm(b)) for b in s.blocks]
        a = [x @ AlgebraElement(c.desc, root) for x in a]
        xs = batch_to_vectors(c.desc, E.sample_batch(c.rng, k))
        y = ModuleVector.zeros(c.desc, c.N)
        for aj, xj in zip(a, xs):
            y = y + ModuleVector.from_entries([aj.H @ e @ aj for e in xj.entries()])
        worst = min(worst, _le(_tails(y), hi))
    return worst


def _sqrtm(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


@law("explore.precompact_decomposition", "exploration",
     "open: is E inside C + lambda(E) B for one precompact C? eps-version probed with C = P_n E")
def _(c):
    E = random_expr(c, 1)
    ts = tail_intervals(E, 16)
    n = c.N - 1
    xs = E.sample_batch(c.rng, c.config.sample_count)
    dist = block_tail_norms(xs).max(axis=1)[:, n]  # distance from x to P_n x in P_n E
    return _le(dist.max(), ts[n].hi)


# running ----------------------------------------------------------------

# every statement in scope must have a law; the self-audit checks this list
REQUIRED_LAWS = (
    "module.orthogonal_norm", "module.projection_distance", "lambda.truncation_formula",
    "lambda.profile_decreasing", "lambda.monotone", "lambda.intersection", "lambda.union_max",
    "lambda.sum_subadditive", "lambda.right_mul", "lambda.convex_hull", "lambda.unit_ball",
    "lambda.ball_enlargement", "lambda.hausdorff_lipschitz", "lambda.closure", "lambda.precompact_zero",
    "lambda.norm_cap", "lambda.sampling_sound", "lambda.adjoin_head_point", "lambda.balanced_hull",
    "lambda.strict_right_mul",
    "seminorm.normalization", "seminorm.domination", "seminorm.triangle", "seminorm.unitary_transform",
    "star.finite_zero", "star.chain", "star.lambda_cap", "star.sup_aggregation", "star.monotone_in_q",
    "star.subset_monotone", "star.ball_packing",
    "operator.lambda0_norm_cap", "operator.lambda0_subadditive", "operator.lambda0_homogeneous",
    "operator.finite_rank_vanishes", "operator.compact_perturbation", "operator.star_bounds",
    "operator.star_cap_subadditive",
    "witness.separation", "witness.lambda_bound", "witness.operator_image",
)
ANCHORS = {lid: l.statement for lid, l in LAWS.items()}
TIER_OF = {lid: l.tier for lid, l in LAWS.items()}


def laws_for(selection: str) -> list[Law]:
    if selection not in SELECTIONS:
        raise ValueError(f"unknown selection {selection!r}; expected one of {SELECTIONS}")
    if selection == "all":
        return list(LAWS.values())
    return [l for l in LAWS.values() if l.tier == selection]


def _stream(seed: int, law_id: str, case: int) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(law_id.encode()), case])


def _case(config: SuiteConfig, lw: Law, index: int) -> Case:
    rng = _stream(config.seed, lw.id, index)
    pool = [b for b in config.algebras if lw.pool(tuple(b))]
    if not pool:
        return None
    blocks = tuple(pool[int(rng.integers(len(pool)))])
    N = int(config.lengths[int(rng.integers(len(config.lengths)))])
    return Case(rng, AlgebraDesc(blocks), N, config)


def run_case(config: SuiteConfig, law_id: str, index: int) -> float:
    """Replay one case; returns its slack."""
    lw = LAWS[law_id]
    c = _case(config, lw, index)
    if c is None:
        raise ValueError(f"law {law_id} has no admissible algebra in the pool")
    return float(lw.check(c))


def replay(token: str, config: SuiteConfig | None = None) -> float:
    seed, law_id, index = token.split(":")
    config = replace(config or SuiteConfig(), seed=int(seed))
    return run_case(config, law_id, int(index))


@dataclass
class LawRecord:
    id: str
    tier: str
    statement: str
    cases: int
    failures: int
    errors: int
    worst_slack: float
    tol: float
    elapsed: float
    replay: list[str] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.errors == 0

    def to_dict(self, timings: bool = True) -> dict:
        d = {"id": self.id, "tier": self.tier, "statement": self.statement, "cases": self.cases,
             "failures": self.failures, "errors": self.errors, "worst_slack": _num(self.worst_slack),
             "tol": self.tol, "status": self.status, "replay": self.replay, "messages": self.messages}
        if timings:
            d["elapsed"] = round(self.elapsed, 6)
        return d

    @property
    def status(self) -> str:
        if self.tier == "exploration":
            return "open question evidence"
        return "pass" if self.passed else "fail"


def _num(x: float):
    return None if not np.isfinite(x) else float(x)


@dataclass
class Report:
    config: SuiteConfig
    selection: str
    records: list[LawRecord]
    missing: list[str]

    @property
    def passed(self) -> bool:
        return not self.missing and all(r.passed for r in self.records if r.tier != "exploration")

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def record(self, law_id: str) -> LawRecord:
        return next(r for r in self.records if r.id == law_id)

    def to_dict(self, timings: bool = True) -> dict:
        return {"schema": "hmnc-report/1", "selection": self.selection, "config": self.config.to_dict(),
                "verdict": self.verdict, "audit": {"missing": self.missing},
                "laws": [r.to_dict(timings) for r in self.records]}

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), indent=2, sort_keys=True)

    def to_csv(self, timings: bool = True) -> str:
        buf = io.StringIO()
        cols = ["id", "tier", "cases", "failures", "errors", "worst_slack", "tol", "status"]
        cols += ["elapsed"] if timings else []
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.records:
            d = r.to_dict(timings)
            w.writerow([_fmt(d[k]) for k in cols])
        return buf.getvalue()

    def table(self) -> str:
        lines = [f"{'law':36s} {'tier':11s} {'cases':>5s} {'fail':>4s} {'worst slack':>14s}  status"]
        for r in self.records:
            lines.append(f"{r.id:36s} {r.tier:11s} {r.cases:5d} {r.failures + r.errors:4d} "
                         f"{_fmt(r.worst_slack):>14s}  {r.status}")
        if self.missing:
            lines.append("missing laws: " + ", ".join(self.missing))
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return "" if v is None else str(v)


def run_law(config: SuiteConfig, lw: Law) -> LawRecord:
    tol = getattr(config, lw.tol)
    count = config.exploration_cases if lw.tier == "exploration" else config.cases
    start = time.perf_counter()
    failures = errors = cases = 0
    worst = np.inf
    replay_tokens, messages = [], []
    for i in range(count):
        c = _case(config, lw, i)
        if c is None:
            break
        cases += 1
        token = f"{config.seed}:{lw.id}:{i}"
        try:
            slack = float(lw.check(c))
        except Exception as exc:  # failures are report content
            errors += 1
            if len(messages) < 5:
                replay_tokens.append(token)
                messages.append(f"{type(exc).__name__}: {exc}")
            continue
        worst = min(worst, slack)
        if not slack >= -tol:
            failures += 1
            if len(replay_tokens) < 5:
                replay_tokens.append(token)
    return LawRecord(lw.id, lw.tier, lw.statement, cases, failures, errors, worst, tol,
                     time.perf_counter() - start, replay_tokens, messages)


def _prefixes(tiers):
    prefixes = {"core": ("module", "lambda"), "seminorm": ("seminorm", "star"),
                "operator": ("operator",), "witness": ("witness",)}
    return {p for t in tiers for p in prefixes.get(t, ())}


def run_suite(config: SuiteConfig = SuiteConfig(), selection: str = "all") -> Report:
    chosen = laws_for(selection)
    records = [run_law(config, lw) for lw in chosen]
    tiers = set(SELECTIONS[:-1]) if selection == "all" else {selection}
    required = [lid for lid in REQUIRED_LAWS if lid.split(".")[0] in _prefixes(tiers)]
    ran = {r.id for r in records if r.cases >= 1}
    missing = [lid for lid in required if lid not in ran]
    return Report(config, selection, records, missing)
