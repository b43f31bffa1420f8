import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import POOL
from hilbert_mnc import (AlgebraDesc, AlgebraElement, Ball, BalancedHull, ConvexHull, Finite, IntersectFinite,
                         Interval, ModuleOperator, ModuleVector, OperatorImage, RightMul, Scale, ShapeError, Sum,
                         Translate, Union, build, expr_from_dict, hausdorff, random_operator, random_sample,
                         random_vector, sample, sup_norm, tail_intervals, tail_norm)
from hilbert_mnc.module import block_tail_norms
from hilbert_mnc.suite import Case, SuiteConfig, random_expr

seeds = st.integers(0, 2 ** 32 - 1)
descs = st.sampled_from(POOL).map(AlgebraDesc)


def his(E):
    return np.array([t.hi for t in tail_intervals(E)])


def los(E):
    return np.array([t.lo for t in tail_intervals(E)])


def test_interval_validation():
    assert Interval(0.5, 0.5).exact
    assert Interval(0.0, 2.0).width == 2.0
    with pytest.raises(ValueError):
        Interval(1.0, 0.5)
    with pytest.raises(ValueError):
        Interval(-0.1, 0.5)


def test_finite_profile_is_exact(rng):
    d = AlgebraDesc((2, 1))
    pts = [random_vector(d, 5, rng) for _ in range(3)]
    E = Finite(pts)
    oracle = np.max([p.tail_norms() for p in pts], axis=0)
    assert np.allclose(his(E), oracle) and np.allclose(los(E), oracle)
    assert E.is_finite


def test_unit_ball_profile_is_one(desc):
    prof = tail_intervals(Ball.around_zero(desc, 6))
    assert all(t.lo == t.hi == 1.0 for t in prof[:-1])
    assert prof[-1].hi == 0.0


def test_ball_with_center(rng):
    d = AlgebraDesc((1,))
    c = random_vector(d, 5, rng)
    E = Ball(c, 0.7)
    assert np.allclose(his(E)[:-1], c.tail_norms()[:-1] + 0.7)
    assert np.allclose(los(E), his(E))
    assert sup_norm(E).hi == pytest.approx(c.norm() + 0.7)


def test_negative_radius():
    with pytest.raises(ValueError):
        Ball.around_zero(AlgebraDesc((1,)), 3, -1.0)


def test_scaled_ball_and_sum(desc):
    B = Ball.around_zero(desc, 5)
    assert np.allclose(his(Scale(B, 2.5))[:-1], 2.5)
    assert np.allclose(his(Sum(B, Scale(B, 0.5)))[:-1], 1.5)


def test_two_block_example_right_mul():
    d = AlgebraDesc((1, 1))
    p = AlgebraElement.diag(d, [1, 0])
    one = AlgebraElement.unit(d)
    E = Sum(RightMul(Ball.around_zero(d, 5, 1.0), p), RightMul(Ball.around_zero(d, 5, 2.0), one - p))
    assert tail_norm(E, 4).lo == tail_norm(E, 4).hi == 2.0
    assert tail_norm(RightMul(E, p), 4).lo == tail_norm(RightMul(E, p), 4).hi == 1.0


def test_operator_image_profile_is_tail_norms(rng):
    d = AlgebraDesc((2,))
    T = random_operator(d, 5, rng)
    E = OperatorImage(T)
    assert np.allclose(his(E), T.tail_norms())
    assert np.allclose(los(E), T.tail_norms())
    assert E.is_balanced


def test_balance_flags(rng):
    d = AlgebraDesc((2, 1))
    B = Ball.around_zero(d, 4)
    assert B.is_balanced and B.tail_uniform
    assert not Ball(random_vector(d, 4, rng), 1.0).is_balanced
    central = AlgebraElement.diag(d, [2, 2, 1])
    assert RightMul(B, central).is_balanced
    assert not RightMul(B, random_sample(d, "element", rng)).is_balanced
    assert BalancedHull(Finite([random_vector(d, 4, rng)])).is_balanced
    assert Union(B, Scale(B, 2)).is_balanced


def test_hausdorff_known_value():
    d = AlgebraDesc((1,))
    e = [ModuleVector.basis(d, 3, j) for j in range(3)]
    A = Finite([e[0], e[1]])
    B = Finite([e[0]])
    assert hausdorff(A, B) == pytest.approx(np.sqrt(2))
    assert hausdorff(A, A) == 0.0
    with pytest.raises(ValueError):
        hausdorff(A, Ball.around_zero(d, 3))


def test_intersect_finite(rng):
    d = AlgebraDesc((1,))
    x, y, z = (random_vector(d, 4, rng) for _ in range(3))
    E = IntersectFinite(Finite([x, y]), Finite([y, z]))
    assert E.is_finite and E.finite_points()[0].shape[0] == 1
    assert np.allclose(his(E), y.tail_norms())
    with pytest.raises(ValueError):
        IntersectFinite(Finite([x]), Ball.around_zero(d, 4))


def test_mismatched_operands(rng):
    with pytest.raises(ShapeError):
        Sum(Ball.around_zero(AlgebraDesc((1,)), 3), Ball.around_zero(AlgebraDesc((1,)), 4))


def test_members_of_a_ball_lie_in_it(rng):
    d = AlgebraDesc((2, 1))
    c = random_vector(d, 5, rng)
    E = Ball(c, 0.4)
    for _ in range(50):
        assert (sample(E, rng) - c).norm() <= 0.4 + 1e-12


@given(seeds)
def test_sampled_tails_respect_bounds(seed):
    rng = np.random.default_rng(seed)
    desc = AlgebraDesc(POOL[int(rng.integers(len(POOL)))])
    E = random_expr(Case(rng, desc, int(rng.choice([3, 5])), SuiteConfig()), depth=3)
    lo, hi = los(E), his(E)
    assert np.all(lo <= hi) and np.all(np.diff(hi) <= 1e-12)
    tails = block_tail_norms(E.sample_batch(rng, 200)).max(axis=1)
    assert np.all(tails <= hi + 1e-9)


@given(seeds)
def test_json_roundtrip_preserves_profile(seed):
    rng = np.random.default_rng(seed)
    desc = AlgebraDesc(POOL[int(rng.integers(len(POOL)))])
    N = 4
    E = random_expr(Case(rng, desc, N, SuiteConfig()))
    F = expr_from_dict(E.to_dict(), desc, N)
    assert np.allclose(his(E), his(F), atol=1e-12)
    assert F.to_dict() == E.to_dict()


def test_build_and_references():
    d = AlgebraDesc((1,))
    B = build({"kind": "ball", "radius": 2.0}, d, 4)
    assert sup_norm(B).hi == 2.0
    E = build({"kind": "union", "left": {"kind": "ref", "name": "b"},
               "right": {"kind": "operator_image", "operator": "T"}}, d, 4,
              sets={"b": B}, operators={"T": ModuleOperator.identity(d, 4)})
    assert sup_norm(E).hi == 2.0
    with pytest.raises(KeyError):
        build({"kind": "ref", "name": "missing"}, d, 4)
    with pytest.raises(ValueError):
        build({"kind": "hexagon"}, d, 4)
    with pytest.raises(ValueError):
        build({"kind": "ball"})


def test_hulls_keep_profile(rng):
    d = AlgebraDesc((2,))
    F = Finite([random_vector(d, 5, rng) for _ in range(3)])
    assert np.allclose(his(ConvexHull(F)), his(F))
    assert np.allclose(his(BalancedHull(F)), his(F))
    assert np.allclose(his(Translate(F, ModuleVector.zeros(d, 5))), his(F))
