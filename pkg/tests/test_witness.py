import numpy as np
import pytest

from hilbert_mnc import (AlgebraDesc, AlgebraElement, Ball, Finite, ModuleOperator, OperatorImage, RightMul,
                         Scale, Sum, discrete_witness, lambda_profile, random_sample, random_vector)
from hilbert_mnc.witness import PrecompactError


@pytest.mark.parametrize("blocks", [(1,), (2,), (1, 1), (3,)])
@pytest.mark.parametrize("twist", [False, True])
def test_scaled_ball(blocks, twist):
    E = Scale(Ball.around_zero(AlgebraDesc(blocks), 8), 2.0)
    w = discrete_witness(E, 0.1, twist=twist)
    assert len(w.points) >= 4
    assert w.separation == pytest.approx((4 - 0.1) / 2)
    assert w.min_separation() >= w.separation - 1e-9
    assert w.seminorm.normalization() == pytest.approx(1.0, abs=1e-10)
    for x in w.points:  # every point is a member
        assert x.norm() <= 2 + 1e-12


def test_cuts_increase_and_trace():
    w = discrete_witness(Ball.around_zero(AlgebraDesc((1,)), 6), 0.2)
    assert list(w.cuts) == sorted(set(w.cuts))
    assert len(w.trace) == len(w.cuts) - 1
    assert all(t["tail"] > w.c1 and t["residual"] < w.c2 for t in w.trace)
    d = w.to_dict()
    assert d["points"] == len(w.points) and d["istratescu_lower"] == w.separation


def test_lambda_bound():
    E = Scale(Ball.around_zero(AlgebraDesc((2,)), 8), 1.5)
    eps = 0.2
    w = discrete_witness(E, eps)
    lam = lambda_profile(E).estimate.hi
    assert lam ** 2 <= w.set_norm * w.istratescu_lower + eps + 1e-6


def test_diagonal_operator_image(rng):
    d = AlgebraDesc((2,))
    N = 6
    diag = [random_sample(d, "unitary", rng) * 1.3 for _ in range(N)]
    T = ModuleOperator.from_grid([[diag[i] if i == j else AlgebraElement.zero(d) for j in range(N)]
                                  for i in range(N)])
    w = discrete_witness(OperatorImage(T), 0.3, twist=True)
    assert len(w.points) >= 2 and w.min_separation() >= w.separation - 1e-9


def test_two_block_set():
    d = AlgebraDesc((1, 1))
    p = AlgebraElement.diag(d, [1, 0])
    E = Sum(RightMul(Ball.around_zero(d, 6, 1.0), p),
            RightMul(Ball.around_zero(d, 6, 2.0), AlgebraElement.unit(d) - p))
    w = discrete_witness(E, 0.5)
    assert w.delta == 2.0 and len(w.points) >= 4


def test_finite_set_is_precompact(rng):
    d = AlgebraDesc((1,))
    with pytest.raises(PrecompactError):
        discrete_witness(Finite([random_vector(d, 4, rng)]), 0.1)


def test_zero_tail_is_precompact():
    with pytest.raises(PrecompactError):
        discrete_witness(Ball.around_zero(AlgebraDesc((1,)), 4, 0.0), 0.1)


def test_eps_range():
    E = Ball.around_zero(AlgebraDesc((1,)), 4)
    with pytest.raises(ValueError):
        discrete_witness(E, 1.0)
    with pytest.raises(ValueError):
        discrete_witness(E, 0.0)


def test_unbalanced_set_rejected(rng):
    d = AlgebraDesc((2,))
    E = RightMul(Scale(Ball.around_zero(d, 4), 1.0), random_sample(d, "element", rng))
    with pytest.raises(ValueError):
        discrete_witness(E, 0.1)


def test_max_points():
    w = discrete_witness(Ball.around_zero(AlgebraDesc((1,)), 8), 0.1, max_points=3)
    assert len(w.points) == 3
    assert np.isfinite(w.min_separation())
