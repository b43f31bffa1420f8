import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import POOL
from hilbert_mnc import (AlgebraDesc, AlgebraElement, Ball, Finite, MncEstimate, MncParams, ModuleOperator,
                         ModuleVector, RightMul, Scale, Sum, greedy_cover, greedy_packing, lambda_profile, op_mnc,
                         random_operator, random_seminorm, random_vector, seminorm_mnc_all, seminorm_mnc_bounds,
                         star_aggregate, star_aggregate_all, theta)
from hilbert_mnc.measures import MEASURES, epsilon_grid, pairwise_distances, seminorm_stream
from hilbert_mnc.suite import Case, SuiteConfig, random_expr

PARAMS = MncParams(samples=64, seminorms=4)
seeds = st.integers(0, 2 ** 32 - 1)


def test_profile_of_unit_ball(desc):
    prof = lambda_profile(Ball.around_zero(desc, 5))
    assert prof.n_max == 4 and np.all(prof.lo == 1) and np.all(prof.hi == 1)
    assert prof.estimate.lo == prof.estimate.hi == 1.0
    assert "horizon" in prof.to_dict()["note"]
    with pytest.raises(IndexError):
        lambda_profile(Ball.around_zero(desc, 5), 9)


def test_finite_set_profile_vanishes_at_end(rng):
    d = AlgebraDesc((1,))
    E = Finite([random_vector(d, 4, rng, support=2) for _ in range(3)])
    assert np.all(lambda_profile(E, 4).hi[2:] == 0)


def test_epsilon_grid():
    g = epsilon_grid(2.0, MncParams())
    assert g[0] == pytest.approx(2e-3) and g[-1] <= 4.0 and np.allclose(g[1:] / g[:-1], 1.1)
    assert len(epsilon_grid(0.0, MncParams())) == 0


def test_greedy_cover_and_packing_on_a_square():
    pts = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=complex)
    assert greedy_cover(pts, 1.0, 1) is None
    assert len(greedy_cover(pts, 1.5, 1)) == 1
    assert len(greedy_cover(pts, 0.5, 4)) == 4
    idx, sep = greedy_packing(pts, 4)
    assert sorted(idx) == [0, 1, 2, 3] and sep == pytest.approx(1.0)
    assert greedy_packing(pts, 5) == ([], 0.0)
    d = pairwise_distances(pts)
    assert np.allclose(d, np.linalg.norm(pts[:, None] - pts[None], axis=-1))


@given(st.integers(1, 30), seeds)
def test_cover_really_covers(count, seed):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((count, 3)) + 1j * rng.standard_normal((count, 3))
    eps = float(rng.uniform(0.5, 3.0))
    centers = greedy_cover(pts, eps, count)
    assert centers is not None
    d = np.linalg.norm(pts[:, None] - pts[centers][None], axis=-1)
    assert np.all(d.min(axis=1) <= eps)


def test_estimate_validation():
    with pytest.raises(ValueError):
        MncEstimate("chi", 2.0, 1.0, "sampled", "sampled")
    with pytest.raises(ValueError):
        MncEstimate("kuratowski", 0.0, 1.0, "sampled", "sampled")
    e = MncEstimate("chi", 0.5, 1.0, "sampled", "certified")
    assert e.validity == "sampled" and e.to_dict()["upper_validity"] == "certified"


def test_finite_sets_give_zero(rng):
    d = AlgebraDesc((2,))
    E = Finite([random_vector(d, 4, rng) for _ in range(5)])
    p = random_seminorm(d, 4, rng)
    for m in MEASURES:
        e = seminorm_mnc_bounds(E, p, m, PARAMS)
        assert e.lower == e.upper == 0.0 and e.validity == "certified"
        assert star_aggregate(E, m, PARAMS).upper == 0.0


def test_zero_set():
    d = AlgebraDesc((1,))
    E = Ball.around_zero(d, 4, 0.0)
    assert star_aggregate(E, "chi", PARAMS).upper == 0.0


def test_scalar_ball_packing():
    d = AlgebraDesc((1,))
    e = star_aggregate_all(Ball.around_zero(d, 8), PARAMS)
    assert e["istratescu"].lower == pytest.approx(np.sqrt(2), rel=0.02)
    assert e["istratescu"].upper == 2.0 and e["chi"].upper == 1.0
    assert e["chi"].lower_validity == "sampled" and e["chi"].upper_validity == "certified"


@given(seeds)
def test_bracket_chain(seed):
    rng = np.random.default_rng(seed)
    desc = AlgebraDesc(POOL[int(rng.integers(len(POOL)))])
    c = Case(rng, desc, 6, SuiteConfig())
    E = random_expr(c)
    e = seminorm_mnc_all(E, random_seminorm(desc, 6, rng), PARAMS)
    chi, ist, alpha = e["chi"], e["istratescu"], e["alpha"]
    assert chi.lower <= ist.upper + 1e-9 and ist.lower <= alpha.upper + 1e-9
    assert alpha.upper <= 2 * chi.upper + 1e-9


def test_star_lower_monotone_in_seminorm_count():
    d = AlgebraDesc((2, 1))
    E = Sum(Ball.around_zero(d, 6, 0.5), Finite([random_vector(d, 6, np.random.default_rng(1))]))
    ps = seminorm_stream(E, PARAMS, 8)
    assert seminorm_stream(E, PARAMS, 3)[2].weights.allclose(ps[2].weights, 0)
    few = star_aggregate(E, "istratescu", PARAMS, seminorms=ps[:2]).lower
    many = star_aggregate(E, "istratescu", PARAMS, seminorms=ps).lower
    assert few <= many


def test_chi_lower_below_lambda_at_horizon(rng):
    d = AlgebraDesc((1, 1))
    p = AlgebraElement.diag(d, [1, 0])
    E = Sum(RightMul(Ball.around_zero(d, 6, 1.0), p),
            RightMul(Ball.around_zero(d, 6, 2.0), AlgebraElement.unit(d) - p))
    e = star_aggregate(E, "chi", PARAMS)
    assert e.lower <= lambda_profile(E, PARAMS.resolved_horizon(6)).estimate.hi + 1e-6
    assert e.upper == pytest.approx(2.0)


def test_operator_measures(rng):
    d = AlgebraDesc((1,))
    N = 6
    e = [ModuleVector.basis(d, N, j) for j in range(N)]
    K = theta(e[0], e[1])
    assert np.allclose(op_mnc(K, "lambda0").hi, [1, 1, 0, 0, 0, 0])
    I = ModuleOperator.identity(d, N)
    assert op_mnc(I, "lambda0").estimate.hi == 1.0
    assert op_mnc(I, "chi0", PARAMS).upper == 1.0
    T = random_operator(d, N, rng)
    assert np.all(op_mnc(T, "lambda0").hi <= T.norm() + 1e-9)
    assert np.allclose(op_mnc(T * 3.0, "lambda0").hi, 3 * op_mnc(T, "lambda0").hi)
    with pytest.raises(ValueError):
        op_mnc(T, "beta0")


def test_params():
    assert MncParams().pack_size == 4
    assert MncParams(min_pack=6).pack_size == 6
    assert MncParams().resolved_horizon(8) == 4
    with pytest.raises(ValueError):
        MncParams(horizon=9).resolved_horizon(8)
    assert set(MncParams().to_dict()) >= {"samples", "max_centers", "seed"}


def test_deterministic(rng):
    d = AlgebraDesc((2,))
    E = Scale(Ball.around_zero(d, 6), 1.5)
    a = star_aggregate_all(E, PARAMS)
    b = star_aggregate_all(E, PARAMS)
    assert all(a[m].to_dict() == b[m].to_dict() for m in MEASURES)
