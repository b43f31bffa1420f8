import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import POOL, dense
from hilbert_mnc import (AlgebraDesc, AlgebraElement, ModuleOperator, ModuleVector, ShapeError, inner_product,
                         op_norm, operator_algebra, random_operator, random_sample, random_vector,
                         submodule_project, tail, tail_op_norm, theta, truncate, vec_norm)
from hilbert_mnc.module import operator_from_json, vector_from_json

seeds = st.integers(0, 2 ** 32 - 1)
descs = st.sampled_from(POOL).map(AlgebraDesc)
lengths = st.sampled_from([1, 3, 5])


def inner_oracle(x, y):
    """sum_j xi_j^* eta_j, entry by entry."""
    out = np.zeros_like(dense(x.entry(0)))
    for j in range(x.N):
        out += dense(x.entry(j)).conj().T @ dense(y.entry(j))
    return out


@given(descs, lengths, seeds)
def test_inner_product_matches_loop(desc, N, seed):
    rng = np.random.default_rng(seed)
    x, y = random_vector(desc, N, rng), random_vector(desc, N, rng)
    assert np.allclose(dense(inner_product(x, y)), inner_oracle(x, y))
    assert np.allclose(dense(inner_product(y, x)), inner_oracle(x, y).conj().T)


@given(descs, lengths, seeds)
def test_norm_is_sqrt_of_inner_norm(desc, N, seed):
    x = random_vector(desc, N, np.random.default_rng(seed))
    assert vec_norm(x) == pytest.approx(np.sqrt(np.linalg.norm(inner_oracle(x, x), 2)), rel=1e-10)


@given(descs, lengths, seeds)
def test_module_linearity(desc, N, seed):
    rng = np.random.default_rng(seed)
    x, y = random_vector(desc, N, rng), random_vector(desc, N, rng)
    a = random_sample(desc, "element", rng)
    assert np.allclose(dense(inner_product(y, x.right_mul(a))), dense(inner_product(y, x)) @ dense(a))
    assert (x * a).allclose(x.right_mul(a))


@given(descs, st.integers(2, 6), seeds)
def test_truncation_and_tail(desc, N, seed):
    rng = np.random.default_rng(seed)
    x = random_vector(desc, N, rng)
    n = int(rng.integers(0, N + 1))
    assert (truncate(x, n) + tail(x, n)).allclose(x, 0)
    assert truncate(x, n).support() <= n
    t = x.tail_norms()
    assert t[n] == pytest.approx(tail(x, n).norm(), abs=1e-12)
    assert np.all(np.diff(t) <= 1e-12) and t[-1] == 0


@given(descs, st.integers(2, 6), seeds)
def test_orthogonal_supports_increase_norm(desc, N, seed):
    rng = np.random.default_rng(seed)
    x = random_vector(desc, N, rng)
    n = int(rng.integers(1, N))
    assert x.norm() >= truncate(x, n).norm() - 1e-12


def test_truncation_out_of_range():
    x = ModuleVector.zeros(AlgebraDesc((1,)), 3)
    with pytest.raises(IndexError):
        x.truncate(4)


def test_shape_mismatch():
    x = ModuleVector.zeros(AlgebraDesc((1,)), 3)
    with pytest.raises(ShapeError):
        x + ModuleVector.zeros(AlgebraDesc((1,)), 4)
    with pytest.raises(ShapeError):
        x + ModuleVector.zeros(AlgebraDesc((2,)), 3)


def test_scalar_example_norm():
    d = AlgebraDesc((1,))
    x = ModuleVector.from_entries([AlgebraElement.scalar(d, v) for v in (3, 4, 0, 0)])
    assert x.norm() == pytest.approx(5.0)


@given(descs, lengths, seeds)
def test_projection_distance(desc, N, seed):
    rng = np.random.default_rng(seed)
    gens = [random_vector(desc, N, rng) for _ in range(int(rng.integers(1, 3)))]
    x = random_vector(desc, N, rng)
    p, dist = submodule_project(x, gens)
    assert dist == pytest.approx((x - p).norm())
    for g in gens:  # the residual is module-orthogonal to the generators
        assert inner_product(g, x - p).norm() < 1e-8
    # no module combination of the generators gets closer
    for _ in range(10):
        y = ModuleVector.zeros(desc, N)
        for g in gens:
            y = y + g.right_mul(random_sample(desc, "element", rng))
        assert (x - y).norm() >= dist - 1e-9


def test_projection_onto_basis_slots():
    d = AlgebraDesc((2,))
    rng = np.random.default_rng(3)
    x = random_vector(d, 4, rng)
    gens = [ModuleVector.basis(d, 4, j) for j in range(2)]
    p, dist = submodule_project(x, gens)
    assert p.allclose(truncate(x, 2), 1e-10)
    assert dist == pytest.approx(tail(x, 2).norm())


def dense_operator(T, b):
    return T.flat_blocks()[b]


@given(descs, lengths, seeds)
def test_operator_apply_compose_adjoint(desc, N, seed):
    rng = np.random.default_rng(seed)
    T, S = random_operator(desc, N, rng), random_operator(desc, N, rng)
    x, y = random_vector(desc, N, rng), random_vector(desc, N, rng)
    for b in range(desc.n_blocks):
        assert np.allclose(dense_operator(T @ S, b), dense_operator(T, b) @ dense_operator(S, b))
    assert (operator_algebra(T, operator_algebra(S, x), "apply")).allclose(operator_algebra(T, S, "compose").apply(x))
    assert np.allclose(dense(inner_product(T.apply(x), y)), dense(inner_product(x, T.adjoint().apply(y))))
    assert operator_algebra(T, S, "add").apply(x).allclose(T.apply(x) + S.apply(x))
    assert operator_algebra(T, 2.0, "scale").apply(x).allclose(T.apply(x) * 2.0)


@given(descs, lengths, seeds)
def test_operator_norm_bounds_and_attained(desc, N, seed):
    rng = np.random.default_rng(seed)
    T = random_operator(desc, N, rng)
    for _ in range(5):
        x = random_vector(desc, N, rng)
        assert T.apply(x).norm() <= op_norm(T) * x.norm() + 1e-10
    n = int(rng.integers(0, N))
    v = T.tail_maximizer(n)
    assert v.norm() == pytest.approx(1.0)
    assert tail(T.apply(v), n).norm() == pytest.approx(tail_op_norm(T, n), rel=1e-9)
    assert tail_op_norm(T, 0) == pytest.approx(op_norm(T))


@given(descs, lengths, seeds)
def test_theta_action(desc, N, seed):
    rng = np.random.default_rng(seed)
    y, z, x = (random_vector(desc, N, rng) for _ in range(3))
    assert theta(y, z).apply(x).allclose(z.right_mul(inner_product(y, x)), 1e-10)


def test_theta_support():
    d = AlgebraDesc((2, 1))
    rng = np.random.default_rng(0)
    y, z = random_vector(d, 5, rng, support=2), random_vector(d, 5, rng, support=3)
    T = theta(y, z)
    assert T.support() == 3
    assert np.all(T.tail_norms()[3:] < 1e-14)


def test_identity_and_zero():
    d = AlgebraDesc((1, 1))
    assert op_norm(ModuleOperator.identity(d, 4)) == pytest.approx(1.0)
    assert op_norm(ModuleOperator.zeros(d, 4)) == 0.0
    assert np.allclose(ModuleOperator.identity(d, 4).tail_norms(), [1, 1, 1, 1, 0])


def test_json_parsers(rng):
    d = AlgebraDesc((1,))
    e0 = vector_from_json(d, 3, {"basis": 0})
    assert e0.norm() == 1.0 and e0.support() == 1
    x = random_vector(d, 3, rng)
    assert vector_from_json(d, 3, x.to_json()).allclose(x, 0)
    T = operator_from_json(d, 3, {"kind": "theta", "y": {"basis": 0}, "z": {"basis": 1}})
    assert T.apply(e0).allclose(vector_from_json(d, 3, {"basis": 1}))
    assert operator_from_json(d, 3, "identity").allclose(ModuleOperator.identity(d, 3))
    with pytest.raises(ShapeError):
        vector_from_json(d, 3, [[1.0]])
