import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import POOL, dense
from hilbert_mnc import (AlgebraDesc, AlgebraElement, NotInvertibleError, ShapeError, State, arithmetic,
                         conjugate_state, norm, positivity, random_sample, state_eval)

seeds = st.integers(0, 2 ** 32 - 1)
descs = st.sampled_from(POOL).map(AlgebraDesc)


def test_desc_validation():
    with pytest.raises(ValueError):
        AlgebraDesc(())
    with pytest.raises(ValueError):
        AlgebraDesc((0,))
    d = AlgebraDesc((2, 1))
    assert d.dim == 5 and d.n_blocks == 2 and not d.is_abelian
    assert AlgebraDesc.from_dict(d.to_dict()) == d
    assert AlgebraDesc((1, 1, 1)).is_abelian


def test_shape_mismatch_raises():
    a = AlgebraElement.unit(AlgebraDesc((2,)))
    with pytest.raises(ShapeError):
        a + AlgebraElement.unit(AlgebraDesc((1, 1)))
    with pytest.raises(ShapeError):
        AlgebraElement(AlgebraDesc((2,)), [np.eye(3)])


@given(descs, seeds)
def test_norm_matches_dense_spectral_norm(desc, seed):
    a = random_sample(desc, "element", np.random.default_rng(seed))
    assert norm(a) == pytest.approx(np.linalg.norm(dense(a), 2), abs=1e-10)


@given(descs, seeds)
def test_cstar_identity(desc, seed):
    a = random_sample(desc, "element", np.random.default_rng(seed))
    assert (a.H @ a).norm() == pytest.approx(a.norm() ** 2, rel=1e-9)


@given(descs, seeds)
def test_arithmetic_matches_dense(desc, seed):
    rng = np.random.default_rng(seed)
    a, b = random_sample(desc, "element", rng), random_sample(desc, "element", rng)
    assert np.allclose(dense(arithmetic(a, b, "add")), dense(a) + dense(b))
    assert np.allclose(dense(arithmetic(a, b, "sub")), dense(a) - dense(b))
    assert np.allclose(dense(arithmetic(a, b, "mul")), dense(a) @ dense(b))
    assert np.allclose(dense(arithmetic(a, kind="adjoint")), dense(a).conj().T)
    assert np.allclose(dense(arithmetic(a, 2 - 1j, "scale")), (2 - 1j) * dense(a))
    assert np.allclose(dense(arithmetic(a, kind="inverse")), np.linalg.inv(dense(a)), atol=1e-6)


def test_unknown_kind():
    with pytest.raises(ValueError):
        arithmetic(AlgebraElement.unit(AlgebraDesc((1,))), kind="pow")
    with pytest.raises(ValueError):
        random_sample(AlgebraDesc((1,)), "banana", np.random.default_rng(0))


def test_singular_inverse():
    with pytest.raises(NotInvertibleError):
        AlgebraElement.diag(AlgebraDesc((1, 1)), [1, 0]).inverse()


@given(descs, seeds)
def test_sample_kinds(desc, seed):
    rng = np.random.default_rng(seed)
    assert random_sample(desc, "hermitian", rng).is_hermitian()
    assert positivity(random_sample(desc, "positive", rng))
    assert random_sample(desc, "unitary", rng).is_unitary()
    assert random_sample(desc, "projection", rng).is_projection()


def test_positivity_rejects_negative():
    d = AlgebraDesc((1, 1))
    assert not positivity(AlgebraElement.diag(d, [1, -1]))
    assert positivity(AlgebraElement.diag(d, [1, 0]))


def test_centrality():
    d = AlgebraDesc((2, 1))
    assert AlgebraElement.diag(d, [3, 3, -1]).is_central()
    assert not AlgebraElement.diag(d, [1, 2, 0]).is_central()


@given(descs, seeds)
def test_state_is_positive_unital(desc, seed):
    rng = np.random.default_rng(seed)
    phi = random_sample(desc, "state", rng)
    assert state_eval(phi, AlgebraElement.unit(desc)) == pytest.approx(1.0, abs=1e-10)
    a = random_sample(desc, "positive", rng)
    assert state_eval(phi, a).real >= -1e-12
    assert abs(state_eval(phi, a).imag) < 1e-10


def test_invalid_state():
    d = AlgebraDesc((2,))
    with pytest.raises(ValueError):
        State(d, [np.diag([1.0, 1.0])])
    with pytest.raises(ValueError):
        State(d, [np.diag([1.5, -0.5])])


@given(descs, seeds)
def test_conjugated_state(desc, seed):
    rng = np.random.default_rng(seed)
    phi = random_sample(desc, "state", rng)
    u = random_sample(desc, "unitary", rng)
    a = random_sample(desc, "element", rng)
    assert state_eval(conjugate_state(phi, u), a) == pytest.approx(state_eval(phi, u.H @ a @ u), abs=1e-10)


def test_elements_are_immutable():
    a = AlgebraElement.unit(AlgebraDesc((2,)))
    with pytest.raises((AttributeError, ValueError)):
        a.blocks[0][0, 0] = 5
    with pytest.raises(AttributeError):
        a.desc = None


def test_json_roundtrip(rng):
    d = AlgebraDesc((2, 1))
    a = random_sample(d, "element", rng)
    assert AlgebraElement.from_json(d, a.to_json()).allclose(a, atol=0)
    phi = random_sample(d, "state", rng)
    assert np.allclose(State.from_json(d, phi.to_json()).densities[0], phi.densities[0])


def test_sampling_is_deterministic():
    d = AlgebraDesc((2, 1))
    a = random_sample(d, "element", np.random.default_rng(9))
    b = random_sample(d, "element", np.random.default_rng(9))
    assert a.allclose(b, atol=0)
