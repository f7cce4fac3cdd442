"""Unit tests for the dense linear-algebra kernel.

Covers partial traces, norms, Hermitian handling, rank projectors, isometry
checks and the dimension cap read from the environment.
"""

import os
from unittest.mock import patch

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpvlab.errors import DimensionCapError, NotHermitianError, ShapeMismatchError
from qpvlab.matkernel import (
    RegisterShape,
    dagger,
    hermitian_part,
    is_isometry,
    mat_of_vector,
    partial_trace,
    permute_factors,
    positive_part_projector,
    random_isometry,
    random_state,
    random_unitary,
    support_projector,
    tensor,
    trace_norm,
    vector_of_mat,
)


def test_partial_trace_of_product_state():
    """Tracing out the second factor of a ⊗ b leaves a when Tr b = 1."""
    rng = np.random.default_rng(1)
    u = random_state(3, rng)
    v = random_state(2, rng)
    a, b = np.outer(u, u.conj()), np.outer(v, v.conj())
    shape = RegisterShape((3, 2))

    assert np.allclose(partial_trace(tensor(a, b), shape, keep=[0]), a)
    assert np.allclose(partial_trace(tensor(a, b), shape, keep=[1]), b)


def test_partial_trace_of_bell_state_is_maximally_mixed():
    """Either half of a Bell state is I/2."""
    bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    rho = np.outer(bell, bell.conj())
    assert np.allclose(partial_trace(rho, RegisterShape((2, 2)), keep=[0]), np.eye(2) / 2)


def test_partial_trace_keeps_factor_order():
    """Keeping factors 0 and 2 of a three-factor product gives a ⊗ c."""
    rng = np.random.default_rng(2)
    states = [random_state(d, rng) for d in (2, 3, 2)]
    a, b, c = (np.outer(s, s.conj()) for s in states)
    rho = tensor(tensor(a, b), c)
    kept = partial_trace(rho, RegisterShape((2, 3, 2)), keep=[2, 0])
    assert np.allclose(kept, np.kron(a, c))


def test_partial_trace_rejects_bad_indices():
    """Out-of-range factors and mismatched operators are shape errors."""
    with pytest.raises(ShapeMismatchError):
        partial_trace(np.eye(4), RegisterShape((2, 2)), keep=[2])
    with pytest.raises(ShapeMismatchError):
        partial_trace(np.eye(3), RegisterShape((2, 2)), keep=[0])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d1=st.integers(1, 4), d2=st.integers(1, 4))
def test_partial_trace_matches_matrix_form(seed, d1, d2):
    """For a pure state c, Tr_2 cc* = Mat(c) Mat(c)*."""
    rng = np.random.default_rng(seed)
    c = random_state(d1 * d2, rng)
    shape = RegisterShape((d1, d2))
    M = mat_of_vector(c, shape)
    rho = np.outer(c, c.conj())
    assert np.allclose(partial_trace(rho, shape, keep=[0]), M @ dagger(M), atol=1e-12)
    assert np.allclose(partial_trace(rho, shape, keep=[1]), M.T @ M.conj(), atol=1e-12)


def test_mat_of_vector_and_back():
    """Mat(c) is the row-major reshape of c."""
    c = np.arange(6, dtype=complex)
    M = mat_of_vector(c, RegisterShape((2, 3)))
    assert M.shape == (2, 3)
    assert M[1, 0] == 3
    assert np.array_equal(vector_of_mat(M), c)


def test_mat_of_vector_length_mismatch():
    """A vector of the wrong length is a shape error."""
    with pytest.raises(ShapeMismatchError):
        mat_of_vector(np.ones(5), RegisterShape((2, 3)))


def test_trace_norm():
    """Trace norm of a diagonal and of a nilpotent matrix."""
    assert trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3.0)
    assert trace_norm(np.array([[0, 1], [0, 0]])) == pytest.approx(1.0)


def random_density(dim, rank, rng):
    states = [random_state(dim, rng) for _ in range(rank)]
    weights = rng.uniform(0.1, 1.0, size=rank)
    rho = sum(w * np.outer(s, s.conj()) for w, s in zip(weights, states))
    return rho / np.trace(rho).real


def test_tensor_is_associative():
    """(a ⊗ b) ⊗ c equals a ⊗ (b ⊗ c) for rectangular factors."""
    rng = np.random.default_rng(5)
    a, b, c = (rng.normal(size=(d, d + 1)) + 1j * rng.normal(size=(d, d + 1)) for d in (2, 3, 1))
    assert np.allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)))
    assert tensor(a, b).shape == (6, 12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 5))
def test_trace_norm_triangle_and_unitary_invariance(seed, dim):
    """The trace norm is subadditive and unitarily invariant."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    b = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-12
    u, v = random_unitary(dim, rng), random_unitary(dim, rng)
    assert trace_norm(u @ a @ v) == pytest.approx(trace_norm(a), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 6), data=st.data())
def test_support_projector_of_density_matrix(seed, dim, data):
    """S is a Hermitian idempotent of the right rank with Tr[S rho] = Tr rho."""
    rank = data.draw(st.integers(1, dim))
    rng = np.random.default_rng(seed)
    rho = random_density(dim, rank, rng)
    S = support_projector(rho)
    assert np.allclose(S @ S, S, atol=1e-10)
    assert np.allclose(S, dagger(S), atol=1e-12)
    assert np.trace(S).real == pytest.approx(rank, abs=1e-9)
    assert np.trace(S @ rho).real == pytest.approx(np.trace(rho).real, abs=1e-10)


def test_support_projector_ignores_scale():
    """The support of 0.3vv* is vv*."""
    rng = np.random.default_rng(6)
    v = random_state(3, rng)
    assert np.allclose(support_projector(0.3 * np.outer(v, v.conj())), np.outer(v, v.conj()))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d1=st.integers(1, 3), d2=st.integers(1, 3), d3=st.integers(1, 3))
def test_partial_trace_preserves_trace(seed, d1, d2, d3):
    """Tracing out any set of factors keeps the trace."""
    rng = np.random.default_rng(seed)
    shape = RegisterShape((d1, d2, d3))
    rho = random_density(shape.total, 2, rng)
    for keep in ([0], [1], [2], [0, 2], [1, 2], []):
        assert np.trace(partial_trace(rho, shape, keep)).real == pytest.approx(1.0, abs=1e-12)


def test_mat_of_maximally_entangled_vector():
    """Mat of the maximally entangled vector is I/sqrt(2)."""
    bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    assert np.allclose(mat_of_vector(bell, RegisterShape((2, 2))), np.eye(2) / np.sqrt(2))


def test_mat_of_vector_round_trips_random_vectors():
    """Mat and its inverse round-trip random vectors exactly."""
    rng = np.random.default_rng(7)
    for _ in range(50):
        d1, d2 = (int(d) for d in rng.integers(1, 6, size=2))
        c = random_state(d1 * d2, rng)
        M = mat_of_vector(c, RegisterShape((d1, d2)))
        assert M.shape == (d1, d2)
        assert np.array_equal(vector_of_mat(M), c)
        assert np.array_equal(mat_of_vector(vector_of_mat(M), RegisterShape((d1, d2))), M)


def test_hermitian_part_rejects_asymmetric_operator():
    """Asymmetry above tolerance raises NotHermitianError."""
    with pytest.raises(NotHermitianError):
        hermitian_part(np.array([[0, 1], [0, 0]], dtype=complex))


def test_hermitian_part_symmetrises_small_asymmetry():
    """Asymmetry below tolerance is averaged away."""
    m = np.array([[1, 1e-12], [0, 1]], dtype=complex)
    h = hermitian_part(m)
    assert np.allclose(h, dagger(h))


def test_support_and_positive_part_projectors():
    """Support and positive-part projectors of diagonal operators."""
    rho = np.diag([0.7, 0.3, 0.0])
    assert np.allclose(support_projector(rho), np.diag([1, 1, 0]))
    assert np.allclose(positive_part_projector(np.diag([0.5, -0.5, 0.0])), np.diag([1, 0, 0]))


def test_is_isometry():
    """Isometries pass; a scaled and a wide matrix do not."""
    rng = np.random.default_rng(3)
    assert is_isometry(random_isometry(6, 3, rng)).ok
    assert is_isometry(random_unitary(4, rng)).ok

    not_isometry = is_isometry(np.array([[1, 0], [0, 2]], dtype=complex))
    assert not not_isometry.ok
    assert not_isometry.residual == pytest.approx(3.0)

    wide = is_isometry(np.ones((2, 3)))
    assert not wide.ok
    assert wide.residual == float("inf")


def test_permute_factors_swaps_product_state():
    """Swapping the factors of a ⊗ b gives b ⊗ a."""
    rng = np.random.default_rng(4)
    a, b = random_state(2, rng), random_state(3, rng)
    assert np.allclose(permute_factors(np.kron(a, b), (2, 3), (1, 0)), np.kron(b, a))


def test_permute_factors_rejects_non_permutation():
    """An order that is not a permutation is a shape error."""
    with pytest.raises(ShapeMismatchError):
        permute_factors(np.ones(4), (2, 2), (0, 0))


def test_register_shape_validation():
    """RegisterShape multiplies dims and refuses zero."""
    assert RegisterShape((2, 3)).total == 6
    assert len(RegisterShape((2, 3, 4))) == 3
    with pytest.raises(ShapeMismatchError):
        RegisterShape((2, 0))


def test_dimension_cap_from_environment():
    """QPVLAB_DIM_CAP is re-read on every check."""
    with patch.dict(os.environ, {"QPVLAB_DIM_CAP": "8"}):
        RegisterShape((8, 8))
        with pytest.raises(DimensionCapError):
            RegisterShape((16,))
        with pytest.raises(DimensionCapError):
            trace_norm(np.eye(9))
    RegisterShape((16,))
