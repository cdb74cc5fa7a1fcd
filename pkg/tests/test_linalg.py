import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import KET0, KET1, P0, PLUS, S2, X
from qagree.errors import DimensionMismatch, InvariantViolation, KindMismatch
from qagree.linalg import (
    adjoint,
    apply,
    complete_isometry_to_unitary,
    partial_meter_contraction,
    tensor_product,
    unitary_deviation,
)
from qagree.sampling import haar_state, random_orthonormal_basis, random_unitary


def kron_by_index(a, b):
    """Loop oracle for the Kronecker convention i*dim(b) + j."""
    if a.ndim == 1:
        out = np.zeros(a.size * b.size, dtype=complex)
        for i in range(a.size):
            for j in range(b.size):
                out[i * b.size + j] = a[i] * b[j]
        return out
    (ra, ca), (rb, cb) = a.shape, b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(rb):
            for k in range(ca):
                for l in range(cb):
                    out[i * rb + j, k * cb + l] = a[i, k] * b[j, l]
    return out


def test_tensor_product_basis_vectors():
    np.testing.assert_array_equal(tensor_product(KET0, KET0), [1, 0, 0, 0])


def test_tensor_product_identity():
    np.testing.assert_array_equal(tensor_product(np.eye(2), np.eye(2)), np.eye(4))


def test_tensor_product_plus_one():
    np.testing.assert_allclose(tensor_product(PLUS, KET1), [0, S2, 0, S2], atol=1e-15)


def test_tensor_product_kind_mismatch():
    with pytest.raises(KindMismatch):
        tensor_product(KET0, np.eye(2))


def test_tensor_product_matches_loop_oracle(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    np.testing.assert_allclose(tensor_product(a, b), kron_by_index(a, b), rtol=0, atol=1e-14)
    v, w = haar_state(3, rng), haar_state(4, rng)
    np.testing.assert_allclose(tensor_product(v, w), kron_by_index(v, w), rtol=0, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_tensor_product_associative(da, db, dc, seed):
    r = np.random.default_rng(seed)
    a, b, c = (r.normal(size=(n, n)) + 1j * r.normal(size=(n, n)) for n in (da, db, dc))
    left = tensor_product(tensor_product(a, b), c)
    right = tensor_product(a, tensor_product(b, c))
    np.testing.assert_allclose(left, right, rtol=0, atol=1e-14)


@pytest.mark.parametrize(
    "m, expected",
    [
        (np.eye(2), np.eye(2)),
        (np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]])),
        (np.array([[0, 1j], [0, 0]]), np.array([[0, 0], [-1j, 0]])),
    ],
)
def test_adjoint(m, expected):
    np.testing.assert_array_equal(adjoint(m), expected)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_adjoint_involution(n, seed):
    r = np.random.default_rng(seed)
    m = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
    np.testing.assert_array_equal(adjoint(adjoint(m)), m)


def test_apply_examples():
    w, n2 = apply(np.eye(2), KET0)
    np.testing.assert_array_equal(w, KET0)
    assert n2 == 1.0
    w, n2 = apply(P0, PLUS)
    np.testing.assert_allclose(w, [S2, 0])
    assert n2 == pytest.approx(0.5, abs=1e-15)
    w, n2 = apply(np.array([[0, 1], [0, 0]]), KET1)
    np.testing.assert_array_equal(w, KET0)
    assert n2 == 1.0


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply(np.eye(3), KET0)


def test_completion_single_column():
    u = complete_isometry_to_unitary([[1, 0, 0, 0]], 4)
    np.testing.assert_array_equal(u[:, 0], [1, 0, 0, 0])
    assert unitary_deviation(u) < 1e-12


def test_completion_full_set_is_unchanged(rng):
    q = random_unitary(4, rng)
    u = complete_isometry_to_unitary([q[:, k] for k in range(4)], 4)
    np.testing.assert_array_equal(u, q)


def test_completion_two_random_columns(rng):
    cols = random_orthonormal_basis(4, rng)[:2]
    u = complete_isometry_to_unitary(cols, 4, indices=[1, 3])
    assert np.max(np.abs(u.conj().T @ u - np.eye(4))) <= 1e-12
    assert np.max(np.abs(u[:, 1] - cols[0])) <= 1e-12
    assert np.max(np.abs(u[:, 3] - cols[1])) <= 1e-12


def test_completion_is_deterministic_with_positive_phase(rng):
    cols = random_orthonormal_basis(5, rng)[:2]
    a = complete_isometry_to_unitary(cols, 5)
    b = complete_isometry_to_unitary(cols, 5)
    np.testing.assert_array_equal(a, b)
    for k in range(2, 5):
        col = a[:, k]
        first = col[np.flatnonzero(np.abs(col) > 1e-8)[0]]
        assert first.imag == pytest.approx(0, abs=1e-15) and first.real > 0


def test_completion_rejects_bad_input():
    with pytest.raises(InvariantViolation):
        complete_isometry_to_unitary([[1, 0], [1, 0]], 2)
    with pytest.raises(DimensionMismatch):
        complete_isometry_to_unitary([[1, 0], [0, 1], [0, 0]], 2)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("n, k", [(3, 1), (6, 2), (8, 4), (9, 3)])
def test_completion_random_isometries(seed, n, k):
    r = np.random.default_rng(seed)
    cols = random_orthonormal_basis(n, r)[:k]
    idx = sorted(r.choice(n, size=k, replace=False).tolist())
    u = complete_isometry_to_unitary(cols, n, indices=idx)
    assert unitary_deviation(u) <= 1e-10
    for i, c in zip(idx, cols):
        assert np.max(np.abs(u[:, i] - c)) <= 1e-12


def contraction_oracle(u, o, xi1, xi2):
    """Entry (i, j) = <i,xi1,xi2| U^dag O U |j,xi1,xi2> built from index loops."""
    m1, m2 = xi1.size, xi2.size
    d = u.shape[0] // (m1 * m2)
    vecs = []
    for s in range(d):
        v = np.zeros(d * m1 * m2, dtype=complex)
        for a in range(m1):
            for b in range(m2):
                v[s * m1 * m2 + a * m2 + b] = xi1[a] * xi2[b]
        vecs.append(u @ v)
    return np.array([[np.vdot(vecs[i], o @ vecs[j]) for j in range(d)] for i in range(d)])


def test_contraction_identity_interaction():
    xi1 = np.array([0.6, 0.8j])
    xi2 = PLUS
    obs = np.kron(np.kron(np.eye(2), P0), np.eye(2))
    f = partial_meter_contraction(np.eye(8), obs, xi1, xi2)
    np.testing.assert_allclose(f, 0.36 * np.eye(2), atol=1e-15)
    np.testing.assert_allclose(partial_meter_contraction(np.eye(8), np.eye(8), xi1, xi2), np.eye(2), atol=1e-15)


def test_contraction_cnot():
    cnot = np.eye(4)[:, [0, 1, 3, 2]]
    obs = np.kron(np.kron(np.eye(2), P0), np.eye(1))
    f = partial_meter_contraction(cnot, obs, KET0, np.array([1.0]))
    np.testing.assert_array_equal(f, P0)


@pytest.mark.parametrize("seed", range(5))
def test_contraction_matches_oracle_and_is_hermitian(seed):
    r = np.random.default_rng(seed)
    d, m1, m2 = 2, 3, 2
    u = random_unitary(d * m1 * m2, r)
    h = r.normal(size=(12, 12)) + 1j * r.normal(size=(12, 12))
    h = h + h.conj().T
    xi1, xi2 = haar_state(m1, r), haar_state(m2, r)
    f = partial_meter_contraction(u, h, xi1, xi2)
    np.testing.assert_allclose(f, contraction_oracle(u, h, xi1, xi2), atol=1e-12)
    assert np.max(np.abs(f - f.conj().T)) <= 1e-12


def test_contraction_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        partial_meter_contraction(np.eye(6), np.eye(6), PLUS, PLUS)


def test_random_unitaries_are_unitary(rng):
    for n in (1, 2, 5, 16):
        assert unitary_deviation(random_unitary(n, rng)) <= 1e-10


def test_x_is_unitary():
    assert unitary_deviation(X) == 0
