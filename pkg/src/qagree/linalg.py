"""Dense complex linear algebra used throughout the package.

States are 1-D complex arrays, operators are square 2-D complex arrays.
Composite indices are big-endian: for a system of dimension ``d`` and meters
of dimensions ``m1`` and ``m2`` the basis vector ``|s, a, b>`` sits at index
``s*m1*m2 + a*m2 + b``, which is the ordering produced by ``np.kron``.
"""

import numpy as np

from .errors import DimensionMismatch, InvariantViolation, KindMismatch

TOL_NORM = 1e-10
TOL_UNITARY = 1e-10
TOL_COMPLETE = 1e-10
# residual norm below which a canonical basis vector is treated as already spanned
COMPLETION_SKIP = 1e-8


def max_abs(a):
    """Max-entry norm, 0.0 for empty input."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def as_state(v, tol=TOL_NORM, name="state"):
    """Return ``v`` as a normalized complex vector, raising if it is not one."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatch(f"{name} must be a nonempty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvariantViolation("finite", detail=name)
    dev = abs(np.linalg.norm(v) - 1.0)
    if dev > tol:
        raise InvariantViolation("normalized", dev, name)
    return v


def as_operator(m, name="operator"):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InvariantViolation("square", detail=f"{name} has shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvariantViolation("finite", detail=name)
    return m


def unitary_deviation(u):
    u = np.asarray(u)
    return max_abs(u.conj().T @ u - np.eye(u.shape[0]))


def as_unitary(u, tol=TOL_UNITARY, name="unitary"):
    u = as_operator(u, name)
    dev = unitary_deviation(u)
    if dev > tol:
        raise InvariantViolation("unitary", dev, name)
    return u


def projector_deviation(p):
    """Largest of the Hermiticity and idempotency defects of ``p``."""
    p = np.asarray(p)
    return max(max_abs(p - p.conj().T), max_abs(p @ p - p))


def is_projector(p, tol=TOL_UNITARY):
    return projector_deviation(p) <= tol


def as_projector(p, tol=TOL_UNITARY, name="projector"):
    p = as_operator(p, name)
    dev = projector_deviation(p)
    if dev > tol:
        raise InvariantViolation("projector", dev, name)
    return p


def basis_state(dim, index):
    """Canonical basis vector ``|index>`` (0-based) of dimension ``dim``."""
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def tensor_product(a, b):
    """Kronecker product of two states or two operators.

    Entry ``i*dim(b) + j`` of the result pairs entry ``i`` of ``a`` with entry
    ``j`` of ``b``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != b.ndim or a.ndim not in (1, 2):
        raise KindMismatch(
            f"tensor_product needs two states or two operators, got ndim {a.ndim} and {b.ndim}"
        )
    if a.size == 0 or b.size == 0:
        raise DimensionMismatch("tensor_product operands must have dim >= 1")
    return np.kron(a, b)


def adjoint(m):
    return np.asarray(m).conj().T


def apply(m, v):
    """Apply operator ``m`` to vector ``v``.

    Returns
    -------
    w : ndarray
        The unnormalized vector ``m @ v``.
    norm2 : float
        Its squared Euclidean norm.
    """
    m = np.asarray(m, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if m.ndim != 2 or v.ndim != 1 or m.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"cannot apply operator of shape {m.shape} to vector of shape {v.shape}")
    w = m @ v
    return w, float(np.vdot(w, w).real)


def _fix_phase(v):
    nz = np.flatnonzero(np.abs(v) > COMPLETION_SKIP)
    if nz.size:
        v = v * (abs(v[nz[0]]) / v[nz[0]])
    return v


def complete_isometry_to_unitary(columns, total_dim, indices=None, tol=TOL_COMPLETE):
    """Extend a set of orthonormal columns to a full unitary matrix.

    Parameters
    ----------
    columns : sequence of array_like
        Orthonormal vectors of length ``total_dim``.
    total_dim : int
        Size of the returned square matrix.
    indices : sequence of int, optional
        Column positions for ``columns``; defaults to ``0..len(columns)-1``.
    tol : float
        Allowed deviation of the Gram matrix of ``columns`` from identity.

    Returns
    -------
    ndarray
        Unitary whose ``indices`` columns are the supplied vectors. The free
        columns come from modified Gram-Schmidt over canonical basis vectors
        in index order, each with its first nonzero entry made real-positive.
        They fill the free positions in increasing order.
    """
    cols = [np.asarray(c, dtype=complex) for c in columns]
    if indices is None:
        indices = list(range(len(cols)))
    indices = [int(i) for i in indices]
    if len(indices) != len(cols):
        raise DimensionMismatch("need one column index per supplied column")
    if len(cols) > total_dim:
        raise DimensionMismatch(f"{len(cols)} columns cannot fit in dimension {total_dim}")
    if len(set(indices)) != len(indices) or any(not 0 <= i < total_dim for i in indices):
        raise DimensionMismatch(f"column indices {indices} invalid for dimension {total_dim}")
    for c in cols:
        if c.shape != (total_dim,):
            raise DimensionMismatch(f"column of shape {c.shape}, expected ({total_dim},)")

    u = np.zeros((total_dim, total_dim), dtype=complex)
    if cols:
        given = np.column_stack(cols)
        dev = max_abs(given.conj().T @ given - np.eye(len(cols)))
        if dev > tol:
            raise InvariantViolation("orthonormal columns", dev)
        u[:, indices] = given

    basis = list(cols)
    new = []
    needed = total_dim - len(cols)
    for k in range(total_dim):
        if len(new) == needed:
            break
        w = basis_state(total_dim, k)
        # two sweeps of MGS keep the result orthogonal to ~machine precision
        for _ in range(2):
            for q in basis:
                w = w - np.vdot(q, w) * q
        nrm = np.linalg.norm(w)
        if nrm < COMPLETION_SKIP:
            continue
        w = _fix_phase(w / nrm)
        basis.append(w)
        new.append(w)

    free = [i for i in range(total_dim) if i not in set(indices)]
    for i, w in zip(free, new):
        u[:, i] = w
    return u


def partial_meter_contraction(u, observable, xi1, xi2):
    """System operator ``<xi1, xi2| U^dag O U |xi1, xi2>``.

    ``u`` and ``observable`` act on ``d*m1*m2`` where ``m1 = len(xi1)`` and
    ``m2 = len(xi2)``. Entry ``(i, j)`` of the result is
    ``<i,xi1,xi2| U^dag O U |j,xi1,xi2>``.
    """
    u = np.asarray(u, dtype=complex)
    observable = np.asarray(observable, dtype=complex)
    xi1 = np.asarray(xi1, dtype=complex)
    xi2 = np.asarray(xi2, dtype=complex)
    n = u.shape[0]
    m = xi1.size * xi2.size
    if u.shape != (n, n) or observable.shape != (n, n) or m == 0 or n % m:
        raise DimensionMismatch(
            f"operators of shape {u.shape}, {observable.shape} do not factor over meters {xi1.size}x{xi2.size}"
        )
    d = n // m
    meters = np.kron(xi1, xi2)
    # columns of v are U|j, xi1, xi2>
    v = u @ np.kron(np.eye(d), meters.reshape(-1, 1))
    return v.conj().T @ observable @ v
