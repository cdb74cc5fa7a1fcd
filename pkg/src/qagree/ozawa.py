"""System plus two meters: probability reproducibility and outcome agreement.

A scenario couples a ``d``-dimensional system to meters of dimensions
``m1`` and ``m2`` through a joint unitary. Joint states are stored with the
system index slowest, so ``Psi.reshape(d, m1, m2)[s, a, b]`` is the
amplitude of ``|s, a, b>``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvariantViolation, PreconditionViolated
from .instruments import as_distribution
from .linalg import (
    TOL_NORM,
    TOL_UNITARY,
    as_projector,
    as_state,
    as_operator,
    as_unitary,
    basis_state,
    complete_isometry_to_unitary,
    max_abs,
    partial_meter_contraction,
)
from .sampling import haar_state, rng_for

TOL_REPRODUCIBLE = 1e-10


@dataclass(frozen=True, eq=False)
class OzawaScenario:
    unitary: np.ndarray
    sys_projectors: tuple
    meter1_projectors: tuple
    meter2_projectors: tuple
    xi1: np.ndarray
    xi2: np.ndarray

    @property
    def dims(self):
        return (self.sys_projectors[0].shape[0], self.xi1.shape[0], self.xi2.shape[0])

    @property
    def num_outcomes(self):
        return len(self.sys_projectors)


@dataclass(frozen=True)
class ReproducibilityReport:
    holds: bool
    max_deviation: float
    # per_outcome_deviations[i][x-1]: max-entry |F^(i+1)_x - Pi_x|
    per_outcome_deviations: tuple


def _projector_family(ps, dim, name, tol):
    ps = tuple(as_projector(p, tol, f"{name}[{i + 1}]") for i, p in enumerate(ps))
    if not ps:
        raise DimensionMismatch(f"{name} is empty")
    if any(p.shape != (dim, dim) for p in ps):
        raise DimensionMismatch(f"{name} entries must be {dim}x{dim}")
    dev = max_abs(sum(ps) - np.eye(dim))
    if dev > tol:
        raise InvariantViolation("projectors resolve identity", dev, name)
    return ps


def make_scenario(
    unitary,
    sys_projectors,
    meter1_projectors,
    meter2_projectors,
    xi1,
    xi2,
    tol=TOL_UNITARY,
    require_unitary=True,
):
    """Validate the pieces of a scenario and assemble an :class:`OzawaScenario`.

    ``require_unitary=False`` accepts a non-unitary coupling so that it can be
    reported as a verification failure instead of an input error.
    """
    xi1 = as_state(xi1, TOL_NORM, "xi1")
    xi2 = as_state(xi2, TOL_NORM, "xi2")
    sys_p = list(sys_projectors)
    if not sys_p:
        raise DimensionMismatch("sys_projectors is empty")
    d = np.asarray(sys_p[0]).shape[0]
    m1, m2 = xi1.shape[0], xi2.shape[0]
    sys_p = _projector_family(sys_p, d, "sys_projectors", tol)
    p1 = _projector_family(meter1_projectors, m1, "meter1_projectors", tol)
    p2 = _projector_family(meter2_projectors, m2, "meter2_projectors", tol)
    if not len(sys_p) == len(p1) == len(p2):
        raise DimensionMismatch("all projector families need the same outcome count")
    u = as_unitary(unitary, tol) if require_unitary else as_operator(unitary, "unitary")
    if u.shape[0] != d * m1 * m2:
        raise DimensionMismatch(f"unitary is {u.shape[0]}-dimensional, expected {d}*{m1}*{m2}")
    return OzawaScenario(u, sys_p, p1, p2, xi1, xi2)


def _system_state(scn, psi):
    psi = as_state(psi)
    if psi.shape[0] != scn.dims[0]:
        raise DimensionMismatch(f"state of dim {psi.shape[0]} vs system dim {scn.dims[0]}")
    return psi


def direct_probabilities(scn, psi):
    """``pi_x = ||Pi_x psi||^2``."""
    psi = _system_state(scn, psi)
    return as_distribution([np.linalg.norm(p @ psi) ** 2 for p in scn.sys_projectors])


def joint_state(scn, psi):
    """``U (psi (x) xi1 (x) xi2)``."""
    psi = _system_state(scn, psi)
    return scn.unitary @ np.kron(np.kron(psi, scn.xi1), scn.xi2)


def _tensor(scn, psi):
    return joint_state(scn, psi).reshape(scn.dims)


def meter_probabilities(scn, psi):
    """Outcome distributions of the two meter measurements, each on its own."""
    t = _tensor(scn, psi)
    p1 = [np.linalg.norm(np.einsum("ab,sbc->sac", p, t)) ** 2 for p in scn.meter1_projectors]
    p2 = [np.linalg.norm(np.einsum("cd,sad->sac", p, t)) ** 2 for p in scn.meter2_projectors]
    return as_distribution(p1), as_distribution(p2)


def _joint_from_tensor(scn, t):
    n = scn.num_outcomes
    out = np.empty((n, n))
    for x, p1 in enumerate(scn.meter1_projectors):
        a = np.einsum("ab,sbc->sac", p1, t)
        for y, p2 in enumerate(scn.meter2_projectors):
            out[x, y] = np.linalg.norm(np.einsum("cd,sad->sac", p2, a)) ** 2
    return out


def joint_distribution(scn, psi):
    """Matrix ``p[x-1, y-1] = ||(I (x) P1_x (x) P2_y) Psi||^2``."""
    p = _joint_from_tensor(scn, _tensor(scn, psi))
    return as_distribution(p.ravel()).reshape(p.shape)


def off_diagonal_mass(joint):
    joint = np.asarray(joint)
    return float(joint[~np.eye(joint.shape[0], dtype=bool)].sum())


def effective_system_povm(scn, meter_index):
    """System operators ``F_x`` whose expectation in ``psi`` equals meter ``meter_index``'s ``p_x``."""
    d, m1, m2 = scn.dims
    if meter_index == 1:
        lifted = [np.kron(np.kron(np.eye(d), p), np.eye(m2)) for p in scn.meter1_projectors]
    elif meter_index == 2:
        lifted = [np.kron(np.eye(d * m1), p) for p in scn.meter2_projectors]
    else:
        raise ValueError("meter_index must be 1 or 2")
    return [partial_meter_contraction(scn.unitary, o, scn.xi1, scn.xi2) for o in lifted]


def check_reproducibility(scn, tol=TOL_REPRODUCIBLE):
    """Decide ``pi_x = p1_x = p2_x`` for all system states at once.

    Both sides are expectation values of Hermitian operators, so equality for
    every state is equality of the operators ``F_x`` and ``Pi_x``. No states are
    sampled.
    """
    per = []
    for i in (1, 2):
        fs = effective_system_povm(scn, i)
        per.append(tuple(max_abs(f - p) for f, p in zip(fs, scn.sys_projectors)))
    dev = max(max(row) for row in per)
    return ReproducibilityReport(dev <= tol, dev, tuple(per))


def _mass_for_index(scn, seed, index):
    psi = haar_state(scn.dims[0], rng_for(seed, index))
    return off_diagonal_mass(joint_distribution(scn, psi))


def sampled_off_diagonal_masses(scn, num_states, seed, workers=1):
    """Off-diagonal joint mass for ``num_states`` Haar-random system states.

    State ``k`` is drawn from a stream keyed on ``(seed, k)``, so the returned
    array does not depend on ``workers``.
    """
    idx = range(num_states)
    if workers <= 1:
        masses = [_mass_for_index(scn, seed, k) for k in idx]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            masses = list(pool.map(lambda k: _mass_for_index(scn, seed, k), idx))
    return np.array(masses)


def verify_intersubjectivity(scn, num_states=100, seed=0, tol=TOL_REPRODUCIBLE, workers=1):
    """Largest off-diagonal joint mass over sampled states of a reproducible scenario.

    Raises
    ------
    PreconditionViolated
        If the scenario fails :func:`check_reproducibility` at ``tol``; the
        report is attached as ``exc.report``.
    """
    report = check_reproducibility(scn, tol)
    if not report.holds:
        raise PreconditionViolated(
            f"scenario is not probability reproducible (deviation {report.max_deviation:.3g})",
            report,
        )
    masses = sampled_off_diagonal_masses(scn, num_states, seed, workers)
    return float(masses.max()) if masses.size else 0.0


def _rank_one(v):
    return np.outer(v, v.conj())


def _orthonormal_family(vectors, name, tol=TOL_NORM):
    vs = [np.asarray(v, dtype=complex) for v in vectors]
    if not vs or any(v.ndim != 1 or v.shape != vs[0].shape for v in vs):
        raise DimensionMismatch(f"{name} must be a nonempty list of equal-length vectors")
    g = np.column_stack(vs)
    dev = max_abs(g.conj().T @ g - np.eye(len(vs)))
    if dev > tol:
        raise InvariantViolation("orthonormal", dev, name)
    return vs


def build_reproducible_scenario(d, psi_out=None, phi1=None, phi2=None, xi1=None, xi2=None):
    """Scenario satisfying probability reproducibility with rank-1 projectors.

    The coupling sends ``|x> (x) xi1 (x) xi2`` to ``psi_out[x] (x) phi1[x] (x) phi2[x]``
    and is completed to a unitary elsewhere. The system projectors are the
    canonical ``|x><x|`` and meter ``i`` is read out in the ``phi_i`` basis.

    Parameters
    ----------
    d : int
        System dimension, which is also the outcome count.
    psi_out : list of array_like, optional
        Normalized post-interaction system states (need not be orthogonal).
        Defaults to the canonical basis.
    phi1, phi2 : list of array_like, optional
        Orthonormal bases of the meters; each must have ``d`` members of
        length ``d`` so that the rank-1 readout projectors resolve identity.
        Default to the canonical basis.
    xi1, xi2 : array_like, optional
        Initial meter states, default ``|1>`` (first basis vector).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    eye = [basis_state(d, k) for k in range(d)]
    psi_out = eye if psi_out is None else psi_out
    psi_out = [as_state(v, name=f"psi_out[{k + 1}]") for k, v in enumerate(psi_out)]
    phi1 = _orthonormal_family(eye if phi1 is None else phi1, "phi1")
    phi2 = _orthonormal_family(eye if phi2 is None else phi2, "phi2")
    if not len(psi_out) == len(phi1) == len(phi2) == d:
        raise DimensionMismatch(f"psi_out, phi1 and phi2 need {d} members each")
    if any(v.shape != (d,) for v in psi_out):
        raise DimensionMismatch(f"psi_out members must have dimension {d}")
    for name, fam in (("phi1", phi1), ("phi2", phi2)):
        if fam[0].shape[0] != d:
            # rank-1 readout of an m-dim meter with d outcomes resolves identity only if m == d
            raise DimensionMismatch(f"{name} vectors must have dimension {d}")
    xi1 = as_state(xi1 if xi1 is not None else basis_state(d, 0), name="xi1")
    xi2 = as_state(xi2 if xi2 is not None else basis_state(d, 0), name="xi2")
    m1, m2 = xi1.shape[0], xi2.shape[0]
    total = d * m1 * m2

    inputs = [np.kron(np.kron(e, xi1), xi2) for e in eye]
    outputs = [np.kron(np.kron(p, a), b) for p, a, b in zip(psi_out, phi1, phi2)]
    v_in = complete_isometry_to_unitary(inputs, total)
    # outputs are orthonormal because phi1 is; a failure here is a bug, not bad input
    v_out = complete_isometry_to_unitary(outputs, total)
    u = v_out @ v_in.conj().T
    return make_scenario(
        u,
        [_rank_one(e) for e in eye],
        [_rank_one(v) for v in phi1],
        [_rank_one(v) for v in phi2],
        xi1,
        xi2,
    )


def build_uncoupled_scenario(d, m, sys_projectors=None):
    """No interaction, both meters in the uniform superposition.

    Meter outcome ``x < N`` is the pointer ``|x>``; the last outcome collects
    the remaining pointer states, so ``N = 1`` reads out the identity. The
    system projectors default to the canonical basis (``N = d``).
    """
    if m < 2:
        raise ValueError("meter dimension must be >= 2")
    if sys_projectors is None:
        sys_projectors = [_rank_one(basis_state(d, k)) for k in range(d)]
    n = len(sys_projectors)
    if n > m:
        raise DimensionMismatch(f"{n} outcomes cannot be read from a {m}-dim meter")
    meter = [_rank_one(basis_state(m, k)) for k in range(n - 1)]
    meter.append(np.eye(m) - sum(meter, np.zeros((m, m))))
    xi = np.full(m, 1 / np.sqrt(m), dtype=complex)
    return make_scenario(np.eye(d * m * m), sys_projectors, meter, meter, xi, xi)
