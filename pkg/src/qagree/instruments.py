"""Kraus instruments: outcome statistics, state update and classification.

Outcome labels are 1-based throughout the public API (``x = 1..N``);
distributions are returned as float arrays where entry ``x - 1`` holds
the probability of outcome ``x``.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    CompletenessViolation,
    DimensionMismatch,
    InvariantViolation,
    OutcomeImpossible,
)
from .linalg import (
    TOL_UNITARY,
    adjoint,
    apply,
    as_operator,
    as_projector,
    as_state,
    as_unitary,
    is_projector,
    max_abs,
)

P_FLOOR = 1e-12
TOL_COMPLETENESS = 1e-10
# negative probabilities down to this are rounding noise
CLAMP_TOL = 1e-12
TOL_SUM = 1e-9


class MeasurementClass(str, enum.Enum):
    REPEATABLE_PROJECTIVE = "repeatable-projective"
    PROJECTIVE_POVM = "projective-povm"
    GENERAL = "general"


@dataclass(frozen=True, eq=False)
class KrausInstrument:
    """Ordered Kraus operators ``A_1..A_N`` resolving the identity.

    Build instances with :func:`validate_instrument`; the constructor does not
    check completeness.
    """

    kraus_ops: tuple
    deviation: float = 0.0

    @property
    def dim(self):
        return self.kraus_ops[0].shape[0]

    @property
    def num_outcomes(self):
        return len(self.kraus_ops)

    def povm(self):
        """POVM elements ``E_x = A_x^dag A_x``."""
        return [adjoint(a) @ a for a in self.kraus_ops]

    def kraus(self, x):
        return self.kraus_ops[_index(self, x)]


def _index(instr, x):
    if not 1 <= x <= instr.num_outcomes:
        raise ValueError(f"outcome label {x} outside 1..{instr.num_outcomes}")
    return x - 1


def completeness_deviation(ops):
    ops = list(ops)
    total = sum(adjoint(a) @ a for a in ops)
    return max_abs(total - np.eye(ops[0].shape[0]))


def validate_instrument(ops, tol=TOL_COMPLETENESS):
    """Check ``sum_x A_x^dag A_x = I`` and wrap the operators.

    Raises
    ------
    DimensionMismatch
        Empty list, or operators of differing sizes.
    CompletenessViolation
        Max-entry deviation of the completeness sum from identity exceeds
        ``tol``; the deviation is attached to the exception.
    """
    ops = [as_operator(a, f"kraus[{i + 1}]") for i, a in enumerate(ops)]
    if not ops:
        raise DimensionMismatch("an instrument needs at least one Kraus operator")
    d = ops[0].shape[0]
    if any(a.shape != (d, d) for a in ops):
        raise DimensionMismatch("Kraus operators must share one dimension")
    dev = completeness_deviation(ops)
    if dev > tol:
        raise CompletenessViolation(dev)
    for a in ops:
        a.setflags(write=False)
    return KrausInstrument(tuple(ops), dev)


def as_distribution(p, tol_sum=TOL_SUM):
    """Clamp rounding noise out of a probability vector.

    Entries in ``[-1e-12, 0)`` become 0 and entries slightly above 1 become 1.
    The vector is renormalized when its sum is within ``tol_sum`` of 1;
    anything larger raises ``InvariantViolation``.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < -CLAMP_TOL) or np.any(p > 1 + tol_sum):
        raise InvariantViolation("probability range", detail=f"entries {p}")
    p = np.clip(p, 0.0, 1.0)
    dev = abs(p.sum() - 1.0)
    if dev >= tol_sum:
        raise InvariantViolation("normalization", dev)
    return p / p.sum()


def _check_dim(instr, psi):
    if psi.shape[0] != instr.dim:
        raise DimensionMismatch(f"state of dim {psi.shape[0]} vs instrument dim {instr.dim}")


def outcome_probabilities(instr, psi):
    """``p_x = ||A_x psi||^2`` for every outcome."""
    psi = as_state(psi)
    _check_dim(instr, psi)
    return as_distribution([apply(a, psi)[1] for a in instr.kraus_ops])


def post_state(instr, psi, x):
    """Normalized state ``A_x psi / sqrt(p_x)`` after outcome ``x``."""
    psi = as_state(psi)
    _check_dim(instr, psi)
    w, p = apply(instr.kraus(x), psi)
    if p < P_FLOOR:
        raise OutcomeImpossible(x, p)
    return w / np.sqrt(p)


def repeat_conditional(instr, psi, x):
    """Distribution of a second application given the first gave ``x``.

    Entry ``y - 1`` is ``||A_y A_x psi||^2 / p_x``.
    """
    psi = as_state(psi)
    _check_dim(instr, psi)
    w, p = apply(instr.kraus(x), psi)
    if p < P_FLOOR:
        raise OutcomeImpossible(x, p)
    return as_distribution([apply(a, w)[1] / p for a in instr.kraus_ops])


def classify(instr, tol=TOL_UNITARY):
    """Classify an instrument as repeatable-projective, projective-povm or general."""
    povm = instr.povm()
    if not all(is_projector(e, tol) for e in povm):
        return MeasurementClass.GENERAL
    for i, ei in enumerate(povm):
        for ej in povm[i + 1:]:
            if max_abs(ei @ ej) > tol:
                return MeasurementClass.GENERAL
    if all(is_projector(a, tol) for a in instr.kraus_ops):
        return MeasurementClass.REPEATABLE_PROJECTIVE
    return MeasurementClass.PROJECTIVE_POVM


# the name used in the operation table
is_projective = classify


def rotated_projective(projectors, rotations, tol=TOL_UNITARY):
    """Instrument with ``A_x = U_x Pi_x``.

    The projectors must resolve the identity; the result then satisfies
    completeness whatever the unitaries are.
    """
    projectors = [as_projector(p, tol, f"projector[{i + 1}]") for i, p in enumerate(projectors)]
    rotations = [as_unitary(u, tol, f"rotation[{i + 1}]") for i, u in enumerate(rotations)]
    if len(projectors) != len(rotations):
        raise DimensionMismatch("need one rotation per projector")
    if not projectors:
        raise DimensionMismatch("need at least one projector")
    d = projectors[0].shape[0]
    if any(m.shape != (d, d) for m in projectors + rotations):
        raise DimensionMismatch("projectors and rotations must share one dimension")
    dev = max_abs(sum(projectors) - np.eye(d))
    if dev > tol:
        raise InvariantViolation("projectors resolve identity", dev)
    return validate_instrument([u @ p for u, p in zip(rotations, projectors)])
