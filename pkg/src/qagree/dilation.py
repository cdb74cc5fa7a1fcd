"""Meter (unitary dilation) model of a Kraus instrument.

The meter has one pointer state per outcome and starts in its first basis
state. Composite index of ``|s> (x) |x>`` is ``s*N + (x-1)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvariantViolation, OutcomeImpossible
from .instruments import P_FLOOR, KrausInstrument, as_distribution, validate_instrument
from .linalg import (
    TOL_UNITARY,
    as_state,
    basis_state,
    complete_isometry_to_unitary,
    max_abs,
    unitary_deviation,
)

TOL_FIXED_COLUMNS = 1e-10


@dataclass(frozen=True, eq=False)
class DilationModel:
    instrument: KrausInstrument
    unitary: np.ndarray

    @property
    def system_dim(self):
        return self.instrument.dim

    @property
    def meter_dim(self):
        return self.instrument.num_outcomes

    @property
    def meter_init(self):
        return basis_state(self.meter_dim, 0)

    def fixed_columns(self):
        """Indices of the columns ``|s> (x) |1>`` pinned by the instrument."""
        return [s * self.meter_dim for s in range(self.system_dim)]


def dilation_columns(instr):
    """The ``d`` vectors ``sum_x (A_x|s>) (x) |x>``, one per system basis state."""
    n = instr.num_outcomes
    cols = []
    for s in range(instr.dim):
        col = np.zeros((instr.dim, n), dtype=complex)
        for x, a in enumerate(instr.kraus_ops):
            col[:, x] = a[:, s]
        cols.append(col.reshape(-1))
    return cols


def build_dilation(instr):
    """Unitary ``U`` on system (x) meter with ``U(psi (x) |1>) = sum_x A_x psi (x) |x>``."""
    if not isinstance(instr, KrausInstrument):
        instr = validate_instrument(instr)
    n = instr.num_outcomes
    cols = dilation_columns(instr)
    u = complete_isometry_to_unitary(
        cols, instr.dim * n, indices=[s * n for s in range(instr.dim)]
    )
    return DilationModel(instr, u)


def check_dilation(model, tol=TOL_FIXED_COLUMNS):
    """Verify unitarity and the pinned columns of a (possibly deserialized) model."""
    dev = unitary_deviation(model.unitary)
    if dev > TOL_UNITARY:
        raise InvariantViolation("unitary", dev)
    want = np.column_stack(dilation_columns(model.instrument))
    dev = max_abs(model.unitary[:, model.fixed_columns()] - want)
    if dev > tol:
        raise InvariantViolation("dilation columns", dev)
    return model


def _branches(model, psi):
    psi = as_state(psi)
    if psi.shape[0] != model.system_dim:
        raise DimensionMismatch(f"state of dim {psi.shape[0]} vs system dim {model.system_dim}")
    joint = model.unitary @ np.kron(psi, model.meter_init)
    # column x is the (unnormalized) system factor attached to pointer |x>
    return joint.reshape(model.system_dim, model.meter_dim)


def dilated_probabilities(model, psi):
    """Pointer statistics ``||(I (x) |x><x|) U (psi (x) |1>)||^2``."""
    branches = _branches(model, psi)
    return as_distribution(np.sum(np.abs(branches) ** 2, axis=0))


def dilated_post_state(model, psi, x):
    """System factor after the pointer reads ``x`` (1-based), renormalized."""
    branches = _branches(model, psi)
    if not 1 <= x <= model.meter_dim:
        raise ValueError(f"outcome label {x} outside 1..{model.meter_dim}")
    w = branches[:, x - 1]
    p = float(np.vdot(w, w).real)
    if p < P_FLOOR:
        raise OutcomeImpossible(x, p)
    return w / np.sqrt(p)
