"""Sequential two-agent measurements on one system.

Alice measures in an orthonormal basis ``chi_1..chi_N`` (rank-1 projective
Kraus operators), after which Bob applies his own Kraus instrument to the
system Alice left behind. Outcomes agree when their integer labels match.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvariantViolation, OutcomeImpossible
from .instruments import (
    P_FLOOR,
    KrausInstrument,
    as_distribution,
    outcome_probabilities,
    validate_instrument,
)
from .linalg import TOL_NORM, as_state, max_abs
from .sampling import rng_for

# trials sharing one RNG stream; fixed so counts do not depend on the worker count
CHUNK = 1024


@dataclass(frozen=True, eq=False)
class AgentScenario:
    alice_basis: tuple
    bob_instrument: KrausInstrument
    initial_state: np.ndarray

    @property
    def dim(self):
        return self.initial_state.shape[0]

    @property
    def num_outcomes(self):
        return len(self.alice_basis)


@dataclass(frozen=True)
class TrialRecord:
    alice_outcome: int
    bob_outcome: int

    @property
    def agreed(self):
        return self.alice_outcome == self.bob_outcome


@dataclass(frozen=True, eq=False)
class SimReport:
    num_trials: int
    agreement_count: int
    empirical_frequency: float
    predicted_probability: float
    three_sigma_band: tuple
    # contingency[x-1, y-1]: trials where Alice got x and Bob reported y
    contingency: np.ndarray

    def within_band(self):
        lo, hi = self.three_sigma_band
        return lo <= self.empirical_frequency <= hi


def make_agent_scenario(alice_basis, bob_kraus, initial_state, tol=TOL_NORM):
    """Validate Alice's basis, Bob's instrument and the initial state."""
    psi = as_state(initial_state, tol, "initial_state")
    basis = [np.asarray(v, dtype=complex) for v in alice_basis]
    d = psi.shape[0]
    if len(basis) != d or any(v.shape != (d,) for v in basis):
        raise DimensionMismatch(f"alice_basis must hold {d} vectors of dimension {d}")
    g = np.column_stack(basis)
    dev = max_abs(g.conj().T @ g - np.eye(d))
    if dev > tol:
        raise InvariantViolation("orthonormal", dev, "alice_basis")
    bob = bob_kraus if isinstance(bob_kraus, KrausInstrument) else validate_instrument(bob_kraus)
    if bob.dim != d:
        raise DimensionMismatch(f"Bob's instrument acts on dim {bob.dim}, system has dim {d}")
    for v in basis:
        v.setflags(write=False)
    return AgentScenario(tuple(basis), bob, psi)


def alice_distribution(scn):
    """``|<chi_x|psi>|^2`` for each of Alice's outcomes."""
    return as_distribution([abs(np.vdot(chi, scn.initial_state)) ** 2 for chi in scn.alice_basis])


def bob_report_distribution(scn, y):
    """Alice's distribution for Bob's report given she obtained ``y`` (1-based).

    Alice's post-measurement state is ``chi_y``; Bob's instrument acts on it.
    """
    if not 1 <= y <= scn.num_outcomes:
        raise ValueError(f"outcome label {y} outside 1..{scn.num_outcomes}")
    p = alice_distribution(scn)[y - 1]
    if p < P_FLOOR:
        raise OutcomeImpossible(y, p)
    return outcome_probabilities(scn.bob_instrument, scn.alice_basis[y - 1])


def agreement_probability(scn):
    """``sum_y p_A(y) * p_B(y | y)`` over labels both agents can report."""
    pa = alice_distribution(scn)
    shared = min(scn.num_outcomes, scn.bob_instrument.num_outcomes)
    total = 0.0
    for y in range(1, shared + 1):
        if pa[y - 1] < P_FLOOR:
            continue
        total += pa[y - 1] * bob_report_distribution(scn, y)[y - 1]
    return float(total)


def _sampling_tables(scn):
    pa = alice_distribution(scn)
    pa = np.where(pa < P_FLOOR, 0.0, pa)
    pa /= pa.sum()
    rows = []
    for y in range(1, scn.num_outcomes + 1):
        if pa[y - 1] > 0:
            rows.append(np.cumsum(bob_report_distribution(scn, y)))
        else:
            rows.append(np.full(scn.bob_instrument.num_outcomes, np.nan))
    return np.cumsum(pa), np.array(rows)


def _inverse_cdf(cdf, u):
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.shape[-1] - 1)


def _sample_chunk(tables, seed, chunk, count):
    """0-based (alice, bob) outcome arrays for the ``count`` trials of one chunk."""
    alice_cdf, bob_cdf = tables
    u = rng_for(seed, chunk).random((count, 2))
    alice = _inverse_cdf(alice_cdf, u[:, 0])
    bob = np.empty(count, dtype=np.intp)
    for y in np.unique(alice):
        sel = alice == y
        bob[sel] = _inverse_cdf(bob_cdf[y], u[sel, 1])
    return alice, bob


def _chunks(n):
    return [(c, min(CHUNK, n - c * CHUNK)) for c in range(-(-n // CHUNK))]


def sample_trials(scn, n, seed=0):
    """Individual trial outcomes, 1-based labels, in trial order."""
    tables = _sampling_tables(scn)
    out = []
    for c, count in _chunks(n):
        alice, bob = _sample_chunk(tables, seed, c, count)
        out.extend(TrialRecord(int(a) + 1, int(b) + 1) for a, b in zip(alice, bob))
    return out


def run_trials(scn, n, seed=0, workers=1):
    """Simulate ``n`` rounds of Alice-then-Bob and compare to the prediction.

    Trial ``k`` draws its two uniforms from the stream keyed on
    ``(seed, k // CHUNK)`` at offset ``k % CHUNK``, so the report is the same
    for any ``workers``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    tables = _sampling_tables(scn)
    shape = (scn.num_outcomes, scn.bob_instrument.num_outcomes)

    def count_chunk(job):
        alice, bob = _sample_chunk(tables, seed, *job)
        table = np.zeros(shape, dtype=np.int64)
        np.add.at(table, (alice, bob), 1)
        return table

    jobs = _chunks(n)
    if workers <= 1:
        counts = [count_chunk(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(count_chunk, jobs))
    contingency = np.sum(counts, axis=0)
    shared = min(shape)
    agreed = int(np.trace(contingency[:shared, :shared]))
    p = agreement_probability(scn)
    pc = min(max(p, 0.0), 1.0)
    sigma = np.sqrt(pc * (1 - pc) / n)
    return SimReport(
        num_trials=n,
        agreement_count=agreed,
        empirical_frequency=agreed / n,
        predicted_probability=p,
        three_sigma_band=(float(max(pc - 3 * sigma, 0.0)), float(min(pc + 3 * sigma, 1.0))),
        contingency=contingency,
    )
