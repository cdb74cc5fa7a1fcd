import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FLIP, KET0, KET1, P0, P1, PLUS, THIRDS, X, random_instruments
from qagree.errors import CompletenessViolation, DimensionMismatch, InvariantViolation, OutcomeImpossible
from qagree.instruments import (
    MeasurementClass,
    as_distribution,
    classify,
    outcome_probabilities,
    post_state,
    repeat_conditional,
    rotated_projective,
    validate_instrument,
)
from qagree.linalg import basis_state
from qagree.sampling import haar_state, random_orthonormal_basis, random_unitary, rng_for

COMPUTATIONAL = [P0, P1]
ROTATED = [P0, FLIP]


def probs_oracle(ops, psi):
    """p_x by explicit index sums, independent of the vectorized path."""
    out = []
    for a in ops:
        total = 0.0
        for i in range(a.shape[0]):
            amp = sum(a[i, j] * psi[j] for j in range(a.shape[1]))
            total += abs(amp) ** 2
        out.append(total)
    return np.array(out)


def test_validate_single_identity():
    instr = validate_instrument([np.eye(2)])
    assert instr.num_outcomes == 1 and instr.dim == 2


def test_validate_computational():
    assert validate_instrument(COMPUTATIONAL).deviation == 0


def test_validate_rejects_doubled_projector():
    with pytest.raises(CompletenessViolation) as info:
        validate_instrument([P0, P0])
    assert info.value.invariant == "completeness"
    assert info.value.deviation == pytest.approx(1.0)


def test_validate_dimension_checks():
    with pytest.raises(DimensionMismatch):
        validate_instrument([])
    with pytest.raises(DimensionMismatch):
        validate_instrument([np.eye(2), np.zeros((3, 3))])
    with pytest.raises(InvariantViolation):
        validate_instrument([np.zeros((2, 3))])


def test_outcome_probabilities_examples():
    instr = validate_instrument(COMPUTATIONAL)
    np.testing.assert_allclose(outcome_probabilities(instr, KET0), [1, 0])
    np.testing.assert_allclose(outcome_probabilities(instr, PLUS), [0.5, 0.5], atol=1e-15)
    rot = validate_instrument(ROTATED)
    expected = probs_oracle(ROTATED, THIRDS)
    np.testing.assert_allclose(expected, [1 / 3, 2 / 3], atol=1e-15)
    np.testing.assert_allclose(outcome_probabilities(rot, THIRDS), expected, atol=1e-15)


def test_outcome_probabilities_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        outcome_probabilities(validate_instrument(COMPUTATIONAL), basis_state(3, 0))


@pytest.mark.parametrize("case", range(20))
def test_outcome_probabilities_match_oracle(case):
    ops, r = next(random_instruments(1, 100 + case))
    instr = validate_instrument(ops)
    psi = haar_state(instr.dim, r)
    np.testing.assert_allclose(outcome_probabilities(instr, psi), probs_oracle(ops, psi), atol=1e-12)


def test_post_state_examples():
    instr = validate_instrument(COMPUTATIONAL)
    np.testing.assert_allclose(post_state(instr, PLUS, 1), KET0, atol=1e-15)
    with pytest.raises(OutcomeImpossible):
        post_state(instr, KET0, 2)
    rot = validate_instrument(ROTATED)
    np.testing.assert_array_equal(post_state(rot, KET1, 2), KET0)


def test_post_state_rejects_bad_label():
    with pytest.raises(ValueError):
        post_state(validate_instrument(COMPUTATIONAL), KET0, 0)


def test_repeat_conditional_rank_one_projectors(rng):
    for d in (2, 3, 4):
        basis = random_orthonormal_basis(d, rng)
        instr = validate_instrument([np.outer(v, v.conj()) for v in basis])
        psi = haar_state(d, rng)
        for x in range(1, d + 1):
            np.testing.assert_allclose(repeat_conditional(instr, psi, x), np.eye(d)[x - 1], atol=1e-12)


def test_repeat_conditional_rotated_disagrees():
    p = repeat_conditional(validate_instrument(ROTATED), KET1, 2)
    assert abs(p[0] - 1) <= 1e-12 and abs(p[1]) <= 1e-12


def test_repeat_conditional_single_outcome(rng):
    p = repeat_conditional(validate_instrument([np.eye(3)]), haar_state(3, rng), 1)
    np.testing.assert_allclose(p, [1.0])


@pytest.mark.parametrize("case", range(30))
def test_repeat_conditional_composition(case):
    ops, r = next(random_instruments(1, 200 + case))
    instr = validate_instrument(ops)
    psi = haar_state(instr.dim, r)
    for x in range(1, instr.num_outcomes + 1):
        direct = repeat_conditional(instr, psi, x)
        composed = outcome_probabilities(instr, post_state(instr, psi, x))
        assert np.max(np.abs(direct - composed)) <= 1e-12


def test_classify_examples():
    assert classify(validate_instrument(COMPUTATIONAL)) is MeasurementClass.REPEATABLE_PROJECTIVE
    assert classify(validate_instrument(ROTATED)) is MeasurementClass.PROJECTIVE_POVM
    weak = [np.diag([np.sqrt(0.7), np.sqrt(0.3)]), np.diag([np.sqrt(0.3), np.sqrt(0.7)])]
    e1 = weak[0].conj().T @ weak[0]
    assert np.max(np.abs(e1 @ e1 - e1)) > 0.1  # eigenvalue 0.7 is not idempotent
    assert classify(validate_instrument(weak)) is MeasurementClass.GENERAL


def test_classify_value_strings():
    assert MeasurementClass.PROJECTIVE_POVM.value == "projective-povm"


def test_rotated_projective_examples():
    same = rotated_projective(COMPUTATIONAL, [np.eye(2), np.eye(2)])
    np.testing.assert_array_equal(same.kraus_ops[1], P1)
    flipped = rotated_projective(COMPUTATIONAL, [np.eye(2), X])
    np.testing.assert_array_equal(flipped.kraus_ops[1], FLIP)


def test_rotated_projective_rejects_incomplete():
    with pytest.raises(InvariantViolation):
        rotated_projective([P0, P0], [np.eye(2), np.eye(2)])
    with pytest.raises(InvariantViolation):
        rotated_projective([P0, P1], [np.eye(2), 2 * np.eye(2)])


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_rotations_leave_povm_unchanged(d, seed):
    r = np.random.default_rng(seed)
    basis = random_orthonormal_basis(d, r)
    projectors = [np.outer(v, v.conj()) for v in basis]
    plain = rotated_projective(projectors, [np.eye(d)] * d)
    rotated = rotated_projective(projectors, [random_unitary(d, r) for _ in range(d)])
    assert classify(plain) is MeasurementClass.REPEATABLE_PROJECTIVE
    assert classify(rotated) is MeasurementClass.PROJECTIVE_POVM
    assert rotated.deviation <= 1e-12
    for e, f in zip(plain.povm(), rotated.povm()):
        assert np.max(np.abs(e - f)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_probabilities_sum_to_one(d, n, seed):
    ops, r = next(random_instruments(1, seed, dims=(d,), outcomes=(n,)))
    instr = validate_instrument(ops)
    psi = haar_state(d, r)
    p = outcome_probabilities(instr, psi)
    assert abs(p.sum() - 1) <= 1e-9
    for x in range(1, n + 1):
        if p[x - 1] >= 1e-12:
            assert abs(np.linalg.norm(post_state(instr, psi, x)) - 1) <= 1e-10


def test_as_distribution_clamps_and_rejects():
    np.testing.assert_array_equal(as_distribution([-1e-13, 1.0]), [0.0, 1.0])
    with pytest.raises(InvariantViolation):
        as_distribution([-1e-6, 1.0])
    with pytest.raises(InvariantViolation):
        as_distribution([0.5, 0.6])


def test_seeded_streams_are_reproducible():
    a = haar_state(4, rng_for(3, 7))
    b = haar_state(4, rng_for(3, 7))
    np.testing.assert_array_equal(a, b)
