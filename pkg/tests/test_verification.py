import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from entrapnet.core import Task, TaskKind
from entrapnet.verification import (
    AlignmentError,
    Appeal,
    Outcome,
    Tolerances,
    VerificationError,
    adjudicate,
    mean_result,
    pairwise_aligned,
    verify_fishing_result,
    witness_validate,
)

TASK = Task(7, TaskKind.FISHING, b"script-7", "officer-0", 0)
Y = np.array([1.0, 2.0, -0.5])


# -- pairwise_aligned ---------------------------------------------------------

def test_identical_vectors_align():
    assert pairwise_aligned([Y, Y, Y, Y], 0.0)


def test_alignment_is_scale_invariant():
    assert pairwise_aligned([Y, 3 * Y], 0.0)


def test_orthogonal_vectors_do_not_align():
    # pair distance sqrt(2) > 1
    assert not pairwise_aligned([[1.0, 0.0], [0.0, 1.0]], 1.0)
    assert pairwise_aligned([[1.0, 0.0], [0.0, 1.0]], math.sqrt(2) + 1e-9)


@pytest.mark.parametrize("bad", [
    [[1.0, 0.0]],
    [[1.0, 0.0], [0.0, 0.0]],
    [[1.0, 0.0], [1.0, 0.0, 0.0]],
])
def test_alignment_preconditions(bad):
    with pytest.raises(VerificationError):
        pairwise_aligned(bad, 0.1)


vec = st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3).map(np.array)


@given(vec, vec, st.floats(0, 2), st.floats(0.01, 100))
def test_alignment_symmetric_and_scale_invariant(a, b, delta, scale):
    assume(np.linalg.norm(a) > 1e-3 and np.linalg.norm(b) > 1e-3)
    dist = np.linalg.norm(a / np.linalg.norm(a) - b / np.linalg.norm(b))
    assume(abs(dist - delta) > 1e-9)
    assert pairwise_aligned([a, b], delta) == pairwise_aligned([b, a], delta)
    assert pairwise_aligned([a, b], delta) == pairwise_aligned([scale * a, b], delta)


# -- mean_result ----------------------------------------------------------------

def test_mean_single():
    np.testing.assert_array_equal(mean_result([[2.0, 4.0]]), [2.0, 4.0])


def test_mean_pair():
    np.testing.assert_array_equal(mean_result([[0.0, 0.0], [2.0, 2.0]]), [1.0, 1.0])


def test_mean_of_copies_is_idempotent():
    np.testing.assert_allclose(mean_result([Y] * 5), Y, rtol=0, atol=1e-15)


def test_mean_errors():
    with pytest.raises(VerificationError):
        mean_result([])
    with pytest.raises(VerificationError):
        mean_result([[1.0], [1.0, 2.0]])


# -- verify_fishing_result --------------------------------------------------------

def test_exact_result_passes_any_margin():
    assert verify_fishing_result(Y, Y, 0.0)
    assert verify_fishing_result(Y, Y, 0.3)


def test_boundary_is_inclusive():
    assert verify_fishing_result(1.05 * Y, Y, 0.05)


def test_doubled_result_fails():
    assert not verify_fishing_result(2 * Y, Y, 0.5)


def test_zero_margin_rejects_any_change():
    assert not verify_fishing_result(Y + np.array([1e-9, 0, 0]), Y, 0.0)


def test_verify_errors():
    with pytest.raises(VerificationError):
        verify_fishing_result([1.0, 2.0], [0.0, 0.0], 0.1)
    with pytest.raises(VerificationError):
        verify_fishing_result([1.0], [1.0, 2.0], 0.1)


@given(vec, vec, st.floats(0.01, 100), st.floats(0, 2))
def test_verify_scale_invariant(y_f, y_bar, scale, delta):
    assume(np.linalg.norm(y_bar) > 1e-3)
    ratio = np.linalg.norm(y_f - y_bar) / np.linalg.norm(y_bar)
    assume(abs(ratio - delta) > 1e-9)
    assert verify_fishing_result(y_f, y_bar, delta) == verify_fishing_result(scale * y_f, scale * y_bar, delta)


# -- witness_validate ---------------------------------------------------------------

def test_witnesses_produce_record():
    rec = witness_validate(TASK, [Y, Y, Y], Tolerances(), b"proof", b"key")
    np.testing.assert_allclose(rec.verified_result, Y)
    assert rec.script_digest == TASK.script_digest
    assert rec.is_intact()


def test_too_few_witnesses():
    with pytest.raises(VerificationError):
        witness_validate(TASK, [Y, Y], Tolerances(), b"proof", b"key")


def test_misaligned_witnesses():
    with pytest.raises(AlignmentError, match="not matched"):
        witness_validate(TASK, [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
                         Tolerances(delta_val=0.1), b"proof", b"key")


def test_tolerances_validated():
    with pytest.raises(ValueError):
        Tolerances(delta_val=-1.0)
    with pytest.raises(ValueError):
        Tolerances(delta_ver=float("inf"))


# -- adjudicate ----------------------------------------------------------------------

@pytest.fixture
def record():
    return witness_validate(TASK, [Y, Y, Y], Tolerances(), b"proof", b"key")


def appeal_for(record, y_f, **kw):
    return Appeal.against(record, y_f, officer="officer-0", provider="provider-3",
                          provider_deposit=100.0, officer_deposit=1.0, **kw)


def test_honest_provider_is_dismissed(record):
    j = adjudicate(appeal_for(record, record.verified_result), Tolerances(delta_ver=0.1))
    assert j.abstract_ok and not j.result_faulty
    assert j.outcome is Outcome.DISMISS and j.forfeit == 0


def test_faulty_provider_forfeits(record):
    j = adjudicate(appeal_for(record, 2 * record.verified_result), Tolerances(delta_ver=0.1))
    assert j.abstract_ok and j.result_faulty
    assert j.outcome is Outcome.REWARD_OFFICER
    assert j.forfeit == 100.0


def test_tampered_key_is_dismissed(record):
    fields = (record.script_digest, record.verified_result, record.network_proof, b"other-key")
    appeal = Appeal(2 * record.verified_result, fields, record.abstract, "o", "p", 100.0)
    j = adjudicate(appeal, Tolerances(delta_ver=0.1))
    assert not j.abstract_ok
    assert j.outcome is Outcome.DISMISS


@pytest.mark.parametrize("field_index", [0, 1, 2, 3])
def test_any_corrupted_field_never_rewards(record, field_index):
    fields = list(record.fields)
    if field_index == 1:
        fields[1] = np.array(fields[1]) * 1.5
    else:
        fields[field_index] = fields[field_index] + b"!"
    appeal = Appeal(10 * record.verified_result, tuple(fields), record.abstract, "o", "p", 100.0)
    assert adjudicate(appeal, Tolerances()).outcome is Outcome.DISMISS


def test_appeal_dimension_check(record):
    with pytest.raises(VerificationError):
        appeal_for(record, [1.0, 2.0])


def test_appeal_json_round_trip(record):
    a = appeal_for(record, 2 * record.verified_result)
    b = Appeal.from_json(a.to_json())
    assert adjudicate(b, Tolerances(delta_ver=0.1)) == adjudicate(a, Tolerances(delta_ver=0.1))


def test_judgement_invariant(record):
    for y_f in (record.verified_result, 2 * record.verified_result):
        j = adjudicate(appeal_for(record, y_f), Tolerances(delta_ver=0.1))
        assert (j.outcome is Outcome.REWARD_OFFICER) == (j.abstract_ok and j.result_faulty)
