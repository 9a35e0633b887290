import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dosquant.constants import derive_strategy3, derive_strategy4
from dosquant.errors import (InvalidLevelError, ProtocolError, SaturationError,
                             UnreachableStateError)
from dosquant.quantizer import (StepInfo, ack_aware_factor, box_offset, case_label,
                                classify_case, decode, encode, encode_offset,
                                rebuild_blackout, s3_range, tt_factor, tt_scenario)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(
           st.lists(st.floats(-1, 1), min_size=n, max_size=n),
           st.lists(st.floats(-10, 10), min_size=n, max_size=n))),
       st.floats(1e-6, 1e3), st.sampled_from([3, 5, 7, 9, 101, 1001]))
def test_round_trip_error_within_cell(data, E, N):
    u, c = data
    center = np.array(c)
    x = center + np.array(u) * E
    # with |center| >> E the sum can round to just outside the box; such x is not in range
    assume(np.max(np.abs(x - center)) <= E)
    q = encode(x, center, E, N)
    assert 1 <= q <= N ** len(u)
    assert np.max(np.abs(decode(q, center, E, N) - x)) <= E / N * (1 + 1e-9)


def test_box_numbering_is_mixed_radix():
    assert encode_offset([-1.0, -1.0], 1.0, 3) == 1
    assert encode_offset([1.0, 1.0], 1.0, 3) == 9
    assert encode_offset([-1.0, 1.0], 1.0, 3) == 3
    assert encode_offset([0.0, 0.0], 1.0, 3) == 5
    assert np.allclose(box_offset(5, 1.0, 3, 2), [0.0, 0.0])
    assert np.allclose(box_offset(1, 3.0, 3, 1), [-2.0])


def test_errors():
    with pytest.raises(SaturationError) as info:
        encode_offset([1.5], 1.0, 3)
    assert info.value.excess == pytest.approx(0.5)
    with pytest.raises(InvalidLevelError):
        encode_offset([0.0], 1.0, 4)
    with pytest.raises(ProtocolError):
        box_offset(10, 1.0, 3, 2)


def test_case_table():
    assert classify_case(1, 1, 1, 0) == 1
    assert classify_case(0, 1, 0, 1) == 2
    assert [classify_case(1, 0, 1, 1), classify_case(1, 0, 1, 0), classify_case(1, 0, 0, 0),
            classify_case(1, 0, 0, 1), classify_case(0, 0, 0, 0),
            classify_case(0, 0, 0, 1)] == [3, 4, 5, 6, 7, 8]
    for bad in ((0, 0, 1, 0), (0, 0, 1, 1)):
        with pytest.raises(UnreachableStateError):
            classify_case(*bad)


def test_case_labels():
    assert case_label(1, True, True) == "1-b"
    assert case_label(1, False, True) == "1-a"
    assert case_label(1, True, False) == "1-a"
    assert case_label(2, True, True) == "2-a"
    assert case_label(2, False, True) == "2-b"
    assert case_label(5, True, True) == "5"


def test_rebuild_blackout_matches_hand_sequence():
    acks = {3: True, 4: False, 5: False, 6: False}
    steps = rebuild_blackout(4, 6, 0.43, 1, 0, acks, 0.1)
    assert [s.case for s in steps] == [5, 7, 8]
    assert steps[0].switch_time == 0.43 and steps[1].switch_time is None
    assert all(s.async_start == 5 and s.p == 1 and s.q == 0 for s in steps)
    assert steps[0] == StepInfo(4, 5, "5", 1, 0, False, False, 0.43, 5)


def test_passive_laws_monotone_in_range(models):
    c = derive_strategy3(models["B"], 31)
    f = models["B"].fits
    for label in ("1-a", "1-b", "2-a", "2-b", "3", "4", "5", "6", "7", "8"):
        a = s3_range(c, f, label, 1, 0, 1.0)
        b = s3_range(c, f, label, 1, 0, 2.0)
        assert 0 < a < b


def test_tt_schedule_and_dominance(models):
    c = derive_strategy4(models["B"], 3, 10, 4, 2.0)
    assert [tt_scenario(k, 10, 4) for k in (0, 1, 9, 10, 11, 13, 14)] == [1, 2, 2, 3, 4, 4, 1]
    # each TT factor is at least the ACK-aware factor of the matching label
    assert tt_factor(c, 10, False) >= ack_aware_factor(c, "2-a", False)
    assert tt_factor(c, 12, True) >= ack_aware_factor(c, "2-b", True)
