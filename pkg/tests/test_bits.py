import pytest
from hypothesis import given, strategies as st

from demibits.bits import all_strings, bit, check, complement, from_int, sub, to_int

bitstrings = st.text(alphabet="01", max_size=12)


def test_one_based_indexing():
    assert bit("100", 1) == 1
    assert bit("100", 2) == 0
    assert bit("001", -1) == 1


def test_index_zero_and_out_of_range_rejected():
    with pytest.raises(IndexError):
        bit("01", 0)
    with pytest.raises(IndexError):
        bit("01", 3)


def test_slice_is_inclusive_and_empty_when_reversed():
    assert sub("10110", 2, 4) == "011"
    assert sub("10110", 4, 3) == ""


def test_check_rejects_other_characters():
    with pytest.raises(ValueError):
        check("012")


def test_enumeration_is_lexicographic():
    assert list(all_strings(2)) == ["00", "01", "10", "11"]
    assert list(all_strings(0)) == [""]


@given(bitstrings)
def test_int_roundtrip(x):
    assert from_int(to_int(x), len(x)) == x


@given(bitstrings)
def test_complement_is_involution(x):
    assert complement(complement(x)) == x
    assert all(a != b for a, b in zip(x, complement(x)))


@given(st.integers(1, 10), st.data())
def test_order_matches_numeric_order(n, data):
    a = data.draw(st.integers(0, (1 << n) - 1))
    b = data.draw(st.integers(0, (1 << n) - 1))
    assert (from_int(a, n) < from_int(b, n)) == (a < b)
