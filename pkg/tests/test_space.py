import numpy as np
import pytest
from hypothesis import given, strategies as st

from jdpp.space import (
    PartitionedSpace,
    complement,
    complement_mask,
    from_mask,
    j_operator,
    projector,
    to_mask,
    window_split,
)

parts = st.lists(st.sampled_from([1, 2]), min_size=1, max_size=12)


@st.composite
def space_and_config(draw):
    part = draw(parts)
    n = len(part)
    gamma = draw(st.sets(st.integers(0, n - 1)))
    return PartitionedSpace(tuple(part)), tuple(sorted(gamma))


def test_split_layout():
    s = PartitionedSpace.split(2, 3)
    assert s.part == (1, 1, 2, 2, 2)
    assert (s.n, s.n1, s.n2) == (5, 2, 3)
    assert list(s.idx2) == [2, 3, 4]
    assert s.bits2 == 0b11100


@pytest.mark.parametrize(
    "kwargs",
    [
        {"part": ()},
        {"part": (1, 3)},
        {"part": (1, 2), "weights": (1.0,)},
        {"part": (1, 2), "weights": (1.0, 0.0)},
        {"part": (1, 2), "weights": (1.0, float("nan"))},
        {"part": (1, 2), "labels": ("a",)},
    ],
)
def test_rejects_bad_spaces(kwargs):
    with pytest.raises(ValueError):
        PartitionedSpace(**kwargs)


def test_single_part_spaces_are_allowed():
    assert PartitionedSpace((1, 1)).n2 == 0
    assert PartitionedSpace((2,)).n1 == 0


def test_complement_examples():
    s = PartitionedSpace((1, 2))
    assert complement(s, ()) == (1,)
    assert complement(s, (0, 1)) == (0,)
    assert complement(s, (0,)) == (0, 1)
    assert complement(PartitionedSpace((1, 1, 1)), (0, 2)) == (0, 2)
    assert complement(PartitionedSpace((2, 2)), ()) == (0, 1)


def test_complement_rejects_out_of_range():
    with pytest.raises((ValueError, IndexError)):
        complement(PartitionedSpace((1, 2)), (2,))


@given(space_and_config())
def test_complement_is_an_involution(sc):
    s, gamma = sc
    assert complement(s, complement(s, gamma)) == gamma


@given(space_and_config())
def test_complement_matches_set_formula(sc):
    s, gamma = sc
    g = set(gamma)
    x1 = {i for i in range(s.n) if s.part[i] == 1}
    x2 = set(range(s.n)) - x1
    assert set(complement(s, gamma)) == (g & x1) | (x2 - g)


@given(space_and_config())
def test_mask_roundtrip_and_complement_mask(sc):
    s, gamma = sc
    m = to_mask(gamma)
    assert from_mask(m, s.n) == gamma
    assert from_mask(complement_mask(s, m), s.n) == complement(s, gamma)


def test_projectors_and_j():
    s = PartitionedSpace((2, 1, 2))
    p1, p2 = projector(s, 1), projector(s, 2)
    np.testing.assert_array_equal(p1 + p2, np.eye(3))
    np.testing.assert_array_equal(p1 @ p2, np.zeros((3, 3)))
    np.testing.assert_array_equal(j_operator(s), p1 - p2)


def test_window_split():
    s = PartitionedSpace((1, 2, 1, 2))
    assert window_split(s, [3, 0, 1]) == ((0,), (1, 3))


def test_subspace_and_swap():
    s = PartitionedSpace((1, 2, 2), weights=(1.0, 2.0, 3.0), labels=("a", "b", "c"))
    sub = s.subspace([2, 0])
    assert sub.part == (1, 2) and sub.weights == (1.0, 3.0) and sub.labels == ("a", "c")
    assert s.subspace([]) is None
    assert s.swapped().part == (2, 1, 1)


def test_dict_roundtrip():
    s = PartitionedSpace((1, 2), weights=(0.5, 2.0))
    assert PartitionedSpace.from_dict(s.to_dict()) == s
    with pytest.raises(ValueError):
        PartitionedSpace.from_dict({"n": 3, "part": [1, 2]})
