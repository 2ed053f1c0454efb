import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetacorr import combinat as cb
from zetacorr.errors import TooLarge

BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140]


@pytest.mark.parametrize("m,n", [(0, 0), (1, 1), (2, 3), (3, 3), (4, 2)])
def test_subset_pair_count(m, n):
    # sum_k C(m,k) C(n,k) = C(m+n, m)
    assert len(cb.subset_pairs_idx(m, n)) == math.comb(m + n, m)


@pytest.mark.parametrize("k", range(9))
def test_bell_numbers(k):
    assert len(cb.set_partitions_idx(k)) == BELL[k]


def test_set_partition_guard():
    with pytest.raises(TooLarge):
        cb.set_partitions_idx(cb.MAX_PARTITION_SIZE + 1)


@pytest.mark.parametrize("n", range(5))
def test_tripartition_count(n):
    assert len(cb.enumerate_tripartitions(n)) == 3 ** n


def test_tripartition_guard():
    with pytest.raises(TooLarge):
        cb.enumerate_tripartitions(7)
    with pytest.raises(ValueError):
        cb.enumerate_tripartitions(-1)


def test_matching_count():
    # partial matchings between sets of size a and b: sum_k C(a,k) b!/(b-k)!
    for a, b in [(0, 3), (2, 2), (3, 2), (3, 4)]:
        expect = sum(math.comb(a, k) * math.perm(b, k) for k in range(min(a, b) + 1))
        assert len(cb.matchings_idx(a, b)) == expect


def test_shiftset_labels_unique():
    with pytest.raises(ValueError):
        cb.ShiftSet([cb.Shift(0, 1j, cb.ALPHA), cb.Shift(0, 2j, cb.BETA)])


def test_admissible_partitions_blocks():
    A = cb.ShiftSet.from_values([0.1, 0.2], cb.ALPHA)
    B = cb.ShiftSet.from_values([0.3], cb.BETA, start=2)
    parts = cb.enumerate_admissible_partitions(A, B)
    # no pair, or one of two alpha-beta pairs
    assert len(parts) == 3
    for p in parts:
        for block in p:
            assert len(block) in (1, 2)
            if len(block) == 2:
                assert {block[0].side, block[1].side} == {cb.ALPHA, cb.BETA}


@given(st.integers(0, 4), st.integers(0, 4))
@settings(max_examples=50, deadline=None)
def test_subset_pairs_cover_and_complement(m, n):
    A = cb.ShiftSet.from_values([complex(i) for i in range(m)], cb.ALPHA)
    B = cb.ShiftSet.from_values([complex(j) for j in range(n)], cb.BETA, start=m)
    seen = set()
    for sa in cb.enumerate_subset_pairs(A, B):
        assert len(sa.S) == len(sa.T)
        assert sorted(sa.S.labels + sa.Sbar.labels) == list(A.labels)
        assert sorted(sa.T.labels + sa.Tbar.labels) == list(B.labels)
        seen.add((sa.S.labels, sa.T.labels))
    assert len(seen) == math.comb(m + n, m)


@given(st.integers(0, 7))
@settings(max_examples=20, deadline=None)
def test_set_partitions_are_partitions_and_distinct(k):
    parts = cb.enumerate_set_partitions(list(range(k)))
    keys = set()
    for p in parts:
        flat = sorted(x for block in p for x in block)
        assert flat == list(range(k))
        keys.add(frozenset(frozenset(b) for b in p))
    assert len(keys) == len(parts)


@given(st.integers(0, 5))
@settings(max_examples=10, deadline=None)
def test_tripartitions_partition_the_index_set(n):
    for tp in cb.enumerate_tripartitions(n):
        assert sorted(tp.K + tp.L + tp.M) == list(range(1, n + 1))


def test_enumeration_is_deterministic():
    assert cb.set_partitions_idx(5) == cb.set_partitions_idx.__wrapped__(5)
    assert cb.subset_pairs_idx(3, 2) == cb.subset_pairs_idx.__wrapped__(3, 2)


@pytest.mark.parametrize("m,n,count", [(1, 1, 2), (1, 2, 3), (2, 2, 6)])
def test_subset_assignment_examples(m, n, count):
    A = cb.ShiftSet.from_values([0.1 * (i + 1) for i in range(m)], cb.ALPHA)
    B = cb.ShiftSet.from_values([0.2 * (j + 1) for j in range(n)], cb.BETA, start=m)
    pairs = cb.enumerate_subset_pairs(A, B)
    assert len(pairs) == count
    assert pairs[0].S == () and pairs[0].T == ()


@pytest.mark.parametrize("a,b,count", [(1, 1, 2), (1, 2, 3), (2, 2, 7)])
def test_admissible_partition_examples(a, b, count):
    A = cb.ShiftSet.from_values([0.1 * (i + 1) for i in range(a)], cb.ALPHA)
    B = cb.ShiftSet.from_values([0.2 * (j + 1) for j in range(b)], cb.BETA, start=a)
    assert len(cb.enumerate_admissible_partitions(A, B)) == count
