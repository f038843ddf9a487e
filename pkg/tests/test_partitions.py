from collections import Counter
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from snmoments.partitions import (Partition, StandardTableau, branch_restrict,
                                  contents, count_sectors, dim_irrep,
                                  multiplicity, partitions, standard_tableaux)


def brute_standard_tableaux(shape):
    """Independent oracle: fill boxes one value at a time."""
    rows = len(shape.parts)
    boxes = [(i, j) for i, p in enumerate(shape.parts) for j in range(p)]

    def extend(filling):
        if len(filling) == len(boxes):
            yield dict(filling)
            return
        v = len(filling) + 1
        for (i, j) in boxes:
            if (i, j) in filling:
                continue
            if j > 0 and (i, j - 1) not in filling:
                continue
            if i > 0 and (i - 1, j) not in filling:
                continue
            filling[(i, j)] = v
            yield from extend(filling)
            del filling[(i, j)]

    return list(extend({}))


def brute_semistandard_count(shape, d):
    """Independent oracle: enumerate weakly-increasing-row fillings."""
    rows = [list(range(p)) for p in shape.parts]
    cells = [(i, j) for i, p in enumerate(shape.parts) for j in range(p)]

    def extend(values):
        if len(values) == len(cells):
            yield 1
            return
        i, j = cells[len(values)]
        lo = 1
        if j > 0:
            lo = max(lo, values[(i, j - 1)])
        if i > 0:
            lo = max(lo, values[(i - 1, j)] + 1)
        for v in range(lo, d + 1):
            values[(i, j)] = v
            yield from extend(values)
            del values[(i, j)]

    return sum(extend({}))


partition_inputs = st.integers(1, 7).flatmap(
    lambda n: st.lists(st.integers(1, n), min_size=1, max_size=n)
    .map(lambda parts: tuple(sorted(parts, reverse=True)))
    .filter(lambda parts: sum(parts) <= 7))


class TestPartition:
    def test_rejects_increasing_parts(self):
        with pytest.raises(ValueError):
            Partition((1, 2))

    def test_rejects_zero_part(self):
        with pytest.raises(ValueError):
            Partition((2, 0))

    def test_of_drops_zero_padding(self):
        assert Partition.of((4, 0, 0)) == Partition((4,))

    def test_conjugate(self):
        assert Partition((3, 1)).conjugate() == Partition((2, 1, 1))
        assert Partition((3, 2, 1)).conjugate() == Partition((3, 2, 1))


class TestEnumeration:
    def test_reverse_lex_examples(self):
        assert [p.parts for p in partitions(4, 2)] == [(4,), (3, 1), (2, 2)]
        assert [p.parts for p in partitions(3, 3)] == [(3,), (2, 1), (1, 1, 1)]

    def test_qubit_sector_count(self):
        assert len(partitions(6, 2)) == 4 == 6 // 2 + 1

    @pytest.mark.parametrize("n,d,expect", [(6, 2, 4), (2, 1, 1), (3, 3, 3)])
    def test_count_sectors(self, n, d, expect):
        assert count_sectors(n, d) == expect

    def test_count_sectors_qubit_formula(self):
        for n in range(1, 31):
            assert count_sectors(n, 2) == n // 2 + 1

    def test_row_bound_respected(self):
        for p in partitions(6, 2):
            assert p.rows <= 2


class TestDimension:
    @pytest.mark.parametrize("shape,expect", [
        ((5,), 1), ((2, 1), 2), ((3, 2, 1), 16), ((2, 2), 2), ((4, 3), 14),
    ])
    def test_known_dims(self, shape, expect):
        assert dim_irrep(Partition(shape)) == expect

    def test_matches_tableau_enumeration(self):
        for n in range(1, 8):
            for p in partitions(n, n):
                assert dim_irrep(p) == len(standard_tableaux(p)) \
                    == len(brute_standard_tableaux(p))

    def test_large_values_exact(self):
        # arbitrary-precision integers: no overflow however large
        big = Partition((20, 18, 15, 11, 6))
        assert dim_irrep(big) % 1 == 0
        assert dim_irrep(big) > 2**63


class TestStandardTableaux:
    def test_two_one_order(self):
        ts = standard_tableaux(Partition((2, 1)))
        assert [t.rows for t in ts] == [((1, 2), (3,)), ((1, 3), (2,))]

    def test_single_column(self):
        ts = standard_tableaux(Partition((1, 1, 1)))
        assert len(ts) == 1
        assert ts[0].rows == ((1,), (2,), (3,))

    def test_two_two_count(self):
        assert len(standard_tableaux(Partition((2, 2)))) == 2

    def test_last_letter_order_keys(self):
        # row of n, then of n-1, ... must be non-increasing lexicographically
        for p in partitions(6, 6):
            ts = standard_tableaux(p)
            keys = [tuple(-t.position(v)[0] for v in range(p.n, 0, -1)) for t in ts]
            assert keys == sorted(keys)

    def test_validation(self):
        with pytest.raises(ValueError):
            StandardTableau(((1, 3), (2, 2)))
        with pytest.raises(ValueError):
            StandardTableau(((2, 1), (3,)))


class TestContents:
    def test_examples(self):
        t1, t2 = standard_tableaux(Partition((2, 1)))
        assert contents(t1) == (0, 1, -1)
        assert contents(t2) == (0, -1, 1)

    def test_single_row(self):
        (t,) = standard_tableaux(Partition((5,)))
        assert contents(t) == (0, 1, 2, 3, 4)

    def test_multiset_is_shape_determined(self):
        for p in partitions(6, 6):
            expect = sorted(j - i for i, row in enumerate(p.parts) for j in range(row))
            for t in standard_tableaux(p):
                assert sorted(contents(t)) == expect


class TestMultiplicity:
    def test_tall_column_vanishes(self):
        assert multiplicity(Partition((1, 1, 1)), 2) == 0

    def test_two_one_qubits(self):
        assert multiplicity(Partition((2, 1)), 2) == 2

    def test_matches_enumeration(self):
        for n in range(1, 7):
            for d in (2, 3):
                for p in partitions(n, n):
                    assert multiplicity(p, d) == brute_semistandard_count(p, d)

    @pytest.mark.parametrize("n,d", [(n, d) for n in range(1, 9) for d in (2, 3)])
    def test_schur_weyl_dimension_identity(self, n, d):
        if d == 3 and n > 5:
            pytest.skip("covered by acceptance at stated sizes")
        total = sum(multiplicity(p, d) * dim_irrep(p) for p in partitions(n, d))
        assert total == d**n


class TestBranching:
    def test_examples(self):
        got = branch_restrict(Partition((3, 1)), 3)
        assert got == {Partition((3,)): 1, Partition((2, 1)): 1}
        assert branch_restrict(Partition((2, 2)), 3) == {Partition((2, 1)): 1}
        lam = Partition((4, 2))
        assert branch_restrict(lam, lam.n) == {lam: 1}

    def test_m_must_be_positive(self):
        with pytest.raises(ValueError):
            branch_restrict(Partition((2, 1)), 0)

    def test_dimension_sum(self):
        for n in range(2, 8):
            for p in partitions(n, n):
                for m in range(1, n + 1):
                    total = sum(mult * dim_irrep(q)
                                for q, mult in branch_restrict(p, m).items())
                    assert total == dim_irrep(p)


@given(partition_inputs)
@settings(max_examples=60, deadline=None)
def test_partition_roundtrip_and_dim(parts):
    p = Partition(parts)
    assert p.n == sum(parts)
    assert dim_irrep(p) == len(standard_tableaux(p))


@given(partition_inputs)
@settings(max_examples=60, deadline=None)
def test_corner_removal_grows_back(parts):
    p = Partition(parts)
    if p.n == 1:
        return
    down = branch_restrict(p, p.n - 1)
    assert sum(down.values()) == len(p.removable_corners())
    assert all(mult == 1 for mult in down.values())
