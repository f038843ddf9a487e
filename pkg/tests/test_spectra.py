import math
from fractions import Fraction

import numpy as np
import pytest

from snmoments.moments import (Geometry, SectorTuple, bulk_hamiltonian,
                               step_channel)
from snmoments.partitions import Partition
from snmoments.spectra import (BoundReport, ScanRow, all_to_all_bound,
                               all_to_all_gap_scan, bulk_gap_scan,
                               convergence_steps, detectability_bound,
                               frame_potential_exact_k2,
                               frame_potential_paper_k2, knabe_bound,
                               knabe_threshold, one_design_steps,
                               phase_basis_rank, power_law_fit, spectral_gap,
                               unit_eigenspace_dim)

P21 = Partition((2, 1))


class TestKnabeBound:
    def test_worked_example(self):
        r = knabe_bound(2, Fraction(3, 8))
        assert r.value == Fraction(-11, 48)
        assert not r.valid

    def test_threshold_at_two(self):
        assert knabe_threshold(2) == 0.5

    def test_boundary_is_invalid(self):
        r = knabe_bound(2, Fraction(1, 2))
        assert r.value == 0
        assert not r.valid

    def test_above_threshold_is_valid(self):
        r = knabe_bound(3, Fraction(2, 5))
        assert r.valid and r.value > 0

    def test_m_one_rejected(self):
        with pytest.raises(ValueError):
            knabe_bound(1, 0.5)

    def test_affine_coefficients(self):
        # value = A * gap + B with the printed rational coefficients
        m = 4
        A = Fraction(5 * (m * m + 3 * m + 1), 6 * (m * m + 2 * m - 3))
        B = -A * Fraction(6, (m + 1) * (m + 2))
        for g in (Fraction(1, 7), Fraction(2, 5), Fraction(9, 10)):
            assert knabe_bound(m, g).value == A * g + B


class TestAllToAllBound:
    def test_fixed_point(self):
        for n in (4, 7, 19):
            assert all_to_all_bound(n, 3, 1).value == 1

    def test_worked_example(self):
        r = all_to_all_bound(6, 4, Fraction(9, 10))
        assert r.value == Fraction(4, 5)
        assert r.valid

    def test_decreases_to_invalid(self):
        vals = [all_to_all_bound(n, 4, Fraction(9, 10)).value for n in range(4, 40)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert not all_to_all_bound(39, 4, Fraction(9, 10)).valid

    def test_small_m_rejected(self):
        with pytest.raises(ValueError):
            all_to_all_bound(5, 2, 0.9)


class TestDetectability:
    def test_values(self):
        assert detectability_bound(0).value == 1
        assert detectability_bound(4).value == 0.5

    def test_monotone(self):
        xs = [detectability_bound(d).value for d in np.linspace(0, 10, 21)]
        assert all(a > b for a, b in zip(xs, xs[1:]))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            detectability_bound(-0.1)


class TestSteps:
    def test_convergence_example(self):
        assert convergence_steps(2, 10, 2, 0.01, 0.1) == 2120

    def test_log_unit_case(self):
        assert convergence_steps(1, 1, math.e * 0.5, 0.5, 0.25) == math.ceil(2 / 0.25)

    def test_epsilon_domain(self):
        with pytest.raises(ValueError):
            convergence_steps(2, 4, 2, 2.0, 0.1)

    def test_one_design_example(self):
        assert one_design_steps(5, 2, 0.01) == 47

    def test_one_design_quadratic_scaling(self):
        f = [one_design_steps(n, 2, 0.5) for n in (10, 20, 40)]
        assert 3.4 < f[1] / f[0] < 4.6 and 3.6 < f[2] / f[1] < 4.4

    def test_one_design_domain(self):
        with pytest.raises(ValueError):
            one_design_steps(1, 2, 0.1)
        with pytest.raises(ValueError):
            one_design_steps(4, 2, 1.5)


class TestFramePotentials:
    def test_exact_values(self):
        assert frame_potential_exact_k2(2) == 118
        assert frame_potential_exact_k2(3) == 544
        assert frame_potential_exact_k2(4) == 1825

    def test_paper_formula_values(self):
        assert frame_potential_paper_k2(2) == 119
        assert frame_potential_paper_k2(3) == 544
        assert frame_potential_paper_k2(4) == 1825

    def test_agreement_from_three(self):
        for n in range(3, 13):
            assert frame_potential_exact_k2(n) == frame_potential_paper_k2(n)

    def test_n2_documented_discrepancy(self):
        assert frame_potential_paper_k2(2) - frame_potential_exact_k2(2) == 1


class TestPhaseBasis:
    def test_constant_row(self):
        assert phase_basis_rank(6, 0) == 1

    def test_full_rank_example(self):
        assert phase_basis_rank(6, 3) == 4

    def test_full_rank_up_to_twenty(self):
        for n in range(2, 21):
            assert phase_basis_rank(n, n // 2) == n // 2 + 1

    def test_vandermonde_rank_rule(self):
        from snmoments.partitions import partitions
        from snmoments.yor import central_sum_eigenvalue
        for n in (5, 9, 14):
            nodes = [central_sum_eigenvalue(p) for p in partitions(n, 2)]
            assert len(set(nodes)) == len(nodes)
            for l_max in range(0, len(nodes) + 2):
                assert phase_basis_rank(n, l_max) == min(l_max + 1, len(nodes))


class TestSpectralGap:
    def test_single_projection_complement(self):
        t = SectorTuple((P21, P21), (P21, P21))
        block = bulk_hamiltonian(t, m=2, j=1)
        rep = spectral_gap(block)
        assert rep.gap == pytest.approx(1.0, abs=1e-12)

    def test_dense_and_iterative_agree(self):
        t = SectorTuple((P21, P21), (P21, P21))
        geo = Geometry("open_chain", 3)
        dense = spectral_gap(step_channel(t, geo), mode="dense")
        free = spectral_gap(step_channel(t, geo, dense_threshold=0),
                            mode="iterative", seed=5)
        assert free.solver == "iterative"
        assert dense.unit_dim == free.unit_dim
        assert free.second_eigenvalue == pytest.approx(dense.second_eigenvalue,
                                                       abs=1e-8)
        assert free.residual <= 1e-8

    def test_bad_mode(self):
        t = SectorTuple((P21, P21), (P21, P21))
        with pytest.raises(ValueError):
            spectral_gap(step_channel(t, Geometry("open_chain", 3)), mode="magic")


class TestUnitDim:
    def test_trivial_tuple(self):
        p = Partition((4,))
        t = SectorTuple((p, p), (p, p))
        block = step_channel(t, Geometry("open_chain", 4))
        assert unit_eigenspace_dim(block) == 1

    def test_matched_tuple_has_two(self):
        t = SectorTuple((P21, P21), (P21, P21))
        block = step_channel(t, Geometry("open_chain", 3))
        assert unit_eigenspace_dim(block) == 2

    def test_null_space_rank_cross_check(self):
        t = SectorTuple((P21, P21), (P21, P21))
        M = step_channel(t, Geometry("open_chain", 3)).to_dense()
        by_rank = M.shape[0] - np.linalg.matrix_rank(M - np.eye(M.shape[0]),
                                                     tol=1e-8)
        block = step_channel(t, Geometry("open_chain", 3))
        assert unit_eigenspace_dim(block) == by_rank

    def test_tolerance_domain(self):
        t = SectorTuple((P21, P21), (P21, P21))
        block = step_channel(t, Geometry("open_chain", 3))
        with pytest.raises(ValueError):
            unit_eigenspace_dim(block, tol=0.7)


class TestScans:
    def test_bulk_rows_frozen_values(self):
        rows = bulk_gap_scan([2, 3])
        assert rows[0].gap == pytest.approx(0.375, abs=1e-10)
        assert rows[0].threshold == 0.5
        assert rows[0].bound == pytest.approx(-11 / 48, abs=1e-12)
        assert rows[0].valid is False
        assert rows[1].gap == pytest.approx(0.15261297245753688, abs=1e-8)

    def test_gap_non_increasing(self):
        rows = bulk_gap_scan([1, 2, 3, 4])
        gaps = [r.gap for r in rows]
        assert gaps[0] == pytest.approx(1.0, abs=1e-12)
        assert all(a >= b - 1e-12 for a, b in zip(gaps, gaps[1:]))

    def test_dim_cap_reports_skips(self):
        rows = bulk_gap_scan([3], dim_cap=50)
        assert rows[0].skipped > 0
        assert rows[0].gap is not None   # small tuples still scanned

    def test_all_to_all_constant_gap(self):
        rows = all_to_all_gap_scan([4, 5])
        assert rows[0].gap == pytest.approx(0.5, abs=1e-9)
        assert rows[1].gap == pytest.approx(0.5, abs=1e-9)

    def test_csv_shape(self):
        import csv as csvmod
        import io
        rows = bulk_gap_scan([2])
        parsed = next(csvmod.reader(io.StringIO(rows[0].csv())))
        header = "m_or_n,tuple,dim,gap,second_eig,unit_dim,threshold,bound,valid"
        assert len(parsed) == len(header.split(","))
        assert float(parsed[3]) == pytest.approx(0.375)
        assert float(parsed[3]) == float(f"{0.375:.17g}")   # round-trip exact


def test_power_law_fit_recovers_exponent():
    ns = np.arange(4, 11)
    alpha, r2 = power_law_fit(ns, 3.1 * ns**-1.9)
    assert alpha == pytest.approx(1.9, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)
