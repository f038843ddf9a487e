"""Named invariant checks runnable from the command line.

Each check returns (ok, detail).  The quick tier keeps every check at n <= 5
so the whole table finishes in well under a minute.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable

import numpy as np

from . import moments, oracle, spectra, yor
from .moments import Geometry, SectorTuple, step_channel, twirl_coefficients
from .partitions import (Partition, branch_restrict, contents, count_sectors,
                         dim_irrep, multiplicity, partitions, standard_tableaux)


def _all_shapes(n_max: int):
    for n in range(1, n_max + 1):
        yield from partitions(n, n)


def check_schur_weyl_dimensions(quick: bool) -> tuple[bool, str]:
    cases = [(n, 2) for n in range(1, 6 if quick else 9)]
    if not quick:
        cases += [(n, 3) for n in range(1, 6)]
    worst = None
    for n, d in cases:
        total = sum(multiplicity(p, d) * dim_irrep(p) for p in partitions(n, d))
        if total != d ** n:
            worst = (n, d, total)
    return worst is None, f"failed at {worst}" if worst else f"{len(cases)} cases"


def check_dim_matches_tableau_count(quick: bool) -> tuple[bool, str]:
    n_max = 5 if quick else 8
    bad = [p for p in _all_shapes(n_max) if dim_irrep(p) != len(standard_tableaux(p))]
    return not bad, f"mismatch at {bad[:3]}" if bad else f"all shapes n<={n_max}"


def check_branching_dimensions(quick: bool) -> tuple[bool, str]:
    n_max = 5 if quick else 7
    for p in _all_shapes(n_max):
        for m in range(1, p.n + 1):
            total = sum(mult * dim_irrep(q) for q, mult in branch_restrict(p, m).items())
            if total != dim_irrep(p):
                return False, f"failed at {p}, m={m}"
    return True, f"all shapes n<={n_max}"


def check_sector_count_formula(quick: bool) -> tuple[bool, str]:
    n_max = 12 if quick else 30
    bad = [n for n in range(1, n_max + 1) if count_sectors(n, 2) != n // 2 + 1]
    return not bad, f"failed at n={bad}" if bad else f"n<={n_max}"


def check_contents_shape_determined(quick: bool) -> tuple[bool, str]:
    n_max = 5 if quick else 6
    for p in _all_shapes(n_max):
        expected = sorted(j - i for i, row in enumerate(p.parts) for j in range(row))
        for t in standard_tableaux(p):
            if sorted(contents(t)) != expected:
                return False, f"failed at {t}"
    return True, f"all tableaux n<={n_max}"


def _rep_suite_error(n_max: int) -> float:
    worst = 0.0
    for n in range(2, n_max + 1):
        for p in partitions(n, n):
            rep = yor.build_irrep(p, n)
            mats = [m.to_dense() for m in rep.adj]
            eye = np.eye(rep.dim)
            for j, M in enumerate(mats):
                worst = max(worst, np.abs(M - M.T).max(), np.abs(M @ M - eye).max())
                if j + 1 < len(mats):
                    A, B = M, mats[j + 1]
                    worst = max(worst, np.abs(A @ B @ A - B @ A @ B).max())
                for i in range(j + 2, len(mats)):
                    worst = max(worst, np.abs(M @ mats[i] - mats[i] @ M).max())
            # X_{j+1} = t_j X_j t_j + t_j, and the diagonal is the content
            for j in range(1, n):
                X = np.diag(rep.yjm[j - 1].astype(float))
                T = mats[j - 1]
                X_next = T @ X @ T + T
                worst = max(worst, np.abs(X_next - np.diag(rep.yjm[j].astype(float))).max())
    return worst


def check_representation_suite(quick: bool) -> tuple[bool, str]:
    err = _rep_suite_error(5 if quick else 7)
    return err <= 1e-12, f"max deviation {err:.2e}"


def check_central_element(quick: bool) -> tuple[bool, str]:
    n_max = 5 if quick else 7
    for p in _all_shapes(n_max):
        rep = yor.build_irrep(p, p.n)
        total = rep.yjm.sum(axis=0)
        if not np.all(total == yor.central_sum_eigenvalue(p)):
            return False, f"failed at {p}"
    return True, f"all shapes n<={n_max}"


def check_restriction_blocks(quick: bool) -> tuple[bool, str]:
    """adj[1..m-1] decomposes into the restricted-shape actions."""
    n_max = 5 if quick else 6
    worst = 0.0
    for p in _all_shapes(n_max):
        n = p.n
        rep = yor.build_irrep(p, n)
        for m in range(2, n):
            groups: dict[tuple, list[int]] = {}
            for idx, t in enumerate(rep.basis):
                sub = tuple(len([v for v in row if v <= m]) for row in t.rows)
                sub = tuple(x for x in sub if x)
                groups.setdefault(sub, []).append(idx)
            for subshape, idxs in groups.items():
                subrep = yor.build_irrep(Partition(subshape), m)
                copies = len(idxs) // subrep.dim
                for j in range(1, m):
                    big = rep.adj[j - 1].to_dense()[np.ix_(idxs, idxs)]
                    small = subrep.adj[j - 1].to_dense()
                    expect = np.kron(np.eye(copies), small)
                    worst = max(worst, np.abs(big - expect).max())
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def check_twirl_coefficients(quick: bool) -> tuple[bool, str]:
    c = twirl_coefficients(2)
    expect = {
        (): Fraction(3, 8), (0, 1, 2, 3): Fraction(3, 8),
        (0, 2): Fraction(1, 8), (0, 3): Fraction(1, 8),
        (1, 2): Fraction(1, 8), (1, 3): Fraction(1, 8),
        (0, 1): Fraction(-1, 8), (2, 3): Fraction(-1, 8),
    }
    return c == expect, f"{len(c)} nonzero terms"


def check_twirl_projection(quick: bool) -> tuple[bool, str]:
    t = SectorTuple((Partition((2, 1)), Partition((3,))),
                    (Partition((2, 1)), Partition((3,))))
    block = moments.twirl_swap_k(t, None, (1, 2))
    M = block.to_dense()
    err = max(np.abs(M @ M - M).max(), np.abs(M - M.T).max())
    return err <= 1e-10, f"idempotence error {err:.2e}"


def check_quadrature_agreement(quick: bool) -> tuple[bool, str]:
    t = SectorTuple((Partition((2, 1)), Partition((2, 1))),
                    (Partition((2, 1)), Partition((2, 1))))
    reps = moments.rep_bundle(t)
    worst = 0.0
    for pair in [(1, 2), (1, 3)]:
        block = moments.twirl_swap_k(t, reps, pair)
        tau = yor.transposition_matrix(reps[t.ket[0]], *pair)
        quad = oracle.twirl_quadrature(tau, k=2, steps=1024)
        worst = max(worst, float(np.abs(block.to_dense() - quad).max()))
    return worst <= 1e-10, f"max deviation {worst:.2e}"


def check_channel_unital(quick: bool) -> tuple[bool, str]:
    n = 3
    worst = 0.0
    for ensemble in ("swap_only", "cqa"):
        for p1 in partitions(n, 2):
            for p2 in partitions(n, 2):
                t = SectorTuple((p1, p2), (p1, p2))
                block = step_channel(t, Geometry("open_chain", n), ensemble)
                d1, d2 = dim_irrep(p1), dim_irrep(p2)
                ident = np.einsum("ik,jl->ijkl", np.eye(d1), np.eye(d2)).reshape(-1)
                worst = max(worst, float(np.abs(block.matvec(ident) - ident).max()))
    return worst <= 1e-10, f"max deviation {worst:.2e}"


def check_cqa_sandwich_absorbs(quick: bool) -> tuple[bool, str]:
    n = 3
    t = SectorTuple((Partition((2, 1)), Partition((2, 1))),
                    (Partition((2, 1)), Partition((2, 1))))
    block = step_channel(t, Geometry("open_chain", n), "cqa")
    M = block.to_dense()
    mask = block.diagonal
    MM = mask[:, None] * M * mask[None, :]
    err = float(np.abs(MM - M).max())
    return err <= 1e-12, f"projection absorb error {err:.2e}"


def check_bound_arithmetic(quick: bool) -> tuple[bool, str]:
    ok = True
    r = spectra.knabe_bound(2, Fraction(3, 8))
    ok &= r.value == Fraction(-11, 48) and not r.valid
    r = spectra.all_to_all_bound(6, 4, Fraction(9, 10))
    ok &= r.value == Fraction(4, 5) and r.valid
    r = spectra.detectability_bound(4)
    ok &= r.value == 0.5 and r.valid
    ok &= spectra.convergence_steps(2, 10, 2, 0.01, 0.1) == 2120
    ok &= spectra.one_design_steps(5, 2, 0.01) == 47
    return bool(ok), "five worked examples"


def check_frame_potentials(quick: bool) -> tuple[bool, str]:
    n_max = 8 if quick else 12
    for n in range(3, n_max + 1):
        if spectra.frame_potential_exact_k2(n) != spectra.frame_potential_paper_k2(n):
            return False, f"mismatch at n={n}"
    if spectra.frame_potential_paper_k2(2) - spectra.frame_potential_exact_k2(2) != 1:
        return False, "n=2 discrepancy is not exactly 1"
    return True, f"agree for 3<=n<={n_max}; n=2 off by one as documented"


def check_phase_basis(quick: bool) -> tuple[bool, str]:
    n_max = 12 if quick else 20
    for n in range(2, n_max + 1):
        want = n // 2 + 1
        if spectra.phase_basis_rank(n, n // 2) != want:
            return False, f"rank deficit at n={n}"
    return True, f"full rank for 2<=n<={n_max}"


def check_pauli_swap_identity(quick: bool) -> tuple[bool, str]:
    err = max(oracle.pauli_swap_identity_error(2), oracle.pauli_swap_identity_error(3))
    return err <= 1e-12, f"max deviation {err:.2e}"


def check_permutation_homomorphism(quick: bool) -> tuple[bool, str]:
    err = oracle.FullSpaceModel(4, 2).homomorphism_check(trials=100, seed=11)
    return err == 0.0, f"max deviation {err:.2e}"


def check_full_decomposition(quick: bool) -> tuple[bool, str]:
    cases = [(3, 2), (2, 2)] if quick else [(3, 2), (2, 2), (4, 3)]
    for n, d in cases:
        rep = oracle.full_decomposition_check(n, d)
        if not rep["dimension_ok"] or rep["trace_error"] > 1e-9 \
                or rep["idempotent_error"] > 1e-9:
            return False, f"failed at n={n}, d={d}: {rep}"
    return True, f"{len(cases)} cases"


def check_block_oracle_agreement(quick: bool) -> tuple[bool, str]:
    cases = [(2, 2, 1)] if quick else [(2, 2, 1), (3, 2, 1), (3, 2, 2)]
    worst = 0.0
    for n, d, k in cases:
        rep = oracle.full_channel_eigencheck(n, d, k)
        if rep["unit_count_full"] != rep["unit_count_blocks"]:
            return False, f"unit counts differ at n={n}, k={k}: {rep}"
        worst = max(worst, rep["spectrum_error"])
    return worst <= 1e-8, f"max spectrum deviation {worst:.2e}"


CHECKS: list[tuple[str, Callable[[bool], tuple[bool, str]]]] = [
    ("schur-weyl-dimensions", check_schur_weyl_dimensions),
    ("irrep-dim-vs-tableaux", check_dim_matches_tableau_count),
    ("branching-dimensions", check_branching_dimensions),
    ("sector-count-formula", check_sector_count_formula),
    ("contents-shape-determined", check_contents_shape_determined),
    ("representation-suite", check_representation_suite),
    ("central-element", check_central_element),
    ("restriction-blocks", check_restriction_blocks),
    ("twirl-coefficients", check_twirl_coefficients),
    ("twirl-projection", check_twirl_projection),
    ("quadrature-agreement", check_quadrature_agreement),
    ("channel-unital", check_channel_unital),
    ("cqa-sandwich-absorbs", check_cqa_sandwich_absorbs),
    ("bound-arithmetic", check_bound_arithmetic),
    ("frame-potentials", check_frame_potentials),
    ("phase-basis-rank", check_phase_basis),
    ("pauli-swap-identity", check_pauli_swap_identity),
    ("permutation-homomorphism", check_permutation_homomorphism),
    ("full-decomposition", check_full_decomposition),
    ("block-oracle-agreement", check_block_oracle_agreement),
]


def run_all(quick: bool = False, out=print) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn(quick)
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= ok
        out(f"{'PASS' if ok else 'FAIL'}  {name:28s} {detail}")
    return all_ok
