"""Spectral analysis of moment blocks plus every closed-form bound and
counting formula the library exposes: gaps, local-gap thresholds,
convergence-step estimates, frame potentials and the integer rank of the
charge-phase basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import solvers
from .moments import (DENSE_THRESHOLD, HAMILTONIAN_KINDS, MomentBlock,
                      SectorTuple, all_to_all_hamiltonian, bulk_hamiltonian,
                      rep_bundle, sector_tuples, spectral_classes)
from .partitions import dim_irrep, multiplicity, partitions
from .yor import central_sum_eigenvalue

KERNEL_TOL = 1e-9   # eigenvalues below this count as Hamiltonian kernel

# full dense eigensolves pay O(dim^3); above this size a few Krylov runs on
# the (possibly dense-backed) matvec are much cheaper
DENSE_EIG_CUTOVER = 1024

GAP_SCAN_HEADER = "m_or_n,tuple,dim,gap,second_eig,unit_dim,threshold,bound,valid"
FRAME_HEADER = "n,exact,paper_formula,mc_estimate,mc_stderr"


@dataclass
class SpectralReport:
    sector: SectorTuple | str
    gap: float
    second_eigenvalue: float | None
    unit_dim: int
    solver: str                  # dense | iterative
    iterations: int = 0
    residual: float = 0.0


@dataclass
class BoundReport:
    name: str
    inputs: dict
    value: float
    valid: bool


# ---------------------------------------------------------------------------
# eigenreports

def _dense_channel_report(block: MomentBlock, tol: float) -> SpectralReport:
    w = np.linalg.eigvalsh(block.to_dense())
    unit = int((w > 1.0 - tol).sum())
    below = w[w <= 1.0 - tol]
    second = float(below[-1]) if below.size else None
    gap = 1.0 - second if second is not None else 1.0
    return SpectralReport(block.sector, gap, second, unit, "dense")


def _dense_hamiltonian_report(block: MomentBlock, tol: float) -> SpectralReport:
    w = np.linalg.eigvalsh(block.to_dense())
    kernel = int((w < KERNEL_TOL).sum())
    above = w[w >= KERNEL_TOL]
    p = block.projector_count
    if not above.size:   # block is pure kernel: no spectrum above zero
        return SpectralReport(block.sector, 0.0, None, kernel, "dense")
    gap = float(above[0])
    second = 1.0 - gap / p if p else None
    return SpectralReport(block.sector, gap, second, kernel, "dense")


def _iterative_channel_report(block: MomentBlock, tol: float, seed: int,
                              resid_tol: float = 1e-8) -> SpectralReport:
    if block.is_symmetric:
        apply_fn = lambda v: block.matvec(v)
        scale = 1.0
    else:
        # singular values via the symmetric product M^T M
        apply_fn = lambda v: block.rmatvec(block.matvec(v))
        scale = 0.5   # eigenvalue of M^T M = sigma^2; report sigma
    count, second, _, info = solvers.unit_count_and_second(
        apply_fn, block.dim, unit_tol=tol, tol=resid_tol, seed=seed)
    if second is not None and not block.is_symmetric:
        second = math.sqrt(max(second, 0.0))
    gap = 1.0 - second if second is not None else 1.0
    return SpectralReport(block.sector, gap, second, count, "iterative",
                          info.iterations, info.residual)


def _channel_form(block: MomentBlock):
    """Matvec of the complementary channel average for Hamiltonian blocks."""
    if block.channel_apply is not None:
        return block.channel_apply
    p = block.projector_count

    def apply(v):
        return v - block.matvec(v) / p

    return apply


def _iterative_hamiltonian_report(block: MomentBlock, tol: float,
                                  seed: int) -> SpectralReport:
    p = block.projector_count
    count, second, _, info = solvers.unit_count_and_second(
        _channel_form(block), block.dim, unit_tol=tol, seed=seed)
    gap = p * (1.0 - second) if second is not None else p * 1.0
    return SpectralReport(block.sector, gap, second, count, "iterative",
                          info.iterations, info.residual)


def spectral_gap(block: MomentBlock, mode: str = "auto", tol: float = 1e-6,
                 seed: int = 0) -> SpectralReport:
    """Gap report for a moment block.

    Channel kinds: gap to the second-largest eigenvalue outside the unit
    cluster.  Hamiltonian kinds: smallest eigenvalue above the kernel (the
    iterative path works on the complementary channel average).  Brickwork
    blocks are not symmetric and are measured through singular values.
    """
    if mode not in ("auto", "dense", "iterative"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "dense" if block.dim <= DENSE_EIG_CUTOVER else "iterative"
    hamiltonian = block.kind in HAMILTONIAN_KINDS
    if mode == "dense":
        if not block.is_symmetric:
            M = block.to_dense()
            s = np.linalg.svd(M, compute_uv=False)
            unit = int((s > 1.0 - tol).sum())
            below = s[s <= 1.0 - tol]
            second = float(below[0]) if below.size else None
            gap = 1.0 - second if second is not None else 1.0
            return SpectralReport(block.sector, gap, second, unit, "dense")
        if hamiltonian:
            return _dense_hamiltonian_report(block, tol)
        return _dense_channel_report(block, tol)
    if hamiltonian:
        return _iterative_hamiltonian_report(block, tol, seed)
    return _iterative_channel_report(block, tol, seed)


def unit_eigenspace_dim(block: MomentBlock, tol: float = 1e-6, seed: int = 0) -> int:
    """Number of eigenvalues above 1 - tol (singular values for brickwork).

    The count is recomputed at tol/10; disagreement means an eigenvalue sits
    at the tolerance boundary and is reported instead of silently resolved.
    """
    if not (0.0 < tol < 0.5):
        raise ValueError("tol must lie in (0, 0.5)")
    if block.dim <= DENSE_EIG_CUTOVER or block.dense is not None:
        M = block.to_dense()
        w = np.linalg.eigvalsh(M) if block.is_symmetric \
            else np.linalg.svd(M, compute_uv=False)
        counts = [int((w > 1.0 - t).sum()) for t in (tol, tol / 10.0)]
    else:
        counts = []
        for t in (tol, tol / 10.0):
            rep = _iterative_channel_report(block, t, seed)
            counts.append(rep.unit_dim)
    if counts[0] != counts[1]:
        raise ArithmeticError(
            f"unit-eigenvalue count ambiguous at tol={tol}: {counts}")
    return counts[0]


# ---------------------------------------------------------------------------
# closed-form bounds

def knabe_bound(m: int, local_gap) -> BoundReport:
    """Finite-size threshold bound lifting a local window gap to a chain gap.

    value = 5(m^2+3m+1)/(6(m^2+2m-3)) * (local_gap - 6/((m+1)(m+2))),
    meaningful (valid) only when the local gap clears the threshold.
    """
    if m < 2:
        raise ValueError("window index m must be >= 2")
    coeff = Fraction(5 * (m * m + 3 * m + 1), 6 * (m * m + 2 * m - 3))
    threshold = Fraction(6, (m + 1) * (m + 2))
    value = coeff * (local_gap - threshold)
    valid = local_gap > threshold and value > 0
    return BoundReport("knabe", {"m": m, "local_gap": local_gap},
                       value, bool(valid))


def knabe_threshold(m: int) -> float:
    return 6.0 / ((m + 1) * (m + 2))


def all_to_all_bound(n: int, m: int, gamma_m) -> BoundReport:
    """Complete-graph analogue: value = 1 + (n-2)/(m-2) * (gamma_m - 1)."""
    if m <= 2:
        raise ValueError("subset size m must be >= 3")
    if n < m:
        raise ValueError("need n >= m")
    value = 1 + Fraction(n - 2, m - 2) * (gamma_m - 1)
    return BoundReport("all_to_all", {"n": n, "m": m, "gamma_m": gamma_m},
                       value, bool(value > 0))


def detectability_bound(delta) -> BoundReport:
    """Layer-product norm bound 1/(delta/4 + 1) from a frustration-free gap."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    value = 1 / (delta / 4 + 1)
    return BoundReport("detectability", {"delta": delta}, value, True)


def convergence_steps(k: int, n: int, d: int, epsilon: float, delta: float) -> int:
    """Walk steps sufficient for an epsilon-approximate k-th moment:
    ceil((2kn/delta) * ln(d/epsilon))."""
    if min(k, n, d) < 1 or epsilon <= 0:
        raise ValueError("k, n, d, epsilon must be positive")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if epsilon >= d:
        raise ValueError("need epsilon < d so the logarithm is positive")
    return math.ceil((2.0 * k * n / delta) * math.log(d / epsilon))


def one_design_steps(n: int, d: int, epsilon: float) -> int:
    """Quadratic first-moment convergence: ceil((n-1)(2n ln d + ln 1/eps))."""
    if n < 2 or d < 2:
        raise ValueError("need n >= 2 and d >= 2")
    if not (0 < epsilon < 1):
        raise ValueError("need 0 < epsilon < 1")
    return math.ceil((n - 1) * (2 * n * math.log(d) + math.log(1 / epsilon)))


# ---------------------------------------------------------------------------
# frame potentials and the phase basis

def frame_potential_exact_k2(n: int, d: int = 2) -> int:
    """Second frame potential of the sector-Haar ensemble, exactly.

    Contraction counting over ordered sector pairs: same-sector tuples
    contribute m^4 (times 2 when the sector carries both an identity and a
    swap invariant, i.e. dim >= 2), distinct ordered pairs contribute
    2 m_a^2 m_b^2.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    secs = [(multiplicity(p, d), dim_irrep(p)) for p in partitions(n, d)]
    total = 0
    for m, dim in secs:
        total += m**4 * (2 if dim >= 2 else 1)
    for ia, (ma, _) in enumerate(secs):
        for ib, (mb, _) in enumerate(secs):
            if ia != ib:
                total += 2 * ma**2 * mb**2
    return total


def frame_potential_paper_k2(n: int) -> int:
    """Literal qubit closed form (n+1)^4 + 2 sum_r (n-2r+1)^4
    + 2 sum_{r != s} (n-2r+1)^2 (n-2s+1)^2, ordered r, s.

    Exact for n >= 3; at n = 2 it overcounts the one-dimensional r=1 sector
    by exactly 1 relative to frame_potential_exact_k2.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    half = n // 2
    total = (n + 1) ** 4
    total += 2 * sum((n - 2 * r + 1) ** 4 for r in range(1, half + 1))
    total += 2 * sum((n - 2 * r + 1) ** 2 * (n - 2 * s + 1) ** 2
                     for r in range(0, half + 1)
                     for s in range(0, half + 1) if r != s)
    return total


def _exact_rank(rows: list[list[int]]) -> int:
    """Rank of an integer matrix by fraction-free Gaussian elimination."""
    M = [[Fraction(x) for x in row] for row in rows]
    nrows = len(M)
    ncols = len(M[0]) if nrows else 0
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, nrows) if M[r][col] != 0), None)
        if pivot is None:
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        pv = M[rank][col]
        for r in range(rank + 1, nrows):
            if M[r][col] != 0:
                f = M[r][col] / pv
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


def phase_basis_rank(n: int, l_max: int) -> int:
    """Rank of the moment matrix V[l][sector] = (sum of box contents)^l.

    Full rank l_max+1 = p(n,2) certifies that powers of the total
    Jucys-Murphy sum separate all qubit charge sectors.
    """
    if n < 2 or l_max < 0:
        raise ValueError("need n >= 2 and l_max >= 0")
    nodes = [central_sum_eigenvalue(p) for p in partitions(n, 2)]
    rows = [[x**l for x in nodes] for l in range(l_max + 1)]
    return _exact_rank(rows)


# ---------------------------------------------------------------------------
# scans

@dataclass
class ScanRow:
    key: int                      # m (projection count) or n (qudit count)
    sector: SectorTuple | None
    dim: int
    gap: float | None
    second_eig: float | None
    unit_dim: int | None
    threshold: float | None
    bound: float | None
    valid: bool | None
    skipped: int = 0              # tuples above the dimension cap

    def csv(self) -> str:
        def num(x):
            return "" if x is None else f"{float(x):.17g}"

        fields = [str(self.key),
                  "" if self.sector is None else f"\"{self.sector}\"",
                  str(self.dim),
                  num(self.gap), num(self.second_eig),
                  "" if self.unit_dim is None else str(self.unit_dim),
                  num(self.threshold), num(self.bound),
                  "" if self.valid is None else str(self.valid).lower()]
        return ",".join(fields)


def min_gap_over_tuples(n: int, d: int,
                        builder: Callable[[SectorTuple], MomentBlock],
                        k: int = 2, dim_cap: int | None = None,
                        tuples: Sequence[SectorTuple] | None = None,
                        tol: float = 1e-6, seed: int = 0,
                        threads: int = 1):
    """Minimize the gap of builder(tuple) over sector tuples.

    Tuples related by a simultaneous ket/bra reordering or by a ket-bra
    exchange share spectra, so one representative per class is solved.
    Returns (ScanRow-like dict, skipped count).
    """
    pool = tuples if tuples is not None else sector_tuples(n, d, k)
    classes = spectral_classes(pool)
    skipped = 0
    work = []
    for rep, _size in classes:
        if dim_cap is not None and rep.block_dim() > dim_cap:
            skipped += 1
            continue
        work.append(rep)

    def solve(rep_tuple: SectorTuple):
        block = builder(rep_tuple)
        return rep_tuple, spectral_gap(block, tol=tol, seed=seed)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(solve, work))
    else:
        results = [solve(w) for w in work]

    best = None
    for rep_tuple, report in results:
        if report.second_eigenvalue is None:
            continue    # no spectrum outside the unit cluster: no constraint
        if best is None or report.gap < best[1].gap - 1e-15:
            best = (rep_tuple, report)
    return best, skipped


def bulk_gap_scan(m_values: Iterable[int], d: int = 2,
                  tuples: Sequence[SectorTuple] | None = None,
                  dim_cap: int | None = None, tol: float = 1e-6,
                  seed: int = 0, threads: int = 1) -> list[ScanRow]:
    """Gap of the m-projection window Hamiltonian, minimized over tuples.

    Row m solves the open window of m adjacent projections, computed on
    exactly m+1 qudits (restriction makes the window spectrum independent of
    the ambient chain length).  The threshold column is 6/((m+1)(m+2)) and
    the bound column evaluates the finite-size lift at the same index, so
    adjacent rows also give the competing window-width pairing.
    """
    rows = []
    for m in m_values:
        if m < 1:
            raise ValueError("projection count m must be >= 1")
        n = m + 1
        reps_cache: dict = {}

        def builder(t: SectorTuple):
            return bulk_hamiltonian(t, reps_cache.setdefault(
                t.shapes, rep_bundle(t)), m=n, j=1)

        best, skipped = min_gap_over_tuples(
            n, d, builder, dim_cap=dim_cap, tuples=tuples,
            tol=tol, seed=seed, threads=threads)
        thr = knabe_threshold(m)
        if best is None:
            rows.append(ScanRow(m, None, 0, None, None, None, thr, None, None,
                                skipped))
            continue
        t, rep = best
        if m >= 2:
            br = knabe_bound(m, rep.gap)
            bound, valid = float(br.value), br.valid
        else:
            bound, valid = None, None
        rows.append(ScanRow(m, t, t.block_dim(), rep.gap, rep.second_eigenvalue,
                            rep.unit_dim, thr, bound, valid, skipped))
    return rows


def all_to_all_gap_scan(n_values: Iterable[int], d: int = 2,
                        tuples: Sequence[SectorTuple] | None = None,
                        dim_cap: int | None = None, tol: float = 1e-6,
                        seed: int = 0, threads: int = 1,
                        bound_subset: int = 3) -> list[ScanRow]:
    """Minimized gap of the complete-graph Hamiltonian per qudit count.

    The bound column extrapolates from the local gap measured on
    `bound_subset` qudits through all_to_all_bound.
    """
    n_values = list(n_values)
    gamma = None
    rows = []
    for n in sorted(set(n_values) | {bound_subset}):
        reps_cache: dict = {}

        def builder(t: SectorTuple):
            return all_to_all_hamiltonian(
                t, reps_cache.setdefault(t.shapes, rep_bundle(t)))

        best, skipped = min_gap_over_tuples(
            n, d, builder, dim_cap=dim_cap, tuples=tuples,
            tol=tol, seed=seed, threads=threads)
        if best is None:
            if n in n_values:
                rows.append(ScanRow(n, None, 0, None, None, None, None, None,
                                    None, skipped))
            continue
        t, rep = best
        if n == bound_subset:
            gamma = rep.gap
        if n not in n_values:
            continue
        bound = valid = None
        if gamma is not None and n >= bound_subset and n > 2:
            if n == bound_subset:
                bound, valid = gamma, gamma > 0
            else:
                br = all_to_all_bound(n, bound_subset, gamma)
                bound, valid = float(br.value), br.valid
        rows.append(ScanRow(n, t, t.block_dim(), rep.gap, rep.second_eigenvalue,
                            rep.unit_dim, None, bound, valid, skipped))
    rows.sort(key=lambda r: r.key)
    return rows


def power_law_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Least-squares exponent alpha for y ~ C x^(-alpha); returns (alpha, R^2)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    A = np.stack([np.ones_like(lx), lx], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ coef
    ss_res = float(((ly - pred) ** 2).sum())
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return -float(coef[1]), r2
