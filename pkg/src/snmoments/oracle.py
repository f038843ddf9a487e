"""Brute-force ground truth on the full qudit space and by Monte Carlo.

Everything in this module is deliberately independent of the block-level
assembly in `moments`: permutations act by index shuffles on computational
basis strings, twirls are evaluated by numerical quadrature, and frame
potentials by Haar sampling.  Tests pit these against the structured path.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .moments import SectorTuple, sector_tuples, step_channel, Geometry, twirl_coefficients
from .partitions import Partition, dim_irrep, multiplicity, partitions, standard_tableaux
from .spectra import spectral_gap
from .yor import build_irrep, transposition_matrix

FULL_SPACE_CAP = 4096          # largest d^n handled densely
GROUP_AVERAGE_MAX_N = 7        # character averaging enumerates n! elements


@dataclass
class FullSpaceModel:
    """Computational-basis action of S_n on (C^d)^{otimes n}."""

    n: int
    d: int

    @property
    def dim(self) -> int:
        return self.d ** self.n

    def _transpose_axes(self, perm: Sequence[int]) -> list[int]:
        """Axes order making the slot action a true homomorphism:
        matrix(sigma tau) = matrix(sigma) matrix(tau) with
        (sigma tau)(q) = sigma(tau(q)) in 0-indexed one-line notation."""
        inv = [0] * self.n
        for k, p in enumerate(perm):
            inv[p] = k
        return inv

    def apply_permutation(self, perm: Sequence[int], v: np.ndarray) -> np.ndarray:
        """Permute qudit slots of a state tensor (trailing axes are batch)."""
        extra = v.ndim - 1
        x = v.reshape((self.d,) * self.n + v.shape[1:])
        axes = self._transpose_axes(perm) + [self.n + i for i in range(extra)]
        return np.ascontiguousarray(np.transpose(x, axes)).reshape(v.shape)

    def permutation_matrix(self, perm: Sequence[int]) -> np.ndarray:
        """Dense 0/1 matrix of the slot permutation."""
        if self.dim > FULL_SPACE_CAP:
            raise ValueError(f"full space {self.dim} exceeds cap {FULL_SPACE_CAP}")
        return self.apply_permutation(perm, np.eye(self.dim))

    def permutation_index_map(self, perm: Sequence[int]) -> np.ndarray:
        """Gather map g with (matrix(perm) v)[i] = v[g[i]]: column of the
        single 1 in each row."""
        idx = np.arange(self.dim).reshape((self.d,) * self.n)
        return np.transpose(idx, self._transpose_axes(perm)).reshape(-1)

    def transposition(self, i: int, j: int) -> list[int]:
        """One-line word of the qudit transposition (i, j), 1-indexed."""
        word = list(range(self.n))
        word[i - 1], word[j - 1] = word[j - 1], word[i - 1]
        return word

    def homomorphism_check(self, trials: int = 100, seed: int = 0) -> float:
        """Max deviation of matrix(sigma tau) from matrix(sigma) matrix(tau)."""
        rng = np.random.Generator(np.random.Philox(key=seed))
        worst = 0.0
        for _ in range(trials):
            sigma = list(rng.permutation(self.n))
            tau = list(rng.permutation(self.n))
            composed = [sigma[tau[q]] for q in range(self.n)]
            lhs = self.permutation_matrix(composed)
            rhs = self.permutation_matrix(sigma) @ self.permutation_matrix(tau)
            worst = max(worst, float(np.abs(lhs - rhs).max()))
        return worst


def full_decomposition_check(n: int, d: int) -> dict:
    """Verify sum_l m_l d_l = d^n and the traces of isotypic projectors.

    Projectors are built by character averaging over all n! permutation
    matrices, with characters read off as traces of the orthogonal irrep
    matrices.  Enumerating the group caps n at GROUP_AVERAGE_MAX_N.
    """
    model = FullSpaceModel(n, d)
    if model.dim > FULL_SPACE_CAP:
        raise ValueError(f"full space {model.dim} exceeds cap {FULL_SPACE_CAP}")
    if n > GROUP_AVERAGE_MAX_N:
        raise ValueError(f"group averaging capped at n={GROUP_AVERAGE_MAX_N}")
    shapes = partitions(n, n)          # all shapes; multiplicity prunes rows > d
    sectors = [(p, multiplicity(p, d), dim_irrep(p)) for p in shapes]
    dim_sum = sum(m * f for _, m, f in sectors)

    reps = {p: build_irrep(p, n) for p in shapes}
    words = list(itertools.permutations(range(n)))
    fact = math.factorial(n)
    cols = np.arange(model.dim)
    projector_traces = {}
    max_idem_err = 0.0
    for p, m, f in sectors:
        chi_cache: dict[tuple[int, ...], float] = {}
        P = np.zeros((model.dim, model.dim))
        for word in words:
            ctype = _cycle_type(word)
            if ctype not in chi_cache:
                chi_cache[ctype] = _character(reps[p], word)
            chi = chi_cache[ctype]
            if chi != 0.0:
                P[cols, model.permutation_index_map(word)] += chi
        P *= f / fact
        projector_traces[p] = float(np.trace(P))
        max_idem_err = max(max_idem_err, float(np.abs(P @ P - P).max()))
    trace_err = max(abs(projector_traces[p] - m * f) for p, m, f in sectors)
    return {
        "dimension_sum": dim_sum,
        "full_dim": model.dim,
        "dimension_ok": dim_sum == model.dim,
        "projector_traces": projector_traces,
        "trace_error": trace_err,
        "idempotent_error": max_idem_err,
    }


def _cycle_type(word) -> tuple[int, ...]:
    seen = [False] * len(word)
    lengths = []
    for start in range(len(word)):
        if seen[start]:
            continue
        length = 0
        q = start
        while not seen[q]:
            seen[q] = True
            q = word[q]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def _character(rep, word) -> float:
    """Trace of the orthogonal irrep matrix of the permutation word."""
    M = np.eye(rep.dim)
    # decompose the word into adjacent transpositions by bubble sort
    w = list(word)
    for i in range(len(w)):
        for j in range(len(w) - 1):
            if w[j] > w[j + 1]:
                w[j], w[j + 1] = w[j + 1], w[j]
                M = rep.adj[j].apply(M)
    return float(np.trace(M))


def twirl_quadrature(taus, k: int, steps: int = 1024) -> np.ndarray:
    """Trapezoid average of the k-fold pair twirl over the rotation angle.

    `taus` is one involutive matrix (used on all 2k factors) or a sequence of
    2k factor matrices.  The integrand is a trigonometric polynomial of
    degree 2k, so the rule is exact once steps clears Nyquist; 1024 leaves
    quadrature error at rounding level.
    """
    if steps < 64:
        raise ValueError("need steps >= 64")
    if isinstance(taus, np.ndarray):
        taus = [taus] * (2 * k)
    taus = [np.asarray(t, dtype=float) for t in taus]
    if len(taus) != 2 * k:
        raise ValueError(f"need one or 2k={2 * k} factor matrices")
    for t in taus:
        if np.abs(t @ t - np.eye(t.shape[0])).max() > 1e-10:
            raise ValueError("factor is not involutive")
    dim = int(np.prod([t.shape[0] for t in taus]))
    acc = np.zeros((dim, dim), dtype=complex)
    for s in range(steps):
        t = 2.0 * np.pi * s / steps
        term = np.ones((1, 1), dtype=complex)
        for pos, tau in enumerate(taus):
            sign = -1.0 if pos < k else 1.0
            f = math.cos(t) * np.eye(tau.shape[0]) + sign * 1j * math.sin(t) * tau
            term = np.kron(term, f)
        acc += term
    acc /= steps
    return acc.real if np.abs(acc.imag).max() < 1e-9 else acc


def haar_trace_samples(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Traces of Haar unitaries: QR of complex Ginibre, diagonal phase fixed."""
    if dim == 1:
        return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, count))
    z = (rng.standard_normal((count, dim, dim))
         + 1j * rng.standard_normal((count, dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    phases = diag / np.abs(diag)
    u = q * phases[:, None, :]
    return np.trace(u, axis1=1, axis2=2)


def frame_potential_mc(n: int, k: int, samples: int, seed: int,
                       d: int = 2, chunk: int = 200_000) -> tuple[float, float]:
    """Monte Carlo estimate of E |tr U|^(2k) for the sector-Haar ensemble.

    One draw samples an independent Haar unitary per charge sector plus an
    independent sector phase; the trace is the multiplicity-weighted phase
    sum of sector traces.  Chunks use jumped counter-based streams, and the
    chunk reductions are merged with exact summation, so the estimate is
    reproducible bit-for-bit for a fixed seed regardless of scheduling.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    secs = [(multiplicity(p, d), dim_irrep(p)) for p in partitions(n, d)]
    if any(dim > 64 for _, dim in secs):
        raise ValueError("sector dimension too large for Haar sampling")
    base = np.random.Philox(key=seed)
    sums, sqsums = [], []
    done = 0
    stream = 0
    while done < samples:
        m = min(chunk, samples - done)
        rng = np.random.Generator(base.jumped(stream))
        tr = np.zeros(m, dtype=complex)
        for mult, dim in secs:
            phase = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, m))
            tr += mult * phase * haar_trace_samples(dim, m, rng)
        vals = np.abs(tr) ** (2 * k)
        sums.append(float(vals.sum()))
        sqsums.append(float((vals * vals).sum()))
        done += m
        stream += 1
    total = math.fsum(sums)
    total_sq = math.fsum(sqsums)
    mean = total / samples
    var = max(total_sq - samples * mean * mean, 0.0) / (samples - 1)
    return mean, math.sqrt(var / samples)


def full_channel_matrix(n: int, d: int, k: int,
                        geometry: str = "open_chain") -> np.ndarray:
    """Dense one-step swap-twirl channel on the full space.

    Assembled by applying the exact trigonometric term expansion to identity
    columns; every factor application is a qudit index shuffle, so the big
    permutation operators are never formed.
    """
    model = FullSpaceModel(n, d)
    N = model.dim
    D = N ** (2 * k)
    if D > FULL_SPACE_CAP:
        raise ValueError(f"channel dimension {D} exceeds cap {FULL_SPACE_CAP}")
    pairs = Geometry(geometry, n).pair_set()
    coeffs = [(S, float(c)) for S, c in sorted(twirl_coefficients(k).items())]
    eye = np.eye(D).reshape((N,) * (2 * k) + (D,))
    acc = np.zeros_like(eye)
    for (i, j) in pairs:
        word = model.transposition(i, j)
        for S, c in coeffs:
            term = eye
            for pos in S:
                term = _shuffle_axis(term, pos, word, model)
            acc += c * term
    acc /= len(pairs)
    return acc.reshape(D, D)


def _shuffle_axis(x: np.ndarray, pos: int, word, model: FullSpaceModel) -> np.ndarray:
    """Apply a qudit permutation to one of the 2k factor axes of x."""
    moved = np.moveaxis(x, pos, 0)
    lead = moved.shape[0]
    rest = moved.reshape(lead, -1)
    out = model.apply_permutation(word, rest)
    return np.moveaxis(out.reshape(moved.shape), 0, pos)


def full_channel_eigencheck(n: int, d: int, k: int,
                            ensemble: str = "swap_only",
                            geometry: str = "open_chain",
                            tol: float = 1e-6) -> dict:
    """Eigenvalues of the full-space channel against the weighted block union.

    The full spectrum must equal the union of sector-tuple block spectra,
    each repeated by its multiplicity weight, and the unit-eigenvalue counts
    must agree exactly.
    """
    if ensemble != "swap_only":
        raise ValueError("full-space reference implemented for swap_only")
    T = full_channel_matrix(n, d, k, geometry)
    w_full = np.sort(np.linalg.eigvalsh(T))
    unit_full = int((w_full > 1.0 - tol).sum())

    geo = Geometry(geometry, n)
    block_eigs = []
    unit_blocks = 0
    for t in sector_tuples(n, d, k):
        weight = 1
        for s in t.shapes:
            weight *= multiplicity(s, d)
        if weight == 0:
            continue
        block = step_channel(t, geo, "swap_only", k)
        w = np.linalg.eigvalsh(block.to_dense())
        block_eigs.extend(list(w) * weight)
        unit_blocks += weight * int((w > 1.0 - tol).sum())
    w_blocks = np.sort(np.array(block_eigs))
    spectrum_err = float(np.abs(w_blocks - w_full).max()) \
        if w_blocks.shape == w_full.shape else np.inf
    return {
        "unit_count_full": unit_full,
        "unit_count_blocks": unit_blocks,
        "spectrum_error": spectrum_err,
        "full_dim": T.shape[0],
    }


def pauli_swap_identity_error(d: int) -> float:
    """Entrywise error of (1/d) sum_P P (x) P^dagger = SWAP over the
    shift/clock (generalized Pauli) basis."""
    omega = np.exp(2j * np.pi / d)
    X = np.roll(np.eye(d), 1, axis=0)
    Z = np.diag(omega ** np.arange(d))
    acc = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            P = np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b)
            acc += np.kron(P, P.conj().T)
    acc /= d
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[i * d + j, j * d + i] = 1.0
    return float(np.abs(acc - swap).max())
