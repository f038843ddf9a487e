"""Symmetric eigensolvers: dense LAPACK wrapper and a matrix-free Lanczos
with full reorthogonalization and orthogonal deflation.

The iterative path targets operators with spectrum in [0, 1] (one-step
channels, or channel complements of the frustration-free Hamiltonians) and
extracts the leading eigenvalues one at a time, deflating each converged
eigenpair so that degenerate unit clusters are counted reliably.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class IterationInfo:
    iterations: int
    residual: float
    converged: bool


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def lanczos_top(apply_fn, dim: int, seed: int = 0,
                deflate_vals: np.ndarray | None = None,
                deflate_vecs: np.ndarray | None = None,
                tol: float = 1e-8, max_krylov: int = 300,
                restarts: int = 20) -> tuple[float, np.ndarray, IterationInfo]:
    """Largest eigenvalue and vector of a symmetric operator, matrix-free.

    Full reorthogonalization keeps the Krylov basis orthonormal; previously
    converged eigenpairs are deflated by subtracting their spectral
    projections inside the matvec and re-projecting the basis.
    """
    rng = _rng(seed)
    max_krylov = min(max_krylov, dim)
    have_defl = deflate_vecs is not None and deflate_vecs.shape[1] > 0

    def op(v):
        w = apply_fn(v)
        if have_defl:
            w = w - deflate_vecs @ (deflate_vals * (deflate_vecs.T @ v))
        return w

    def project_out(v):
        if have_defl:
            v = v - deflate_vecs @ (deflate_vecs.T @ v)
        return v

    q = project_out(rng.standard_normal(dim))
    nrm = np.linalg.norm(q)
    if nrm < 1e-12:  # deflated space exhausts the block
        return -np.inf, np.zeros(dim), IterationInfo(0, 0.0, True)
    q /= nrm

    total_iters = 0
    theta, y = -np.inf, q
    for _ in range(restarts):
        Q = np.empty((dim, max_krylov))
        alphas = np.empty(max_krylov)
        betas = np.empty(max_krylov)
        Q[:, 0] = q
        k = 0
        residual = np.inf
        while k < max_krylov:
            w = op(Q[:, k])
            alphas[k] = Q[:, k] @ w
            w -= alphas[k] * Q[:, k]
            if k > 0:
                w -= betas[k - 1] * Q[:, k - 1]
            # full reorthogonalization (twice is enough)
            for _pass in range(2):
                w -= Q[:, :k + 1] @ (Q[:, :k + 1].T @ w)
                w = project_out(w)
            beta = np.linalg.norm(w)
            total_iters += 1
            k += 1
            T = np.diag(alphas[:k])
            if k > 1:
                T += np.diag(betas[:k - 1], 1) + np.diag(betas[:k - 1], -1)
            evals, evecs = np.linalg.eigh(T)
            theta = evals[-1]
            s = evecs[:, -1]
            residual = abs(beta * s[-1])
            if residual <= tol * max(1.0, abs(theta)) or beta < 1e-14:
                y = Q[:, :k] @ s
                y /= np.linalg.norm(y)
                return theta, y, IterationInfo(total_iters, residual, True)
            betas[k - 1] = beta
            if k < max_krylov:
                Q[:, k] = w / beta
        # restart from the best Ritz vector so far
        y = Q[:, :k] @ s
        q = project_out(y)
        q /= np.linalg.norm(q)
    return theta, y, IterationInfo(total_iters, residual, False)


def top_cluster(apply_fn, dim: int, stop_below: float, tol: float = 1e-8,
                max_count: int = 64, seed: int = 0,
                max_krylov: int = 300) -> tuple[list[float], np.ndarray, IterationInfo]:
    """Leading eigenvalues down to the first one below `stop_below`.

    Returns (values descending, matching vectors, info).  The list includes
    the first eigenvalue below the threshold when one exists, so callers get
    both the cluster and the next eigenvalue after it.
    """
    vals: list[float] = []
    vecs = np.empty((dim, 0))
    iters = 0
    residual = 0.0
    for _ in range(max_count):
        theta, y, info = lanczos_top(
            apply_fn, dim, seed=seed + len(vals),
            deflate_vals=np.array(vals), deflate_vecs=vecs,
            tol=tol, max_krylov=max_krylov)
        iters += info.iterations
        if not info.converged:
            return vals, vecs, IterationInfo(iters, info.residual, False)
        if theta == -np.inf:  # block exhausted
            break
        residual = info.residual
        vals.append(float(theta))
        vecs = np.hstack([vecs, y[:, None]])
        if theta < stop_below:
            break
    return vals, vecs, IterationInfo(iters, residual, True)


def unit_count_and_second(apply_fn, dim: int, unit_tol: float = 1e-6,
                          tol: float = 1e-8, seed: int = 0,
                          max_krylov: int = 300):
    """Count eigenvalues above 1 - unit_tol and find the next one below.

    Returns (unit_count, second_value_or_None, unit_vectors, info).
    """
    vals, vecs, info = top_cluster(apply_fn, dim, stop_below=1.0 - unit_tol,
                                   tol=tol, seed=seed, max_krylov=max_krylov)
    if not info.converged:
        raise RuntimeError(
            f"eigensolver stagnated: residual {info.residual:.2e} after "
            f"{info.iterations} iterations")
    unit = [v for v in vals if v > 1.0 - unit_tol]
    below = [v for v in vals if v <= 1.0 - unit_tol]
    second = below[0] if below else None
    return len(unit), second, vecs[:, :len(unit)], info
