"""k-fold moment operators of one random-walk step, restricted to sector tuples.

A step of the random walk applies exp(-i t tau) for a transposition tau (and,
for the quadratic-charge ensemble, conjugates by exponentials of products of
two Jucys-Murphy elements).  Averaging the k-fold tensor action over the
uniform parameters gives, per tuple of 2k irrep factors (k ket copies, k
conjugated bra copies), a real symmetric block operator.  Blocks are held
dense below a size threshold and as matrix-free matvecs above it.

Factor order throughout: positions 0..k-1 are ket factors, k..2k-1 bra
factors.  All irrep matrices are real, so conjugated copies act by the same
matrices; the trigonometric averages below carry the relative signs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .partitions import Partition, dim_irrep, partitions
from .yor import IrrepAction, build_irrep, transposition_matrix

CHANNEL_KINDS = ("swap_only", "yjm_only", "cqa_step", "brickwork_step")
HAMILTONIAN_KINDS = ("bulk_hamiltonian", "all_to_all_hamiltonian")

DENSE_THRESHOLD = 4096      # blocks up to this dimension are materialized
DENSE_HARD_CAP = 8192       # refuse dense assembly beyond this dimension


class DenseCapError(MemoryError):
    """Dense assembly requested beyond the configured memory cap."""


@dataclass(frozen=True)
class SectorTuple:
    """k ket and k bra charge sectors, all partitions of the same n."""

    ket: tuple[Partition, ...]
    bra: tuple[Partition, ...]

    def __post_init__(self):
        if len(self.ket) != len(self.bra) or not self.ket:
            raise ValueError("need equally many ket and bra sectors")
        ns = {p.n for p in self.ket + self.bra}
        if len(ns) != 1:
            raise ValueError(f"mixed box counts in sector tuple: {ns}")

    @property
    def k(self) -> int:
        return len(self.ket)

    @property
    def n(self) -> int:
        return self.ket[0].n

    @property
    def shapes(self) -> tuple[Partition, ...]:
        return self.ket + self.bra

    def factor_dims(self) -> tuple[int, ...]:
        return tuple(dim_irrep(s) for s in self.shapes)

    def block_dim(self) -> int:
        out = 1
        for d in self.factor_dims():
            out *= d
        return out

    def __str__(self) -> str:
        return ";".join(",".join(str(p) for p in part) for part in (self.ket, self.bra))


@dataclass(frozen=True)
class Geometry:
    """Interaction layout of the circuit on n qudits."""

    variant: str   # open_chain | periodic_chain | all_to_all | brickwork
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2 qudits")
        if self.variant not in ("open_chain", "periodic_chain", "all_to_all", "brickwork"):
            raise ValueError(f"unknown geometry {self.variant!r}")

    def pair_set(self) -> list[tuple[int, int]]:
        if self.variant == "open_chain":
            return [(j, j + 1) for j in range(1, self.n)]
        if self.variant == "periodic_chain":
            return [(j, j + 1) for j in range(1, self.n)] + [(1, self.n)]
        if self.variant == "all_to_all":
            return [(i, j) for i in range(1, self.n + 1) for j in range(i + 1, self.n + 1)]
        raise ValueError("brickwork has no single pair set; use brickwork_step")


def rep_bundle(sector: SectorTuple) -> dict[Partition, IrrepAction]:
    return {s: build_irrep(s, s.n) for s in set(sector.shapes)}


# ---------------------------------------------------------------------------
# trigonometric averages of one pair twirl

def _double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def _trig_average(a: int, b: int) -> Fraction:
    """(1/2pi) integral of cos^a(t) sin^b(t) over a period; zero unless both even."""
    if a % 2 or b % 2:
        return Fraction(0)
    return Fraction(_double_factorial(a - 1) * _double_factorial(b - 1),
                    _double_factorial(a + b))


@lru_cache(maxsize=None)
def twirl_coefficients(k: int) -> dict[tuple[int, ...], Fraction]:
    """Exact expansion of the one-pair twirl over factor subsets.

    Averaging (cos t I - i sin t tau)^{x k} (x) (cos t I + i sin t tau)^{x k}
    term by term leaves, for each subset S of factor positions carrying tau,
    the coefficient (-1)^(|S|/2 + |S ket part|) * avg(cos^(2k-|S|) sin^|S|).
    Odd subset sizes integrate to zero, so the result is exactly real.
    """
    out: dict[tuple[int, ...], Fraction] = {}
    for size in range(0, 2 * k + 1, 2):
        w = _trig_average(2 * k - size, size)
        if w == 0:
            continue
        for S in itertools.combinations(range(2 * k), size):
            kets = sum(1 for p in S if p < k)
            out[S] = Fraction(-1) ** (size // 2 + kets) * w
    return out


# ---------------------------------------------------------------------------
# matrix-free application machinery

class _Factor:
    """Action of one transposition on one tensor axis."""

    def __init__(self, rep: IrrepAction, i: int, j: int):
        if j == i + 1:
            mix = rep.adj[i - 1]
            self._mix = mix
            self._dense = None
        else:
            self._mix = None
            self._dense = np.ascontiguousarray(transposition_matrix(rep, i, j))
        self.dim = rep.dim

    def apply(self, x: np.ndarray, axis: int) -> np.ndarray:
        if self._mix is not None:
            return kernels.apply_pair_mix(x, axis, self._mix.diag,
                                          self._mix.partner, self._mix.off)
        xm = np.moveaxis(x, axis, 0)
        y = np.tensordot(self._dense, xm, axes=(1, 0))
        return np.ascontiguousarray(np.moveaxis(y, 0, axis))

    def dense(self) -> np.ndarray:
        return self._mix.to_dense() if self._mix is not None else self._dense


class PairTwirlOp:
    """Matrix-free twirl of one transposition pair on a sector tuple."""

    # Blocks at or below this size keep a memo of partial factor products;
    # larger ones re-apply factors per term to bound peak memory.
    MEMO_LIMIT = 1 << 22

    def __init__(self, sector: SectorTuple, reps: dict[Partition, IrrepAction],
                 pair: tuple[int, int], k: int):
        i, j = pair
        n = sector.n
        if not (1 <= i < j <= n):
            raise IndexError(f"pair ({i},{j}) out of range for n={n}")
        self.sector = sector
        self.k = k
        self.factors = [_Factor(reps[s], i, j) for s in sector.shapes]
        self.dims = tuple(f.dim for f in self.factors)
        self.dim = int(np.prod(self.dims))
        self.terms = [(S, float(c)) for S, c in sorted(twirl_coefficients(k).items())]

    def apply_tensor(self, x: np.ndarray) -> np.ndarray:
        """Apply to a block tensor of shape dims (+ optional trailing batch)."""
        if self.dim <= self.MEMO_LIMIT:
            return self._apply_memo(x)
        return self._apply_lean(x)

    def _apply_memo(self, x):
        cache: dict[tuple[int, ...], np.ndarray] = {(): x}

        def partial(S: tuple[int, ...]) -> np.ndarray:
            if S not in cache:
                cache[S] = self.factors[S[0]].apply(partial(S[1:]), S[0])
            return cache[S]

        acc = np.zeros_like(x)
        for S, c in self.terms:
            acc += c * partial(S)
        return acc

    def _apply_lean(self, x):
        acc = np.zeros_like(x)
        for S, c in self.terms:
            y = x
            for pos in S:
                y = self.factors[pos].apply(y, pos)
            acc += c * y
        return acc

    def dense(self, hard_cap: int = DENSE_HARD_CAP) -> np.ndarray:
        if self.dim > hard_cap:
            raise DenseCapError(
                f"block dimension {self.dim} exceeds dense cap {hard_cap}")
        facs = [f.dense() for f in self.factors]
        eyes = [np.eye(d) for d in self.dims]
        M = np.zeros((self.dim, self.dim))
        for S, c in self.terms:
            term = np.ones((1, 1))
            for p in range(len(self.dims)):
                term = np.kron(term, facs[p] if p in S else eyes[p])
            M += c * term
        return M


# ---------------------------------------------------------------------------
# moment blocks

@dataclass
class MomentBlock:
    """One restricted moment operator: dense matrix or matrix-free matvec."""

    sector: SectorTuple
    kind: str
    dim: int
    dims: tuple[int, ...]
    dense: np.ndarray | None = None
    apply_fn: Callable[[np.ndarray], np.ndarray] | None = None
    apply_t_fn: Callable[[np.ndarray], np.ndarray] | None = None
    # Hamiltonian kinds: H = projector_count * I - sum of pair twirls; the
    # underlying channel average (sum / projector_count) is kept for
    # matrix-free eigen work on the complement.
    projector_count: int = 0
    channel_apply: Callable[[np.ndarray], np.ndarray] | None = None
    diagonal: np.ndarray | None = None   # set for yjm_only masks

    @property
    def is_symmetric(self) -> bool:
        return self.kind != "brickwork_step"

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Apply to one vector (dim,) or a batch (dim, b)."""
        if self.dense is not None:
            return self.dense @ v
        return self.apply_fn(v)

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        if self.dense is not None:
            return self.dense.T @ v
        if self.apply_t_fn is not None:
            return self.apply_t_fn(v)
        return self.apply_fn(v)

    def to_dense(self, hard_cap: int = DENSE_HARD_CAP) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        if self.dim > hard_cap:
            raise DenseCapError(f"{self.dim} exceeds dense cap {hard_cap}")
        return self.matvec(np.eye(self.dim))


def _tensorize(fn_on_tensor, dims):
    """Wrap a tensor-shaped application into a flat (dim,)/(dim,b) matvec."""

    def apply(v: np.ndarray) -> np.ndarray:
        v = np.ascontiguousarray(v, dtype=np.float64)
        if v.ndim == 1:
            return fn_on_tensor(v.reshape(dims)).reshape(-1)
        out = fn_on_tensor(v.reshape(dims + (v.shape[1],)))
        return out.reshape(-1, v.shape[1])

    return apply


def twirl_swap_k(sector: SectorTuple, reps: dict[Partition, IrrepAction] | None,
                 pair: tuple[int, int], k: int | None = None,
                 dense_threshold: int = DENSE_THRESHOLD) -> MomentBlock:
    """Moment block of one transposition twirl restricted to the tuple."""
    if k is None:
        k = sector.k
    if k != sector.k:
        raise ValueError(f"order k={k} does not match tuple with k={sector.k}")
    if reps is None:
        reps = rep_bundle(sector)
    op = PairTwirlOp(sector, reps, pair, k)
    if op.dim <= dense_threshold:
        return MomentBlock(sector, "swap_only", op.dim, op.dims, dense=op.dense())
    return MomentBlock(sector, "swap_only", op.dim, op.dims,
                       apply_fn=_tensorize(op.apply_tensor, op.dims))


def yjm_condition_mask(sector: SectorTuple, reps: dict[Partition, IrrepAction] | None = None,
                       include_squares: bool = True) -> np.ndarray:
    """0/1 diagonal of the quadratic Jucys-Murphy twirl in the tableau basis.

    A product basis vector (S_1..S_k, S'_1..S'_k) survives iff for every
    index pair (a, b) with 2 <= a <= b <= n the integer
    sum_i c_{S_i}(a) c_{S_i}(b) - sum_i c_{S'_i}(a) c_{S'_i}(b) vanishes
    (a < b only when include_squares is False; X_1 = 0 never contributes).
    The integer conditions are packed into radix-separated int64 lanes so the
    test stays exact on blocks too large to hold the full condition table.
    """
    if reps is None:
        reps = rep_bundle(sector)
    n = sector.n
    k = sector.k
    pairs = [(a, b) for a in range(2, n + 1) for b in range(a if include_squares else a + 1, n + 1)]
    if not pairs:
        return np.ones(sector.block_dim())

    # per-feature bound: |sum over 2k factors of c*c| <= 2k (n-1)^2
    bound = 2 * k * (n - 1) ** 2
    bits = max(2, int(np.ceil(np.log2(2 * bound + 1))) + 1)
    per_lane = max(1, 62 // bits)
    lanes = [pairs[i:i + per_lane] for i in range(0, len(pairs), per_lane)]

    dims = sector.factor_dims()
    dim = sector.block_dim()
    mask = np.ones(dim, dtype=bool)
    for lane in lanes:
        packed = []
        for pos, shape in enumerate(sector.shapes):
            C = reps[shape].yjm  # (n, dim_f) contents, row j-1 = X_j diagonal
            acc = np.zeros(C.shape[1], dtype=np.int64)
            for w, (a, b) in enumerate(lane):
                acc += (C[a - 1] * C[b - 1]) << (bits * w)
            packed.append(acc if pos < k else -acc)
        total = np.zeros(dim, dtype=np.int64).reshape(dims)
        for pos, vec in enumerate(packed):
            sh = [1] * len(dims)
            sh[pos] = dims[pos]
            total += vec.reshape(sh)
        mask &= (total.reshape(-1) == 0)
    return mask.astype(np.float64)


def twirl_yjm_k2(sector: SectorTuple, reps: dict[Partition, IrrepAction] | None = None,
                 order: int = 2, include_squares: bool = True,
                 dense_threshold: int = DENSE_THRESHOLD) -> MomentBlock:
    """Diagonal projection averaging quadratic Jucys-Murphy phase evolutions."""
    if order != sector.k:
        raise ValueError(f"order {order} does not match tuple k={sector.k}")
    mask = yjm_condition_mask(sector, reps, include_squares=include_squares)
    dims = sector.factor_dims()
    dim = sector.block_dim()
    if dim <= dense_threshold:
        return MomentBlock(sector, "yjm_only", dim, dims, dense=np.diag(mask),
                           diagonal=mask)

    def apply(v):
        return mask[:, None] * v if v.ndim == 2 else mask * v

    return MomentBlock(sector, "yjm_only", dim, dims, apply_fn=apply, diagonal=mask)


def _swap_average_op(sector, reps, pairs, k):
    ops = [PairTwirlOp(sector, reps, pr, k) for pr in pairs]
    inv = 1.0 / len(ops)

    def on_tensor(x):
        acc = ops[0].apply_tensor(x)
        for op in ops[1:]:
            acc += op.apply_tensor(x)
        acc *= inv
        return acc

    return ops, on_tensor


def step_channel(sector: SectorTuple, geometry: Geometry, ensemble: str = "swap_only",
                 k: int | None = None, reps: dict[Partition, IrrepAction] | None = None,
                 dense_threshold: int = DENSE_THRESHOLD,
                 include_squares: bool = True) -> MomentBlock:
    """One-step k-fold channel: uniform pair-twirl average, optionally
    conjugated by the quadratic charge projection ('cqa' ensemble)."""
    if k is None:
        k = sector.k
    if k != sector.k:
        raise ValueError(f"order k={k} does not match tuple with k={sector.k}")
    if geometry.variant == "brickwork":
        raise ValueError("brickwork geometry is handled by brickwork_step")
    if ensemble not in ("swap_only", "cqa"):
        raise ValueError(f"unknown ensemble {ensemble!r}")
    if geometry.n != sector.n:
        raise ValueError(f"geometry n={geometry.n} but tuple n={sector.n}")
    if reps is None:
        reps = rep_bundle(sector)
    pairs = geometry.pair_set()
    ops, on_tensor = _swap_average_op(sector, reps, pairs, k)
    dims = sector.factor_dims()
    dim = sector.block_dim()
    kind = "swap_only"
    mask = None
    if ensemble == "cqa":
        kind = "cqa_step"
        mask = yjm_condition_mask(sector, reps, include_squares=include_squares)
        mt = mask.reshape(dims)

        base = on_tensor

        def on_tensor(x):  # noqa: F811  (sandwich wraps the plain average)
            m = mt if x.ndim == len(dims) else mt[..., None]
            return m * base(m * x)

    if dim <= dense_threshold:
        M = np.zeros((dim, dim))
        for op in ops:
            M += op.dense()
        M /= len(ops)
        if mask is not None:
            M = mask[:, None] * M * mask[None, :]
        return MomentBlock(sector, kind, dim, dims, dense=M, diagonal=mask)
    return MomentBlock(sector, kind, dim, dims,
                       apply_fn=_tensorize(on_tensor, dims), diagonal=mask)


def brickwork_step(sector: SectorTuple, reps: dict[Partition, IrrepAction] | None = None,
                   k: int | None = None,
                   dense_threshold: int = DENSE_THRESHOLD) -> MomentBlock:
    """Product of the even and odd layer projections of a brickwork circuit.

    Each layer is the product of the (commuting) twirls of disjoint adjacent
    pairs, hence itself a projection; the product of the two layers is not
    symmetric in general and is assessed through singular values.
    """
    if k is None:
        k = sector.k
    n = sector.n
    if n < 3:
        raise ValueError("brickwork needs n >= 3")
    if reps is None:
        reps = rep_bundle(sector)
    odd = [(j, j + 1) for j in range(1, n, 2)]
    even = [(j, j + 1) for j in range(2, n, 2)]
    odd_ops = [PairTwirlOp(sector, reps, pr, k) for pr in odd]
    even_ops = [PairTwirlOp(sector, reps, pr, k) for pr in even]
    dims = sector.factor_dims()
    dim = sector.block_dim()

    def layer(ops, x):
        for op in ops:
            x = op.apply_tensor(x)
        return x

    def forward(x):
        return layer(even_ops, layer(odd_ops, x))

    def backward(x):
        return layer(odd_ops, layer(even_ops, x))

    if dim <= dense_threshold:
        M = _tensorize(forward, dims)(np.eye(dim))
        return MomentBlock(sector, "brickwork_step", dim, dims, dense=M)
    return MomentBlock(sector, "brickwork_step", dim, dims,
                       apply_fn=_tensorize(forward, dims),
                       apply_t_fn=_tensorize(backward, dims))


def pair_sum_hamiltonian(sector: SectorTuple, reps: dict[Partition, IrrepAction] | None,
                         pairs: Sequence[tuple[int, int]], kind: str,
                         k: int | None = None,
                         dense_threshold: int = DENSE_THRESHOLD) -> MomentBlock:
    """H = sum over pairs of (I - pair twirl); frustration-free and PSD."""
    if k is None:
        k = sector.k
    if reps is None:
        reps = rep_bundle(sector)
    ops, on_tensor = _swap_average_op(sector, reps, list(pairs), k)
    p = len(ops)
    dims = sector.factor_dims()
    dim = sector.block_dim()
    if dim <= dense_threshold:
        S = np.zeros((dim, dim))
        for op in ops:
            S += op.dense()
        H = p * np.eye(dim) - S
        return MomentBlock(sector, kind, dim, dims, dense=H, projector_count=p)

    channel = _tensorize(on_tensor, dims)

    def ham(v):
        return p * (np.asarray(v, dtype=np.float64) - channel(v))

    return MomentBlock(sector, kind, dim, dims, apply_fn=ham,
                       projector_count=p, channel_apply=channel)


def bulk_hamiltonian(sector: SectorTuple, reps: dict[Partition, IrrepAction] | None = None,
                     m: int = 2, j: int = 1,
                     dense_threshold: int = DENSE_THRESHOLD) -> MomentBlock:
    """Window Hamiltonian on m consecutive qudits starting at j: the m-1
    projections complementing the twirls of pairs (j,j+1)..(j+m-2,j+m-1)."""
    n = sector.n
    if m < 2 or j < 1 or j + m - 1 > n:
        raise ValueError(f"window m={m}, start j={j} out of range for n={n}")
    pairs = [(i, i + 1) for i in range(j, j + m - 1)]
    return pair_sum_hamiltonian(sector, reps, pairs, "bulk_hamiltonian",
                                dense_threshold=dense_threshold)


def all_to_all_hamiltonian(sector: SectorTuple,
                           reps: dict[Partition, IrrepAction] | None = None,
                           dense_threshold: int = DENSE_THRESHOLD) -> MomentBlock:
    """H = sum over all qudit pairs (i<j) of (I - pair twirl)."""
    pairs = Geometry("all_to_all", sector.n).pair_set()
    return pair_sum_hamiltonian(sector, reps, pairs, "all_to_all_hamiltonian",
                                dense_threshold=dense_threshold)


# ---------------------------------------------------------------------------
# tuple enumeration

def sector_tuples(n: int, d: int, k: int = 2) -> list[SectorTuple]:
    """All ordered 2k-tuples of charge sectors of n qudits (<= d rows)."""
    shapes = partitions(n, d)
    out = []
    for combo in itertools.product(shapes, repeat=2 * k):
        out.append(SectorTuple(ket=combo[:k], bra=combo[k:]))
    return out


def spectral_classes(tuples: Iterable[SectorTuple]) -> list[tuple[SectorTuple, int]]:
    """Group tuples sharing a spectrum; returns (representative, class size).

    Simultaneous reordering of ket and bra factors is a similarity transform,
    and exchanging the ket and bra lists transposes the (real) block, so both
    preserve spectra.
    """
    classes: dict[tuple, list[SectorTuple]] = {}
    for t in tuples:
        variants = []
        for perm in itertools.permutations(range(t.k)):
            kets = tuple(t.ket[i] for i in perm)
            bras = tuple(t.bra[i] for i in perm)
            variants.append((kets, bras))
            variants.append((bras, kets))
        key = min(tuple(p.parts for p in ks + bs) for ks, bs in variants)
        classes.setdefault(key, []).append(t)
    out = []
    for members in classes.values():
        rep = min(members, key=lambda t: tuple(p.parts for p in t.shapes))
        out.append((rep, len(members)))
    out.sort(key=lambda rc: tuple(p.parts for p in rc[0].shapes))
    return out


def tuple_weight(t: SectorTuple, d: int) -> int:
    """Multiplicity weight of the tuple inside the full qudit space."""
    from .partitions import multiplicity
    w = 1
    for s in t.shapes:
        w *= multiplicity(s, d)
    return w


def dump_coordinates(block: MomentBlock, tol: float = 0.0) -> str:
    """Coordinate-format text of a dense block, for debugging."""
    M = block.to_dense()
    lines = [f"# {block.kind} {block.sector} dim={block.dim}"]
    for i, j in zip(*np.nonzero(np.abs(M) > tol)):
        lines.append(f"{i} {j} {M[i, j]:.17g}")
    return "\n".join(lines) + "\n"
