"""Exact moment operators for diagonal ensembles and design checks.

For a diagonal ensemble the operator E[U^{(x)t} (x) (U^*)^{(x)t}] is itself
diagonal, with one entry per index tuple (a_1..a_t, b_1..b_t). A tuple is
packed into a single integer of 2tn bits: a_1 occupies the most significant
n bits, then a_2, ..., a_t, b_1, ..., b_t.

A uniform random phase averages to zero unless it cancels, so:

* random diagonal unitaries: the entry is 1 iff the multiset {a_k} equals
  the multiset {b_k}, else 0;
* the G_r circuit: the entry is the product over r-subsets S of the same
  indicator applied to the tuples restricted to S;
* the G_CZ circuit of length T: the entry is m^T, with m the per-step factor
  averaged over the random pair.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .circuits import gr_placements
from .errors import ArgumentError, CapacityError, NonConvergentError, ShapeError

ENTRY_BUDGET = 2 ** 24
DENSE_STATE_BUDGET = 4096
MULTISET_BUDGET = 2_000_000
EXACT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiagonalMomentVector:
    n: int
    t: int
    entries: np.ndarray

    @property
    def d(self) -> int:
        return 2 ** self.n

    def entry(self, a, b) -> float:
        return float(self.entries[pack_tuple(a, b, self.n)])


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    """E[|psi><psi|^{(x)t}] on (C^{2^n})^{(x)t}, copy 1 most significant."""

    n: int
    t: int
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries)
        D = 2 ** (self.n * self.t)
        if m.shape != (D, D):
            raise ShapeError(f"moment matrix for n={self.n}, t={self.t} must be {D}x{D}")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ArgumentError("moment matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ArgumentError("moment matrix must have unit trace")
        if D <= 256 and np.linalg.eigvalsh(m).min() < -1e-10:
            raise ArgumentError("moment matrix is not positive semidefinite")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class DesignReport:
    n: int
    t: int
    ensemble: str
    distance: float
    is_exact: bool
    norm: str = "max-abs"
    witness: tuple | None = None

    def to_dict(self) -> dict:
        return {"n": self.n, "t": self.t, "ensemble": self.ensemble, "norm": self.norm,
                "distance": self.distance, "is_exact": self.is_exact}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ---------------------------------------------------------------------------
# tuple packing


def pack_tuple(a, b, n: int) -> int:
    idx = 0
    for x in tuple(a) + tuple(b):
        if not 0 <= x < 2 ** n:
            raise ArgumentError(f"index {x} out of range for n={n}")
        idx = (idx << n) | int(x)
    return idx


def unpack_digits(idx: np.ndarray, n: int, width: int) -> np.ndarray:
    """Split packed indices into ``width`` base-2^n digits, most significant first."""
    idx = np.asarray(idx, dtype=np.int64)
    mask = (1 << n) - 1
    shifts = n * np.arange(width - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] >> shifts[None, :]) & mask


def _check_entry_budget(n: int, t: int) -> None:
    if n < 1 or t < 1:
        raise ArgumentError("n and t must be positive")
    if 2 * t * n > 24:
        raise CapacityError(f"2^(2tn) = 2^{2 * t * n} entries exceed the 2^24 budget; "
                            "use is_exact_design", module="moments")


def _multiset_equal(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.all(np.sort(a, axis=1) == np.sort(b, axis=1), axis=1)


def _site_masks(n: int, r: int) -> list[int]:
    return [sum(1 << (n - q) for q in s) for s in gr_placements(n, r)]


def _chunks(total: int, size: int = 1 << 20) -> Iterator[np.ndarray]:
    for start in range(0, total, size):
        yield np.arange(start, min(total, start + size), dtype=np.int64)


# ---------------------------------------------------------------------------
# dense diagonal moments


def diag_target_moment(n: int, t: int) -> DiagonalMomentVector:
    """Moment of the random diagonal-unitary ensemble (multiset rule)."""
    _check_entry_budget(n, t)
    out = np.empty(2 ** (2 * t * n))
    for idx in _chunks(out.size):
        dig = unpack_digits(idx, n, 2 * t)
        out[idx] = _multiset_equal(dig[:, :t], dig[:, t:])
    return DiagonalMomentVector(n, t, out)


def _gr_indicator(dig: np.ndarray, t: int, masks: list[int]) -> np.ndarray:
    ok = np.ones(dig.shape[0], dtype=bool)
    for m in masks:
        restricted = dig & m
        ok &= _multiset_equal(restricted[:, :t], restricted[:, t:])
    return ok


def gr_circuit_moment(n: int, r: int, t: int) -> DiagonalMomentVector:
    """Exact moment of the G_r phase-random circuit (no sampling)."""
    _check_entry_budget(n, t)
    masks = _site_masks(n, r)
    out = np.empty(2 ** (2 * t * n))
    for idx in _chunks(out.size):
        out[idx] = _gr_indicator(unpack_digits(idx, n, 2 * t), t, masks)
    return DiagonalMomentVector(n, t, out)


def exact_design_predicate(n: int, r: int, t: int) -> bool:
    """Whether G_r on n qubits is an exact diagonal-unitary t-design (closed form)."""
    if t >= 2 ** n:
        return r == n
    return r > math.log2(t)


def _multiset_signature_collision(n: int, r: int, t: int):
    """Find two distinct t-multisets whose restrictions agree on every r-subset.

    Returns the colliding pair or None. The circuit entry of a tuple depends
    only on the multisets of its a- and b-halves, and target entries are 1
    exactly on equal multisets, so a collision is the same thing as a
    nonzero deviation from the target.
    """
    d = 2 ** n
    if math.comb(d + t - 1, t) > MULTISET_BUDGET:
        raise CapacityError(f"{math.comb(d + t - 1, t)} multisets exceed the budget",
                            module="moments")
    masks = _site_masks(n, r)
    seen: dict[tuple, tuple[int, ...]] = {}
    for ms in itertools.combinations_with_replacement(range(d), t):
        key = tuple(tuple(sorted(x & m for x in ms)) for m in masks)
        other = seen.get(key)
        if other is not None:
            return other, ms
        seen[key] = ms
    return None


def _sweep_mismatch(n: int, r: int, t: int, chunk: int = 1 << 18):
    """Streamed scan of all 2^(2tn) tuples; stops at the first mismatch."""
    if 2 * t * n > 32:
        raise CapacityError(f"sweep over 2^{2 * t * n} tuples is infeasible", module="moments")
    masks = _site_masks(n, r)
    for idx in _chunks(2 ** (2 * t * n), chunk):
        dig = unpack_digits(idx, n, 2 * t)
        target = _multiset_equal(dig[:, :t], dig[:, t:])
        circuit = _gr_indicator(dig, t, masks)
        bad = np.flatnonzero(circuit != target)
        if bad.size:
            row = dig[bad[0]]
            return tuple(int(x) for x in row[:t]), tuple(int(x) for x in row[t:])
    return None


def is_exact_design(n: int, r: int, t: int, method: str = "multiset") -> DesignReport:
    """Decide whether G_r is an exact diagonal-unitary t-design.

    ``method="multiset"`` hashes restricted multisets (fast, any feasible
    grid point); ``method="sweep"`` streams over every index tuple and is
    kept as an independent cross-check for small sizes.
    """
    if not 1 <= r <= n:
        raise ArgumentError(f"arity r={r} must satisfy 1 <= r <= n={n}")
    if t < 1:
        raise ArgumentError("t must be positive")
    if method == "multiset":
        hit = _multiset_signature_collision(n, r, t)
    elif method == "sweep":
        hit = _sweep_mismatch(n, r, t)
    else:
        raise ArgumentError(f"unknown method {method!r}")
    distance = 0.0 if hit is None else 1.0
    return DesignReport(n, t, f"Gr(r={r})", distance, distance <= EXACT_TOL, witness=hit)


def max_abs_distance(m1: DiagonalMomentVector, m2: DiagonalMomentVector) -> float:
    if (m1.n, m1.t) != (m2.n, m2.t):
        raise ShapeError("moment vectors differ in n or t")
    return float(np.max(np.abs(m1.entries - m2.entries)))


# ---------------------------------------------------------------------------
# G_CZ circuit


@lru_cache(maxsize=None)
def _gcz_step_factors(n: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Per-tuple step-factor numerators for t=2 and the target indicator.

    Returns (numerators, target, pair_count): the step factor for a tuple
    (a, b, c, d) is numerators / pair_count, an exact integer ratio.
    """
    if n < 2:
        raise ArgumentError("G_CZ needs at least two qubits")
    if 4 * n > 24:
        raise CapacityError(f"t=2 tuple sweep over 2^{4 * n} tuples exceeds the budget",
                            module="moments")
    idx = np.arange(2 ** (4 * n), dtype=np.int64)
    dig = unpack_digits(idx, n, 4)
    a, b, c, d = (dig[:, k] for k in range(4))
    bits = [[(x >> (n - q)) & 1 for x in (a, b, c, d)] for q in range(1, n + 1)]
    balanced = [(ba + bb) == (bc + bd) for ba, bb, bc, bd in bits]
    num = np.zeros(idx.size, dtype=np.int64)
    pairs = gr_placements(n, 2)
    for i, j in pairs:
        bi, bj = bits[i - 1], bits[j - 1]
        parity = (bi[0] & bj[0]) ^ (bi[1] & bj[1]) ^ (bi[2] & bj[2]) ^ (bi[3] & bj[3])
        f = (balanced[i - 1] & balanced[j - 1]).astype(np.int64) * (1 - 2 * parity)
        num += f
    target = _multiset_equal(dig[:, :2], dig[:, 2:])
    num.setflags(write=False)
    target.setflags(write=False)
    return num, target, len(pairs)


def gcz_step_factor(n: int, a: int, b: int, c: int, d: int) -> float:
    num, _, p = _gcz_step_factors(n)
    return num[pack_tuple((a, b), (c, d), n)] / p


def gcz_slowest_mode(n: int) -> float:
    """Largest |m| over tuples whose target entry is 0."""
    num, target, p = _gcz_step_factors(n)
    return float(np.max(np.abs(num[~target]))) / p


def gcz_moment(n: int, length: int) -> DiagonalMomentVector:
    num, _, p = _gcz_step_factors(n)
    return DiagonalMomentVector(n, 2, (num / p) ** length)


def gcz_epsilon(n: int, length: int) -> float:
    """Max-abs deviation of the length-T G_CZ moment from the target (t=2)."""
    if length < 0:
        raise ArgumentError("circuit length must be nonnegative")
    num, target, p = _gcz_step_factors(n)
    # m^T for each distinct numerator; target tuples have num == p exactly
    vals, inverse = np.unique(num, return_inverse=True)
    powered = (vals / p) ** length
    dev = np.abs(powered[inverse] - target)
    return float(dev.max())


def t_conv(n: int, eps: float) -> int:
    """Smallest length T with gcz_epsilon(n, T) <= eps (binary search)."""
    if not 0 < eps <= 1:
        raise ArgumentError("eps must lie in (0, 1]")
    if gcz_epsilon(n, 0) <= eps:
        return 0
    if gcz_slowest_mode(n) >= 1.0:
        raise NonConvergentError(
            f"G_CZ on n={n} qubits has a non-target moment of modulus 1; "
            "its distance to the target never decreases")
    hi = 1
    while gcz_epsilon(n, hi) > eps:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if gcz_epsilon(n, mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# state moments


def _check_state_budget(n: int, t: int) -> None:
    if n < 1 or t < 1:
        raise ArgumentError("n and t must be positive")
    if n * t > 12:
        raise CapacityError(f"moment dimension 2^{n * t} exceeds the dense budget of "
                            f"{DENSE_STATE_BUDGET}", module="moments")


def copy_permutation(n: int, perm: tuple[int, ...]) -> np.ndarray:
    """Permutation operator sending copy k of (C^{2^n})^{(x)t} to copy perm[k]."""
    t = len(perm)
    D = 2 ** (n * t)
    dig = unpack_digits(np.arange(D), n, t)
    moved = np.empty_like(dig)
    moved[:, list(perm)] = dig
    dest = np.zeros(D, dtype=np.int64)
    for k in range(t):
        dest = (dest << n) | moved[:, k]
    P = np.zeros((D, D))
    P[dest, np.arange(D)] = 1.0
    return P


def haar_state_moment(n: int, t: int) -> MomentMatrix:
    """Symmetric-subspace projector normalized by its rank C(2^n + t - 1, t)."""
    _check_state_budget(n, t)
    D = 2 ** (n * t)
    acc = np.zeros((D, D))
    perms = list(itertools.permutations(range(t)))
    for perm in perms:
        acc += copy_permutation(n, perm)
    acc /= len(perms)
    return MomentMatrix(n, t, acc / math.comb(2 ** n + t - 1, t))


def moment_distance(m1: MomentMatrix, m2: MomentMatrix) -> float:
    """Trace norm of the difference (not halved)."""
    if m1.entries.shape != m2.entries.shape:
        raise ShapeError(f"shape mismatch {m1.entries.shape} vs {m2.entries.shape}")
    diff = m1.entries - m2.entries
    diff = 0.5 * (diff + diff.conj().T)
    return float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
