"""State designs generated by diagonal unitaries acting on |+>^n.

Every moment operator here is block diagonal over multiset classes of index
tuples: both the phase-random moment and the symmetric projector only
connect tuples that are rearrangements of each other, and on each class
both are constant. That gives the closed form in :func:`eta_class_sum`,
which serves as an eigendecomposition-free cross-check of
:func:`eta_exact`.
"""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .circuits import GateSetSpec, RngLike, instance_to_diagonal, make_rng, sample_instance
from .errors import ArgumentError, ConfigurationError
from .moments import (
    MomentMatrix,
    _check_state_budget,
    haar_state_moment,
    is_exact_design,
    moment_distance,
    unpack_digits,
    DiagonalMomentVector,
)
from .qstate import PureState, apply_diagonal, basis_state, check_qubits, plus_state


@dataclass(frozen=True)
class StateEnsembleSpec:
    kind: str  # "PhaseRandomFromPlus" | "HaarRandom" | "Protocol2Design"
    n: int

    def __post_init__(self):
        if self.kind not in ("PhaseRandomFromPlus", "HaarRandom", "Protocol2Design"):
            raise ArgumentError(f"unknown state ensemble {self.kind!r}")
        check_qubits(self.n)

    def moment(self, t: int) -> MomentMatrix:
        if self.kind == "PhaseRandomFromPlus":
            return phase_random_moment(self.n, t)
        if self.kind == "HaarRandom":
            return haar_state_moment(self.n, t)
        if t != 2:
            raise ArgumentError("the mixing protocol is defined for t = 2")
        return protocol_moment(self.n)


@dataclass(frozen=True)
class EtaResult:
    n: int
    t: int
    exact_distance: float
    leading_term: float

    @property
    def ratio(self) -> float:
        """Distance scaled by 2^n; tends to t(t-1)."""
        return self.exact_distance * 2 ** self.n

    def row(self) -> dict:
        return {"n": self.n, "t": self.t, "exact_distance": self.exact_distance,
                "leading_term": self.leading_term, "ratio": self.ratio}


def _same_multiset_matrix(n: int, t: int) -> np.ndarray:
    D = 2 ** (n * t)
    keys = np.sort(unpack_digits(np.arange(D), n, t), axis=1)
    # ranks of sorted digit rows give a class label per tuple
    _, label = np.unique(keys, axis=0, return_inverse=True)
    label = label.ravel()
    return (label[:, None] == label[None, :]).astype(float)


def phase_random_moment(n: int, t: int) -> MomentMatrix:
    """E[(U|+><+|U^dag)^{(x)t}] for random diagonal U, in closed form."""
    _check_state_budget(n, t)
    return MomentMatrix(n, t, _same_multiset_matrix(n, t) / 2 ** (n * t))


def state_moment_from_diagonal(dm: DiagonalMomentVector) -> MomentMatrix:
    """State moment of {U|+>^n} given the diagonal moment of the ensemble of U."""
    _check_state_budget(dm.n, dm.t)
    D = 2 ** (dm.n * dm.t)
    return MomentMatrix(dm.n, dm.t, dm.entries.reshape(D, D) / D)


def basis_state_moment(n: int, t: int) -> MomentMatrix:
    """Moment of a uniformly random computational basis state."""
    _check_state_budget(n, t)
    d = 2 ** n
    D = d ** t
    rep = sum(d ** k for k in range(t))  # index of |m>^{(x)t} is m * rep
    out = np.zeros((D, D))
    diag = np.arange(d) * rep
    out[diag, diag] = 1.0 / d
    return MomentMatrix(n, t, out)


def mixed_moment(n: int, t: int, basis_weight: float) -> MomentMatrix:
    if not 0 <= basis_weight <= 1:
        raise ArgumentError("mixing weight must lie in [0, 1]")
    pr = phase_random_moment(n, t).entries
    bs = basis_state_moment(n, t).entries
    return MomentMatrix(n, t, (1 - basis_weight) * pr + basis_weight * bs)


def protocol_weights(n: int) -> tuple[float, float]:
    """(basis-state branch, diagonal-design branch) probabilities."""
    d = 2 ** n
    return 1.0 / (d + 1), d / (d + 1.0)


def protocol_moment(n: int) -> MomentMatrix:
    p_basis, _ = protocol_weights(n)
    return mixed_moment(n, 2, p_basis)


def eta_exact(n: int, t: int) -> EtaResult:
    dist = moment_distance(phase_random_moment(n, t), haar_state_moment(n, t))
    return EtaResult(n, t, dist, t * (t - 1) / 2 ** n)


def _partitions(t: int, largest: int | None = None):
    largest = t if largest is None else largest
    if t == 0:
        yield ()
        return
    for first in range(min(t, largest), 0, -1):
        for rest in _partitions(t - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def multiset_class_groups(n: int, t: int) -> tuple[tuple[int, int, bool], ...]:
    """(class size K, number of classes, all-equal flag) per multiplicity pattern.

    A t-multiset over [2^n] with multiplicity pattern lambda (a partition of
    t into k parts) has K = t! / prod(lambda_i!) rearrangements, and there are
    C(d, k) k! / prod_j(#parts equal to j)! such multisets.
    """
    d = 2 ** n
    out = []
    for lam in _partitions(t):
        k = len(lam)
        K = math.factorial(t) // math.prod(math.factorial(x) for x in lam)
        count = math.comb(d, k) * math.factorial(k)
        for c in Counter(lam).values():
            count //= math.factorial(c)
        if count:
            out.append((K, count, k == 1))
    return tuple(out)


def eta_class_sum(n: int, t: int, basis_weight: float = 0.0) -> float:
    """Trace distance to the Haar moment by summing rank-one class blocks.

    On a class of K rearrangements, the phase-random block is d^-t J, the
    basis-state block is J/d on all-equal classes (K = 1), and the Haar block
    is J / (K C(d+t-1, t)), with J the all-ones matrix. A block c J has trace
    norm K |c|.
    """
    d = 2 ** n
    rank = math.comb(d + t - 1, t)
    total = 0.0
    for K, count, all_equal in multiset_class_groups(n, t):
        c = (1 - basis_weight) / d ** t + (basis_weight / d if all_equal else 0.0)
        total += count * K * abs(c - 1.0 / (K * rank))
    return total


def best_mixing_improvement(n: int, t: int, grid: int = 2001) -> tuple[float, float]:
    """Largest drop in distance obtainable by mixing in basis states.

    Scans the basis weight over [0, 1] on the class-sum closed form, then
    refines around the best grid point. Returns (improvement, weight).
    """
    base = eta_class_sum(n, t)
    ws = np.linspace(0.0, 1.0, grid)
    vals = np.array([eta_class_sum(n, t, w) for w in ws])
    k = int(np.argmin(vals))
    lo, hi = ws[max(k - 1, 0)], ws[min(k + 1, grid - 1)]
    res = minimize_scalar(lambda w: eta_class_sum(n, t, w), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    best = min(vals[k], res.fun)
    w = ws[k] if vals[k] <= res.fun else res.x
    return base - best, float(w)


def sample_protocol_state(n: int, source: GateSetSpec, rng: RngLike = None) -> PureState:
    """Draw one state from the basis-state / diagonal-2-design mixture."""
    check_qubits(n)
    if source.kind != "Gr" or not is_exact_design(n, source.r, 2).is_exact:
        raise ConfigurationError(
            f"{source.describe()} on {n} qubits is not an exact diagonal-unitary 2-design")
    gen = make_rng(rng)
    p_basis, _ = protocol_weights(n)
    if gen.random() < p_basis:
        return basis_state(n, int(gen.integers(0, 2 ** n)))
    u = instance_to_diagonal(sample_instance(n, source, gen))
    return apply_diagonal(u, plus_state(n))


def eta_scan_csv(results: list[EtaResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "t", "exact_distance", "leading_term", "ratio"])
    for res in results:
        w.writerow([res.n, res.t, f"{res.exact_distance:.17g}", f"{res.leading_term:.17g}",
                    f"{res.ratio:.17g}"])
    return buf.getvalue()
