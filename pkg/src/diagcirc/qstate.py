"""Dense statevectors, diagonal unitaries, reduced states and distances.

Basis states are indexed by an integer ``m`` whose binary digits give the
computational pattern, most significant bit first: qubit 1 is the MSB and
qubit ``n`` the LSB. Qubit indices in this package are 1-based.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ArgumentError, CapacityError, ShapeError

MAX_QUBITS = 14
TWO_PI = 2.0 * np.pi
EIG_CUTOFF = 1e-12


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def check_qubits(n: int, lo: int = 1) -> None:
    if not lo <= n <= MAX_QUBITS:
        raise CapacityError(f"qubit count {n} outside supported range [{lo}, {MAX_QUBITS}]",
                            module="qstate-core")


@dataclass(frozen=True, eq=False)
class PureState:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        check_qubits(self.n)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2 ** self.n,):
            raise ShapeError(f"expected {2 ** self.n} amplitudes, got shape {amps.shape}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > 1e-10:
            raise ArgumentError(f"state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def dim(self) -> int:
        return 2 ** self.n

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DiagonalUnitary:
    """``U = sum_m exp(i phases[m]) |m><m|`` with phases reduced to [0, 2pi)."""

    n: int
    phases: np.ndarray

    def __post_init__(self):
        check_qubits(self.n)
        ph = np.asarray(self.phases, dtype=float)
        if ph.shape != (2 ** self.n,):
            raise ShapeError(f"expected {2 ** self.n} phases, got shape {ph.shape}")
        object.__setattr__(self, "phases", _frozen(np.mod(ph, TWO_PI)))

    @classmethod
    def identity(cls, n: int) -> "DiagonalUnitary":
        return cls(n, np.zeros(2 ** n))

    def diagonal(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    def conj(self) -> "DiagonalUnitary":
        return DiagonalUnitary(self.n, -self.phases)

    def __matmul__(self, other: "DiagonalUnitary") -> "DiagonalUnitary":
        if other.n != self.n:
            raise ShapeError("cannot compose diagonals on different qubit counts")
        return DiagonalUnitary(self.n, self.phases + other.phases)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
            raise ShapeError(f"density matrix must be square, got shape {rho.shape}")
        if not np.allclose(rho, rho.conj().T, atol=1e-10, rtol=0):
            raise ArgumentError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-10:
            raise ArgumentError(f"density matrix trace is {np.trace(rho).real!r}")
        if rho.shape[0] <= 1024 and np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ArgumentError("density matrix is not positive semidefinite")
        object.__setattr__(self, "entries", _frozen(rho))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim)


def plus_state(n: int) -> PureState:
    check_qubits(n)
    d = 2 ** n
    return PureState(n, np.full(d, d ** -0.5, dtype=complex))


def basis_state(n: int, m: int) -> PureState:
    check_qubits(n)
    if not 0 <= m < 2 ** n:
        raise ArgumentError(f"basis index {m} out of range for {n} qubits")
    amps = np.zeros(2 ** n, dtype=complex)
    amps[m] = 1.0
    return PureState(n, amps)


def apply_diagonal(u: DiagonalUnitary, s: PureState) -> PureState:
    if u.n != s.n:
        raise ShapeError(f"diagonal acts on {u.n} qubits, state has {s.n}")
    return PureState(s.n, u.diagonal() * s.amplitudes)


def _normalize_sites(sites: Iterable[int], n: int) -> tuple[int, ...]:
    sites = tuple(sorted(set(int(q) for q in sites)))
    if not sites:
        raise ArgumentError("qubit set must be nonempty")
    if sites[0] < 1 or sites[-1] > n:
        raise ArgumentError(f"qubit set {sites} not within 1..{n}")
    return sites


def _bipartition(s: PureState, keep: tuple[int, ...]) -> np.ndarray:
    """Amplitudes as a (2^|keep|, 2^rest) matrix."""
    n = s.n
    keep_axes = [q - 1 for q in keep]
    rest_axes = [a for a in range(n) if a not in keep_axes]
    psi = s.amplitudes.reshape((2,) * n).transpose(keep_axes + rest_axes)
    return psi.reshape(2 ** len(keep_axes), 2 ** len(rest_axes))


def reduced_density(s: PureState, keep: Iterable[int]) -> DensityMatrix:
    """Partial trace of ``|s><s|`` onto the qubits in ``keep``.

    The kept qubits keep their relative order, so the result is indexed the
    same way as a state on ``len(keep)`` qubits.
    """
    keep = _normalize_sites(keep, s.n)
    a = _bipartition(s, keep)
    rho = a @ a.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy in bits; eigenvalues below 1e-12 are dropped."""
    lam = rho.eigenvalues()
    lam = lam[lam > EIG_CUTOFF]
    return float(-np.sum(lam * np.log2(lam)))


def entanglement_entropy(s: PureState, cut: Iterable[int]) -> float:
    cut = _normalize_sites(cut, s.n)
    if len(cut) == s.n:
        raise ArgumentError("cut must be a proper subset of the qubits")
    # Schmidt coefficients straight from the SVD; avoids forming rho.
    sv = np.linalg.svd(_bipartition(s, cut), compute_uv=False)
    lam = sv ** 2
    lam = lam[lam > EIG_CUTOFF]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))


def trace_distance(r1: DensityMatrix, r2: DensityMatrix) -> float:
    if r1.dim != r2.dim:
        raise ShapeError(f"dimension mismatch: {r1.dim} vs {r2.dim}")
    diff = r1.entries - r2.entries
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def fidelity(s1: PureState, s2: PureState) -> float:
    if s1.n != s2.n:
        raise ShapeError("states on different qubit counts")
    return float(abs(np.vdot(s1.amplitudes, s2.amplitudes)) ** 2)


def walsh_hadamard(vec: np.ndarray) -> np.ndarray:
    """Apply ``H^{(x)n}`` to a length-2^n vector in O(n 2^n)."""
    vec = np.asarray(vec, dtype=complex)
    d = vec.shape[0]
    n = d.bit_length() - 1
    if 2 ** n != d:
        raise ShapeError(f"length {d} is not a power of two")
    out = vec.reshape((2,) * n).copy() if n else vec.copy()
    for axis in range(n):
        a = np.take(out, 0, axis=axis)
        b = np.take(out, 1, axis=axis)
        out = np.stack([a + b, a - b], axis=axis)
    return out.reshape(d) / np.sqrt(d)
