"""Thermalizing classical Hamiltonians with random phases and phase estimation.

The algorithm runs on n = n_S + n_B system/bath qubits plus r ancillas:

1. random diagonal phases on |+>^n;
2. phase estimation writes an r-bit estimate of each (rescaled) energy onto
   the ancilla register;
3. the ancillas are measured with {P_E, 1 - P_E}, where P_E accepts readings
   whose decoded energy lies in the shell window (E - delta, E);
4. inverse phase estimation returns the ancillas (approximately) to |+>^r.

Energies are rescaled to phases by e -> (e - e_min) / (e_max - e_min) *
(1 - 2^-r), so every phase lies on [0, 1) and the top of the spectrum sits
on the last grid point. Everything is simulated densely; the measurement
branch is chosen with the exact branch probability.
"""
from __future__ import annotations

import json
import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .circuits import GateSetSpec, RngLike, instance_to_diagonal, make_rng, random_diagonal, sample_instance
from .errors import ArgumentError, CalibrationError, CapacityError, EmptyShellError
from .qstate import DensityMatrix, PureState, check_qubits, trace_distance

WINDOW_TOL = 1e-9
JOINT_BUDGET = 2 ** 24


@dataclass(frozen=True, eq=False)
class ClassicalHamiltonian:
    """A Hamiltonian diagonal in the computational basis.

    ``couplings`` holds (i, j, J) terms J sigma_i sigma_j and ``fields``
    holds (i, h) terms h sigma_i, both with 1-based sites, when the
    Hamiltonian was built from a spin model. They are optional; ``energies``
    is authoritative.
    """

    n: int
    energies: np.ndarray
    couplings: tuple[tuple[int, int, float], ...] = ()
    fields: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        check_qubits(self.n)
        e = np.asarray(self.energies, dtype=float)
        if e.shape != (2 ** self.n,):
            raise ArgumentError(f"expected {2 ** self.n} energies, got {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)

    @classmethod
    def from_terms(cls, n: int, couplings=(), fields=()) -> "ClassicalHamiltonian":
        sigma = _spin_table(n)
        e = np.zeros(2 ** n)
        for i, j, J in couplings:
            e += J * sigma[:, i - 1] * sigma[:, j - 1]
        for i, h in fields:
            e += h * sigma[:, i - 1]
        return cls(n, e, tuple((int(i), int(j), float(J)) for i, j, J in couplings),
                   tuple((int(i), float(h)) for i, h in fields))

    def restrict(self, sites) -> "ClassicalHamiltonian":
        """The terms supported entirely inside ``sites``, relabelled 1..len(sites)."""
        if not self.couplings and not self.fields and np.any(self.energies != 0):
            raise ArgumentError("restriction needs the Hamiltonian's term structure")
        sites = sorted(sites)
        relabel = {q: k + 1 for k, q in enumerate(sites)}
        couplings = [(relabel[i], relabel[j], J) for i, j, J in self.couplings
                     if i in relabel and j in relabel]
        fields = [(relabel[i], h) for i, h in self.fields if i in relabel]
        return ClassicalHamiltonian.from_terms(len(sites), couplings, fields)

    @property
    def e_min(self) -> float:
        return float(self.energies.min())

    @property
    def e_max(self) -> float:
        return float(self.energies.max())


@dataclass(frozen=True)
class SystemSplit:
    n_S: int
    n_B: int

    def __post_init__(self):
        if self.n_S < 1 or self.n_B < 1:
            raise ArgumentError("system and bath each need at least one qubit")

    @property
    def n(self) -> int:
        return self.n_S + self.n_B

    @property
    def system_sites(self) -> tuple[int, ...]:
        return tuple(range(1, self.n_S + 1))


@dataclass(frozen=True, eq=False)
class EnergyShell:
    n: int
    E: float
    delta: float
    members: np.ndarray

    @property
    def d_E(self) -> int:
        return int(self.members.size)


@dataclass(eq=False)
class ThermalizeOutcome:
    success: bool
    success_probability: float
    r: int
    split: SystemSplit
    state: PureState | None = None
    joint: np.ndarray | None = None
    leakage: float | None = None
    warnings: list[str] = field(default_factory=list)

    def reduced_system(self) -> DensityMatrix:
        """State of S after tracing out the bath and the ancilla register."""
        if self.joint is None:
            raise ArgumentError("no post-measurement state on a failed run")
        dS, dB = 2 ** self.split.n_S, 2 ** self.split.n_B
        psi = self.joint.reshape(dS, dB * self.joint.shape[1])
        rho = psi @ psi.conj().T
        return DensityMatrix(0.5 * (rho + rho.conj().T) / np.trace(rho).real)


def _spin_table(n: int) -> np.ndarray:
    s = np.arange(2 ** n)[:, None]
    shifts = n - np.arange(1, n + 1)[None, :]
    return 1 - 2 * ((s >> shifts) & 1)


def ising_chain(n: int, J: float, h: float, periodic: bool = False) -> ClassicalHamiltonian:
    """J sum sigma_i sigma_{i+1} + h sum sigma_i with sigma_i = (-1)^{s_i}."""
    if n < 2:
        raise ArgumentError("an Ising chain needs at least two sites")
    bonds = [(i, i + 1, J) for i in range(1, n)]
    if periodic and n > 2:
        bonds.append((n, 1, J))
    return ClassicalHamiltonian.from_terms(n, bonds, [(i, h) for i in range(1, n + 1)])


def _in_window(e: np.ndarray, E: float, delta: float) -> np.ndarray:
    # open window; energies within WINDOW_TOL of an edge count as on the edge
    return (e > E - delta + WINDOW_TOL) & (e < E - WINDOW_TOL)


def energy_shell(h: ClassicalHamiltonian, E: float, delta: float) -> EnergyShell:
    if delta <= 0:
        raise ArgumentError("shell width must be positive")
    members = np.flatnonzero(_in_window(h.energies, E, delta))
    if members.size == 0:
        raise EmptyShellError(f"no eigenstates with {E - delta} < e < {E}")
    members.setflags(write=False)
    return EnergyShell(h.n, float(E), float(delta), members)


def ideal_shell_state(shell: EnergyShell, rng: RngLike = None) -> PureState:
    if shell.d_E == 0:
        raise EmptyShellError("empty shell")
    phases = make_rng(rng).uniform(0.0, 2 * np.pi, size=shell.d_E)
    amps = np.zeros(2 ** shell.n, dtype=complex)
    amps[shell.members] = np.exp(1j * phases) / np.sqrt(shell.d_E)
    return PureState(shell.n, amps)


def gibbs_state(hS: ClassicalHamiltonian, beta: float) -> DensityMatrix:
    if not np.isfinite(beta):
        raise ArgumentError("beta must be finite")
    w = np.exp(-beta * (hS.energies - (hS.e_min if beta >= 0 else hS.e_max)))
    return DensityMatrix(np.diag(w / w.sum()))


def gibbs_mean_energy(h: ClassicalHamiltonian, beta: float) -> float:
    e = h.energies
    w = np.exp(-beta * (e - e.min()))
    return float(np.dot(w, e) / w.sum())


def calibrate_beta(h: ClassicalHamiltonian, E: float, delta: float = 0.0) -> float:
    """Inverse temperature whose Gibbs mean energy is the window midpoint E - delta/2."""
    target = E - delta / 2
    mean = float(h.energies.mean())
    scale = max(1.0, abs(mean))
    if abs(target - mean) <= 1e-12 * scale:
        return 0.0
    if target > mean or target <= h.e_min:
        raise CalibrationError(
            f"target energy {target} outside the positive-beta range ({h.e_min}, {mean}]")
    hi = 1.0
    while gibbs_mean_energy(h, hi) > target:
        hi *= 2.0
        if hi > 1e8:
            raise CalibrationError("target energy too close to the ground energy")
    return float(bisect(lambda b: gibbs_mean_energy(h, b) - target, 0.0, hi,
                        xtol=1e-15, rtol=1e-8))


def min_gap(h: ClassicalHamiltonian) -> float | None:
    """Smallest gap between distinct energies, or None for a constant spectrum."""
    levels = np.unique(h.energies)
    gaps = np.diff(levels)
    gaps = gaps[gaps > WINDOW_TOL]
    return float(gaps.min()) if gaps.size else None


def recommend_ancillas(h: ClassicalHamiltonian) -> int:
    """Smallest r with 2^-r <= (normalized gap) / 8."""
    gap = min_gap(h)
    if gap is None:
        return 1
    target = gap / (h.e_max - h.e_min) / 8
    return max(1, int(np.ceil(-np.log2(target))))


def energy_to_phase(h: ClassicalHamiltonian, r: int):
    """Affine map energy -> phase in [0, 1) and its inverse on the ancilla grid."""
    span = h.e_max - h.e_min
    scale = (1 - 2.0 ** -r) / span if span > 0 else 0.0
    phases = (h.energies - h.e_min) * scale
    grid = np.arange(2 ** r) / 2 ** r
    decoded = h.e_min + (grid / scale if scale > 0 else 0.0 * grid)
    return phases, decoded, scale


def qpe_forward(system: np.ndarray, phases: np.ndarray, r: int) -> np.ndarray:
    """Phase estimation with ancillas starting in |+>^r.

    ``system`` holds system amplitudes per basis state; returns the joint
    amplitudes indexed [basis state, ancilla reading].
    """
    N = 2 ** r
    ramp = np.exp(2j * np.pi * np.outer(phases, np.arange(N)))
    return system[:, None] * np.fft.fft(ramp / np.sqrt(N), axis=1, norm="ortho")


def qpe_inverse(joint: np.ndarray, phases: np.ndarray, r: int) -> np.ndarray:
    N = 2 ** r
    ramp = np.exp(-2j * np.pi * np.outer(phases, np.arange(N)))
    return ramp * np.fft.ifft(joint, axis=1, norm="ortho")


def qpe_kernel(phase: float, r: int) -> np.ndarray:
    """Closed-form reading amplitudes (1/N) sum_j exp(2 pi i j (phase - k/N))."""
    N = 2 ** r
    k = np.arange(N)
    j = np.arange(N)
    return np.exp(2j * np.pi * np.outer(phase - k / N, j)).sum(axis=1) / N


def qpe_thermalize(h: ClassicalHamiltonian, split: SystemSplit, E: float, delta: float,
                   r: int, rng: RngLike = None,
                   phase_source: GateSetSpec | None = None) -> ThermalizeOutcome:
    if split.n != h.n:
        raise ArgumentError(f"split covers {split.n} qubits, Hamiltonian has {h.n}")
    if r < 1:
        raise ArgumentError("need at least one ancilla")
    if 2 ** (h.n + r) > JOINT_BUDGET:
        raise CapacityError(f"joint register of 2^{h.n + r} amplitudes exceeds the budget",
                            module="thermo")
    energy_shell(h, E, delta)  # raises on an empty window
    gen = make_rng(rng)
    notes: list[str] = []

    phases, decoded, scale = energy_to_phase(h, r)
    if scale > 0 and 2.0 ** -r >= delta * scale:
        msg = (f"precision: grid spacing 2^-{r} is not below the normalized shell width "
               f"{delta * scale:.3g}")
        notes.append(msg)
        _warnings.warn(msg, RuntimeWarning, stacklevel=2)
    accept = _in_window(decoded, E, delta)

    # step 1: random diagonal phases on |+>^n
    if phase_source is None:
        u = random_diagonal(h.n, gen)
    else:
        u = instance_to_diagonal(sample_instance(h.n, phase_source, gen))
    system = u.diagonal() / np.sqrt(2 ** h.n)

    # step 2: phase estimation
    joint = qpe_forward(system, phases, r)

    # step 3: projective measurement on the ancillas
    accepted = joint * accept[None, :]
    p = float(np.vdot(accepted, accepted).real)
    p = min(max(p, 0.0), 1.0)
    if not (p > 0 and gen.random() < p):
        return ThermalizeOutcome(False, p, r, split, warnings=notes)
    accepted /= np.sqrt(p)

    # step 4: inverse phase estimation
    back = qpe_inverse(accepted, phases, r)
    on_plus = back.sum(axis=1) / np.sqrt(2 ** r)
    weight = float(np.vdot(on_plus, on_plus).real)
    leakage = max(0.0, 1.0 - weight)
    state = PureState(h.n, on_plus / np.sqrt(weight)) if weight > 0 else None
    return ThermalizeOutcome(True, p, r, split, state=state, joint=back,
                             leakage=leakage, warnings=notes)


def thermalize_report(h: ClassicalHamiltonian, split: SystemSplit, E: float, delta: float,
                      outcome: ThermalizeOutcome, hS: ClassicalHamiltonian | None = None,
                      beta: float | None = None) -> dict:
    td = None
    if outcome.success and hS is not None and beta is not None:
        td = trace_distance(outcome.reduced_system(), gibbs_state(hS, beta))
    return {"n": h.n, "n_S": split.n_S, "E": E, "delta": delta, "r": outcome.r,
            "success": outcome.success, "success_probability": outcome.success_probability,
            "trace_distance_to_gibbs": td, "beta": beta, "leakage": outcome.leakage}


def report_json(report: dict) -> str:
    return json.dumps(report)
