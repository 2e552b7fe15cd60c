"""IQP circuits: strong and weak simulation, and the Ising-sum amplitude.

An IQP circuit applies commuting diagonal gates to |+>^n and measures every
qubit in the X basis. Outcome bit 0 stands for |+>, bit 1 for |->, and an
outcome x is indexed like a basis state (qubit 1 is the most significant
bit / first character of the bitstring).

Since H^{(x)n} maps the X basis to the computational basis, the amplitude of
outcome x is <x| H^{(x)n} U |+>^n = 2^-n sum_s (-1)^{x.s} exp(i phi(s)).
For gates of the form exp(i theta Z_S) the phase phi(s) is an Ising energy
sum_g theta_g prod_{q in S_g} sigma_q with sigma_q = (-1)^{s_q}, so the
amplitude is an imaginary-coupling partition sum over spin configurations.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence, Union

import networkx as nx
import numpy as np

from .circuits import CircuitInstance, PlacedGate, RngLike, instance_to_diagonal, make_rng
from .errors import ArgumentError, CapacityError, ShapeError, UnsupportedFormError
from .qstate import MAX_QUBITS, TWO_PI, apply_diagonal, plus_state, walsh_hadamard


@dataclass(frozen=True)
class ZProductGate:
    """exp(i theta Z_{q1} Z_{q2} ...) on the listed sites."""

    sites: tuple[int, ...]
    theta: float

    def __post_init__(self):
        sites = tuple(int(q) for q in self.sites)
        if not sites or len(set(sites)) != len(sites):
            raise ArgumentError(f"Z-product sites must be distinct and nonempty: {sites}")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "theta", float(self.theta))

    def as_placed(self) -> PlacedGate:
        k = len(self.sites)
        patterns = np.arange(2 ** k)
        parity = np.zeros(2 ** k, dtype=np.int64)
        for j in range(k):
            parity ^= (patterns >> j) & 1
        return PlacedGate(self.sites, self.theta * (1 - 2 * parity))


Gate = Union[PlacedGate, ZProductGate]


@dataclass(frozen=True)
class IQPCircuit:
    n: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise CapacityError(f"n={self.n} outside 1..{MAX_QUBITS}", module="iqp")
        gates = tuple(self.gates)
        for g in gates:
            if min(g.sites) < 1 or max(g.sites) > self.n:
                raise ArgumentError(f"gate sites {g.sites} invalid for n={self.n}")
        object.__setattr__(self, "gates", gates)

    @property
    def is_zproduct(self) -> bool:
        return all(isinstance(g, ZProductGate) for g in self.gates)

    def to_instance(self) -> CircuitInstance:
        placed = tuple(g.as_placed() if isinstance(g, ZProductGate) else g for g in self.gates)
        return CircuitInstance(self.n, placed)

    def to_json(self) -> str:
        """Corpus format: a JSON list of {sites, theta} gates."""
        if not self.is_zproduct:
            raise UnsupportedFormError("only Z-product circuits have a corpus encoding")
        return json.dumps([{"sites": list(g.sites), "theta": g.theta} for g in self.gates])

    @classmethod
    def from_json(cls, n: int, text: str) -> "IQPCircuit":
        return cls(n, tuple(ZProductGate(tuple(g["sites"]), g["theta"]) for g in json.loads(text)))


@dataclass(frozen=True, eq=False)
class OutputDistribution:
    n: int
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (2 ** self.n,):
            raise ShapeError(f"expected {2 ** self.n} probabilities, got {p.shape}")
        if p.min() < -1e-15 or abs(p.sum() - 1.0) > 1e-10:
            raise ArgumentError("probabilities must be nonnegative and sum to one")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def __getitem__(self, x) -> float:
        return float(self.probabilities[bitstring_to_index(x, self.n)])

    @classmethod
    def from_samples(cls, n: int, samples: Sequence[str]) -> "OutputDistribution":
        counts = np.bincount([bitstring_to_index(s, n) for s in samples], minlength=2 ** n)
        return cls(n, counts / counts.sum())

    def total_variation(self, other: "OutputDistribution") -> float:
        if other.n != self.n:
            raise ShapeError("distributions over different qubit counts")
        return float(0.5 * np.abs(self.probabilities - other.probabilities).sum())

    def marginal(self, qubits: Sequence[int]) -> "OutputDistribution":
        keep = sorted(set(qubits))
        p = self.probabilities.reshape((2,) * self.n)
        drop = tuple(q - 1 for q in range(1, self.n + 1) if q not in keep)
        return OutputDistribution(len(keep), p.sum(axis=drop).reshape(-1))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bitstring", "probability"])
        for m, prob in enumerate(self.probabilities):
            w.writerow([index_to_bitstring(m, self.n), f"{prob:.17g}"])
        return buf.getvalue()


@dataclass(frozen=True)
class Hypergraph:
    vertices: tuple[int, ...]
    hyperedges: tuple[tuple[tuple[int, ...], float], ...]

    def graph(self) -> nx.Graph:
        """The ordinary graph, when every hyperedge joins exactly two vertices."""
        if any(len(e) != 2 for e, _ in self.hyperedges):
            raise UnsupportedFormError("hypergraph has edges that are not pairs")
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        for (u, v), theta in self.hyperedges:
            g.add_edge(u, v, theta=theta)
        return g

    def degree(self, v: int) -> int:
        return sum(v in e for e, _ in self.hyperedges)


def bitstring_to_index(x, n: int) -> int:
    if isinstance(x, (int, np.integer)):
        m = int(x)
    else:
        if len(x) != n or set(x) - {"0", "1"}:
            raise ArgumentError(f"bitstring {x!r} is not {n} binary digits")
        m = int(x, 2)
    if not 0 <= m < 2 ** n:
        raise ArgumentError(f"outcome {m} out of range for n={n}")
    return m


def index_to_bitstring(m: int, n: int) -> str:
    return format(int(m), f"0{n}b")


def output_amplitudes(c: IQPCircuit) -> np.ndarray:
    """All X-basis outcome amplitudes from one statevector pass."""
    state = apply_diagonal(instance_to_diagonal(c.to_instance()), plus_state(c.n))
    return walsh_hadamard(state.amplitudes)


def output_distribution(c: IQPCircuit) -> OutputDistribution:
    p = np.abs(output_amplitudes(c)) ** 2
    return OutputDistribution(c.n, p / p.sum())


def sample_outputs(c: IQPCircuit, shots: int, rng: RngLike = None,
                   dist: OutputDistribution | None = None) -> list[str]:
    """i.i.d. outcomes by inverse-CDF lookup in the exact distribution."""
    if shots < 0:
        raise ArgumentError("shots must be nonnegative")
    dist = dist if dist is not None else output_distribution(c)
    cdf = np.cumsum(dist.probabilities)
    cdf[-1] = 1.0
    u = make_rng(rng).random(shots)
    idx = np.searchsorted(cdf, u, side="right")
    return [index_to_bitstring(m, c.n) for m in idx]


def _spins(n: int) -> np.ndarray:
    """sigma[s, q-1] = (-1)^{s_q} for every configuration s."""
    s = np.arange(2 ** n)[:, None]
    shifts = n - np.arange(1, n + 1)[None, :]
    return 1 - 2 * ((s >> shifts) & 1)


def ising_energies(c: IQPCircuit) -> np.ndarray:
    if not c.is_zproduct:
        raise UnsupportedFormError("Ising evaluation needs Z-product gates")
    sigma = _spins(c.n)
    energy = np.zeros(2 ** c.n)
    for g in c.gates:
        energy += g.theta * np.prod(sigma[:, [q - 1 for q in g.sites]], axis=1)
    return energy


def ising_amplitude(c: IQPCircuit, x, energies: np.ndarray | None = None) -> complex:
    """Partition sum 2^-n sum_s (-1)^{x.s} exp(i E(sigma(s)))."""
    m = bitstring_to_index(x, c.n)
    if energies is None:
        energies = ising_energies(c)
    s = np.arange(2 ** c.n)
    overlap = np.zeros(2 ** c.n, dtype=np.int64)
    for q in range(c.n):
        overlap ^= ((s & m) >> q) & 1
    weight = np.where(overlap == 1, -1.0, 1.0)
    return complex(np.sum(weight * np.exp(1j * energies)) / 2 ** c.n)


def circuit_hypergraph(c: IQPCircuit) -> Hypergraph:
    if not c.is_zproduct:
        raise UnsupportedFormError("hypergraph association needs Z-product gates")
    return Hypergraph(tuple(range(1, c.n + 1)),
                      tuple((tuple(sorted(g.sites)), g.theta) for g in c.gates))


def multiplicative_error_check(p: OutputDistribution, q: OutputDistribution, c: float) -> bool:
    """Whether p/c <= q <= c p holds on every outcome."""
    if c < 1:
        raise ArgumentError("multiplicative error constant must be >= 1")
    if p.n != q.n:
        raise ShapeError("distributions over different qubit counts")
    pp, qq = p.probabilities, q.probabilities
    return bool(np.all(pp / c <= qq) and np.all(qq <= c * pp))


def random_zproduct_circuit(n: int, n_gates: int, rng: RngLike = None,
                            max_arity: int = 3) -> IQPCircuit:
    """Gates on uniformly chosen site sets of size 1..max_arity, angles in [0, 2pi)."""
    gen = make_rng(rng)
    gates = []
    for _ in range(n_gates):
        k = int(gen.integers(1, min(max_arity, n) + 1))
        sites = tuple(int(q) + 1 for q in np.sort(gen.choice(n, size=k, replace=False)))
        gates.append(ZProductGate(sites, float(gen.uniform(0.0, TWO_PI))))
    return IQPCircuit(n, tuple(gates))
