"""Phase-random circuits over the gate sets G_r and G_CZ.

A circuit instance is an ordered list of placed diagonal gates. Each gate
carries one phase per local computational pattern of its sites, the first
listed site being the most significant bit of the local pattern. Because all
gates are diagonal they commute, and the instance collapses to a single
:class:`~diagcirc.qstate.DiagonalUnitary`.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from math import comb
from typing import Sequence, Union

import numpy as np

from .errors import ArgumentError
from .qstate import TWO_PI, DiagonalUnitary, check_qubits

RngLike = Union[None, int, np.random.Generator, np.random.SeedSequence]


def make_rng(rng: RngLike) -> np.random.Generator:
    """Normalize a seed / SeedSequence / Generator to a Generator.

    Integer seeds are 64-bit unsigned values; identical seeds give
    bit-identical streams.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class GateSetSpec:
    """Which gate set a phase-random circuit draws from.

    ``kind`` is ``"Gr"`` (one fully random ``r``-qubit diagonal on every
    r-subset) or ``"GCZ"`` (``length`` random-pair CZ-type gates).
    """

    kind: str
    r: int | None = None
    length: int | None = None

    def __post_init__(self):
        if self.kind not in ("Gr", "GCZ"):
            raise ArgumentError(f"unknown gate set {self.kind!r}")
        if self.kind == "Gr" and (self.r is None or self.r < 1):
            raise ArgumentError("Gr needs an arity r >= 1")
        if self.kind == "GCZ" and (self.length is None or self.length < 0):
            raise ArgumentError("GCZ needs a circuit length >= 0")

    @classmethod
    def gr(cls, r: int) -> "GateSetSpec":
        return cls("Gr", r=r)

    @classmethod
    def gcz(cls, length: int) -> "GateSetSpec":
        return cls("GCZ", length=length)

    def describe(self) -> str:
        return f"Gr(r={self.r})" if self.kind == "Gr" else f"GCZ(T={self.length})"


@dataclass(frozen=True, eq=False)
class PlacedGate:
    sites: tuple[int, ...]
    phases: np.ndarray

    def __post_init__(self):
        sites = tuple(int(q) for q in self.sites)
        if len(set(sites)) != len(sites) or not sites:
            raise ArgumentError(f"gate sites must be distinct and nonempty: {sites}")
        ph = np.mod(np.asarray(self.phases, dtype=float), TWO_PI)
        if ph.shape != (2 ** len(sites),):
            raise ArgumentError(f"gate on {len(sites)} sites needs {2 ** len(sites)} phases")
        ph.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "phases", ph)

    @property
    def arity(self) -> int:
        return len(self.sites)

    def __eq__(self, other):
        if not isinstance(other, PlacedGate):
            return NotImplemented
        return self.sites == other.sites and np.array_equal(self.phases, other.phases)


@dataclass(frozen=True)
class CircuitInstance:
    n: int
    gates: tuple[PlacedGate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        check_qubits(self.n)
        gates = tuple(self.gates)
        for g in gates:
            if min(g.sites) < 1 or max(g.sites) > self.n:
                raise ArgumentError(f"gate sites {g.sites} invalid for n={self.n}")
        object.__setattr__(self, "gates", gates)

    @property
    def length(self) -> int:
        return len(self.gates)

    def __add__(self, other: "CircuitInstance") -> "CircuitInstance":
        if other.n != self.n:
            raise ArgumentError("cannot concatenate circuits on different qubit counts")
        return CircuitInstance(self.n, self.gates + other.gates)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "gates": [{"sites": list(g.sites), "phases": [float(p) for p in g.phases]}
                      for g in self.gates],
        }

    def to_json(self) -> str:
        # repr of a float is the shortest string that round-trips (at most 17 digits)
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "CircuitInstance":
        gates = tuple(PlacedGate(tuple(g["sites"]), np.asarray(g["phases"], dtype=float))
                      for g in data["gates"])
        return cls(int(data["n"]), gates)

    @classmethod
    def from_json(cls, text: str) -> "CircuitInstance":
        return cls.from_dict(json.loads(text))


def gr_placements(n: int, r: int) -> list[tuple[int, ...]]:
    if not 1 <= r <= n:
        raise ArgumentError(f"arity r={r} must satisfy 1 <= r <= n={n}")
    return list(itertools.combinations(range(1, n + 1), r))


def sample_gr_instance(n: int, r: int, rng: RngLike = None) -> CircuitInstance:
    """One random gate from G_r on each of the C(n, r) site sets."""
    check_qubits(n)
    placements = gr_placements(n, r)
    gen = make_rng(rng)
    phases = gen.uniform(0.0, TWO_PI, size=(len(placements), 2 ** r))
    return CircuitInstance(n, tuple(PlacedGate(s, p) for s, p in zip(placements, phases)))


def gcz_phases(alpha: float, beta: float) -> np.ndarray:
    """Local phases of diag(1, e^{i alpha}) (x) diag(1, e^{i beta}) . CZ.

    The first site (the lower qubit index) receives ``alpha``.
    """
    return np.mod(np.array([0.0, beta, alpha, alpha + beta - np.pi]), TWO_PI)


def sample_gcz_instance(n: int, length: int, rng: RngLike = None) -> CircuitInstance:
    if n < 2:
        raise ArgumentError("G_CZ circuits need at least two qubits")
    check_qubits(n)
    if length < 0:
        raise ArgumentError("circuit length must be nonnegative")
    pairs = gr_placements(n, 2)
    gen = make_rng(rng)
    which = gen.integers(0, len(pairs), size=length)
    angles = gen.uniform(0.0, TWO_PI, size=(length, 2))
    gates = tuple(PlacedGate(pairs[k], gcz_phases(a, b)) for k, (a, b) in zip(which, angles))
    return CircuitInstance(n, gates)


def sample_instance(n: int, spec: GateSetSpec, rng: RngLike = None) -> CircuitInstance:
    if spec.kind == "Gr":
        return sample_gr_instance(n, spec.r, rng)
    return sample_gcz_instance(n, spec.length, rng)


def local_pattern_index(n: int, sites: Sequence[int]) -> np.ndarray:
    """For every global basis index m, the local pattern of m on ``sites``."""
    m = np.arange(2 ** n)
    idx = np.zeros(2 ** n, dtype=np.int64)
    for q in sites:
        idx = (idx << 1) | ((m >> (n - q)) & 1)
    return idx


def gate_to_diagonal(gate: PlacedGate, n: int) -> DiagonalUnitary:
    return DiagonalUnitary(n, gate.phases[local_pattern_index(n, gate.sites)])


def instance_to_diagonal(c: CircuitInstance) -> DiagonalUnitary:
    total = np.zeros(2 ** c.n)
    cache: dict[tuple[int, ...], np.ndarray] = {}
    for g in c.gates:
        idx = cache.get(g.sites)
        if idx is None:
            idx = cache[g.sites] = local_pattern_index(c.n, g.sites)
        total += g.phases[idx]
    return DiagonalUnitary(c.n, total)


def random_diagonal(n: int, rng: RngLike = None) -> DiagonalUnitary:
    """A draw from the random diagonal-unitary ensemble (i.i.d. uniform phases)."""
    check_qubits(n)
    return DiagonalUnitary(n, make_rng(rng).uniform(0.0, TWO_PI, size=2 ** n))


def gr_gate_count(n: int, r: int) -> int:
    return comb(n, r)
