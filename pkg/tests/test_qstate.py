import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diagcirc.errors import ArgumentError, CapacityError, ShapeError
from diagcirc.qstate import (
    DensityMatrix,
    DiagonalUnitary,
    PureState,
    apply_diagonal,
    basis_state,
    entanglement_entropy,
    fidelity,
    plus_state,
    reduced_density,
    trace_distance,
    von_neumann_entropy,
    walsh_hadamard,
)

CZ = DiagonalUnitary(2, [0, 0, 0, np.pi])


def random_state(n, rng):
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return PureState(n, v / np.linalg.norm(v))


def random_density(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def test_plus_state_amplitudes():
    np.testing.assert_allclose(plus_state(1).amplitudes, [2 ** -0.5] * 2)
    np.testing.assert_allclose(plus_state(2).amplitudes, [0.5] * 4)
    assert np.linalg.norm(plus_state(10).amplitudes) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [0, 15])
def test_plus_state_capacity(n):
    with pytest.raises(CapacityError):
        plus_state(n)


def test_pure_state_validation():
    with pytest.raises(ArgumentError):
        PureState(1, [1.0, 1.0])
    with pytest.raises(ShapeError):
        PureState(2, [1.0, 0.0])


def test_density_validation():
    with pytest.raises(ArgumentError):
        DensityMatrix(np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ArgumentError):
        DensityMatrix(np.diag([1.5, -0.5]))


def test_apply_diagonal_examples():
    s = random_state(3, np.random.default_rng(0))
    assert np.array_equal(apply_diagonal(DiagonalUnitary.identity(3), s).amplitudes, s.amplitudes)
    minus = apply_diagonal(DiagonalUnitary(1, [0, np.pi]), plus_state(1))
    np.testing.assert_allclose(minus.amplitudes, [2 ** -0.5, -(2 ** -0.5)], atol=1e-15)
    assert entanglement_entropy(apply_diagonal(CZ, plus_state(2)), [1]) == pytest.approx(1.0)


def test_apply_diagonal_shape_error():
    with pytest.raises(ShapeError):
        apply_diagonal(DiagonalUnitary.identity(2), plus_state(3))


def test_diagonal_phases_wrapped_and_inverse():
    u = DiagonalUnitary(1, [-0.5, 7.0])
    assert np.all((u.phases >= 0) & (u.phases < 2 * np.pi))
    s = random_state(1, np.random.default_rng(1))
    back = apply_diagonal(u.conj(), apply_diagonal(u, s))
    np.testing.assert_allclose(back.amplitudes, s.amplitudes, atol=1e-12)


def test_reduced_density_examples():
    rho = reduced_density(plus_state(2), [1])
    np.testing.assert_allclose(rho.entries, np.full((2, 2), 0.5))
    rho = reduced_density(apply_diagonal(CZ, plus_state(2)), [1])
    np.testing.assert_allclose(rho.entries, np.eye(2) / 2, atol=1e-15)
    s = random_state(3, np.random.default_rng(2))
    full = reduced_density(s, [1, 2, 3])
    np.testing.assert_allclose(full.entries, np.outer(s.amplitudes, s.amplitudes.conj()))


def test_reduced_density_keeps_qubit_order():
    # |0> on qubit 1, |1> on qubit 2: keep {2} is |1><1|
    s = basis_state(2, 0b01)
    np.testing.assert_allclose(reduced_density(s, [2]).entries, np.diag([0.0, 1.0]))
    np.testing.assert_allclose(reduced_density(s, [1]).entries, np.diag([1.0, 0.0]))


@pytest.mark.parametrize("keep", [[], [0], [4]])
def test_reduced_density_bad_sites(keep):
    with pytest.raises(ArgumentError):
        reduced_density(plus_state(3), keep)


def test_entropy_examples():
    assert entanglement_entropy(plus_state(4), [1, 2]) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ArgumentError):
        entanglement_entropy(plus_state(2), [1, 2])
    assert von_neumann_entropy(DensityMatrix.maximally_mixed(8)) == pytest.approx(3.0)


def test_trace_distance_examples():
    a, b = DensityMatrix(np.diag([1.0, 0.0])), DensityMatrix(np.diag([0.0, 1.0]))
    assert trace_distance(a, a) == 0.0
    assert trace_distance(a, b) == pytest.approx(1.0)
    assert trace_distance(DensityMatrix(np.diag([0.75, 0.25])),
                          DensityMatrix.maximally_mixed(2)) == pytest.approx(0.25)
    with pytest.raises(ShapeError):
        trace_distance(a, DensityMatrix.maximally_mixed(4))


def test_fidelity_and_walsh():
    assert fidelity(plus_state(3), plus_state(3)) == pytest.approx(1.0)
    # H^n |+>^n = |0...0>
    np.testing.assert_allclose(walsh_hadamard(plus_state(4).amplitudes),
                               basis_state(4, 0).amplitudes, atol=1e-15)
    rng = np.random.default_rng(3)
    v = rng.normal(size=8)
    H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    np.testing.assert_allclose(walsh_hadamard(v), np.kron(np.kron(H, H), H) @ v, atol=1e-14)


# -- properties --------------------------------------------------------------

seeds = st.integers(0, 2 ** 32 - 1)
sizes = st.integers(2, 7)


@settings(max_examples=40, deadline=None)
@given(sizes, seeds)
def test_norm_preserved(n, seed):
    rng = np.random.default_rng(seed)
    u = DiagonalUnitary(n, rng.uniform(0, 2 * np.pi, 2 ** n))
    out = apply_diagonal(u, random_state(n, rng))
    assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-10


@settings(max_examples=40, deadline=None)
@given(sizes, seeds, st.data())
def test_schmidt_duality(n, seed, data):
    s = random_state(n, np.random.default_rng(seed))
    cut = data.draw(st.sets(st.integers(1, n), min_size=1, max_size=n - 1))
    rest = sorted(set(range(1, n + 1)) - cut)
    ev1 = np.sort(reduced_density(s, cut).eigenvalues())
    ev2 = np.sort(reduced_density(s, rest).eigenvalues())
    nz1, nz2 = ev1[ev1 > 1e-9], ev2[ev2 > 1e-9]
    np.testing.assert_allclose(nz1, nz2, atol=1e-9)
    assert abs(entanglement_entropy(s, cut) - entanglement_entropy(s, rest)) < 1e-9
    assert 0 <= entanglement_entropy(s, cut) <= min(len(cut), len(rest)) + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), seeds)
def test_trace_distance_metric(dim, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_density(dim, rng) for _ in range(3))
    assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-9
    assert trace_distance(a, b) == pytest.approx(trace_distance(b, a), abs=1e-12)
    assert 0 <= trace_distance(a, b) <= 1 + 1e-12
