import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usdiscord import (
    DensityMatrix,
    hermitian_spectrum,
    kron,
    mutual_information,
    partial_trace,
    partial_transpose,
    von_neumann_entropy,
)
from usdiscord.ensembles import build_two_state
from usdiscord.errors import DimensionMismatch, NotDensityMatrix, NotHermitian, NotPSD

from conftest import product_state, random_density, random_unitary

X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])
seeds = st.integers(0, 2**32 - 1)


def test_kron_examples():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron(Z, np.eye(2)), np.diag([1, 1, -1, -1]))
    out = kron(np.diag([1, 0]), np.diag([0, 1]))
    expected = np.zeros((4, 4))
    expected[1, 1] = 1
    assert np.array_equal(out, expected)


def test_kron_rejects_non_square():
    with pytest.raises(DimensionMismatch):
        kron(np.ones((2, 3)), np.eye(2))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_kron_associative_and_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
    e = rng.normal(size=(3, 3))
    assert np.max(np.abs(kron(kron(a, b), e) - kron(a, kron(b, e)))) < 1e-12
    assert np.max(np.abs(kron(a, b) @ kron(c, d) - kron(a @ c, b @ d))) < 1e-12


def test_density_matrix_validation():
    with pytest.raises(NotDensityMatrix):
        DensityMatrix(np.diag([0.5, 0.6]), (2, 1))
    with pytest.raises(NotDensityMatrix):
        DensityMatrix(np.diag([1.5, -0.5]), (2, 1))
    with pytest.raises(NotDensityMatrix):
        DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]), (2, 1))
    with pytest.raises(DimensionMismatch):
        DensityMatrix(np.eye(4) / 4, (3, 2))


def test_density_matrix_is_immutable():
    rho = DensityMatrix(np.eye(4) / 4, (2, 2))
    with pytest.raises(ValueError):
        rho.mat[0, 0] = 1.0


def test_partial_trace_product(rng):
    rho, a, b = product_state(rng, 2, 3)
    assert np.max(np.abs(partial_trace(rho, "sys").mat - a)) < 1e-12
    assert np.max(np.abs(partial_trace(rho, "anc").mat - b)) < 1e-12


def test_partial_trace_bell(bell):
    assert np.max(np.abs(partial_trace(bell, "sys").mat - np.eye(2) / 2)) < 1e-15


def test_partial_trace_of_protocol_state():
    # Independent construction of the optimal two-state output by hand.
    plus, minus = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
    zero, one = np.array([1, 0]), np.array([0, 1])
    outs = [np.sqrt(0.75) * np.kron(v, zero) + 0.5 * np.kron(zero, one) for v in (plus, minus)]
    rho = 0.5 * sum(np.outer(v, v) for v in outs)
    built = build_two_state(0.5, 0.5, 0.25, 0.5)
    assert np.max(np.abs(built.rho.mat - rho)) < 1e-15
    marginal = partial_trace(built.rho, "sys").mat
    assert abs(np.trace(marginal) - 1) < 1e-12
    assert np.linalg.eigvalsh(marginal).min() >= 0
    # 3/8 I from the success branch plus 1/4 |0><0| from the failure branch.
    assert np.max(np.abs(marginal - (0.375 * np.eye(2) + np.diag([0.25, 0])))) < 1e-15


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_partial_trace_of_kron_scales_by_partner_trace(seed):
    rng = np.random.default_rng(seed)
    sigma, tau = random_density(2, rng), random_density(3, rng)
    rho = DensityMatrix(kron(sigma, tau), (2, 3))
    assert np.max(np.abs(partial_trace(rho, "sys").mat - sigma * np.trace(tau))) < 1e-12
    assert np.max(np.abs(partial_trace(rho, "anc").mat - tau * np.trace(sigma))) < 1e-12


def test_partial_transpose_product(rng):
    rho, a, b = product_state(rng)
    assert np.max(np.abs(partial_transpose(rho, "anc") - np.kron(a, b.T))) < 1e-15
    assert np.max(np.abs(partial_transpose(rho, "sys") - np.kron(a.T, b))) < 1e-15


def test_partial_transpose_bell_spectrum(bell):
    w = np.sort(np.linalg.eigvalsh(partial_transpose(bell, "sys")))
    assert np.allclose(w, [-0.5, 0.5, 0.5, 0.5], atol=1e-14)


def test_partial_transpose_known_layout():
    # Flat index = 2*sys + anc; the system transpose swaps sys and sys' only.
    m = np.arange(16).reshape(4, 4)
    expected_sys = np.array([[0, 1, 8, 9], [4, 5, 12, 13], [2, 3, 10, 11], [6, 7, 14, 15]])
    expected_anc = np.array([[0, 4, 2, 6], [1, 5, 3, 7], [8, 12, 10, 14], [9, 13, 11, 15]])
    assert np.array_equal(partial_transpose(m, "sys", dims=(2, 2)), expected_sys)
    assert np.array_equal(partial_transpose(m, "anc", dims=(2, 2)), expected_anc)


def test_partial_transpose_diagonal_unchanged():
    rho = DensityMatrix(np.diag([0.1, 0.2, 0.3, 0.4]), (2, 2))
    assert np.array_equal(partial_transpose(rho, "sys"), rho.mat)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from(["sys", "anc"]))
def test_partial_transpose_properties(seed, side):
    rng = np.random.default_rng(seed)
    rho = DensityMatrix(random_density(6, rng), (3, 2))
    pt = partial_transpose(rho, side)
    assert abs(np.trace(pt) - 1) < 1e-12
    assert np.max(np.abs(pt - pt.conj().T)) < 1e-12
    assert np.array_equal(partial_transpose(pt, side, dims=(3, 2)), rho.mat)


def test_spectrum_examples():
    assert np.allclose(hermitian_spectrum(np.eye(4)).eigenvalues, [1, 1, 1, 1])
    assert np.allclose(hermitian_spectrum(X).eigenvalues, [1, -1], atol=1e-15)
    perm = np.eye(4)[[2, 0, 3, 1]]
    h = perm @ np.diag([3, 1, 4, 1]) @ perm.T
    assert np.allclose(hermitian_spectrum(h).eigenvalues, [4, 3, 1, 1], atol=1e-14)


def test_spectrum_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_spectrum(np.array([[0, 1], [0, 0]]))


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 8))
def test_spectrum_reconstruction(seed, dim):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = g + g.conj().T
    sp = hermitian_spectrum(h)
    assert np.all(np.diff(sp.eigenvalues) <= 0)
    assert np.max(np.abs(sp.reconstruct() - h)) < 1e-10
    v = sp.eigenvectors
    assert np.max(np.abs(v.conj().T @ v - np.eye(dim))) < 1e-10


def test_spectrum_is_deterministic(rng):
    h = random_density(8, rng)
    a, b = hermitian_spectrum(h), hermitian_spectrum(h.copy())
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_entropy_examples():
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == 0.0
    psi = np.array([0.6, 0.8j])
    assert von_neumann_entropy(np.outer(psi, psi.conj())) < 1e-12
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0, abs=1e-15)
    # -(3/4) log2(3/4) - (1/4) log2(1/4)
    assert von_neumann_entropy(np.diag([0.75, 0.25])) == pytest.approx(0.8112781244591328, abs=1e-15)


def test_entropy_rejects_negative_spectrum():
    with pytest.raises(NotPSD):
        von_neumann_entropy(np.diag([1.1, -0.1]))


def test_entropy_clips_tiny_eigenvalues():
    assert von_neumann_entropy(np.diag([1.0, -5e-11])) == 0.0


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 6))
def test_entropy_bounds_and_unitary_invariance(seed, dim):
    rng = np.random.default_rng(seed)
    rho = random_density(dim, rng)
    u = random_unitary(dim, rng)
    s = von_neumann_entropy(rho)
    assert 0.0 <= s <= np.log2(dim) + 1e-12
    assert abs(von_neumann_entropy(u @ rho @ u.conj().T) - s) < 1e-10


def test_mutual_information_examples(rng, bell):
    rho, _, _ = product_state(rng)
    assert abs(mutual_information(rho)) < 1e-9
    assert mutual_information(bell) == pytest.approx(2.0, abs=1e-12)


def test_mutual_information_protocol_state():
    rho = build_two_state(0.5, 0.5, 0.25, 0.5).rho

    def h(m):
        w = np.linalg.eigvalsh(m)
        w = w[w > 1e-12]
        return -np.sum(w * np.log2(w))

    t = rho.mat.reshape(2, 2, 2, 2)
    direct = h(np.einsum("ijkj->ik", t)) + h(np.einsum("ijil->jl", t)) - h(rho.mat)
    mi = mutual_information(rho)
    assert 0.0 < mi < 2.0
    assert mi == pytest.approx(direct, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_mutual_information_nonnegative(seed):
    rng = np.random.default_rng(seed)
    assert mutual_information(DensityMatrix(random_density(6, rng), (2, 3))) >= -1e-9
