import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entcat import presets
from entcat.errors import DegenerateBranchError, DimensionError, StateError
from entcat.qcore import (DensityMatrix, KrausPair, PureState, apply_separable_map,
                          check_kraus, hermitian_eig, jacobi_eigh, kron_regrouped,
                          partial_trace_A, partial_trace_B, psd_sqrt, random_density,
                          random_pure_state, random_unitary, schmidt_spectrum,
                          schmidt_spectrum_batch, tensor_product, trace_distance,
                          trace_out_ancilla, uhlmann_fidelity)

from .oracles import naive_partial_trace_A, naive_partial_trace_B, naive_schmidt_spectrum

dims = st.tuples(st.integers(1, 4), st.integers(1, 4))


def test_pure_state_rejects_unnormalized():
    with pytest.raises(StateError):
        PureState(np.array([1.0, 1.0]), 2, 1)
    with pytest.raises(DimensionError):
        PureState(np.array([1.0, 0.0, 0.0]), 2, 2)


def test_from_terms_normalize():
    psi = PureState.from_terms({(0, 0): 1.0, (1, 1): 1.0}, 2, 2, normalize=True)
    assert np.allclose(psi.amplitudes, [2 ** -0.5, 0, 0, 2 ** -0.5])


def test_density_validation():
    with pytest.raises(StateError):
        DensityMatrix(np.diag([0.5, 0.6]), 2, 1)
    with pytest.raises(StateError):
        DensityMatrix(np.diag([1.2, -0.2]), 2, 1)
    with pytest.raises(StateError):
        DensityMatrix(np.array([[0.5, 0.3], [0.1, 0.5]]), 2, 1)


def test_arrays_are_read_only():
    psi = presets.bell_state()
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 1.0


@settings(max_examples=60, deadline=None)
@given(dims, st.integers(0, 2 ** 32 - 1))
def test_partial_traces_match_naive_loops(d, seed):
    rng = np.random.default_rng(seed)
    rho = random_density(*d, rng)
    assert np.allclose(partial_trace_B(rho), naive_partial_trace_B(rho.matrix, *d), atol=1e-13)
    assert np.allclose(partial_trace_A(rho), naive_partial_trace_A(rho.matrix, *d), atol=1e-13)
    psi = random_pure_state(*d, rng)
    m = psi.density().matrix
    assert np.allclose(partial_trace_B(psi), naive_partial_trace_B(m, *d), atol=1e-13)
    assert np.allclose(partial_trace_A(psi), naive_partial_trace_A(m, *d), atol=1e-13)


@settings(max_examples=60, deadline=None)
@given(dims, st.integers(0, 2 ** 32 - 1))
def test_schmidt_matches_reduced_eigenvalues(d, seed):
    psi = random_pure_state(*d, np.random.default_rng(seed))
    spec = schmidt_spectrum(psi)
    ref = naive_schmidt_spectrum(psi.amplitudes, *d)
    k = min(d)
    assert np.allclose(spec[:k], ref[:k], atol=1e-10)
    assert abs(spec.sum() - 1) < 1e-12
    assert np.all(np.diff(spec) <= 0)


def test_schmidt_presets():
    assert np.allclose(schmidt_spectrum(presets.source_state()),
                       [0.38, 0.38, 0.095, 0.095, 0.05], atol=1e-15)
    assert np.allclose(schmidt_spectrum(presets.bell_state()), [0.5, 0.5], atol=1e-15)
    assert np.allclose(schmidt_spectrum(presets.catalyst_state()), [0.6, 0.4], atol=1e-15)


def test_schmidt_invariant_under_local_unitaries():
    rng = np.random.default_rng(3)
    psi = random_pure_state(3, 4, rng)
    u, v = random_unitary(3, rng), random_unitary(4, rng)
    moved = PureState((u @ psi.coefficients @ v.T).reshape(-1), 3, 4)
    assert np.allclose(schmidt_spectrum(psi), schmidt_spectrum(moved), atol=1e-12)


def test_schmidt_batch_agrees():
    rng = np.random.default_rng(0)
    states = [random_pure_state(3, 3, rng) for _ in range(20)]
    batch = schmidt_spectrum_batch(np.stack([s.coefficients for s in states]))
    for row, s in zip(batch, states):
        assert np.allclose(row, schmidt_spectrum(s), atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 5, 9, 16])
def test_jacobi_matches_lapack(n):
    rng = np.random.default_rng(n)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = g + g.conj().T
    w_j, v_j = hermitian_eig(h, method="jacobi")
    w_l, _ = hermitian_eig(h)
    assert np.allclose(w_j, w_l, atol=1e-10)
    assert np.all(np.diff(w_j) <= 1e-12)
    assert np.allclose(h @ v_j, v_j * w_j, atol=1e-9)
    assert np.allclose(v_j.conj().T @ v_j, np.eye(n), atol=1e-10)


def test_jacobi_handles_degenerate_spectrum():
    u = random_unitary(4, np.random.default_rng(1))
    h = u @ np.diag([1.0, 1.0, 0.0, 0.0]) @ u.conj().T
    w, v = jacobi_eigh(h)
    assert np.allclose(w, [0, 0, 1, 1], atol=1e-12)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(StateError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        hermitian_eig(np.eye(2), method="qr")


def test_psd_sqrt_squares_back():
    rho = random_density(2, 3, np.random.default_rng(5), rank=3)
    r = psd_sqrt(rho.matrix)
    assert np.allclose(r @ r, rho.matrix, atol=1e-8)


def test_psd_sqrt_rejects_negative():
    with pytest.raises(StateError):
        psd_sqrt(np.diag([1.0, -1e-3]))


def test_fidelity_pure_states_is_squared_overlap():
    rng = np.random.default_rng(2)
    psi, phi = random_pure_state(2, 3, rng), random_pure_state(2, 3, rng)
    assert abs(uhlmann_fidelity(psi, phi) - abs(psi.overlap(phi)) ** 2) < 1e-10


def test_fidelity_pure_vs_mixed():
    rng = np.random.default_rng(4)
    psi = random_pure_state(3, 3, rng)
    rho = random_density(3, 3, rng)
    expected = float(np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes).real)
    assert abs(uhlmann_fidelity(psi, rho) - expected) < 1e-10
    assert abs(uhlmann_fidelity(rho, psi) - expected) < 1e-10


def test_fidelity_rank_deficient_is_not_inflated():
    # rank-two states in a 25-dimensional space; reference in 40-digit arithmetic
    # on the three-dimensional span that carries both supports
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    lam = 0.3
    psi, phi, eta = presets.source_state(), presets.target_state(), presets.product_state()
    e = eta.density().matrix
    sigma = DensityMatrix(lam * psi.density().matrix + (1 - lam) * e, 5, 5)
    rho = DensityMatrix(0.95 * lam * phi.density().matrix + (1 - 0.95 * lam) * e, 5, 5)
    q, _ = np.linalg.qr(np.stack([psi.amplitudes, phi.amplitudes, eta.amplitudes], 1).real)
    s3 = mp.matrix((q.T @ sigma.matrix.real @ q).tolist())
    r3 = mp.matrix((q.T @ rho.matrix.real @ q).tolist())
    w, v = mp.eigsy(s3)
    root = v * mp.diag([mp.sqrt(max(x, 0)) for x in w]) * v.T
    inner = root * r3 * root
    w = mp.eigsy((inner + inner.T) / 2)[0]
    ref = float(sum(mp.sqrt(max(x, 0)) for x in w) ** 2)
    assert abs(uhlmann_fidelity(sigma, rho) - ref) < 1e-12


def test_fidelity_identity_and_symmetry():
    rng = np.random.default_rng(8)
    a, b = random_density(2, 2, rng), random_density(2, 2, rng)
    assert abs(uhlmann_fidelity(a, a) - 1) < 1e-10
    assert abs(uhlmann_fidelity(a, b) - uhlmann_fidelity(b, a)) < 1e-10


def test_trace_distance_pure_formula():
    rng = np.random.default_rng(9)
    psi, phi = random_pure_state(3, 2, rng), random_pure_state(3, 2, rng)
    expected = np.sqrt(1 - abs(psi.overlap(phi)) ** 2)
    assert abs(trace_distance(psi, phi) - expected) < 1e-12


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        trace_distance(presets.bell_state(), presets.source_state())


def test_tensor_product_regrouping():
    bell, om = presets.bell_state(), presets.catalyst_state()
    joint = tensor_product(bell, om)
    assert (joint.dim_a, joint.dim_b) == (4, 4)
    spec = schmidt_spectrum(joint)
    assert np.allclose(spec, [0.3, 0.3, 0.2, 0.2], atol=1e-14)
    dense = tensor_product(bell.density(), om.density())
    assert np.allclose(dense.matrix, joint.density().matrix, atol=1e-14)


def test_tensor_product_cap():
    with pytest.raises(DimensionError):
        tensor_product(presets.source_state(), presets.source_state(), max_dim=100)


def test_trace_out_ancilla_inverts_kron():
    rng = np.random.default_rng(10)
    a, b = random_density(2, 3, rng), random_density(2, 2, rng)
    joint = kron_regrouped(a.matrix, b.matrix, (2, 3), (2, 2))
    assert np.allclose(trace_out_ancilla(joint, (2, 3), (2, 2)), a.matrix, atol=1e-14)


def test_apply_separable_map_local_unitary():
    rng = np.random.default_rng(11)
    psi = random_pure_state(2, 2, rng)
    u, v = random_unitary(2, rng), random_unitary(2, rng)
    out, p = apply_separable_map(psi, [KrausPair(u, v)])
    assert abs(p - 1) < 1e-12
    moved = np.kron(u, v) @ psi.amplitudes
    assert np.allclose(out.matrix, np.outer(moved, moved.conj()), atol=1e-12)


def test_apply_separable_map_rejects_bad_kraus():
    with pytest.raises(StateError):
        check_kraus([KrausPair(2 * np.eye(2), np.eye(2))])


def test_apply_separable_map_degenerate_branch():
    psi = PureState.from_terms({(0, 0): 1.0}, 2, 2)
    proj = np.diag([0.0, 1.0])
    with pytest.raises(DegenerateBranchError):
        apply_separable_map(psi, [KrausPair(proj, np.eye(2))])
