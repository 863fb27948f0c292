import math

import numpy as np
import pytest
from scipy.stats import binom

from cvbell import (
    DimensionError,
    FockTensor,
    NumericalError,
    annihilate,
    apply_loss,
    create,
    expect,
    number,
    partial_trace,
    partial_transpose,
    quadrature,
    random_mixed,
    tmss,
)
from cvbell.fock import apply_local, apply_unitary, expect_local, loss_kraus


def test_basis_layout_mode_one_slowest():
    s = FockTensor.basis((1, 2), (2, 3))
    assert s.dims == (3, 4)
    assert s.data[1 * 4 + 2] == 1.0
    assert s.tensor()[1, 2] == 1.0


def test_from_amplitudes_normalizes():
    s = FockTensor.from_amplitudes([3.0, 4.0], (1,))
    assert np.allclose(s.data, [0.6, 0.8])
    assert math.isclose(s.trace(), 1.0)


def test_data_is_read_only():
    s = FockTensor.basis((0, 1), (1, 1))
    with pytest.raises(ValueError):
        s.data[0] = 1.0


def test_check_physical_rejects_bad_density():
    rho = np.diag([1.2, -0.2])
    with pytest.raises(NumericalError):
        FockTensor.from_density(rho, (1,)).check_physical()
    with pytest.raises(NumericalError):
        FockTensor.from_density([[0.5, 0.1], [0.0, 0.5]], (1,)).check_physical()
    with pytest.raises(NumericalError):
        FockTensor.from_amplitudes([1.0, 1.0], (1,), normalize=False).check_physical()


def test_dimension_caps():
    with pytest.raises(DimensionError):
        FockTensor((20, 20, 20, 20), np.zeros(1), "pure")
    big = FockTensor.basis((0, 0), (70, 70))
    with pytest.raises(DimensionError):
        big.to_mixed()


def test_lowering_operator_matrix_elements():
    a = annihilate(1, 4).matrix
    for n in range(1, 5):
        assert math.isclose(a[n - 1, n].real, math.sqrt(n))
    assert np.count_nonzero(a) == 4
    assert np.array_equal(create(1, 4).matrix, a.conj().T)
    assert np.allclose(number(1, 4).matrix, np.diag(np.arange(5)))


def test_commutator_holds_below_cutoff():
    a = annihilate(1, 6).matrix
    comm = a @ a.conj().T - a.conj().T @ a
    assert np.allclose(np.diag(comm)[:-1], 1.0)
    assert math.isclose(comm[-1, -1].real, -6.0)


def test_annihilator_is_x_plus_iy_exactly():
    for c in (1, 5, 30):
        x = quadrature(1, c, 0.0).matrix
        y = quadrature(1, c, np.pi / 2).matrix
        assert np.array_equal(x + 1j * y, annihilate(1, c).matrix)


def test_quadrature_is_hermitian_and_transpose_flips_phase():
    q = quadrature(1, 8, 0.3)
    assert np.allclose(q.matrix, q.matrix.conj().T)
    assert np.allclose(q.transpose().matrix, q.matrix.T)
    assert np.allclose(annihilate(1, 3).dagger().matrix, create(1, 3).matrix)


def test_expect_operator_ordering():
    s = FockTensor.basis((1,), (2,))
    a, ad = annihilate(1, 2), create(1, 2)
    assert math.isclose(expect(s, [a, ad]).real, 2.0)
    assert math.isclose(expect(s, [ad, a]).real, 1.0)


def test_vacuum_quadrature_variance():
    s = FockTensor.basis((0,), (4,))
    for theta in (0.0, 0.4, np.pi / 2):
        q = quadrature(1, 4, theta)
        assert math.isclose(expect(s, [q, q]).real, 0.25)
        assert abs(expect(s, [q]).value) < 1e-15


def test_pure_and_mixed_expectations_agree():
    psi = FockTensor.from_amplitudes(np.random.default_rng(1).normal(size=9) + 0j, (2, 2))
    rho = psi.to_mixed()
    ops = [annihilate(1, 2), create(2, 2), number(1, 2)]
    assert np.isclose(expect(psi, ops).value, expect(rho, ops).value)


def test_apply_local_pure_matches_mixed():
    rng = np.random.default_rng(3)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    u, _ = np.linalg.qr(g)
    psi = FockTensor.from_amplitudes(rng.normal(size=9) + 1j * rng.normal(size=9), (2, 2))
    a = apply_local(psi, {2: u}).density()
    b = apply_local(psi.to_mixed(), {2: u}).density()
    assert np.allclose(a, b)
    c = apply_unitary(psi, np.kron(np.eye(3), u), [1, 2]).density()
    assert np.allclose(a, c)


def test_partial_transpose_is_involution_and_keeps_trace():
    rho = random_mixed(5)
    pt = partial_transpose(rho, [2])
    assert math.isclose(pt.trace(), 1.0)
    assert np.allclose(partial_transpose(pt, [2]).data, rho.data)
    assert np.allclose(pt.data, pt.data.conj().T)


def test_partial_transpose_rejects_improper_subsets():
    rho = random_mixed(0)
    with pytest.raises(ValueError):
        partial_transpose(rho, [])
    with pytest.raises(ValueError):
        partial_transpose(rho, [1, 2])
    with pytest.raises(IndexError):
        partial_transpose(rho, [3])


def test_partial_trace_of_tmss_is_thermal():
    r = 0.5
    lam = math.tanh(r) ** 2
    red = partial_trace(tmss(r), [1])
    n = np.arange(red.dims[0])
    assert np.allclose(red.data, np.diag((1 - lam) * lam**n), atol=1e-12)


def test_loss_kraus_is_trace_preserving():
    for eta in (0.0, 0.3, 1.0):
        ks = loss_kraus(6, eta)
        total = sum(k.T @ k for k in ks)
        assert np.allclose(total, np.eye(7))


def test_loss_on_fock_state_is_binomial():
    s = FockTensor.basis((4,), (4,))
    out = apply_loss(s, 1, 0.35)
    assert not out.is_pure
    assert np.allclose(np.diag(out.data).real, binom.pmf(np.arange(5), 4, 0.35))


def test_loss_composes_multiplicatively():
    rho = random_mixed(11)
    a = apply_loss(apply_loss(rho, 1, 0.5), 1, 0.6)
    b = apply_loss(rho, 1, 0.3)
    assert np.allclose(a.data, b.data)


def test_loss_scales_mean_photon_number():
    rho = random_mixed(2)
    n0 = expect(rho, [number(2, 2)]).real
    n1 = expect(apply_loss(rho, 2, 0.4), [number(2, 2)]).real
    assert math.isclose(n1, 0.4 * n0, rel_tol=1e-12)


def test_loss_output_is_physical():
    for seed in range(5):
        apply_loss(random_mixed(seed), 1, 0.7).check_physical()


def test_expect_local_rejects_wrong_shape():
    with pytest.raises(ValueError):
        expect_local(random_mixed(0), {1: np.eye(4)})
