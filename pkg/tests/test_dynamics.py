import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from dualrail.core import DensityMatrix, HilbertLayout, Operator, basis_ket, random_density_matrix
from dualrail.dynamics import (DeviceParams, HamiltonianSpec, apply_superop, build_beamsplitter,
                               build_conditional_bs, build_sideband_gf, collapse_ops, evolve_lindblad,
                               evolve_unitary, heisenberg_bs, liouvillian, lindblad_superop, propagator)
from dualrail.errors import ConfigError, DimensionError

LAY = HilbertLayout.standard()


def test_params_validation():
    with pytest.raises(ConfigError):
        DeviceParams(kappa_a=-1)
    with pytest.raises(ConfigError):
        DeviceParams(P_d=0.7, P_o=0.5)
    with pytest.raises(ConfigError):
        DeviceParams.from_dict({"kappa": 1})
    p = DeviceParams.from_dict({"kappa_a": 1, "kappa_b": 3})
    assert p.kappa_bar == 2 and p.delta_kappa == 2
    assert DeviceParams.from_dict(p.to_dict()) == p


def test_propagator_against_expm(rng):
    H = build_beamsplitter(LAY, 1.3, 0.4, 0.2) + build_sideband_gf(LAY, 0.7)
    u = propagator(H, 0.9).matrix
    ref = scipy.linalg.expm(-1j * 0.9 * H.matrix)
    assert np.abs(u - ref).max() < 1e-12
    with pytest.raises(DimensionError):
        propagator(Operator(np.array([[0, 1], [0, 0]])), 1.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 3), st.floats(-2, 2), st.floats(0, 5))
def test_heisenberg_matches_single_photon_block(g, delta, t):
    H = build_beamsplitter(LAY, g, 0.0, delta)
    u = propagator(H, t).matrix
    idx = [LAY.index((1, 0, 0)), LAY.index((0, 1, 0))]
    assert np.abs(u[np.ix_(idx, idx)] - heisenberg_bs(g, delta, t)).max() < 1e-10


def test_beamsplitter_full_swap():
    H = build_beamsplitter(LAY, 2.0)
    psi = evolve_unitary(basis_ket(LAY, (1, 0, 0)), H, math.pi / 2.0)
    assert abs(abs(psi.vector[LAY.index((0, 1, 0))]) - 1) < 1e-12


def test_hamiltonian_spec():
    h = HamiltonianSpec("conditional_bs", {"g_bs": 1.0, "chi_gf": -2.0, "delta": 1.0}).build(LAY)
    assert np.abs(h.matrix - build_conditional_bs(LAY, 1.0, -2.0, 1.0).matrix).max() == 0
    with pytest.raises(ConfigError):
        HamiltonianSpec("laser").build(LAY)
    with pytest.raises(DimensionError):
        build_conditional_bs(HilbertLayout((2, 2, 2), ("A", "B", "T")), 1, 1, 1)


def test_collapse_ops_formulas():
    p = DeviceParams(kappa_a=0.2, n_th=0.1, Gamma_phi_ff=0.05)
    ops = dict(collapse_ops(LAY, p))
    assert len(ops) == 11
    a = ops["c1"].matrix
    i1, i0 = LAY.index((1, 0, 0)), LAY.index((0, 0, 0))
    assert abs(a[i0, i1] - math.sqrt(0.2 * 1.1)) < 1e-15
    assert abs(ops["c3"].matrix[i1, i0] - math.sqrt(0.2 * 0.1)) < 1e-15
    f = LAY.index((0, 0, 2))
    assert abs(ops["c11"].matrix[f, f] - math.sqrt(0.1)) < 1e-15
    assert np.abs(ops["c2"].matrix).max() == 0


def _expm_evolve(rho, H, ops, t):
    L = liouvillian(H, ops)
    v = scipy.linalg.expm(L * t) @ rho.reshape(-1)
    return v.reshape(rho.shape)


def test_lindblad_against_expm(rng):
    lay = HilbertLayout((3, 3), ("A", "B"))
    a = np.kron(np.diag([1, np.sqrt(2)], 1), np.eye(3))
    b = np.kron(np.eye(3), np.diag([1, np.sqrt(2)], 1))
    H = Operator(0.8 * (a.conj().T @ b + a @ b.conj().T) + 0.3 * a.conj().T @ a, lay)
    ops = [math.sqrt(0.2) * a, math.sqrt(0.05) * b.conj().T, math.sqrt(0.1) * b.conj().T @ b]
    rho0 = random_density_matrix(9, rng)
    out = evolve_lindblad(DensityMatrix(rho0, lay), H, [Operator(o, lay) for o in ops], 2.5)
    ref = _expm_evolve(rho0, H.matrix, ops, 2.5)
    assert np.abs(out.matrix - ref).max() < 1e-8


def test_large_space_stepping_against_expm(rng):
    lay = HilbertLayout((40,))
    h = rng.normal(size=(40, 40)) + 1j * rng.normal(size=(40, 40))
    H = Operator(0.05 * (h + h.conj().T), lay)
    c = np.diag(np.sqrt(np.arange(1, 40)), 1) * 0.1
    rho0 = random_density_matrix(40, rng)
    out = evolve_lindblad(DensityMatrix(rho0, lay), H, [Operator(c, lay)], 0.7)
    ref = _expm_evolve(rho0, H.matrix, [c], 0.7)
    assert np.abs(out.matrix - ref).max() < 1e-8


def test_cavity_decay_and_herald():
    p = DeviceParams(kappa_a=0.3)
    ops = [op for _, op in collapse_ops(LAY, p)]
    rho = basis_ket(LAY, (1, 0, 0)).dm()
    zero = Operator(np.zeros((27, 27)), LAY)
    out = evolve_lindblad(rho, zero, ops, 2.0)
    assert abs(out.matrix[LAY.index((1, 0, 0)), LAY.index((1, 0, 0))] - math.exp(-0.6)) < 1e-9
    kept = evolve_lindblad(rho, zero, [], 2.0, heralded=[dict(collapse_ops(LAY, p))["c1"]])
    assert abs(1 - kept.trace() - (1 - math.exp(-0.6))) < 1e-9


def test_apply_superop_on_trailing_factor(rng):
    S = lindblad_superop(Operator(np.diag([0.0, 1.0])), [np.array([[0, 0.5], [0, 0]])], 1.0)
    rho = random_density_matrix(6, rng)
    out = apply_superop(rho, S, 2)
    # oracle: act on each 2x2 block of the leading index pair
    blocks = rho.reshape(3, 2, 3, 2)
    for i in range(3):
        for j in range(3):
            ref = (S @ blocks[i, :, j, :].reshape(-1)).reshape(2, 2)
            assert np.abs(out.reshape(3, 2, 3, 2)[i, :, j, :] - ref).max() < 1e-14


def test_lindblad_dimension_checks():
    H = Operator(np.eye(4))
    with pytest.raises(DimensionError):
        evolve_lindblad(DensityMatrix(np.eye(3) / 3, HilbertLayout((3,))), H, [], 1.0)
    with pytest.raises(DimensionError):
        evolve_lindblad(DensityMatrix(np.eye(4) / 4, HilbertLayout((4,))), H, [Operator(np.eye(2))], 1.0)
