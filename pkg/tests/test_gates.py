import math

import numpy as np
import pytest

from dualrail.core import DensityMatrix, partial_trace
from dualrail.dynamics import E, F, G, DeviceParams
from dualrail.errors import ConfigError, DimensionError
from dualrail.protocols.common import gf_rotation, measure_gef, total_probability
from dualrail.protocols.gates import (CHECK_LAYOUT, CNOT, CORE, CZ, codespace_block, compile_cz, compose,
                                      dual_rail_pair_state, erasure_check, extracted_phases, jp_phases,
                                      logical_pair_block, low_photon_indices, phase_distance,
                                      sideband_prepare, u_jp, u_jp_ideal, u_jp_unitary, zz_checked_target,
                                      zz_gate, zz_gate_metrics, zz_gate_with_check, zz_matrix,
                                      zz_sequence_unitary)

S2 = 1 / math.sqrt(2)


def core_state(cav, transmon):
    """cav: dict (nA, nB) -> amplitude; transmon: length-3 amplitudes."""
    v = np.zeros(CORE.dims, dtype=complex)
    for (a, b), amp in cav.items():
        v[a, b, :] = amp * np.asarray(transmon, dtype=complex)
    return v.reshape(-1)


def dm(v, layout=CORE):
    return DensityMatrix(np.outer(v, v.conj()), layout)


def fidelity(rho, v):
    return float(np.real(v.conj() @ rho.matrix @ v))


def pair_cavity(branch):
    red = partial_trace(branch.state, ["A", "B"]).matrix
    sub = CORE.sub([0, 1])
    idx = [sub.index((a, b)) for a in (0, 1) for b in (0, 1)]
    return red[np.ix_(idx, idx)]


def test_gf_rotation_convention():
    r = gf_rotation(CORE, "y", -math.pi / 2).matrix
    out = r @ core_state({(0, 0): 1}, [1, 0, 0])
    assert np.abs(out - core_state({(0, 0): 1}, [S2, 0, S2])).max() < 1e-15


@pytest.mark.parametrize("cav,sign", [((0, 1), -1), ((1, 0), -1), ((0, 0), 1), ((1, 1), 1), ((2, 0), 1)])
def test_u_jp_ideal_parity(table2, cav, sign):
    rho = dm(core_state({cav: 1}, [S2, 0, S2]))
    out = u_jp(rho, table2)
    want = core_state({cav: 1}, [S2, 0, sign * S2])
    assert abs(fidelity(out, want) - 1) < 1e-14


def test_u_jp_physical_matches_ideal(table2):
    idx = low_photon_indices()
    u = u_jp_unitary(table2).matrix[np.ix_(idx, idx)]
    ref = u_jp_ideal().matrix[np.ix_(idx, idx)]
    assert np.abs(u - ref).max() < 1e-10
    phi_g, phi_f = extracted_phases(table2)
    assert abs(phi_g - math.pi / 2) < 1e-10
    assert abs(phi_f + math.pi / 2) < 1e-10
    assert jp_phases(table2.chi_gf) == pytest.approx((math.pi / 2, -math.pi / 2), abs=1e-12)


def test_u_jp_noiseless_physical_mode(table2):
    quiet = DeviceParams(chi_gf=table2.chi_gf)
    v = core_state({(0, 1): 0.6, (1, 0): 0.8j}, [S2, 0, S2])
    a = u_jp(dm(v), quiet, mode="physical")
    b = u_jp(dm(v), quiet)
    assert np.abs(a.matrix - b.matrix).max() < 1e-10


def test_u_jp_needs_three_levels():
    from dualrail.core import HilbertLayout
    with pytest.raises(DimensionError):
        u_jp_ideal(HilbertLayout((2, 2, 2), ("A", "B", "T")))


def test_mode_validation(table2):
    with pytest.raises(ConfigError):
        u_jp(dm(core_state({(0, 1): 1}, [1, 0, 0])), table2, mode="noisy")


@pytest.mark.parametrize("cav,label", [({(0, 1): 1}, "g"), ({(1, 0): 1}, "g"), ({(0, 1): 0.6, (1, 0): 0.8}, "g"),
                                       ({(0, 0): 1}, "f"), ({(1, 1): 1}, "f")])
def test_erasure_check_outcomes(table2, cav, label):
    out = erasure_check(dm(core_state(cav, [1, 0, 0])), table2)
    assert len(out) == 1
    assert out[0].label == label
    assert abs(out[0].probability - 1) < 1e-14


def test_erasure_check_is_qnd(table2, rng):
    for _ in range(5):
        u, v = rng.normal(size=2) + 1j * rng.normal(size=2)
        n = math.hypot(abs(u), abs(v))
        psi = core_state({(1, 0): u / n, (0, 1): v / n}, [1, 0, 0])
        out = erasure_check(dm(psi), table2)
        assert out[0].label == "g"
        assert abs(fidelity(out[0].state, psi) - 1) < 1e-12


def test_erasure_check_decay_flag(table2):
    out = erasure_check(dm(core_state({(1, 0): 1}, [0, 1, 0])), table2)
    assert out[0].label == "e"
    assert out[0].meta["flag"] == "decay"


@pytest.mark.parametrize("s", np.linspace(0.05, 0.95, 10))
def test_erasure_check_dephasing_jump_transparency(table2, s):
    psi = core_state({(1, 0): 0.6, (0, 1): 0.8j}, [1, 0, 0])
    out = erasure_check(dm(psi), table2, jump_at=float(s))
    flipped = {b.label: b for b in out}
    assert abs(flipped["f"].probability - 1) < 1e-10
    cav = pair_cavity(flipped["f"])
    phi = np.array([0, 0.8j, 0.6, 0])
    assert abs(np.real(phi.conj() @ cav @ phi) - 1) < 1e-10


def test_zz_uniform_state(table2):
    psi = core_state({(a, b): 0.5 for a in (0, 1) for b in (0, 1)}, [1, 0, 0])
    out = zz_gate(dm(psi), math.pi / 2, table2)
    assert len(out) == 1 and out[0].label == "g"
    want = np.array([1, 1j, 1j, 1]) / 2
    cav = pair_cavity(out[0])
    assert abs(np.real(want.conj() @ cav @ want) - 1) < 1e-12


def test_zz_zero_angle_is_identity(table2):
    u = codespace_block(zz_sequence_unitary(0.0))
    assert phase_distance(u, np.eye(4)) < 1e-12


@pytest.mark.parametrize("theta", [0.3, math.pi / 2, 2.0, math.pi, 5.5])
def test_zz_sequence(theta):
    u = codespace_block(zz_sequence_unitary(theta))
    assert phase_distance(u, zz_matrix(theta)) < 1e-12
    leak = codespace_block(zz_sequence_unitary(theta), G, F)
    assert np.abs(leak).max() < 1e-12


@pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
def test_zz_dephasing_jump_flags_f(table2, s):
    theta = 1.1
    full = zz_sequence_unitary(theta, table2, jump_at=s, jump_in=0)
    assert np.abs(codespace_block(full, G, G)).max() < 1e-9
    u = codespace_block(full, G, F)
    assert phase_distance(u, zz_matrix(-theta)) < 1e-9


def test_zz_gate_rejects(table2):
    psi = dm(core_state({(0, 1): 1}, [1, 0, 0]))
    with pytest.raises(ConfigError):
        zz_gate(psi, 7.0, table2)
    with pytest.raises(ConfigError):
        zz_gate(psi, float("nan"), table2)
    with pytest.raises(DimensionError):
        zz_gate(dual_rail_pair_state((1, 0), (1, 0)), 0.5, table2)


def test_zz_physical_orders(table2):
    m = zz_gate_metrics(math.pi / 2, table2)
    assert math.floor(math.log10(m.erasure)) == -2
    assert math.floor(math.log10(m.pauli)) == -4
    assert abs(m.p_g + m.p_e + m.p_f + m.p_loss - 1) < 1e-8


def test_zz_physical_branches_sum(table2):
    psi = core_state({(1, 1): 0.5, (0, 1): 0.5, (1, 0): 0.5, (0, 0): 0.5}, [1, 0, 0])
    out = zz_gate(dm(psi), 0.7, table2, mode="physical")
    assert abs(total_probability(out) - 1) < 1e-8
    assert {b.label for b in out} == {"g", "e", "f", "loss"}


@pytest.mark.parametrize("theta", [0.0, 0.4, math.pi / 2, 3.0])
def test_checked_gate_codespace(table2, rng, theta):
    s1 = rng.normal(size=2) + 1j * rng.normal(size=2); s1 /= np.linalg.norm(s1)
    s2 = rng.normal(size=2) + 1j * rng.normal(size=2); s2 /= np.linalg.norm(s2)
    out = zz_gate_with_check(dual_rail_pair_state(s1, s2), theta, table2)
    assert len(out) == 1 and out[0].label == "g"
    assert out[0].meta["frame"] == "XX"
    phi = zz_checked_target(theta) @ np.kron(s1, s2)
    assert abs(np.real(phi.conj() @ logical_pair_block(out[0].state) @ phi) - 1) < 1e-12


@pytest.mark.parametrize("pair,label", [(((1, 0), None), "f"), ((None, (S2, S2)), "f"), ((None, None), "g")])
def test_checked_gate_leakage(table2, pair, label):
    out = zz_gate_with_check(dual_rail_pair_state(*pair), 1.0, table2)
    assert len(out) == 1 and out[0].label == label


def test_checked_target_is_xx_zz():
    x = np.array([[0, 1], [1, 0]])
    assert np.abs(zz_checked_target(0.0) - np.kron(x, x)).max() < 1e-15


def test_cz_and_cnot():
    assert phase_distance(compose(compile_cz()), CZ) < 1e-12
    assert np.abs(compose(compile_cz()) - CZ).max() < 1e-12
    assert phase_distance(compose(compile_cz(cnot=True)), CNOT) < 1e-12
    names = [s.name for s in compile_cz()]
    assert names.count("ZZ") == 1


def test_measure_gef_confusion():
    rho = dm(core_state({(0, 1): 1}, [1, 0, 0]))
    probs = {b.label: b.probability for b in measure_gef(rho, 0.01, 1e-4)}
    assert abs(probs["g"] - (1 - 0.01 - 1e-4)) < 1e-15
    assert abs(probs["e"] - 0.01) < 1e-15
    assert abs(probs["f"] - 1e-4) < 1e-15
    rho = dm(core_state({(0, 1): 1}, [0, 0, 1]))
    probs = {b.label: b.probability for b in measure_gef(rho, 0.01, 1e-4)}
    assert abs(probs["g"] - 1e-4) < 1e-15


def test_sideband_ideal(table2):
    out = {b.label: b for b in sideband_prepare(table2)}
    assert abs(out["loaded"].probability - 1) < 1e-12
    v = core_state({(1, 0): 1}, [1, 0, 0])
    assert abs(fidelity(out["loaded"].state, v) - 1) < 1e-12


def test_sideband_half_duration(table2):
    out = {b.label: b.probability for b in sideband_prepare(table2, duration=math.pi / (2 * table2.omega_sb))}
    assert abs(out["loaded"] - 0.5) < 1e-12
    assert abs(out["vacuum"] - 0.5) < 1e-12


def test_sideband_physical_failure_rate(table2):
    out = {b.label: b.probability for b in sideband_prepare(table2, mode="physical")}
    estimate = table2.Gamma_down_ef * math.pi / table2.omega_sb
    assert estimate / 3 < out["vacuum"] < 3 * estimate
    assert abs(out["vacuum"] + out["loaded"] - 1) < 1e-9


def test_sideband_bad_rate():
    with pytest.raises(ConfigError):
        sideband_prepare(DeviceParams(omega_sb=0.0))
