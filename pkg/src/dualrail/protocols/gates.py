"""Joint-parity unitary, erasure check, ZZ(theta) gates, CZ compilation, sideband preparation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import (DensityMatrix, HilbertLayout, Operator, apply_unitary, embed, hermitize,
                    partial_trace)
from ..dynamics import (F, G, DeviceParams, build_conditional_bs, build_sideband_gf, collapse_ops,
                        evolve_lindblad, evolve_unitary, nonzero, propagator)
from ..errors import ConfigError, DimensionError
from ..logical import CARDINAL_STATES
from .common import (OutcomeBranch, branch_from, gf_rotation, gf_sigma_z, ef_rotation, ge_rotation,
                     measure_gef, swap_modes)

CORE = HilbertLayout.standard()
CHECK_LAYOUT = HilbertLayout((3, 3, 3, 3, 3), ("Q1", "Q2", "A", "B", "T"))
MODES = ("ideal", "physical")


def _check_mode(mode: str):
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")


# ------------------------------------------------------------------ operating point

def jp_operating_point(chi_gf: float) -> tuple[float, float, float]:
    """(delta, g_bs, duration) for the joint-parity interaction."""
    if chi_gf == 0:
        raise ConfigError("chi_gf must be nonzero")
    return -chi_gf / 2, math.sqrt(3) / 2 * abs(chi_gf), 2 * math.pi / abs(chi_gf)


def _wrap(phi: float) -> float:
    return math.atan2(math.sin(phi), math.cos(phi))


def block_phase(delta: float, omega: float) -> float:
    """Per-photon phase pi (1 - delta/omega) acquired after a full beamsplitter revolution."""
    return _wrap(math.pi * (1 - delta / omega))


def jp_phases(chi_gf: float) -> tuple[float, float]:
    """Analytic (phi_g, phi_f) at the operating point."""
    delta, g_bs, _ = jp_operating_point(chi_gf)
    omega = math.hypot(delta, g_bs)
    return block_phase(delta, omega), block_phase(delta + chi_gf, omega)


def jp_hamiltonian(params: DeviceParams, layout: HilbertLayout = CORE) -> Operator:
    delta, g_bs, _ = jp_operating_point(params.chi_gf)
    return build_conditional_bs(layout, g_bs, params.chi_gf, delta)


def photon_phase(layout: HilbertLayout, phi: float, cavities=("A", "B")) -> Operator:
    """exp(i phi (n_a + n_b))."""
    out = Operator(np.eye(layout.total), layout)
    for c in cavities:
        m = layout.mode(c)
        out = out @ embed(layout, m, np.diag(np.exp(1j * phi * np.arange(layout.dims[m]))))
    return out


def u_jp_ideal(layout: HilbertLayout = CORE) -> Operator:
    """1 on transmon g and e, joint parity exp(i pi (n_a + n_b)) on f."""
    t = layout.mode("T")
    if layout.dims[t] < 3:
        raise DimensionError("U_JP needs a transmon with levels g, e, f")
    d = layout.dims[t]
    pf = np.zeros((d, d)); pf[F, F] = 1
    proj_f = embed(layout, t, pf)
    parity = photon_phase(layout, math.pi)
    return Operator(np.eye(layout.total), layout) - proj_f + parity @ proj_f


def u_jp_unitary(params: DeviceParams, jump_at: float | None = None, frame: bool = True) -> Operator:
    """Noise-free propagator of the joint-parity interaction on the (3, 3, 3) core.

    ``jump_at`` in [0, 1] inserts a g-f dephasing jump at that fraction of the
    duration. With ``frame`` the photon-number frame exp(i phi_g n) is removed.
    """
    H = jp_hamiltonian(params)
    _, _, T = jp_operating_point(params.chi_gf)
    if jump_at is None:
        u = propagator(H, T)
    else:
        u = propagator(H, (1 - jump_at) * T) @ gf_sigma_z(CORE) @ propagator(H, jump_at * T)
    if frame:
        phi_g, _ = jp_phases(params.chi_gf)
        u = photon_phase(CORE, -phi_g) @ u
    return u


def extracted_phases(params: DeviceParams) -> tuple[float, float]:
    """Conditional phases read off the numerical propagator (no frame removal)."""
    u = u_jp_unitary(params, frame=False).matrix
    i_g = CORE.index((1, 0, G))
    i_f = CORE.index((1, 0, F))
    return float(np.angle(u[i_g, i_g])), float(np.angle(u[i_f, i_f]))


def low_photon_indices(layout: HilbertLayout = CORE, max_photons: int = 2) -> list[int]:
    ia, ib = layout.mode("A"), layout.mode("B")
    return [i for i in range(layout.total)
            if sum(layout.occupations(i)[m] for m in (ia, ib)) <= max_photons]


def _lift(layout: HilbertLayout, op: Operator) -> Operator:
    """Embed an operator on the (A, B, T) core as the trailing factor of ``layout``."""
    if layout == CORE:
        return op
    if layout.labels[-3:] != CORE.labels or layout.dims[-3:] != CORE.dims:
        raise DimensionError("layout must end with modes A, B, T of dimension 3")
    lead = layout.total // CORE.total
    return Operator(np.kron(np.eye(lead), op.matrix), layout)


def _loss_ops(params: DeviceParams):
    return [op for name, op in collapse_ops(CORE, params) if name in ("c1", "c2")]


def _noise_ops(params: DeviceParams, herald_loss: bool):
    ops = collapse_ops(CORE, params)
    if herald_loss:
        return [op for name, op in ops if name not in ("c1", "c2")]
    return [op for _, op in ops]


def u_jp(rho: DensityMatrix, params: DeviceParams, mode: str = "ideal", jump_at: float | None = None,
         herald_loss: bool = False) -> DensityMatrix:
    """Apply the joint-parity unitary.

    Physical mode integrates the detuned conditional beamsplitter with the
    device collapse operators and removes the photon-number frame in
    software. With ``herald_loss`` cavity decay is dropped from the jump
    term, so the returned state is sub-normalized by the loss probability.
    """
    _check_mode(mode)
    layout = rho.layout
    if mode == "ideal" and jump_at is None:
        return apply_unitary(rho, _lift(layout, u_jp_ideal()))
    H = jp_hamiltonian(params)
    _, _, T = jp_operating_point(params.chi_gf)
    ops = nonzero(_noise_ops(params, herald_loss)) if mode == "physical" else []
    herald = nonzero(_loss_ops(params)) if mode == "physical" and herald_loss else []
    if not ops and not herald:
        return apply_unitary(rho, _lift(layout, u_jp_unitary(params, jump_at)))
    if jump_at is None:
        rho = evolve_lindblad(rho, H, ops, T, heralded=herald)
    else:
        rho = evolve_lindblad(rho, H, ops, jump_at * T, heralded=herald)
        rho = apply_unitary(rho, _lift(layout, gf_sigma_z(CORE)))
        rho = evolve_lindblad(rho, H, ops, (1 - jump_at) * T, heralded=herald)
    phi_g, _ = jp_phases(params.chi_gf)
    return apply_unitary(rho, _lift(layout, photon_phase(CORE, -phi_g)))


# -------------------------------------------------------------------- erasure check

def _r_in(layout):
    return gf_rotation(layout, "y", -math.pi / 2)   # exp(+i pi/4 Y_gf)


def _r_out(layout):
    return gf_rotation(layout, "y", math.pi / 2)    # exp(-i pi/4 Y_gf)


ERASURE_FLAGS = {"g": "pass", "e": "decay", "f": "even_parity"}


def erasure_check(rho: DensityMatrix, params: DeviceParams, mode: str = "ideal",
                  jump_at: float | None = None) -> list[OutcomeBranch]:
    """Joint-parity erasure check: odd parity reads g, even f, ancilla decay e."""
    layout = rho.layout
    r = _r_in(layout)
    rho = apply_unitary(rho, r)
    rho = u_jp(rho, params, mode, jump_at)
    rho = apply_unitary(rho, r)
    eta_ge, eta_gf = (params.eta_ge, params.eta_gf) if mode == "physical" else (0.0, 0.0)
    out = measure_gef(rho, eta_ge, eta_gf)
    return [OutcomeBranch(b.probability, b.state, b.label, {"flag": ERASURE_FLAGS[b.label]}) for b in out]


# ------------------------------------------------------------------------ ZZ gates

def zz_matrix(theta: float) -> np.ndarray:
    """diag(1, e^{i theta}, e^{i theta}, 1)."""
    return np.diag([1, np.exp(1j * theta), np.exp(1j * theta), 1])


def _check_theta(theta: float):
    if not math.isfinite(theta) or not 0 <= theta < 2 * math.pi + 1e-12:
        raise ConfigError(f"theta must lie in [0, 2 pi), got {theta}")


def zz_sequence_unitary(theta: float, params: DeviceParams | None = None, jump_at: float | None = None,
                        jump_in: int = 0) -> Operator:
    """Noise-free ZZ(theta) sequence on the (3, 3, 3) core.

    With ``jump_at`` a g-f dephasing jump is inserted in U_JP number ``jump_in``
    (0 or 1); otherwise both U_JP are the ideal unitary.
    """
    ujp = [u_jp_ideal(), u_jp_ideal()]
    if jump_at is not None:
        if params is None:
            raise ConfigError("jump injection needs device parameters for the Hamiltonian")
        ujp[jump_in] = u_jp_unitary(params, jump_at)
    return (_r_out(CORE) @ ujp[1] @ gf_rotation(CORE, "x", theta) @ ujp[0] @ _r_in(CORE))


def codespace_block(u: Operator, t_in: int = G, t_out: int = G) -> np.ndarray:
    """4x4 block <t_out| U |t_in> on cavity occupations {0, 1}^2 of (A, B)."""
    idx_in = [CORE.index((a, b, t_in)) for a in (0, 1) for b in (0, 1)]
    idx_out = [CORE.index((a, b, t_out)) for a in (0, 1) for b in (0, 1)]
    return u.matrix[np.ix_(idx_out, idx_in)]


def phase_distance(u: np.ndarray, ref: np.ndarray) -> float:
    """min over alpha of max |u - e^{i alpha} ref|."""
    overlap = np.vdot(ref, u)
    alpha = np.angle(overlap) if abs(overlap) > 0 else 0.0
    best = np.abs(u - np.exp(1j * alpha) * ref).max()
    # the max-norm minimizer can differ slightly from the Frobenius one; refine on a grid
    for da in np.linspace(-1e-3, 1e-3, 21):
        best = min(best, np.abs(u - np.exp(1j * (alpha + da)) * ref).max())
    return float(best)


def _zz_apply(rho, theta, params, mode, jump_at, herald_loss):
    layout = rho.layout
    r = _r_in(layout)
    rho = apply_unitary(rho, r)
    rho = u_jp(rho, params, mode, jump_at, herald_loss)
    rho = apply_unitary(rho, gf_rotation(layout, "x", theta))
    rho = u_jp(rho, params, mode, None, herald_loss)
    return apply_unitary(rho, _r_out(layout))


def zz_gate(rho: DensityMatrix, theta: float, params: DeviceParams, mode: str = "ideal",
            jump_at: float | None = None, herald_loss: bool | None = None) -> list[OutcomeBranch]:
    """ZZ(theta) between cavities A and B with a three-outcome ancilla readout.

    Labels: g (gate applied), e and f (flagged), and in physical mode "loss"
    for heralded cavity photon loss.
    """
    _check_mode(mode)
    _check_theta(theta)
    if rho.layout != CORE:
        raise DimensionError("zz_gate acts on the (A, B, T) layout with dimension 3 each")
    herald_loss = (mode == "physical") if herald_loss is None else herald_loss
    kept = _zz_apply(rho, theta, params, mode, jump_at, herald_loss)
    eta = (params.eta_ge, params.eta_gf) if mode == "physical" else (0.0, 0.0)
    out = measure_gef(kept, *eta, frame="software photon-number frame removed after each U_JP")
    if herald_loss and mode == "physical":
        full = _zz_apply(rho, theta, params, mode, jump_at, False)
        b = branch_from(full.matrix - kept.matrix, CORE, "loss")
        if b is not None:
            out.append(b)
    return out


def zz_checked_target(theta: float) -> np.ndarray:
    """Logical action of the checked gate: XX composed with ZZ(theta)."""
    x = np.array([[0, 1], [1, 0]])
    return np.kron(x, x) @ zz_matrix(theta)


def _checked_apply(rho, theta, params, mode):
    layout = rho.layout
    rho = apply_unitary(rho, _r_in(layout))
    rho = u_jp(rho, params, mode)
    rho = apply_unitary(rho, gf_rotation(layout, "x", theta))
    sw = swap_modes(layout, "Q1", "A") @ swap_modes(layout, "Q2", "B")
    rho = apply_unitary(rho, sw)
    rho = u_jp(rho, params, mode)
    return apply_unitary(rho, _r_out(layout))


def zz_gate_with_check(rho: DensityMatrix, theta: float, params: DeviceParams, mode: str = "ideal"
                       ) -> list[OutcomeBranch]:
    """ZZ(theta) on two dual-rail qubits with a built-in joint-parity check.

    Qubit 1 lives in (A, Q1) and qubit 2 in (B, Q2); |0>_L has the photon in
    the interacting cavity. The rails are swapped between the two U_JP, so
    the g branch carries an extra XX, reported in the branch metadata.
    The f branch flags an odd total photon number in the four cavities.
    """
    _check_mode(mode)
    _check_theta(theta)
    if rho.layout != CHECK_LAYOUT:
        raise DimensionError("zz_gate_with_check acts on the five-mode (Q1, Q2, A, B, T) layout")
    out = _checked_apply(rho, theta, params, mode)
    eta = (params.eta_ge, params.eta_gf) if mode == "physical" else (0.0, 0.0)
    return measure_gef(out, *eta, frame="XX")


def dual_rail_pair_state(psi1, psi2, transmon: int = G) -> DensityMatrix:
    """Two dual-rail qubits (u1, v1), (u2, v2) in CHECK_LAYOUT; None for a rail in |00>."""
    def rails(psi):
        # returns amplitudes over (n_inner, n_outer)
        m = np.zeros((3, 3), dtype=complex)
        if psi is None:
            m[0, 0] = 1
        else:
            m[1, 0], m[0, 1] = psi
        return m
    r1, r2 = rails(psi1), rails(psi2)
    v = np.zeros(CHECK_LAYOUT.dims, dtype=complex)
    # axes: Q1, Q2, A, B, T
    v[:, :, :, :, transmon] = np.einsum("aq,br->qrab", r1, r2)
    v = v.reshape(-1)
    return DensityMatrix(np.outer(v, v.conj()), CHECK_LAYOUT)


def logical_pair_block(rho: DensityMatrix) -> np.ndarray:
    """4x4 logical density matrix of the checked-gate layout (unnormalized)."""
    red = partial_trace(rho, ["Q1", "Q2", "A", "B"])
    lay = red.layout  # Q1, Q2, A, B
    idx = []
    for x1 in (0, 1):
        for x2 in (0, 1):
            occ = [x1, x2, 1 - x1, 1 - x2]
            idx.append(lay.index(occ))
    return red.matrix[np.ix_(idx, idx)]


# --------------------------------------------------------------------- gate metrics

def _fock_pair_state(psi1, psi2, transmon: int = G) -> DensityMatrix:
    v = np.zeros(CORE.dims, dtype=complex)
    v[:2, :2, transmon] = np.outer(psi1, psi2)
    v = v.reshape(-1)
    return DensityMatrix(np.outer(v, v.conj()), CORE)


@dataclass(frozen=True)
class GateMetrics:
    erasure: float
    pauli: float
    p_g: float
    p_e: float
    p_f: float
    p_loss: float


def _metrics(results) -> GateMetrics:
    n = len(results)
    tot = {k: sum(r[k] for r in results) / n for k in ("g", "e", "f", "loss", "infid")}
    return GateMetrics(tot["e"] + tot["f"] + tot["loss"], tot["infid"], tot["g"], tot["e"], tot["f"],
                       tot["loss"])


def zz_gate_metrics(theta: float, params: DeviceParams, mode: str = "physical") -> GateMetrics:
    """Average flag rates and g-branch infidelity over the 36 product cardinal inputs."""
    target = zz_matrix(theta)
    results = []
    for s1 in CARDINAL_STATES:
        for s2 in CARDINAL_STATES:
            psi = np.kron(s1, s2)
            rho = _fock_pair_state(np.array(s1), np.array(s2))
            branches = zz_gate(rho, theta, params, mode)
            r = {"g": 0.0, "e": 0.0, "f": 0.0, "loss": 0.0, "infid": 1.0}
            for b in branches:
                r[b.label] = b.probability
                if b.label == "g":
                    cav = partial_trace(b.state, ["A", "B"]).matrix
                    idx = [CORE.sub([0, 1]).index((a, c)) for a in (0, 1) for c in (0, 1)]
                    phi = target @ psi
                    r["infid"] = 1 - float(np.real(phi.conj() @ cav[np.ix_(idx, idx)] @ phi))
            results.append(r)
    return _metrics(results)


def zz_checked_metrics(theta: float, params: DeviceParams, mode: str = "physical") -> GateMetrics:
    target = zz_checked_target(theta)
    results = []
    for s1 in CARDINAL_STATES:
        for s2 in CARDINAL_STATES:
            psi = np.kron(s1, s2)
            branches = zz_gate_with_check(dual_rail_pair_state(s1, s2), theta, params, mode)
            r = {"g": 0.0, "e": 0.0, "f": 0.0, "loss": 0.0, "infid": 1.0}
            for b in branches:
                r[b.label] = b.probability
                if b.label == "g":
                    phi = target @ psi
                    r["infid"] = 1 - float(np.real(phi.conj() @ logical_pair_block(b.state) @ phi))
            results.append(r)
    return _metrics(results)


# --------------------------------------------------------------------- CZ compilation

@dataclass(frozen=True)
class GateStep:
    name: str           # "Z", "ZZ" or "H"
    angle: float | None
    qubits: tuple


def _single(m: np.ndarray, q: int) -> np.ndarray:
    return np.kron(m, np.eye(2)) if q == 0 else np.kron(np.eye(2), m)


def step_matrix(step: GateStep) -> np.ndarray:
    if step.name == "ZZ":
        return zz_matrix(step.angle)
    if step.name == "Z":
        return _single(np.diag([1, np.exp(1j * step.angle)]), step.qubits[0])
    if step.name == "H":
        return _single(np.array([[1, 1], [1, -1]]) / math.sqrt(2), step.qubits[0])
    raise ConfigError(f"unknown gate step {step.name!r}")


def compose(steps) -> np.ndarray:
    """Matrix of a time-ordered gate list."""
    u = np.eye(4, dtype=complex)
    for s in steps:
        u = step_matrix(s) @ u
    return u


def compile_cz(cnot: bool = False, target: int = 1) -> list[GateStep]:
    """CZ as ZZ(pi/2) followed by Z(-pi/2) on both qubits; optionally CNOT via Hadamards."""
    seq = [GateStep("ZZ", math.pi / 2, (0, 1)),
           GateStep("Z", -math.pi / 2, (0,)), GateStep("Z", -math.pi / 2, (1,))]
    if cnot:
        seq = [GateStep("H", None, (target,))] + seq + [GateStep("H", None, (target,))]
    return seq


CZ = np.diag([1, 1, 1, -1]).astype(complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


# ------------------------------------------------------------------- state preparation

def sideband_prepare(params: DeviceParams, mode: str = "ideal", duration: float | None = None
                     ) -> list[OutcomeBranch]:
    """Load one photon into cavity A: g-e pi, e-f pi, then the f0-g1 sideband.

    Branches split on the photon number of cavity A: "loaded" (at least one
    photon) and "vacuum", a detectable failure.
    """
    _check_mode(mode)
    if params.omega_sb <= 0:
        raise ConfigError("omega_sb must be positive")
    layout = CORE
    v = np.zeros(layout.total, dtype=complex)
    v[layout.index((0, 0, G))] = 1
    rho = DensityMatrix(np.outer(v, v.conj()), layout)
    rho = apply_unitary(rho, ge_rotation(layout, math.pi))
    rho = apply_unitary(rho, ef_rotation(layout, math.pi))
    t = math.pi / params.omega_sb if duration is None else duration
    H = build_sideband_gf(layout, params.omega_sb)
    ops = [op for _, op in collapse_ops(layout, params)] if mode == "physical" else []
    rho = evolve_lindblad(rho, H, ops, t) if ops else evolve_unitary(rho, H, t)
    na = np.array([layout.occupations(i)[0] for i in range(layout.total)])
    out = []
    for label, mask in (("loaded", na >= 1), ("vacuum", na == 0)):
        p = np.diag(mask.astype(float))
        b = branch_from(hermitize(p @ rho.matrix @ p), layout, label)
        if b is not None:
            out.append(b)
    return out
