"""Hamiltonians, collapse operators and time evolution.

Units are the caller's choice as long as they are consistent; the presets
use microseconds for time and rad/us for rates and frequencies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache

import numpy as np

from .core import (DensityMatrix, HilbertLayout, Ket, Operator, annihilation, embed,
                   hermitize, level_op, number)
from .errors import ConfigError, DimensionError, IntegrationError

G, E, F = 0, 1, 2  # transmon levels


@dataclass(frozen=True)
class DeviceParams:
    kappa_a: float = 0.0
    kappa_b: float = 0.0
    gamma_phi_a: float = 0.0
    gamma_phi_b: float = 0.0
    n_th: float = 0.0
    n_th_A: float = 0.0
    Gamma_down_ge: float = 0.0
    Gamma_up_ge: float = 0.0
    Gamma_down_ef: float = 0.0
    Gamma_up_ef: float = 0.0
    Gamma_phi_ff: float = 0.0
    Gamma_phi_ee: float = 0.0
    chi_gf: float = 0.0
    chi_ge: float = 0.0
    g_bs: float = 0.0
    omega_sb: float = 0.0
    eta_ge: float = 0.0
    eta_gf: float = 0.0
    P_d: float = 0.0
    P_o: float = 0.0
    T_gate: float = 0.0
    readout_idle: float = 0.0

    RATES = ("kappa_a", "kappa_b", "gamma_phi_a", "gamma_phi_b", "Gamma_down_ge", "Gamma_up_ge",
             "Gamma_down_ef", "Gamma_up_ef", "Gamma_phi_ff", "Gamma_phi_ee", "g_bs", "omega_sb",
             "T_gate", "readout_idle")
    PROBABILITIES = ("eta_ge", "eta_gf", "P_d", "P_o")

    def __post_init__(self):
        for name in self.RATES:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in self.PROBABILITIES:
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in [0, 1], got {getattr(self, name)}")
        for name in ("n_th", "n_th_A"):
            if not 0 <= getattr(self, name) < 1:
                raise ConfigError(f"{name} must lie in [0, 1), got {getattr(self, name)}")
        if self.P_d + self.P_o > 1:
            raise ConfigError("P_d + P_o must not exceed 1")

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_dict(cls, data: dict) -> "DeviceParams":
        unknown = set(data) - set(cls.field_names())
        if unknown:
            raise ConfigError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        return cls(**{k: float(v) for k, v in data.items()})

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.field_names()}

    def with_(self, **changes) -> "DeviceParams":
        return replace(self, **changes)

    @property
    def kappa_bar(self) -> float:
        return 0.5 * (self.kappa_a + self.kappa_b)

    @property
    def delta_kappa(self) -> float:
        return self.kappa_b - self.kappa_a

    @property
    def gamma_phi(self) -> float:
        return self.gamma_phi_a + self.gamma_phi_b


# ---------------------------------------------------------------- Hamiltonians

def _ladder(layout: HilbertLayout, mode) -> Operator:
    m = layout.mode(mode)
    return embed(layout, m, annihilation(layout.dims[m]))


def _number(layout: HilbertLayout, mode) -> Operator:
    m = layout.mode(mode)
    return embed(layout, m, number(layout.dims[m]))


def _transmon(layout: HilbertLayout, i: int, j: int, mode="T") -> Operator:
    m = layout.mode(mode)
    return embed(layout, m, level_op(layout.dims[m], i, j))


def build_beamsplitter(layout: HilbertLayout, g_bs: float, phi: float = 0.0, delta: float = 0.0,
                       modes=("A", "B")) -> Operator:
    """(g_bs/2)(a b^dag e^{-i phi} + a^dag b e^{i phi}) + delta a^dag a."""
    a, b = _ladder(layout, modes[0]), _ladder(layout, modes[1])
    h = 0.5 * g_bs * (np.exp(-1j * phi) * (a @ b.dag()) + np.exp(1j * phi) * (a.dag() @ b))
    return h + delta * (a.dag() @ a)


def build_conditional_bs(layout: HilbertLayout, g_bs: float, chi_gf: float, delta: float,
                         modes=("A", "B"), transmon="T") -> Operator:
    """Detuned beamsplitter plus chi_gf a^dag a |f><f| (cavity A carries the dispersive shift)."""
    t = layout.mode(transmon)
    if layout.dims[t] < 3:
        raise DimensionError("conditional beamsplitter needs a transmon with at least g, e, f")
    n_a = _number(layout, modes[0])
    pf = _transmon(layout, F, F, transmon)
    return build_beamsplitter(layout, g_bs, 0.0, delta, modes) + chi_gf * (n_a @ pf)


def build_dispersive(layout: HilbertLayout, chi: float, level: int = E, cavity="A",
                     transmon="T") -> Operator:
    """chi a^dag a |level><level|."""
    return chi * (_number(layout, cavity) @ _transmon(layout, level, level, transmon))


def build_sideband_gf(layout: HilbertLayout, omega: float, cavity="A", transmon="T") -> Operator:
    """(omega/2)(a^dag |g><f| + a |f><g|)."""
    t = layout.mode(transmon)
    if layout.dims[t] < 3:
        raise DimensionError("g-f sideband needs a transmon with at least g, e, f")
    a = _ladder(layout, cavity)
    gf = _transmon(layout, G, F, transmon)
    h = a.dag() @ gf
    return 0.5 * omega * (h + h.dag())


@dataclass(frozen=True)
class HamiltonianSpec:
    """Tagged Hamiltonian recipe: ``beamsplitter``, ``conditional_bs`` or ``sideband_gf``."""
    kind: str
    params: dict = field(default_factory=dict)

    def build(self, layout: HilbertLayout) -> Operator:
        builders = {
            "beamsplitter": build_beamsplitter,
            "conditional_bs": build_conditional_bs,
            "sideband_gf": build_sideband_gf,
        }
        try:
            builder = builders[self.kind]
        except KeyError:
            raise ConfigError(f"unknown Hamiltonian kind {self.kind!r}") from None
        return builder(layout, **self.params)


# ------------------------------------------------------------ collapse operators

@lru_cache(maxsize=64)
def collapse_ops(layout: HilbertLayout, params: DeviceParams, cavities=("A", "B"),
                 transmon="T") -> tuple[tuple[str, Operator], ...]:
    """The eleven cavity and transmon collapse operators c1..c11."""
    p = params
    a, b = _ladder(layout, cavities[0]), _ladder(layout, cavities[1])
    ops = [
        ("c1", math.sqrt(p.kappa_a * (1 + p.n_th)) * a),
        ("c2", math.sqrt(p.kappa_b * (1 + p.n_th)) * b),
        ("c3", math.sqrt(p.kappa_a * p.n_th) * a.dag()),
        ("c4", math.sqrt(p.kappa_b * p.n_th) * b.dag()),
        ("c5", math.sqrt(2 * p.gamma_phi_a) * (a.dag() @ a)),
        ("c6", math.sqrt(2 * p.gamma_phi_b) * (b.dag() @ b)),
    ]
    t = layout.mode(transmon)
    if layout.dims[t] < 3:
        raise DimensionError("transmon collapse operators need levels g, e, f")
    ops += [
        ("c7", math.sqrt(p.Gamma_down_ge) * _transmon(layout, G, E, transmon)),
        ("c8", math.sqrt(p.Gamma_up_ge) * _transmon(layout, E, G, transmon)),
        ("c9", math.sqrt(p.Gamma_down_ef) * _transmon(layout, E, F, transmon)),
        ("c10", math.sqrt(p.Gamma_up_ef) * _transmon(layout, F, E, transmon)),
        ("c11", math.sqrt(2 * p.Gamma_phi_ff) * _transmon(layout, F, F, transmon)),
    ]
    return tuple(ops)


def transmon_dephasing_ee(layout: HilbertLayout, params: DeviceParams, transmon="T") -> Operator:
    """sqrt(2 Gamma_phi^ee)|e><e|, the g-e dephasing used for parity readout."""
    return math.sqrt(2 * params.Gamma_phi_ee) * _transmon(layout, E, E, transmon)


def nonzero(ops) -> list[Operator]:
    """Drop names and operators that vanish identically."""
    out = []
    for op in ops:
        if isinstance(op, tuple):
            op = op[1]
        if np.abs(op.matrix).max(initial=0.0) > 0:
            out.append(op)
    return out


# ---------------------------------------------------------------- unitary evolution

def propagator(H: Operator, t: float) -> Operator:
    if not H.is_hermitian(1e-10):
        raise DimensionError("Hamiltonian is not Hermitian")
    w, v = np.linalg.eigh(hermitize(H.matrix))
    return Operator((v * np.exp(-1j * w * t)) @ v.conj().T, H.layout)


def evolve_unitary(state, H: Operator, t: float):
    u = propagator(H, t).matrix
    if isinstance(state, Ket):
        return Ket(u @ state.vector, state.layout)
    if isinstance(state, DensityMatrix):
        return DensityMatrix(hermitize(u @ state.matrix @ u.conj().T), state.layout)
    raise TypeError(f"cannot evolve {type(state).__name__}")


def heisenberg_bs(g_bs: float, delta: float, t: float) -> np.ndarray:
    """Mixing matrix M with (a(t), b(t)) = M (a, b) for H = (g/2)(a^dag b + a b^dag) + delta a^dag a."""
    omega = math.hypot(g_bs, delta)
    phase = np.exp(-0.5j * delta * t)
    if omega == 0:
        return np.eye(2, dtype=complex)
    c, s = math.cos(0.5 * omega * t), math.sin(0.5 * omega * t)
    return phase * np.array([
        [c - 1j * delta / omega * s, -1j * g_bs / omega * s],
        [-1j * g_bs / omega * s, c + 1j * delta / omega * s],
    ])


# --------------------------------------------------------------- Lindblad evolution

STEP_SCALE = 0.01
RICHARDSON_TOL = 1e-8
SUPEROP_MAX_DIM = 36


def _matrices(ops) -> list[np.ndarray]:
    return [op.matrix if isinstance(op, Operator) else np.asarray(op, dtype=complex) for op in ops]


def _step_count(h: np.ndarray, jumps, heralded, t: float) -> int:
    scale = np.linalg.norm(h, 2)
    diss = sum(np.linalg.norm(c.conj().T @ c, 2) for c in jumps + heralded)
    rate = max(scale, diss, 1e-300)
    n = max(1, math.ceil(abs(t) * rate / STEP_SCALE))
    return 1 << (n - 1).bit_length()


def liouvillian(H, jumps, heralded=()) -> np.ndarray:
    """Row-major vectorized generator; vec(A rho B) = (A kron B^T) vec(rho).

    ``heralded`` operators contribute only their anti-commutator term, so the
    trace lost to them is the probability of the heralded branch.
    """
    h = H.matrix if isinstance(H, Operator) else np.asarray(H, dtype=complex)
    jumps, heralded = _matrices(jumps), _matrices(heralded)
    d = h.shape[0]
    eye = np.eye(d)
    k = sum((c.conj().T @ c for c in jumps + heralded), np.zeros((d, d), dtype=complex))
    heff = h - 0.5j * k
    L = -1j * np.kron(heff, eye) + 1j * np.kron(eye, heff.conj())
    for c in jumps:
        L += np.kron(c, c.conj())
    return L


def _matrix_power(m: np.ndarray, n: int) -> np.ndarray:
    # n is a power of two
    out = m
    while n > 1:
        out = out @ out
        n >>= 1
    return out


def _rk4_superop(L: np.ndarray, h: float, n: int) -> np.ndarray:
    x = h * L
    eye = np.eye(L.shape[0])
    step = eye + x @ (eye + x @ (eye / 2 + x @ (eye / 6 + x / 24)))
    return _matrix_power(step, n)


_SUPEROP_CACHE: dict = {}


def lindblad_superop(H: Operator, jumps, t: float, heralded=(), tol: float = RICHARDSON_TOL,
                     max_refinements: int = 4) -> np.ndarray:
    """Fixed-step RK4 propagator of the Liouvillian, with a step-halving check."""
    h = H.matrix
    jm, hm = _matrices(jumps), _matrices(heralded)
    key = (h.tobytes(), tuple(c.tobytes() for c in jm), tuple(c.tobytes() for c in hm), float(t), tol)
    cached = _SUPEROP_CACHE.get(key)
    if cached is not None:
        return cached
    L = liouvillian(h, jm, hm)
    n = _step_count(h, jm, hm, t)
    coarse = _rk4_superop(L, t / n, n)
    for _ in range(max_refinements + 1):
        fine = _rk4_superop(L, t / (2 * n), 2 * n)
        err = np.abs(fine - coarse).max()
        if err <= tol:
            break
        n, coarse = 2 * n, fine
    else:
        raise IntegrationError(f"RK4 step-halving disagreement {err:.2e} exceeds {tol:.0e}")
    if len(_SUPEROP_CACHE) > 256:
        _SUPEROP_CACHE.clear()
    _SUPEROP_CACHE[key] = fine
    return fine


def _lindblad_rhs(rho, heff, jumps):
    out = -1j * (heff @ rho - rho @ heff.conj().T)
    for c in jumps:
        out += c @ rho @ c.conj().T
    return out


def _rk4_matrix(rho, heff, jumps, h, n):
    for _ in range(n):
        k1 = _lindblad_rhs(rho, heff, jumps)
        k2 = _lindblad_rhs(rho + 0.5 * h * k1, heff, jumps)
        k3 = _lindblad_rhs(rho + 0.5 * h * k2, heff, jumps)
        k4 = _lindblad_rhs(rho + h * k3, heff, jumps)
        rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho


def apply_superop(rho: np.ndarray, superop: np.ndarray, tail_dim: int) -> np.ndarray:
    """Apply a channel on the trailing ``tail_dim`` factor, identity on the leading modes."""
    d = rho.shape[0]
    lead = d // tail_dim
    blocks = rho.reshape(lead, tail_dim, lead, tail_dim).transpose(0, 2, 1, 3)
    blocks = blocks.reshape(lead, lead, tail_dim * tail_dim)
    out = blocks @ superop.T
    out = out.reshape(lead, lead, tail_dim, tail_dim).transpose(0, 2, 1, 3)
    return out.reshape(d, d)


def evolve_lindblad(rho: DensityMatrix, H: Operator, cops, t: float, heralded=(),
                    tol: float = RICHARDSON_TOL) -> DensityMatrix:
    """Integrate d rho/dt = -i[H, rho] + sum_c D[c] rho for time t.

    ``heralded`` collapse operators are removed from the jump term: the
    returned state is then sub-normalized and its trace deficit is the
    probability that one of them fired.
    """
    if not H.is_hermitian(1e-10):
        raise DimensionError("Hamiltonian is not Hermitian")
    jumps = nonzero(cops)
    herald = nonzero(heralded)
    for c in jumps + herald:
        if c.matrix.shape != H.matrix.shape:
            raise DimensionError("collapse operator does not match the Hamiltonian dimension")
    d = H.dim
    if rho.dim % d:
        raise DimensionError(f"state dimension {rho.dim} is not a multiple of {d}")
    if t == 0:
        return rho
    if d <= SUPEROP_MAX_DIM:
        S = lindblad_superop(H, jumps, t, herald, tol)
        out = apply_superop(rho.matrix, S, d)
    else:
        if rho.dim != d:
            raise DimensionError("large systems must be evolved on the full space")
        jm, hm = _matrices(jumps), _matrices(herald)
        k = sum((c.conj().T @ c for c in jm + hm), np.zeros((d, d), dtype=complex))
        heff = H.matrix - 0.5j * k
        n = _step_count(H.matrix, jm, hm, t)
        coarse = _rk4_matrix(rho.matrix, heff, jm, t / n, n)
        fine = _rk4_matrix(rho.matrix, heff, jm, t / (2 * n), 2 * n)
        err = np.abs(fine - coarse).max()
        if err > tol:
            raise IntegrationError(f"RK4 step-halving disagreement {err:.2e} exceeds {tol:.0e}")
        out = fine
    out = hermitize(out)
    if not herald and abs(np.trace(out).real - np.trace(rho.matrix).real) > 1e-8:
        raise IntegrationError("Lindblad evolution failed to preserve the trace")
    return DensityMatrix(out, rho.layout)
