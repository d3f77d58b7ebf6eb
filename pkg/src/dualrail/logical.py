"""Dual-rail logical layer.

Codewords: ``|0>_L`` holds the photon in cavity A, ``|1>_L`` in cavity B.
The labels "01" and "10" used throughout (CLI inputs, reports) name these
two codewords; "00" is the common vacuum. Logical 2x2 matrices are written
in the basis (|0>_L, |1>_L).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (DensityMatrix, HilbertLayout, Ket, Operator, apply_kraus, embed,
                   partial_trace, tensor_kets)
from .dynamics import build_beamsplitter, evolve_unitary
from .errors import DimensionError

LOGICAL = HilbertLayout((2,), ("L",))

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


class LeakageClass(str, enum.Enum):
    CODESPACE = "codespace"
    GROUND = "ground"
    EVEN_LEAK = "even_leak"
    ODD_SUPERPARITY_LEAK = "odd_superparity_leak"


@dataclass(frozen=True)
class PauliExpectations:
    x: float
    y: float
    z: float

    @property
    def bloch_length(self) -> float:
        return math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)


def _check_normalized(u: complex, v: complex):
    if abs(abs(u) ** 2 + abs(v) ** 2 - 1) > 1e-10:
        raise ValueError(f"|u|^2 + |v|^2 = {abs(u) ** 2 + abs(v) ** 2:.12g}, expected 1")


def codeword_occupations(label: str) -> tuple[int, int]:
    """Cavity (n_A, n_B) for a codeword label such as "01" (= |0>_L)."""
    table = {"01": (1, 0), "10": (0, 1), "00": (0, 0), "11": (1, 1)}
    try:
        return table[label]
    except KeyError:
        raise ValueError(f"unknown cavity label {label!r}") from None


def encode(u: complex, v: complex, layout: HilbertLayout | None = None,
           transmon_level: int = 0) -> Ket:
    """u|0>_L + v|1>_L with the transmon (if present) in ``transmon_level``."""
    _check_normalized(u, v)
    layout = layout or HilbertLayout.standard()
    if layout == LOGICAL:
        return Ket(np.array([u, v]), LOGICAL)
    ia, ib = layout.mode("A"), layout.mode("B")
    out = np.zeros(layout.total, dtype=complex)
    for amp, (na, nb) in ((u, (1, 0)), (v, (0, 1))):
        occ = [0] * layout.n_modes
        occ[ia], occ[ib] = na, nb
        if "T" in layout.labels:
            occ[layout.mode("T")] = transmon_level
        out[layout.index(occ)] += amp
    return Ket(out, layout)


def cavity_state(layout: HilbertLayout, label: str, transmon_level: int = 0) -> Ket:
    na, nb = codeword_occupations(label)
    factors = []
    for m, d in zip(layout.labels, layout.dims):
        level = {"A": na, "B": nb, "T": transmon_level}.get(m, 0)
        f = np.zeros(d)
        f[level] = 1
        factors.append(f)
    return tensor_kets(layout, factors)


def codespace_indices(layout: HilbertLayout) -> tuple[int, int]:
    return encode(1, 0, layout.sub([layout.mode("A"), layout.mode("B")])).vector.argmax(), \
        encode(0, 1, layout.sub([layout.mode("A"), layout.mode("B")])).vector.argmax()


def logical_block(rho: DensityMatrix) -> np.ndarray:
    """Unnormalized 2x2 restriction of the cavity state to the codespace."""
    if rho.layout == LOGICAL:
        return rho.matrix.copy()
    layout = rho.layout
    keep = [layout.mode("A"), layout.mode("B")]
    red = partial_trace(rho, keep) if layout.n_modes > 2 else rho
    i0, i1 = codespace_indices(layout)
    idx = [i0, i1]
    return red.matrix[np.ix_(idx, idx)]


def decode(rho: DensityMatrix) -> DensityMatrix:
    """Normalized logical state conditioned on being in the codespace."""
    block = logical_block(rho)
    return DensityMatrix(block / np.trace(block).real, LOGICAL)


def logical_unitary(theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * np.exp(-1j * phi) * s],
                     [-1j * np.exp(1j * phi) * s, c]])


def logical_rotation(state, theta: float, phi: float, g_bs: float = 1.0):
    """Beamsplitter pulse of area theta = g_bs t realizing U(theta, phi).

    With |0>_L in cavity A the pump phase that yields U(theta, phi) is -phi.
    """
    layout = state.layout
    if layout == LOGICAL:
        u = logical_unitary(theta, phi)
        if isinstance(state, Ket):
            return Ket(u @ state.vector, LOGICAL)
        return DensityMatrix(u @ state.matrix @ u.conj().T, LOGICAL)
    if g_bs <= 0:
        raise ValueError("beamsplitter rate must be positive")
    H = build_beamsplitter(layout, g_bs, -phi, 0.0)
    return evolve_unitary(state, H, theta / g_bs)


def pauli_expectations(rho) -> PauliExpectations:
    m = rho if isinstance(rho, np.ndarray) else logical_block(rho)
    m = m / np.trace(m).real
    return PauliExpectations(*(float(np.trace(p @ m).real) for p in (X, Y, Z)))


# ------------------------------------------------------------------- channels

def no_jump_kraus(layout: HilbertLayout, kappa_a: float, kappa_b: float, t: float) -> Operator:
    """E00 = exp(-(kappa_a n_a + kappa_b n_b) t / 2)."""
    if t < 0:
        raise ValueError("time must be non-negative")
    if layout == LOGICAL:
        return Operator(np.diag([math.exp(-0.5 * kappa_a * t), math.exp(-0.5 * kappa_b * t)]), LOGICAL)
    ia, ib = layout.mode("A"), layout.mode("B")
    na = np.arange(layout.dims[ia])
    nb = np.arange(layout.dims[ib])
    ea = embed(layout, ia, np.diag(np.exp(-0.5 * kappa_a * t * na)))
    eb = embed(layout, ib, np.diag(np.exp(-0.5 * kappa_b * t * nb)))
    return ea @ eb


def no_jump_channel(rho: DensityMatrix, kappa_a: float, kappa_b: float, t: float
                    ) -> tuple[DensityMatrix, float]:
    return apply_kraus(rho, [no_jump_kraus(rho.layout, kappa_a, kappa_b, t)], normalize=True)


def dephasing_kraus_codespace(gamma_a: float, gamma_b: float, t: float) -> list[np.ndarray]:
    """Phase-damping set E0, E1, E2 with p_i = 1 - exp(-2 gamma_i t)."""
    pa = 1 - math.exp(-2 * gamma_a * t)
    pb = 1 - math.exp(-2 * gamma_b * t)
    return [
        np.diag([math.sqrt(1 - pa), math.sqrt(1 - pb)]).astype(complex),
        np.diag([0.0, math.sqrt(pb)]).astype(complex),
        np.diag([math.sqrt(pa), 0.0]).astype(complex),
    ]


def _mode_dephasing_kraus(dim: int, gamma: float, t: float) -> list[np.ndarray]:
    # coherence kernel exp(-gamma t (n-m)^2) of c = sqrt(2 gamma) n, factorized
    n = np.arange(dim)
    kernel = np.exp(-gamma * t * (n[:, None] - n[None, :]) ** 2)
    w, v = np.linalg.eigh(kernel)
    return [math.sqrt(lam) * np.diag(v[:, k]).astype(complex)
            for k, lam in enumerate(w) if lam > 1e-15]


def dephasing_kraus(layout: HilbertLayout, gamma_a: float, gamma_b: float, t: float) -> list[Operator]:
    if t < 0:
        raise ValueError("time must be non-negative")
    if layout == LOGICAL:
        return [Operator(k, LOGICAL) for k in dephasing_kraus_codespace(gamma_a, gamma_b, t)]
    ia, ib = layout.mode("A"), layout.mode("B")
    ka = [embed(layout, ia, k) for k in _mode_dephasing_kraus(layout.dims[ia], gamma_a, t)]
    kb = [embed(layout, ib, k) for k in _mode_dephasing_kraus(layout.dims[ib], gamma_b, t)]
    return [x @ y for x in ka for y in kb]


def dephasing_channel(rho: DensityMatrix, gamma_a: float, gamma_b: float, t: float) -> DensityMatrix:
    out, _ = apply_kraus(rho, dephasing_kraus(rho.layout, gamma_a, gamma_b, t), normalize=False)
    return out


def analytic_rho(u: complex, v: complex, kappa_a: float, kappa_b: float, gamma_phi: float,
                 t: float) -> tuple[np.ndarray, PauliExpectations]:
    """Closed-form no-jump plus dephasing state and its Pauli expectations."""
    _check_normalized(u, v)
    if t < 0:
        raise ValueError("time must be non-negative")
    dk = kappa_b - kappa_a
    decay = math.exp(-dk * t)
    norm = 1 - abs(v) ** 2 * (1 - decay)
    coh = math.exp(-0.5 * dk * t) * math.exp(-gamma_phi * t) / norm
    rho = np.array([
        [abs(u) ** 2 / norm, u * np.conj(v) * coh],
        [np.conj(u) * v * coh, abs(v) ** 2 * decay / norm],
    ], dtype=complex)
    x = ((u * np.conj(v) + np.conj(u) * v) * coh).real
    y = (1j * (u * np.conj(v) - np.conj(u) * v) * coh).real
    z = (abs(u) ** 2 - abs(v) ** 2 * decay) / norm
    return rho, PauliExpectations(float(x), float(y), float(z))


CARDINAL_STATES = (
    (1.0, 0.0),
    (0.0, 1.0),
    (1 / math.sqrt(2), 1 / math.sqrt(2)),
    (1 / math.sqrt(2), -1 / math.sqrt(2)),
    (1 / math.sqrt(2), 1j / math.sqrt(2)),
    (1 / math.sqrt(2), -1j / math.sqrt(2)),
)


def average_fidelity(kappa_a: float, kappa_b: float, gamma_phi: float, t: float) -> float:
    x = (kappa_b - kappa_a) * t
    return 2 / 6 + (2 / 6) * (1 + 2 * math.exp(-0.5 * x - gamma_phi * t) + math.exp(-x)) / (1 + math.exp(-x))


def average_fidelity_expansion(kappa_a: float, kappa_b: float, gamma_phi: float, t: float) -> float:
    return 1 - gamma_phi * t / 3 - (2 / 3) * (0.25 * (kappa_b - kappa_a) * t) ** 2


# -------------------------------------------------------------------- leakage

def photon_number_distribution(rho: DensityMatrix) -> dict[int, float]:
    """Distribution of the joint photon number n_A + n_B."""
    layout = rho.layout
    ia, ib = layout.mode("A"), layout.mode("B")
    diag = np.real(np.diag(rho.matrix)).reshape(layout.dims)
    out: dict[int, float] = {}
    for idx in np.ndindex(*layout.dims):
        n = idx[ia] + idx[ib]
        out[n] = out.get(n, 0.0) + float(diag[idx])
    return out


def leakage_class(total_photons: int) -> LeakageClass:
    if total_photons == 0:
        return LeakageClass.GROUND
    if total_photons % 2 == 0:
        return LeakageClass.EVEN_LEAK
    if total_photons % 4 == 1:
        return LeakageClass.CODESPACE
    return LeakageClass.ODD_SUPERPARITY_LEAK


def classify_leakage(rho: DensityMatrix) -> dict[LeakageClass, float]:
    layout = rho.layout
    if min(layout.dims[layout.mode("A")], layout.dims[layout.mode("B")]) < 3:
        raise DimensionError("leakage classification needs cavity dimension >= 3")
    out = {c: 0.0 for c in LeakageClass}
    for n, p in photon_number_distribution(rho).items():
        out[leakage_class(n)] += p
    return out


def joint_parity(layout: HilbertLayout) -> Operator:
    ia, ib = layout.mode("A"), layout.mode("B")
    pa = embed(layout, ia, np.diag((-1.0) ** np.arange(layout.dims[ia])))
    pb = embed(layout, ib, np.diag((-1.0) ** np.arange(layout.dims[ib])))
    return pa @ pb
