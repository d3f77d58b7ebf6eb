"""Shared pieces for the protocol simulations: branches, transmon pulses, measurement."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import DensityMatrix, HilbertLayout, Operator, embed, hermitize, partial_trace, permute_modes
from ..dynamics import E, F, G

BRANCH_TOL = 1e-9
# branches lighter than this are dropped from enumerations
MIN_BRANCH = 1e-15


@dataclass(frozen=True)
class OutcomeBranch:
    probability: float
    state: DensityMatrix
    label: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.probability < -BRANCH_TOL:
            raise ValueError(f"negative branch probability {self.probability}")


def branch_from(unnormalized: np.ndarray, layout: HilbertLayout, label: str, **meta):
    """Normalize a sub-normalized branch; returns None for an empty branch."""
    p = float(np.trace(unnormalized).real)
    if p <= MIN_BRANCH:
        return None
    return OutcomeBranch(p, DensityMatrix(hermitize(unnormalized) / p, layout), label, dict(meta))


def total_probability(branches) -> float:
    return float(sum(b.probability for b in branches))


def merge_by_label(branches) -> dict[str, float]:
    out: dict[str, float] = {}
    for b in branches:
        out[b.label] = out.get(b.label, 0.0) + b.probability
    return out


def cavity_state(branch: OutcomeBranch, cavities=("A", "B")) -> DensityMatrix:
    return partial_trace(branch.state, cavities)


# ------------------------------------------------------------------ transmon pulses

def _gf_generator(dim: int, axis: str) -> np.ndarray:
    m = np.zeros((dim, dim), dtype=complex)
    if axis == "x":
        m[G, F] = m[F, G] = 1
    elif axis == "y":
        # sign chosen so that exp(+i pi/4 Y_gf)|g> = (|g> + |f>)/sqrt(2)
        m[G, F], m[F, G] = 1j, -1j
    elif axis == "z":
        m[G, G], m[F, F] = 1, -1
    else:
        raise ValueError(f"unknown axis {axis!r}")
    return m


def gf_rotation(layout: HilbertLayout, axis: str, angle: float, transmon="T") -> Operator:
    """exp(-i angle/2 sigma_axis) on the g-f manifold, identity on |e>."""
    t = layout.mode(transmon)
    d = layout.dims[t]
    s = _gf_generator(d, axis)
    # sigma^2 is the projector onto {g, f}
    proj = np.zeros((d, d))
    proj[G, G] = proj[F, F] = 1
    u = np.eye(d) - proj + math.cos(angle / 2) * proj - 1j * math.sin(angle / 2) * s
    return embed(layout, t, u)


def gf_sigma_z(layout: HilbertLayout, transmon="T") -> Operator:
    """|g><g| + |e><e| - |f><f|: a dephasing jump of the f level."""
    d = layout.dims[layout.mode(transmon)]
    u = np.eye(d, dtype=complex)
    u[F, F] = -1
    return embed(layout, transmon, u)


def ge_rotation(layout: HilbertLayout, angle: float, transmon="T") -> Operator:
    """R_y(angle) on the g-e manifold: |g> -> cos|g> + sin|e> at angle/2."""
    d = layout.dims[layout.mode(transmon)]
    u = np.eye(d, dtype=complex)
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    u[G, G], u[G, E], u[E, G], u[E, E] = c, -s, s, c
    return embed(layout, transmon, u)


def ef_rotation(layout: HilbertLayout, angle: float, transmon="T") -> Operator:
    d = layout.dims[layout.mode(transmon)]
    u = np.eye(d, dtype=complex)
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    u[E, E], u[E, F], u[F, E], u[F, F] = c, -s, s, c
    return embed(layout, transmon, u)


def swap_modes(layout: HilbertLayout, m1, m2) -> Operator:
    i, j = layout.mode(m1), layout.mode(m2)
    perm = list(range(layout.n_modes))
    perm[i], perm[j] = j, i
    return permute_modes(layout, perm)


def transmon_projector(layout: HilbertLayout, level: int, transmon="T") -> Operator:
    d = layout.dims[layout.mode(transmon)]
    p = np.zeros((d, d), dtype=complex)
    p[level, level] = 1
    return embed(layout, transmon, p)


# ---------------------------------------------------------- three-outcome measurement

def confusion_matrix(eta_ge: float, eta_gf: float) -> np.ndarray:
    """P(label | true level) for labels and levels ordered g, e, f.

    True g reads e with eta_ge and f with eta_gf; true e reads g with eta_ge;
    true f reads g with eta_gf.
    """
    if eta_ge + eta_gf > 1:
        raise ValueError("eta_ge + eta_gf must not exceed 1")
    c = np.eye(3)
    c[:, G] = [1 - eta_ge - eta_gf, eta_ge, eta_gf]
    c[:, E] = [eta_ge, 1 - eta_ge, 0]
    c[:, F] = [eta_gf, 0, 1 - eta_gf]
    return c


def measure_gef(rho: DensityMatrix, eta_ge: float = 0.0, eta_gf: float = 0.0, transmon="T",
                **meta) -> list[OutcomeBranch]:
    """Projective g/e/f readout with classical label noise.

    The post-measurement state of a branch is the mixture of the projected
    states that could have produced its label.
    """
    layout = rho.layout
    projected = []
    for level in (G, E, F):
        p = transmon_projector(layout, level, transmon).matrix
        projected.append(p @ rho.matrix @ p)
    conf = confusion_matrix(eta_ge, eta_gf)
    out = []
    for label_idx, label in enumerate("gef"):
        m = sum(conf[label_idx, lv] * projected[lv] for lv in range(3))
        b = branch_from(m, layout, label, **meta)
        if b is not None:
            out.append(b)
    return out
