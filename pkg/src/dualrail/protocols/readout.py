"""Noisy transmon readout and multi-round logical measurement of a dual-rail qubit."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..core import DensityMatrix, HilbertLayout, Operator, apply_unitary, embed, partial_trace
from ..dynamics import (E, G, DeviceParams, build_dispersive, collapse_ops, evolve_lindblad, evolve_unitary,
                        transmon_dephasing_ee)
from ..errors import ConfigError, DimensionError
from ..logical import cavity_state as codeword
from .common import BRANCH_TOL, OutcomeBranch, branch_from, ge_rotation, swap_modes

DECLARE0, DECLARE1, ERASURE = "0", "1", "erasure"
INPUTS = ("01", "10", "00")


@dataclass(frozen=True)
class ReadoutModel:
    P_d: float = 0.0
    P_o: float = 0.0
    readout_idle: float = 1.0

    def __post_init__(self):
        for name in ("P_d", "P_o"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.P_d + self.P_o > 1:
            raise ConfigError("P_d + P_o must not exceed 1")
        if self.readout_idle < 0:
            raise ConfigError("readout_idle must be >= 0")

    @classmethod
    def from_params(cls, params: DeviceParams) -> "ReadoutModel":
        return cls(params.P_d, params.P_o, params.readout_idle)


# ------------------------------------------------------------------ strategies

def _majority(bits: str) -> str:
    return "e" if bits.count("e") >= 2 else "g"


def _bins_1r() -> dict:
    return {"eg": DECLARE0, "ge": DECLARE1, "gg": ERASURE, "ee": ERASURE}


def _bins_2r() -> dict:
    bins = {}
    for s in map("".join, itertools.product("ge", repeat=4)):
        if s[:2] == "eg" or s in ("ggeg", "eeeg"):
            bins[s] = DECLARE0
        elif s[:2] == "ge" or s in ("ggge", "eege"):
            bins[s] = DECLARE1
        else:
            bins[s] = ERASURE
    return bins


def _bins_2r_strict() -> dict:
    bins = {s: ERASURE for s in map("".join, itertools.product("ge", repeat=4))}
    bins["egeg"], bins["gege"] = DECLARE0, DECLARE1
    return bins


def _bins_3r() -> dict:
    bins = {}
    for s in map("".join, itertools.product("ge", repeat=6)):
        a, b = _majority(s[0::2]), _majority(s[1::2])
        bins[s] = {("e", "g"): DECLARE0, ("g", "e"): DECLARE1}.get((a, b), ERASURE)
    return bins


@dataclass(frozen=True)
class Strategy:
    name: str
    rounds: int
    bins: dict

    def decide(self, label: str) -> str:
        return self.bins[label]


STRATEGIES = {
    "1R": Strategy("1R", 1, _bins_1r()),
    "2R": Strategy("2R", 2, _bins_2r()),
    "2R_strict": Strategy("2R_strict", 2, _bins_2r_strict()),
    "3R": Strategy("3R", 3, _bins_3r()),
}


def get_strategy(name: str) -> Strategy:
    try:
        return STRATEGIES[name]
    except KeyError:
        raise ConfigError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGIES)}") from None


# ---------------------------------------------------------------- measurement

def _cavity_idle_ops(layout: HilbertLayout, params: DeviceParams):
    return [op for name, op in collapse_ops(layout, params) if name in ("c1", "c2", "c3", "c4")]


def noisy_measure(rho: DensityMatrix, model: ReadoutModel, params: DeviceParams | None = None,
                  transmon="T", label_prefix: str = "") -> list[OutcomeBranch]:
    """Two-outcome transmon readout with decay (P_d) and overlap (P_o) errors.

    The transmon must lie in the g-e manifold. If ``params`` is given, cavity decay and heating act for ``readout_idle``
    on each post-measurement state.
    """
    layout = rho.layout
    t = layout.mode(transmon)
    cav = [m for m in range(layout.n_modes) if m != t]
    d = layout.dims[t]
    proj = []
    for level in (G, E):
        p = np.zeros((d, d))
        p[level, level] = 1
        pm = embed(layout, t, p).matrix
        proj.append(DensityMatrix(pm @ rho.matrix @ pm, layout))
    rho_g, rho_e = (partial_trace(s, cav).matrix for s in proj)
    outside = rho.trace() - np.trace(rho_g).real - np.trace(rho_e).real
    if outside > BRANCH_TOL:
        raise DimensionError(f"two-outcome readout needs the transmon in g or e; {outside:.2e} lies outside")
    if params is not None and model.readout_idle > 0:
        ops = _cavity_idle_ops(layout, params)
        if ops:
            # the cavity-only generator acts on the cavity factor; transmon rows are identity
            rho_g = _idle(rho_g, layout, t, ops, model.readout_idle)
            rho_e = _idle(rho_e, layout, t, ops, model.readout_idle)
    Pd, Po = model.P_d, model.P_o
    g_proj = np.zeros((d, d)); g_proj[G, G] = 1
    e_proj = np.zeros((d, d)); e_proj[E, E] = 1

    def join(cavity_part, tr):
        return _tensor_transmon(cavity_part, tr, layout, t)

    m_g = join((1 - Po) * rho_g + 0.5 * Pd * rho_e, g_proj) + join(Po * rho_e, e_proj)
    m_e = join((1 - Po - Pd) * rho_e, e_proj) + join(0.5 * Pd * rho_e + Po * rho_g, g_proj)
    out = []
    for label, m in (("g", m_g), ("e", m_e)):
        b = branch_from(m, layout, label_prefix + label)
        if b is not None:
            out.append(b)
    return out


def _tensor_transmon(cav: np.ndarray, tr: np.ndarray, layout: HilbertLayout, t: int) -> np.ndarray:
    # place the transmon factor back at its position in the layout
    dims = layout.dims
    cav_dims = [dims[m] for m in range(layout.n_modes) if m != t]
    full = np.kron(cav, tr)
    n = layout.n_modes
    order = [m for m in range(n) if m != t] + [t]
    shape = cav_dims + [dims[t]]
    tens = full.reshape(shape + shape)
    inv = np.argsort(order)
    tens = tens.transpose(list(inv) + [n + i for i in inv])
    return tens.reshape(layout.total, layout.total)


def _idle(cav: np.ndarray, layout: HilbertLayout, t: int, ops, duration: float) -> np.ndarray:
    # embed the cavity state with a dummy transmon in g, evolve, trace out again
    d = layout.dims[t]
    g_proj = np.zeros((d, d)); g_proj[G, G] = 1
    full = DensityMatrix(_tensor_transmon(cav, g_proj, layout, t), layout)
    zero = Operator(np.zeros((layout.total, layout.total)), layout)
    out = evolve_lindblad(full, zero, ops, duration)
    cav_modes = [m for m in range(layout.n_modes) if m != t]
    return partial_trace(out, cav_modes).matrix


def readout_ops(layout: HilbertLayout, params: DeviceParams):
    """Collapse operators active during parity mapping (cavity dephasing excluded)."""
    keep = ("c1", "c2", "c3", "c4", "c7", "c8")
    ops = [op for name, op in collapse_ops(layout, params) if name in keep]
    return ops + [transmon_dephasing_ee(layout, params)]


def parity_map(rho: DensityMatrix, params: DeviceParams, cavity="A", ideal: bool = False) -> DensityMatrix:
    """pi/2 - wait pi/|chi_ge| - (-pi/2): odd photon number in ``cavity`` sends g to e."""
    layout = rho.layout
    if params.chi_ge == 0:
        raise ConfigError("chi_ge must be nonzero for parity mapping")
    rho = apply_unitary(rho, ge_rotation(layout, math.pi / 2))
    H = build_dispersive(layout, params.chi_ge, E, cavity)
    t = math.pi / abs(params.chi_ge)
    if ideal:
        rho = evolve_unitary(rho, H, t)
    else:
        rho = evolve_lindblad(rho, H, readout_ops(layout, params), t)
    return apply_unitary(rho, ge_rotation(layout, -math.pi / 2))


def _reset(branch: OutcomeBranch) -> OutcomeBranch:
    if not branch.label.endswith("e"):
        return branch
    st = apply_unitary(branch.state, ge_rotation(branch.state.layout, math.pi))
    return OutcomeBranch(branch.probability, st, branch.label, branch.meta)


def _measure_cavity_a(branches, params, model, ideal):
    out = []
    for b in branches:
        mapped = parity_map(b.state, params, "A", ideal)
        for sub in noisy_measure(mapped, model, None if ideal else params, label_prefix=b.label):
            out.append(_reset(OutcomeBranch(b.probability * sub.probability, sub.state, sub.label)))
    return out


def _swap(branches):
    out = []
    for b in branches:
        s = swap_modes(b.state.layout, "A", "B")
        out.append(OutcomeBranch(b.probability, apply_unitary(b.state, s), b.label, b.meta))
    return out


def parity_round(branches, params: DeviceParams, model: ReadoutModel | None = None,
                 ideal: bool = False) -> list[OutcomeBranch]:
    """One round: measure A, SWAP, measure (what was) B, SWAP back.

    Accepts a DensityMatrix or a list of branches; every branch label grows
    by two characters.
    """
    if isinstance(branches, DensityMatrix):
        branches = [OutcomeBranch(1.0, branches, "")]
    model = model or ReadoutModel.from_params(params)
    if ideal:
        model = ReadoutModel(0.0, 0.0, 0.0)
    out = _measure_cavity_a(branches, params, model, ideal)
    out = _swap(out)
    out = _measure_cavity_a(out, params, model, ideal)
    return _swap(out)


@dataclass(frozen=True)
class ReadoutRow:
    input: str
    weight: float
    p_declare0: float
    p_declare1: float
    p_erasure: float


@dataclass(frozen=True)
class ReadoutReport:
    strategy: str
    rows: tuple
    misassignment: float
    added_erasure: float
    total_erasure: float

    def row(self, label: str) -> ReadoutRow:
        for r in self.rows:
            if r.input == label:
                return r
        raise KeyError(label)


def readout_distribution(label: str, strategy: Strategy, params: DeviceParams,
                         model: ReadoutModel | None = None, ideal: bool = False) -> dict[str, float]:
    layout = HilbertLayout.standard()
    rho = codeword(layout, label).dm()
    branches = [OutcomeBranch(1.0, rho, "")]
    for _ in range(strategy.rounds):
        branches = parity_round(branches, params, model, ideal)
    out = {DECLARE0: 0.0, DECLARE1: 0.0, ERASURE: 0.0}
    for b in branches:
        out[strategy.decide(b.label)] += b.probability
    return out


def logical_readout(strategy: Strategy | str, params: DeviceParams, p_leak: float = 0.01,
                    model: ReadoutModel | None = None, ideal: bool = False,
                    inputs=INPUTS) -> ReadoutReport:
    """Exact outcome-tree readout statistics for the codewords and |00>.

    Inputs are weighted (1-p)/2, (1-p)/2, p. Misassignment counts a codeword
    declared as the other one and |00> declared as either; added erasure
    counts erasure declarations on the two codewords.
    """
    if isinstance(strategy, str):
        strategy = get_strategy(strategy)
    if not 0 <= p_leak <= 1:
        raise ConfigError("p_leak must lie in [0, 1]")
    weights = {"01": 0.5 * (1 - p_leak), "10": 0.5 * (1 - p_leak), "00": p_leak}
    rows = []
    mis = added = total = 0.0
    for label in inputs:
        d = readout_distribution(label, strategy, params, model, ideal)
        w = weights[label]
        rows.append(ReadoutRow(label, w, d[DECLARE0], d[DECLARE1], d[ERASURE]))
        total += w * d[ERASURE]
        if label == "01":
            mis += w * d[DECLARE1]
            added += w * d[ERASURE]
        elif label == "10":
            mis += w * d[DECLARE0]
            added += w * d[ERASURE]
        else:
            mis += w * (d[DECLARE0] + d[DECLARE1])
    return ReadoutReport(strategy.name, tuple(rows), mis, added, total)
