"""Closed-form error budgets for idling and for ancilla-assisted gates."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import DeviceParams

ERASURE_THRESHOLD = 0.05
PAULI_THRESHOLD = 0.01


@dataclass(frozen=True)
class BudgetEntry:
    process: str
    scaling: str
    probability: float
    noise_bias: float | None
    effective_lifetime: float | None
    error_type: str
    detection: str

    def __post_init__(self):
        if self.probability < 0:
            raise ValueError(f"negative probability for {self.process}")


@dataclass(frozen=True)
class GateBudgetRow:
    process: str
    erasure_scaling: str | None
    erasure: float | None
    pauli_scaling: str | None
    pauli: float | None


def power_of_ten(p: float) -> int | None:
    """Exponent of the nearest power of ten (in log space)."""
    if p is None or p <= 0:
        return None
    return round(math.log10(p))


def display(p: float) -> str:
    e = power_of_ten(p)
    return "0" if e is None else f"1e{e}"


def _bias(p_loss: float, p: float) -> float | None:
    return p_loss / p if p > 0 and p_loss > 0 else None


def _lifetime(t: float, p: float) -> float | None:
    return t / p if p > 0 else None


def idle_budget(params: DeviceParams, t: float) -> list[BudgetEntry]:
    """The seven idling error processes over an interval t."""
    if t <= 0:
        raise ValueError("t must be positive")
    kb, dk, n, nA = params.kappa_bar, params.delta_kappa, params.n_th, params.n_th_A
    rows = [
        ("cavity photon loss", "kappa_bar t", kb * t, "erasure", "JP"),
        ("cavity heating", "n_th kappa_bar t", n * kb * t, "erasure", "JP"),
        ("cavity dephasing", "gamma_phi t", params.gamma_phi * t, "phase_flip", "none"),
        ("ancilla heating", "n_th_A Gamma_1A t", nA * params.Gamma_down_ge * t, "phase_flip", "M"),
        ("no-jump backaction", "(delta_kappa t / 4)^2", (0.25 * dk * t) ** 2, "phase_flip", "none"),
        ("cavity photon loss + heating", "n_th (kappa_bar t)^2", n * (kb * t) ** 2, "bit_flip", "none"),
        ("cavity heating x2", "3 (n_th kappa_bar t)^2", 3 * (n * kb * t) ** 2, "leakage", "JSP"),
    ]
    p_loss = rows[0][2]
    return [BudgetEntry(name, sc, p, _bias(p_loss, p), _lifetime(t, p), et, det)
            for name, sc, p, et, det in rows]


def gate_budget(params: DeviceParams, T_gate: float | None = None) -> list[GateBudgetRow]:
    """The ten gate error processes, split into erasure and Pauli columns."""
    T = params.T_gate if T_gate is None else T_gate
    if T < 0:
        raise ValueError("T_gate must be >= 0")
    kb, dk = params.kappa_bar, params.delta_kappa
    g_ef, g_ge, g_phi = params.Gamma_down_ef, params.Gamma_down_ge, params.Gamma_phi_ff
    e_ge, e_gf = params.eta_ge, params.eta_gf
    return [
        GateBudgetRow("single-photon loss", "kappa_bar T", kb * T, None, None),
        GateBudgetRow("no-jump backaction", None, None, "(delta_kappa T / 4)^2", (0.25 * dk * T) ** 2),
        GateBudgetRow("cavity dephasing", None, None, "gamma_phi T", params.gamma_phi * T),
        GateBudgetRow("ancilla decay", "Gamma_ef T", g_ef * T, "Gamma_ef Gamma_ge T^2", g_ef * g_ge * T ** 2),
        GateBudgetRow("undetected ancilla decay", None, None, "eta_ge Gamma_ef T", e_ge * g_ef * T),
        GateBudgetRow("ancilla dephasing", "Gamma_phi_gf T", g_phi * T, "(Gamma_phi_gf T)^2", (g_phi * T) ** 2),
        GateBudgetRow("photon loss + ancilla dephasing", None, None, "kappa_bar Gamma_phi_gf T^2",
                      kb * g_phi * T ** 2),
        GateBudgetRow("undetected ancilla dephasing", None, None, "eta_gf Gamma_phi_gf T", e_gf * g_phi * T),
        GateBudgetRow("measurement infidelity", "eta_gf", e_gf, None, None),
        GateBudgetRow("photon loss + meas. infid.", None, None, "eta_gf kappa_bar T", e_gf * kb * T),
    ]


@dataclass(frozen=True)
class HierarchyReport:
    erasure: float
    pauli: float
    leakage: float
    residual_loss_pauli: float
    erasure_threshold: float
    pauli_threshold: float
    series: tuple   # (process, tier, probability)

    @property
    def below_threshold(self) -> bool:
        return self.erasure < self.erasure_threshold and self.pauli < self.pauli_threshold


def hierarchy_report(params: DeviceParams, t: float = 1.0, conversion_efficiency: float = 0.99
                     ) -> HierarchyReport:
    """Group the gate budget over time t into erasure, Pauli and leakage tiers.

    Photon loss that escapes erasure conversion is added to the Pauli tier
    as (1 - efficiency) P(loss). Leakage is the double-heating idle row.
    """
    if not 0 <= conversion_efficiency <= 1:
        raise ValueError("conversion_efficiency must lie in [0, 1]")
    rows = gate_budget(params, t)
    series = []
    erasure = pauli = 0.0
    for r in rows:
        if r.erasure is not None:
            series.append((r.process, "erasure", r.erasure))
            erasure += r.erasure
        if r.pauli is not None:
            series.append((r.process, "pauli", r.pauli))
            pauli += r.pauli
    residual = (1 - conversion_efficiency) * rows[0].erasure
    series.append(("unconverted photon loss", "pauli", residual))
    pauli += residual
    leak = idle_budget(params, t)[-1].probability
    series.append(("cavity heating x2", "leakage", leak))
    return HierarchyReport(erasure, pauli, leak, residual, ERASURE_THRESHOLD, PAULI_THRESHOLD, tuple(series))
