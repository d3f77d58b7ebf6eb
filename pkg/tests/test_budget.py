import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualrail.budget import (ERASURE_THRESHOLD, PAULI_THRESHOLD, display, gate_budget, hierarchy_report,
                             idle_budget, power_of_ten)
from dualrail.config import load_preset
from dualrail.core import HilbertLayout, Operator
from dualrail.dynamics import DeviceParams, collapse_ops, evolve_lindblad
from dualrail.logical import encode

IDLE_POWERS = [-3, -5, -4, -4, None, -8, -9]          # no-jump row checked in the acceptance suite
IDLE_LIFETIMES_US = [1e3, 1e5, 1e4, 1e4, None, 1e8, 1e9]
IDLE_BIAS = [0, 2, 1, 1, None, 5, 6]
GATE_ERASURE = [-3, None, None, -2, None, -2, None, None, -4, None]
GATE_PAULI = [None, None, -4, -4, -4, -4, -5, -6, None, -7]


def test_idle_values(table1):
    rows = idle_budget(table1, 1.0)
    kb = (1 / 1500 + 1 / 500) / 2
    want = [kb, 0.01 * kb, 1e-4, 1e-4, (0.25 * (1 / 500 - 1 / 1500)) ** 2, 0.01 * kb ** 2, 3 * (0.01 * kb) ** 2]
    assert np.abs(np.array([r.probability for r in rows]) - want).max() < 1e-18
    assert [r.error_type for r in rows] == ["erasure", "erasure", "phase_flip", "phase_flip", "phase_flip",
                                            "bit_flip", "leakage"]
    assert [r.detection for r in rows] == ["JP", "JP", "none", "M", "none", "none", "JSP"]


def test_idle_reference_powers(table1):
    rows = idle_budget(table1, 1.0)
    for r, p, life, bias in zip(rows, IDLE_POWERS, IDLE_LIFETIMES_US, IDLE_BIAS):
        if p is None:
            continue
        assert power_of_ten(r.probability) == p
        assert power_of_ten(r.effective_lifetime) == round(math.log10(life))
        assert power_of_ten(r.noise_bias) == bias


def test_gate_values(table2):
    rows = gate_budget(table2)
    assert len(rows) == 10
    kb = 0.0015
    assert abs(rows[0].erasure - kb) < 1e-18
    assert abs(rows[1].pauli - (0.25 * 0.001) ** 2) < 1e-18
    assert abs(rows[3].pauli - 1e-4) < 1e-18
    assert abs(rows[9].pauli - 1e-4 * kb) < 1e-18


def test_gate_reference_powers(table2):
    rows = gate_budget(table2)
    for r, pe, pp in zip(rows, GATE_ERASURE, GATE_PAULI):
        assert power_of_ten(r.erasure) == pe
        if pp is not None:
            assert power_of_ten(r.pauli) == pp


def test_gate_zero_duration(table2):
    rows = gate_budget(table2, 0.0)
    for r in rows:
        if r.process == "measurement infidelity":
            assert r.erasure == table2.eta_gf
        else:
            assert not r.erasure and not r.pauli


def test_invalid_times(table1):
    with pytest.raises(ValueError):
        idle_budget(table1, 0.0)
    with pytest.raises(ValueError):
        gate_budget(table1, -1.0)
    with pytest.raises(ValueError):
        hierarchy_report(table1, conversion_efficiency=1.5)


def test_display():
    assert display(1.3e-3) == "1e-3"
    assert display(0.0) == "0"
    assert power_of_ten(None) is None


@settings(max_examples=50, deadline=None)
@given(t1=st.floats(1e-3, 1e3), t2=st.floats(1e-3, 1e3))
def test_budget_monotone_in_time(t1, t2):
    p = load_preset("table2").params
    lo, hi = sorted((t1, t2))
    for a, b in zip(idle_budget(p, lo), idle_budget(p, hi)):
        assert a.probability <= b.probability * (1 + 1e-12)
    for a, b in zip(gate_budget(p, lo), gate_budget(p, hi)):
        for x, y in ((a.erasure, b.erasure), (a.pauli, b.pauli)):
            if x is not None:
                assert x <= y * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(ka=st.floats(1e-5, 1e-2), kb=st.floats(1e-5, 1e-2), t=st.floats(0.1, 10))
def test_noise_bias_definition(ka, kb, t):
    rows = idle_budget(DeviceParams(kappa_a=ka, kappa_b=kb, n_th=0.01, gamma_phi_a=1e-5), t)
    loss = rows[0].probability
    for r in rows:
        if r.noise_bias is not None:
            assert abs(r.noise_bias - loss / r.probability) < 1e-9 * r.noise_bias
            assert abs(r.effective_lifetime - t / r.probability) < 1e-9 * r.effective_lifetime


def test_hierarchy(table2):
    p = load_preset("fig5").params
    rep = hierarchy_report(p, 1.0, 0.99)
    assert rep.erasure_threshold == ERASURE_THRESHOLD == 0.05
    assert rep.pauli_threshold == PAULI_THRESHOLD == 0.01
    assert rep.below_threshold
    assert rep.leakage < rep.pauli < rep.erasure
    assert abs(rep.residual_loss_pauli - 0.01 * p.kappa_bar) < 1e-18
    assert hierarchy_report(p, 1.0, 1.0).residual_loss_pauli == 0.0
    total = sum(x for _, tier, x in rep.series if tier == "pauli")
    assert abs(total - rep.pauli) < 1e-15


def test_lindblad_idle_loss_matches_budget(table1):
    # leaving the single-photon manifold under the full master equation
    t = 10.0
    lay = HilbertLayout.standard()
    rho = encode(1 / math.sqrt(2), 1 / math.sqrt(2), lay).dm()
    quiet = table1.with_(n_th=0.0, n_th_A=0.0, Gamma_down_ge=0.0)
    out = evolve_lindblad(rho, Operator(np.zeros((27, 27)), lay), [op for _, op in collapse_ops(lay, quiet)], t)
    keep = [i for i in range(lay.total) if sum(lay.occupations(i)[:2]) == 1]
    p_loss = 1 - np.real(np.trace(out.matrix[np.ix_(keep, keep)]))
    entry = idle_budget(quiet, t)[0].probability
    assert abs(p_loss / entry - 1) < 0.05
