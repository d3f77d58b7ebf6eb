"""Command line entry point: ``dualrail {budget,readout,gate,nojump,report}``."""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import budget as bud
from .config import PRESET_NAMES, RunConfig, load_config, load_preset
from .core import HilbertLayout
from .dynamics import collapse_ops, evolve_lindblad
from .errors import ConfigError, DualRailError, IntegrationError, NullBranchError
from .logical import (CARDINAL_STATES, analytic_rho, average_fidelity, average_fidelity_expansion,
                      cavity_state, decode, encode, pauli_expectations)
from .protocols import gates as gt
from .protocols.readout import STRATEGIES, logical_readout
from .tables import Table

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
NOJUMP_TOL = 1e-6

IDLE_COLUMNS = [("process", "str"), ("scaling", "str"), ("probability", "float"),
                ("rounded_exponent", "int"), ("noise_bias", "float"), ("effective_lifetime_us", "float"),
                ("error_type", "str"), ("detection", "str")]
GATE_BUDGET_COLUMNS = [("process", "str"), ("erasure_scaling", "str"), ("erasure", "float"),
                       ("erasure_exponent", "int"), ("pauli_scaling", "str"), ("pauli", "float"),
                       ("pauli_exponent", "int")]
HIERARCHY_COLUMNS = [("process", "str"), ("tier", "str"), ("probability", "float")]
READOUT_COLUMNS = [("strategy", "str"), ("input", "str"), ("weight", "float"), ("p_declare0", "float"),
                   ("p_declare1", "float"), ("p_erasure", "float"), ("misassignment", "float"),
                   ("added_erasure", "float")]
GATE_COLUMNS = [("gate", "str"), ("mode", "str"), ("theta", "float"), ("input", "str"),
                ("quantity", "str"), ("value", "float")]
NOJUMP_COLUMNS = [("state", "str"), ("t_us", "float"),
                  ("x_closed", "float"), ("y_closed", "float"), ("z_closed", "float"),
                  ("x_lindblad", "float"), ("y_lindblad", "float"), ("z_lindblad", "float"),
                  ("max_abs_diff", "float")]
SCHEMAS = {"budget_idle": IDLE_COLUMNS, "budget_gate": GATE_BUDGET_COLUMNS,
           "budget_hierarchy": HIERARCHY_COLUMNS, "readout": READOUT_COLUMNS, "gate": GATE_COLUMNS,
           "nojump": NOJUMP_COLUMNS}
CARDINAL_LABELS = ("+Z", "-Z", "+X", "-X", "+Y", "-Y")
DEFAULT_PRESET = {"budget": "table1", "readout": "fig2", "gate": "table2", "nojump": "table1"}


class NumericalFailure(DualRailError):
    pass


def _meta(cfg: RunConfig, **extra) -> dict:
    meta = {"preset": cfg.preset, "params": cfg.params.to_dict(), "options": dict(sorted(cfg.options.items())),
            "units": {"time": "us", "rate": "1/us"}}
    meta.update(extra)
    return meta


# ------------------------------------------------------------------------- budget

def budget_table(cfg: RunConfig, t_us: float, kind: str | None = None) -> Table:
    kind = kind or cfg.option("budget")
    p = cfg.params
    if kind == "idle":
        t = Table("budget_idle", IDLE_COLUMNS, meta=_meta(cfg, t_us=t_us, effective_lifetime="t / probability"))
        for e in bud.idle_budget(p, t_us):
            t.add(e.process, e.scaling, e.probability, bud.power_of_ten(e.probability), e.noise_bias,
                  e.effective_lifetime, e.error_type, e.detection)
    elif kind == "gate":
        t = Table("budget_gate", GATE_BUDGET_COLUMNS, meta=_meta(cfg, T_gate_us=t_us))
        for r in bud.gate_budget(p, t_us):
            t.add(r.process, r.erasure_scaling, r.erasure, bud.power_of_ten(r.erasure), r.pauli_scaling,
                  r.pauli, bud.power_of_ten(r.pauli))
    elif kind == "hierarchy":
        h = bud.hierarchy_report(p, t_us, cfg.option("conversion_efficiency"))
        t = Table("budget_hierarchy", HIERARCHY_COLUMNS, meta=_meta(cfg, t_us=t_us))
        for process, tier, prob in h.series:
            t.add(process, tier, prob)
        t.add("total", "erasure", h.erasure)
        t.add("total", "pauli", h.pauli)
        t.add("total", "leakage", h.leakage)
        t.add("threshold", "erasure", h.erasure_threshold)
        t.add("threshold", "pauli", h.pauli_threshold)
    else:
        raise ConfigError(f"unknown budget kind {kind!r}")
    return t


# ------------------------------------------------------------------------ readout

def readout_table(cfg: RunConfig, strategies, ideal: bool = False) -> Table:
    p_leak = cfg.option("p_leak")
    t = Table("readout", READOUT_COLUMNS, meta=_meta(cfg, ideal=ideal, p_leak=p_leak))
    for name in strategies:
        rep = logical_readout(name, cfg.params, p_leak, ideal=ideal)
        for r in rep.rows:
            if r.input == "01":
                mis, add = r.p_declare1, r.p_erasure
            elif r.input == "10":
                mis, add = r.p_declare0, r.p_erasure
            else:
                mis, add = r.p_declare0 + r.p_declare1, 0.0
            t.add(name, r.input, r.weight, r.p_declare0, r.p_declare1, r.p_erasure, mis, add)
        agg = [sum(r.weight * getattr(r, k) for r in rep.rows) for k in ("p_declare0", "p_declare1", "p_erasure")]
        t.add(name, "aggregate", sum(r.weight for r in rep.rows), *agg, rep.misassignment, rep.added_erasure)
    return t


# --------------------------------------------------------------------------- gate

def gate_table(cfg: RunConfig, gate: str, theta: float, mode: str, input_label: str) -> Table:
    p = cfg.params
    t = Table("gate", GATE_COLUMNS, meta=_meta(cfg, gate=gate, mode=mode))

    def add(inp, key, value):
        t.add(gate, mode, theta, inp, key, value)

    if gate == "zz":
        if mode == "ideal":
            block = gt.codespace_block(gt.zz_sequence_unitary(theta))
            ref = gt.zz_matrix(theta)
            add("unitary", "fidelity", abs(np.trace(ref.conj().T @ block)) ** 2 / 16)
            add("unitary", "phase_distance", gt.phase_distance(block, ref))
        m = gt.zz_gate_metrics(theta, p, mode)
        _add_metrics(add, "cardinal36", m)
    elif gate == "zz_checked":
        m = gt.zz_checked_metrics(theta, p, mode)
        _add_metrics(add, "cardinal36", m)
    elif gate == "erasure_check":
        rho = cavity_state(gt.CORE, input_label).dm()
        probs = {b.label: b.probability for b in gt.erasure_check(rho, p, mode)}
        for label in "gef":
            add(input_label, f"p_{label}", probs.get(label, 0.0))
    elif gate == "cz":
        add("sequence", "n_steps", len(gt.compile_cz()))
        add("sequence", "cz_distance", gt.phase_distance(gt.compose(gt.compile_cz()), gt.CZ))
        add("sequence", "cnot_distance", gt.phase_distance(gt.compose(gt.compile_cz(cnot=True)), gt.CNOT))
        t.meta["sequence"] = [[s.name, s.angle, list(s.qubits)] for s in gt.compile_cz()]
    else:
        raise ConfigError(f"unknown gate {gate!r}")
    return t


def _add_metrics(add, inp, m):
    for key in ("p_g", "p_e", "p_f", "p_loss", "erasure", "pauli"):
        add(inp, key, getattr(m, key))


# ------------------------------------------------------------------------- nojump

def nojump_table(cfg: RunConfig, t_us: float) -> Table:
    """Closed-form no-jump + dephasing state against the loss-conditioned Lindblad run."""
    p = cfg.params
    layout = HilbertLayout.standard()
    ops = dict(collapse_ops(layout, p.with_(n_th=0.0)))
    H = 0 * ops["c1"]
    t = Table("nojump", NOJUMP_COLUMNS, meta=_meta(
        cfg, t_us=t_us, average_fidelity=average_fidelity(p.kappa_a, p.kappa_b, p.gamma_phi, t_us),
        average_fidelity_expansion=average_fidelity_expansion(p.kappa_a, p.kappa_b, p.gamma_phi, t_us)))
    worst = 0.0
    for label, (u, v) in zip(CARDINAL_LABELS, CARDINAL_STATES):
        closed, ex = analytic_rho(u, v, p.kappa_a, p.kappa_b, p.gamma_phi, t_us)
        rho = evolve_lindblad(encode(u, v, layout).dm(), H, [ops["c5"], ops["c6"]], t_us,
                              heralded=[ops["c1"], ops["c2"]])
        sim = decode(rho).matrix
        ey = pauli_expectations(sim)
        diff = float(np.abs(sim - closed).max())
        worst = max(worst, diff)
        t.add(label, t_us, ex.x, ex.y, ex.z, ey.x, ey.y, ey.z, diff)
    if worst > NOJUMP_TOL:
        raise NumericalFailure(f"closed form and Lindblad disagree by {worst:.2e} > {NOJUMP_TOL:.0e}")
    return t


# ---------------------------------------------------------------------- plumbing

def _config(args) -> RunConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return load_preset(args.preset or DEFAULT_PRESET[args.command])


def _emit(table: Table, out, fmt: str):
    text = table.dumps(fmt)
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _positive(name):
    def parse(s):
        try:
            v = float(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number") from None
        if not math.isfinite(v) or v <= 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive")
        return v
    return parse


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dualrail", description="Dual-rail cavity qubit error budgets and protocol simulations.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--preset", choices=None, help=f"named preset ({', '.join(PRESET_NAMES)})")
        p.add_argument("--config", help="flat JSON config; may name a preset and override keys")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("budget", help="idle, gate or hierarchy error budget")
    common(p)
    p.add_argument("--t-us", type=_positive("--t-us"), default=1.0, help="interval / gate time in us")
    p.add_argument("--table", choices=("idle", "gate", "hierarchy"), help="defaults to the preset's budget kind")
    p.add_argument("--plot", help="also write a PNG figure to this path")

    p = sub.add_parser("readout", help="multi-round logical readout statistics")
    common(p)
    p.add_argument("--strategy", default="1R", help=f"comma separated, from {', '.join(STRATEGIES)}")
    p.add_argument("--ideal", action="store_true", help="perfect transmon and no decoherence")
    p.add_argument("--p-leak", type=float, help="prior |00> probability (overrides config)")
    p.add_argument("--plot", help="also write a PNG figure to this path")

    p = sub.add_parser("gate", help="joint-parity gates and checks")
    common(p)
    p.add_argument("--gate", choices=("zz", "zz_checked", "erasure_check", "cz"), default="zz")
    p.add_argument("--theta", type=float, default=math.pi / 2)
    p.add_argument("--mode", choices=gt.MODES, default="ideal")
    p.add_argument("--input", default="01", choices=("01", "10", "00", "11"),
                   help="cavity occupations for erasure_check")

    p = sub.add_parser("nojump", help="closed form against Lindblad for the six cardinal states")
    common(p)
    p.add_argument("--t-us", type=_positive("--t-us"), default=1.0)

    p = sub.add_parser("report", help="write every table and figure into a directory")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-plots", action="store_true")
    return ap


def run(args) -> int:
    if args.command == "report":
        return _report(args)
    cfg = _config(args)
    if args.command == "budget":
        table = budget_table(cfg, args.t_us, args.table)
    elif args.command == "readout":
        names = [s.strip() for s in args.strategy.split(",") if s.strip()]
        bad = [s for s in names if s not in STRATEGIES]
        if bad or not names:
            raise ConfigError(f"unknown strategy {', '.join(bad) or '(empty)'}; choose from {', '.join(STRATEGIES)}")
        if args.p_leak is not None:
            if not 0 <= args.p_leak <= 1:
                raise ConfigError("--p-leak must lie in [0, 1]")
            cfg = RunConfig(cfg.params, {**cfg.options, "p_leak": args.p_leak}, cfg.preset)
        table = readout_table(cfg, names, args.ideal)
    elif args.command == "gate":
        if not math.isfinite(args.theta) or not 0 <= args.theta < 2 * math.pi:
            raise ConfigError("--theta must lie in [0, 2 pi)")
        table = gate_table(cfg, args.gate, args.theta, args.mode, args.input)
    else:
        table = nojump_table(cfg, args.t_us)
    _emit(table, args.out, args.format)
    if getattr(args, "plot", None):
        from . import plots
        plots.plot_table(table, args.plot)
    return EXIT_OK


def _report(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables = {
        "table1": budget_table(load_preset("table1"), 1.0, "idle"),
        "table2": budget_table(load_preset("table2"), 1.0, "gate"),
        "fig5": budget_table(load_preset("fig5"), 1.0, "hierarchy"),
        "fig2": readout_table(load_preset("fig2"), list(STRATEGIES)),
    }
    for name, table in tables.items():
        (out / f"{name}.{args.format}").write_text(table.dumps(args.format))
    if not args.no_plots:
        from . import plots
        for name, table in tables.items():
            plots.plot_table(table, out / f"{name}.png")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"dualrail: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, IntegrationError, NullBranchError, FloatingPointError) as exc:
        print(f"dualrail: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
