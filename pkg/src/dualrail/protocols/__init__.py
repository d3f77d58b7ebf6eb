from .common import OutcomeBranch, gf_rotation, measure_gef, total_probability
from .gates import (compile_cz, erasure_check, sideband_prepare, u_jp, u_jp_ideal, zz_gate,
                    zz_gate_with_check)
from .readout import (STRATEGIES, ReadoutModel, ReadoutReport, Strategy, get_strategy, logical_readout,
                      noisy_measure, parity_round)

__all__ = [
    "OutcomeBranch", "gf_rotation", "measure_gef", "total_probability",
    "compile_cz", "erasure_check", "sideband_prepare", "u_jp", "u_jp_ideal", "zz_gate", "zz_gate_with_check",
    "STRATEGIES", "ReadoutModel", "ReadoutReport", "Strategy", "get_strategy", "logical_readout",
    "noisy_measure", "parity_round",
]
