"""Deterministic multi-valued Byzantine consensus with coded symbol exchange."""

from .bitcast import BroadcastInstance, bcast_run, bits_per_bit
from .core import Params
from .diagnosis import DiagnosisGraph, ProtocolError
from .gf import GF2m
from .metrics import ComplexityReport, compare, optimal_D, predict
from .rs import CodeSpec, encode, is_codeword, min_distance_exhaustive, puncture
from .simnet import RunResult, Scenario, load_scenario, run_consensus, run_scenario, sweep

__all__ = [
    "BroadcastInstance",
    "CodeSpec",
    "ComplexityReport",
    "DiagnosisGraph",
    "GF2m",
    "Params",
    "ProtocolError",
    "RunResult",
    "Scenario",
    "bcast_run",
    "bits_per_bit",
    "compare",
    "encode",
    "is_codeword",
    "load_scenario",
    "min_distance_exhaustive",
    "optimal_D",
    "predict",
    "puncture",
    "run_consensus",
    "run_scenario",
    "sweep",
]
