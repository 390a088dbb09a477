"""Clifford+T synthesis by two-sided diagonalization search."""

__version__ = "0.1.0"

from .anneal import AnnealConfig, Mode, SynthesisResult, diagonalize, invert, synthesize
from .diagonal import DiagonalSpec, build_diagonal_circuit, clifford_t_diagonal, solve_angles
from .gates import Circuit, Gate, GateKind, canonicalize, count_resources, unitary_of
from .linalg import diagonal_distance, hs_distance, nearest_diagonal, row_offdiagonal_criterion
from .qasm import emit_qasm, parse_qasm
from .rz import RzResult, RzStrategy, RzSynthesizer, euler_zxz, parse_external_sequence, synth_rz
from .transpile import TranspileReport, gate_level_fallback, transpile

__all__ = [
    "AnnealConfig", "Circuit", "DiagonalSpec", "Gate", "GateKind", "Mode", "RzResult", "RzStrategy",
    "RzSynthesizer", "SynthesisResult", "TranspileReport", "build_diagonal_circuit", "canonicalize",
    "clifford_t_diagonal", "count_resources", "diagonal_distance", "diagonalize", "emit_qasm",
    "euler_zxz", "gate_level_fallback", "hs_distance", "invert", "nearest_diagonal", "parse_external_sequence",
    "parse_qasm", "row_offdiagonal_criterion", "solve_angles", "synth_rz", "synthesize", "transpile",
    "unitary_of",
]
