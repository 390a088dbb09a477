"""Exact CNOT + RZ circuits for diagonal unitaries via the Walsh-Hadamard transform.

A diagonal ``diag(exp(i phi_x))`` on ``n`` qubits equals, up to global phase,
the product over nonempty subsets ``S`` of ``exp(-i theta_S/2 * (-1)^{<x,S>})``,
with ``theta_S = -2^{1-n} sum_x (-1)^{<x,S>} phi_x``.  Each factor is one RZ on
the highest qubit of ``S`` after that qubit has accumulated the parity of ``S``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .gates import Circuit, Gate, GateKind, canonicalize, snap_eighths
from .linalg import DimensionError, wrap_angle

if TYPE_CHECKING:
    from .rz import RzSynthesizer

PRUNE_TOL = 1e-9


def _bit(x: int, q: int, n: int) -> int:
    return (x >> (n - 1 - q)) & 1


def _walsh_signs(n: int) -> dict[tuple[int, ...], np.ndarray]:
    xs = np.arange(2 ** n)
    out = {}
    for mask in range(1, 2 ** n):
        subset = tuple(q for q in range(n) if mask >> q & 1)
        parity = np.zeros_like(xs)
        for q in subset:
            parity ^= (xs >> (n - 1 - q)) & 1
        out[subset] = 1 - 2 * parity
    return out


@dataclass(frozen=True)
class DiagonalSpec:
    n: int
    phases: tuple[float, ...]
    angles: dict[tuple[int, ...], float] = field(default_factory=dict, compare=False)

    def matrix(self) -> np.ndarray:
        return np.diag(np.exp(1j * np.array(self.phases)))

    def nonzero(self, tol: float = PRUNE_TOL) -> dict[tuple[int, ...], float]:
        return {s: a for s, a in self.angles.items() if abs(a) > tol}


def solve_angles(phases) -> DiagonalSpec:
    phi = np.asarray(phases, dtype=float).ravel()
    dim = len(phi)
    n = dim.bit_length() - 1
    if dim < 2 or dim & (dim - 1) or n > 3:
        raise DimensionError(f"expected 2, 4 or 8 phases, got {dim}")
    phi = wrap_angle(phi)
    # relative to entry 0 so a global offset cannot move any entry across the branch cut
    rel = wrap_angle(phi - phi[0])
    scale = -(2.0 ** (1 - n))
    angles = {s: float(wrap_angle(scale * float(signs @ rel))) for s, signs in _walsh_signs(n).items()}
    return DiagonalSpec(n, tuple(float(p) for p in phi), angles)


def build_diagonal_circuit(spec: DiagonalSpec, prune_tol: float = PRUNE_TOL) -> Circuit:
    """CNOT + RZ circuit for ``spec``; for each target qubit the controls walk a Gray code.

    CNOTs onto one target commute, so only the control flips between kept
    rotations are emitted.
    """
    n = spec.n
    gates: list[Gate] = []

    def move(src: int, dst: int, target: int) -> None:
        for control in range(target):
            if (src ^ dst) >> control & 1:
                gates.append(Gate(GateKind.CNOT, (control, target)))

    for target in range(n):
        mask = 0
        for i in range(2 ** target):
            gray = i ^ (i >> 1)
            subset = tuple(q for q in range(target) if gray >> q & 1) + (target,)
            theta = spec.angles.get(subset, 0.0)
            if abs(theta) > prune_tol:
                move(mask, gray, target)
                mask = gray
                gates.append(Gate(GateKind.RZ, (target,), (theta,)))
        move(mask, 0, target)
    return Circuit(n, _cancel_adjacent_cnots(gates))


def _cancel_adjacent_cnots(gates: list[Gate]) -> list[Gate]:
    out: list[Gate] = []
    for g in gates:
        if out and g.kind is GateKind.CNOT and out[-1] == g:
            out.pop()
        else:
            out.append(g)
    return out


@dataclass
class DiagonalImplementation:
    circuit: Circuit
    budget: float           # (approximated rotations) x rz_eps
    approximated: int
    achieved: float         # sum of the individual achieved RZ errors


def clifford_t_diagonal(spec: DiagonalSpec, rz_eps: float, rz: "RzSynthesizer | None" = None) -> DiagonalImplementation:
    """Clifford+T circuit for ``spec`` with every non-Clifford rotation approximated at ``rz_eps``."""
    from .rz import RzSynthesizer, synth_rz

    if rz_eps <= 0:
        raise ValueError("rz_eps must be positive")
    rz = rz or RzSynthesizer()
    base = canonicalize(build_diagonal_circuit(spec))
    out: list[Gate] = []
    approximated = 0
    achieved = 0.0
    for g in base.gates:
        if g.kind is GateKind.RZ and snap_eighths(g.params[0]) is None:
            res = synth_rz(g.params[0], rz_eps, rz)
            out.extend(res.circuit.remap([g.qubits[0]], spec.n).gates)
            approximated += 1
            achieved += res.achieved_eps
        else:
            out.append(g)
    return DiagonalImplementation(canonicalize(Circuit(spec.n, out)), approximated * rz_eps, approximated, achieved)
