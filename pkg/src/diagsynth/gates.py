"""Clifford+T instruction vocabulary, circuits and circuit -> unitary evaluation.

Qubit ordering is big-endian everywhere: qubit 0 is the most significant bit
of a basis index.  A circuit lists gates in time order; the circuit unitary is
``g_k @ ... @ g_1``.  ``RZ(theta) = diag(exp(-i theta/2), exp(i theta/2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .linalg import DimensionError, wrap_angle

SNAP_TOL = 1e-9
MAX_UNITARY_WIDTH = 3


class GateKind(str, Enum):
    H = "h"
    S = "s"
    SDG = "sdg"
    T = "t"
    TDG = "tdg"
    X = "x"
    Y = "y"
    Z = "z"
    SX = "sx"
    CNOT = "cx"
    RZ = "rz"
    I = "id"
    # input-only kinds, accepted by the transpiler and lowered by gate-level rules
    RX = "rx"
    RY = "ry"
    CRZ = "crz"
    CRY = "cry"
    CP = "cp"
    CZ = "cz"
    SWAP = "swap"
    CCX = "ccx"
    U3 = "u3"


CLIFFORD_T_KINDS = frozenset(
    {GateKind.H, GateKind.S, GateKind.SDG, GateKind.T, GateKind.TDG, GateKind.X,
     GateKind.Y, GateKind.Z, GateKind.SX, GateKind.CNOT}
)
GATESET_KINDS = CLIFFORD_T_KINDS | {GateKind.RZ, GateKind.I}
INPUT_ONLY_KINDS = frozenset(set(GateKind) - GATESET_KINDS)

ARITY = {k: 1 for k in GateKind}
ARITY.update({GateKind.CNOT: 2, GateKind.CRZ: 2, GateKind.CRY: 2, GateKind.CP: 2,
              GateKind.CZ: 2, GateKind.SWAP: 2, GateKind.CCX: 3})
NUM_PARAMS = {k: 0 for k in GateKind}
NUM_PARAMS.update({GateKind.RZ: 1, GateKind.RX: 1, GateKind.RY: 1, GateKind.CRZ: 1,
                   GateKind.CRY: 1, GateKind.CP: 1, GateKind.U3: 3})

# Z-axis phase of each diagonal single-qubit Clifford+T gate, in units of pi/4.
PHASE_EIGHTHS = {GateKind.T: 1, GateKind.S: 2, GateKind.Z: 4, GateKind.SDG: 6, GateKind.TDG: 7}
_EXACT_PHASE_WORDS = {
    0: (),
    1: (GateKind.T,),
    2: (GateKind.S,),
    3: (GateKind.S, GateKind.T),
    4: (GateKind.Z,),
    5: (GateKind.Z, GateKind.T),
    6: (GateKind.SDG,),
    7: (GateKind.TDG,),
}
_SELF_INVERSE = frozenset({GateKind.H, GateKind.X, GateKind.Y, GateKind.Z, GateKind.CNOT,
                           GateKind.CZ, GateKind.SWAP, GateKind.CCX})


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(qubits) != ARITY[kind]:
            raise ValueError(f"{kind.value} acts on {ARITY[kind]} qubit(s), got {qubits}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"{kind.value} needs distinct qubits, got {qubits}")
        if any(q < 0 for q in qubits):
            raise ValueError(f"negative qubit index in {qubits}")
        params = tuple(float(p) for p in self.params)
        if len(params) != NUM_PARAMS[kind]:
            raise ValueError(f"{kind.value} takes {NUM_PARAMS[kind]} parameter(s), got {params}")
        if kind is GateKind.RZ:
            params = (wrap_angle(params[0]),)
        object.__setattr__(self, "params", params)

    @property
    def angle(self) -> float | None:
        return self.params[0] if self.params else None

    def __str__(self):
        args = f"({', '.join(f'{p:.12g}' for p in self.params)})" if self.params else ""
        return f"{self.kind.value}{args} {','.join(f'q{q}' for q in self.qubits)}"


def gate(kind, *qubits, angle=None) -> Gate:
    """Shorthand constructor: ``gate('cx', 0, 1)``, ``gate('rz', 0, angle=0.3)``."""
    params = () if angle is None else (angle,)
    return Gate(GateKind(kind), tuple(qubits), params)


@dataclass
class Circuit:
    width: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("circuit width must be at least 1")
        self.gates = list(self.gates)
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate) -> None:
        if max(g.qubits) >= self.width:
            raise ValueError(f"gate {g} addresses a qubit outside width {self.width}")

    def append(self, g: Gate) -> None:
        self._check(g)
        self.gates.append(g)

    def extend(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.append(g)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def copy(self) -> "Circuit":
        return Circuit(self.width, list(self.gates))

    def then(self, other: "Circuit") -> "Circuit":
        """``self`` followed in time by ``other``."""
        if other.width != self.width:
            raise DimensionError("cannot concatenate circuits of different widths")
        return Circuit(self.width, self.gates + other.gates)

    def inverse(self) -> "Circuit":
        out: list[Gate] = []
        for g in reversed(self.gates):
            if g.kind is GateKind.SX:
                out += [Gate(GateKind.X, g.qubits), g]  # SX^dagger == X SX
            else:
                out.append(inverse_gate(g))
        return Circuit(self.width, out)

    def remap(self, mapping: Sequence[int], width: int) -> "Circuit":
        """Relabel qubit ``q`` as ``mapping[q]`` on a circuit of ``width``."""
        return Circuit(width, [Gate(g.kind, tuple(mapping[q] for q in g.qubits), g.params)
                               for g in self.gates])


_INVERSE_KIND = {GateKind.S: GateKind.SDG, GateKind.SDG: GateKind.S,
                 GateKind.T: GateKind.TDG, GateKind.TDG: GateKind.T}


def inverse_gate(g: Gate) -> Gate:
    if g.kind in _INVERSE_KIND:
        return Gate(_INVERSE_KIND[g.kind], g.qubits)
    if g.kind in _SELF_INVERSE or g.kind is GateKind.I:
        return g
    if g.kind is GateKind.SX:
        raise ValueError("SX^dagger is two gates (X, SX); use Circuit.inverse")
    if g.kind is GateKind.U3:
        theta, phi, lam = g.params
        return Gate(g.kind, g.qubits, (-theta, -lam, -phi))
    return Gate(g.kind, g.qubits, tuple(-p for p in g.params))


# --- matrices -------------------------------------------------------------

_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    GateKind.I: np.eye(2, dtype=complex),
    GateKind.H: np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    GateKind.S: np.diag([1, 1j]),
    GateKind.SDG: np.diag([1, -1j]),
    GateKind.T: np.diag([1, np.exp(1j * np.pi / 4)]),
    GateKind.TDG: np.diag([1, np.exp(-1j * np.pi / 4)]),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.diag([1, -1]).astype(complex),
    GateKind.SX: 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    GateKind.CNOT: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
_ccx = np.eye(8, dtype=complex)
_ccx[6:, 6:] = _FIXED[GateKind.X]
_FIXED[GateKind.CCX] = _ccx
for _m in _FIXED.values():
    _m.setflags(write=False)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -np.exp(1j * lam) * s],
                     [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]])


def _controlled(m: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = m
    return out


def local_matrix(g: Gate) -> np.ndarray:
    """Matrix of ``g`` on its own qubits, in the order listed by ``g.qubits``."""
    k = g.kind
    if k in _FIXED:
        return _FIXED[k]
    if k is GateKind.RZ:
        return rz_matrix(g.params[0])
    if k is GateKind.RX:
        return rx_matrix(g.params[0])
    if k is GateKind.RY:
        return ry_matrix(g.params[0])
    if k is GateKind.CRZ:
        return _controlled(rz_matrix(g.params[0]))
    if k is GateKind.CRY:
        return _controlled(ry_matrix(g.params[0]))
    if k is GateKind.CP:
        return np.diag([1, 1, 1, np.exp(1j * g.params[0])])
    if k is GateKind.U3:
        return u3_matrix(*g.params)
    raise ValueError(f"no matrix for {k}")


def embed(m: np.ndarray, qubits: Sequence[int], width: int) -> np.ndarray:
    """Tensor a local matrix with identity on the untouched qubits."""
    k = len(qubits)
    if m.shape != (2 ** k, 2 ** k):
        raise DimensionError(f"{k}-qubit placement for a matrix of shape {m.shape}")
    if any(q < 0 or q >= width for q in qubits):
        raise ValueError(f"qubits {tuple(qubits)} invalid for width {width}")
    if k == width and list(qubits) == list(range(width)):
        return np.array(m, dtype=complex)
    rest = [q for q in range(width) if q not in qubits]
    full = np.kron(m, np.eye(2 ** (width - k), dtype=complex))
    inv = np.argsort(list(qubits) + rest)
    t = full.reshape([2] * (2 * width)).transpose(list(inv) + [width + i for i in inv])
    return t.reshape(2 ** width, 2 ** width)


def gate_unitary(g: Gate, width: int) -> np.ndarray:
    return embed(local_matrix(g), g.qubits, width)


def apply_gate(u: np.ndarray, g: Gate, width: int) -> np.ndarray:
    """Return ``embed(g) @ u`` without building the full gate matrix."""
    k = len(g.qubits)
    m = local_matrix(g).reshape([2] * (2 * k))
    cols = u.shape[1]
    t = u.reshape([2] * width + [cols])
    t = np.tensordot(m, t, axes=(list(range(k, 2 * k)), list(g.qubits)))
    # tensordot puts the gate's output axes first; move them back in place
    order = list(g.qubits) + [q for q in range(width) if q not in g.qubits]
    t = np.moveaxis(t, list(range(width)), order)
    return t.reshape(2 ** width, cols)


class UnsupportedWidthError(ValueError):
    pass


def circuit_matrix(gates: Iterable[Gate], width: int) -> np.ndarray:
    """Unitary of a gate list with no width cap (simulation for tests/verification)."""
    u = np.eye(2 ** width, dtype=complex)
    for g in gates:
        if g.kind is GateKind.I:
            continue
        u = apply_gate(u, g, width)
    return u


def unitary_of(c: Circuit) -> np.ndarray:
    if c.width > MAX_UNITARY_WIDTH:
        raise UnsupportedWidthError(f"unitary_of supports at most {MAX_UNITARY_WIDTH} qubits, got {c.width}")
    return circuit_matrix(c.gates, c.width)


# --- counting and canonicalization ----------------------------------------

@dataclass(frozen=True)
class ResourceCounts:
    t_count: int = 0
    rz_count: int = 0
    clifford_count: int = 0
    other_count: int = 0

    def __add__(self, other: "ResourceCounts") -> "ResourceCounts":
        return ResourceCounts(self.t_count + other.t_count, self.rz_count + other.rz_count,
                              self.clifford_count + other.clifford_count,
                              self.other_count + other.other_count)


def count_resources(c: Circuit | Iterable[Gate]) -> ResourceCounts:
    t = rz = cl = other = 0
    for g in c:
        if g.kind in (GateKind.T, GateKind.TDG):
            t += 1
        elif g.kind is GateKind.RZ:
            rz += 1
        elif g.kind is GateKind.I:
            continue
        elif g.kind in CLIFFORD_T_KINDS:
            cl += 1
        else:
            other += 1
    return ResourceCounts(t, rz, cl, other)


def snap_eighths(theta: float, tol: float = SNAP_TOL) -> int | None:
    """``k mod 8`` if ``theta`` is within ``tol`` of ``k*pi/4``, else None."""
    k = round(theta / (np.pi / 4))
    if abs(theta - k * np.pi / 4) <= tol:
        return k % 8
    return None


def phase_word(eighths: int, qubit: int) -> list[Gate]:
    """Exact gates for ``RZ(eighths * pi/4)`` up to global phase."""
    return [Gate(k, (qubit,)) for k in _EXACT_PHASE_WORDS[eighths % 8]]


def _z_phase(g: Gate) -> float | None:
    if g.kind in PHASE_EIGHTHS:
        return PHASE_EIGHTHS[g.kind] * np.pi / 4
    if g.kind is GateKind.RZ:
        return g.params[0]
    return None


def _phase_gates(theta: float, qubit: int) -> list[Gate]:
    k = snap_eighths(wrap_angle(theta))
    if k is not None:
        return phase_word(k, qubit)
    return [Gate(GateKind.RZ, (qubit,), (theta,))]


def _combine(a: Gate, b: Gate) -> list[Gate] | None:
    """Replacement for ``a`` followed by ``b`` (same qubits), or None."""
    pa, pb = _z_phase(a), _z_phase(b)
    if pa is not None and pb is not None:
        # fold into one rotation; expanded to an exact word after the pass
        return [Gate(GateKind.RZ, a.qubits, (pa + pb,))]
    if a.qubits != b.qubits:
        return None
    if a.kind is b.kind and a.kind in _SELF_INVERSE:
        return []
    if a.kind is b.kind is GateKind.SX:
        return [Gate(GateKind.X, a.qubits)]
    return None


def canonicalize(c: Circuit) -> Circuit:
    """Snap Clifford-angle rotations to exact words and run wire-local peephole merges.

    Adjacent (on their wires) Z-phase gates are merged, self-inverse pairs and
    identities removed.  Preserves the unitary up to global phase.
    """
    gates = _expand_phases(g for g in c.gates if g.kind is not GateKind.I)
    while True:
        out: list[Gate | None] = []
        wire: dict[int, list[int]] = {}  # qubit -> stack of indices into out touching it
        for g in gates:
            tops = {wire[q][-1] if wire.get(q) else None for q in g.qubits}
            if len(tops) == 1 and None not in tops:
                j = tops.pop()
                p = out[j]
                merged = _combine(p, g) if set(p.qubits) == set(g.qubits) else None
                if merged is not None:
                    out[j] = None
                    for q in p.qubits:
                        wire[q].pop()
                    for m in merged:
                        out.append(m)
                        for q in m.qubits:
                            wire.setdefault(q, []).append(len(out) - 1)
                    continue
            out.append(g)
            for q in g.qubits:
                wire.setdefault(q, []).append(len(out) - 1)
        new = _expand_phases(g for g in out if g is not None)
        if new == gates:
            return Circuit(c.width, new)
        gates = new


def _expand_phases(gates: Iterable[Gate]) -> list[Gate]:
    out: list[Gate] = []
    for g in gates:
        if g.kind is GateKind.RZ:
            out.extend(_phase_gates(g.params[0], g.qubits[0]))
        else:
            out.append(g)
    return out


def is_clifford_t(c: Circuit) -> bool:
    return all(g.kind in CLIFFORD_T_KINDS for g in c.gates)
