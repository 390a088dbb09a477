"""Named benchmark targets and program generators used by the command line and the service."""

from __future__ import annotations

import math

import numpy as np

from ..gates import Circuit, Gate, GateKind, circuit_matrix, local_matrix, ry_matrix


class UnknownBuiltinError(ValueError):
    pass


def _controlled(u: np.ndarray, controls: int) -> np.ndarray:
    dim = 2 ** (controls + 1)
    out = np.eye(dim, dtype=complex)
    out[-2:, -2:] = u
    return out


def qft_matrix(n: int) -> np.ndarray:
    """DFT on ``n`` qubits, ``|x> -> sum_k exp(2 pi i x k / 2^n) |k> / sqrt(2^n)``."""
    dim = 2 ** n
    x = np.arange(dim)
    return np.exp(2j * math.pi * np.outer(x, x) / dim) / math.sqrt(dim)


def builtin_matrix(spec: str) -> np.ndarray:
    """``ccy``, ``ccz``, ``toffoli``, ``cry:THETA``, ``ccry:THETA`` or ``qft:N`` (N <= 3)."""
    name, _, arg = spec.strip().lower().partition(":")
    y = local_matrix(Gate(GateKind.Y, (0,)))
    x = local_matrix(Gate(GateKind.X, (0,)))
    if name == "ccy" and not arg:
        return _controlled(y, 2)
    if name == "ccz" and not arg:
        return np.diag([1.0] * 7 + [-1.0]).astype(complex)
    if name in ("toffoli", "ccx") and not arg:
        return _controlled(x, 2)
    try:
        if name == "cry":
            return _controlled(ry_matrix(float(arg)), 1)
        if name == "ccry":
            return _controlled(ry_matrix(float(arg)), 2)
        if name == "qft" and 1 <= int(arg) <= 3:
            return qft_matrix(int(arg))
    except ValueError:
        pass
    raise UnknownBuiltinError(f"unknown builtin target {spec!r}; expected ccy, ccz, toffoli, cry:THETA, "
                              "ccry:THETA or qft:N with N in 1..3")


QFT_STYLES = ("rz", "cp", "crz")


def qft_program(n: int, style: str = "rz") -> Circuit:
    """Textbook QFT (big-endian) with the final qubit-reversal swaps.

    Controlled phases are written as rz/cx (``rz``, the way common toolchains
    print them), as ``cp`` gates, or as ``crz`` plus a compensating ``u1`` on
    the control (``crz``).
    """
    if style not in QFT_STYLES:
        raise ValueError(f"unknown qft style {style!r}")
    gates: list[Gate] = []
    for j in range(n):
        gates.append(Gate(GateKind.H, (j,)))
        for k in range(j + 1, n):
            lam = math.pi / 2 ** (k - j)
            if style == "rz":
                gates += [Gate(GateKind.RZ, (j,), (lam / 2,)), Gate(GateKind.CNOT, (j, k)),
                          Gate(GateKind.RZ, (k,), (-lam / 2,)), Gate(GateKind.CNOT, (j, k)),
                          Gate(GateKind.RZ, (k,), (lam / 2,))]
            elif style == "cp":
                gates.append(Gate(GateKind.CP, (k, j), (lam,)))
            else:
                gates += [Gate(GateKind.CRZ, (k, j), (lam,)), Gate(GateKind.RZ, (k,), (lam / 2,))]
    for j in range(n // 2):
        gates.append(Gate(GateKind.SWAP, (j, n - 1 - j)))
    return Circuit(n, gates)


def ripple_adder_program(bits: int) -> Circuit:
    """Cuccaro-style ripple-carry adder on ``2 * bits + 2`` qubits.

    Layout: qubit 0 carry-in, then ``b_i, a_i`` pairs, last qubit carry-out.
    Computes ``b <- a + b`` with the carry in the last qubit.
    """
    if bits < 1:
        raise ValueError("bits must be positive")
    c0, z = 0, 2 * bits + 1

    def b(i):
        return 1 + 2 * i

    def a(i):
        return 2 + 2 * i

    def maj(x, y, w):
        return [Gate(GateKind.CNOT, (w, y)), Gate(GateKind.CNOT, (w, x)), Gate(GateKind.CCX, (x, y, w))]

    def uma(x, y, w):
        return [Gate(GateKind.CCX, (x, y, w)), Gate(GateKind.CNOT, (w, x)), Gate(GateKind.CNOT, (x, y))]

    chain = [(c0, b(0), a(0))] + [(a(i - 1), b(i), a(i)) for i in range(1, bits)]
    gates: list[Gate] = []
    for args in chain:
        gates += maj(*args)
    gates.append(Gate(GateKind.CNOT, (a(bits - 1), z)))
    for args in reversed(chain):
        gates += uma(*args)
    return Circuit(2 * bits + 2, gates)


def builtin_program(spec: str) -> Circuit:
    """``qft:N``, ``qft-cp:N``, ``qft-crz:N`` or ``adder:BITS``."""
    name, _, arg = spec.strip().lower().partition(":")
    try:
        count = int(arg)
    except ValueError:
        count = 0
    if count >= 1:
        if name == "qft":
            return qft_program(count)
        if name in ("qft-cp", "qft-crz"):
            return qft_program(count, style=name[4:])
        if name == "adder":
            return ripple_adder_program(count)
    raise UnknownBuiltinError(f"unknown builtin program {spec!r}; expected qft:N, qft-cp:N, qft-crz:N or adder:BITS")


def program_matrix(c: Circuit) -> np.ndarray:
    return circuit_matrix(c.gates, c.width)


_SINGLE_CT = (GateKind.H, GateKind.S, GateKind.SDG, GateKind.T, GateKind.TDG, GateKind.X)
_SINGLE_CLIFFORD = (GateKind.H, GateKind.S, GateKind.SDG, GateKind.X, GateKind.Z)


def random_word(n: int, length: int, rng: np.random.Generator, kinds=_SINGLE_CT, cnot_prob: float = 0.3) -> list[Gate]:
    gates = []
    for _ in range(length):
        if n > 1 and rng.random() < cnot_prob:
            a, b = rng.choice(n, 2, replace=False)
            gates.append(Gate(GateKind.CNOT, (int(a), int(b))))
        else:
            gates.append(Gate(kinds[int(rng.integers(len(kinds)))], (int(rng.integers(n)),)))
    return gates


def random_adb_target(n: int, rng: np.random.Generator, max_len: int = 4) -> np.ndarray:
    """``A D B`` with short random Clifford+T words A, B and a random diagonal D."""
    a = circuit_matrix(random_word(n, int(rng.integers(1, max_len + 1)), rng), n)
    b = circuit_matrix(random_word(n, int(rng.integers(1, max_len + 1)), rng), n)
    d = np.diag(np.exp(1j * rng.uniform(-math.pi, math.pi, 2 ** n)))
    return a @ d @ b


def random_clifford_target(n: int, rng: np.random.Generator, max_len: int = 5) -> np.ndarray:
    return circuit_matrix(random_word(n, int(rng.integers(1, max_len + 1)), rng, _SINGLE_CLIFFORD), n)


def random_program(width: int, length: int, rng: np.random.Generator) -> Circuit:
    """Random Clifford+T program sprinkled with arbitrary RZ rotations."""
    gates = random_word(width, length, rng)
    for _ in range(max(1, length // 5)):
        gates.insert(int(rng.integers(len(gates) + 1)), Gate(GateKind.RZ, (int(rng.integers(width)),), (float(rng.uniform(-math.pi, math.pi)),)))
    return Circuit(width, gates)
