"""OpenQASM 2.0 subset reader/writer.

Accepted: one ``qreg``; gates h s sdg t tdg x y z sx id cx cz swap ccx rz ry
rx crz cry u1 (as rz), p (as rz), cp/cu1, u3/u; ``barrier`` is ignored.
Angles may be decimal literals or arithmetic in ``pi``.
"""

from __future__ import annotations

import ast
import math
import operator
import re

from .gates import ARITY, Circuit, Gate, GateKind, NUM_PARAMS

ProgramIR = Circuit

_ALIASES = {
    "u1": GateKind.RZ, "p": GateKind.RZ, "cu1": GateKind.CP, "cp": GateKind.CP,
    "u": GateKind.U3, "u3": GateKind.U3, "cnot": GateKind.CNOT,
}
_NAMES = {k.value: k for k in GateKind} | _ALIASES
_EMIT_NAMES = {k: k.value for k in GateKind}

_STATEMENT = re.compile(r"^(?P<name>[a-z_][a-z0-9_]*)\s*(?:\((?P<params>[^)]*)\))?\s*(?P<args>.*)$", re.I)
_QARG = re.compile(r"^(?P<reg>[a-z_][a-z0-9_]*)\s*\[\s*(?P<idx>\d+)\s*\]$", re.I)
_QREG = re.compile(r"^qreg\s+(?P<reg>[a-z_][a-z0-9_]*)\s*\[\s*(?P<size>\d+)\s*\]$", re.I)


class QasmError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnsupportedFeatureError(QasmError):
    pass


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def eval_angle(expr: str) -> float:
    """Evaluate ``expr`` built from numbers, ``pi``, + - * / ** and parentheses."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in ("pi", "PI"):
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported angle expression {expr!r}")

    try:
        return ev(ast.parse(expr.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ValueError(f"bad angle expression {expr!r}: {exc}") from exc


def _statements(text: str):
    """Yield ``(line_number, statement, terminated)`` with comments stripped."""
    buf, start = [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//", 1)[0]
        for piece in re.split(r"(;)", line):
            if piece == ";":
                stmt = " ".join(buf).strip()
                if stmt:
                    yield start, stmt, True
                buf, start = [], None
            elif piece.strip():
                if start is None:
                    start = lineno
                buf.append(piece.strip())
    if buf:
        yield start, " ".join(buf).strip(), False


def parse_qasm(text: str) -> ProgramIR:
    reg, width = None, None
    gates: list[Gate] = []
    for lineno, stmt, terminated in _statements(text):
        if not terminated:
            raise QasmError(lineno, f"statement not terminated by ';': {stmt!r}")
        low = stmt.lower()
        if re.match(r"^openqasm\s+2(\.0)?$", low) or re.match(r'^include\s+"qelib1\.inc"$', low):
            continue
        head = low.split()[0].split("(")[0]
        if head in ("measure", "creg", "reset", "if", "opaque", "gate"):
            raise UnsupportedFeatureError(lineno, f"'{head}' is not supported (unitary circuits only)")
        if head == "barrier":
            continue
        if head == "qreg":
            m = _QREG.match(stmt)
            if not m:
                raise QasmError(lineno, f"malformed qreg declaration {stmt!r}")
            if reg is not None:
                raise UnsupportedFeatureError(lineno, "only one qreg is supported")
            reg, width = m["reg"], int(m["size"])
            if width < 1:
                raise QasmError(lineno, "qreg must have at least one qubit")
            continue
        m = _STATEMENT.match(stmt)
        name = m["name"].lower() if m else None
        if name not in _NAMES:
            raise QasmError(lineno, f"unsupported statement {stmt!r}")
        if reg is None:
            raise QasmError(lineno, "gate used before qreg declaration")
        kind = _NAMES[name]
        params = []
        if m["params"] is not None and m["params"].strip():
            try:
                params = [eval_angle(p) for p in m["params"].split(",")]
            except ValueError as exc:
                raise QasmError(lineno, str(exc)) from None
        if len(params) != NUM_PARAMS[kind]:
            raise QasmError(lineno, f"{name} expects {NUM_PARAMS[kind]} parameter(s), got {len(params)}")
        qubits = []
        for arg in (a.strip() for a in m["args"].split(",")):
            q = _QARG.match(arg)
            if not q:
                raise QasmError(lineno, f"bad qubit argument {arg!r}")
            if q["reg"] != reg:
                raise QasmError(lineno, f"unknown register {q['reg']!r}")
            idx = int(q["idx"])
            if idx >= width:
                raise QasmError(lineno, f"qubit {idx} out of range for {reg}[{width}]")
            qubits.append(idx)
        if len(qubits) != ARITY[kind]:
            raise QasmError(lineno, f"{name} acts on {ARITY[kind]} qubit(s), got {len(qubits)}")
        try:
            gates.append(Gate(kind, tuple(qubits), tuple(params)))
        except ValueError as exc:
            raise QasmError(lineno, str(exc)) from None
    if width is None:
        raise QasmError(1, "no qreg declaration found")
    return Circuit(width, gates)


def emit_qasm(circuit: Circuit, header: dict | None = None) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    if header:
        lines.append("// " + " ".join(f"{k}={v}" for k, v in header.items()))
    lines.append(f"qreg q[{circuit.width}];")
    for g in circuit.gates:
        if g.kind is GateKind.I:
            continue
        params = f"({','.join(repr(p) for p in g.params)})" if g.params else ""
        args = ",".join(f"q[{q}]" for q in g.qubits)
        lines.append(f"{_EMIT_NAMES[g.kind]}{params} {args};")
    return "\n".join(lines) + "\n"
