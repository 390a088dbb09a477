"""Block-wise Clifford+T transpilation.

Every partition is compiled twice: once gate by gate with fixed rewrite
rules, once by diagonalization search on the partition's unitary.  The
diagonalized variant is kept unless it failed or costs more T gates; on a T
tie it must also not add error beyond the numerical floor.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace

from . import __version__
from .anneal import AnnealConfig, Mode, SynthesisResult, synthesize
from .gates import (CLIFFORD_T_KINDS, Circuit, Gate, GateKind, canonicalize, count_resources,
                    snap_eighths, unitary_of)
from .partition import Partition, partition
from .rz import RzSynthesizer, euler_zxz, synth_rz

EPS_FLOOR = 1e-12   # distances below this are floating-point noise on exact words


def _g(kind: GateKind, *qubits: int, angle: float | None = None) -> Gate:
    return Gate(kind, qubits, () if angle is None else (angle,))


def _ry(theta: float, q: int) -> list[Gate]:
    # RY = S H RZ H Sdg as a matrix product, so Sdg acts first
    return [_g(GateKind.SDG, q), _g(GateKind.H, q), _g(GateKind.RZ, q, angle=theta),
            _g(GateKind.H, q), _g(GateKind.S, q)]


def lower_gate(g: Gate) -> list[Gate]:
    """Rewrite one input gate into Clifford+T gates plus RZ rotations."""
    k, q = g.kind, g.qubits
    if k in CLIFFORD_T_KINDS or k is GateKind.RZ:
        return [g]
    if k is GateKind.I:
        return []
    if k is GateKind.RX:
        return [_g(GateKind.H, q[0]), _g(GateKind.RZ, q[0], angle=g.params[0]), _g(GateKind.H, q[0])]
    if k is GateKind.RY:
        return _ry(g.params[0], q[0])
    if k is GateKind.CRZ:
        c, t = q
        th = g.params[0]
        return [_g(GateKind.RZ, t, angle=th / 2), _g(GateKind.CNOT, c, t),
                _g(GateKind.RZ, t, angle=-th / 2), _g(GateKind.CNOT, c, t)]
    if k is GateKind.CRY:
        c, t = q
        th = g.params[0]
        return _ry(th / 2, t) + [_g(GateKind.CNOT, c, t)] + _ry(-th / 2, t) + [_g(GateKind.CNOT, c, t)]
    if k is GateKind.CP:
        c, t = q
        lam = g.params[0]
        return [_g(GateKind.RZ, c, angle=lam / 2), _g(GateKind.CNOT, c, t), _g(GateKind.RZ, t, angle=-lam / 2),
                _g(GateKind.CNOT, c, t), _g(GateKind.RZ, t, angle=lam / 2)]
    if k is GateKind.CZ:
        c, t = q
        return [_g(GateKind.H, t), _g(GateKind.CNOT, c, t), _g(GateKind.H, t)]
    if k is GateKind.SWAP:
        a, b = q
        return [_g(GateKind.CNOT, a, b), _g(GateKind.CNOT, b, a), _g(GateKind.CNOT, a, b)]
    if k is GateKind.CCX:
        a, b, t = q
        T, TD, CX, H = GateKind.T, GateKind.TDG, GateKind.CNOT, GateKind.H
        return [_g(H, t), _g(CX, b, t), _g(TD, t), _g(CX, a, t), _g(T, t), _g(CX, b, t), _g(TD, t),
                _g(CX, a, t), _g(T, b), _g(T, t), _g(H, t), _g(CX, a, b), _g(T, a), _g(TD, b), _g(CX, a, b)]
    if k is GateKind.U3:
        (t1, t2, t3), _ = euler_zxz(unitary_of(Circuit(1, [Gate(k, (0,), g.params)])))
        return [_g(GateKind.RZ, q[0], angle=t3), _g(GateKind.SX, q[0]), _g(GateKind.RZ, q[0], angle=t2),
                _g(GateKind.SX, q[0]), _g(GateKind.RZ, q[0], angle=t1)]
    raise ValueError(f"no gate-level rule for {k.value}")


@dataclass
class FallbackResult:
    circuit: Circuit
    eps: float
    rz_approximated: int


def gate_level_fallback(ops: Circuit, rz_eps: float, rz: RzSynthesizer | None = None) -> FallbackResult:
    """Gate-by-gate translation; each non-Clifford rotation costs ``rz_eps`` of budget."""
    rz = rz or RzSynthesizer()
    out: list[Gate] = []
    approximated = 0
    for g in ops.gates:
        for h in lower_gate(g):
            if h.kind is not GateKind.RZ:
                out.append(h)
                continue
            res = synth_rz(h.params[0], rz_eps, rz)
            out += res.circuit.remap([h.qubits[0]], ops.width).gates
            if snap_eighths(h.params[0]) is None:
                approximated += 1
    return FallbackResult(canonicalize(Circuit(ops.width, out)), approximated * rz_eps, approximated)


@dataclass
class PartitionOutcome:
    index: int
    qubits: tuple[int, ...]
    method: str                  # "diagonalized" | "gate-level"
    t_count: int
    rz_approximated: int
    eps: float
    gate_level_t_count: int
    diagonalized_t_count: int | None


@dataclass
class TranspileReport:
    partitions: list[PartitionOutcome]
    t_count: int
    rz_count: int
    clifford_count: int
    eps_total: float
    percent_diagonalized: float
    gate_level_t_count: int
    elapsed_s: float
    seed: int
    params: dict = field(default_factory=dict)

    @property
    def improvement(self) -> float:
        """Relative T reduction against gate-level-only translation, in percent."""
        if self.gate_level_t_count == 0:
            return 0.0
        return 100.0 * (self.gate_level_t_count - self.t_count) / self.gate_level_t_count

    def to_json_dict(self) -> dict:
        return {
            "partitions": [{"index": p.index, "qubits": list(p.qubits), "method": p.method,
                            "t_count": p.t_count, "rz_approximated": p.rz_approximated, "eps": p.eps}
                           for p in self.partitions],
            "totals": {"t_count": self.t_count, "clifford_count": self.clifford_count,
                       "eps_total": self.eps_total, "percent_diagonalized": self.percent_diagonalized,
                       "elapsed_s": self.elapsed_s, "seed": self.seed},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def to_text(self) -> str:
        lines = [
            f"R_Z gates          {self.rz_count}",
            f"T gates            {self.t_count}",
            f"T gates (by gate)  {self.gate_level_t_count}",
            f"Clifford gates     {self.clifford_count}",
            f"eps_total          {self.eps_total:.3e}",
            f"% diagonalized     {self.percent_diagonalized:.1f}",
            f"Improvement        {self.improvement:.1f}%",
            f"elapsed_s          {self.elapsed_s:.2f}",
            f"seed               {self.seed}",
            "",
            f"{'index':>5}  {'qubits':<10} {'method':<13} {'T':>5} {'T(gate)':>8} {'T(diag)':>8} {'rz':>4}  eps",
        ]
        for p in self.partitions:
            diag_t = "-" if p.diagonalized_t_count is None else str(p.diagonalized_t_count)
            lines.append(f"{p.index:>5}  {','.join(map(str, p.qubits)):<10} {p.method:<13} {p.t_count:>5} "
                         f"{p.gate_level_t_count:>8} {diag_t:>8} {p.rz_approximated:>4}  {p.eps:.3e}")
        return "\n".join(lines) + "\n"


def _diagonalized(part: Partition, cfg: AnnealConfig, rz: RzSynthesizer) -> SynthesisResult | None:
    res = synthesize(part.target, replace(cfg, mode=Mode.DIAGONALIZE), rz)
    return res if res.succeeded else None


def _clean_eps(x: float) -> float:
    return 0.0 if x < EPS_FLOOR else x


def transpile(ir: Circuit, block_size: int = 2, block_eps: float = 1e-8, rz_eps: float = 1e-3,
              cfg: AnnealConfig | None = None, rz: RzSynthesizer | None = None) -> tuple[Circuit, TranspileReport]:
    if block_eps <= 0 or rz_eps <= 0:
        raise ValueError("block_eps and rz_eps must be positive")
    start = time.monotonic()
    rz = rz or RzSynthesizer()
    cfg = replace(cfg or AnnealConfig(), eps=block_eps, rz_eps=rz_eps)
    out: list[Gate] = []
    outcomes: list[PartitionOutcome] = []
    by_gate_t = 0
    for index, part in enumerate(partition(ir, block_size)):
        local = part.local_circuit()
        fb = gate_level_fallback(local, rz_eps, rz)
        fb_t = count_resources(fb.circuit).t_count
        by_gate_t += fb_t
        diag = _diagonalized(part, cfg, rz) if fb_t > 0 else None
        choice, method, eps, approx = fb.circuit, "gate-level", fb.eps, fb.rz_approximated
        diag_t = None
        if diag is not None:
            diag_t = diag.counts.t_count
            d_eps = _clean_eps(diag.block_eps) + diag.rz_budget
            if diag_t < fb_t or (diag_t == fb_t and d_eps <= fb.eps + EPS_FLOOR):
                choice, method, eps, approx = diag.circuit, "diagonalized", d_eps, diag.rz_approximated
        out += choice.remap(part.qubits, ir.width).gates
        outcomes.append(PartitionOutcome(index, part.qubits, method, count_resources(choice).t_count,
                                         approx, eps, fb_t, diag_t))
    result = Circuit(ir.width, out)
    counts = count_resources(result)
    n = len(outcomes)
    report = TranspileReport(
        partitions=outcomes,
        t_count=counts.t_count,
        rz_count=counts.rz_count,
        clifford_count=counts.clifford_count,
        eps_total=math.fsum(p.eps for p in outcomes),
        percent_diagonalized=100.0 * sum(p.method == "diagonalized" for p in outcomes) / n if n else 0.0,
        gate_level_t_count=by_gate_t,
        elapsed_s=time.monotonic() - start,
        seed=cfg.seed,
        params={"version": __version__, "seed": cfg.seed, "block_size": block_size,
                "block_eps": block_eps, "rz_eps": rz_eps},
    )
    return result, report
