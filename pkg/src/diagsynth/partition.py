"""Greedy left-to-right partitioning of a program into blocks of at most ``block_size`` qubits.

Several blocks may be open at once, on disjoint qubits.  A gate joins (and
possibly merges) the open blocks on its qubits when the union still fits;
otherwise the blocks in the way are sealed.  Blocks are emitted in sealing
order, which respects dependencies: a gate always lands in a block sealed
after every block that previously owned one of its qubits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .gates import Circuit, Gate, circuit_matrix


@dataclass
class Partition:
    qubits: tuple[int, ...]          # sorted global indices; local qubit i is qubits[i]
    ops: list[Gate] = field(default_factory=list)
    op_indices: list[int] = field(default_factory=list)

    def local_circuit(self) -> Circuit:
        where = {q: i for i, q in enumerate(self.qubits)}
        return Circuit(len(self.qubits), [Gate(g.kind, tuple(where[q] for q in g.qubits), g.params)
                                          for g in self.ops])

    @property
    def target(self) -> np.ndarray:
        return circuit_matrix(self.local_circuit().gates, len(self.qubits))


@dataclass
class _Open:
    qubits: set
    ops: list = field(default_factory=list)      # (program index, gate)


def partition(ir: Circuit, block_size: int) -> list[Partition]:
    if block_size not in (2, 3):
        raise ValueError("block_size must be 2 or 3")
    sealed: list[_Open] = []
    owner: dict[int, _Open] = {}

    def seal(b: _Open) -> None:
        for q in b.qubits:
            del owner[q]
        sealed.append(b)

    for idx, g in enumerate(ir.gates):
        need = set(g.qubits)
        touching = []
        for q in g.qubits:
            b = owner.get(q)
            if b is not None and all(b is not t for t in touching):
                touching.append(b)
        if len(need) > block_size:
            for b in touching:
                seal(b)
            sealed.append(_Open(need, [(idx, g)]))
            continue
        # keep the subset of touching blocks that fits and carries the most gates
        best: tuple = ()
        best_key = (-1, 0)
        for r in range(len(touching), -1, -1):
            for keep in combinations(touching, r):
                union = need.union(*(b.qubits for b in keep))
                if len(union) <= block_size:
                    key = (sum(len(b.ops) for b in keep), r)
                    if key > best_key:
                        best, best_key = keep, key
        for b in touching:
            if all(b is not k for k in best):
                seal(b)
        merged = _Open(set(need))
        for b in sorted(best, key=lambda b: b.ops[0][0]):
            merged.qubits |= b.qubits
            merged.ops += b.ops
            for q in b.qubits:
                del owner[q]
        merged.ops.append((idx, g))
        merged.ops.sort(key=lambda item: item[0])
        for q in merged.qubits:
            owner[q] = merged
    remaining = []
    for b in owner.values():
        if all(b is not r for r in remaining):
            remaining.append(b)
    for b in sorted(remaining, key=lambda b: b.ops[0][0]):
        sealed.append(b)
    return [Partition(tuple(sorted(b.qubits)), [g for _, g in b.ops], [i for i, _ in b.ops]) for b in sealed]
