import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diagsynth.cli.builtins import qft_program, random_program, ripple_adder_program
from diagsynth.gates import Circuit, Gate, GateKind, circuit_matrix, embed, gate
from diagsynth.partition import partition

from conftest import phase_equal

K = GateKind


def recompose(ir, parts):
    u = np.eye(2 ** ir.width, dtype=complex)
    for p in parts:
        u = embed(p.target, p.qubits, ir.width) @ u
    return u


def check_cover(ir, parts, block_size):
    seen = sorted(i for p in parts for i in p.op_indices)
    assert seen == list(range(len(ir.gates)))
    for p in parts:
        assert [ir.gates[i] for i in p.op_indices] == p.ops
        assert p.op_indices == sorted(p.op_indices)
        assert set(q for g in p.ops for q in g.qubits) <= set(p.qubits)
        assert len(p.qubits) <= max(block_size, max(len(g.qubits) for g in p.ops))


def test_cx_chain_hand_trace():
    ir = Circuit(3, [gate(K.CNOT, 0, 1), gate(K.CNOT, 1, 2), gate(K.CNOT, 0, 1)])
    parts = partition(ir, 2)
    assert [p.qubits for p in parts] == [(0, 1), (1, 2), (0, 1)]
    assert [p.op_indices for p in parts] == [[0], [1], [2]]


def test_cx_chain_fits_one_block_of_three():
    ir = Circuit(3, [gate(K.CNOT, 0, 1), gate(K.CNOT, 1, 2), gate(K.CNOT, 0, 1)])
    parts = partition(ir, 3)
    assert len(parts) == 1 and parts[0].qubits == (0, 1, 2)


def test_single_qubit_runs():
    # runs on disjoint wires never interact, so each wire is one block
    ir = Circuit(3, [gate(K.H, 0), gate(K.T, 1), gate(K.S, 0), gate(K.H, 2), gate(K.T, 0), gate(K.X, 1)])
    parts = partition(ir, 2)
    assert sorted(p.op_indices for p in parts) == [[0, 2, 4], [1, 5], [3]]


def test_single_qubit_run_broken_by_two_qubit_gate():
    ir = Circuit(3, [gate(K.H, 0), gate(K.CNOT, 1, 2), gate(K.CNOT, 0, 2), gate(K.T, 0)])
    parts = partition(ir, 2)
    check_cover(ir, parts, 2)
    assert phase_equal(recompose(ir, parts), circuit_matrix(ir.gates, 3))


@pytest.mark.parametrize("block_size", [0, 1, 4])
def test_bad_block_size(block_size):
    with pytest.raises(ValueError):
        partition(Circuit(1, [gate(K.H, 0)]), block_size)


def test_empty_program():
    assert partition(Circuit(2, []), 2) == []


def test_three_qubit_gate_at_block_size_two_is_its_own_block():
    ir = Circuit(3, [gate(K.H, 0), Gate(K.CCX, (0, 1, 2)), gate(K.H, 2)])
    parts = partition(ir, 2)
    check_cover(ir, parts, 2)
    ccx = [p for p in parts if 1 in p.op_indices]
    assert len(ccx) == 1 and ccx[0].op_indices == [1]
    assert phase_equal(recompose(ir, parts), circuit_matrix(ir.gates, 3))


def test_independent_blocks_merge_when_they_fit():
    # h q0 and h q1 open separate blocks; cx(0,1) joins both at block size 2
    ir = Circuit(2, [gate(K.H, 0), gate(K.H, 1), gate(K.CNOT, 0, 1)])
    parts = partition(ir, 2)
    assert len(parts) == 1 and parts[0].op_indices == [0, 1, 2]


@pytest.mark.parametrize("block_size", [2, 3])
@pytest.mark.parametrize("n", [3, 4])
def test_qft_partitions_recompose(block_size, n):
    ir = qft_program(n)
    parts = partition(ir, block_size)
    check_cover(ir, parts, block_size)
    assert phase_equal(recompose(ir, parts), circuit_matrix(ir.gates, n), tol=1e-9)


@pytest.mark.parametrize("block_size", [2, 3])
def test_adder_partitions_recompose(block_size):
    ir = ripple_adder_program(1)
    parts = partition(ir, block_size)
    check_cover(ir, parts, block_size)
    assert phase_equal(recompose(ir, parts), circuit_matrix(ir.gates, ir.width), tol=1e-9)


@settings(max_examples=150)
@given(st.integers(1, 4), st.integers(0, 25), st.sampled_from([2, 3]), st.integers(0, 2 ** 32 - 1))
def test_recomposition_property(width, length, block_size, seed):
    ir = random_program(width, length, np.random.default_rng(seed))
    parts = partition(ir, block_size)
    if length:
        check_cover(ir, parts, block_size)
    assert phase_equal(recompose(ir, parts), circuit_matrix(ir.gates, width), tol=1e-9)


def test_local_circuit_relabels():
    ir = Circuit(4, [gate(K.CNOT, 3, 1), gate(K.T, 1)])
    (p,) = partition(ir, 2)
    assert p.qubits == (1, 3)
    assert p.local_circuit().gates == [gate(K.CNOT, 1, 0), gate(K.T, 0)]
