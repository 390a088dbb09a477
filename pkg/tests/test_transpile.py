import json
import math

import numpy as np
import pytest

from diagsynth.anneal import AnnealConfig
from diagsynth.cli.builtins import builtin_matrix, qft_program, random_program, random_word, ripple_adder_program
from diagsynth.gates import (CLIFFORD_T_KINDS, Circuit, Gate, GateKind, circuit_matrix, count_resources, gate,
                             ry_matrix, rz_matrix, unitary_of)
from diagsynth.linalg import hs_distance
from diagsynth.partition import partition
from diagsynth.qasm import parse_qasm
from diagsynth.transpile import gate_level_fallback, lower_gate, transpile

from conftest import phase_equal

K = GateKind
CFG = AnnealConfig(timeout=30, max_iters=5000)
H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
S = np.diag([1, 1j])


def sim(c):
    return circuit_matrix(c.gates, c.width)


def ccy_program():
    # CCY = (I (x) I (x) S) CCX (I (x) I (x) Sdg)
    return Circuit(3, [gate(K.SDG, 2), Gate(K.CCX, (0, 1, 2)), gate(K.S, 2)])


def corpus():
    rng = np.random.default_rng(11)
    clifford = Circuit(3, [gate(K.H, 0), gate(K.CNOT, 0, 1), gate(K.S, 1), gate(K.CNOT, 1, 2), gate(K.SDG, 2),
                           Gate(K.CZ, (0, 2)), Gate(K.SWAP, (0, 1)), gate(K.X, 2), gate(K.H, 1)])
    return {
        "qft3": qft_program(3),
        "adder1": ripple_adder_program(1),
        "random3": random_program(3, 20, rng),
        "random4": random_program(4, 24, rng),
        "clifford": clifford,
        "ccy": ccy_program(),
    }


CORPUS = corpus()


@pytest.fixture(scope="module")
def runs():
    return {(name, bs): transpile(ir, block_size=bs, cfg=CFG)
            for name, ir in CORPUS.items() for bs in (2, 3)}


def test_ry_identity():
    # as a matrix product RY(theta) = S H RZ(theta) H Sdg, so Sdg acts first in time;
    # the mirrored product Sdg H RZ H S is RY(-theta)
    sdg = S.conj().T
    for theta in np.linspace(-4, 4, 17):
        assert phase_equal(S @ H @ rz_matrix(theta) @ H @ sdg, ry_matrix(theta), tol=1e-12)
        assert phase_equal(sdg @ H @ rz_matrix(theta) @ H @ S, ry_matrix(-theta), tol=1e-12)


@pytest.mark.parametrize("g", [
    Gate(K.RX, (0,), (0.7,)), Gate(K.RY, (0,), (-1.2,)), Gate(K.CRZ, (0, 1), (0.9,)), Gate(K.CRY, (1, 0), (0.4,)),
    Gate(K.CP, (0, 1), (2.1,)), Gate(K.CZ, (0, 1)), Gate(K.SWAP, (0, 1)), Gate(K.CCX, (2, 0, 1)),
    Gate(K.U3, (0,), (0.3, 1.1, -0.5)), Gate(K.T, (1,)), Gate(K.RZ, (0,), (0.2,)),
])
def test_lowering_is_exact(g):
    width = max(g.qubits) + 1
    lowered = lower_gate(g)
    assert all(h.kind in CLIFFORD_T_KINDS or h.kind is K.RZ for h in lowered)
    assert phase_equal(circuit_matrix(lowered, width), circuit_matrix([g], width), tol=1e-12)


def test_fallback_ccx_seven_t_exact():
    fb = gate_level_fallback(Circuit(3, [Gate(K.CCX, (0, 1, 2))]), 1e-3)
    assert count_resources(fb.circuit).t_count == 7 and fb.eps == 0
    assert phase_equal(unitary_of(fb.circuit), builtin_matrix("toffoli"), tol=1e-12)


def test_fallback_h_passes_through():
    fb = gate_level_fallback(Circuit(1, [gate(K.H, 0)]), 1e-3)
    assert fb.circuit.gates == [gate(K.H, 0)] and fb.eps == 0


def test_fallback_cry_two_rotations():
    fb = gate_level_fallback(Circuit(2, [Gate(K.CRY, (0, 1), (0.5,))]), 1e-3)
    assert fb.rz_approximated == 2 and fb.eps == pytest.approx(2e-3)
    assert hs_distance(unitary_of(fb.circuit), builtin_matrix("cry:0.5")) <= 2e-3
    assert all(g.kind in CLIFFORD_T_KINDS for g in fb.circuit.gates)


def test_fallback_exact_angles_cost_nothing():
    fb = gate_level_fallback(Circuit(1, [Gate(K.RZ, (0,), (math.pi / 4,)), Gate(K.RX, (0,), (math.pi / 2,))]), 1e-3)
    assert fb.eps == 0 and fb.rz_approximated == 0
    assert count_resources(fb.circuit).t_count == 1


@pytest.mark.parametrize("name", sorted(CORPUS))
@pytest.mark.parametrize("bs", [2, 3])
def test_never_worse(runs, name, bs):
    _, rep = runs[name, bs]
    assert rep.t_count <= rep.gate_level_t_count
    assert rep.improvement >= 0


@pytest.mark.parametrize("name", sorted(CORPUS))
@pytest.mark.parametrize("bs", [2, 3])
def test_error_budget_soundness(runs, name, bs):
    out, rep = runs[name, bs]
    assert rep.eps_total == pytest.approx(math.fsum(p.eps for p in rep.partitions), abs=0, rel=0)
    assert hs_distance(sim(out), sim(CORPUS[name])) <= rep.eps_total + 1e-9


@pytest.mark.parametrize("name", sorted(CORPUS))
@pytest.mark.parametrize("bs", [2, 3])
def test_output_purity(runs, name, bs):
    out, rep = runs[name, bs]
    assert all(g.kind in CLIFFORD_T_KINDS for g in out.gates)
    assert rep.rz_count == 0
    counts = count_resources(out)
    assert (counts.t_count, counts.clifford_count) == (rep.t_count, rep.clifford_count)


@pytest.mark.parametrize("bs", [2, 3])
def test_per_partition_t_sums_to_total(runs, bs):
    for name in CORPUS:
        _, rep = runs[name, bs]
        assert sum(p.t_count for p in rep.partitions) == rep.t_count
        assert len(rep.partitions) == len(partition(CORPUS[name], bs))


@pytest.mark.parametrize("bs", [2, 3])
def test_all_clifford_input(runs, bs):
    _, rep = runs["clifford", bs]
    assert rep.t_count == 0 and rep.gate_level_t_count == 0
    assert rep.improvement == 0 and rep.eps_total == 0


@pytest.mark.parametrize("bs", [2, 3])
def test_clifford_t_input_keeps_t_count(bs):
    ir = Circuit(3, [gate(K.T, 0), gate(K.H, 0), gate(K.CNOT, 0, 1), gate(K.TDG, 1), gate(K.H, 2),
                     gate(K.CNOT, 1, 2), gate(K.T, 2), gate(K.H, 1), gate(K.T, 1)])
    out, rep = transpile(ir, block_size=bs, cfg=CFG)
    assert rep.t_count == count_resources(ir).t_count == 4
    assert rep.eps_total == 0
    assert phase_equal(sim(out), sim(ir), tol=1e-9)


def test_clifford_t_random_words_never_gain_t():
    rng = np.random.default_rng(5)
    for _ in range(5):
        ir = Circuit(3, random_word(3, 15, rng))
        out, rep = transpile(ir, block_size=3, cfg=CFG)
        assert rep.t_count <= count_resources(ir).t_count
        assert rep.eps_total == 0
        assert phase_equal(sim(out), sim(ir), tol=1e-9)


def test_ccy_partition_diagonalized(runs):
    _, rep = runs["ccy", 3]
    (p,) = rep.partitions
    assert p.method == "diagonalized"
    assert p.t_count <= p.gate_level_t_count == 7
    assert p.eps <= 1e-8


def test_qft3_against_dft(runs):
    out, rep = runs["qft3", 2]
    assert hs_distance(sim(out), builtin_matrix("qft:3")) <= rep.eps_total + 1e-9


def test_json_report_fields(runs):
    _, rep = runs["qft3", 2]
    d = json.loads(rep.to_json())
    assert set(d) == {"partitions", "totals"}
    assert set(d["totals"]) == {"t_count", "clifford_count", "eps_total", "percent_diagonalized", "elapsed_s", "seed"}
    for p in d["partitions"]:
        assert set(p) == {"index", "qubits", "method", "t_count", "rz_approximated", "eps"}
        assert p["method"] in ("diagonalized", "gate-level")
    assert [p["index"] for p in d["partitions"]] == list(range(len(d["partitions"])))


def test_text_report_rows(runs):
    _, rep = runs["adder1", 2]
    text = rep.to_text()
    for key in ("R_Z gates", "T gates", "eps_total", "% diagonalized", "Improvement"):
        assert key in text
    assert "R_Z gates          0" in text


def test_percent_diagonalized_matches_methods(runs):
    for _, rep in runs.values():
        n = len(rep.partitions)
        k = sum(p.method == "diagonalized" for p in rep.partitions)
        assert rep.percent_diagonalized == pytest.approx(100 * k / n if n else 0)


def test_deterministic():
    ir = CORPUS["random3"]
    a, ra = transpile(ir, block_size=2, cfg=CFG)
    b, rb = transpile(ir, block_size=2, cfg=CFG)
    assert a.gates == b.gates
    assert [vars(p) for p in ra.partitions] == [vars(p) for p in rb.partitions]


@pytest.mark.parametrize("kw", [dict(block_eps=0), dict(rz_eps=-1e-3), dict(block_size=4)])
def test_bad_parameters(kw):
    with pytest.raises(ValueError):
        transpile(Circuit(1, [gate(K.H, 0)]), **{"block_size": 2, **kw})


def test_parsed_program_roundtrip_through_transpile():
    ir = parse_qasm("qreg q[2]; h q[0]; crz(pi/3) q[0],q[1]; ry(0.4) q[1]; cz q[0],q[1];")
    out, rep = transpile(ir, block_size=2, cfg=CFG)
    assert hs_distance(sim(out), sim(ir)) <= rep.eps_total + 1e-9
