"""Acceptance suite: one test per criterion, each reported as a PASS/FAIL line."""

import math
import os
import shutil
import statistics
import time
from collections import Counter
from dataclasses import replace

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.optimize import minimize

from diagsynth.anneal import AnnealConfig, Mode, diagonalize, invert, synthesize
from diagsynth.cli.bench import run_bench
from diagsynth.cli.builtins import (builtin_matrix, program_matrix, qft_matrix, qft_program, random_adb_target,
                                    random_clifford_target, random_program, random_word, ripple_adder_program)
from diagsynth.diagonal import build_diagonal_circuit, solve_angles
from diagsynth.gates import CLIFFORD_T_KINDS, Circuit, Gate, GateKind, count_resources, rz_matrix, unitary_of
from diagsynth.linalg import diagonal_distance, hs_distance, nearest_diagonal, random_unitary, row_offdiagonal_criterion
from diagsynth.qasm import emit_qasm
from diagsynth.rz import RZ_CMD_ENV, RzSynthesizer, clear_cache, synth_rz, warm_tables
from diagsynth.transpile import transpile

K = GateKind
SIM_WIDTH = 4


@pytest.fixture(scope="module", autouse=True)
def warm():
    # table construction is a one-off cost, not part of any criterion's runtime
    warm_tables()


def external_tool():
    cmd = os.environ.get(RZ_CMD_ENV)
    if cmd:
        return cmd
    return "gridsynth {theta} -d {digits}" if shutil.which("gridsynth") else None


# --- 1 ------------------------------------------------------------------------------

def _near_diagonal(n, rng):
    dim = 2 ** n
    h = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (h + h.conj().T) / 2
    scale = 10 ** rng.uniform(-9, 0)
    d = np.diag(np.exp(1j * rng.uniform(-math.pi, math.pi, dim)))
    return d @ expm(1j * scale * h / np.linalg.norm(h, 2))


@pytest.mark.criterion(1)
def test_criterion_1_row_criterion_soundness(notes):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    kinds = Counter()
    held = Counter()
    worst = 0.0
    for i in range(10_000):
        n = int(rng.integers(1, 4))
        pick = i % 3
        if pick == 0:
            s, kind = random_unitary(2 ** n, rng), "haar"
        elif pick == 1:
            s, kind = _near_diagonal(n, rng), "near-diagonal"
        else:
            s, kind = random_clifford_target(n, rng, max_len=6), "clifford"
        kinds[kind] += 1
        for eps in (1e-1, 1e-3, 1e-6):
            if row_offdiagonal_criterion(s, eps):
                held[eps] += 1
                dist = hs_distance(nearest_diagonal(s).matrix() @ s, np.eye(2 ** n))
                worst = max(worst, dist - eps)
                assert dist <= eps + 1e-12, (kind, n, eps, dist)
    elapsed = time.perf_counter() - start
    notes.append(f"{sum(kinds.values())} unitaries {dict(kinds)}; criterion held "
                 f"{held[1e-1]}/{held[1e-3]}/{held[1e-6]} times at eps 1e-1/1e-3/1e-6; "
                 f"max (dist - eps) {worst:.2e}; {elapsed:.1f} s")
    assert all(held[e] >= 500 for e in (1e-1, 1e-3, 1e-6))
    assert elapsed < 10


# --- 2 ------------------------------------------------------------------------------

def _numeric_diagonal_distance(s, rng, starts=4):
    """Direct minimization of hs_distance(s, diag(exp(i phi))) over phi, first phase fixed."""
    dim = s.shape[0]

    def f(free):
        phi = np.concatenate([[0.0], free])
        return hs_distance(s, np.diag(np.exp(1j * phi))) ** 2

    best = math.inf
    for _ in range(starts):
        r = minimize(f, rng.uniform(-math.pi, math.pi, dim - 1), method="BFGS", options={"gtol": 1e-12})
        best = min(best, r.fun)
    return math.sqrt(max(best, 0.0))


@pytest.mark.criterion(2)
def test_criterion_2_diagonal_distance_oracle(notes):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    worst = 0.0
    for i in range(100):
        n = 1 + i % 2
        s = random_unitary(2 ** n, rng)
        worst = max(worst, abs(diagonal_distance(s) - _numeric_diagonal_distance(s, rng)))
    elapsed = time.perf_counter() - start
    notes.append(f"100 unitaries; max |closed form - numeric| {worst:.2e}; {elapsed:.1f} s")
    assert worst <= 1e-6
    assert elapsed < 30


# --- 3 ------------------------------------------------------------------------------

@pytest.mark.criterion(3)
def test_criterion_3_diagonal_roundtrip(notes):
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst, max_rz = 0.0, {}
    for n in (1, 2, 3):
        for _ in range(200):
            phases = rng.uniform(-math.pi, math.pi, 2 ** n)
            c = build_diagonal_circuit(solve_angles(phases))
            worst = max(worst, hs_distance(unitary_of(c), np.diag(np.exp(1j * phases))))
            rz = count_resources(c).rz_count
            max_rz[n] = max(max_rz.get(n, 0), rz)
            assert rz <= 2 ** n - 1
    elapsed = time.perf_counter() - start
    notes.append(f"600 phase vectors; max distance {worst:.2e}; max R_Z count per n {max_rz}; {elapsed:.1f} s")
    assert worst <= 1e-10
    assert elapsed < 10


# --- 4 ------------------------------------------------------------------------------

@pytest.mark.criterion(4)
def test_criterion_4_flagships(notes):
    cfg = AnnealConfig(eps=1e-8, timeout=120, workers=1, seed=0)

    start = time.perf_counter()
    ccz = diagonalize(builtin_matrix("ccz"), cfg)
    t_ccz = time.perf_counter() - start
    assert ccz.succeeded and ccz.counts.t_count == 7 and ccz.eps_total <= 1e-8
    assert ccz.rz_approximated == 0
    assert hs_distance(unitary_of(ccz.circuit), builtin_matrix("ccz")) <= 1e-8
    assert t_ccz < 120

    start = time.perf_counter()
    ccy = diagonalize(builtin_matrix("ccy"), cfg)
    t_ccy = time.perf_counter() - start
    assert ccy.succeeded and ccy.eps_total <= 1e-8
    lr = ccy.left.gates + ccy.right.gates
    words = Counter(g.kind.value for g in lr)
    angles = solve_angles(ccy.diagonal_phases).nonzero()
    notes.append(f"CCZ T={ccz.counts.t_count} eps={ccz.eps_total:.1e} {t_ccz:.1f} s; "
                 f"CCY L/R {dict(words)} ({len(lr)} gates), diagonal angles "
                 f"{sorted(round(a / math.pi, 6) for a in angles.values())} pi, T={ccy.counts.t_count} {t_ccy:.1f} s")
    assert {g.kind for g in lr} <= CLIFFORD_T_KINDS - {K.T, K.TDG}
    assert len(lr) <= 6
    assert words == Counter({"h": 2, "s": 1, "sdg": 1})
    assert all(abs(abs(a) - math.pi / 4) < 1e-9 for a in angles.values())
    assert hs_distance(unitary_of(ccy.circuit), builtin_matrix("ccy")) <= 1e-8
    assert t_ccy < 120

    assert diagonalize(builtin_matrix("ccz"), cfg) == ccz
    assert diagonalize(builtin_matrix("ccy"), cfg) == ccy


# --- 5 ------------------------------------------------------------------------------

CONTRAST = AnnealConfig(rz_eps=1e-3, timeout=60, max_iters=30_000, seed=0)


@pytest.mark.slow
@pytest.mark.criterion(5)
def test_criterion_5_controlled_rotation_contrast(notes):
    rows = run_bench("controlled-rotations", 20, [1e-4], [Mode.DIAGONALIZE, Mode.INVERT], CONTRAST)
    by = {(r.family, r.mode): r for r in rows}
    diag = [by["cry", "diag"], by["ccry", "diag"]]
    inv = [by["cry", "invert"], by["ccry", "invert"]]
    diag_ok = sum(r.successes for r in diag)
    inv_ok = sum(r.successes for r in inv)
    diag_median = statistics.median([by["cry", "diag"].median_time_s, by["ccry", "diag"].median_time_s])
    notes.append(f"diag {diag_ok}/40 (CRY median T {by['cry', 'diag'].median_t}, CCRY median T "
                 f"{by['ccry', 'diag'].median_t}, median time {diag_median:.2f} s); "
                 f"invert {inv_ok}/40 under timeout 60 s and {CONTRAST.max_iters} iterations per target")
    assert diag_ok == 40
    assert max(r.median_time_s for r in diag) < 60
    assert inv_ok <= 0.2 * 40


@pytest.mark.criterion(5, "external rerun")
def test_criterion_5_external_rerun(notes):
    cmd = external_tool()
    if cmd is None:
        pytest.skip(f"no external RZ tool: set {RZ_CMD_ENV} or put gridsynth on PATH")
    rz = RzSynthesizer(strategy="external", external_command=cmd)
    rows = run_bench("controlled-rotations", 20, [1e-4], [Mode.DIAGONALIZE], replace(CONTRAST, rz_eps=1e-7), rz)
    ok = sum(r.successes for r in rows)
    notes.append(f"diag {ok}/40 at rz-eps 1e-7 via {cmd.split()[0]}")
    assert ok == 40


# --- 6 ------------------------------------------------------------------------------

def _corpus():
    rng = np.random.default_rng(66)
    clifford = Circuit(4, [Gate(K.H, (0,)), Gate(K.CNOT, (0, 1)), Gate(K.S, (1,)), Gate(K.CZ, (1, 2)),
                           Gate(K.SWAP, (2, 3)), Gate(K.SDG, (3,)), Gate(K.H, (2,)), Gate(K.CNOT, (3, 0)),
                           Gate(K.Y, (1,)), Gate(K.SX, (0,))])
    return {
        "qft4": qft_program(4, "rz"),
        "qft4-crz": qft_program(4, "crz"),
        "adder1": ripple_adder_program(1),
        "adder2": ripple_adder_program(2),
        "random3": random_program(3, 30, rng),
        "random4": random_program(4, 30, rng),
        "clifford-t4": Circuit(4, random_word(4, 30, rng)),
        "clifford4": clifford,
    }


@pytest.mark.criterion(6)
def test_criterion_6_never_worse(notes):
    cfg = AnnealConfig(timeout=60, max_iters=30_000, seed=0)
    rows = []
    for name, ir in _corpus().items():
        for bs in (2, 3):
            out, rep = transpile(ir, block_size=bs, cfg=cfg)
            assert rep.t_count <= rep.gate_level_t_count, (name, bs)
            assert count_resources(out).rz_count == 0
            assert rep.eps_total == math.fsum(p.eps for p in rep.partitions)
            cell = f"{name}/{bs}: T {rep.t_count}<={rep.gate_level_t_count}"
            if ir.width <= SIM_WIDTH:
                dist = hs_distance(program_matrix(out), program_matrix(ir))
                assert dist <= rep.eps_total + 1e-12, (name, bs, dist, rep.eps_total)
                cell += f" dist {dist:.1e} vs eps_total {rep.eps_total:.1e}"
            rows.append(cell)
    notes.append(", ".join(rows) + " (distances compared with 1e-12 floating-point allowance)")


# --- 7 ------------------------------------------------------------------------------

@pytest.mark.criterion(7)
def test_criterion_7_qft_affinity(notes):
    cfg = AnnealConfig(timeout=60, max_iters=30_000, seed=0)
    out, rep = transpile(qft_program(4, "rz"), block_size=2, cfg=cfg)
    dist = hs_distance(program_matrix(out), qft_matrix(4))
    _, gate_form = transpile(qft_program(4, "crz"), block_size=2, cfg=cfg)
    notes.append(f"QFT-4 (h/cx/rz basis) block size 2: {rep.percent_diagonalized:.0f}% diagonalized, "
                 f"T {rep.t_count} vs {rep.gate_level_t_count} by gate, improvement {rep.improvement:.1f}%, "
                 f"eps_total {rep.eps_total:.1e}, simulated distance {dist:.1e}; "
                 f"CRZ-gate form: {gate_form.percent_diagonalized:.0f}% diagonalized, "
                 f"improvement {gate_form.improvement:.1f}%")
    assert rep.percent_diagonalized >= 50
    assert rep.improvement > 0
    assert dist <= rep.eps_total


# --- 8 ------------------------------------------------------------------------------

@pytest.mark.criterion(8)
def test_criterion_8_rz_approximator(notes):
    clear_cache()
    exact_t = []
    for k in range(16):
        theta = k * math.pi / 4
        res = synth_rz(theta, 1e-3)
        exact_t.append(res.t_count)
        assert res.t_count <= 1 and res.t_count == count_resources(res.circuit).t_count
        assert hs_distance(unitary_of(res.circuit), rz_matrix(theta)) <= 1e-12
    rng = np.random.default_rng(88)
    ts, worst = [], 0.0
    for theta in rng.uniform(-math.pi, math.pi, 50):
        res = synth_rz(float(theta), 1e-3)
        actual = hs_distance(unitary_of(res.circuit), rz_matrix(theta))
        worst = max(worst, actual)
        assert res.achieved_eps <= 1e-3 and actual <= 1e-3
        assert abs(actual - res.achieved_eps) <= 1e-9
        ts.append(res.t_count)
    notes.append(f"k pi/4 T-counts {exact_t}; 50 random angles all within 1e-3 "
                 f"(max {worst:.2e}, mean T {statistics.mean(ts):.1f}, max T {max(ts)})")


@pytest.mark.criterion(8, "external integration")
def test_criterion_8_external_integration(notes):
    cmd = external_tool()
    if cmd is None:
        pytest.skip(f"no external RZ tool: set {RZ_CMD_ENV} or put gridsynth on PATH")
    rz = RzSynthesizer(strategy="external", external_command=cmd)
    ts = []
    for theta in np.random.default_rng(8).uniform(-math.pi, math.pi, 10):
        res = synth_rz(float(theta), 1e-7, rz)
        assert hs_distance(unitary_of(res.circuit), rz_matrix(theta)) <= 1e-7
        ts.append(res.t_count)
    notes.append(f"mean T at 1e-7: {statistics.mean(ts):.1f}")


# --- 9 ------------------------------------------------------------------------------

@pytest.mark.criterion(9)
def test_criterion_9_determinism_and_superset(notes):
    cfg = AnnealConfig(eps=1e-8, timeout=60, max_iters=20_000, seed=5, workers=1)
    targets = [builtin_matrix("ccy"), builtin_matrix("cry:0.37"), random_adb_target(3, np.random.default_rng(9))]
    for u in targets:
        for mode in Mode:
            a = synthesize(u, replace(cfg, mode=mode, eps=1e-4))
            b = synthesize(u, replace(cfg, mode=mode, eps=1e-4))
            assert a == b
            if a.succeeded:
                assert emit_qasm(a.circuit) == emit_qasm(b.circuit)
    ir = qft_program(3, "rz")
    (c1, r1), (c2, r2) = transpile(ir, 2, cfg=cfg), transpile(ir, 2, cfg=cfg)
    assert emit_qasm(c1) == emit_qasm(c2) and r1.partitions == r2.partitions

    rng = np.random.default_rng(99)
    solved = Counter()
    for i in range(50):
        u = random_clifford_target(int(rng.integers(1, 4)), rng, max_len=8)
        inv = invert(u, replace(cfg, seed=i)).succeeded
        dia = diagonalize(u, replace(cfg, seed=i)).succeeded
        solved["invert"] += inv
        solved["diag"] += dia
        assert dia or not inv, i
    notes.append(f"reruns identical for 3 targets x 2 modes and a transpile; Clifford corpus of 50: "
                 f"invert solved {solved['invert']}, diag solved {solved['diag']}, invert-only 0")
