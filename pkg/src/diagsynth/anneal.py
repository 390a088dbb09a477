"""Two-sided simulated annealing over discrete gate words.

The state is ``s = L U^dagger R`` for words ``L`` (left) and ``R`` (right).
In *diagonalize* mode the search stops once ``s`` is within ``eps`` of some
diagonal unitary; the remaining diagonal is then built exactly (CNOT + RZ)
and the circuit is ``R D L`` in matrix order, i.e. ``L`` runs first in time,
then the diagonal, then ``R``.  In *invert* mode the stop test is
``hs_distance(s, I) <= eps`` and the circuit is just ``L`` followed by ``R``.

Each side is a fixed row of slots initialised to identity; a move rewrites
one slot and updates ``s`` with a single conjugated multiplication.
"""

from __future__ import annotations

import enum
import logging
import math
import multiprocessing as mp
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ._cliffordt import cliffords, compress_clifford_runs
from .diagonal import build_diagonal_circuit, clifford_t_diagonal, solve_angles
from .gates import (Circuit, Gate, GateKind, ResourceCounts, canonicalize, count_resources,
                    circuit_matrix, unitary_of)
from .linalg import adjoint, as_unitary, diagonal_distance, hs_distance, nearest_diagonal
from .rz import PrecisionUnreachableError, RzSynthesizer

log = logging.getLogger(__name__)

RECOMPUTE_EVERY = 2000
CLOCK_EVERY = 256


class Mode(str, enum.Enum):
    DIAGONALIZE = "diag"
    INVERT = "invert"


def default_alphabet(n: int) -> tuple[tuple[Gate, ...], ...]:
    """Move vocabulary: identity, each non-identity one-qubit Clifford (as a shortest word)
    and T, Tdg on every qubit, and CNOT on every ordered pair."""
    out: list[tuple[Gate, ...]] = [()]
    for q in range(n):
        out += [tuple(Gate(k, (q,)) for k in word) for word in cliffords()[1][1:]]
        out += [(Gate(GateKind.T, (q,)),), (Gate(GateKind.TDG, (q,)),)]
    out += [(Gate(GateKind.CNOT, (a, b)),) for a in range(n) for b in range(n) if a != b]
    return tuple(out)


@dataclass(frozen=True)
class AnnealConfig:
    eps: float = 1e-8
    mode: Mode = Mode.DIAGONALIZE
    slots_per_side: int | None = None          # None: 12 for n <= 2, 20 for n = 3
    gate_alphabet: tuple | None = None        # Gates or short gate words; None: default_alphabet
    pair_move_prob: float = 0.5                # chance of a mirrored (g on L, g^-1 on R) move
    identity_prob: float = 0.25                # chance a drawn element is the identity
    initial_temp: float = 0.15
    cooling_rate: float = 0.999
    restart_after: int = 20_000                # non-improving steps before a restart
    max_iters: int = 2_000_000                 # per worker, summed over restarts
    restarts: int = 1_000
    seed: int = 0
    timeout: float = 60.0
    workers: int = 1
    rz_eps: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not 0 < self.cooling_rate < 1:
            raise ValueError("cooling_rate must lie in (0, 1)")
        if not self.eps > 0 or not self.rz_eps > 0:
            raise ValueError("eps and rz_eps must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.max_iters < 1 or self.restarts < 0 or self.restart_after < 1:
            raise ValueError("max_iters and restart_after must be positive, restarts non-negative")
        if not self.timeout > 0 or self.initial_temp < 0:
            raise ValueError("timeout must be positive and initial_temp non-negative")
        if not (0 <= self.pair_move_prob <= 1 and 0 <= self.identity_prob < 1):
            raise ValueError("move probabilities must lie in [0, 1]")
        if self.slots_per_side is not None and self.slots_per_side < 1:
            raise ValueError("slots_per_side must be positive")

    def slots_for(self, n: int) -> int:
        return self.slots_per_side or (12 if n <= 2 else 20)


@dataclass
class SynthesisResult:
    succeeded: bool
    circuit: Circuit | None
    block_eps: float            # distance of the exact-RZ assembly to the target
    rz_budget: float            # approximated rotations x rz_eps
    counts: ResourceCounts
    mode: Mode
    seed: int
    best_cost: float
    iterations: int
    left: Circuit | None = None
    right: Circuit | None = None
    diagonal_phases: tuple[float, ...] | None = None
    rz_approximated: int = 0
    cause: str | None = None
    elapsed: float = field(default=0.0, compare=False)

    @property
    def eps_total(self) -> float:
        return self.block_eps + self.rz_budget


# --- search state -----------------------------------------------------------

class _Context:
    """Target-specific precomputation shared by every state of one run."""

    def __init__(self, target: np.ndarray, cfg: AnnealConfig):
        self.n = target.shape[0].bit_length() - 1
        self.target = target
        self.cfg = cfg
        words = [tuple(e) if isinstance(e, (tuple, list)) else (e,) for e in (cfg.gate_alphabet or default_alphabet(self.n))]
        words = [tuple(g for g in w if g.kind is not GateKind.I) for w in words]
        self.alphabet = [()] + [w for w in words if w]
        dim = 2 ** self.n
        self.mats = np.array([circuit_matrix(w, self.n) for w in self.alphabet])
        self.adj = np.conj(np.swapaxes(self.mats, 1, 2))
        # inverse element (up to phase) of each entry, or -1
        overlap = np.abs(np.einsum("aij,bji->ab", self.mats, self.mats)) / dim
        self.inverse = [int(np.argmax(row)) if row.max() > 1 - 1e-9 else -1 for row in overlap]
        self.slots = cfg.slots_for(self.n)
        self.objective: Callable[[np.ndarray], float]
        if cfg.mode is Mode.DIAGONALIZE:
            self.objective = diagonal_distance
        else:
            ident = np.eye(dim)
            self.objective = lambda s: hs_distance(s, ident)

    def draw(self, rng: np.random.Generator) -> int:
        if rng.random() < self.cfg.identity_prob:
            return 0
        return int(rng.integers(1, len(self.alphabet)))


@dataclass
class SearchState:
    left: list[int]     # alphabet indices, time order
    right: list[int]
    matrix: np.ndarray
    cost: float

    def copy(self) -> "SearchState":
        return SearchState(list(self.left), list(self.right), self.matrix.copy(), self.cost)


def _word_matrix(ctx: _Context, slots: list[int]) -> np.ndarray:
    u = np.eye(2 ** ctx.n, dtype=complex)
    for k in slots:
        if k:
            u = ctx.mats[k] @ u
    return u


def full_matrix(ctx: _Context, left: list[int], right: list[int]) -> np.ndarray:
    return _word_matrix(ctx, left) @ adjoint(ctx.target) @ _word_matrix(ctx, right)


def initial_state(ctx: _Context) -> SearchState:
    left, right = [0] * ctx.slots, [0] * ctx.slots
    m = full_matrix(ctx, left, right)
    return SearchState(left, right, m, ctx.objective(m))


def propose(ctx: _Context, state: SearchState, side: int, slot: int, new: int) -> np.ndarray:
    """Matrix after rewriting one slot, by one conjugated multiplication."""
    words = state.left if side == 0 else state.right
    old = words[slot]
    if side == 0:
        # L = A g B  ->  A g' B = (A g' g^dagger A^dagger) L
        a = _word_matrix(ctx, words[slot + 1:])
        return (a @ (ctx.mats[new] @ ctx.adj[old]) @ adjoint(a)) @ state.matrix
    # R = C g Q  ->  C g' Q = R (Q^dagger g^dagger g' Q)
    q = _word_matrix(ctx, words[:slot])
    return state.matrix @ (adjoint(q) @ (ctx.adj[old] @ ctx.mats[new]) @ q)


def draw_move(ctx: _Context, rng: np.random.Generator) -> list[tuple[int, int, int]]:
    """``(side, slot, element)`` rewrites of one proposal."""
    if rng.random() < ctx.cfg.pair_move_prob:
        # g as the m-th latest gate of L and g^-1 as the m-th earliest of R conjugates the middle
        m = int(rng.integers(ctx.slots))
        e = ctx.draw(rng)
        if ctx.inverse[e] >= 0:
            return [(0, ctx.slots - 1 - m, e), (1, m, ctx.inverse[e])]
        return [(0, ctx.slots - 1 - m, e)]
    return [(int(rng.integers(2)), int(rng.integers(ctx.slots)), ctx.draw(rng))]


def anneal_step(ctx: _Context, state: SearchState, temp: float, rng: np.random.Generator) -> tuple[SearchState, bool]:
    """One Metropolis move; returns the (possibly unchanged) state and whether it moved."""
    moves = [(side, slot, e) for side, slot, e in draw_move(ctx, rng)
             if (state.left if side == 0 else state.right)[slot] != e]
    if not moves:
        return state, False
    trial = SearchState(list(state.left), list(state.right), state.matrix, state.cost)
    for side, slot, e in moves:
        trial.matrix = propose(ctx, trial, side, slot, e)
        (trial.left if side == 0 else trial.right)[slot] = e
    trial.cost = ctx.objective(trial.matrix)
    delta = trial.cost - state.cost
    if delta > 0 and (temp <= 0 or rng.random() >= math.exp(-delta / temp)):
        return state, False
    return trial, True


def terminal_check(state: SearchState | np.ndarray, eps: float, mode: Mode = Mode.DIAGONALIZE) -> bool:
    m = state.matrix if isinstance(state, SearchState) else state
    if Mode(mode) is Mode.DIAGONALIZE:
        return diagonal_distance(m) <= eps
    return hs_distance(m, np.eye(m.shape[0])) <= eps


# --- worker -------------------------------------------------------------------

@dataclass
class _RunOutcome:
    succeeded: bool
    left: list[int]
    right: list[int]
    best_cost: float
    iterations: int


def _prune(ctx: _Context, left: list[Gate], right: list[Gate]) -> tuple[list[Gate], list[Gate]]:
    """Drop gates, then pairs of gates, while the state stays terminal; T-type gates are tried first."""
    eps, mode, n = ctx.cfg.eps, ctx.cfg.mode, ctx.n
    t_dag = adjoint(ctx.target)
    words = [list(left), list(right)]

    def ok(drop: set) -> bool:
        lw = [g for i, g in enumerate(words[0]) if (0, i) not in drop]
        rw = [g for i, g in enumerate(words[1]) if (1, i) not in drop]
        return terminal_check(circuit_matrix(lw, n) @ t_dag @ circuit_matrix(rw, n), eps, mode)

    def rank(pos):
        return (words[pos[0]][pos[1]].kind not in (GateKind.T, GateKind.TDG), pos)

    dropped: set = set()
    positions = sorted(((s, i) for s in (0, 1) for i in range(len(words[s]))), key=rank)
    for pos in positions:
        if ok(dropped | {pos}):
            dropped.add(pos)
    rest = [p for p in positions if p not in dropped]
    for x in range(len(rest)):
        for y in range(x + 1, len(rest)):
            pair = {rest[x], rest[y]}
            if not (pair & dropped) and ok(dropped | pair):
                dropped |= pair
    return ([g for i, g in enumerate(words[0]) if (0, i) not in dropped],
            [g for i, g in enumerate(words[1]) if (1, i) not in dropped])


def _run(ctx: _Context, seed: int, deadline: float, stop=None) -> _RunOutcome:
    cfg = ctx.cfg
    rng = np.random.default_rng(seed)
    iters = 0
    best = (math.inf, [0] * ctx.slots, [0] * ctx.slots)
    for _ in range(cfg.restarts + 1):
        state = initial_state(ctx)
        temp = cfg.initial_temp
        run_best = state.cost
        since = 0
        moved_since_recompute = 0
        while True:
            if state.cost < best[0]:
                best = (state.cost, list(state.left), list(state.right))
            if state.cost <= cfg.eps:
                exact = full_matrix(ctx, state.left, state.right)
                if terminal_check(exact, cfg.eps, cfg.mode):
                    return _RunOutcome(True, list(state.left), list(state.right), state.cost, iters)
                state.matrix, state.cost = exact, ctx.objective(exact)
            if iters >= cfg.max_iters or since >= cfg.restart_after:
                break
            if iters % CLOCK_EVERY == 0 and (time.monotonic() > deadline or (stop is not None and stop.is_set())):
                return _RunOutcome(False, best[1], best[2], best[0], iters)
            iters += 1
            state, moved = anneal_step(ctx, state, temp, rng)
            temp *= cfg.cooling_rate
            if moved:
                moved_since_recompute += 1
                if moved_since_recompute >= RECOMPUTE_EVERY:
                    state.matrix = full_matrix(ctx, state.left, state.right)
                    state.cost = ctx.objective(state.matrix)
                    moved_since_recompute = 0
            if state.cost < run_best - 1e-15:
                run_best, since = state.cost, 0
            else:
                since += 1
        if iters >= cfg.max_iters:
            break
    return _RunOutcome(False, best[1], best[2], best[0], iters)


def _words_to_circuit(ctx: _Context, slots: list[int]) -> Circuit:
    return Circuit(ctx.n, [g for k in slots for g in ctx.alphabet[k]])


def _tidy(c: Circuit) -> Circuit:
    return canonicalize(compress_clifford_runs(canonicalize(c)))


def _assemble(ctx: _Context, out: _RunOutcome, rz: RzSynthesizer, seed: int) -> SynthesisResult:
    cfg = ctx.cfg
    left, right = _words_to_circuit(ctx, out.left), _words_to_circuit(ctx, out.right)
    if out.succeeded:
        lw, rw = _prune(ctx, left.gates, right.gates)
        left, right = _tidy(Circuit(ctx.n, lw)), _tidy(Circuit(ctx.n, rw))
    base = dict(mode=cfg.mode, seed=seed, best_cost=float(out.best_cost), iterations=out.iterations,
                left=_tidy(left), right=_tidy(right))
    if not out.succeeded:
        return SynthesisResult(False, None, float(out.best_cost), 0.0, ResourceCounts(),
                               cause="search budget exhausted", **base)
    if cfg.mode is Mode.INVERT:
        circ = _tidy(left.then(right))
        block = hs_distance(unitary_of(circ), ctx.target)
        return SynthesisResult(True, circ, block, 0.0, count_resources(circ), **base)
    s = unitary_of(left) @ adjoint(ctx.target) @ unitary_of(right)
    phases = nearest_diagonal(s).phases
    spec = solve_angles(phases)
    exact = left.then(build_diagonal_circuit(spec, 0.0)).then(right)
    block = hs_distance(unitary_of(exact), ctx.target)
    try:
        impl = clifford_t_diagonal(spec, cfg.rz_eps, rz)
    except PrecisionUnreachableError as exc:
        return SynthesisResult(False, None, block, 0.0, ResourceCounts(), diagonal_phases=phases,
                               cause=f"rz synthesis failed: {exc}", **base)
    circ = _tidy(left.then(impl.circuit).then(right))
    return SynthesisResult(block <= cfg.eps, circ, block, impl.budget, count_resources(circ),
                           diagonal_phases=phases, rz_approximated=impl.approximated, **base)


def _worker_seeds(cfg: AnnealConfig) -> list[int]:
    seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.workers)
    return [int(s.generate_state(1, np.uint64)[0]) for s in seqs]


_pool_state: dict = {}


def _pool_init(stop):
    _pool_state["stop"] = stop


def _pool_run(args):
    target, cfg, seed, deadline = args
    return _run(_Context(target, cfg), seed, deadline, _pool_state.get("stop"))


def _search(target, cfg: AnnealConfig, rz: RzSynthesizer | None) -> SynthesisResult:
    start = time.monotonic()
    target = as_unitary(target, tol=1e-8)
    ctx = _Context(target, cfg)
    rz = rz or RzSynthesizer()
    deadline = start + cfg.timeout
    seeds = _worker_seeds(cfg)
    if cfg.workers == 1:
        outcomes = [_run(ctx, seeds[0], deadline)]
    else:
        mpctx = mp.get_context("fork")
        stop = mpctx.Event()
        with mpctx.Pool(cfg.workers, initializer=_pool_init, initargs=(stop,)) as pool:
            def on_done(res: _RunOutcome):
                if res.succeeded:
                    stop.set()

            pending = [pool.apply_async(_pool_run, ((target, cfg, s, deadline),), callback=on_done)
                       for s in seeds]
            outcomes = [p.get() for p in pending]
    results = [_assemble(ctx, o, rz, s) for o, s in zip(outcomes, seeds)]
    # prefer success, then fewer T, then the lower worker index
    best = min(range(len(results)),
               key=lambda i: (not results[i].succeeded, results[i].counts.t_count, results[i].best_cost, i))
    return replace(results[best], seed=cfg.seed, elapsed=time.monotonic() - start)


def diagonalize(target, cfg: AnnealConfig | None = None, rz: RzSynthesizer | None = None) -> SynthesisResult:
    cfg = cfg or AnnealConfig()
    return _search(target, replace(cfg, mode=Mode.DIAGONALIZE), rz)


def invert(target, cfg: AnnealConfig | None = None, rz: RzSynthesizer | None = None) -> SynthesisResult:
    cfg = cfg or AnnealConfig()
    return _search(target, replace(cfg, mode=Mode.INVERT), rz)


def synthesize(target, cfg: AnnealConfig, rz: RzSynthesizer | None = None) -> SynthesisResult:
    return _search(target, cfg, rz)
