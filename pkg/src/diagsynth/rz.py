"""Single-qubit RZ(theta) -> Clifford+T approximation.

Three routes, tried in order:

* angles within ``1e-9`` of ``k pi/4`` get their exact phase word;
* the built-in search looks the angle up in precomputed Clifford+T tables
  (see ``_cliffordt``) and returns the lowest-T word meeting ``eps``;
* the external route shells out to a gridsynth-compatible executable.

``max_depth`` bounds the T-count of the built-in search.  Results are
memoized per (angle, eps, configuration).
"""

from __future__ import annotations

import enum
import logging
import math
import os
import shlex
import subprocess
import threading
from dataclasses import dataclass

import numpy as np

from . import _cliffordt as ct
from .gates import Circuit, Gate, GateKind, canonicalize, count_resources, phase_word, rz_matrix, snap_eighths, unitary_of
from .linalg import as_unitary, hs_distance, wrap_angle

log = logging.getLogger(__name__)

RZ_CMD_ENV = "DIAGSYNTH_RZ_CMD"
DEFAULT_EXTERNAL_COMMAND = "gridsynth {theta} -d {digits}"
DEFAULT_MAX_DEPTH = 40
EXTERNAL_TIMEOUT = 120.0


class RzSynthesisError(RuntimeError):
    """Base class for RZ approximation failures."""


class PrecisionUnreachableError(RzSynthesisError):
    """The built-in search has no word within ``eps`` under the T budget."""


class ExternalToolError(RzSynthesisError):
    """The external synthesizer failed or printed something unusable."""


class SequenceParseError(ExternalToolError):
    def __init__(self, offset: int, char: str):
        super().__init__(f"unexpected character {char!r} at byte offset {offset}")
        self.offset = offset


class RzStrategy(str, enum.Enum):
    SEARCH = "search"       # exact-or-search
    EXTERNAL = "external"


@dataclass(frozen=True)
class RzSynthesizer:
    strategy: RzStrategy = RzStrategy.SEARCH
    max_depth: int = DEFAULT_MAX_DEPTH
    external_command: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "strategy", RzStrategy(self.strategy))

    def command(self) -> str:
        return self.external_command or os.environ.get(RZ_CMD_ENV) or DEFAULT_EXTERNAL_COMMAND


@dataclass(frozen=True)
class RzResult:
    circuit: Circuit
    achieved_eps: float
    t_count: int


# --- built-in search --------------------------------------------------------

# Candidates are rows (t_count, distance, kind, a, b, c, d); kind 0 = direct
# pair (a, b) of table indices, kind 1 = dictionary entry d of tier a under
# adjoint flag b and trailing phase word c.

def _direct_candidates(theta: float, eps: float, max_t: int) -> np.ndarray:
    """Products of two depth-8 normal forms within ``eps`` of RZ(theta)."""
    table, tree = ct.direct_index()
    target = ct.to_su2(rz_matrix(theta))
    heads = np.flatnonzero(table.clifford == 0)
    lefts = np.einsum("nji,jk->nik", np.conj(table.su2[heads]), target)  # A^dagger V
    radius = math.sqrt(max(2.0 - 2.0 * math.sqrt(max(1.0 - eps * eps, 0.0)), 0.0)) * (1 + 1e-9)
    hits = tree.query_ball_point(ct.quaternion(lefts), radius)
    counts = np.fromiter((len(h) for h in hits), dtype=np.int64, count=len(hits))
    ai = np.repeat(heads, counts)
    bi = np.fromiter((j for h in hits for j in h), dtype=np.int64, count=int(counts.sum())) % len(table.su2)
    t = table.t_count[ai].astype(np.int64) + table.t_count[bi]
    keep = t <= max_t
    ai, bi, t = ai[keep], bi[keep], t[keep]
    prod = np.einsum("nij,njk->nik", table.su2[ai], table.su2[bi])
    c = np.minimum(np.abs(ct.quaternion(prod) @ ct.quaternion(target)), 1.0)
    d = np.sqrt(np.maximum(1.0 - c * c, 0.0))
    ok = d <= eps
    z = np.zeros(int(ok.sum()))
    return np.column_stack([t[ok], d[ok], z, ai[ok], bi[ok], z, z])


def _window(sorted_angles: np.ndarray, centre: float, half: float) -> np.ndarray:
    if half >= math.pi:
        return np.arange(len(sorted_angles))
    lo, hi = centre - half, centre + half
    two_pi = 2 * math.pi
    spans = [(lo, hi)]
    if lo < 0:
        spans = [(lo + two_pi, two_pi), (0.0, hi)]
    elif hi >= two_pi:
        spans = [(lo, two_pi), (0.0, hi - two_pi)]
    idx = [np.arange(np.searchsorted(sorted_angles, a, "left"), np.searchsorted(sorted_angles, b, "right"))
           for a, b in spans]
    return np.concatenate(idx)


def _dictionary_candidates(theta: float, eps: float, max_t: int) -> np.ndarray:
    out = [np.zeros((0, 7))]
    half = 2 * math.asin(min(eps, 1.0)) + 1e-12
    for tier, (delta, kb, ka) in enumerate(ct.DICTIONARY_TIERS):
        dic = ct.near_diagonal_dictionary(delta, kb, ka)
        for sign in (1, -1):
            for j in range(8):
                # candidate implements RZ(sign * phi + j pi/4); need phi ~ sign * (theta - j pi/4)
                centre = (sign * (theta - j * math.pi / 4)) % (2 * math.pi)
                idx = _window(dic.angle, centre, half)
                t = dic.t_count[idx].astype(np.int64) + (j & 1)
                ok = t <= max_t
                idx, t = idx[ok], t[ok]
                x = (theta - (sign * dic.angle[idx] + j * math.pi / 4)) / 2
                c = np.sqrt(1 - dic.offdiag[idx] ** 2) * np.abs(np.cos(x))
                d = np.sqrt(np.maximum(1 - c * c, 0.0))
                ok = d <= eps
                n = int(ok.sum())
                out.append(np.column_stack([t[ok], d[ok], np.ones(n), np.full(n, tier),
                                            np.full(n, sign), np.full(n, j), idx[ok]]))
    return np.concatenate(out)


def _candidate_word(row: np.ndarray) -> list[Gate]:
    _, _, kind, a, b, c, d = (int(v) if i > 1 else v for i, v in enumerate(row))
    if kind == 0:
        table = ct.normal_form_table(ct.DIRECT_TABLE_DEPTH)
        return [Gate(k, (0,)) for k in table.word(b) + table.word(a)]
    word = Circuit(1, [Gate(k, (0,)) for k in ct.near_diagonal_dictionary(*ct.DICTIONARY_TIERS[a]).word(d)])
    if b < 0:
        word = word.inverse()
    return word.gates + phase_word(c, 0)


def _search(theta: float, eps: float, max_depth: int) -> RzResult:
    direct = _direct_candidates(theta, eps, max_depth)
    if len(direct):  # nothing in the dictionaries can beat an exact-minimum hit by more than a tie
        max_depth = min(max_depth, int(direct[:, 0].min()))
    cands = np.concatenate([direct, _dictionary_candidates(theta, eps, max_depth)])
    target = rz_matrix(theta)
    order = np.lexsort(cands.T[::-1])
    for row in cands[order]:
        circ = canonicalize(Circuit(1, _candidate_word(row)))
        achieved = hs_distance(unitary_of(circ), target)
        if achieved <= eps:
            return RzResult(circ, achieved, count_resources(circ).t_count)
    raise PrecisionUnreachableError(
        f"no Clifford+T word with T-count <= {max_depth} approximates RZ({theta:.12g}) within {eps:g}")


# --- external tool ----------------------------------------------------------

_SEQUENCE_GATES = {"T": GateKind.T, "S": GateKind.S, "H": GateKind.H, "X": GateKind.X, "Z": GateKind.Z}


def parse_external_sequence(text: str) -> Circuit:
    """Parse a gridsynth-style operator string.

    The string is a matrix product, so its leftmost letter is the last gate in
    time.  ``W`` (a global eighth root of unity) and ``I`` are dropped.
    """
    kinds = []
    for offset, ch in enumerate(text):
        if ch in _SEQUENCE_GATES:
            kinds.append(_SEQUENCE_GATES[ch])
        elif ch in "WI" or ch.isspace():
            continue
        else:
            raise SequenceParseError(len(text[:offset].encode()), ch)
    return Circuit(1, [Gate(k, (0,)) for k in reversed(kinds)])


def _external(theta: float, eps: float, cfg: RzSynthesizer) -> RzResult:
    template = cfg.command()
    digits = max(1, math.ceil(-math.log10(eps)))
    fields = {"theta": repr(float(theta)), "digits": str(digits), "eps": repr(float(eps))}
    if any("{" + k + "}" in template for k in fields):
        argv = [part.format(**fields) for part in shlex.split(template)]
    else:
        argv = shlex.split(template) + [fields["theta"], "-d", fields["digits"]]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=EXTERNAL_TIMEOUT, check=False)
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise ExternalToolError(f"could not run {argv[0]!r}: {exc}") from exc
    if proc.returncode != 0:
        raise ExternalToolError(f"{argv[0]} exited with status {proc.returncode}: {proc.stderr.strip()[:200]}")
    lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
    if not lines:
        raise ExternalToolError(f"{argv[0]} printed nothing")
    circ = canonicalize(parse_external_sequence(lines[-1].strip()))
    achieved = hs_distance(unitary_of(circ), rz_matrix(theta))
    if achieved > eps:
        raise ExternalToolError(f"{argv[0]} returned a word at distance {achieved:.3g} > {eps:g}")
    return RzResult(circ, achieved, count_resources(circ).t_count)


# --- entry point --------------------------------------------------------------

_memo: dict[tuple, RzResult] = {}
_memo_lock = threading.Lock()


def warm_tables() -> None:
    """Build (or load from disk) every lookup table the search uses."""
    ct.direct_index()
    for tier in ct.DICTIONARY_TIERS:
        ct.near_diagonal_dictionary(*tier)


def clear_cache() -> None:
    with _memo_lock:
        _memo.clear()


def _adjoint(res: RzResult) -> RzResult:
    return RzResult(canonicalize(res.circuit.inverse()), res.achieved_eps, res.t_count)


def synth_rz(theta: float, eps: float, cfg: RzSynthesizer | None = None) -> RzResult:
    """Clifford+T word within ``eps`` (HS distance up to phase) of RZ(theta)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    cfg = cfg or RzSynthesizer()
    theta = wrap_angle(theta)
    k = snap_eighths(theta)
    if k is not None:
        circ = Circuit(1, phase_word(k, 0))
        return RzResult(circ, hs_distance(unitary_of(circ), rz_matrix(theta)), count_resources(circ).t_count)
    if theta < 0:  # RZ(-theta) is the adjoint; share the work and keep T-counts symmetric
        return _adjoint(synth_rz(-theta, eps, cfg))
    key = (round(theta, 12), float(eps), cfg.strategy, cfg.max_depth,
           cfg.command() if cfg.strategy is RzStrategy.EXTERNAL else None)
    with _memo_lock:
        hit = _memo.get(key)
    if hit is not None:
        return hit
    if cfg.strategy is RzStrategy.EXTERNAL:
        res = _external(theta, eps, cfg)
    else:
        res = _search(theta, eps, cfg.max_depth)
    with _memo_lock:
        _memo.setdefault(key, res)
    return res


def euler_zxz(u) -> tuple[tuple[float, float, float], float]:
    """Angles with ``u = exp(i gamma) RZ(t1) SX RZ(t2) SX RZ(t3)``; returns ``((t1, t2, t3), gamma)``."""
    u = as_unitary(u, tol=1e-8, max_qubits=1)
    a, b, c, d = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    theta = 2 * math.atan2(abs(c), abs(a))
    total = float(np.angle(d) - np.angle(a)) if abs(a) > 1e-12 else 0.0     # phi + lam
    diff = float(np.angle(c) - np.angle(-b)) if abs(c) > 1e-12 else 0.0      # phi - lam
    sx = np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2
    best = None
    for shift in (0.0, 2 * math.pi):
        phi, lam = (total + shift + diff) / 2, (total + shift - diff) / 2
        angles = tuple(float(wrap_angle(x)) for x in (phi + math.pi, theta + math.pi, lam))
        rec = rz_matrix(angles[0]) @ sx @ rz_matrix(angles[1]) @ sx @ rz_matrix(angles[2])
        dist = hs_distance(rec, u)
        if best is None or dist < best[0]:
            gamma = float(np.angle(np.vdot(rec, u)))
            best = (dist, angles, gamma)
    return best[1], best[2]
