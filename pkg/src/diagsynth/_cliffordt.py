"""Enumerated single-qubit Clifford+T unitaries used by the R_Z search.

Every single-qubit Clifford+T unitary has a unique normal form
``T^a (HT | SHT)^k C`` (matrix order) with ``C`` one of the 24 Cliffords; its
T-count is ``a + k``.  Two objects are built from that:

* a *normal-form table*: every unitary up to a T-count bound, as SU(2) arrays;
* a *near-diagonal dictionary*: products ``A B`` (``A`` a bare syllable string,
  ``B`` a normal form) within ``delta`` of a Z rotation, found by matching the
  Hopf projection ``S^3 -> S^2`` (invariant under left multiplication by a
  diagonal) of ``A`` against that of ``B^dagger``.

All angles below follow ``RZ(phi) = diag(exp(-i phi/2), exp(i phi/2))``.
"""

from __future__ import annotations

import hashlib
import logging
import os
import threading
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .gates import Circuit, Gate, GateKind, local_matrix

log = logging.getLogger(__name__)

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])
_T = np.diag([1, np.exp(1j * np.pi / 4)])
_SYLLABLES = (_H @ _T, _S @ _H @ _T)
# time-ordered gates of each syllable (matrix H.T applies T first)
_SYLLABLE_WORDS = ((GateKind.T, GateKind.H), (GateKind.T, GateKind.H, GateKind.S))

_GENERATORS = {
    GateKind.H: _H,
    GateKind.S: _S,
    GateKind.SDG: np.diag([1, -1j]),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Z: np.diag([1, -1]).astype(complex),
}

# (delta, normal-form T bound, syllable-string bound)
DICTIONARY_TIERS = ((1e-2, 10, 12), (1e-3, 14, 20))
DIRECT_TABLE_DEPTH = 8
CACHE_VERSION = "2"


def to_su2(m: np.ndarray) -> np.ndarray:
    """Scale a stack of 2x2 unitaries to determinant one."""
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return m / np.sqrt(det)[..., None, None]


def quaternion(v: np.ndarray) -> np.ndarray:
    """Unit 4-vector of SU(2) matrices ``[[a, b], [-b*, a*]]``; ``|<q, p>| = |Tr(U V^dagger)| / 2``."""
    a, b = v[..., 0, 0], v[..., 0, 1]
    return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


def hopf(v: np.ndarray) -> np.ndarray:
    """Point on S^2 invariant under ``v -> D v`` for diagonal ``D``.

    The chord between ``hopf(A)`` and ``hopf(B^dagger)`` is twice the
    off-diagonal magnitude of ``A B``.
    """
    a, b = v[..., 0, 0], v[..., 0, 1]
    ab = a * np.conj(b)
    return np.stack([2 * ab.real, 2 * ab.imag, np.abs(a) ** 2 - np.abs(b) ** 2], axis=-1)


def _phase_key(m: np.ndarray) -> tuple:
    flat = m.flatten()
    pivot = flat[np.argmax(np.abs(flat) > 1e-9)]
    return tuple(np.round(flat * (abs(pivot) / pivot), 9))


@lru_cache(maxsize=1)
def cliffords() -> tuple[tuple[np.ndarray, ...], tuple[tuple[GateKind, ...], ...]]:
    """The 24 single-qubit Cliffords (up to phase) with shortest time-ordered words."""
    mats = [np.eye(2, dtype=complex)]
    words: list[tuple[GateKind, ...]] = [()]
    seen = {_phase_key(mats[0])}
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for kind, g in _GENERATORS.items():
                m = g @ mats[i]
                key = _phase_key(m)
                if key not in seen:
                    seen.add(key)
                    mats.append(m)
                    words.append(words[i] + (kind,))
                    nxt.append(len(mats) - 1)
        frontier = nxt
    assert len(mats) == 24
    return tuple(mats), tuple(words)


_ONE_QUBIT_CLIFFORDS = frozenset({GateKind.H, GateKind.S, GateKind.SDG, GateKind.X, GateKind.Y, GateKind.Z,
                                  GateKind.SX, GateKind.I})


@lru_cache(maxsize=1)
def _clifford_lookup() -> dict[tuple, tuple[GateKind, ...]]:
    mats, words = cliffords()
    return {_phase_key(m): w for m, w in zip(mats, words)}


def compress_clifford_runs(c: Circuit) -> Circuit:
    """Replace every maximal run of one-qubit Clifford gates on a wire by a shortest equivalent word."""
    lookup = _clifford_lookup()
    out: list[Gate] = []
    pending: dict[int, list[Gate]] = {}

    def flush(q: int) -> None:
        run = pending.pop(q, [])
        if len(run) < 2:
            out.extend(run)
            return
        m = np.eye(2, dtype=complex)
        for g in run:
            m = local_matrix(g) @ m
        out.extend(Gate(k, (q,)) for k in lookup[_phase_key(m)])

    for g in c.gates:
        if len(g.qubits) == 1 and g.kind in _ONE_QUBIT_CLIFFORDS:
            pending.setdefault(g.qubits[0], []).append(g)
            continue
        for q in g.qubits:
            flush(q)
        out.append(g)
    for q in sorted(pending):
        flush(q)
    return Circuit(c.width, out)


def syllable_strings(max_len: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All products of ``k <= max_len`` syllables.

    Returns ``(matrices, lengths, codes)``; bit ``k-1-i`` of ``codes`` selects
    the ``i``-th syllable from the left.
    """
    mats = [np.eye(2, dtype=complex)[None]]
    lens = [np.zeros(1, dtype=np.int8)]
    codes = [np.zeros(1, dtype=np.int64)]
    cur, cur_codes = mats[0], codes[0]
    for k in range(1, max_len + 1):
        cur = np.concatenate([np.einsum("ij,njk->nik", syl, cur) for syl in _SYLLABLES])
        cur_codes = np.concatenate([cur_codes, cur_codes + (1 << (k - 1))])
        mats.append(cur)
        lens.append(np.full(len(cur), k, dtype=np.int8))
        codes.append(cur_codes)
    return np.concatenate(mats), np.concatenate(lens), np.concatenate(codes)


def syllable_word(length: int, code: int) -> list[GateKind]:
    """Time-ordered gates of a syllable string (rightmost syllable acts first)."""
    word: list[GateKind] = []
    for i in reversed(range(length)):
        word.extend(_SYLLABLE_WORDS[(code >> (length - 1 - i)) & 1])
    return word


@dataclass
class NormalFormTable:
    """Every Clifford+T unitary of T-count at most ``depth``, in SU(2)."""

    depth: int
    su2: np.ndarray
    t_count: np.ndarray
    prefix: np.ndarray     # 1 if the leading T is present
    length: np.ndarray     # number of syllables
    code: np.ndarray
    clifford: np.ndarray

    def word(self, i: int) -> list[GateKind]:
        cl_words = cliffords()[1]
        w = list(cl_words[int(self.clifford[i])])
        w += syllable_word(int(self.length[i]), int(self.code[i]))
        if self.prefix[i]:
            w.append(GateKind.T)
        return w


_table_lock = threading.Lock()


@lru_cache(maxsize=4)
def normal_form_table(depth: int) -> NormalFormTable:
    cl_mats = np.array(cliffords()[0])
    syl, lens, codes = syllable_strings(depth)
    with_t = np.einsum("ij,njk->nik", _T, syl[lens < depth])
    heads = np.concatenate([syl, with_t])
    prefix = np.concatenate([np.zeros(len(syl), np.int8), np.ones(len(with_t), np.int8)])
    hlen = np.concatenate([lens, lens[lens < depth]])
    hcode = np.concatenate([codes, codes[lens < depth]])
    full = np.einsum("nij,cjk->ncik", heads, cl_mats).reshape(-1, 2, 2)
    n_cl = len(cl_mats)
    return NormalFormTable(
        depth=depth,
        su2=to_su2(full),
        t_count=np.repeat(prefix + hlen, n_cl).astype(np.int16),
        prefix=np.repeat(prefix, n_cl),
        length=np.repeat(hlen, n_cl),
        code=np.repeat(hcode, n_cl),
        clifford=np.tile(np.arange(n_cl, dtype=np.int8), len(heads)),
    )


@lru_cache(maxsize=1)
def direct_index(depth: int = DIRECT_TABLE_DEPTH) -> tuple[NormalFormTable, cKDTree]:
    """KD-tree on +-quaternions of the depth-``depth`` normal-form table."""
    table = normal_form_table(depth)
    q = quaternion(table.su2)
    return table, cKDTree(np.concatenate([q, -q]))


@dataclass
class NearDiagonalDictionary:
    """Products ``A B`` near a Z rotation, sorted by ``angle mod 2 pi``."""

    delta: float
    table_depth: int
    syllable_depth: int
    angle: np.ndarray        # phi with A B ~ RZ(phi), on [0, 2 pi)
    offdiag: np.ndarray      # |(A B)_{01}|
    t_count: np.ndarray
    a_len: np.ndarray
    a_code: np.ndarray
    b_index: np.ndarray

    def word(self, i: int) -> list[GateKind]:
        """Time-ordered gates of ``A B`` (B acts first)."""
        table = normal_form_table(self.table_depth)
        return table.word(int(self.b_index[i])) + syllable_word(int(self.a_len[i]), int(self.a_code[i]))


def _dedupe(parts: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Keep the lowest-T entry per (angle, offdiag); the search distance depends on nothing else."""
    ang, off = np.round(parts["angle"], 11), np.round(parts["offdiag"], 11)
    order = np.lexsort((parts["b_index"], parts["a_code"], parts["a_len"], parts["t_count"], off, ang))
    ang, off = ang[order], off[order]
    first = np.ones(len(order), bool)
    first[1:] = (ang[1:] != ang[:-1]) | (off[1:] != off[:-1])
    return {k: v[order][first] for k, v in parts.items()}


def _build_dictionary(delta: float, table_depth: int, syllable_depth: int,
                      chunk: int = 1 << 16) -> dict[str, np.ndarray]:
    table = normal_form_table(table_depth)
    tree = cKDTree(hopf(np.conj(np.swapaxes(table.su2, -1, -2))))
    syl, lens, codes = syllable_strings(syllable_depth)
    chunks = []
    for lo in range(0, len(syl), chunk):
        a = to_su2(syl[lo:lo + chunk])
        hits = tree.query_ball_point(hopf(a), 2 * delta * (1 + 1e-9))
        counts = np.fromiter((len(h) for h in hits), dtype=np.int64, count=len(hits))
        ia = np.repeat(np.arange(len(a)), counts)
        ib = np.fromiter((j for h in hits for j in h), dtype=np.int64, count=int(counts.sum()))
        prod = np.einsum("nij,njk->nik", a[ia], table.su2[ib])
        off = np.abs(prod[:, 0, 1])
        keep = off <= delta
        ia, ib, prod, off = ia[keep] + lo, ib[keep], prod[keep], off[keep]
        chunks.append(_dedupe({
            "angle": np.mod(-2 * np.angle(prod[:, 0, 0]), 2 * np.pi), "offdiag": off,
            "t_count": lens[ia].astype(np.int16) + table.t_count[ib],
            "a_len": lens[ia], "a_code": codes[ia], "b_index": ib.astype(np.int32)}))
    data = _dedupe({k: np.concatenate([c[k] for c in chunks]) for k in chunks[0]})
    order = np.argsort(data["angle"], kind="stable")
    return {k: v[order] for k, v in data.items()}


def _cache_dir() -> Path | None:
    root = os.environ.get("DIAGSYNTH_CACHE_DIR")
    if root == "":
        return None
    path = Path(root) if root else Path.home() / ".cache" / "diagsynth"
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError:
        return None
    return path


@lru_cache(maxsize=None)
def near_diagonal_dictionary(delta: float, table_depth: int, syllable_depth: int) -> NearDiagonalDictionary:
    with _table_lock:
        tag = hashlib.sha1(f"{CACHE_VERSION}:{delta!r}:{table_depth}:{syllable_depth}".encode()).hexdigest()[:12]
        cache = _cache_dir()
        path = cache / f"neardiag-{tag}.npz" if cache else None
        data = None
        if path is not None and path.exists():
            try:
                with np.load(path) as f:
                    data = {k: f[k] for k in f.files}
            except (OSError, ValueError):
                log.warning("ignoring unreadable dictionary cache %s", path)
        if data is None:
            log.info("building near-diagonal dictionary delta=%g depths=(%d, %d)", delta, table_depth, syllable_depth)
            data = _build_dictionary(delta, table_depth, syllable_depth)
            if path is not None:
                tmp = path.with_suffix(f".{os.getpid()}.tmp.npz")
                try:
                    np.savez(tmp, **data)
                    os.replace(tmp, path)
                except OSError:
                    log.warning("could not write dictionary cache %s", path)
        return NearDiagonalDictionary(delta, table_depth, syllable_depth, **data)
