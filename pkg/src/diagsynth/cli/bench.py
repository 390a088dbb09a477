"""Benchmark suites: success rate, T-count and wall time of diagonalization against inversion."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, replace

import numpy as np

from ..anneal import AnnealConfig, Mode, synthesize
from ..rz import RzSynthesizer
from .builtins import builtin_matrix, random_adb_target

SUITES = ("controlled-rotations", "random-adb")
DEFAULT_SWEEP = (1e-2, 1e-4, 1e-6)


@dataclass
class BenchRow:
    family: str
    eps: float
    mode: str
    count: int
    successes: int
    median_t: float | None
    median_time_s: float
    t_counts: list[int]

    @property
    def success_rate(self) -> float:
        return self.successes / self.count if self.count else 0.0

    def deterministic(self) -> tuple:
        """Everything except wall time."""
        return (self.family, self.eps, self.mode, self.count, self.successes, self.median_t, tuple(self.t_counts))


def suite_targets(suite: str, count: int, seed: int) -> list[tuple[str, np.ndarray]]:
    rng = np.random.default_rng(seed)
    if suite == "controlled-rotations":
        angles = rng.uniform(0.0, 2 * math.pi, count)
        return ([("cry", builtin_matrix(f"cry:{float(a)!r}")) for a in angles]
                + [("ccry", builtin_matrix(f"ccry:{float(a)!r}")) for a in angles])
    if suite == "random-adb":
        return [("adb", random_adb_target(int(rng.integers(1, 4)), rng)) for _ in range(count)]
    raise ValueError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")


def run_bench(suite: str, count: int, eps_sweep=DEFAULT_SWEEP, modes=(Mode.DIAGONALIZE, Mode.INVERT),
              cfg: AnnealConfig | None = None, rz: RzSynthesizer | None = None, progress=None) -> list[BenchRow]:
    if count < 1:
        raise ValueError("count must be positive")
    cfg = cfg or AnnealConfig()
    targets = suite_targets(suite, count, cfg.seed)
    families = list(dict.fromkeys(f for f, _ in targets))
    rows = []
    for eps in eps_sweep:
        for mode in map(Mode, modes):
            for fam in families:
                ts, times = [], []
                for i, (f, u) in enumerate(targets):
                    if f != fam:
                        continue
                    res = synthesize(u, replace(cfg, eps=eps, mode=mode, seed=cfg.seed + i), rz)
                    times.append(res.elapsed)
                    if res.succeeded:
                        ts.append(res.counts.t_count)
                    if progress:
                        progress(fam, eps, mode, i, res)
                rows.append(BenchRow(fam, eps, mode.value, len(times), len(ts),
                                     statistics.median(ts) if ts else None, statistics.median(times), ts))
    return rows


def format_rows(rows: list[BenchRow]) -> str:
    lines = [f"{'family':<7} {'eps':>8} {'mode':<7} {'success':>9} {'median T':>9} {'median s':>9}"]
    for r in rows:
        mt = "-" if r.median_t is None else f"{r.median_t:g}"
        lines.append(f"{r.family:<7} {r.eps:>8.0e} {r.mode:<7} {r.successes:>4}/{r.count:<4} {mt:>9} "
                     f"{r.median_time_s:>9.2f}")
    return "\n".join(lines) + "\n"
