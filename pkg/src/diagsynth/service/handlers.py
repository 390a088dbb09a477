"""Request handlers: plain functions over the pydantic models, shared by HTTP and in-process callers."""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from .. import __version__
from ..anneal import AnnealConfig, Mode, synthesize
from ..qasm import emit_qasm, parse_qasm
from ..rz import ExternalToolError, PrecisionUnreachableError, RzSynthesizer
from ..transpile import transpile
from ..cli.bench import run_bench, format_rows
from ..cli.builtins import builtin_matrix
from .schemas import (BenchRequest, BenchResponse, BenchRowModel, RunOptions, SynthRequest, SynthResponse,
                      TranspileRequest, TranspileResponse)

EXIT_OK, EXIT_USAGE, EXIT_SYNTHESIS, EXIT_EXTERNAL = 0, 1, 2, 3


class ServiceError(Exception):
    def __init__(self, message: str, exit_code: int, http_status: int):
        super().__init__(message)
        self.exit_code = exit_code
        self.http_status = http_status


@contextmanager
def _errors():
    """Translate library exceptions into ServiceError with a stable exit code."""
    try:
        yield
    except ServiceError:
        raise
    except ExternalToolError as exc:
        raise ServiceError(f"external rz tool failed: {exc}", EXIT_EXTERNAL, 502) from exc
    except PrecisionUnreachableError as exc:
        raise ServiceError(f"synthesis failed: {exc}", EXIT_SYNTHESIS, 422) from exc
    except ValueError as exc:
        raise ServiceError(str(exc), EXIT_USAGE, 400) from exc


def _config(opts: RunOptions, **extra) -> tuple[AnnealConfig, RzSynthesizer]:
    kw = dict(rz_eps=opts.rz_eps, seed=opts.seed, workers=opts.workers, timeout=opts.timeout, **extra)
    if opts.max_iters is not None:
        kw["max_iters"] = opts.max_iters
    return AnnealConfig(**kw), RzSynthesizer(strategy=opts.rz, external_command=opts.rz_cmd)


def synth(req: SynthRequest) -> SynthResponse:
    with _errors():
        if req.builtin is not None:
            target = builtin_matrix(req.builtin)
        else:
            target = np.array([[complex(re, im) for re, im in row] for row in req.matrix])
        cfg, rz = _config(req, eps=req.eps, mode=Mode(req.mode))
        res = synthesize(target, cfg, rz)
    qasm = None
    if res.succeeded:
        qasm = emit_qasm(res.circuit, header={
            "diagsynth": __version__, "mode": res.mode.value, "seed": res.seed, "eps": req.eps,
            "rz_eps": req.rz_eps, "t_count": res.counts.t_count,
            "clifford_count": res.counts.clifford_count, "eps_total": f"{res.eps_total:.6e}"})
    return SynthResponse(
        succeeded=res.succeeded, qasm=qasm, mode=res.mode.value, t_count=res.counts.t_count,
        clifford_count=res.counts.clifford_count, rz_count=res.counts.rz_count, block_eps=res.block_eps,
        rz_budget=res.rz_budget, eps_total=res.eps_total, rz_approximated=res.rz_approximated,
        iterations=res.iterations, seed=res.seed, elapsed_s=res.elapsed,
        left=[str(g) for g in res.left] if res.left is not None else [],
        right=[str(g) for g in res.right] if res.right is not None else [],
        diagonal_phases=list(res.diagonal_phases) if res.diagonal_phases is not None else None,
        cause=res.cause)


def transpile_program(req: TranspileRequest) -> TranspileResponse:
    with _errors():
        ir = parse_qasm(req.qasm)
        cfg, rz = _config(req)
        out, report = transpile(ir, block_size=req.block_size, block_eps=req.eps, rz_eps=req.rz_eps,
                                cfg=cfg, rz=rz)
    header = {"diagsynth": __version__, "seed": req.seed, "block_size": req.block_size,
              "block_eps": req.eps, "rz_eps": req.rz_eps, "t_count": report.t_count,
              "clifford_count": report.clifford_count, "eps_total": f"{report.eps_total:.6e}"}
    return TranspileResponse(qasm=emit_qasm(out, header=header), report=report.to_json_dict(),
                             text=report.to_text(), t_count=report.t_count,
                             gate_level_t_count=report.gate_level_t_count, improvement=report.improvement)


def bench(req: BenchRequest) -> BenchResponse:
    with _errors():
        cfg, rz = _config(req)
        rows = run_bench(req.suite, req.count, req.eps_sweep, [Mode(m) for m in req.modes], cfg, rz)
    return BenchResponse(
        rows=[BenchRowModel(family=r.family, eps=r.eps, mode=r.mode, count=r.count, successes=r.successes,
                            success_rate=r.success_rate, median_t=r.median_t, median_time_s=r.median_time_s,
                            t_counts=r.t_counts) for r in rows],
        table=format_rows(rows))
