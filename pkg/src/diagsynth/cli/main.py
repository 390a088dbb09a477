"""``diagsynth`` command line: a thin client over the service handlers (in-process or over HTTP)."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx
from pydantic import BaseModel, ValidationError

from .. import __version__
from ..service import handlers
from ..service.handlers import EXIT_EXTERNAL, EXIT_OK, EXIT_SYNTHESIS, EXIT_USAGE, ServiceError
from ..service.schemas import (BenchRequest, BenchResponse, SynthRequest, SynthResponse, TranspileRequest,
                               TranspileResponse)
from ..qasm import emit_qasm
from .builtins import builtin_program
from .matrixio import read_matrix


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(kind):
    def conv(s):
        v = kind(s)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v
    return conv


def _float_list(s: str) -> list[float]:
    try:
        vals = [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("values must be positive")
    return vals


def _common(p: argparse.ArgumentParser, eps_default: float | None = 1e-8) -> None:
    if eps_default is not None:
        p.add_argument("--eps", type=_positive(float), default=eps_default, help="block distance target")
    p.add_argument("--rz-eps", type=_positive(float), default=1e-3, help="per-rotation RZ approximation error")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive(int), default=1)
    p.add_argument("--timeout", type=_positive(float), default=60.0, help="search budget in seconds per target")
    p.add_argument("--max-iters", type=_positive(int), default=None, help="iteration cap per worker")
    p.add_argument("--rz", choices=("search", "external"), default="search", help="RZ approximation backend")
    p.add_argument("--rz-cmd", default=None, help="external tool template (default: $DIAGSYNTH_RZ_CMD)")
    p.add_argument("--report", default="text", help="'text' or a path for a JSON report")
    p.add_argument("--server", default=None, metavar="URL", help="send the request to a running service")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="diagsynth", description="Clifford+T synthesis by two-sided diagonalization.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="synthesize one 1-3 qubit unitary")
    target = s.add_mutually_exclusive_group(required=True)
    target.add_argument("matrix", nargs="?", help="matrix file (dim line, then rows of a+bi)")
    target.add_argument("--builtin", help="ccy, ccz, toffoli, cry:THETA, ccry:THETA, qft:N")
    s.add_argument("--mode", choices=("diag", "invert"), default="diag")
    s.add_argument("-o", "--output", help="QASM output path (default: stdout)")
    _common(s)

    t = sub.add_parser("transpile", help="transpile an OpenQASM 2.0 program block by block")
    source = t.add_mutually_exclusive_group(required=True)
    source.add_argument("qasm", nargs="?", help="input QASM path")
    source.add_argument("--builtin", help="generated program: qft:N, qft-cp:N, qft-crz:N, adder:BITS")
    t.add_argument("--block-size", type=int, choices=(2, 3), default=2)
    t.add_argument("-o", "--output", help="QASM output path (default: stdout)")
    _common(t)

    b = sub.add_parser("bench", help="diagonalization vs inversion over a target suite")
    b.add_argument("--suite", choices=("controlled-rotations", "random-adb"), default="controlled-rotations")
    b.add_argument("--count", type=_positive(int), default=20)
    b.add_argument("--eps-sweep", type=_float_list, default=[1e-2, 1e-4, 1e-6], help="comma-separated eps values")
    b.add_argument("--modes", default="diag,invert", help="comma-separated subset of diag,invert")
    _common(b, eps_default=None)

    v = sub.add_parser("serve", help="run the HTTP service")
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=8000)
    return p


def _options(a) -> dict:
    return dict(rz_eps=a.rz_eps, seed=a.seed, workers=a.workers, timeout=a.timeout, max_iters=a.max_iters,
                rz=a.rz, rz_cmd=a.rz_cmd)


def _call(a, path: str, req: BaseModel, response_type: type[BaseModel], local):
    if a.server is None:
        return local(req)
    url = a.server.rstrip("/") + path
    try:
        r = httpx.post(url, json=req.model_dump(), timeout=None)
    except httpx.HTTPError as exc:
        raise ServiceError(f"cannot reach service at {a.server}: {exc}", EXIT_EXTERNAL, 0) from exc
    if r.status_code != 200:
        try:
            body = r.json()
            raise ServiceError(body["detail"], int(body["exit_code"]), r.status_code)
        except (ValueError, KeyError, TypeError):
            raise ServiceError(f"service error {r.status_code}: {r.text[:200]}", EXIT_EXTERNAL, r.status_code)
    return response_type.model_validate(r.json())


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _report(a, text: str, payload: dict) -> None:
    if a.report == "text":
        # keep stdout clean for QASM when no output file is given
        stream = sys.stderr if getattr(a, "output", "x") is None else sys.stdout
        stream.write(text)
    else:
        Path(a.report).write_text(json.dumps(payload, indent=2) + "\n")


def _synth_text(r: SynthResponse) -> str:
    lines = [f"succeeded          {r.succeeded}", f"mode               {r.mode}",
             f"T gates            {r.t_count}", f"Clifford gates     {r.clifford_count}",
             f"R_Z gates          {r.rz_count}", f"block_eps          {r.block_eps:.3e}",
             f"rz_budget          {r.rz_budget:.3e}", f"eps_total          {r.eps_total:.3e}",
             f"iterations         {r.iterations}", f"elapsed_s          {r.elapsed_s:.2f}",
             f"seed               {r.seed}"]
    if r.succeeded and r.mode == "diag":
        lines += [f"left               {' '.join(r.left) or '-'}", f"right              {' '.join(r.right) or '-'}"]
    if r.cause:
        lines.append(f"cause              {r.cause}")
    return "\n".join(lines) + "\n"


def cmd_synth(a) -> int:
    fields = dict(eps=a.eps, mode=a.mode, **_options(a))
    if a.builtin is not None:
        fields["builtin"] = a.builtin
    else:
        try:
            u = read_matrix(Path(a.matrix).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {a.matrix}: {exc.strerror}") from None
        fields["matrix"] = [[(z.real, z.imag) for z in row] for row in u]
    res = _call(a, "/synth", SynthRequest(**fields), SynthResponse, handlers.synth)
    if res.succeeded:
        _emit(res.qasm, a.output)
    _report(a, _synth_text(res), res.model_dump(exclude={"qasm"}))
    if not res.succeeded:
        print(f"diagsynth: synthesis failed ({res.cause})", file=sys.stderr)
        return EXIT_SYNTHESIS
    return EXIT_OK


def cmd_transpile(a) -> int:
    if a.builtin is not None:
        text = emit_qasm(builtin_program(a.builtin))
    else:
        try:
            text = Path(a.qasm).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {a.qasm}: {exc.strerror}") from None
    req = TranspileRequest(qasm=text, block_size=a.block_size, eps=a.eps, **_options(a))
    res = _call(a, "/transpile", req, TranspileResponse, handlers.transpile_program)
    _emit(res.qasm, a.output)
    _report(a, res.text, res.report)
    return EXIT_OK


def cmd_bench(a) -> int:
    modes = [m.strip() for m in a.modes.split(",") if m.strip()]
    req = BenchRequest(suite=a.suite, count=a.count, eps_sweep=a.eps_sweep, modes=modes, **_options(a))
    res = _call(a, "/bench", req, BenchResponse, handlers.bench)
    if a.report == "text":
        sys.stdout.write(res.table)
    else:
        Path(a.report).write_text(json.dumps(res.model_dump(), indent=2) + "\n")
    return EXIT_OK


def cmd_serve(a) -> int:
    import uvicorn

    from ..service.app import create_app

    uvicorn.run(create_app(), host=a.host, port=a.port)
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "transpile": cmd_transpile, "bench": cmd_bench, "serve": cmd_serve}


def main(argv: list[str] | None = None) -> int:
    try:
        a = build_parser().parse_args(argv)
        return COMMANDS[a.command](a)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        msgs = "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors())
        print(f"diagsynth: invalid arguments: {msgs}", file=sys.stderr)
        return EXIT_USAGE
    except ServiceError as exc:
        print(f"diagsynth: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"diagsynth: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
