"""Request and response models shared by the HTTP service and the command line."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

ComplexPair = tuple[float, float]


class RunOptions(BaseModel):
    rz_eps: float = Field(1e-3, gt=0)
    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)
    timeout: float = Field(60.0, gt=0)
    max_iters: int | None = Field(None, ge=1)
    rz: Literal["search", "external"] = "search"
    rz_cmd: str | None = None


class SynthRequest(RunOptions):
    matrix: list[list[ComplexPair]] | None = None     # rows of (re, im)
    builtin: str | None = None
    eps: float = Field(1e-8, gt=0)
    mode: Literal["diag", "invert"] = "diag"

    @model_validator(mode="after")
    def _one_target(self):
        if (self.matrix is None) == (self.builtin is None):
            raise ValueError("give exactly one of 'matrix' or 'builtin'")
        return self


class SynthResponse(BaseModel):
    succeeded: bool
    qasm: str | None
    mode: str
    t_count: int
    clifford_count: int
    rz_count: int
    block_eps: float
    rz_budget: float
    eps_total: float
    rz_approximated: int
    iterations: int
    seed: int
    elapsed_s: float
    left: list[str] = []
    right: list[str] = []
    diagonal_phases: list[float] | None = None
    cause: str | None = None


class TranspileRequest(RunOptions):
    qasm: str
    block_size: Literal[2, 3] = 2
    eps: float = Field(1e-8, gt=0)


class TranspileResponse(BaseModel):
    qasm: str
    report: dict            # partitions + totals
    text: str               # human-readable table
    t_count: int
    gate_level_t_count: int
    improvement: float


class BenchRequest(RunOptions):
    suite: Literal["controlled-rotations", "random-adb"] = "controlled-rotations"
    count: int = Field(20, ge=1)
    eps_sweep: list[float] = [1e-2, 1e-4, 1e-6]
    modes: list[Literal["diag", "invert"]] = ["diag", "invert"]


class BenchRowModel(BaseModel):
    family: str
    eps: float
    mode: str
    count: int
    successes: int
    success_rate: float
    median_t: float | None
    median_time_s: float
    t_counts: list[int]


class BenchResponse(BaseModel):
    rows: list[BenchRowModel]
    table: str


class ErrorResponse(BaseModel):
    detail: str
    exit_code: int
