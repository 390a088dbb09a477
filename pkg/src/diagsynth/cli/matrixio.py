"""Text format for complex matrices: a ``dim`` line, then ``dim`` rows of ``a+bi`` literals."""

from __future__ import annotations

import numpy as np

from ..linalg import is_unitary

UNITARY_TOL = 1e-8


class MatrixFormatError(ValueError):
    pass


def _parse_complex(tok: str, line: int) -> complex:
    s = tok.replace("i", "j").replace("I", "j")
    try:
        return complex(s)
    except ValueError:
        raise MatrixFormatError(f"line {line}: bad complex literal {tok!r}") from None


def read_matrix(text: str) -> np.ndarray:
    rows = [(n, ln.split("#", 1)[0].split()) for n, ln in enumerate(text.splitlines(), 1)]
    rows = [(n, toks) for n, toks in rows if toks]
    if not rows:
        raise MatrixFormatError("empty matrix file")
    n0, head = rows[0]
    if len(head) != 1 or not head[0].isdigit() or int(head[0]) < 1:
        raise MatrixFormatError(f"line {n0}: first line must be the dimension")
    dim = int(head[0])
    body = rows[1:]
    if len(body) != dim:
        raise MatrixFormatError(f"expected {dim} rows, found {len(body)}")
    out = np.empty((dim, dim), dtype=complex)
    for i, (n, toks) in enumerate(body):
        if len(toks) != dim:
            raise MatrixFormatError(f"line {n}: expected {dim} entries, found {len(toks)}")
        out[i] = [_parse_complex(t, n) for t in toks]
    if dim & (dim - 1):
        raise MatrixFormatError(f"dimension {dim} is not a power of two")
    if not is_unitary(out, UNITARY_TOL):
        raise MatrixFormatError(f"matrix is not unitary within {UNITARY_TOL:g}")
    return out


def _fmt(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def write_matrix(u: np.ndarray) -> str:
    u = np.asarray(u, dtype=complex)
    return "\n".join([str(u.shape[0])] + [" ".join(_fmt(z) for z in row) for row in u]) + "\n"
