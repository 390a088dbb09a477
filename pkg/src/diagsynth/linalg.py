"""Small dense complex-matrix helpers and the unitary distances used everywhere.

Matrices are plain ``numpy`` arrays of shape ``(2**n, 2**n)`` with ``n <= 3``.
All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNITARY_TOL = 1e-10
_RADICAND_FLOOR = -1e-12


class DimensionError(ValueError):
    """Raised when matrix shapes do not agree (a caller bug)."""


class NotUnitaryError(ValueError):
    pass


def wrap_angle(theta):
    """Map angles onto the branch (-pi, pi]."""
    out = np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), 2 * np.pi)
    if np.ndim(out) == 0:
        return float(out)
    return out


def num_qubits(u: np.ndarray) -> int:
    dim = u.shape[0]
    if u.ndim != 2 or u.shape[1] != dim or dim < 1 or dim & (dim - 1):
        raise DimensionError(f"expected a square power-of-two matrix, got shape {u.shape}")
    return dim.bit_length() - 1


def _check_same(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def adjoint(u: np.ndarray) -> np.ndarray:
    return np.conj(u).T


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[-1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def kron(*mats: np.ndarray) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def trace(u: np.ndarray) -> complex:
    return complex(np.trace(u))


def unitarity_residual(u: np.ndarray) -> float:
    """Frobenius norm of ``U U^dagger - I``."""
    return float(np.linalg.norm(u @ adjoint(u) - np.eye(u.shape[0])))


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    try:
        num_qubits(u)
    except DimensionError:
        return False
    return unitarity_residual(u) <= tol


def as_unitary(u, tol: float = UNITARY_TOL, max_qubits: int = 3) -> np.ndarray:
    """Validate and return ``u`` as a complex ndarray."""
    arr = np.asarray(u, dtype=complex)
    n = num_qubits(arr)
    if n < 1 or n > max_qubits:
        raise DimensionError(f"unsupported width {n} (1..{max_qubits} qubits)")
    res = unitarity_residual(arr)
    if res > tol:
        raise NotUnitaryError(f"matrix is not unitary (residual {res:.3e} > {tol:.1e})")
    return arr


def _clamped_sqrt(radicand: float) -> float:
    if radicand < 0.0:
        if radicand < _RADICAND_FLOOR:
            raise ArithmeticError(f"negative radicand {radicand!r}; inputs are not unitary")
        return 0.0
    return float(np.sqrt(radicand))


def hs_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Global-phase invariant Hilbert-Schmidt distance.

    ``sqrt(1 - |Tr(a b^dagger)|^2 / 4^n)``; symmetric, in ``[0, 1]``.  Near
    zero, ``1 - c`` is taken from the phase-aligned Frobenius residual
    ``||a - lambda b||^2 / 2^{n+1}`` so tiny distances keep full precision
    (for unitary inputs the two forms agree exactly).
    """
    _check_same(a, b)
    dim = a.shape[0]
    tr = np.vdot(b, a)  # == Tr(a b^dagger)
    overlap = abs(tr) / dim
    if overlap < 0.5:
        return _clamped_sqrt(1.0 - overlap * overlap)
    gap = float(np.linalg.norm(a - (tr / abs(tr)) * b) ** 2) / (2 * dim)
    return _clamped_sqrt(gap * (2.0 - gap))


def diagonal_distance(s: np.ndarray) -> float:
    """Minimum of ``hs_distance(s, D)`` over all diagonal unitaries ``D``.

    The optimum aligns the phase of every diagonal entry, which gives the
    closed form ``sqrt(1 - (sum_i |s_ii|)^2 / 4^n)``.  For unitary ``s``,
    ``1 - |s_ii| = off_i^2 / (1 + |s_ii|)`` with ``off_i`` the row's
    off-diagonal norm, which avoids cancellation near zero.
    """
    dim = s.shape[0]
    mag2 = np.abs(s) ** 2
    d = np.diagonal(mag2)
    off = np.maximum(mag2.sum(axis=1) - d, 0.0)
    gap = float((off / (1.0 + np.sqrt(d))).sum()) / dim
    return _clamped_sqrt(gap * (2.0 - gap))


@dataclass(frozen=True)
class DiagonalUnitary:
    """``diag(exp(1j * phases))`` with every phase on (-pi, pi]."""

    phases: tuple[float, ...]

    def __post_init__(self):
        dim = len(self.phases)
        if dim < 1 or dim & (dim - 1):
            raise DimensionError(f"phase vector length {dim} is not a power of two")
        object.__setattr__(self, "phases", tuple(float(p) for p in wrap_angle(np.array(self.phases))))

    @property
    def dim(self) -> int:
        return len(self.phases)

    def matrix(self) -> np.ndarray:
        return np.diag(np.exp(1j * np.array(self.phases)))


def nearest_diagonal(s: np.ndarray, zero_tol: float = 1e-15) -> DiagonalUnitary:
    """Diagonal ``D`` for which ``D @ s`` has a nonnegative real diagonal.

    Zero diagonal entries get phase 0.
    """
    diag = np.diagonal(s)
    phases = np.where(np.abs(diag) > zero_tol, -np.angle(diag), 0.0)
    return DiagonalUnitary(tuple(phases))


def row_offdiagonal_criterion(s: np.ndarray, eps: float) -> bool:
    """True iff every row's off-diagonal 2-norm is at most ``eps``.

    When it holds, ``diagonal_distance(s) <= eps``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    mag2 = np.abs(s) ** 2
    off = mag2.sum(axis=1) - np.diagonal(mag2)
    return bool(np.sqrt(np.maximum(off, 0.0)).max() <= eps)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
