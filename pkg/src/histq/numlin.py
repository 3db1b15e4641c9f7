"""Dense complex matrix kernel.

Every operator in the package is a square ``numpy`` complex array. The
helpers here cover the Hermitian eigenproblem, spectral functional calculus,
Kronecker products, unitary propagators ``U(t', t) = exp(-i (t' - t) H)``
(hbar = 1) and the operator order ``A <= B``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from typing import Iterable, NamedTuple

import numpy as np

from .errors import (
    DimensionCapExceeded,
    DimensionMismatch,
    NotHermitian,
    NotPsd,
    ValidationError,
)

TAU_LIN = 1e-10
TAU_PSD = 1e-9
TAU_FN = 1e-8
TAU_RANK = 1e-8
DIM_CAP = 4096

# Eigenvalues this close to zero (relative to the spectral radius) are
# rounding noise; fractional powers would otherwise amplify them.
_ZERO_SNAP = 64 * np.finfo(float).eps


class HermitianSpectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self, values=None) -> np.ndarray:
        lam = self.eigenvalues if values is None else values
        v = self.eigenvectors
        return (v * lam) @ v.conj().T


def as_cmatrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a square, finite complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def zeros(n: int) -> np.ndarray:
    return np.zeros((n, n), dtype=complex)


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(m, tol: float = TAU_LIN) -> bool:
    return hermiticity_defect(np.asarray(m, dtype=complex)) <= tol


def _check_hermitian(m: np.ndarray, tol: float, name: str = "matrix") -> None:
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NotHermitian(f"{name} is not Hermitian (max |M - M^H| = {defect:.3e} > {tol:.1e})")


def hermitian_eig(m, tol: float = TAU_LIN) -> HermitianSpectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises :class:`NotHermitian` if ``max|M - M^H| > tol``.
    """
    a = as_cmatrix(m)
    _check_hermitian(a, tol)
    lam, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return HermitianSpectrum(lam, v)


def _snap(lam: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(lam)))) if lam.size else 1.0
    out = lam.copy()
    out[np.abs(out) <= _ZERO_SNAP * scale] = 0.0
    return out


def _as_exponent(p) -> float:
    if isinstance(p, Fraction):
        return p.numerator / p.denominator
    value = getattr(p, "value", p)  # AlphaParam and friends
    if isinstance(value, Fraction):
        return value.numerator / value.denominator
    return float(value)


def pow_psd(m, p, tol: float = TAU_PSD) -> np.ndarray:
    """``M**p`` for positive semidefinite ``M`` and ``p > 0``.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero first; anything more
    negative raises :class:`NotPsd`.
    """
    exponent = _as_exponent(p)
    if not exponent > 0:
        raise ValidationError(f"exponent must be positive, got {p!r}")
    spec = hermitian_eig(m)
    lam = spec.eigenvalues
    if lam.size and lam[0] < -tol:
        raise NotPsd(f"matrix is not PSD (min eigenvalue {lam[0]:.3e} < -{tol:.1e})")
    lam = _snap(np.clip(lam, 0.0, None))
    if exponent == 1.0:
        powered = lam
    else:
        powered = lam**exponent
    return spec.reconstruct(powered)


def sqrt_psd(m, tol: float = TAU_PSD) -> np.ndarray:
    return pow_psd(m, Fraction(1, 2), tol=tol)


def min_eigenvalue(m) -> float:
    a = as_cmatrix(m)
    return float(np.linalg.eigvalsh(0.5 * (a + a.conj().T))[0])


def max_eigenvalue(m) -> float:
    a = as_cmatrix(m)
    return float(np.linalg.eigvalsh(0.5 * (a + a.conj().T))[-1])


def is_psd(m, tol: float = TAU_PSD) -> bool:
    return min_eigenvalue(m) >= -tol


def evolve_from_spectrum(spec: HermitianSpectrum, t_from: float, t_to: float) -> np.ndarray:
    dt = float(t_to) - float(t_from)
    if dt == 0.0:
        return identity(spec.eigenvectors.shape[0])
    return spec.reconstruct(np.exp(-1j * dt * spec.eigenvalues))


def evolve(h, t_from: float, t_to: float, tol: float = TAU_LIN) -> np.ndarray:
    """Propagator ``U(t_to, t_from) = exp(-i (t_to - t_from) H)``."""
    return evolve_from_spectrum(hermitian_eig(h, tol=tol), t_from, t_to)


def kron(a, b, cap: int = DIM_CAP) -> np.ndarray:
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    n = a.shape[0] * b.shape[0]
    if n > cap:
        raise DimensionCapExceeded(f"tensor dimension {n} exceeds cap {cap}")
    return np.kron(a, b)


def kron_all(mats: Iterable, cap: int = DIM_CAP) -> np.ndarray:
    """Kronecker product of a sequence; the empty product is ``[[1]]``."""
    mats = list(mats)
    if not mats:
        return np.ones((1, 1), dtype=complex)
    return reduce(lambda x, y: kron(x, y, cap=cap), mats)


def op_leq(a, b, tol: float = TAU_PSD) -> bool:
    """Operator order: true iff ``B - A`` is PSD within ``tol``."""
    a = as_cmatrix(a, "A")
    b = as_cmatrix(b, "B")
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimension mismatch {a.shape} vs {b.shape}")
    _check_hermitian(a, TAU_LIN, "A")
    _check_hermitian(b, TAU_LIN, "B")
    return min_eigenvalue(b - a) >= -tol


def is_projector(m, tol: float = TAU_FN) -> bool:
    a = np.asarray(m, dtype=complex)
    return hermiticity_defect(a) <= tol and float(np.max(np.abs(a @ a - a))) <= tol


def range_projector(cols: np.ndarray, tol: float = TAU_RANK) -> np.ndarray:
    """Orthogonal projector onto the column span of ``cols``."""
    n = cols.shape[0]
    if cols.size == 0:
        return zeros(n)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    basis = u[:, :rank]
    return basis @ basis.conj().T


def null_projector(rows: np.ndarray, tol: float = TAU_RANK) -> np.ndarray:
    """Orthogonal projector onto the null space of ``rows``."""
    n = rows.shape[1]
    _, s, vh = np.linalg.svd(rows, full_matrices=True)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    basis = vh[rank:].conj().T
    return basis @ basis.conj().T if basis.size else zeros(n)


def op_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m, dtype=complex), 2))


def max_abs(m) -> float:
    a = np.asarray(m)
    return float(np.max(np.abs(a))) if a.size else 0.0


def frozen(m: np.ndarray) -> np.ndarray:
    """Read-only copy, so value objects stay immutable."""
    out = np.array(m, dtype=complex, copy=True)
    out.setflags(write=False)
    return out
