"""Hermitian matrices, spectral functional calculus and the Loewner order.

Finite Hermitian matrices stand in for bounded selfadjoint operators. Every
matrix is symmetrized as ``(M + M*) / 2`` on construction so that round-off
from arithmetic never leaks an anti-Hermitian part into a decomposition.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimMismatch,
    DomainViolation,
    NonFiniteEntries,
    NotHermitian,
    ParameterOutOfRange,
)

HERMITIAN_TOL = 1e-10
SPECTRAL_TOL = 1e-10
UNIT_TOL = 1e-12
DOMAIN_GUARD_TOL = 1e-9
FORM_IMAG_TOL = 1e-12


def _herm(a: np.ndarray) -> np.ndarray:
    return (a + np.swapaxes(a, -1, -2).conj()) / 2


class HermitianMatrix:
    """Immutable complex Hermitian matrix with a lazily cached eigendecomposition."""

    def __init__(self, data, *, check: bool = True):
        a = np.array(data, dtype=complex)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DimMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteEntries("matrix has non-finite entries")
        if check:
            skew = np.max(np.abs(a - a.conj().T))
            scale = max(1.0, float(np.linalg.norm(a)))
            if skew > HERMITIAN_TOL * scale:
                raise NotHermitian(f"max |M - M*| = {skew:.3e} exceeds tolerance")
        a = _herm(a)
        a.setflags(write=False)
        self._data = a

    @classmethod
    def diag(cls, values) -> HermitianMatrix:
        return cls(np.diag(np.asarray(values, dtype=float)), check=False)

    @classmethod
    def identity(cls, dim: int) -> HermitianMatrix:
        return cls(np.eye(dim), check=False)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @cached_property
    def decomposition(self) -> SpectralDecomposition:
        return spectral_decompose(self)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.decomposition.eigenvalues

    @property
    def min_eig(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max_eig(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def norm(self) -> float:
        """Spectral norm, read off the cached decomposition."""
        return max(abs(self.min_eig), abs(self.max_eig))

    def __array__(self, dtype=None, copy=None):
        return self._data if dtype is None else self._data.astype(dtype)

    def __repr__(self):
        return f"HermitianMatrix(dim={self.dim}, data={np.array2string(self._data, precision=4)})"

    def _coerce(self, other) -> np.ndarray:
        other = other.data if isinstance(other, HermitianMatrix) else np.asarray(other)
        if other.shape != self._data.shape:
            raise DimMismatch(f"dims differ: {self._data.shape} vs {other.shape}")
        return other

    def __add__(self, other):
        return HermitianMatrix(self._data + self._coerce(other), check=False)

    def __sub__(self, other):
        return HermitianMatrix(self._data - self._coerce(other), check=False)

    def __neg__(self):
        return HermitianMatrix(-self._data, check=False)

    def __mul__(self, scalar):
        if not np.isrealobj(scalar) or np.ndim(scalar) != 0:
            return NotImplemented
        return HermitianMatrix(self._data * float(scalar), check=False)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __matmul__(self, other):
        # products of non-commuting Hermitian matrices are not Hermitian
        return self._data @ self._coerce(other)


def as_hermitian(a) -> HermitianMatrix:
    return a if isinstance(a, HermitianMatrix) else HermitianMatrix(a)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float

    def reconstruct(self, values=None) -> np.ndarray:
        """``U diag(values) U*``; defaults to the eigenvalues themselves."""
        w = self.eigenvalues if values is None else np.asarray(values)
        U = self.eigenvectors
        return _herm((U * w) @ U.conj().T)


def spectral_decompose(A) -> SpectralDecomposition:
    A = as_hermitian(A)
    M = A.data
    try:
        w, U = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(U))):
        raise ConvergenceFailure("eigensolver returned non-finite values")
    # Frobenius norms bound the spectral norms from above
    residual = float(np.linalg.norm((U * w) @ U.conj().T - M))
    scale = max(1.0, float(np.max(np.abs(w))))
    orth = float(np.linalg.norm(U.conj().T @ U - np.eye(A.dim)))
    if residual > SPECTRAL_TOL * scale or orth > SPECTRAL_TOL:
        raise ConvergenceFailure(f"decomposition residual {residual:.3e}, orthogonality {orth:.3e}")
    w.setflags(write=False)
    U.setflags(write=False)
    return SpectralDecomposition(w, U, residual)


def guard_domain(eigenvalues, domain, scale: float = 1.0) -> np.ndarray:
    """Clip eigenvalues into ``domain``; raise if any escapes by more than the guard."""
    lo, hi = domain
    lam = np.asarray(eigenvalues, dtype=float)
    tol = DOMAIN_GUARD_TOL * max(1.0, scale)
    bad = (lam < lo - tol) | (lam > hi + tol)
    if np.any(bad):
        raise DomainViolation(lam[bad].flat[0], domain)
    return np.clip(lam, lo, hi)


def apply_function(f, A) -> HermitianMatrix:
    """Functional calculus ``f(A) = U diag(f(lambda)) U*``."""
    A = as_hermitian(A)
    dec = A.decomposition
    lam = guard_domain(dec.eigenvalues, f.domain, A.norm)
    return HermitianMatrix(dec.reconstruct(np.asarray(f(lam), dtype=float)), check=False)


class Relation(str, enum.Enum):
    LEQ = "LEQ"
    GEQ = "GEQ"
    EQUAL = "EQUAL"
    INCOMPARABLE = "INCOMPARABLE"


@dataclass(frozen=True)
class OrderVerdict:
    relation: Relation
    witness_min_eig: float  # min eigenvalue of B - A
    witness_max_eig: float  # max eigenvalue of B - A
    tolerance_used: float

    @property
    def leq(self) -> bool:
        return self.relation in (Relation.LEQ, Relation.EQUAL)

    @property
    def geq(self) -> bool:
        return self.relation in (Relation.GEQ, Relation.EQUAL)


def loewner_compare(A, B, tol: float = 1e-9, *, atol: float = 0.0) -> OrderVerdict:
    """Compare ``A`` and ``B`` in the Loewner order.

    ``A <= B`` holds when the smallest eigenvalue of ``B - A`` is at least
    ``-(tol * max(1, |A|, |B|) + atol)``.
    """
    A, B = as_hermitian(A), as_hermitian(B)
    if A.dim != B.dim:
        raise DimMismatch(f"dims differ: {A.dim} vs {B.dim}")
    gap = np.linalg.eigvalsh(_herm(B.data - A.data))
    lo, hi = float(gap[0]), float(gap[-1])
    threshold = tol * max(1.0, A.norm, B.norm) + atol
    leq, geq = lo >= -threshold, hi <= threshold
    if leq and geq:
        rel = Relation.EQUAL
    elif leq:
        rel = Relation.LEQ
    elif geq:
        rel = Relation.GEQ
    else:
        rel = Relation.INCOMPARABLE
    return OrderVerdict(rel, lo, hi, threshold)


class UnitVector:
    """Complex vector of unit Euclidean norm."""

    def __init__(self, entries):
        v = np.array(entries, dtype=complex).reshape(-1)
        if v.size == 0:
            raise DimMismatch("empty vector")
        if not np.all(np.isfinite(v)):
            raise NonFiniteEntries("vector has non-finite entries")
        if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
            raise ParameterOutOfRange(f"vector norm {np.linalg.norm(v)!r} is not 1")
        v.setflags(write=False)
        self._v = v

    @classmethod
    def normalized(cls, entries) -> UnitVector:
        v = np.asarray(entries, dtype=complex).reshape(-1)
        return cls(v / np.linalg.norm(v))

    @property
    def entries(self) -> np.ndarray:
        return self._v

    @property
    def dim(self) -> int:
        return self._v.size

    def __array__(self, dtype=None, copy=None):
        return self._v if dtype is None else self._v.astype(dtype)

    def __repr__(self):
        return f"UnitVector({np.array2string(self._v, precision=4)})"


def as_unit(x) -> UnitVector:
    return x if isinstance(x, UnitVector) else UnitVector(x)


def form_value(M, x, scale: float | None = None) -> float:
    """Real part of ``x* M x``, refusing a non-negligible imaginary part."""
    M = np.asarray(M)
    x = np.asarray(x)
    if M.shape != (x.size, x.size):
        raise DimMismatch(f"matrix {M.shape} vs vector of length {x.size}")
    v = complex(x.conj() @ M @ x)
    if scale is None:
        scale = float(np.linalg.norm(M, 2))
    if abs(v.imag) > FORM_IMAG_TOL * max(1.0, scale):
        raise ConvergenceFailure(f"quadratic form has imaginary part {v.imag:.3e}")
    return v.real


def quadratic_form(A, x) -> float:
    """``<Ax, x>`` for Hermitian ``A`` and unit ``x``."""
    A, x = as_hermitian(A), as_unit(x)
    if A.dim != x.dim:
        raise DimMismatch(f"matrix dim {A.dim} vs vector dim {x.dim}")
    return form_value(A.data, x.entries, A.norm)


def spectral_weights(A, x) -> np.ndarray:
    """Weights ``|<u_j, x>|^2`` of ``x`` on the eigenvectors of ``A``.

    ``<f(A)x, x> = sum_j f(lambda_j) w_j``, so one decomposition serves any
    number of functions.
    """
    A, x = as_hermitian(A), as_unit(x)
    if A.dim != x.dim:
        raise DimMismatch(f"matrix dim {A.dim} vs vector dim {x.dim}")
    return np.abs(A.decomposition.eigenvectors.conj().T @ x.entries) ** 2


def segment_point(A, B, t: float) -> HermitianMatrix:
    """The point ``(1 - t) A + t B`` on the segment from ``A`` to ``B``."""
    A, B = as_hermitian(A), as_hermitian(B)
    if A.dim != B.dim:
        raise DimMismatch(f"dims differ: {A.dim} vs {B.dim}")
    if not 0.0 <= t <= 1.0:
        raise ParameterOutOfRange(f"t = {t!r} not in [0, 1]")
    return HermitianMatrix((1.0 - t) * A.data + t * B.data, check=False)
