"""Seeded random Hermitian matrices and unit vectors.

Every draw is a pure function of a 64-bit sub-seed, and sub-seeds are a
hash of ``(master_seed, trial_index, stream_tag)``. No generator state is
shared, so parallel execution order cannot change any drawn value.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import BadInterval, ParameterOutOfRange
from .hermitian import HermitianMatrix, UnitVector

U64 = 2**64


def derive_subseed(master_seed: int, trial_index: int, stream_tag: str) -> int:
    if not 0 <= int(master_seed) < U64:
        raise ParameterOutOfRange(f"master seed {master_seed!r} is not an unsigned 64-bit integer")
    key = f"{int(master_seed)}/{int(trial_index)}/{stream_tag}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


@dataclass(frozen=True)
class TrialSpec:
    dim: int
    interval: tuple[float, float]
    master_seed: int
    trial_index: int

    def __post_init__(self):
        lo, hi = self.interval
        if not lo < hi:
            raise BadInterval(f"invalid interval [{lo!r}, {hi!r}]")
        if self.dim < 1:
            raise ParameterOutOfRange("dim must be positive")

    def subseed(self, stream_tag: str) -> int:
        return derive_subseed(self.master_seed, self.trial_index, stream_tag)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    # rescale columns so that R has a nonnegative real diagonal
    phase = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * phase


def random_hermitian(dim: int, interval, sub_seed: int) -> HermitianMatrix:
    lo, hi = (float(v) for v in interval)
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
        raise BadInterval(f"invalid interval [{lo!r}, {hi!r}]")
    if dim < 1:
        raise ParameterOutOfRange("dim must be positive")
    rng = np.random.default_rng(sub_seed)
    q = haar_unitary(dim, rng)
    lam = rng.uniform(lo, hi, size=dim)
    return HermitianMatrix((q * lam) @ q.conj().T, check=False)


def random_unit_vector(dim: int, sub_seed: int) -> UnitVector:
    if dim < 1:
        raise ParameterOutOfRange("dim must be positive")
    rng = np.random.default_rng(sub_seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return UnitVector.normalized(v)
