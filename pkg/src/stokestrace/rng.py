"""Seeded random streams and Haar-distributed unitaries.

Every stream is a PCG64 generator seeded from ``SeedSequence(seed,
spawn_key=(crc32(purpose),))``, so each ``(seed, purpose)`` pair yields an
independent, portable stream.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["stream", "haar_unitary", "complex_gaussian"]


def stream(seed: int, purpose: str) -> np.random.Generator:
    """Generator for the stream named ``purpose`` under ``seed``."""
    key = zlib.crc32(purpose.encode("utf-8"))
    ss = np.random.SeedSequence(int(seed) % 2 ** 64, spawn_key=(key,))
    return np.random.Generator(np.random.PCG64(ss))


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar unitary: QR of a complex Gaussian matrix with the phases of the
    diagonal of ``R`` moved into ``Q``."""
    z = complex_gaussian(rng, (dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    ph = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * ph
