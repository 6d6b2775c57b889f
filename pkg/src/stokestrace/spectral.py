"""Cumulative spectral resolutions, scalar functional calculus and dyadic
band decompositions of operators ``0 <= A <= I``.

Band ``k`` of ``A`` is the spectral projection onto
``(1/2^k, 2/2^k] u (3/2^k, 4/2^k] u ... u (1 - 1/2^k, 1]``, i.e. onto the
eigenvalues whose ``k``-th binary digit is one when dyadic rationals are
written with a tail of repeating ones.  The eigenvalue 0 lies in no band.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DomainError
from .linalg import SpectralDecomposition

__all__ = [
    "Interval",
    "DyadicBand",
    "cumulative_projector",
    "interval_projector",
    "apply_function",
    "band_digit",
    "dyadic_band",
    "dyadic_partial_sum",
    "dyadic_partial_sum_values",
    "dyadic_floor_form",
    "DEFAULT_DYADIC_DEPTH",
]

DEFAULT_DYADIC_DEPTH = 40
UNIT_SLACK = 1e-12


@dataclass(frozen=True)
class Interval:
    """A compact interval ``[a, b]`` with ``a < b``."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a < self.b):
            raise DomainError(f"interval must satisfy a < b, got [{self.a}, {self.b}]")

    @property
    def width(self) -> float:
        return self.b - self.a

    def __iter__(self):
        return iter((self.a, self.b))

    def contains(self, x, slack: float = 0.0) -> bool:
        x = np.asarray(x)
        return bool(np.all((x >= self.a - slack) & (x <= self.b + slack)))


def _projector(sd: SpectralDecomposition, mask: np.ndarray) -> np.ndarray:
    cols = mask[sd.column_atom]
    v = sd.vectors[:, cols]
    return v @ v.conj().T


def cumulative_projector(sd: SpectralDecomposition, lam: float) -> np.ndarray:
    """``E_H(lam)``: sum of the atom projections with eigenvalue ``<= lam``."""
    return _projector(sd, sd.values <= lam)


def interval_projector(sd: SpectralDecomposition, lo: float, hi: float) -> np.ndarray:
    """``E_H((lo, hi])``."""
    return _projector(sd, (sd.values > lo) & (sd.values <= hi))


def apply_function(sd: SpectralDecomposition, f: Callable) -> np.ndarray:
    """``f(H) = sum f(lambda_i) P_i`` for a scalar function ``f``."""
    vals = np.array([complex(f(float(v))) for v in sd.values])
    if not np.all(np.isfinite(vals)):
        bad = sd.values[~np.isfinite(vals)]
        raise DomainError(f"function is not finite at eigenvalue(s) {bad.tolist()}")
    cv = vals[sd.column_atom]
    return (sd.vectors * cv) @ sd.vectors.conj().T


def _unit_values(sd: SpectralDecomposition, slack: float = UNIT_SLACK) -> np.ndarray:
    v = np.asarray(sd.values, dtype=float)
    if np.any(v < -slack) or np.any(v > 1.0 + slack):
        raise DomainError(
            f"dyadic bands need 0 <= A <= I; spectrum spans [{v.min():.6g}, {v.max():.6g}]"
        )
    return np.clip(v, 0.0, 1.0)


def band_digit(lam, k: int) -> np.ndarray:
    """Membership of ``lam`` in band ``k`` (boolean, vectorized).

    ``lam`` lies in ``(2^-k (2j-1), 2^-k 2j]`` for some ``j`` exactly when
    ``ceil(lam * 2^k)`` is even and positive; scaling by a power of two is
    exact in floating point.
    """
    if k < 1:
        raise DomainError(f"band level must be a positive integer, got {k}")
    c = np.ceil(np.ldexp(np.asarray(lam, dtype=float), k))
    return (c > 0) & (np.mod(c, 2) == 0)


@dataclass(frozen=True)
class DyadicBand:
    """Band projection ``E_k`` together with the atoms it selects."""

    level: int
    projection: np.ndarray
    selected: np.ndarray

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.projection).real))


def dyadic_band(sd: SpectralDecomposition, k: int) -> DyadicBand:
    """Band projection ``E_k`` of an operator ``0 <= A <= I``."""
    vals = _unit_values(sd)
    mask = band_digit(vals, k)
    return DyadicBand(int(k), _projector(sd, mask), mask)


def dyadic_partial_sum_values(lam, K: int) -> np.ndarray:
    """Scalar ``s_K(lam) = sum_{k<=K} 2^-k [lam in band k]``."""
    lam = np.asarray(lam, dtype=float)
    out = np.zeros_like(lam)
    for k in range(1, K + 1):
        out = out + np.ldexp(band_digit(lam, k).astype(float), -k)
    return out


def dyadic_partial_sum(sd: SpectralDecomposition, K: int) -> np.ndarray:
    """``S_K = sum_{k=1..K} 2^-k E_k``; satisfies ``||A - S_K|| <= 2^-K``."""
    if K < 1:
        raise DomainError(f"truncation depth must be a positive integer, got {K}")
    vals = _unit_values(sd)
    coef = dyadic_partial_sum_values(vals, K)
    cv = coef[sd.column_atom]
    return (sd.vectors * cv) @ sd.vectors.conj().T


def dyadic_floor_form(sd: SpectralDecomposition, K: int) -> np.ndarray:
    """``sum_m m 2^-K E((m 2^-K, (m+1) 2^-K])`` over ``0 <= m < 2^K``.

    Only the cells that contain an eigenvalue contribute; for ``K <= 12``
    every cell is visited, above that the candidate cells are located from
    the eigenvalues and each projection is still formed from its interval.
    """
    if K < 1:
        raise DomainError(f"truncation depth must be a positive integer, got {K}")
    vals = _unit_values(sd)
    if K <= 12:
        ms = np.arange(2 ** K)
    else:
        ms = np.unique(np.clip(np.ceil(np.ldexp(vals, K)) - 1, 0, None))
    out = np.zeros((sd.dim, sd.dim), dtype=complex)
    for m in ms:
        lo = np.ldexp(float(m), -K)
        hi = np.ldexp(float(m) + 1.0, -K)
        mask = (vals > lo) & (vals <= hi)
        if np.any(mask):
            out += lo * _projector(sd, mask)
    return out
