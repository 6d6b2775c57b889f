"""Operator-valued Riemann-Stieltjes integrals against atomic spectral
measures, operator line integrals ``int_A^B phi(x, C) dx`` and the
divided-difference double operator integral.

Every scalar integral of a field is evaluated in closed form by
:class:`~stokestrace.fields.ScalarField2D`; nothing here uses quadrature.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import DomainError
from .fields import ScalarField2D
from .linalg import (
    JointSpectralDecomposition,
    SpectralDecomposition,
    as_complex_matrix,
    operator_norm,
)

__all__ = [
    "HolderWarning",
    "OperatorCurve",
    "Partition",
    "rs_integral_exact",
    "rs_integral_partition",
    "line_integral",
    "divided_difference_kernel",
    "doi_pairing",
    "default_coincidence_tol",
]

COINCIDENCE_REL_TOL = 1e-9


class HolderWarning(UserWarning):
    """Advertised Hoelder data is outside the supported range."""


def default_coincidence_tol(interval) -> float:
    a, b = interval
    return COINCIDENCE_REL_TOL * float(b - a)


@dataclass(frozen=True)
class OperatorCurve:
    """Matrix-valued map ``alpha -> A(alpha)`` with advertised Hoelder data
    ``||A(s) - A(t)|| <= constant * |s - t|**index``.

    Parameters
    ----------
    func : callable
        ``func(alpha)`` returns a square matrix.
    constant, index : float
        Hoelder constant and index.  The Riemann-Stieltjes estimate needs
        ``index > 1/2``.
    strictness : {"warn", "error", "ignore"}
        What to do when ``index <= 1/2``.
    """

    func: Callable
    constant: float = 1.0
    index: float = 1.0
    strictness: str = "warn"

    def __post_init__(self):
        if self.strictness not in ("warn", "error", "ignore"):
            raise DomainError(f"unknown strictness {self.strictness!r}")
        if not (0.0 < self.index <= 1.0) or self.constant < 0:
            raise DomainError(f"invalid Hoelder data (C={self.constant}, k={self.index})")
        if self.index <= 0.5:
            msg = f"Hoelder index {self.index} <= 1/2: partition sums are not guaranteed to converge"
            if self.strictness == "error":
                raise DomainError(msg)
            if self.strictness == "warn":
                warnings.warn(msg, HolderWarning, stacklevel=3)

    def __call__(self, alpha: float) -> np.ndarray:
        return as_complex_matrix(self.func(float(alpha)))

    def check_holder(self, interval, samples: int = 32, seed: int = 0) -> float:
        """Largest ratio ``||A(s) - A(t)|| / (C |s - t|**k)`` over random
        sample pairs; values above ``1 + 1e-6`` refute the advertised data."""
        rng = np.random.default_rng(seed)
        a, b = interval
        pts = rng.uniform(a, b, size=(samples, 2))
        worst = 0.0
        for s, t in pts:
            if s == t:
                continue
            num = operator_norm(self(s) - self(t))
            den = self.constant * abs(s - t) ** self.index
            worst = max(worst, num / den if den > 0 else (np.inf if num > 0 else 0.0))
        return worst


@dataclass(frozen=True)
class Partition:
    """Breakpoints ``a = t_0 < ... < t_M = b`` with one tag per cell.

    Cell ``i`` is ``(t_i, t_{i+1}]``; the first cell also contains ``a``.
    """

    breakpoints: np.ndarray
    tags: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.breakpoints, dtype=float)
        g = np.asarray(self.tags, dtype=float)
        if t.ndim != 1 or t.size < 2 or not np.all(np.diff(t) > 0):
            raise DomainError("partition breakpoints must be strictly increasing")
        if g.shape != (t.size - 1,) or np.any(g < t[:-1]) or np.any(g > t[1:]):
            raise DomainError("each tag must lie in its cell")
        object.__setattr__(self, "breakpoints", t)
        object.__setattr__(self, "tags", g)

    @classmethod
    def uniform(cls, a: float, b: float, cells: int, tag: str = "right") -> "Partition":
        t = np.linspace(a, b, cells + 1)
        return cls(t, _tags(t, tag))

    @classmethod
    def dyadic(cls, a: float, b: float, m: int, tag: str = "right") -> "Partition":
        """``2**m`` equal cells, mesh ``(b - a) 2**-m``."""
        return cls.uniform(a, b, 2 ** m, tag)

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.breakpoints)))

    def __len__(self) -> int:
        return self.tags.size


def _tags(t, tag):
    if tag == "right":
        return t[1:].copy()
    if tag == "left":
        return t[:-1].copy()
    if tag == "mid":
        return 0.5 * (t[1:] + t[:-1])
    raise DomainError(f"unknown tag rule {tag!r}")


def rs_integral_exact(curve, sd: SpectralDecomposition) -> np.ndarray:
    """``int A(alpha) E(d alpha) = sum_i A(lambda_i) P_i`` (exact for an
    atomic measure)."""
    out = np.zeros((sd.dim, sd.dim), dtype=complex)
    for i, lam in enumerate(sd.values):
        v = sd.atom_vectors(i)
        out += (curve(lam) @ v) @ v.conj().T
    return out


def rs_integral_partition(curve, sd: SpectralDecomposition, partition: Partition) -> np.ndarray:
    """Riemann-Stieltjes sum ``sum_i A(tag_i) E(cell_i)`` with
    ``E(cell_i) = E(t_{i+1}) - E(t_i)`` built from cumulative projectors."""
    t = partition.breakpoints
    d = sd.dim
    # cumulative projectors E(t_j): prefix sums of atom projections
    atom_proj = np.stack([sd.atom_vectors(i) @ sd.atom_vectors(i).conj().T for i in range(len(sd))])
    prefix = np.concatenate([np.zeros((1, d, d), dtype=complex), np.cumsum(atom_proj, axis=0)])
    count = np.searchsorted(sd.values, t, side="right")
    cum = prefix[count]
    # the first cell is closed at a and the last one absorbs everything up to b
    cum[0] = 0.0
    cum[-1] = prefix[-1]
    delta = np.diff(cum, axis=0)
    nonzero = np.nonzero(np.any(np.abs(delta) > 0, axis=(1, 2)))[0]
    out = np.zeros((d, d), dtype=complex)
    for i in nonzero:
        out += curve(partition.tags[i]) @ delta[i]
    return out


def _line_kernel(phi: ScalarField2D, variable: str, lower: float, upper, other):
    """``g[m, l] = int_lower^{upper_m} phi(., other_l)`` in the integration
    variable (``x`` keeps ``other`` in the second argument)."""
    up = np.asarray(upper, dtype=float)[:, None]
    ot = np.asarray(other, dtype=float)[None, :]
    lo = np.full(np.broadcast(up, ot).shape, float(lower))
    if variable == "x":
        return phi.integral_x(lo, up, ot)
    if variable == "y":
        return phi.integral_y(ot, lo, up)
    raise DomainError(f"variable must be 'x' or 'y', got {variable!r}")


def line_integral(
    A_sd: SpectralDecomposition,
    B_sd: SpectralDecomposition,
    phi: ScalarField2D,
    C_sd: SpectralDecomposition,
    left=None,
    right=None,
    variable: str = "x",
    lower: Optional[float] = None,
) -> np.ndarray:
    """Operator line integral ``int_A^B L phi(x, C) R dx``.

    Realized as ``sum_j L T(beta_j) R Q_j - sum_i L T(alpha_i) R P_i`` over
    the atoms of ``B`` and ``A``, with
    ``T(alpha) = sum_l (int_lower^alpha phi(x, gamma_l) dx) R_l`` over the
    atoms of ``C``.  With ``variable="y"`` the integration runs over the
    second argument and ``C`` fills the first, i.e. ``int_A^B L phi(C, y) R dy``.

    Parameters
    ----------
    left, right : array_like, optional
        Fixed operators ``L`` and ``R`` (default identity).
    lower : float, optional
        Base point of the inner integrals (default: left end of the interval
        of ``A_sd``); it cancels between the two sums.
    """
    d = A_sd.dim
    if B_sd.dim != d or C_sd.dim != d:
        raise DomainError("spectral decompositions have different dimensions")
    if lower is None:
        lower = float(A_sd.interval[0])
    L = np.eye(d, dtype=complex) if left is None else as_complex_matrix(left)
    R = np.eye(d, dtype=complex) if right is None else as_complex_matrix(right)
    U = C_sd.vectors
    gam = C_sd.column_values

    def half(sd):
        W = sd.vectors
        g = _line_kernel(phi, variable, lower, sd.column_values, gam)  # (cols of sd, cols of C)
        if not np.all(np.isfinite(g)):
            raise DomainError("field is not evaluable on the spectra")
        return L @ U @ (g.T * (U.conj().T @ R @ W)) @ W.conj().T

    return half(B_sd) - half(A_sd)


def divided_difference_kernel(psi: ScalarField2D, x1, x2, y1, y2, coincidence_tol: Optional[float] = None):
    """Divided-difference kernel
    ``[int_{x2}^{x1} int_{y2}^{y1} psi] / ((x1 - x2)(y1 - y2))``.

    Evaluated as a rectangle mean, so it is free of cancellation; a side no
    longer than ``coincidence_tol`` (default ``1e-9 (b - a)``) is replaced by
    its limit, the point value in that variable.  Arguments broadcast.
    """
    if coincidence_tol is None:
        coincidence_tol = default_coincidence_tol(psi.domain[0])
    out = psi.rect_mean(x1, x2, y1, y2, tol=coincidence_tol)
    return out if np.ndim(out) else complex(out)


def doi_pairing(
    V1,
    V2,
    jsd0: JointSpectralDecomposition,
    jsd: JointSpectralDecomposition,
    psi: ScalarField2D,
    coincidence_tol: Optional[float] = None,
) -> complex:
    """Double operator integral
    ``sum K(x1, x2, y1, y2) Tr(V1 F0 V2 F)`` over atoms ``((x2, y1), F0)``
    of ``jsd0`` and ``((x1, y2), F)`` of ``jsd``.

    Outer projections are folded into ``V1`` and ``V2`` by the caller.  The
    sum runs over eigenvector columns, which splits every atom into rank-one
    pieces sharing its kernel value.
    """
    V1 = as_complex_matrix(V1)
    V2 = as_complex_matrix(V2)
    d = V1.shape[0]
    if V2.shape[0] != d or jsd0.dim != d or jsd.dim != d:
        raise DomainError("operators and decompositions have different dimensions")
    U = jsd0.vectors
    W = jsd.vectors
    p0 = jsd0.column_points
    p1 = jsd.column_points
    x2, y1 = p0[:, 0][:, None], p0[:, 1][:, None]
    x1, y2 = p1[:, 0][None, :], p1[:, 1][None, :]
    K = divided_difference_kernel(psi, x1, x2, y1, y2, coincidence_tol)  # (cols0, cols1)
    X1 = W.conj().T @ V1 @ U  # X1[b, a] = w_b* V1 u_a
    X2 = U.conj().T @ V2 @ W  # X2[a, b] = u_a* V2 w_b
    return complex(np.sum(K * X1.T * X2))
