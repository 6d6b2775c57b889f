"""Dense complex matrix algebra: Hermitian certification, Schatten norms,
cyclic Jacobi eigendecomposition and joint diagonalization of commuting
Hermitian tuples.

All matrices are plain ``numpy`` arrays of dtype ``complex128``.  The wrapper
types below are immutable records; operations never modify their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .exceptions import (
    CommutationError,
    DomainError,
    HermiticityError,
    NumericalFailure,
)

__all__ = [
    "as_complex_matrix",
    "HermitianOperator",
    "SpectralAtom",
    "SpectralDecomposition",
    "JointAtom",
    "JointSpectralDecomposition",
    "CommutingTuple",
    "certify_hermitian",
    "commuting_tuple",
    "schatten_norm",
    "operator_norm",
    "hs_inner",
    "jacobi_eigh",
    "eigh",
    "joint_eigh",
    "DEFAULT_COMMUTING_TOL",
    "DEFAULT_MAX_SWEEPS",
]

DEFAULT_COMMUTING_TOL = 1e-10
DEFAULT_MAX_SWEEPS = 100
JACOBI_REL_TOL = 1e-13
GROUP_REL_TOL = 1e-8


def as_complex_matrix(m) -> np.ndarray:
    """Validate ``m`` as a finite, square, non-empty matrix and return a
    ``complex128`` copy."""
    a = np.array(m, dtype=complex, copy=True)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise DomainError("zero-dimensional matrices are not accepted")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    return a


def operator_norm(m) -> float:
    """Largest singular value."""
    return schatten_norm(m, np.inf)


@dataclass(frozen=True)
class HermitianOperator:
    """A matrix certified Hermitian within a tolerance.

    ``matrix`` is the symmetrized matrix ``(M + M*)/2``; ``hermiticity_defect``
    is ``||M - M*||`` of the matrix that was certified.
    """

    matrix: np.ndarray
    hermiticity_defect: float = 0.0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def norm(self) -> float:
        return operator_norm(self.matrix)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)


def certify_hermitian(m, tol: Optional[float] = None) -> HermitianOperator:
    """Certify ``m`` as Hermitian.

    Parameters
    ----------
    m : array_like
        Square complex matrix.
    tol : float, optional
        Allowed operator norm of ``m - m*``; defaults to ``1e-12 * dim``.

    Returns
    -------
    HermitianOperator
        Wraps ``(m + m*)/2`` and records the defect.

    Raises
    ------
    HermiticityError
        If the defect exceeds ``tol``.
    """
    if isinstance(m, HermitianOperator):
        return m
    a = as_complex_matrix(m)
    if tol is None:
        tol = 1e-12 * a.shape[0]
    diff = a - a.conj().T
    defect = operator_norm(diff) if np.any(diff) else 0.0
    if defect > tol:
        raise HermiticityError(defect, tol)
    return HermitianOperator(0.5 * (a + a.conj().T), defect)


def schatten_norm(m, p: float = 2) -> float:
    """Schatten ``p``-norm ``(sum sigma_i**p)**(1/p)``; ``p = inf`` gives the
    operator norm."""
    p = float(p)
    if not p >= 1:
        raise DomainError(f"Schatten index must satisfy p >= 1, got {p}")
    a = np.asarray(m.matrix if isinstance(m, HermitianOperator) else m, dtype=complex)
    if a.ndim != 2:
        raise DomainError(f"expected a matrix, got shape {a.shape}")
    if a.size == 0:
        return 0.0
    if p == 2:
        return float(np.linalg.norm(a, "fro"))
    sv = np.linalg.svd(a, compute_uv=False)
    if np.isinf(p):
        return float(sv[0]) if sv.size else 0.0
    top = sv[0]
    if top == 0.0:
        return 0.0
    # scale to avoid overflow for large p
    return float(top * np.sum((sv / top) ** p) ** (1.0 / p))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``Tr(A* B)``, conjugate-linear in ``a``."""
    a = np.asarray(a.matrix if isinstance(a, HermitianOperator) else a)
    b = np.asarray(b.matrix if isinstance(b, HermitianOperator) else b)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


# ---------------------------------------------------------------------------
# Cyclic Jacobi
# ---------------------------------------------------------------------------


def _round_robin(n: int):
    """Pairings of ``range(n)`` into rounds of disjoint pairs (circle method)
    so that every unordered pair occurs exactly once per sweep."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _off_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off, "fro"))


def jacobi_eigh(h, max_sweeps: int = DEFAULT_MAX_SWEEPS, rel_tol: float = JACOBI_REL_TOL):
    """Eigenvalues and eigenvectors of a Hermitian matrix by cyclic Jacobi.

    Each sweep visits every off-diagonal pair once, in round-robin order so
    that the ``n/2`` disjoint rotations of a round are applied together.
    Iteration stops when the off-diagonal Frobenius norm is at most
    ``rel_tol * ||h||_F``.

    Returns
    -------
    w : ndarray of float, shape (n,)
        Eigenvalues in ascending order.
    v : ndarray of complex, shape (n, n)
        Orthonormal eigenvectors as columns, ``h @ v = v * w``.
    """
    a = np.array(h, dtype=complex, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    if n > 1:
        fro = np.linalg.norm(a, "fro")
        thresh = rel_tol * fro
        # pivots this small cannot change the matrix in double precision
        negligible = max(1e-32 * fro, np.finfo(float).tiny)
        rounds = _round_robin(n)
        sweep = 0
        polish = 1  # one extra sweep past the threshold (quadratic convergence)
        while True:
            if _off_norm(a) <= thresh:
                if polish == 0:
                    break
                polish -= 1
            if sweep >= max_sweeps:
                raise NumericalFailure(
                    f"Jacobi iteration did not converge in {max_sweeps} sweeps "
                    f"(off-diagonal norm {_off_norm(a):.3e}, target {thresh:.3e})"
                )
            for p, q in rounds:
                apq = a[p, q]
                mag = np.abs(apq)
                active = mag > negligible
                if not np.any(active):
                    continue
                p, q, apq, mag = p[active], q[active], apq[active], mag[active]
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                cu = np.conj(phase)
                # A <- A J, V <- V J
                for mat in (a, v):
                    cp = mat[:, p]
                    cq = mat[:, q]
                    mat[:, p] = cp * c - cq * (s * cu)
                    mat[:, q] = cp * s + cq * (c * cu)
                # A <- J* A
                rp = a[p, :]
                rq = a[q, :]
                a[p, :] = c[:, None] * rp - (s * phase)[:, None] * rq
                a[q, :] = s[:, None] * rp + (c * phase)[:, None] * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
            sweep += 1
        # rotations accumulate O(sweeps * n * eps) loss of orthogonality in V;
        # two Newton-Schulz steps restore it and Rayleigh quotients follow
        eye = np.eye(n)
        for _ in range(2):
            v = v @ (1.5 * eye - 0.5 * (v.conj().T @ v))
        a = v.conj().T @ np.asarray(h, dtype=complex) @ v
    w = np.diagonal(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


# ---------------------------------------------------------------------------
# Spectral decompositions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralAtom:
    """One eigenvalue together with an orthonormal basis of its eigenspace."""

    value: float
    vectors: np.ndarray

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]

    @property
    def projection(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T


@dataclass(frozen=True)
class JointAtom:
    """A joint eigenvalue point of a commuting tuple and its eigenspace."""

    point: tuple
    vectors: np.ndarray

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]

    @property
    def projection(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T


class _Atomic:
    """Shared storage: eigenvector columns grouped atom by atom."""

    vectors: np.ndarray
    ranks: tuple

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @cached_property
    def starts(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.ranks)]).astype(np.intp)

    @cached_property
    def column_atom(self) -> np.ndarray:
        """Atom index of every eigenvector column."""
        return np.repeat(np.arange(len(self.ranks)), self.ranks)

    def atom_vectors(self, i: int) -> np.ndarray:
        return self.vectors[:, self.starts[i]:self.starts[i + 1]]

    def projections(self) -> list:
        return [self.atom_vectors(i) @ self.atom_vectors(i).conj().T for i in range(len(self.ranks))]

    def __len__(self) -> int:
        return len(self.ranks)


@dataclass(frozen=True)
class SpectralDecomposition(_Atomic):
    """Atomic spectral measure of a Hermitian matrix.

    ``values[i]`` is the eigenvalue of atom ``i``; the columns
    ``vectors[:, starts[i]:starts[i+1]]`` are an orthonormal basis of its
    eigenspace.  ``interval`` contains every eigenvalue.
    """

    values: np.ndarray
    vectors: np.ndarray
    ranks: tuple
    interval: tuple

    @property
    def atoms(self) -> list:
        return [SpectralAtom(float(self.values[i]), self.atom_vectors(i)) for i in range(len(self))]

    @cached_property
    def column_values(self) -> np.ndarray:
        return self.values[self.column_atom]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.column_values) @ self.vectors.conj().T

    def map_values(self, f) -> "SpectralDecomposition":
        """Decomposition of ``f(H)`` for a real, strictly increasing ``f``."""
        vals = np.asarray(f(self.values), dtype=float)
        a, b = f(np.asarray(self.interval, dtype=float))
        return SpectralDecomposition(vals, self.vectors, self.ranks, (float(a), float(b)))


@dataclass(frozen=True)
class JointSpectralDecomposition(_Atomic):
    """Joint atomic spectral measure of a commuting tuple.

    ``points[i]`` holds the joint eigenvalue ``(lambda_1, ..., lambda_n)`` of
    atom ``i``.
    """

    points: np.ndarray
    vectors: np.ndarray
    ranks: tuple
    interval: tuple

    @property
    def atoms(self) -> list:
        return [JointAtom(tuple(float(x) for x in self.points[i]), self.atom_vectors(i)) for i in range(len(self))]

    @cached_property
    def column_points(self) -> np.ndarray:
        return self.points[self.column_atom]

    def reconstruct(self, coordinate: int) -> np.ndarray:
        vals = self.column_points[:, coordinate]
        return (self.vectors * vals) @ self.vectors.conj().T

    def marginal(self, coordinate: int, group_tol: Optional[float] = None) -> SpectralDecomposition:
        """Spectral decomposition of the single operator ``A_coordinate``."""
        vals = self.column_points[:, coordinate]
        order = np.argsort(vals, kind="stable")
        w = vals[order]
        if group_tol is None:
            group_tol = _default_group_tol(w, self.interval)
        runs = _group(w, group_tol)
        values = np.array([w[s:e].mean() for s, e in runs])
        return SpectralDecomposition(values, self.vectors[:, order], tuple(e - s for s, e in runs), self.interval)


def _group(w: np.ndarray, tol: float):
    """Split sorted ``w`` into runs whose consecutive gaps are ``<= tol``."""
    if w.size == 0:
        return []
    breaks = np.nonzero(np.diff(w) > tol)[0] + 1
    bounds = np.concatenate([[0], breaks, [w.size]])
    return [(int(bounds[i]), int(bounds[i + 1])) for i in range(len(bounds) - 1)]


def _default_group_tol(w: np.ndarray, interval) -> float:
    if interval is not None:
        width = float(interval[1] - interval[0])
    else:
        width = float(w[-1] - w[0]) if w.size else 0.0
    if width <= 0:
        width = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    return GROUP_REL_TOL * width


def eigh(
    h,
    group_tol: Optional[float] = None,
    interval: Optional[tuple] = None,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian operator.

    Eigenvalues closer than ``group_tol`` (default ``1e-8 * (b - a)``) are
    merged into one atom whose value is their mean.

    Parameters
    ----------
    h : HermitianOperator or array_like
        Certified (or certifiable) Hermitian matrix.
    group_tol : float, optional
        Coincidence tolerance for merging eigenvalues.
    interval : (float, float), optional
        Interval ``[a, b]`` recorded on the result; must contain the
        spectrum. Defaults to ``[min eig, max eig]``.
    max_sweeps : int
        Jacobi sweep limit.
    """
    op = certify_hermitian(h)
    w, v = jacobi_eigh(op.matrix, max_sweeps=max_sweeps)
    if group_tol is None:
        group_tol = _default_group_tol(w, interval)
    runs = _group(w, group_tol)
    values = np.array([w[s:e].mean() for s, e in runs])
    ranks = tuple(e - s for s, e in runs)
    if interval is None:
        interval = (float(values[0]), float(values[-1]))
    else:
        a, b = float(interval[0]), float(interval[1])
        slack = max(group_tol, 1e-12 * max(1.0, abs(a), abs(b)))
        if values[0] < a - slack or values[-1] > b + slack:
            raise DomainError(
                f"spectrum [{values[0]:.6g}, {values[-1]:.6g}] not inside interval [{a}, {b}]"
            )
        interval = (a, b)
    return SpectralDecomposition(values, v, ranks, interval)


@dataclass(frozen=True)
class CommutingTuple:
    """Hermitian operators that pairwise commute within tolerance."""

    operators: tuple
    commutator_defect: float = 0.0

    @property
    def n(self) -> int:
        return len(self.operators)

    @property
    def dim(self) -> int:
        return self.operators[0].dim

    def matrices(self) -> list:
        return [op.matrix for op in self.operators]

    def __iter__(self):
        return iter(self.operators)

    def __getitem__(self, i):
        return self.operators[i]


def commuting_tuple(ops: Sequence, tol: float = DEFAULT_COMMUTING_TOL, hermitian_tol: Optional[float] = None) -> CommutingTuple:
    """Certify a list of matrices as a commuting Hermitian tuple.

    Raises
    ------
    CommutationError
        If ``max ||[A_i, A_j]||`` exceeds ``tol``.
    """
    if isinstance(ops, CommutingTuple):
        return ops
    herm = tuple(certify_hermitian(op, hermitian_tol) for op in ops)
    if not herm:
        raise DomainError("a commuting tuple needs at least one operator")
    dims = {op.dim for op in herm}
    if len(dims) != 1:
        raise DomainError(f"operators have different dimensions: {sorted(dims)}")
    defect = 0.0
    for i in range(len(herm)):
        for j in range(i + 1, len(herm)):
            a, b = herm[i].matrix, herm[j].matrix
            defect = max(defect, operator_norm(a @ b - b @ a))
    if defect > tol:
        raise CommutationError(defect, tol)
    return CommutingTuple(herm, defect)


def joint_eigh(
    t,
    group_tol: Optional[float] = None,
    interval: Optional[tuple] = None,
    commuting_tol: float = DEFAULT_COMMUTING_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> JointSpectralDecomposition:
    """Simultaneous diagonalization of a commuting tuple by recursive block
    compression.

    The first operator is diagonalized; every later operator is compressed
    onto each eigenblock found so far and diagonalized there, refining the
    blocks.  The order of atoms is lexicographic in the joint points.
    """
    tup = commuting_tuple(t, commuting_tol)
    mats = tup.matrices()
    dim = tup.dim
    if group_tol is None:
        if interval is not None:
            width = float(interval[1] - interval[0])
        else:
            width = 2.0 * max(op.norm for op in tup.operators)
        group_tol = GROUP_REL_TOL * (width if width > 0 else 1.0)
    herm_tol = max(1e-12 * dim, 1e-10 * max(1.0, max(op.norm for op in tup.operators)))

    blocks = [((), np.eye(dim, dtype=complex))]
    for m in mats:
        refined = []
        for point, basis in blocks:
            comp = basis.conj().T @ m @ basis
            defect = operator_norm(comp - comp.conj().T) if comp.shape[0] > 1 else abs(comp[0, 0].imag)
            if defect > herm_tol:
                raise NumericalFailure(
                    f"block compression is not Hermitian (defect {defect:.3e})"
                )
            w, v = jacobi_eigh(0.5 * (comp + comp.conj().T), max_sweeps=max_sweeps)
            sub = basis @ v
            for s, e in _group(w, group_tol):
                refined.append((point + (float(w[s:e].mean()),), sub[:, s:e]))
        blocks = refined
    points = np.array([p for p, _ in blocks], dtype=float)
    vectors = np.concatenate([b for _, b in blocks], axis=1)
    ranks = tuple(b.shape[1] for _, b in blocks)
    if interval is None:
        interval = (float(points.min()), float(points.max()))
    return JointSpectralDecomposition(points, vectors, ranks, (float(interval[0]), float(interval[1])))
