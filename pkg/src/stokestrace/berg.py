"""Finite-rank corner approximation of a commuting tuple ``0 <= A_i <= I``.

For a basis ``f_1, f_2, ...`` the corner space ``L_N`` is spanned by the
pieces obtained from ``f_1, ..., f_N`` by repeatedly splitting every vector
``v`` into ``E v`` and ``(I - E) v`` for every band projection
``E = E_k^(i)`` with ``k <= N``.  With ``P_N`` the projection onto ``L_N``
the approximants are

    B_i^(N) = sum_{k<=N} 2^-k E_k^(i) + sum_{k>N} 2^-k E_k^(i) (I - P_k),

a commuting family of contractions that increases to ``A_i`` and satisfies
``P_N B_i^(N) P_N = B_i^(N) P_N``.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .exceptions import DomainError, NumericalFailure
from .linalg import (
    CommutingTuple,
    HermitianOperator,
    JointSpectralDecomposition,
    as_complex_matrix,
    certify_hermitian,
    commuting_tuple,
    eigh,
    joint_eigh,
    operator_norm,
    schatten_norm,
)
from .rng import haar_unitary, stream
from .spectral import band_digit, dyadic_partial_sum, dyadic_partial_sum_values

__all__ = [
    "OrthonormalBasis",
    "Rescaling",
    "CornerSpace",
    "BergSequence",
    "BergDiagnostics",
    "TruncationWarning",
    "rescale_to_unit",
    "build_corner_space",
    "build_bn",
    "berg_diagnostics",
    "stated_dimension_bound",
    "piece_dimension_bound",
    "DEFAULT_K_CUT",
]

DEFAULT_K_CUT = 50
PIECE_TOL = 1e-10
RANK_TOL = 1e-10
UNIT_SLACK = 1e-12


class TruncationWarning(UserWarning):
    """The tail of ``B^(N)`` was cut at ``K_cut`` before the corners saturated."""


@dataclass(frozen=True)
class OrthonormalBasis:
    """Orthonormal columns ``f_1, ..., f_D`` of the ambient space."""

    vectors: np.ndarray
    provenance: str = "standard"
    seed: Optional[int] = None

    def __post_init__(self):
        v = as_complex_matrix(self.vectors)
        defect = operator_norm(v.conj().T @ v - np.eye(v.shape[1]))
        if defect > 1e-12:
            raise DomainError(f"basis is not orthonormal (Gram defect {defect:.3e})")
        object.__setattr__(self, "vectors", v)

    @classmethod
    def standard(cls, dim: int) -> "OrthonormalBasis":
        return cls(np.eye(dim, dtype=complex), "standard")

    @classmethod
    def random(cls, dim: int, seed: int) -> "OrthonormalBasis":
        """Haar-random basis drawn from the ``basis`` stream of ``seed``."""
        return cls(haar_unitary(stream(seed, "basis"), dim), "seeded-random", seed)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]


class Rescaling(NamedTuple):
    """``A = scale * C + shift * I``; ``scale`` is ``None`` for ``C = 0``."""

    operator: HermitianOperator
    shift: float
    scale: Optional[float]

    def invert(self, b) -> np.ndarray:
        """Map an operator in the unit picture back: ``(B - shift I) / scale``."""
        if self.scale is None:
            return np.zeros_like(np.asarray(b, dtype=complex))
        b = np.asarray(b, dtype=complex)
        return (b - self.shift * np.eye(b.shape[0])) / self.scale

    def invert_values(self, x):
        if self.scale is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return (np.asarray(x, dtype=float) - self.shift) / self.scale


def rescale_to_unit(c) -> Rescaling:
    """``A = C / (2 ||C||) + I / 2``, so that ``0 <= A <= I``."""
    h = certify_hermitian(c)
    norm = h.norm
    d = h.dim
    if norm == 0.0:
        return Rescaling(certify_hermitian(0.5 * np.eye(d)), 0.5, None)
    scale = 1.0 / (2.0 * norm)
    return Rescaling(certify_hermitian(scale * h.matrix + 0.5 * np.eye(d)), 0.5, scale)


def stated_dimension_bound(N: int, n: int) -> int:
    """``N (2^n - 1)^N + N``."""
    return N * (2 ** n - 1) ** N + N


def piece_dimension_bound(N: int, n: int) -> int:
    """``N 2^(nN)``: every ``f_j`` splits into at most ``2^(nN)`` pieces."""
    return N * 2 ** (n * N)


def _orthonormalize(x: np.ndarray, rank_tol: float = RANK_TOL, max_rank: Optional[int] = None) -> np.ndarray:
    """Orthonormal basis of the column span of ``x``.

    Columns are normalized and orthogonalized one at a time against the
    accepted ones, twice (Gram-Schmidt with re-orthogonalization); a column
    whose residual norm is ``<= rank_tol`` is dropped.
    """
    d = x.shape[0]
    max_rank = d if max_rank is None else max_rank
    q = np.empty((d, min(d, x.shape[1])), dtype=complex)
    r = 0
    for j in range(x.shape[1]):
        v = x[:, j]
        nv = np.linalg.norm(v)
        if nv == 0.0:
            continue
        v = v / nv
        for _ in range(2):
            if r:
                v = v - q[:, :r] @ (q[:, :r].conj().T @ v)
        nr = np.linalg.norm(v)
        if nr > rank_tol:
            q[:, r] = v / nr
            r += 1
            if r >= max_rank:
                break
    return q[:, :r]


@dataclass(frozen=True)
class CornerSpace:
    """Orthonormal basis ``Q`` of ``L_N``; ``P_N = Q Q*``."""

    level: int
    basis: np.ndarray
    pieces: int

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def saturated(self) -> bool:
        return self.dim == self.ambient_dim

    @property
    def projection(self) -> np.ndarray:
        if self.saturated:
            return np.eye(self.ambient_dim, dtype=complex)
        return self.basis @ self.basis.conj().T


def _unit_tuple(t) -> CommutingTuple:
    tup = commuting_tuple(t)
    for op in tup:
        w = np.linalg.eigvalsh(op.matrix)
        if w[0] < -UNIT_SLACK or w[-1] > 1 + UNIT_SLACK:
            raise DomainError(
                f"tuple must satisfy 0 <= A_i <= I; found spectrum in [{w[0]:.6g}, {w[-1]:.6g}]"
            )
    return tup


class BergSequence:
    """Corner spaces ``P_N`` and approximants ``B_i^(N)`` of a commuting
    tuple, computed lazily and cached.

    Parameters
    ----------
    t : CommutingTuple or sequence of matrices
        The tuple.  With ``rescale=True`` every operator ``C_i`` is first
        mapped to ``C_i / (2 ||C_i||) + I / 2``; otherwise it must already
        satisfy ``0 <= A_i <= I``.
    basis : OrthonormalBasis, optional
        Ordered basis ``f_1, ..., f_D`` (default: standard basis).
    k_cut : int
        Last level included in the tail of ``B^(N)``.
    group_tol : float, optional
        Eigenvalue grouping tolerance for the joint decompositions.
    """

    def __init__(self, t, basis: Optional[OrthonormalBasis] = None, k_cut: int = DEFAULT_K_CUT,
                 rescale: bool = True, group_tol: Optional[float] = None):
        tup = commuting_tuple(t)
        self.original = tup
        if rescale:
            self.rescalings = [rescale_to_unit(op) for op in tup]
            self.tuple = commuting_tuple([r.operator for r in self.rescalings])
        else:
            self.rescalings = [Rescaling(op, 0.0, 1.0) for op in tup]
            self.tuple = _unit_tuple(tup)
        self.n = self.tuple.n
        self.dim = self.tuple.dim
        self.basis = basis if basis is not None else OrthonormalBasis.standard(self.dim)
        if self.basis.dim != self.dim:
            raise DomainError("basis dimension does not match the tuple")
        if k_cut < 1:
            raise DomainError("k_cut must be positive")
        self.k_cut = int(k_cut)
        self.group_tol = group_tol
        self.decompositions = [eigh(op, interval=(0.0, 1.0)) for op in self.tuple]
        self._corners: list = []
        self._pieces = np.zeros((self.dim, 0), dtype=complex)
        self._band_cols: dict = {}
        self._band_mats: dict = {}
        self._ops: dict = {}
        self._joint = None

    # -- bands ---------------------------------------------------------------

    def band_vectors(self, i: int, k: int) -> np.ndarray:
        """Orthonormal columns spanning the range of ``E_k^(i)``."""
        key = (i, k)
        if key not in self._band_cols:
            sd = self.decompositions[i]
            mask = band_digit(np.clip(sd.values, 0.0, 1.0), k)
            self._band_cols[key] = sd.vectors[:, mask[sd.column_atom]]
        return self._band_cols[key]

    def band_projection(self, i: int, k: int) -> np.ndarray:
        key = (i, k)
        if key not in self._band_mats:
            v = self.band_vectors(i, k)
            self._band_mats[key] = v @ v.conj().T
        return self._band_mats[key]

    def _split(self, x: np.ndarray, k: int) -> np.ndarray:
        for i in range(self.n):
            v = self.band_vectors(i, k)
            e = v @ (v.conj().T @ x)
            parts = np.concatenate([e, x - e], axis=1)
            keep = np.linalg.norm(parts, axis=0) > PIECE_TOL
            x = parts[:, keep]
        return x

    # -- corner spaces -------------------------------------------------------

    def corner(self, N: int) -> CornerSpace:
        """Corner space ``L_N`` (built incrementally, cached)."""
        if N < 1:
            raise DomainError(f"N must be a positive integer, got {N}")
        while len(self._corners) < N:
            L = len(self._corners)
            if L and self._corners[-1].saturated:
                prev = self._corners[-1]
                self._corners.append(CornerSpace(L + 1, prev.basis, prev.pieces))
                continue
            level = L + 1
            old = self._split(self._pieces, level) if self._pieces.shape[1] else self._pieces
            new = self.basis.vectors[:, L:L + 1] if L < self.dim else np.zeros((self.dim, 0), dtype=complex)
            for k in range(1, level + 1):
                if new.shape[1]:
                    new = self._split(new, k)
            self._pieces = np.concatenate([old, new], axis=1)
            q = _orthonormalize(self._pieces)
            if q.shape[1] == self.dim:
                q = np.eye(self.dim, dtype=complex)
            self._corners.append(CornerSpace(level, q, self._pieces.shape[1]))
        return self._corners[N - 1]

    def projection(self, N: int) -> np.ndarray:
        return self.corner(N).projection

    def saturation_level(self, limit: Optional[int] = None) -> Optional[int]:
        """First ``N <= limit`` (default ``max(D, k_cut)``) with ``P_N = I``."""
        limit = max(self.dim, self.k_cut) if limit is None else limit
        for N in range(1, limit + 1):
            if self.corner(N).saturated:
                return N
        return None

    # -- approximants --------------------------------------------------------

    def operators(self, N: int) -> list:
        """``[B_1^(N), ..., B_n^(N)]`` in the unit picture (cached)."""
        if N not in self._ops:
            self._ops[N] = build_bn(self.tuple, self._corner_provider, N, self.k_cut,
                                    decompositions=self.decompositions)
        return self._ops[N]

    def _corner_provider(self, k: int) -> CornerSpace:
        return self.corner(k)

    def original_operators(self, N: int) -> list:
        """``H_i^(N)``: the approximants mapped back to the original scale."""
        return [r.invert(b.matrix) for r, b in zip(self.rescalings, self.operators(N))]

    def joint_decomposition(self, N: int, interval=None) -> JointSpectralDecomposition:
        """Joint spectral decomposition of ``(H_1^(N), ..., H_n^(N))``.

        Once ``P_N = I`` the tail vanishes and ``B_i^(N) = S_N(A_i)`` is a
        function of ``A_i``; the decomposition of the tuple is then mapped
        instead of recomputed.
        """
        if self.corner(N).saturated:
            if self._joint is None:
                self._joint = joint_eigh(self.tuple, group_tol=self.group_tol, interval=(0.0, 1.0))
            pts = self._joint.points
            mapped = np.column_stack([
                self.rescalings[i].invert_values(dyadic_partial_sum_values(np.clip(pts[:, i], 0.0, 1.0), N))
                for i in range(self.n)
            ])
            iv = interval if interval is not None else (float(mapped.min()), float(mapped.max()))
            return JointSpectralDecomposition(mapped, self._joint.vectors, self._joint.ranks, iv)
        ops = [certify_hermitian(m, tol=1e-9) for m in self.original_operators(N)]
        return joint_eigh(ops, group_tol=self.group_tol, interval=interval)

    def tail_bound(self, N: int, p: float) -> float:
        """``sum_{N<k<=k_cut} 2^-k (rank P_k)^(1/p) + 2^-k_cut D^(1/p)``."""
        ex = 0.0 if np.isinf(p) else 1.0 / p
        total = 0.0
        for k in range(N + 1, self.k_cut + 1):
            c = self.corner(k)
            if c.saturated:
                total += 2.0 ** -(k - 1) * self.dim ** ex  # geometric tail of full ranks
                return total
            total += 2.0 ** -k * c.dim ** ex
        return total + 2.0 ** -self.k_cut * self.dim ** ex


def build_corner_space(t, basis: OrthonormalBasis, N: int):
    """``(P_N, dim L_N)`` for a tuple with ``0 <= A_i <= I``."""
    if N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    seq = BergSequence(t, basis, rescale=False)
    c = seq.corner(N)
    return c.projection, c.dim


def build_bn(t, corner_projections, N: int, K_cut: int = DEFAULT_K_CUT, decompositions=None) -> list:
    """Approximants ``B_i^(N)`` of a tuple ``0 <= A_i <= I``.

    Parameters
    ----------
    t : CommutingTuple or sequence of matrices
    corner_projections : sequence or callable
        ``P_k`` for ``k = 1, 2, ...``: either a sequence indexed from level 1
        (``corner_projections[k - 1]``) or a callable ``k -> CornerSpace``.
    N : int
    K_cut : int
        Last tail level.  The tail stops early at the first ``k`` with
        ``P_k = I``; otherwise a :class:`TruncationWarning` reports the
        residual bound ``2^-K_cut`` when it exceeds ``1e-12``.

    Raises
    ------
    NumericalFailure
        If ``P_N B P_N = B P_N = sum_{k<=N} 2^-k E_k P_N`` fails by more than
        ``1e-10``, or ``B`` is not Hermitian within ``1e-10``.
    """
    tup = _unit_tuple(t) if decompositions is None else commuting_tuple(t)
    d = tup.dim
    if decompositions is None:
        decompositions = [eigh(op, interval=(0.0, 1.0)) for op in tup]

    if callable(corner_projections):
        def proj(k):
            return corner_projections(k).projection
        available = K_cut
    else:
        mats = [np.asarray(p.projection if isinstance(p, CornerSpace) else p, dtype=complex)
                for p in corner_projections]

        def proj(k):
            return mats[k - 1]
        available = min(K_cut, len(mats))
    eye = np.eye(d)

    def band(i, k):
        sd = decompositions[i]
        mask = band_digit(np.clip(sd.values, 0.0, 1.0), k)
        v = sd.vectors[:, mask[sd.column_atom]]
        return v @ v.conj().T

    P_N = proj(N)
    heads = [dyadic_partial_sum(sd, N) for sd in decompositions]
    tails = [np.zeros((d, d), dtype=complex) for _ in range(tup.n)]
    resolved = False
    last = N
    for k in range(N + 1, available + 1):
        Pk = proj(k)
        if operator_norm(Pk - eye) <= 1e-12:
            resolved = True
            break
        comp = eye - Pk
        for i in range(tup.n):
            tails[i] += 2.0 ** -k * (band(i, k) @ comp)
        last = k
    if not resolved and 2.0 ** -last > 1e-12:
        warnings.warn(
            f"tail of B^({N}) cut at level {last} before the corners saturated; "
            f"residual bound 2^-{last} = {2.0 ** -last:.3e}",
            TruncationWarning,
            stacklevel=2,
        )
    out = []
    for i in range(tup.n):
        b = heads[i] + tails[i]
        herm = operator_norm(b - b.conj().T)
        if herm > 1e-10:
            raise NumericalFailure(f"B_{i + 1}^({N}) is not Hermitian (defect {herm:.3e})")
        b = 0.5 * (b + b.conj().T)
        bp = b @ P_N
        defect = max(operator_norm(P_N @ bp - bp), operator_norm(bp - heads[i] @ P_N))
        if defect > 1e-10:
            raise NumericalFailure(f"B_{i + 1}^({N}) P_N is not reduced by P_N (defect {defect:.3e})")
        out.append(HermitianOperator(b, herm))
    return out


@dataclass
class BergDiagnostics:
    """Per-``N`` diagnostic rows of a Berg sequence.

    Every row carries ``N``, operator index ``i`` (1-based), Schatten index
    ``p`` and the measured quantities; see :func:`berg_diagnostics`.
    """

    rows: list = field(default_factory=list)
    n: int = 0
    dim: int = 0

    COLUMNS = (
        "N", "i", "p", "dim", "stated_bound", "piece_bound", "within_stated_bound",
        "approx_error", "tail_bound", "within_tail_bound", "commutator_with_corner",
        "compression_defect", "min_increment_eig", "max_b_commutator", "nesting_defect",
        "b_min_eig", "b_max_eig",
    )

    def column(self, name: str, **where) -> list:
        return [r[name] for r in self.rows if all(r[k] == v for k, v in where.items())]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.COLUMNS)
            for r in self.rows:
                w.writerow([_fmt(r[c]) for c in self.COLUMNS])


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if x is None:
        return ""
    return str(x)


def berg_diagnostics(t, basis: Optional[OrthonormalBasis] = None, N_list: Sequence[int] = (1, 2, 3),
                     p_list: Sequence[float] = (2.0,), k_cut: int = DEFAULT_K_CUT,
                     sequence: Optional[BergSequence] = None) -> BergDiagnostics:
    """Diagnostics of the Berg approximation of a tuple ``0 <= A_i <= I``.

    For each ``N``, operator ``i`` and ``p`` the row records
    ``||A_i - B_i^(N)||_p`` against the tail bound
    ``sum_{k>N} 2^-k (rank P_k)^(1/p)``, ``||[A_i, P_N]||_p``,
    ``||P_N A_i P_N - B_i^(N) P_N||_p``, the least eigenvalue of
    ``B_i^(N+1) - B_i^(N)``, the largest pairwise commutator norm of the
    ``B^(N)``, the nesting defect ``||P_{N+1} P_N - P_N||`` and ``dim L_N``
    against both the stated bound ``N (2^n - 1)^N + N`` and the piece count
    bound ``N 2^(nN)`` (each capped at ``D``).

    Raises
    ------
    DomainError
        If some ``p < n``: the tail estimate holds for ``p >= n`` only.
    """
    seq = sequence if sequence is not None else BergSequence(t, basis, k_cut=k_cut, rescale=False)
    n, d = seq.n, seq.dim
    for p in p_list:
        if p < n:
            raise DomainError(f"Schatten index p = {p} is below n = {n}; the tail estimate needs p >= n")
    out = BergDiagnostics(n=n, dim=d)
    A = [op.matrix for op in seq.tuple]
    for N in N_list:
        c = seq.corner(N)
        P = c.projection
        B = [b.matrix for b in seq.operators(N)]
        Bn = [b.matrix for b in seq.operators(N + 1)]
        Pn = seq.projection(N + 1)
        nesting = operator_norm(Pn @ P - P)
        comm_b = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                comm_b = max(comm_b, operator_norm(B[i] @ B[j] - B[j] @ B[i]))
        pb = min(d, stated_dimension_bound(N, n))
        qb = min(d, piece_dimension_bound(N, n))
        for i in range(n):
            diff = A[i] - B[i]
            comm = A[i] @ P - P @ A[i]
            compress = P @ A[i] @ P - B[i] @ P
            inc = np.linalg.eigvalsh(Bn[i] - B[i])[0]
            wb = np.linalg.eigvalsh(B[i])
            for p in p_list:
                err = schatten_norm(diff, p)
                tb = seq.tail_bound(N, p)
                out.rows.append({
                    "N": int(N), "i": i + 1, "p": float(p), "dim": c.dim,
                    "stated_bound": pb, "piece_bound": qb, "within_stated_bound": c.dim <= pb,
                    "approx_error": err, "tail_bound": tb, "within_tail_bound": err <= tb,
                    "commutator_with_corner": schatten_norm(comm, p),
                    "compression_defect": schatten_norm(compress, p),
                    "min_increment_eig": float(inc), "max_b_commutator": comm_b,
                    "nesting_defect": nesting, "b_min_eig": float(wb[0]), "b_max_eig": float(wb[-1]),
                })
    return out
