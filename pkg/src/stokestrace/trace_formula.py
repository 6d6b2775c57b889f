"""Two-variable spectral shift field and the evaluation paths of the
Stokes-like trace expression

    I = Tr{ int_{H1^0}^{H1} P[phi1(x, H2^0) - phi1(x, H2)]Q dx
          + int_{H2^0}^{H2} Q[phi2(H1, y) - phi2(H1^0, y)]P dy }

for two commuting pairs ``(H1^0, H2^0)`` and ``(H1, H2)`` reduced by the
projections ``P`` and ``Q`` respectively.  With
``psi = d(phi2)/dx - d(phi1)/dy`` the four independent evaluators are

* :func:`lhs_closed_form_poly` -- monomial sums of matrix powers;
* :func:`lhs_spectral_integral` -- operator line integrals;
* :func:`rhs_xi_integral` -- ``int int psi xi`` over the cells of ``xi``;
* :func:`rhs_divided_difference` -- the divided-difference double integral.

:func:`berg_reduction_experiment` compresses a perturbed system with the
Berg corner projections and follows ``int psi d(mu_N)`` in ``N``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .berg import BergSequence
from .exceptions import DomainError, NumericalFailure
from .fields import ScalarField2D
from .linalg import (
    CommutingTuple,
    JointSpectralDecomposition,
    as_complex_matrix,
    commuting_tuple,
    joint_eigh,
    operator_norm,
    schatten_norm,
)
from .operator_integrals import default_coincidence_tol, doi_pairing, line_integral

__all__ = [
    "PerturbedSystem",
    "SpectralShiftField",
    "BorelMeasure2D",
    "AntiderivativePair",
    "antiderivatives_from_psi",
    "xi_field",
    "lhs_closed_form_poly",
    "lhs_spectral_integral",
    "rhs_xi_integral",
    "rhs_divided_difference",
    "measure_from_xi",
    "psi_from_polynomials",
    "MuConvergenceReport",
    "berg_reduction_experiment",
]

PROJECTION_TOL = 1e-10
REDUCING_TOL = 1e-9
IMAG_TOL = 1e-10
FORM_AGREEMENT_TOL = 1e-10


def _check_projection(p, name):
    p = as_complex_matrix(p)
    defect = max(operator_norm(p @ p - p), operator_norm(p - p.conj().T))
    if defect > PROJECTION_TOL:
        raise DomainError(f"{name} is not an orthogonal projection (defect {defect:.3e})")
    return p


class PerturbedSystem:
    """Two commuting pairs ``(H1^0, H2^0)``, ``(H1, H2)`` with outer
    projections ``P``, ``Q`` and an interval ``[a, b]`` containing all four
    spectra.

    Parameters
    ----------
    tuple0, tuple1 : CommutingTuple or pair of matrices
    P, Q : array_like, optional
        Orthogonal projections (default identity).
    interval : (float, float), optional
        Defaults to the hull of the four spectra.
    jsd0, jsd1 : JointSpectralDecomposition, optional
        Precomputed joint decompositions of the two pairs.
    group_tol : float, optional
        Grouping tolerance passed to :func:`~stokestrace.linalg.joint_eigh`.
    """

    def __init__(self, tuple0, tuple1, P=None, Q=None, interval=None, jsd0=None, jsd1=None,
                 group_tol: Optional[float] = None):
        self.tuple0: CommutingTuple = commuting_tuple(tuple0)
        self.tuple1: CommutingTuple = commuting_tuple(tuple1)
        if self.tuple0.n != 2 or self.tuple1.n != 2:
            raise DomainError("perturbed systems consist of two pairs")
        d = self.tuple0.dim
        if self.tuple1.dim != d:
            raise DomainError("the two pairs act on spaces of different dimension")
        self.P = np.eye(d, dtype=complex) if P is None else _check_projection(P, "P")
        self.Q = np.eye(d, dtype=complex) if Q is None else _check_projection(Q, "Q")
        self.group_tol = group_tol
        self._jsd0 = jsd0
        self._jsd1 = jsd1
        if interval is None:
            pts = np.concatenate([self.jsd0.points.ravel(), self.jsd1.points.ravel()])
            lo, hi = float(pts.min()), float(pts.max())
            if hi <= lo:
                hi = lo + 1.0
            interval = (lo, hi)
        a, b = float(interval[0]), float(interval[1])
        if not a < b:
            raise DomainError(f"interval must satisfy a < b, got [{a}, {b}]")
        self.interval = (a, b)
        if jsd0 is not None or jsd1 is not None or interval is not None:
            slack = 1e-9 * (b - a)
            for j in (self.jsd0, self.jsd1):
                if j.points.min() < a - slack or j.points.max() > b + slack:
                    raise DomainError(f"spectra are not contained in [{a}, {b}]")

    @property
    def dim(self) -> int:
        return self.tuple0.dim

    @cached_property
    def jsd0(self) -> JointSpectralDecomposition:
        if self._jsd0 is None:
            self._jsd0 = joint_eigh(self.tuple0, group_tol=self.group_tol)
        return self._jsd0

    @cached_property
    def jsd1(self) -> JointSpectralDecomposition:
        if self._jsd1 is None:
            self._jsd1 = joint_eigh(self.tuple1, group_tol=self.group_tol)
        return self._jsd1

    @property
    def H0(self) -> list:
        return self.tuple0.matrices()

    @property
    def H(self) -> list:
        return self.tuple1.matrices()

    @property
    def V(self) -> list:
        """``[V1, V2]`` with ``V_j = H_j - H_j^0``."""
        return [h - h0 for h, h0 in zip(self.H, self.H0)]

    def marginal(self, which: str):
        """Spectral decomposition of ``"H1"``, ``"H2"``, ``"H1_0"`` or ``"H2_0"``."""
        table = {"H1": (self.jsd1, 0), "H2": (self.jsd1, 1), "H1_0": (self.jsd0, 0), "H2_0": (self.jsd0, 1)}
        if which not in table:
            raise DomainError(f"unknown operator {which!r}")
        jsd, c = table[which]
        return _with_interval(jsd.marginal(c), self.interval)

    def reducing_defect(self) -> float:
        """``max ||[P, H_j^0]||, ||[Q, H_j]||``."""
        out = 0.0
        for h in self.H0:
            out = max(out, operator_norm(self.P @ h - h @ self.P))
        for h in self.H:
            out = max(out, operator_norm(self.Q @ h - h @ self.Q))
        return out


def _with_interval(sd, interval):
    from .linalg import SpectralDecomposition

    return SpectralDecomposition(sd.values, sd.vectors, sd.ranks, interval)


# -- fields ------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralShiftField:
    """Piecewise-constant field on the rectangle grid spanned by
    ``x_breaks`` and ``y_breaks``; ``values[i, j]`` is its value on the open
    cell ``(x_i, x_{i+1}) x (y_j, y_{j+1})``."""

    x_breaks: np.ndarray
    y_breaks: np.ndarray
    values: np.ndarray

    @property
    def shape(self):
        return self.values.shape

    def cell_areas(self) -> np.ndarray:
        return np.diff(self.x_breaks)[:, None] * np.diff(self.y_breaks)[None, :]

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        ix = np.searchsorted(self.x_breaks, x, side="right") - 1
        iy = np.searchsorted(self.y_breaks, y, side="right") - 1
        inside = (ix >= 0) & (ix < self.values.shape[0]) & (iy >= 0) & (iy < self.values.shape[1])
        out = np.zeros(x.shape, dtype=self.values.dtype)
        out[inside] = self.values[ix[inside], iy[inside]]
        return out

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def to_csv(self, path) -> None:
        """Heatmap grid: one row per cell with its corners and value."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x_lo", "x_hi", "y_lo", "y_hi", "xi"])
            xb, yb = self.x_breaks, self.y_breaks
            for i in range(self.values.shape[0]):
                for j in range(self.values.shape[1]):
                    w.writerow([repr(float(xb[i])), repr(float(xb[i + 1])), repr(float(yb[j])),
                                repr(float(yb[j + 1])), repr(float(np.real(self.values[i, j])))])


@dataclass(frozen=True)
class BorelMeasure2D:
    """Measure ``mu(Delta) = int_Delta xi dx dy`` with density ``xi``."""

    density: SpectralShiftField
    total_variation: float

    def integrate(self, psi: ScalarField2D) -> complex:
        return rhs_xi_integral(psi, self.density)

    def __call__(self, x0, x1, y0, y1) -> complex:
        """Mass of the rectangle ``[x0, x1] x [y0, y1]``."""
        d = self.density
        cx = np.clip(np.diff(np.clip(d.x_breaks, x0, x1)), 0, None)
        cy = np.clip(np.diff(np.clip(d.y_breaks, y0, y1)), 0, None)
        return complex(np.sum(d.values * cx[:, None] * cy[None, :]))


@dataclass(frozen=True)
class AntiderivativePair:
    """Fields ``phi1``, ``phi2`` with ``d(phi2)/dx - d(phi1)/dy = psi``."""

    phi1: ScalarField2D
    phi2: ScalarField2D
    psi: Optional[ScalarField2D] = None

    def curl(self) -> ScalarField2D:
        return self.phi2.partial_x() - self.phi1.partial_y()

    def check(self, samples: int = 64, seed: int = 0, tol: float = 1e-8) -> float:
        """Largest deviation of ``curl`` from ``psi`` at random points; raises
        :class:`NumericalFailure` above ``tol``."""
        if self.psi is None:
            return 0.0
        (a, b), (c, d) = self.psi.domain
        rng = np.random.default_rng(seed)
        x, y = rng.uniform(a, b, samples), rng.uniform(c, d, samples)
        dev = float(np.max(np.abs(self.curl()(x, y) - self.psi(x, y))))
        scale = max(1.0, float(np.max(np.abs(self.psi(x, y)))))
        if dev > tol * scale:
            raise NumericalFailure(f"antiderivative pair does not reproduce psi (deviation {dev:.3e})")
        return dev


def antiderivatives_from_psi(psi: ScalarField2D, lower: Optional[float] = None) -> AntiderivativePair:
    """``phi1 = -1/2 int_a^y psi(x, t) dt`` and ``phi2 = 1/2 int_a^x psi(t, y) dt``
    (gauge terms set to zero)."""
    (a, _), (c, _) = psi.domain
    lx = a if lower is None else lower
    ly = c if lower is None else lower
    phi1 = -0.5 * psi.antiderivative_y(ly)
    phi2 = 0.5 * psi.antiderivative_x(lx)
    return AntiderivativePair(phi1, phi2, psi)


def psi_from_polynomials(p1: ScalarField2D, p2: ScalarField2D) -> ScalarField2D:
    """``psi = d(p2)/dx - d(p1)/dy``."""
    return p2.partial_x() - p1.partial_y()


# -- evaluators -------------------------------------------------------------


def xi_field(sys: PerturbedSystem) -> SpectralShiftField:
    """``xi(x, y) = Tr{Q[E_H1(x) - E_H1^0(x)] P [E_H2(y) - E_H2^0(y)] Q}``.

    Breakpoints are the eigenvalues of ``H1, H1^0`` (resp. ``H2, H2^0``)
    together with ``a`` and ``b``; each cell is evaluated at its midpoint.
    Writing the cumulative projectors as sums of rank-one terms, the value on
    a cell is a two-dimensional prefix sum of
    ``s_a s_b (u_a* P u_b)(u_b* Q u_a)`` over eigenvector columns.
    """
    a, b = sys.interval
    W, U = sys.jsd1.vectors, sys.jsd0.vectors
    Z = np.concatenate([W, U], axis=1)
    p1, p0 = sys.jsd1.column_points, sys.jsd0.column_points
    alpha = np.concatenate([p1[:, 0], p0[:, 0]])
    beta = np.concatenate([p1[:, 1], p0[:, 1]])
    sign = np.concatenate([np.ones(W.shape[1]), -np.ones(U.shape[1])])
    G1 = Z.conj().T @ sys.P @ Z
    G2 = Z.conj().T @ sys.Q @ Z
    M = sign[:, None] * sign[None, :] * G1 * G2.T
    xb = np.unique(np.concatenate([[a, b], alpha]))
    yb = np.unique(np.concatenate([[a, b], beta]))
    ia = np.searchsorted(xb, alpha)
    ib = np.searchsorted(yb, beta)
    H = np.zeros((xb.size, yb.size), dtype=complex)
    np.add.at(H, (ia[:, None], ib[None, :]), M)
    cum = np.cumsum(np.cumsum(H, axis=0), axis=1)[:-1, :-1]
    imag = float(np.max(np.abs(cum.imag))) if cum.size else 0.0
    if imag > IMAG_TOL:
        raise NumericalFailure(f"spectral shift field has imaginary part {imag:.3e}")
    return SpectralShiftField(xb, yb, cum.real.copy())


def rhs_xi_integral(psi: ScalarField2D, xi: SpectralShiftField) -> complex:
    """``int int psi xi dx dy`` as a sum of exact cell integrals."""
    if xi.values.size == 0:
        return 0j
    nz = np.nonzero(xi.values)
    if nz[0].size == 0:
        return 0j
    xb, yb = xi.x_breaks, xi.y_breaks
    i, j = nz
    cells = psi.integral_rect(xb[i], xb[i + 1], yb[j], yb[j + 1])
    return complex(np.sum(xi.values[i, j] * cells))


def measure_from_xi(xi: SpectralShiftField) -> BorelMeasure2D:
    return BorelMeasure2D(xi, float(np.sum(np.abs(xi.values) * xi.cell_areas())))


def _require_polynomial(p, name):
    if not isinstance(p, ScalarField2D) or not p.is_polynomial:
        raise DomainError(f"{name} must be a polynomial field")
    return p.coefficients


def _powers(m: np.ndarray, top: int) -> list:
    out = [np.eye(m.shape[0], dtype=complex)]
    for _ in range(top):
        out.append(out[-1] @ m)
    return out


def lhs_closed_form_poly(sys: PerturbedSystem, p1: ScalarField2D, p2: ScalarField2D) -> complex:
    """Closed form of ``I`` for polynomial ``phi1 = p1``, ``phi2 = p2``:

    ``sum c(i,j)/(i+1) Tr{P[(H2^0)^j - H2^j] Q [H1^(i+1) - (H1^0)^(i+1)]}
    + sum d(r,s)/(s+1) Tr{Q[H1^r - (H1^0)^r] P [H2^(s+1) - (H2^0)^(s+1)]}``

    over all monomials; terms with ``j = 0`` (resp. ``r = 0``) vanish and
    are skipped.  Only matrix products are used.
    """
    c = _require_polynomial(p1, "p1")
    d = _require_polynomial(p2, "p2")
    H10, H20 = sys.H0
    H1, H2 = sys.H
    top = max(c.shape) + max(d.shape)
    pw = {name: _powers(m, top) for name, m in (("H10", H10), ("H20", H20), ("H1", H1), ("H2", H2))}
    P, Q = sys.P, sys.Q
    total = 0j
    for (i, j), cij in np.ndenumerate(c):
        if cij == 0 or j == 0:
            continue
        left = P @ (pw["H20"][j] - pw["H2"][j]) @ Q
        right = pw["H1"][i + 1] - pw["H10"][i + 1]
        total += cij / (i + 1) * np.trace(left @ right)
    for (r, s), drs in np.ndenumerate(d):
        if drs == 0 or r == 0:
            continue
        left = Q @ (pw["H1"][r] - pw["H10"][r]) @ P
        right = pw["H2"][s + 1] - pw["H20"][s + 1]
        total += drs / (s + 1) * np.trace(left @ right)
    return complex(total)


def lhs_spectral_integral(sys: PerturbedSystem, pair: AntiderivativePair, return_forms: bool = False):
    """``I`` from operator line integrals.

    Both the two-difference form and the four-integral form are evaluated;
    they must agree within ``1e-10`` relative to the largest single trace
    involved, otherwise :class:`NumericalFailure` is raised.  Returns the
    two-difference value (and, with ``return_forms``, ``(two, four)``).
    """
    phi1, phi2 = pair.phi1, pair.phi2
    s10, s1 = sys.marginal("H1_0"), sys.marginal("H1")
    s20, s2 = sys.marginal("H2_0"), sys.marginal("H2")
    P, Q = sys.P, sys.Q
    a = sys.interval[0]

    def lx(A, B, C):
        return line_integral(A, B, phi1, C, left=P, right=Q, variable="x", lower=a)

    def ly(A, B, C):
        return line_integral(A, B, phi2, C, left=Q, right=P, variable="y", lower=a)

    # two-difference form
    t1 = np.trace(lx(s10, s1, s20) - lx(s10, s1, s2))
    t2 = np.trace(ly(s20, s2, s1) - ly(s20, s2, s10))
    two = complex(t1 + t2)
    # four-integral form: once around the rectangle of operator pairs
    legs = [
        np.trace(lx(s10, s1, s20)),
        np.trace(ly(s20, s2, s1)),
        np.trace(lx(s1, s10, s2)),
        np.trace(ly(s2, s20, s10)),
    ]
    four = complex(sum(legs))
    scale = max([abs(two), abs(four)] + [abs(x) for x in legs])
    if abs(two - four) > FORM_AGREEMENT_TOL * scale + 1e-300:
        raise NumericalFailure(
            f"four-integral and two-difference forms disagree: {four!r} vs {two!r}"
        )
    return (two, four) if return_forms else two


def rhs_divided_difference(psi: ScalarField2D, sys: PerturbedSystem,
                           coincidence_tol: Optional[float] = None) -> complex:
    """Divided-difference double integral of ``psi`` against
    ``Tr(Q V1 P F0 V2 F)`` with atoms ``((x2, y1), F0)`` of the unperturbed
    pair and ``((x1, y2), F)`` of the perturbed pair.

    Raises
    ------
    DomainError
        If ``P`` does not reduce ``(H1^0, H2^0)`` or ``Q`` does not reduce
        ``(H1, H2)``.
    """
    defect = sys.reducing_defect()
    scale = max(1.0, max(operator_norm(h) for h in sys.H0 + sys.H))
    if defect > REDUCING_TOL * scale:
        raise DomainError(f"P, Q do not reduce the pairs (commutator {defect:.3e})")
    if coincidence_tol is None:
        coincidence_tol = default_coincidence_tol(sys.interval)
    V1, V2 = sys.V
    return doi_pairing(sys.Q @ V1 @ sys.P, V2, sys.jsd0, sys.jsd1, psi, coincidence_tol)


# -- Berg reduction experiment ----------------------------------------------


@dataclass
class MuConvergenceReport:
    """Per-``N`` records of ``int psi d(mu_N)`` for each basis choice.

    ``records`` rows hold: ``basis``, ``N``, ``dim_P0``, ``dim_P``,
    ``integral`` (complex), ``error`` against ``target``, ``C1_N``, ``C2_N``
    (``||P_N^0 (H_j^(N) - H_j^0(N)) P_N||_2``), ``dev_V1``, ``dev_V2``
    (``||P_N (H_j^(N) - H_j^0(N)) P_N^0 - P_N V_j P_N^0||_2``) and
    ``saturated``.  ``bounds`` maps each basis to ``C1 C2 ||psi||_inf`` with
    ``C_j`` maximized over ``N``.
    """

    target: complex
    psi_sup: float
    records: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    def bases(self) -> list:
        out = []
        for r in self.records:
            if r["basis"] not in out:
                out.append(r["basis"])
        return out

    def rows(self, basis: str) -> list:
        return [r for r in self.records if r["basis"] == basis]

    def bound(self, basis: str) -> float:
        c1, c2 = self.constants[basis]
        return c1 * c2 * self.psi_sup

    def within_bound(self, basis: str) -> list:
        b = self.bound(basis)
        return [abs(r["integral"]) <= b for r in self.rows(basis)]

    def monotone(self, basis: str, slack: float = 1e-12) -> bool:
        err = [r["error"] for r in self.rows(basis)]
        return all(e2 <= e1 + slack for e1, e2 in zip(err, err[1:]))

    def conclusive(self, basis: str) -> bool:
        rows = self.rows(basis)
        return bool(rows) and rows[-1]["saturated"]

    def final_error(self, basis: str) -> float:
        return self.rows(basis)[-1]["error"]

    def to_csv(self, path) -> None:
        cols = ["basis", "N", "dim_P0", "dim_P", "integral_re", "integral_im", "error",
                "C1_N", "C2_N", "dev_V1", "dev_V2", "saturated"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self.records:
                w.writerow([r["basis"], r["N"], r["dim_P0"], r["dim_P"], repr(r["integral"].real),
                            repr(r["integral"].imag), repr(r["error"]), repr(r["C1_N"]), repr(r["C2_N"]),
                            repr(r["dev_V1"]), repr(r["dev_V2"]), "true" if r["saturated"] else "false"])


def berg_reduction_experiment(sys: PerturbedSystem, bases: dict, N_list: Sequence[int],
                              p1: ScalarField2D, p2: ScalarField2D,
                              k_cut: int = 50, group_tol: Optional[float] = None) -> MuConvergenceReport:
    """Follow ``int psi d(mu_N)`` along the Berg compressions of ``sys``.

    For each basis both pairs are compressed separately (corner projections
    ``P_N^0`` and ``P_N``).  The compressed system is
    ``((H1^0(N), H2^0(N)), (H1^(N), H2^(N)))`` with ``P = P_N^0`` and
    ``Q = P_N``; its field ``xi_N`` gives ``int psi d(mu_N)``.  The target is
    :func:`lhs_closed_form_poly` of the full system with ``P = Q = I``.

    Parameters
    ----------
    sys : PerturbedSystem
        Full system (its ``P`` and ``Q`` are ignored).
    bases : dict
        Name to :class:`~stokestrace.berg.OrthonormalBasis`.
    N_list : sequence of int
        Increasing levels.
    p1, p2 : ScalarField2D
        Polynomials; ``psi = d(p2)/dx - d(p1)/dy``.
    """
    full = PerturbedSystem(sys.tuple0, sys.tuple1, interval=sys.interval, jsd0=sys.jsd0, jsd1=sys.jsd1)
    target = lhs_closed_form_poly(full, p1, p2)
    psi = psi_from_polynomials(p1, p2)
    psi_on = ScalarField2D.polynomial(psi.coefficients, sys.interval)
    report = MuConvergenceReport(target=target, psi_sup=psi_on.sup_norm())
    V = sys.V
    for name, basis in bases.items():
        seq0 = BergSequence(sys.tuple0, basis, k_cut=k_cut, group_tol=group_tol)
        seq1 = BergSequence(sys.tuple1, basis, k_cut=k_cut, group_tol=group_tol)
        c_max = [0.0, 0.0]
        for N in N_list:
            P0 = seq0.projection(N)
            P1 = seq1.projection(N)
            H0N = seq0.original_operators(N)
            H1N = seq1.original_operators(N)
            sysN = PerturbedSystem(
                H0N, H1N, P=P0, Q=P1, interval=sys.interval,
                jsd0=seq0.joint_decomposition(N, sys.interval),
                jsd1=seq1.joint_decomposition(N, sys.interval),
            )
            integral = rhs_xi_integral(psi_on, xi_field(sysN))
            cs, devs = [], []
            for j in range(2):
                VN = H1N[j] - H0N[j]
                cs.append(schatten_norm(P0 @ VN @ P1, 2))
                devs.append(schatten_norm(P1 @ VN @ P0 - P1 @ V[j] @ P0, 2))
                c_max[j] = max(c_max[j], cs[j])
            report.records.append({
                "basis": name, "N": int(N),
                "dim_P0": seq0.corner(N).dim, "dim_P": seq1.corner(N).dim,
                "integral": integral, "error": abs(integral - target),
                "C1_N": cs[0], "C2_N": cs[1], "dev_V1": devs[0], "dev_V2": devs[1],
                "saturated": seq0.corner(N).saturated and seq1.corner(N).saturated,
            })
        report.constants[name] = tuple(c_max)
    return report
