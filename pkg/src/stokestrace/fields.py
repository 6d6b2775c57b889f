"""Bivariate scalar fields on ``[a, b] x [c, d]``.

A :class:`ScalarField2D` is a piecewise polynomial on a tensor grid: each cell
carries a local polynomial in ``(x - ox, y - oy)``.  Two variants are built
from it:

* ``ScalarField2D.polynomial`` -- one cell, origin 0, the global coefficient
  matrix ``c[i, j]`` of ``x**i * y**j``;
* ``ScalarField2D.sampled`` -- values on a grid, bilinear in every cell.

Every integral used downstream (line antiderivatives, rectangle integrals,
divided-difference means) is evaluated in closed form.  Outside the knot
range the edge cells are extended polynomially.
"""

from __future__ import annotations

from math import comb
from typing import Optional

import numpy as np

from .exceptions import DomainError

__all__ = ["ScalarField2D"]


def _as_knots(k, name):
    k = np.asarray(k, dtype=float)
    if k.ndim != 1 or k.size < 2:
        raise DomainError(f"{name} must be a 1-d array with at least two knots")
    if not np.all(np.diff(k) > 0):
        raise DomainError(f"{name} must be strictly increasing")
    if not np.all(np.isfinite(k)):
        raise DomainError(f"{name} must be finite")
    return k


def _power_means(u, v, degree):
    """``h_i(u, v) = (u**i + u**(i-1) v + ... + v**i) / (i + 1)`` for
    ``i = 0..degree``, stacked on a new last axis.

    ``h_i(u, v) * (u - v)`` equals ``(u**(i+1) - v**(i+1)) / (i + 1)``, so this
    is the mean of ``t**i`` over ``[v, u]`` without cancellation.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    out = np.empty(u.shape + (degree + 1,), dtype=np.result_type(u, v, float))
    # complete homogeneous sums  s_i = sum_k u^k v^(i-k),  s_i = u*s_{i-1} + v^i
    s = np.ones_like(u, dtype=out.dtype)
    vp = np.ones_like(u, dtype=out.dtype)
    out[..., 0] = 1.0
    for i in range(1, degree + 1):
        vp = vp * v
        s = u * s + vp
        out[..., i] = s / (i + 1)
    return out


class ScalarField2D:
    """Piecewise polynomial field on a tensor grid.

    Parameters
    ----------
    x_knots, y_knots : array_like
        Strictly increasing cell boundaries.
    coeffs : array_like, shape (nx, ny, dx + 1, dy + 1)
        ``coeffs[cx, cy, i, j]`` multiplies ``(x - x_origin[cx])**i *
        (y - y_origin[cy])**j`` on cell ``(cx, cy)``.
    x_origin, y_origin : array_like, optional
        Expansion points per cell (default: left knot of each cell).
    kind : str
        ``"polynomial"``, ``"sampled"`` or ``"piecewise"``; informational.
    """

    def __init__(self, x_knots, y_knots, coeffs, x_origin=None, y_origin=None, kind="piecewise"):
        self.x_knots = _as_knots(x_knots, "x_knots")
        self.y_knots = _as_knots(y_knots, "y_knots")
        c = np.asarray(coeffs, dtype=complex)
        nx, ny = self.x_knots.size - 1, self.y_knots.size - 1
        if c.ndim != 4 or c.shape[:2] != (nx, ny):
            raise DomainError(f"coeffs must have shape ({nx}, {ny}, dx+1, dy+1), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise DomainError("field coefficients must be finite")
        self.coeffs = c
        self.x_origin = self.x_knots[:-1].copy() if x_origin is None else np.asarray(x_origin, dtype=float)
        self.y_origin = self.y_knots[:-1].copy() if y_origin is None else np.asarray(y_origin, dtype=float)
        self.kind = kind

    # -- constructors --------------------------------------------------------

    @classmethod
    def polynomial(cls, coeffs, domain=(0.0, 1.0)) -> "ScalarField2D":
        """Exact polynomial ``sum c[i, j] x**i y**j`` on ``domain``.

        ``domain`` is either ``(a, b)`` (used for both variables) or
        ``((a, b), (c, d))``.
        """
        c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
        if c.ndim != 2:
            raise DomainError("polynomial coefficients must form a 2-d array")
        (a, b), (cc, d) = _split_domain(domain)
        return cls([a, b], [cc, d], c[None, None], [0.0], [0.0], kind="polynomial")

    @classmethod
    def constant(cls, value, domain=(0.0, 1.0)) -> "ScalarField2D":
        return cls.polynomial([[value]], domain)

    @classmethod
    def sampled(cls, x_knots, y_knots, values) -> "ScalarField2D":
        """Bilinear interpolant of ``values[ix, iy]`` at ``(x_knots[ix],
        y_knots[iy])``."""
        xk = _as_knots(x_knots, "x_knots")
        yk = _as_knots(y_knots, "y_knots")
        v = np.asarray(values, dtype=complex)
        if v.shape != (xk.size, yk.size):
            raise DomainError(f"values must have shape {(xk.size, yk.size)}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("sampled values must be finite")
        hx = np.diff(xk)[:, None]
        hy = np.diff(yk)[None, :]
        v00, v10, v01, v11 = v[:-1, :-1], v[1:, :-1], v[:-1, 1:], v[1:, 1:]
        c = np.empty((xk.size - 1, yk.size - 1, 2, 2), dtype=complex)
        c[..., 0, 0] = v00
        c[..., 1, 0] = (v10 - v00) / hx
        c[..., 0, 1] = (v01 - v00) / hy
        c[..., 1, 1] = (v11 - v10 - v01 + v00) / (hx * hy)
        return cls(xk, yk, c, kind="sampled")

    @classmethod
    def sample_function(cls, f, x_knots, y_knots) -> "ScalarField2D":
        """Bilinear interpolant of a callable ``f(x, y)`` on the given grid."""
        xx, yy = np.meshgrid(np.asarray(x_knots, float), np.asarray(y_knots, float), indexing="ij")
        return cls.sampled(x_knots, y_knots, f(xx, yy))

    # -- structure -----------------------------------------------------------

    @property
    def domain(self):
        return (float(self.x_knots[0]), float(self.x_knots[-1])), (float(self.y_knots[0]), float(self.y_knots[-1]))

    @property
    def is_polynomial(self) -> bool:
        return self.coeffs.shape[:2] == (1, 1) and self.x_origin[0] == 0.0 and self.y_origin[0] == 0.0

    @property
    def coefficients(self) -> np.ndarray:
        """Global monomial coefficients ``c[i, j]`` (polynomial variant only)."""
        if not self.is_polynomial:
            raise DomainError("field is not a global polynomial")
        return self.coeffs[0, 0]

    @property
    def degree(self):
        return self.coeffs.shape[2] - 1, self.coeffs.shape[3] - 1

    def __repr__(self):
        nx, ny = self.coeffs.shape[:2]
        return f"ScalarField2D(kind={self.kind!r}, cells={nx}x{ny}, degree={self.degree}, domain={self.domain})"

    def _cell(self, knots, t):
        idx = np.searchsorted(knots, t, side="right") - 1
        return np.clip(idx, 0, knots.size - 2)

    # -- evaluation ----------------------------------------------------------

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        cx = self._cell(self.x_knots, x)
        cy = self._cell(self.y_knots, y)
        dx, dy = self.degree
        px = (x - self.x_origin[cx])[..., None] ** np.arange(dx + 1)
        py = (y - self.y_origin[cy])[..., None] ** np.arange(dy + 1)
        c = self.coeffs[cx, cy]
        return np.einsum("...ij,...i,...j->...", c, px, py)

    def swap(self) -> "ScalarField2D":
        """The field ``(x, y) -> f(y, x)``."""
        return ScalarField2D(
            self.y_knots, self.x_knots, np.transpose(self.coeffs, (1, 0, 3, 2)),
            self.y_origin, self.x_origin, self.kind,
        )

    # -- calculus ------------------------------------------------------------

    def partial_x(self) -> "ScalarField2D":
        dx, _ = self.degree
        if dx == 0:
            c = np.zeros_like(self.coeffs)
        else:
            c = self.coeffs[:, :, 1:, :] * np.arange(1, dx + 1)[:, None]
        return ScalarField2D(self.x_knots, self.y_knots, c, self.x_origin, self.y_origin, self._derived_kind())

    def partial_y(self) -> "ScalarField2D":
        return self.swap().partial_x().swap()

    def antiderivative_x(self, lower: Optional[float] = None) -> "ScalarField2D":
        """``G(x, y) = integral_{lower}^{x} f(t, y) dt`` (``lower`` defaults to
        the left end of the domain)."""
        if lower is None:
            lower = self.x_knots[0]
        nx, ny, di, dj = self.coeffs.shape
        c = self.coeffs
        inv = 1.0 / np.arange(1, di + 1)
        out = np.zeros((nx, ny, di + 1, dj), dtype=complex)
        out[:, :, 1:, :] = c * inv[:, None]
        acc = np.zeros((ny, dj), dtype=complex)
        for cx in range(nx):
            o = self.x_origin[cx]
            k0 = self.x_knots[cx]
            k1 = self.x_knots[cx + 1]
            p0 = (k0 - o) ** np.arange(1, di + 1) * inv
            p1 = (k1 - o) ** np.arange(1, di + 1) * inv
            out[cx, :, 0, :] = acc - np.einsum("yij,i->yj", c[cx], p0)
            acc = acc + np.einsum("yij,i->yj", c[cx], p1 - p0)
        g = ScalarField2D(self.x_knots, self.y_knots, out, self.x_origin, self.y_origin, self._derived_kind())
        # subtract G(lower, y), a piecewise polynomial in y on the same y cells
        cl = int(self._cell(self.x_knots, np.asarray(lower)))
        pw = (lower - self.x_origin[cl]) ** np.arange(di + 1)
        at_lower = np.einsum("yij,i->yj", out[cl], pw)
        g.coeffs[:, :, 0, :] -= at_lower[None]
        return g

    def antiderivative_y(self, lower: Optional[float] = None) -> "ScalarField2D":
        return self.swap().antiderivative_x(lower).swap()

    def _derived_kind(self):
        return "polynomial" if self.is_polynomial else "piecewise"

    # -- means and integrals -------------------------------------------------

    def _axis_weights(self, knots, origin, p, q, degree, tol):
        """Cell weights and local power means of ``t**i`` for the segment
        between ``p`` and ``q`` (averaging direction irrelevant).  Segments
        no longer than ``tol`` collapse to the point ``p``."""
        lo = np.minimum(p, q)
        hi = np.maximum(p, q)
        left = np.concatenate([[-np.inf], knots[1:-1]])
        right = np.concatenate([knots[1:-1], [np.inf]])
        clo = np.maximum(lo[:, None], left[None, :])
        chi = np.minimum(hi[:, None], right[None, :])
        length = np.clip(chi - clo, 0.0, None)
        total = length.sum(axis=1)
        point = (hi - lo) <= tol
        w = np.where(total[:, None] > 0, length / np.where(total > 0, total, 1.0)[:, None], 0.0)
        u = np.where(length > 0, chi - origin[None, :], 0.0)
        v = np.where(length > 0, clo - origin[None, :], 0.0)
        if np.any(point | (total <= 0)):
            deg = point | (total <= 0)
            cell = self._cell(knots, p[deg])
            w[deg] = 0.0
            w[deg, cell] = 1.0
            loc = p[deg] - origin[cell]
            u[deg] = 0.0
            v[deg] = 0.0
            u[deg, cell] = loc
            v[deg, cell] = loc
        return w, _power_means(u, v, degree)

    def rect_mean(self, x1, x2, y1, y2, tol: float = 0.0):
        """Mean of the field over the rectangle spanned by ``x1, x2`` and
        ``y1, y2``.

        This is ``[int_{x2}^{x1} int_{y2}^{y1} f] / ((x1 - x2)(y1 - y2))``.
        When ``|x1 - x2| <= tol`` the x-average is replaced by evaluation at
        ``x1`` (the coincidence limit), likewise for ``y``.  Arguments
        broadcast against each other.
        """
        x1, x2, y1, y2 = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (x1, x2, y1, y2)))
        shape = x1.shape
        x1, x2, y1, y2 = (t.ravel() for t in (x1, x2, y1, y2))
        dx, dy = self.degree
        wx, hx = self._axis_weights(self.x_knots, self.x_origin, x1, x2, dx, tol)
        wy, hy = self._axis_weights(self.y_knots, self.y_origin, y1, y2, dy, tol)
        tx = np.einsum("mx,mxi->mxi", wx, hx)
        ty = np.einsum("my,myj->myj", wy, hy)
        out = np.empty(x1.size, dtype=complex)
        step = 4096
        for s in range(0, x1.size, step):
            part = np.einsum("mxi,xyij->myj", tx[s:s + step], self.coeffs, optimize=True)
            out[s:s + step] = np.einsum("myj,myj->m", part, ty[s:s + step])
        return out.reshape(shape)

    def line_mean_x(self, x1, x2, y, tol: float = 0.0):
        """``(1/(x1 - x2)) int_{x2}^{x1} f(t, y) dt``; point value at
        coincidence."""
        return self.rect_mean(x1, x2, y, y, tol)

    def integral_rect(self, x0, x1, y0, y1):
        """``int_{x0}^{x1} int_{y0}^{y1} f(x, y) dy dx`` (signed)."""
        x0, x1, y0, y1 = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (x0, x1, y0, y1)))
        return (x1 - x0) * (y1 - y0) * self.rect_mean(x1, x0, y1, y0)

    def integral_x(self, x0, x1, y):
        """``int_{x0}^{x1} f(t, y) dt`` (signed)."""
        x0, x1, y = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (x0, x1, y)))
        return (x1 - x0) * self.rect_mean(x1, x0, y, y)

    def integral_y(self, x, y0, y1):
        """``int_{y0}^{y1} f(x, t) dt`` (signed)."""
        x, y0, y1 = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (x, y0, y1)))
        return (y1 - y0) * self.rect_mean(x, x, y1, y0)

    def sup_norm(self, grid: int = 257) -> float:
        """Estimate of ``max |f|`` over the domain: dense grid including every
        knot, refined by bounded local optimization from the best points."""
        from scipy.optimize import minimize

        (a, b), (c, d) = self.domain
        xs = np.union1d(np.linspace(a, b, grid), self.x_knots)
        ys = np.union1d(np.linspace(c, d, grid), self.y_knots)
        vals = np.abs(self(xs[:, None], ys[None, :]))
        best = float(vals.max())
        flat = np.argsort(vals.ravel())[-5:]
        for k in flat:
            i, j = np.unravel_index(k, vals.shape)
            res = minimize(
                lambda z: -abs(complex(self(z[0], z[1]))),
                x0=[xs[i], ys[j]],
                bounds=[(a, b), (c, d)],
                method="L-BFGS-B",
            )
            best = max(best, -float(res.fun))
        return best

    # -- algebra -------------------------------------------------------------

    def _rebased(self, other: "ScalarField2D") -> "ScalarField2D":
        """Re-express a global polynomial on ``other``'s cells and origins."""
        c = self.coefficients
        di, dj = c.shape
        nx, ny = other.coeffs.shape[:2]
        out = np.zeros((nx, ny, di, dj), dtype=complex)
        bx = np.array([[comb(i, k) if k <= i else 0 for i in range(di)] for k in range(di)], dtype=float)
        by = np.array([[comb(j, k) if k <= j else 0 for j in range(dj)] for k in range(dj)], dtype=float)
        for cx in range(nx):
            ox = other.x_origin[cx]
            # (x)^i = sum_k comb(i,k) ox^(i-k) (x-ox)^k
            tx = bx * np.array([[ox ** (i - k) if k <= i else 0.0 for i in range(di)] for k in range(di)])
            for cy in range(ny):
                oy = other.y_origin[cy]
                ty = by * np.array([[oy ** (j - k) if k <= j else 0.0 for j in range(dj)] for k in range(dj)])
                out[cx, cy] = tx @ c @ ty.T
        return ScalarField2D(other.x_knots, other.y_knots, out, other.x_origin, other.y_origin, "piecewise")

    def _same_grid(self, other) -> bool:
        return (
            self.x_knots.shape == other.x_knots.shape
            and self.y_knots.shape == other.y_knots.shape
            and np.array_equal(self.x_knots, other.x_knots)
            and np.array_equal(self.y_knots, other.y_knots)
            and np.array_equal(self.x_origin, other.x_origin)
            and np.array_equal(self.y_origin, other.y_origin)
        )

    def __add__(self, other):
        if np.isscalar(other):
            other = ScalarField2D.constant(other, self.domain)
        if not isinstance(other, ScalarField2D):
            return NotImplemented
        a, b = self, other
        if not a._same_grid(b):
            if b.is_polynomial:
                b = b._rebased(a)
            elif a.is_polynomial:
                a = a._rebased(b)
            else:
                raise DomainError("cannot add piecewise fields on different grids")
        di = max(a.degree[0], b.degree[0]) + 1
        dj = max(a.degree[1], b.degree[1]) + 1
        c = np.zeros(a.coeffs.shape[:2] + (di, dj), dtype=complex)
        c[:, :, : a.coeffs.shape[2], : a.coeffs.shape[3]] += a.coeffs
        c[:, :, : b.coeffs.shape[2], : b.coeffs.shape[3]] += b.coeffs
        kind = a.kind if a.kind == b.kind else "piecewise"
        if kind == "polynomial":
            # keep the union of both domains for polynomials
            (ax0, ax1), (ay0, ay1) = a.domain
            (bx0, bx1), (by0, by1) = b.domain
            return ScalarField2D([min(ax0, bx0), max(ax1, bx1)], [min(ay0, by0), max(ay1, by1)], c, [0.0], [0.0], "polynomial")
        return ScalarField2D(a.x_knots, a.y_knots, c, a.x_origin, a.y_origin, kind)

    __radd__ = __add__

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return ScalarField2D(self.x_knots, self.y_knots, self.coeffs * scalar, self.x_origin, self.y_origin, self.kind)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other


def _split_domain(domain):
    d = np.asarray(domain, dtype=float)
    if d.shape == (2,):
        a, b = float(d[0]), float(d[1])
        if not a < b:
            raise DomainError(f"interval must satisfy a < b, got [{a}, {b}]")
        return (a, b), (a, b)
    if d.shape == (2, 2):
        (a, b), (c, e) = d
        if not (a < b and c < e):
            raise DomainError(f"degenerate domain {domain}")
        return (float(a), float(b)), (float(c), float(e))
    raise DomainError(f"domain must be (a, b) or ((a, b), (c, d)), got {domain}")
