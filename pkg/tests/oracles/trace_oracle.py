"""Independent oracle for frozen trace identity values.

Uses LAPACK ``numpy.linalg.eigh`` for the spectral projectors, evaluates the
shift field cell by cell from its trace definition at cell midpoints and
integrates the polynomial exactly with ``numpy.polynomial``.  Shares no code
with the package beyond the seeded generator that produces the operators.

Run ``python3 tests/oracles/trace_oracle.py`` to regenerate the constants in
``tests/test_trace_formula.py``.
"""

import numpy as np
from numpy.polynomial import polynomial as P

from stokestrace.harness import gen_perturbed_system

# psi(x, y) = sum c[i, j] x^i y^j
PSI_COEFFS = np.array([[0.5, -1.0, 0.25], [2.0, 0.0, 0.0], [-0.75, 0.0, 0.0]])
CASES = [(0, 6, 0.5), (1, 6, 0.5), (2, 5, 1.5)]


def cumulative(h, lam):
    w, v = np.linalg.eigh(h)
    sel = v[:, w <= lam]
    return sel @ sel.conj().T


def xi_cells(h0, h):
    xs = np.unique(np.concatenate([np.linalg.eigvalsh(h0[0]), np.linalg.eigvalsh(h[0]), [-1.0, 1.0]]))
    ys = np.unique(np.concatenate([np.linalg.eigvalsh(h0[1]), np.linalg.eigvalsh(h[1]), [-1.0, 1.0]]))
    out = []
    for i in range(xs.size - 1):
        xm = 0.5 * (xs[i] + xs[i + 1])
        dx = cumulative(h[0], xm) - cumulative(h0[0], xm)
        for j in range(ys.size - 1):
            ym = 0.5 * (ys[j] + ys[j + 1])
            dy = cumulative(h[1], ym) - cumulative(h0[1], ym)
            out.append((xs[i], xs[i + 1], ys[j], ys[j + 1], np.trace(dx @ dy)))
    return out


def psi_integral(x0, x1, y0, y1):
    ix = P.polyint(PSI_COEFFS, axis=0)
    ixy = P.polyint(ix, axis=1)
    f = lambda x, y: P.polyval2d(x, y, ixy)
    return f(x1, y1) - f(x0, y1) - f(x1, y0) + f(x0, y0)


def value(seed, dim, eps):
    sys = gen_perturbed_system(seed, dim, eps)
    return sum(t * psi_integral(*c) for *c, t in xi_cells(sys.H0, sys.H))


if __name__ == "__main__":
    for seed, dim, eps in CASES:
        v = complex(value(seed, dim, eps))
        print(f"({seed}, {dim}, {eps}, {v.real!r}),")
