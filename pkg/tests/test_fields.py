import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad, quad

from stokestrace.exceptions import DomainError
from stokestrace.fields import ScalarField2D

COEFFS = np.array([[1.0, -2.0, 0.5], [0.25, 3.0, 0.0], [-1.5, 0.0, 0.0]])


def poly():
    return ScalarField2D.polynomial(COEFFS, (-1.0, 2.0))


def direct(x, y):
    return sum(COEFFS[i, j] * x ** i * y ** j for i in range(3) for j in range(3))


def test_polynomial_evaluation():
    f = poly()
    x = np.linspace(-1, 2, 7)
    assert np.allclose(f(x, x[::-1]), direct(x, x[::-1]))
    assert f.is_polynomial and f.degree == (2, 2)


def test_partials_and_swap():
    f = poly()
    x, y = 0.3, -0.7
    assert complex(f.partial_x()(x, y)) == pytest.approx(0.25 + 3.0 * y - 3.0 * x)
    assert complex(f.partial_y()(x, y)) == pytest.approx(-2.0 + 1.0 * y + 3.0 * x)
    assert complex(f.swap()(y, x)) == pytest.approx(complex(f(x, y)))


@pytest.mark.parametrize("lower", [None, 0.0, 1.3])
def test_antiderivatives_are_exact(lower):
    f = poly()
    gx = f.antiderivative_x(lower)
    gy = f.antiderivative_y(lower)
    lo = -1.0 if lower is None else lower
    for x, y in [(0.4, 1.1), (-0.9, 0.0), (1.7, -0.5)]:
        ox = quad(lambda t: direct(t, y), lo, x)[0]
        oy = quad(lambda t: direct(x, t), lo, y)[0]
        assert complex(gx(x, y)) == pytest.approx(ox, abs=1e-12)
        assert complex(gy(x, y)) == pytest.approx(oy, abs=1e-12)
    assert gx.is_polynomial and gy.is_polynomial


def test_integral_rect_against_quadrature():
    f = poly()
    got = complex(f.integral_rect(-0.5, 1.5, 0.2, 1.9))
    want = dblquad(lambda y, x: direct(x, y), -0.5, 1.5, 0.2, 1.9)[0]
    assert got == pytest.approx(want, rel=1e-12)
    # signed orientation
    assert complex(f.integral_rect(1.5, -0.5, 0.2, 1.9)) == pytest.approx(-want, rel=1e-12)


def test_line_integrals():
    f = poly()
    assert complex(f.integral_x(-0.3, 1.2, 0.8)) == pytest.approx(quad(lambda t: direct(t, 0.8), -0.3, 1.2)[0])
    assert complex(f.integral_y(0.8, 1.2, -0.3)) == pytest.approx(quad(lambda t: direct(0.8, t), 1.2, -0.3)[0])


def test_rect_mean_coincidence_limit():
    f = ScalarField2D.polynomial([[0, 0], [0, 1.0]], (0, 3))  # xy
    assert complex(f.rect_mean(2.0, 2.0, 1.0, 0.0)) == pytest.approx(1.0)
    assert complex(f.rect_mean(2.0, 2.0 + 1e-14, 1.0, 0.0, tol=1e-9)) == pytest.approx(1.0)


def test_rect_mean_broadcasts():
    f = poly()
    x1 = np.array([0.1, 0.5, 1.0])
    out = f.rect_mean(x1, 0.0, 1.0, 0.5)
    assert out.shape == (3,)
    assert complex(out[1]) == pytest.approx(complex(f.rect_mean(0.5, 0.0, 1.0, 0.5)))


def test_sampled_is_bilinear_interpolant():
    xk = np.array([0.0, 0.5, 2.0])
    yk = np.array([-1.0, 1.0])
    vals = np.array([[1.0, 2.0], [0.0, -1.0], [4.0, 3.0]])
    f = ScalarField2D.sampled(xk, yk, vals)
    for i, x in enumerate(xk):
        for j, y in enumerate(yk):
            assert complex(f(x, y)) == pytest.approx(vals[i, j])
    assert complex(f(0.25, 0.0)) == pytest.approx(np.mean([1.0, 2.0, 0.0, -1.0]))
    # bilinear cells integrate exactly
    want = dblquad(lambda y, x: f(x, y).real, 0.0, 2.0, -1.0, 1.0)[0]
    assert complex(f.integral_rect(0.0, 2.0, -1.0, 1.0)) == pytest.approx(want, rel=1e-10)


def test_sampled_antiderivative_matches_quadrature():
    f = ScalarField2D.sample_function(lambda x, y: np.sin(3 * x) * np.cos(y), np.linspace(0, 1, 6), np.linspace(0, 2, 4))
    g = f.antiderivative_x(0.3)
    for x, y in [(0.9, 0.4), (0.05, 1.7)]:
        assert complex(g(x, y)).real == pytest.approx(quad(lambda t: f(t, y).real, 0.3, x)[0], abs=1e-12)


def test_algebra():
    f = poly()
    g = ScalarField2D.polynomial([[2.0, 1.0]], (-1.0, 2.0))
    h = 2 * f - g + 1.0
    assert complex(h(0.3, 0.4)) == pytest.approx(2 * direct(0.3, 0.4) - (2 + 0.4) + 1)
    s = ScalarField2D.sample_function(lambda x, y: x + y, [-1.0, 0.5, 2.0], [-1.0, 2.0])
    assert complex((s + f)(0.1, 0.2)) == pytest.approx(0.3 + direct(0.1, 0.2))


def test_sup_norm():
    f = ScalarField2D.polynomial([[0.0, 0.0], [0.0, 1.0]], (-1.0, 2.0))
    assert f.sup_norm() == pytest.approx(4.0)
    g = ScalarField2D.polynomial([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]], (-1.0, 1.0))
    assert g.sup_norm() == pytest.approx(2.0)


def test_invalid_inputs():
    with pytest.raises(DomainError):
        ScalarField2D.sampled([0.0, 0.0, 1.0], [0.0, 1.0], np.zeros((3, 2)))
    with pytest.raises(DomainError):
        ScalarField2D.sampled([0.0, 1.0], [0.0, 1.0], np.zeros((3, 2)))
    with pytest.raises(DomainError):
        ScalarField2D.sampled([0.0, 1.0], [0.0, 1.0], [[np.inf, 0.0], [0.0, 0.0]])
    with pytest.raises(DomainError):
        ScalarField2D.sampled([0.5, 1.0], [0.0, 1.0], np.zeros((2, 2))).coefficients


@settings(max_examples=30, deadline=None)
@given(x1=st.floats(-1, 2), x2=st.floats(-1, 2), y1=st.floats(-1, 2), y2=st.floats(-1, 2))
def test_rect_mean_matches_integral(x1, x2, y1, y2):
    f = poly()
    mean = complex(f.rect_mean(x1, x2, y1, y2))
    if abs(x1 - x2) > 1e-3 and abs(y1 - y2) > 1e-3:
        area = (x1 - x2) * (y1 - y2)
        assert mean == pytest.approx(complex(f.integral_rect(x2, x1, y2, y1)) / area, rel=1e-9, abs=1e-9)
    assert np.isfinite(mean)
