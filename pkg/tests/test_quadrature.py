import math

import numpy as np
import pytest
from scipy import integrate

from adiabatic_search.quadrature import QuadratureError, adaptive_quad, gauss_legendre, nested_causal, panel_quad


def test_adaptive_quad_smooth():
    assert adaptive_quad(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-12)


def test_adaptive_quad_reports_failure():
    with pytest.raises(QuadratureError) as exc:
        adaptive_quad(lambda x: math.sin(1 / x) / x, 1e-8, 1.0, limit=5)
    assert math.isfinite(exc.value.estimate)


@pytest.mark.parametrize("m", [1, 4, 12])
def test_gauss_legendre_exact_on_polynomials(m):
    t, w = gauss_legendre(m)
    assert np.all((t > 0) & (t < 1))
    for k in range(2 * m):
        assert np.sum(w * t ** k) == pytest.approx(1 / (k + 1), rel=1e-13)


def test_panel_quad():
    assert panel_quad(np.exp, np.linspace(0, 2, 9)) == pytest.approx(math.e ** 2 - 1, rel=1e-14)


def test_nested_causal_without_phase():
    # int_0^1 x * int_0^x y^2 dy dx = 1/15
    val = nested_causal(lambda x: x, lambda y: y * y, np.linspace(0, 1, 5))
    assert val == pytest.approx(1 / 15, abs=1e-12)


def test_nested_causal_with_phase_against_dblquad():
    a = 7.0

    def phase(u):
        return a * u + 3j * u * u

    ref_re = integrate.dblquad(lambda y, x: (np.cos(x) * np.exp(phase(y) - phase(x)) * (1 + y)).real,
                               0, 2, 0, lambda x: x, epsabs=1e-12)[0]
    ref_im = integrate.dblquad(lambda y, x: (np.cos(x) * np.exp(phase(y) - phase(x)) * (1 + y)).imag,
                               0, 2, 0, lambda x: x, epsabs=1e-12)[0]
    val = nested_causal(np.cos, lambda y: 1 + y, np.linspace(0, 2, 17), phase=phase, tol=1e-11)
    assert val.real == pytest.approx(ref_re, abs=1e-9)
    assert val.imag == pytest.approx(ref_im, abs=1e-9)
