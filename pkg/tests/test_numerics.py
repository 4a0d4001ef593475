import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gzverify.numerics import (ComplexValue, ConvergenceError, PrecisionPolicy, exp_integral_e1,
                               exp_integral_e1_array, gamma, gamma_array, gauss_legendre, hyp2f1,
                               hyp2f1_real_array, legendre_q, legendre_q_array, legendre_q_integral,
                               log_gamma, upper_incomplete_gamma)

mpmath.mp.dps = 30


@pytest.mark.parametrize("s", [0.5, 1.0, 2.5, 7.25, 3 + 4j, 0.1 - 2j, 40.0])
def test_gamma_matches_mpmath(s):
    assert abs(gamma(s) - complex(mpmath.gamma(s))) <= 1e-12 * abs(complex(mpmath.gamma(s)))


@pytest.mark.parametrize("s", [0.3, 5.5, 2 + 30j, 100.0])
def test_log_gamma_matches_mpmath(s):
    assert abs(complex(log_gamma(s)) - complex(mpmath.loggamma(s))) < 1e-11


def test_gamma_array_vectorises():
    s = np.array([0.5, 1.5, 4.0])
    np.testing.assert_allclose(gamma_array(s).real, [math.gamma(x) for x in s], rtol=1e-13)


@pytest.mark.parametrize("a,x", [(0.5, 0.1), (2.0, 3.0), (1.5, 20.0), (-0.5, 2.0), (3.3, 0.7)])
def test_upper_incomplete_gamma_matches_mpmath(a, x):
    ref = float(mpmath.gammainc(a, x))
    assert abs(upper_incomplete_gamma(a, x) - ref) <= 1e-11 * abs(ref)


@pytest.mark.parametrize("x", [1e-3, 0.5, 1.0, 4.0, 30.0, 200.0])
def test_exp_integral_e1_matches_mpmath(x):
    ref = float(mpmath.e1(x))
    assert abs(exp_integral_e1(x) - ref) <= 1e-12 * ref
    assert abs(exp_integral_e1_array([x])[0] - ref) <= 1e-12 * ref


@pytest.mark.parametrize("a,b,c,z", [(1, 1, 2, 0.5), (0.5, 1.5, 2.5, 0.9), (1 + 1j, 2, 3.5, 0.3 - 0.4j),
                                     (2.2, 0.7, 4.4, -0.8)])
def test_hyp2f1_matches_mpmath(a, b, c, z):
    ref = complex(mpmath.hyp2f1(a, b, c, z))
    assert abs(hyp2f1(a, b, c, z) - ref) <= 1e-11 * max(1, abs(ref))


def test_hyp2f1_rejects_pole_and_outside_disc():
    with pytest.raises(ValueError):
        hyp2f1(1, 1, -2, 0.5)
    with pytest.raises(ValueError):
        hyp2f1(1, 1, 2, 1.5)


def test_hyp2f1_real_array_against_scipy():
    from scipy.special import hyp2f1 as sp_hyp2f1

    z = np.linspace(0, 0.99, 25)
    np.testing.assert_allclose(hyp2f1_real_array(1.2, 0.8, 2.6, z), sp_hyp2f1(1.2, 0.8, 2.6, z), rtol=1e-11)


@pytest.mark.parametrize("s,t", [(1.0, 1.5), (2.0, 1.01), (1.5, 3.0), (2.7, 25.0), (1.25, 1.0001)])
def test_legendre_q_matches_mpmath(s, t):
    ref = float(mpmath.legenq(s - 1, 0, t, type=3).real)
    assert abs(legendre_q(s, t).real - ref) <= 1e-10 * abs(ref)
    assert abs(legendre_q_array(s, [t])[0] - ref) <= 1e-10 * abs(ref)


def test_legendre_q_zero_index_closed_form():
    t = np.array([1.001, 1.3, 2.0, 10.0])
    np.testing.assert_allclose(legendre_q_array(1.0, t), 0.5 * np.log((t + 1) / (t - 1)), rtol=1e-14)


def test_legendre_q_domain():
    with pytest.raises(ValueError):
        legendre_q(1.5, 0.9)
    with pytest.raises(ValueError):
        legendre_q_array(1.5, [1.0])


@settings(max_examples=40, deadline=None)
@given(st.floats(0.6, 4.0), st.floats(1.05, 40.0))
def test_legendre_q_series_agrees_with_integral(s, t):
    a = legendre_q_integral(s, t)
    assert abs(legendre_q_array(s, [t])[0] - a) <= 1e-9 * abs(a)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.1, 4.0), st.floats(1.01, 30.0), st.floats(1.01, 30.0))
def test_legendre_q_decreasing_in_t(s, t1, t2):
    lo, hi = sorted((t1, t2))
    if hi - lo < 1e-6:
        return
    q = legendre_q_array(s, [lo, hi])
    assert q[0] > q[1] > 0


def test_gauss_legendre_integrates_polynomials():
    x, w = gauss_legendre(20)
    assert abs(np.sum(w * x ** 38) - 2 / 39) < 1e-14


def test_precision_policy_validates():
    with pytest.raises(ValueError):
        PrecisionPolicy(rel_tol=0)


def test_complex_value_of():
    v = ComplexValue.of(1 + 2j)
    assert complex(v.re, v.im) == 1 + 2j


def test_convergence_error_is_arithmetic():
    assert issubclass(ConvergenceError, ArithmeticError)
