import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from gzverify.lattice import (binary_lattice, build_signature12_lattice, discriminant_module,
                              sig12_coset)
from gzverify.modforms import (BadReductionError, EisensteinEvaluator, ap_from_curve, ap_table,
                               bad_prime_ap, cache_path, count_points, curve_invariants,
                               dirichlet_convolve, hecke_theta, hecke_tp_scalar, maass_operator,
                               newform_coefficients, read_ap_cache, shimura_lift_coeffs,
                               sig12_positive_line, siegel_theta_eval, theta_chi, write_ap_cache)
from gzverify.quadfield import BinaryForm, class_group, ideal_counts_upto, kronecker_symbol
from gzverify.suites import CURVE_37A, CURVE_389A, shimura_identity_check
from gzverify.weil import VectorValuedQSeries, weil_generators

CURVE_11A = (0, -1, 1, -10, -20)
NF37 = newform_coefficients(CURVE_37A, 3600, 37)


def eta_product_11(prec):
    """q-expansion of eta(tau)^2 eta(11 tau)^2, the newform of level 11."""
    f = np.zeros(prec + 1, dtype=object)
    f[1] = 1
    for n in range(1, prec + 1):
        for step in (n, 11 * n):
            if step > prec:
                continue
            for _ in range(2):
                g = f.copy()
                g[step:] -= f[:-step]
                f = g
    return [int(x) for x in f]


def test_newform_11a_matches_eta_product():
    ref = eta_product_11(60)
    nf = newform_coefficients(CURVE_11A, 60, 11)
    assert list(nf.coefficients) == ref


def test_37a_known_coefficients():
    nf = newform_coefficients(CURVE_37A, 13, 37)
    assert list(nf.coefficients[1:14]) == [1, -2, -3, 2, -2, 6, -1, 0, 6, 4, -5, -6, -2]


def test_389a_small_primes():
    assert [ap_from_curve(CURVE_389A, p) for p in (2, 3, 5, 7)] == [-2, -2, -3, -5]


@pytest.mark.parametrize("p", [3, 5, 7, 11, 101, 211])
def test_point_count_routes_agree(p):
    if curve_invariants(CURVE_37A)["disc"] % p == 0:
        return
    assert ap_from_curve(CURVE_37A, p) == p + 1 - count_points(CURVE_37A, p)


def test_bad_prime_requires_local_data():
    with pytest.raises(BadReductionError):
        ap_from_curve(CURVE_37A, 37)
    assert ap_from_curve(CURVE_37A, 37, {37: -1}) == -1
    assert bad_prime_ap(CURVE_37A, 37) in (-1, 0, 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 60), st.integers(1, 60))
def test_coefficients_multiplicative(m, n):
    from math import gcd

    nf = NF37
    if gcd(m, n) == 1:
        assert nf[m * n] == nf[m] * nf[n]


def test_hecke_operator_eigenvalue():
    nf = newform_coefficients(CURVE_11A, 400, 11)
    a = list(nf.coefficients)
    for p in (2, 3, 5, 7):
        tp = hecke_tp_scalar(a, p, 400 // p)
        assert all(tp[n] == a[p] * a[n] for n in range(1, 400 // p + 1))


def test_ap_cache_round_trip(tmp_path):
    path = cache_path(str(tmp_path), CURVE_37A)
    table = ap_table(CURVE_37A, 50, cache=path)
    assert read_ap_cache(path) == table
    write_ap_cache(path, {2: 99})
    assert ap_table(CURVE_37A, 3, cache=path)[2] == 99


@pytest.mark.parametrize("d", [-4, -23, 5, 12, -84])
def test_theta_classes_sum_to_ideal_counts(d):
    cg = class_group(d)
    tot = sum(np.array([float(x) for x in hecke_theta(d, A, 150).coefficients]) for A in range(cg.h))
    assert np.array_equal(tot[1:], ideal_counts_upto(d, 150)[1:].astype(float))


def test_theta_chi_trivial_character():
    assert np.allclose(theta_chi(-23, 0, 40)[1:].real, ideal_counts_upto(-23, 40)[1:])


def test_hecke_theta_rejects_bad_prec():
    with pytest.raises(ValueError):
        hecke_theta(-23, 0, 0)


def test_siegel_theta_definite_inversion():
    L = binary_lattice(BinaryForm(1, 1, 1))
    D = discriminant_module(L)
    rep = weil_generators(D)
    tau = 0.2 + 0.9j
    a = siegel_theta_eval(L, D, -1 / tau, None, 40).values
    b = siegel_theta_eval(L, D, tau, None, 40).values
    assert np.max(np.abs(a - tau * rep.S_matrix @ b)) < 1e-12


@pytest.mark.parametrize("N,z", [(1, 0.1 + 1.1j), (3, 0.3 + 1.2j), (5, -0.2 + 0.7j)])
def test_siegel_theta_signature12_modularity(N, z):
    L, D = build_signature12_lattice(N)
    rep = weil_generators(D)
    B = sig12_positive_line(N, z)
    for tau in (0.2 + 0.9j, -0.3 + 1.4j):
        a = siegel_theta_eval(L, D, -1 / tau, B, 60).values
        b = siegel_theta_eval(L, D, tau, B, 60).values
        assert np.max(np.abs(a - tau ** -0.5 * rep.S_matrix @ b)) < 1e-10
        c = siegel_theta_eval(L, D, tau + 1, B, 60).values
        assert np.max(np.abs(c - rep.T_matrix @ b)) < 1e-10


@pytest.mark.parametrize("name,form,sign,l", [("cm", BinaryForm(2, 1, 3), -1, 1), ("geo", BinaryForm(1, 1, -1), 1, 0)])
def test_eisenstein_lowering(name, form, sign, l):
    E = EisensteinEvaluator(weil_generators(discriminant_module(binary_lattice(form, sign=sign))), c_max=30)
    rng = random.Random(7)
    for _ in range(3):
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.9, 1.6))
        s = complex(2.5, rng.uniform(-1, 1))
        lo = maass_operator(lambda z: E(z, s, l), "lower", tau)
        assert np.max(np.abs(lo.value - 0.5 * (s + 1 - l) * E(tau, s, l - 2))) < 1e-6


def test_eisenstein_translation():
    rep = weil_generators(discriminant_module(binary_lattice(BinaryForm(2, 1, 3), sign=-1)))
    E = EisensteinEvaluator(rep, c_max=12)
    tau, s = 0.1 + 1.2j, 2.5
    lhs = E.translated(1)(tau + 1, s, 1)
    assert np.max(np.abs(lhs - rep.T_matrix @ E(tau, s, 1))) < 1e-12


def test_eisenstein_needs_convergent_s():
    E = EisensteinEvaluator(weil_generators(discriminant_module(binary_lattice(BinaryForm(1, 0, 1), sign=-1))), 5)
    with pytest.raises(ValueError):
        E(1j, 1.0, 1)


def test_maass_operator_on_holomorphic_and_power():
    assert abs(maass_operator(lambda z: z ** 3, "lower", 0.3 + 1.1j).value) < 1e-9
    tau = 0.3 + 1.1j
    # lowering v^2 gives 2 v^3
    lo = maass_operator(lambda z: z.imag ** 2, "lower", tau).value
    assert abs(lo - 2 * tau.imag ** 3) < 1e-8
    with pytest.raises(ValueError):
        maass_operator(lambda z: z, "sideways", tau)


def test_shimura_dirichlet_identity():
    assert shimura_identity_check(seed=3).passed


def test_shimura_lift_validates_input():
    _, D = build_signature12_lattice(37)
    g = VectorValuedQSeries(D, Fraction(3, 2))
    with pytest.raises(ValueError):
        shimura_lift_coeffs(g, sig12_coset(D, 3), Fraction(1, 37 * 4), 5)


def test_dirichlet_convolve_with_unit():
    unit = [0, 1] + [0] * 29
    a = [0] + list(range(1, 31))
    assert dirichlet_convolve(unit, a, 30) == a
    ones = [0] + [1] * 30
    tau = dirichlet_convolve(ones, ones, 30)
    assert tau[1:] == [int(sympy.divisor_count(n)) for n in range(1, 31)]
    eta = [0] + [kronecker_symbol(-4, n) for n in range(1, 31)]
    r2 = dirichlet_convolve(eta, ones, 30)
    assert r2[1:] == list(ideal_counts_upto(-4, 30)[1:])
