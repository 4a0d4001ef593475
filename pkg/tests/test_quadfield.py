import math

import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from gzverify.quadfield import (BinaryForm, class_group, class_number_from_l_value, compose,
                                dirichlet_l_value, divisors, fundamental_discriminants,
                                fundamental_unit, ideal_count, ideal_counts_upto, indefinite_cycle,
                                is_discriminant, is_fundamental, kronecker_symbol, principal_form,
                                reduce_definite, reduce_form, unit_count)

IMAGINARY = [d for d in fundamental_discriminants(300, -1)]
REAL = [d for d in fundamental_discriminants(300, 1)]


def brute_force_class_number(d):
    """Count reduced primitive positive forms |b| <= a <= c, b >= 0 on the boundary."""
    count = 0
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) == 1:
                count += 1
        a += 1
    return count


def test_fundamental_discriminants_small():
    assert fundamental_discriminants(20) == [-20, -19, -15, -11, -8, -7, -4, -3, 5, 8, 12, 13, 17]
    assert not is_fundamental(-12) and is_discriminant(-12) and not is_discriminant(7)


@pytest.mark.parametrize("d", IMAGINARY)
def test_class_number_against_reduced_form_count(d):
    assert class_group(d).h == brute_force_class_number(d)


@pytest.mark.parametrize("d,h", [(-3, 1), (-4, 1), (-23, 3), (-47, 5), (-84, 4), (-163, 1), (-239, 15)])
def test_class_number_table(d, h):
    assert class_group(d).h == h


@pytest.mark.parametrize("d,h,hplus", [(5, 1, 1), (12, 1, 2), (229, 3, 3), (136, 2, 4), (79 * 4, 3, 6)])
def test_real_class_numbers(d, h, hplus):
    assert class_group(d).h == h
    assert class_group(d, narrow=True).h == hplus


@pytest.mark.parametrize("d", [-3, -4, -8, -15, -23, 5, 8, 12, 13, 21, 229])
def test_kronecker_at_odd_primes_is_legendre(d):
    for p in sympy.primerange(3, 200):
        if d % p:
            assert kronecker_symbol(d, p) == sympy.legendre_symbol(d % p, p)
        else:
            assert kronecker_symbol(d, p) == 0


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(IMAGINARY + REAL), st.integers(1, 500), st.integers(1, 500))
def test_kronecker_is_multiplicative_and_periodic(d, m, n):
    assert kronecker_symbol(d, m * n) == kronecker_symbol(d, m) * kronecker_symbol(d, n)
    assert kronecker_symbol(d, m) == kronecker_symbol(d, m + abs(d))


@pytest.mark.parametrize("d", [-3, -4, -7, -23, -104, 5, 12, 229])
def test_l_value_matches_digamma_oracle(d):
    k = abs(d)
    ref = -sum(kronecker_symbol(d, a) * mpmath.digamma(mpmath.mpf(a) / k) for a in range(1, k)) / k
    assert abs(dirichlet_l_value(d) - float(ref)) < 1e-12


@pytest.mark.parametrize("d", [-4, -23, 5, 229, -3])
def test_class_number_formula_rounds_exactly(d):
    hl = class_number_from_l_value(d)
    assert abs(hl - class_group(d).h) < 1e-6


def test_unit_data():
    assert [unit_count(d) for d in (-3, -4, -7, 5)] == [6, 4, 2, 2]
    x, y, reg = fundamental_unit(5)
    assert (x, y) == (1, 1) and abs(reg - math.log((1 + math.sqrt(5)) / 2)) < 1e-14
    x, y, reg = fundamental_unit(12)
    assert abs(reg - math.log(2 + math.sqrt(3))) < 1e-14


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(IMAGINARY), st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20),
       st.integers(-20, 20))
def test_reduction_is_class_invariant(d, a, b, c, e):
    cg = class_group(d)
    if a * e - b * c != 1:
        return
    for f in cg.classes:
        g = f.act(((a, b), (c, e)))
        assert g.disc == d
        assert reduce_definite(g)[0] == f


def test_reduce_definite_returns_transform():
    f = BinaryForm(6, 5, 2)
    g, m = reduce_definite(f)
    assert f.act(m) == g


@pytest.mark.parametrize("d", [-23, -47, -84, -56, -231])
def test_group_law(d):
    cg = class_group(d)
    e = cg.index_of(principal_form(d))
    for i in range(cg.h):
        assert cg.multiply(i, e) == i
        assert cg.multiply(i, cg.inverse(i)) == e
        for j in range(cg.h):
            assert cg.multiply(i, j) == cg.multiply(j, i)
            assert cg.index_of(compose(cg.classes[i], cg.classes[j])) == cg.multiply(i, j)


def test_indefinite_cycle_and_reduction():
    cyc = indefinite_cycle(BinaryForm(1, 1, -1))
    assert all(f.disc == 5 for f in cyc)
    with pytest.raises(ValueError):
        reduce_form(BinaryForm(5, 13, 8))


@pytest.mark.parametrize("d", [5, 12, 21, 229, 136])
def test_indefinite_reduction_lands_in_cycle(d):
    for f in class_group(d, narrow=True).classes:
        g = f.act(((2, 1), (7, 4)))
        assert reduce_form(g) in indefinite_cycle(reduce_form(f))


@pytest.mark.parametrize("d", [-4, -23, 5, 12, -15])
def test_ideal_counts_are_divisor_sums(d):
    counts = ideal_counts_upto(d, 120)
    for m in range(1, 121):
        expect = sum(kronecker_symbol(d, e) for e in divisors(m))
        assert counts[m] == expect == ideal_count(d, m)


def test_divisors():
    assert divisors(36) == [1, 2, 3, 4, 6, 9, 12, 18, 36]
