"""Desk-scale acceptance checks, one test per criterion."""

import cmath
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest
import sympy
from scipy.special import exp1

from gzverify.cycles import cm_cycle_degree, heegner_points, trace_cm
from gzverify.greens import (LiftEvaluator, ResolventEvaluator, hilbert_green, laplacian_eigencheck,
                             lift_closed_form)
from gzverify.lattice import (binary_lattice, build_LA_lattice, build_signature12_lattice,
                              discriminant_module, sig12_coset)
from gzverify.lfunc import central_derivative, fe_residual, lambda_eval, rankin_selberg_coeffs, standard_spec
from gzverify.modforms import (EisensteinEvaluator, hecke_theta, maass_operator, newform_coefficients)
from gzverify.quadfield import (BinaryForm, class_group, class_number_from_l_value,
                                fundamental_discriminants, is_fundamental)
from gzverify.suites import (CURVE_37A, CURVE_389A, GREEN_POINTS_HILBERT, GREEN_POINTS_LIFT,
                             GREEN_POINTS_RESOLVENT, HILBERT_LAPLACIAN_SCALE, LIFT_LAPLACIAN_SCALE,
                             shimura_identity_check)
from gzverify.weil import relation_residuals, weil_generators

PREC = 20000


def kronecker_oracle(d: int, n: int) -> int:
    """Kronecker symbol from sympy's Jacobi symbol plus the rules at -1 and 2."""
    if n == 0:
        return 1 if abs(d) == 1 else 0
    out = 1
    if n < 0:
        n = -n
        out = -1 if d < 0 else 1
    while n % 2 == 0:
        n //= 2
        out *= 0 if d % 2 == 0 else (1 if d % 8 in (1, 7) else -1)
    return out * (int(sympy.jacobi_symbol(d % n, n)) if n > 1 else 1)


@pytest.fixture(scope="module")
def rs37():
    nf = newform_coefficients(CURVE_37A, PREC, 37)
    return rankin_selberg_coeffs(nf, -139, 0, prec=PREC)


@pytest.fixture(scope="module")
def rs389():
    nf = newform_coefficients(CURVE_389A, PREC, 389)
    return rankin_selberg_coeffs(nf, -7, 0, prec=PREC)


def test_criterion_01_class_number_formula(report_criterion):
    t0 = time.perf_counter()
    worst, mismatches, count = 0.0, [], 0
    for d in fundamental_discriminants(500):
        hl = class_number_from_l_value(d)
        worst = max(worst, abs(hl - round(hl)))
        if round(hl) != class_group(d).h:
            mismatches.append(d)
        count += 1
    dt = time.perf_counter() - t0
    ok = not mismatches and worst < 1e-6 and dt < 30
    report_criterion(1, "class number from L(1, eta) vs forms, |d| <= 500", ok,
                     f"{count} discriminants, {len(mismatches)} mismatches, "
                     f"max pre-rounding error {worst:.1e}, {dt:.1f} s")
    assert ok


def test_criterion_02_functional_equation(report_criterion, rs37):
    t0 = time.perf_counter()
    samples = [0.3, 0.5 + 0.7j, 1.2, 0.8, 0.6 - 0.3j]
    res = fe_residual(rs37, samples, T=1.2)
    dt = time.perf_counter() - t0
    ok = res < 1e-5 and dt < 60
    report_criterion(2, "functional equation residual, 37a x theta(-139)", ok,
                     f"max residual {res:.1e} over 5 samples at prec {PREC}, {dt:.1f} s")
    assert ok


def test_criterion_03_sign_and_vanishing(report_criterion, rs37, rs389):
    details, ok = [], True
    for (N, d), spec in (((37, -139), rs37), ((389, -7), rs389)):
        sign = kronecker_oracle(d, -N)
        central = abs(lambda_eval(spec, 0.5, T=1.2, tail_tol=np.inf).value)
        ok = ok and sign == -1 and spec.sign == sign and central < 1e-8
        details.append(f"(N={N}, d={d}) sign {sign}, |Lambda(1/2)| {central:.1e}")
    report_criterion(3, "odd sign and central vanishing", ok, "; ".join(details))
    assert ok


def test_criterion_04_central_derivative(report_criterion):
    nf = newform_coefficients(CURVE_37A, 5000, 37)
    cd = central_derivative(standard_spec(nf, sign=-1, prec=5000))
    n = np.arange(1, 5001, dtype=float)
    a = np.array(nf.coefficients[1:5001], dtype=float)
    oracle = float(2 * np.sum(a / n * exp1(2 * math.pi * n / math.sqrt(37))))
    agree = cd.agreement
    ok = agree < 1e-6 and abs(cd.l_prime - oracle) < 1e-5 and abs(oracle - 0.3059998) < 1e-5
    report_criterion(4, "L'(E, 1) for 37a", ok,
                     f"two internal routes differ by {agree:.1e}; value {cd.l_prime:.10f}, "
                     f"E1-series oracle {oracle:.10f}")
    assert ok


def test_criterion_05_heegner_counts_and_degrees(report_criterion):
    bad, cases = [], 0
    for N in (1, 5, 37):
        for D in range(-3, -201, -1):
            if not is_fundamental(D) or math.gcd(D, 2 * N) != 1:
                continue
            h = class_group(D).h
            for r in range(2 * N):
                if (D - r * r) % (4 * N) == 0:
                    cases += 1
                    if len(heegner_points(N, D, r)) != h:
                        bad.append((N, D, r))
    degrees = {D: cm_cycle_degree(1, D, strict=False) for D in (-3, -4, -7, -8)}
    expect = {-3: Fraction(1, 3), -4: Fraction(1, 2), -7: Fraction(1), -8: Fraction(1)}
    ok = not bad and degrees == expect
    report_criterion(5, "Heegner counts = h(D), classical degrees", ok,
                     f"{cases} (N, D, r) cases, {len(bad)} mismatches; degrees "
                     + ", ".join(f"{D}: {v}" for D, v in degrees.items()))
    assert ok


def _j_oracle(tau: complex, terms: int = 60) -> complex:
    """j = E4^3 / Delta from truncated q-series, with no shared code."""
    q = cmath.exp(2j * math.pi * tau)
    e4 = 1 + 240 * sum(int(sympy.divisor_sigma(n, 3)) * q ** n for n in range(1, terms))
    prod = 1
    for n in range(1, terms):
        prod *= (1 - q ** n) ** 24
    return e4 ** 3 / (q * prod)


def _reduced_forms(D: int):
    out = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a) == 0:
                c = (b * b - D) // (4 * a)
                if c >= a and not (c == a and b < 0) and math.gcd(math.gcd(a, b), c) == 1:
                    out.append((a, b, c))
        a += 1
    return out


def test_criterion_06_singular_moduli_traces(report_criterion):
    details, ok = [], True
    for D, r, expect in ((-3, 1, -248), (-4, 0, 492), (-7, 1, -4119)):
        weight = {-3: 3, -4: 2}.get(D, 1)
        brute = sum((_j_oracle((-b + cmath.sqrt(D)) / (2 * a)) - 744) / weight for a, b, c in _reduced_forms(D))
        val = trace_cm(lambda z: _j_oracle(z) - 744, 1, D, r, strict=False)
        ok = ok and abs(val - expect) < 1e-6 and abs(brute - expect) < 1e-6
        details.append(f"D={D}: {val.real:.8f}")
    report_criterion(6, "CM traces of j - 744", ok, ", ".join(details))
    assert ok


def test_criterion_07_green_eigenchecks(report_criterion):
    t0 = time.perf_counter()
    worst = {}
    L, D = build_signature12_lattice(1)
    s = 1.5
    ev = LiftEvaluator(L, D, sig12_coset(D, 0), 1, s, radius=400)
    res = []
    for z in GREEN_POINTS_LIFT:
        X = ev.vectors(z)
        res.append(laplacian_eigencheck(lambda w: lift_closed_form(ev, w, X).value, z,
                                        0.5 * (s - 0.75) * (s - 0.25), 1e-3, scale=LIFT_LAPLACIAN_SCALE).residual)
    worst["lift"] = max(res)
    LA, DA = build_LA_lattice(-23, 0, 1)
    s = 2.2
    res = []
    for z1, z2 in GREEN_POINTS_HILBERT:
        X = LiftEvaluator(LA, DA, 0, 1, s, 200).vectors((z1, z2))
        res.append(laplacian_eigencheck(lambda p: hilbert_green(LA, DA, p[0], p[1], s, 1, vectors=X).value,
                                        (z1, z2), s / 2 * (s - 1), 1e-3, scale=HILBERT_LAPLACIAN_SCALE).residual)
    worst["hilbert"] = max(res)
    res = []
    for i, (z1, z2) in enumerate(GREEN_POINTS_RESOLVENT):
        rv = ResolventEvaluator(1 + 4 * i, 2.0)
        grp = rv.group_set(z1, z2)
        res.append(laplacian_eigencheck(lambda w: rv.evaluate(w, z2, grp).value, z1, 2.0, 1e-3,
                                        scale=1.0).residual)
    worst["resolvent"] = max(res)
    dt = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-3 and dt < 120
    report_criterion(7, "Green's function eigenchecks", ok,
                     ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f" (3 points each, {dt:.1f} s)")
    assert ok


def test_criterion_08_eisenstein_lowering(report_criterion):
    rng = random.Random(2024)
    worst = {}
    cases = [("cm", binary_lattice(BinaryForm(2, 1, 3), sign=-1), 1),
             ("geodesic", binary_lattice(BinaryForm(1, 1, -1)), 0)]
    for name, lat, l in cases:
        E = EisensteinEvaluator(weil_generators(discriminant_module(lat)), c_max=30)
        err = 0.0
        for _ in range(5):
            tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.9, 1.6))
            s = complex(2.5, rng.uniform(-1, 1))
            lo = maass_operator(lambda z: E(z, s, l), "lower", tau, 1e-3)
            err = max(err, float(np.max(np.abs(lo.value - 0.5 * (s + 1 - l) * E(tau, s, l - 2)))))
        worst[name] = err
    ok = max(worst.values()) < 1e-6
    report_criterion(8, "Eisenstein lowering identity", ok,
                     ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " over 5 random (tau, s)")
    assert ok


def test_criterion_09_shimura_dirichlet_identity(report_criterion):
    checks = [shimura_identity_check(seed) for seed in (1, 2, 3)]
    ok = all(c.passed for c in checks)
    report_criterion(9, "Shimura-lift Dirichlet identity, n <= 200", ok,
                     f"{sum(c.computed for c in checks)} coefficient mismatches over 3 random inputs")
    assert ok


def test_criterion_10_weil_relations(report_criterion):
    mods = [(f"N={N}", build_signature12_lattice(N)[1]) for N in (1, 2, 37)]
    mods.append(("L_A(-23)", build_LA_lattice(-23, 1, 1)[1]))
    worst = {name: max(relation_residuals(weil_generators(D)).values()) for name, D in mods}
    ok = max(worst.values()) < 1e-12
    report_criterion(10, "Weil representation relations", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok


def test_criterion_11_theta_ideal_counts(report_criterion):
    details, ok = [], True
    for d in (-4, -23, 5, 12):
        h = class_group(d).h
        thetas = [hecke_theta(d, A, 200).coefficients for A in range(h)]
        miss = 0
        for m in range(1, 201):
            lhs = sum(th[m] for th in thetas)
            rhs = sum(kronecker_oracle(d, e) for e in sympy.divisors(m))
            miss += lhs != rhs
        ok = ok and miss == 0
        details.append(f"d={d}: {miss}")
    report_criterion(11, "sum of class theta series = divisor sum of eta, m <= 200", ok,
                     "mismatches " + ", ".join(details))
    assert ok
