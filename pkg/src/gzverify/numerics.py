"""Special functions on binary64: gamma, incomplete gamma, 2F1, Legendre Q, E1.

Everything here is a pure function.  Series loops use Kahan summation and
stop once three consecutive terms fall below ``rel_tol`` times the running sum.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import digamma

Number = Union[int, float, complex, "ComplexValue"]


@dataclass(frozen=True)
class ComplexValue:
    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError(f"non-finite complex value ({self.re}, {self.im})")

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def of(cls, z: Number) -> "ComplexValue":
        z = complex(z)
        return cls(z.real, z.imag)


@dataclass(frozen=True)
class PrecisionPolicy:
    rel_tol: float = 1e-12
    series_term_cap: int = 10**6

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.series_term_cap < 1:
            raise ValueError("series_term_cap must be at least 1")


DEFAULT_POLICY = PrecisionPolicy()


class ConvergenceError(ArithmeticError):
    pass


def _cx(z: Number) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("NaN or infinite argument")
    return z


def _is_nonpositive_integer(z: complex, tol: float = 0.0) -> bool:
    return z.imag == 0 and z.real <= 0 and abs(z.real - round(z.real)) <= tol


# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients).
_LANCZOS_G = 7.0
_LANCZOS_C = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _loggamma_right(z: np.ndarray) -> np.ndarray:
    # valid for Re z >= 1/2
    z = z - 1
    x = np.full(z.shape, _LANCZOS_C[0], dtype=complex)
    for i in range(1, 9):
        x = x + _LANCZOS_C[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(x)


def log_gamma(s) -> np.ndarray | complex:
    """Principal-ish log Gamma (continuous in Im s on each half plane).

    Accepts scalars or arrays; the imaginary part is only defined mod 2*pi
    for Re(s) < 1/2, which is fine for exponentiation.
    """
    arr = np.asarray(s, dtype=complex)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any((arr.imag == 0) & (arr.real <= 0) & (arr.real == np.round(arr.real))):
        raise ValueError("Gamma has a pole at non-positive integers")
    out = np.empty(arr.shape, dtype=complex)
    right = arr.real >= 0.5
    out[right] = _loggamma_right(arr[right])
    left = ~right
    if np.any(left):
        zl = arr[left]
        # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        out[left] = math.log(math.pi) - np.log(np.sin(np.pi * zl)) - _loggamma_right(1 - zl)
    return complex(out[0]) if scalar else out


def gamma(s: Number, policy: PrecisionPolicy = DEFAULT_POLICY) -> complex:
    """Complex Gamma function via Lanczos, with reflection for Re(s) < 1/2."""
    z = _cx(s)
    if _is_nonpositive_integer(z):
        raise ValueError(f"Gamma has a pole at {z.real:g}")
    if z.imag == 0 and z.real == round(z.real) and 0 < z.real <= 171:
        return complex(math.factorial(int(z.real) - 1))
    if z.real >= 0.5:
        return complex(np.exp(_loggamma_right(np.array([z]))[0]))
    return math.pi / (cmath.sin(math.pi * z) * gamma(1 - z, policy))


def gamma_array(s) -> np.ndarray:
    """Vectorised Gamma for arrays of complex arguments."""
    arr = np.asarray(s, dtype=complex)
    out = np.empty(arr.shape, dtype=complex)
    flat = arr.ravel()
    res = out.ravel()
    right = flat.real >= 0.5
    res[right] = np.exp(_loggamma_right(flat[right]))
    left = ~right
    if np.any(left):
        zl = flat[left]
        if np.any((zl.imag == 0) & (zl.real == np.round(zl.real))):
            raise ValueError("Gamma has a pole at non-positive integers")
        res[left] = np.pi / (np.sin(np.pi * zl) * np.exp(_loggamma_right(1 - zl)))
    return res.reshape(arr.shape)


class _Kahan:
    __slots__ = ("s", "c")

    def __init__(self, start=0.0):
        self.s = start
        self.c = 0.0

    def add(self, x):
        y = x - self.c
        t = self.s + y
        self.c = (t - self.s) - y
        self.s = t
        return t


def _lower_gamma_series(a: float, x: float, policy: PrecisionPolicy) -> float:
    # gamma(a, x) = x^a e^-x sum_n x^n / (a (a+1) ... (a+n))
    term = 1.0 / a
    acc = _Kahan(term)
    small = 0
    for n in range(1, policy.series_term_cap):
        term *= x / (a + n)
        acc.add(term)
        if abs(term) < policy.rel_tol * abs(acc.s) * 1e-2:
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    else:
        raise ConvergenceError("incomplete gamma series did not converge")
    return acc.s * math.exp(a * math.log(x) - x)


def _upper_gamma_cf(a: float, x: float, policy: PrecisionPolicy) -> float:
    # Lentz evaluation of the continued fraction for Gamma(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, policy.series_term_cap):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < policy.rel_tol * 1e-2:
            break
    else:
        raise ConvergenceError("incomplete gamma continued fraction did not converge")
    return math.exp(a * math.log(x) - x) * h


def upper_incomplete_gamma(a: float, x: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Gamma(a, x) = int_x^inf t^(a-1) e^-t dt for real a and x >= 0."""
    a = float(a)
    x = float(x)
    if x < 0:
        raise ValueError("upper_incomplete_gamma needs x >= 0")
    if x == 0:
        if a <= 0:
            raise ValueError("Gamma(a, 0) diverges for a <= 0")
        return gamma(a).real
    if x >= 1.5 or x >= a + 1:
        return _upper_gamma_cf(a, x, policy)
    if a > 0:
        return gamma(a).real - _lower_gamma_series(a, x, policy)
    if a == 0:
        return exp_integral_e1(x, policy)
    # a < 0 and small x: recurse upward, Gamma(a, x) = (Gamma(a+1, x) - x^a e^-x) / a
    return (upper_incomplete_gamma(a + 1, x, policy) - math.exp(a * math.log(x) - x)) / a


def exp_integral_e1(x: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """E1(x) = int_x^inf e^-t / t dt for x > 0."""
    x = float(x)
    if x <= 0:
        raise ValueError("exp_integral_e1 needs x > 0")
    if x <= 1.0:
        # -gamma - ln x - sum (-x)^k / (k k!)
        term = 1.0
        acc = _Kahan()
        small = 0
        for k in range(1, policy.series_term_cap):
            term *= -x / k
            contrib = -term / k
            acc.add(contrib)
            if abs(contrib) < policy.rel_tol * 1e-2:
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
        return -0.57721566490153286061 - math.log(x) + acc.s
    return _upper_gamma_cf(0.0, x, policy)


def exp_integral_e1_array(x) -> np.ndarray:
    """Vectorised E1 for arrays of positive reals (same two regimes)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("exp_integral_e1 needs x > 0")
    out = np.empty_like(x)
    small = x <= 1.0
    if np.any(small):
        xs = x[small]
        term = np.ones_like(xs)
        acc = np.zeros_like(xs)
        for k in range(1, 40):
            term = term * (-xs / k)
            acc = acc - term / k
        out[small] = -0.57721566490153286061 - np.log(xs) + acc
    big = ~small
    if np.any(big):
        xb = x[big]
        # modified Lentz on the E1 continued fraction, fixed iteration count
        tiny = 1e-300
        b = xb + 1.0
        c = np.full_like(xb, 1.0 / tiny)
        d = 1.0 / b
        h = d.copy()
        for i in range(1, 200):
            an = -float(i * i)
            b = b + 2.0
            d = 1.0 / (an * d + b)
            c = b + an / c
            h = h * d * c
        out[big] = np.exp(-xb) * h
    return out


def hyp2f1(a: Number, b: Number, c: Number, z: Number,
           policy: PrecisionPolicy = DEFAULT_POLICY) -> complex:
    """Gauss hypergeometric series 2F1(a, b; c; z) for |z| < 1."""
    a, b, c, z = _cx(a), _cx(b), _cx(c), _cx(z)
    if _is_nonpositive_integer(c):
        raise ValueError("2F1 is undefined for c a non-positive integer")
    if abs(z) >= 1:
        raise ValueError("2F1 series needs |z| < 1")
    term = 1.0 + 0j
    acc = _Kahan(1.0 + 0j)
    small = 0
    # geometric tail factor: once terms settle the remainder is ~ term / (1 - |z|)
    tol = 0.1 * policy.rel_tol * (1.0 - abs(z))
    for n in range(policy.series_term_cap):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        acc.add(term)
        if term == 0:
            return acc.s
        if abs(term) < tol * abs(acc.s):
            small += 1
            if small >= 3:
                return acc.s
        else:
            small = 0
    raise ConvergenceError("2F1 series hit the term cap")


def hyp2f1_real_array(a: float, b: float, c: float, z, rel_tol: float = 1e-13,
                      cap: int = 10**6) -> np.ndarray:
    """2F1 with fixed real parameters over an array of real z in [0, 1)."""
    z = np.asarray(z, dtype=float)
    if c <= 0 and c == round(c):
        raise ValueError("2F1 is undefined for c a non-positive integer")
    if z.size and np.max(np.abs(z)) >= 1:
        raise ValueError("2F1 series needs |z| < 1")
    term = np.ones_like(z)
    acc = np.ones_like(z)
    comp = np.zeros_like(z)
    small = 0
    tol = 0.1 * rel_tol * (1.0 - np.abs(z))
    for n in range(cap):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1))) * z
        y = term - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
        if np.all(np.abs(term) <= tol * np.abs(acc)):
            small += 1
            if small >= 3:
                return acc
        else:
            small = 0
    raise ConvergenceError("2F1 series hit the term cap")


def legendre_q(s: Number, t: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> complex:
    """Legendre function of the second kind Q_{s-1}(t) for t > 1, Re(s) > 0."""
    s = _cx(s)
    t = float(t)
    if t <= 1:
        raise ValueError("legendre_q needs t > 1")
    if s.real <= 0:
        raise ValueError("legendre_q needs Re(s) > 0")
    x = 2.0 / (1.0 + t)
    pref = cmath.exp(2 * log_gamma(s) - log_gamma(2 * s)) / 2 * cmath.exp(s * math.log(x))
    return pref * hyp2f1(s, s, 2 * s, x, policy)


def _legendre_q_near_one(s: float, t: np.ndarray, rel_tol: float = 1e-15) -> np.ndarray:
    """Q_{s-1}(t) from the logarithmic expansion of 2F1(s, s; 2s; x) about x = 2/(1+t) = 1."""
    x = 2.0 / (1.0 + t)
    y = (t - 1.0) / (t + 1.0)
    logy = np.log(y)
    c = 1.0
    psi1, psis = float(digamma(1.0)), float(digamma(s))
    acc = np.zeros_like(x)
    yn = np.ones_like(x)
    for n in range(2000):
        term = c * (2 * psi1 - 2 * psis - logy) * yn
        acc += term
        if n > 2 and np.all(np.abs(term) <= rel_tol * np.abs(acc)):
            break
        c *= ((s + n) / (n + 1)) ** 2
        psi1 += 1.0 / (n + 1)
        psis += 1.0 / (s + n)
        yn = yn * y
    else:
        raise ConvergenceError("near-one Legendre expansion hit the term cap")
    return 0.5 * np.exp(s * np.log(x)) * acc


def legendre_q_array(s: float, t) -> np.ndarray:
    """Vectorised Q_{s-1}(t) for real s > 0 and an array of t > 1."""
    t = np.asarray(t, dtype=float)
    if t.size and np.min(t) <= 1:
        raise ValueError("legendre_q needs t > 1")
    x = 2.0 / (1.0 + t)
    out = np.empty_like(x)
    near = x > 0.5
    if np.any(near):
        out[near] = _legendre_q_near_one(s, t[near])
    if np.any(~near):
        pref = math.exp(2 * math.lgamma(s) - math.lgamma(2 * s)) / 2
        xf = x[~near]
        out[~near] = pref * np.exp(s * np.log(xf)) * hyp2f1_real_array(s, s, 2 * s, xf)
    return out


@lru_cache(maxsize=8)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached Gauss-Legendre nodes and weights on [-1, 1]."""
    return np.polynomial.legendre.leggauss(n)


def legendre_q_integral(s: float, t: float, n: int = 400) -> float:
    """Q_{s-1}(t) from the integral over u of (t + sqrt(t^2-1) cosh u)^(-s).

    Reference route used to cross-check the series; uses a substitution
    u = w / (1 - w^2) on a Gauss-Legendre grid.
    """
    if t <= 1:
        raise ValueError("legendre_q needs t > 1")
    nodes, weights = gauss_legendre(n)
    w = 0.5 * (nodes + 1.0)  # (0, 1)
    u = w / (1 - w * w)
    du = (1 + w * w) / (1 - w * w) ** 2
    r = math.sqrt(t * t - 1)
    f = np.exp(-s * np.log(t + r * np.cosh(np.minimum(u, 700.0))))
    return float(0.5 * np.sum(weights * f * du))
