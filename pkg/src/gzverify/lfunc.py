"""Rankin-Selberg and standard L-functions: coefficients, completed functional
equations, smoothed approximate functional equation, central derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import gcd
from typing import Optional, Sequence

import numpy as np
from scipy.special import digamma

from .modforms import NewformCoefficients, hecke_theta, theta_chi
from .numerics import exp_integral_e1_array, log_gamma
from .quadfield import class_group, ideal_counts_upto, is_fundamental, kronecker_symbol


class InsufficientCoefficientsError(ValueError):
    pass


class EvenSignError(ValueError):
    pass


@dataclass(frozen=True)
class GammaFactor:
    """gamma(s) = prod base^{-(alpha s + beta)} * prod Gamma(a s + b)."""
    kind: str
    powers: tuple[tuple[float, float, float], ...]
    gammas: tuple[tuple[float, float], ...]

    def log(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for base, al, be in self.powers:
            out -= (al * z + be) * math.log(base)
        for a, b in self.gammas:
            out += log_gamma(a * z + b)
        return out

    def log_derivative(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for base, al, _ in self.powers:
            out -= al * math.log(base)
        for a, b in self.gammas:
            out += a * digamma(a * z + b)
        return out

    def __call__(self, s: complex) -> complex:
        return complex(np.exp(self.log(np.array([s]))[0]))

    @property
    def decay(self) -> float:
        return sum(a for a, _ in self.gammas)


RS_WEIGHT2_THETA = GammaFactor("RS_weight2_theta", ((2 * math.pi, 2.0, 0.0),), ((1.0, 0.5), (1.0, 0.5)))
STD_WEIGHT2 = GammaFactor("std_weight2", ((2 * math.pi, 1.0, 0.0),), ((1.0, 0.5),))
DIRICHLET_ODD = GammaFactor("dirichlet_odd", ((math.pi, 0.5, 0.5),), ((0.5, 0.5),))
DIRICHLET_EVEN = GammaFactor("dirichlet_even", ((math.pi, 0.5, 0.0),), ((0.5, 0.0),))


@dataclass(frozen=True)
class LFunctionSpec:
    """Lambda(s) = gamma(s) sum b(n) n^{-s}, with Lambda(s) = sign Q^{1-2s} Lambda(1-s)."""
    coeffs: np.ndarray  # b(0..prec), b(0) unused
    gamma: GammaFactor
    conductor: float
    sign: complex
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def prec(self) -> int:
        return len(self.coeffs) - 1

    def with_sign(self, sign: complex) -> "LFunctionSpec":
        return LFunctionSpec(self.coeffs, self.gamma, self.conductor, sign, self.label, self.meta)

    def scaled(self, k: complex) -> "LFunctionSpec":
        return LFunctionSpec(self.coeffs * k, self.gamma, self.conductor, self.sign, self.label, self.meta)


def default_prec(conductor: float) -> int:
    return int(max(2000, 50 * math.sqrt(conductor)))


# ------------------------------------------------------------- constructors


def rankin_selberg_classical_coeffs(phi: NewformCoefficients, d: int, chi: int, prec: int) -> np.ndarray:
    """Integer-normalized coefficients c(n) = sum_{k^2 j = n, gcd(k, N) = 1} eta(k) k a(j) r_chi(j)."""
    N = phi.level
    if gcd(N, d) != 1:
        raise ValueError("need gcd(N, d) = 1")
    if phi.prec < prec:
        raise InsufficientCoefficientsError(f"newform known to {phi.prec} < {prec}")
    if chi == 0:
        r = ideal_counts_upto(d, prec).astype(complex)
    else:
        r = theta_chi(d, chi, prec)
    a = np.array(phi.coefficients[: prec + 1], dtype=complex)
    base = a * r
    base[0] = 0
    out = np.zeros(prec + 1, dtype=complex)
    k = 1
    while k * k <= prec:
        if gcd(k, N) == 1:
            ek = kronecker_symbol(d, k)
            if ek:
                jmax = prec // (k * k)
                out[k * k * np.arange(1, jmax + 1)] += ek * k * base[1: jmax + 1]
        k += 1
    return out


def rankin_selberg_coeffs(phi: NewformCoefficients, d: int, chi: int = 0,
                          prec: Optional[int] = None) -> LFunctionSpec:
    """L(s, phi x theta(chi)) in the unitary normalization (center 1/2).

    Conductor |d N|, sign eta_d(-N), gamma factor (2 pi)^{-2s} Gamma(s + 1/2)^2.
    """
    if not is_fundamental(d):
        raise ValueError(f"{d} is not fundamental")
    N = phi.level
    Q = abs(d * N)
    if prec is None:
        prec = default_prec(Q)
    c = rankin_selberg_classical_coeffs(phi, d, chi, prec)
    n = np.arange(prec + 1, dtype=float)
    n[0] = 1
    b = c / np.sqrt(n)
    sign = kronecker_symbol(d, -N)
    return LFunctionSpec(b, RS_WEIGHT2_THETA, float(Q), complex(sign),
                         label=f"RS(N={N},d={d},chi={chi})", meta={"N": N, "d": d, "chi": chi})


def standard_spec(phi: NewformCoefficients, sign: Optional[int] = None,
                  prec: Optional[int] = None) -> LFunctionSpec:
    """L(s, phi) with b(n) = a(n)/sqrt(n), conductor sqrt(N).

    Without an explicit sign the root number is -w_N with w_N = phi.fricke_sign.
    """
    N = phi.level
    if sign is None:
        if not phi.fricke_sign:
            raise ValueError("sign unknown: pass sign or set fricke_sign")
        sign = -phi.fricke_sign
    if prec is None:
        prec = min(phi.prec, default_prec(math.sqrt(N)))
    a = np.array(phi.coefficients[: prec + 1], dtype=complex)
    n = np.arange(prec + 1, dtype=float)
    n[0] = 1
    return LFunctionSpec(a / np.sqrt(n), STD_WEIGHT2, math.sqrt(N), complex(sign),
                         label=f"std(N={N})", meta={"N": N})


def dirichlet_spec(d: int, prec: Optional[int] = None) -> LFunctionSpec:
    """L(s, eta_d) for a fundamental discriminant d (primitive real character, sign 1)."""
    q = abs(d)
    if prec is None:
        prec = default_prec(math.sqrt(q))
    b = np.array([0] + [kronecker_symbol(d, n) for n in range(1, prec + 1)], dtype=complex)
    gam = DIRICHLET_ODD if d < 0 else DIRICHLET_EVEN
    return LFunctionSpec(b, gam, math.sqrt(q), 1 + 0j, label=f"dirichlet({d})", meta={"d": d})


# ------------------------------------------------------------- kernels


@dataclass(frozen=True)
class Quadrature:
    c: float = 1.5
    h: float = 0.05
    decay_target: float = 40.0

    def nodes(self, gamma: GammaFactor) -> np.ndarray:
        tmax = max(25.0, 2 * self.decay_target / (math.pi * gamma.decay))
        return np.arange(-tmax, tmax + self.h / 2, self.h)


DEFAULT_QUAD = Quadrature()


def smoothing_kernel(gamma: GammaFactor, sigma: complex, y: np.ndarray,
                     quad: Quadrature = DEFAULT_QUAD, deriv: bool = False,
                     chunk: int = 2048) -> np.ndarray:
    """f(sigma, y) = (1/2 pi i) int_{(c)} gamma(sigma + w) y^{-(sigma + w)} dw / w.

    With deriv, the sigma-derivative.  Trapezoid rule on the vertical line.
    """
    t = quad.nodes(gamma)
    w = quad.c + 1j * t
    z = sigma + w
    lg = gamma.log(z)
    pref = np.exp(lg) / w * quad.h / (2 * math.pi)
    dl = gamma.log_derivative(z) if deriv else None
    y = np.asarray(y, dtype=float)
    out = np.empty(len(y), dtype=complex)
    for i in range(0, len(y), chunk):
        ly = np.log(y[i: i + chunk])[:, None]
        E = np.exp(-z[None, :] * ly)
        if deriv:
            E = E * (dl[None, :] - ly)
        out[i: i + chunk] = E @ pref
    return out


@dataclass(frozen=True)
class LValue:
    value: complex
    error_estimate: float


def _side(spec: LFunctionSpec, s: complex, T: float, coeffs: np.ndarray, quad: Quadrature,
          deriv: bool = False) -> tuple[complex, float]:
    n = np.arange(1, spec.prec + 1, dtype=float)
    y = n * T / spec.conductor
    f = smoothing_kernel(spec.gamma, s, y, quad, deriv)
    terms = coeffs[1:] * f
    # geometric tail from the kernel decay ratio at the cutoff
    # average over the upper half: sparse coefficients can vanish near the cutoff
    mean_b = float(np.mean(np.abs(coeffs[1 + len(terms) // 2:])))
    r = abs(f[-1]) / abs(f[-2]) if len(f) > 1 and f[-2] != 0 else 1.0
    tail = mean_b * abs(f[-1]) * (r / (1 - r) if r < 1 else len(f))
    return complex(np.sum(terms)), float(tail)


def completed_symmetric(spec: LFunctionSpec, s: complex, T: float = 1.0,
                        quad: Quadrature = DEFAULT_QUAD, tail_tol: float = 1e-7) -> LValue:
    """F(s) = Q^s Lambda(s) by the smoothed approximate functional equation."""
    s = complex(s)
    A, ta = _side(spec, s, T, spec.coeffs, quad)
    B, tb = _side(spec, 1 - s, 1 / T, np.conj(spec.coeffs), quad)
    val = T ** s * A + spec.sign * T ** (s - 1) * B
    err = abs(T ** s) * ta + abs(T ** (s - 1)) * tb
    scale = max(1.0, abs(val))
    if err > tail_tol * scale:
        raise InsufficientCoefficientsError(
            f"{spec.label}: truncation tail {err:.2e} at prec {spec.prec}; increase prec")
    return LValue(val, err)


def lambda_eval(spec: LFunctionSpec, s: complex, T: float = 1.0,
                quad: Quadrature = DEFAULT_QUAD, tail_tol: float = 1e-7) -> LValue:
    """Lambda(s) = gamma(s) L(s); valid for Re(s) in [-1, 2]."""
    s = complex(s)
    if not -1 <= s.real <= 2:
        raise ValueError("Re(s) must lie in [-1, 2]")
    F = completed_symmetric(spec, s, T, quad, tail_tol)
    q = spec.conductor ** (-s)
    return LValue(F.value * q, F.error_estimate * abs(q))


def l_value(spec: LFunctionSpec, s: complex, T: float = 1.0) -> complex:
    return lambda_eval(spec, s, T).value / spec.gamma(complex(s))


def fe_residual(spec: LFunctionSpec, samples: Sequence[complex], T: float = 1.2,
                quad: Quadrature = DEFAULT_QUAD) -> float:
    """max |Lambda(s) - sign Q^{1-2s} Lambda(1-s)| over the samples.

    T != 1 makes the two evaluations use different smoothing splits, so the
    residual is a genuine consistency test.
    """
    res = 0.0
    for s in samples:
        s = complex(s)
        a = lambda_eval(spec, s, T, quad, tail_tol=np.inf).value
        b = lambda_eval(spec, 1 - s, T, quad, tail_tol=np.inf).value
        res = max(res, abs(a - spec.sign * spec.conductor ** (1 - 2 * s) * b))
    return res


# ------------------------------------------------------------- derivatives


@dataclass(frozen=True)
class CentralDerivative:
    lambda_prime: float  # Lambda'(1/2), kernel series
    lambda_prime_numeric: float  # Lambda'(1/2), Richardson difference
    l_prime: float  # L'(1/2) = Lambda'(1/2) / gamma(1/2)
    l_prime_e1: Optional[float] = None  # standard weight 2 only

    @property
    def agreement(self) -> float:
        return abs(self.lambda_prime - self.lambda_prime_numeric)


def central_derivative(spec: LFunctionSpec, h: float = 1e-3, T: float = 1.2,
                       quad: Quadrature = DEFAULT_QUAD) -> CentralDerivative:
    if abs(spec.sign + 1) > 1e-12:
        raise EvenSignError("central derivative needs sign -1")
    # kernel series: F'(1/2) = sum b(n) d_sigma f + conj(b(n)) d_sigma f at T = 1
    A, _ = _side(spec, 0.5, 1.0, spec.coeffs, quad, deriv=True)
    B, _ = _side(spec, 0.5, 1.0, np.conj(spec.coeffs), quad, deriv=True)
    Fp = A + B
    lam_p = (Fp * spec.conductor ** -0.5).real

    def lam(s):
        return lambda_eval(spec, s, T, quad, tail_tol=np.inf).value

    d1 = (lam(0.5 + h) - lam(0.5 - h)) / (2 * h)
    d2 = (lam(0.5 + h / 2) - lam(0.5 - h / 2)) / h
    num = ((4 * d2 - d1) / 3).real
    g = spec.gamma(0.5).real
    e1 = None
    if spec.gamma.kind == "std_weight2":
        N = spec.meta["N"]
        n = np.arange(1, spec.prec + 1, dtype=float)
        a = (spec.coeffs[1:] * np.sqrt(n)).real
        e1 = float(2 * np.sum(a / n * exp_integral_e1_array(2 * math.pi * n / math.sqrt(N))))
    return CentralDerivative(lam_p, num, lam_p / g, e1)


# ------------------------------------------------------------- class-partial series


@dataclass(frozen=True)
class ClassPartialL:
    disc: int
    class_index: int
    coefficients: tuple[int, ...]  # sum over ideals in the class of norm n of a(n)


def ideals_in_class(d: int, A: int, prec: int) -> np.ndarray:
    """Number of integral ideals of norm n in class A, n = 0..prec."""
    cg = class_group(d)
    inv = cg.inverse(A)
    th = hecke_theta(d, inv, prec)
    out = np.array([int(x) for x in th.coefficients[1:]], dtype=np.int64)
    return np.concatenate([[0], out])


def class_partial_coeffs(d: int, A: int, phi: NewformCoefficients, prec: int) -> ClassPartialL:
    r = ideals_in_class(d, A, prec)
    a = phi.coefficients
    return ClassPartialL(d, A, tuple(int(r[n]) * int(a[n]) if n else 0 for n in range(prec + 1)))
