"""Concrete modular objects: Hecke theta series, Siegel theta, Eisenstein coset
sums, Maass operators, the Shimura lift on coefficients, and newform
coefficients of elliptic curves."""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Callable, Optional, Sequence

import numpy as np

from .lattice import (DiscriminantModule, QuadraticLattice, _frac_part, fincke_pohst,
                      ideal_norm_form)
from .quadfield import (BinaryForm, _positive_a, class_group, fundamental_unit,
                        kronecker_symbol, unit_count)
from .weil import VectorValuedQSeries, WeilRep

# ------------------------------------------------------------- Hecke theta


@dataclass(frozen=True)
class HeckeThetaSeries:
    disc: int
    class_index: int
    weight: int
    coefficients: tuple[Fraction, ...]  # r_A(0..prec)

    @property
    def prec(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, m: int) -> Fraction:
        return self.coefficients[m]


def _definite_counts(form: BinaryForm, M: int) -> np.ndarray:
    """#{(x, y) : form(x, y) = m} for 0 <= m <= M, form positive definite."""
    a, b, c = form.a, form.b, form.c
    d = b * b - 4 * a * c
    counts = np.zeros(M + 1, dtype=np.int64)
    # 4a f = (2a x + b y)^2 - d y^2, so |y| <= sqrt(4 a M / |d|)
    ymax = math.isqrt(4 * a * M // (-d)) + 1
    for y in range(-ymax, ymax + 1):
        rem = 4 * a * M + d * y * y  # (2ax + by)^2 <= rem
        if rem < 0:
            continue
        r = math.isqrt(rem)
        lo = math.ceil((-r - b * y) / (2 * a)) - 1
        hi = math.floor((r - b * y) / (2 * a)) + 1
        x = np.arange(lo, hi + 1, dtype=np.int64)
        v = a * x * x + b * x * y + c * y * y
        v = v[(v >= 0) & (v <= M)]
        counts += np.bincount(v, minlength=M + 1)[: M + 1]
    return counts


def _real_orbit_counts(form: BinaryForm, d: int, M: int, shift: float) -> np.ndarray:
    """#{lambda in a modulo units : |Q_a(lambda)| = m} for 1 <= m <= M (real field)."""
    q = ideal_norm_form(form)
    a, b = form.a, form.b
    t, u, _ = fundamental_unit(d)
    log_eps = math.log((t + u * math.sqrt(d)) / 2)
    sd = math.sqrt(d)
    Mn = a * M
    B1 = math.sqrt(Mn) * math.exp(log_eps * (shift + 1)) * (1 + 1e-9)
    B2 = math.sqrt(Mn) * math.exp(-log_eps * shift) * (1 + 1e-9)
    counts = np.zeros(M + 1, dtype=np.int64)
    ymax = int((B1 + B2) / sd) + 2
    for y in range(-ymax, ymax + 1):
        c2 = y * (-b - sd) / 2
        lo = math.floor((-B2 - c2) / a) - 1
        hi = math.ceil((B2 - c2) / a) + 1
        x = np.arange(lo, hi + 1, dtype=np.int64)
        s1 = x * a + y * (-b + sd) / 2
        s2 = x * a + c2
        nz = (np.abs(s1) > 0) & (np.abs(s2) > 0)
        x, s1, s2 = x[nz], s1[nz], s2[nz]
        ratio = (np.log(np.abs(s1)) - np.log(np.abs(s2))) / (2 * log_eps)
        keep = (ratio >= shift - 1e-12) & (ratio < shift + 1 - 1e-12)
        x = x[keep]
        v = np.abs(q.a * x * x + q.b * x * y + q.c * y * y)
        v = v[(v >= 1) & (v <= M)]
        counts += np.bincount(v, minlength=M + 1)[: M + 1]
    # both lambda and -lambda lie in the cone
    return counts // 2


@lru_cache(maxsize=128)
def _theta_counts(d: int, A: int, prec: int, shift: float) -> tuple[Fraction, ...]:
    cg = class_group(d)
    form = cg.classes[A]
    if d < 0:
        w = unit_count(d)
        raw = _definite_counts(ideal_norm_form(form), prec)
        return tuple(Fraction(int(c), w) for c in raw)
    form = _positive_a(form)
    raw = _real_orbit_counts(form, d, prec, shift)
    out = [Fraction(1, 2)] + [Fraction(int(c)) for c in raw[1:]]
    return tuple(out)


def hecke_theta(d: int, A: int, prec: int, shift: float = 0.0) -> HeckeThetaSeries:
    """r_A(m) = (1/w) #{lambda in a : Q_a(lambda) = m}; real fields count |Q_a| up to units.

    `shift` rotates the unit fundamental domain (real fields only).
    """
    if prec < 1:
        raise ValueError("prec must be >= 1")
    coeffs = _theta_counts(d, A, int(prec), float(shift))
    return HeckeThetaSeries(d, A, 1 if d < 0 else 0, coeffs)


def theta_chi(d: int, chi: int, prec: int) -> np.ndarray:
    """Coefficients of sum_A chi(A) theta_A for m = 0..prec."""
    cg = class_group(d)
    ch = cg.characters[chi]
    out = np.zeros(prec + 1, dtype=complex)
    for A in range(cg.h):
        th = hecke_theta(d, A, prec)
        out += ch[A] * np.array([float(x) for x in th.coefficients])
    return out


# ------------------------------------------------------------- Siegel theta


@dataclass(frozen=True)
class ThetaValue:
    values: np.ndarray  # one complex value per coset
    tail_bound: float
    terms: int


def projection_data(L: QuadraticLattice, pos_basis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(P, majorant) for the positive definite subspace spanned by the columns of pos_basis.

    P maps coordinates to the coordinates of the positive projection; the
    majorant M satisfies x^T M x / 2 = Q(x+) - Q(x-).
    """
    G = L.gram_float()
    B = np.atleast_2d(np.asarray(pos_basis, dtype=float))
    if B.shape[0] != L.rank:
        B = B.T
    Gp = B.T @ G @ B
    if np.any(np.linalg.eigvalsh(Gp) <= 0):
        raise ValueError("basis does not span a positive definite subspace")
    P = B @ np.linalg.solve(Gp, B.T @ G)
    Mz = 2 * G @ P - G
    Mz = (Mz + Mz.T) / 2
    return P, Mz


def siegel_theta_eval(L: QuadraticLattice, module: DiscriminantModule, tau: complex,
                      pos_basis, trunc_radius: float, rel_tol: float = 1e-12) -> ThetaValue:
    """theta_mu(tau, z) = v^{q/2} sum_{x in mu+L} e(Q(x+) tau + Q(x-) conj(tau)).

    The Grassmannian point is the positive definite subspace (columns of
    pos_basis); for definite lattices pass an identity or empty basis.
    """
    p, q = L.signature
    G = L.gram_float()
    v = tau.imag
    if p == L.rank:
        P, Mz = np.eye(L.rank), G
    elif p == 0:
        P, Mz = np.zeros((L.rank, L.rank)), -G
    else:
        P, Mz = projection_data(L, pos_basis)
    vals = np.zeros(module.order, dtype=complex)
    total = 0
    for i, mu in enumerate(module.cosets):
        shift = np.array([float(x) for x in mu])
        cand = fincke_pohst(Mz, shift, trunc_radius)
        if len(cand) == 0:
            continue
        x = cand + shift
        qx = 0.5 * np.einsum("ki,ij,kj->k", x, G, x)
        xp = x @ P.T
        qp = 0.5 * np.einsum("ki,ij,kj->k", xp, G, xp)
        qm = qx - qp
        vals[i] = np.sum(np.exp(2j * np.pi * (qp * tau + qm * np.conj(tau))))
        total += len(cand)
    vals *= v ** (q / 2)
    # shells beyond the radius: density of majorant values grows like r^{n/2 - 1}
    n = L.rank
    det = abs(np.linalg.det(Mz / 2))
    vol = math.pi ** (n / 2) / math.gamma(n / 2 + 1) / math.sqrt(det)
    R = trunc_radius
    tail = module.order * vol * (n / 2) * (R + 1) ** (n / 2) * math.exp(-2 * math.pi * v * R) / (2 * math.pi * v)
    tail *= v ** (q / 2)
    if tail > rel_tol * max(1.0, float(np.max(np.abs(vals)))):
        warnings.warn(f"theta truncation tail {tail:.2e} exceeds tolerance", RuntimeWarning)
    return ThetaValue(vals, tail, total)


def _g_matrix(z: complex) -> np.ndarray:
    v = z.imag
    return np.array([[math.sqrt(v), z.real / math.sqrt(v)], [0.0, 1 / math.sqrt(v)]])


def sig12_positive_line(N: int, z: complex) -> np.ndarray:
    """Coordinates (a, b, c) of a positive vector whose matrix fixes z."""
    return np.array([[abs(z) ** 2], [z.real / N], [1.0 / N]])


def la_embedding(L: QuadraticLattice) -> np.ndarray:
    """4x4 real matrix sending lattice coordinates to the entries of a 2x2 real
    matrix (row-major) with det = Q_A."""
    d = L.meta["disc"]
    fa, fb, _ = L.meta["form"]
    N = L.meta["N"]
    sa = math.sqrt(fa)
    E = np.zeros((4, 4))
    if d > 0:
        sd = math.sqrt(d)
        s1 = np.array([fa, (-fb + sd) / 2])  # sigma1 of (x, y)
        s2 = np.array([fa, (-fb - sd) / 2])
        # [[s1 l1, s1 l2], [s2 l2, s2 l1]]
        E[0, 0:2] = s1
        E[1, 2:4] = s1
        E[2, 2:4] = s2
        E[3, 0:2] = s2
    else:
        sd = math.sqrt(-d)
        re = np.array([fa, -fb / 2])
        im = np.array([0.0, sd / 2])
        # l1 = al + i be, l2 = ga + i de; [[al + ga, -be + de], [be + de, al - ga]]
        E[0, 0:2], E[0, 2:4] = re, re
        E[1, 0:2], E[1, 2:4] = -im, im
        E[2, 0:2], E[2, 2:4] = im, im
        E[3, 0:2], E[3, 2:4] = re, -re
    return E / (sa * N)


def la_positive_plane(L: QuadraticLattice, z1: complex, z2: complex) -> np.ndarray:
    """Basis (columns, lattice coordinates) of the positive plane g1 span(I, J) g2^-1."""
    E = la_embedding(L)
    g1, g2 = _g_matrix(z1), _g_matrix(z2)
    g2i = np.linalg.inv(g2)
    cols = []
    for X in (np.eye(2), np.array([[0.0, -1.0], [1.0, 0.0]])):
        Y = g1 @ X @ g2i
        cols.append(np.linalg.solve(E, Y.reshape(4)))
    return np.stack(cols, axis=1)


# ------------------------------------------------------------- Eisenstein series


def _sl2_word(a: int, b: int, c: int, d: int) -> list[tuple[str, int]]:
    """Factor [[a, b], [c, d]] in SL2(Z) as a product of T^k, S and -I."""
    word: list[tuple[str, int]] = []
    while c != 0:
        k = a // c
        word.append(("T", k))
        word.append(("S", 1))
        # S^-1 T^-k M
        a, b, c, d = c, d, -(a - k * c), -(b - k * d)
    # remaining +-T^k
    if a == 1:
        word.append(("T", b))
    else:
        word.append(("Z", 1))
        word.append(("T", -b))
    return word


def weil_matrix(rep: WeilRep, a: int, b: int, c: int, d: int) -> np.ndarray:
    """rho(gamma) for an even-signature module (a genuine SL2(Z) representation)."""
    p, q = rep.signature
    if (p - q) % 2:
        raise ValueError("odd signature needs metaplectic data")
    n = rep.module.order
    M = np.eye(n, dtype=complex)
    Tdiag = np.diag(rep.T_matrix)
    for g, k in _sl2_word(a, b, c, d):
        if g == "T":
            M = M * (Tdiag ** k)[None, :]
        elif g == "S":
            M = M @ rep.S_matrix
        else:
            M = M @ rep.Z_matrix
    return M


@dataclass
class EisensteinEvaluator:
    """Truncated coset sum E(tau, s; l) = sum_{Gamma_inf \\ Gamma} [v^{(s+1-l)/2} e_0] |_l gamma.

    Bottom rows (c, d) range over coprime pairs with |c|, |d| <= c_max, both
    signs included, unless an explicit pair list is given.
    """
    rep: WeilRep
    c_max: int = 40
    pairs: Optional[list] = None
    _cd: np.ndarray = field(init=False, repr=False)
    _vecs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.pairs is None:
            C = self.c_max
            self.pairs = [(c, d) for c in range(-C, C + 1) for d in range(-C, C + 1)
                          if (c != 0 or abs(d) == 1) and gcd(c, d) == 1]
        z = self.rep.module.zero
        vecs = []
        for c, d in self.pairs:
            if c == 0:
                a, b = d, 0
            else:
                _, a, b = _ext_gcd(d, -c)
            W = weil_matrix(self.rep, a, b, c, d)
            # rho(gamma)^-1 e_0 = conj(rho(gamma))^T e_0
            vecs.append(W.conj().T[:, z])
        self._cd = np.array(self.pairs, dtype=float)
        self._vecs = np.array(vecs)

    def translated(self, k: int) -> "EisensteinEvaluator":
        """Evaluator on the re-indexed pair set (c, d - k c), so that
        translated(k)(tau + k) = rho(T)^k self(tau) term by term."""
        return EisensteinEvaluator(self.rep, self.c_max, [(c, d - k * c) for c, d in self.pairs])

    def __call__(self, tau: complex, s: complex, l: int) -> np.ndarray:
        return self.evaluate(tau, s, l)[0]

    def evaluate(self, tau: complex, s: complex, l: int) -> tuple[np.ndarray, float]:
        sigma = complex(s).real
        if sigma <= 1:
            raise ValueError("Eisenstein sums need Re(s) > 1")
        v = tau.imag
        c, d = self._cd[:, 0], self._cd[:, 1]
        j = c * tau + d
        w = j ** (-l) * v ** ((s + 1 - l) / 2) * np.abs(j) ** (-(s + 1 - l))
        val = w @ self._vecs
        # tail: |c tau + d|^2 >= lam_min (c^2 + d^2)
        lam = np.linalg.eigvalsh(np.array([[abs(tau) ** 2, tau.real], [tau.real, 1.0]]))[0]
        kappa = math.sqrt(lam)
        C = self.c_max
        tail = 8 * v ** ((sigma + 1) / 2) * kappa ** (-sigma - 1) * C ** (1 - sigma) / (sigma - 1)
        return val, tail


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a x + b y = g = gcd >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


# ------------------------------------------------------------- Maass operators


@dataclass(frozen=True)
class DerivativeResult:
    value: complex | np.ndarray
    error: float


def _partial(F: Callable, tau: complex, h: float, direction: complex):
    def D(step):
        return (np.asarray(F(tau + step * direction)) - np.asarray(F(tau - step * direction))) / (2 * step)
    d1, d2 = D(h), D(h / 2)
    rich = (4 * d2 - d1) / 3
    return rich, float(np.max(np.abs(rich - d2)))


def maass_operator(F: Callable, kind: str, tau: complex, h: float = 1e-3, l: float = 0) -> DerivativeResult:
    """Lowering -2 i v^2 d/dtaubar, raising 2 i d/dtau + l/v, or xi_l = v^{l-2} conj(L_l F)."""
    du, eu = _partial(F, tau, h, 1)
    dv, ev = _partial(F, tau, h, 1j)
    v = tau.imag
    err = max(eu, ev)
    if kind == "lower":
        dbar = 0.5 * (du + 1j * dv)
        return DerivativeResult(-2j * v * v * dbar, 2 * v * v * err)
    if kind == "raise":
        dtau = 0.5 * (du - 1j * dv)
        return DerivativeResult(2j * dtau + l / v * np.asarray(F(tau)), 2 * err)
    if kind == "xi":
        dbar = 0.5 * (du + 1j * dv)
        return DerivativeResult(v ** (l - 2) * np.conj(-2j * v * v * dbar), 2 * v ** l * err)
    raise ValueError(f"unknown operator {kind!r}")


# ------------------------------------------------------------- Shimura lift


def _sig12_N(module: DiscriminantModule) -> int:
    return module.lattice.meta["N"]


def shimura_lift_coeffs(g: VectorValuedQSeries, mu0: int, m0, prec: int) -> list:
    """c(n) = sum_{d | n} (D0/d) c_g(mu0 n/d, m0 n^2/d^2) for n = 1..prec (index 0 unused)."""
    module = g.module
    N = _sig12_N(module)
    m0 = Fraction(m0)
    D0 = -4 * N * m0
    if D0.denominator != 1:
        raise ValueError("D0 = -4 N m0 must be an integer")
    D0 = int(D0)
    if D0 % 4 not in (0, 1):
        raise ValueError(f"{D0} is not a discriminant")
    sign = -1 if g.dual else 1
    if _frac_part(m0 - sign * module.Q(mu0)) != 0:
        raise ValueError("m0 is not congruent to Q(mu0)")
    out = [0] * (prec + 1)
    for n in range(1, prec + 1):
        tot = 0
        for d in _divisors(n):
            k = n // d
            tot += kronecker_symbol(D0, d) * g.coefficient(module.scale(mu0, k), m0 * k * k)
        out[n] = tot
    return out


def _divisors(n: int) -> list[int]:
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def dirichlet_convolve(a: Sequence, b: Sequence, prec: int) -> list:
    """(a * b)(n) = sum_{d e = n} a(d) b(e) for n = 1..prec (index 0 unused)."""
    out = [0] * (prec + 1)
    for d in range(1, prec + 1):
        ad = a[d]
        if ad == 0:
            continue
        for e in range(1, prec // d + 1):
            out[d * e] += ad * b[e]
    return out


def hecke_tp_scalar(a: Sequence, p: int, prec: int) -> list:
    """T_p on weight 2 coefficients (p not dividing the level): a(pn) + p a(n/p)."""
    out = [0] * (prec + 1)
    for n in range(1, prec + 1):
        out[n] = a[p * n] + (p * a[n // p] if n % p == 0 else 0)
    return out


def hecke_tp2_sig12(g: VectorValuedQSeries, p: int, keys) -> VectorValuedQSeries:
    """T_{p^2} on weight 3/2 coefficients of the signature (1,2) module:
    c(mu, m) -> c(p mu, p^2 m) + (D/p) c(mu, m) + p c(mu', m/p^2), D = -4 N m,
    mu' the coset with p mu' = mu and Q(mu') = m/p^2 mod 1."""
    module = g.module
    N = _sig12_N(module)
    out = VectorValuedQSeries(module, g.weight, g.dual)
    for mu, m in keys:
        D = int(-4 * N * m)
        val = g.coefficient(module.scale(mu, p), p * p * m)
        val += kronecker_symbol(D, p) * g.coefficient(mu, m)
        mq = m / (p * p)
        if (-4 * N * mq).denominator == 1:
            for nu in range(module.order):
                if module.scale(nu, p) == mu and _frac_part(module.Q(nu) - mq) == 0:
                    val += p * g.coefficient(nu, mq)
                    break
        if val:
            out.add(mu, m, val)
    return out


# ------------------------------------------------------------- elliptic curves


class BadReductionError(ValueError):
    pass


def curve_invariants(curve: Sequence[int]) -> dict:
    a1, a2, a3, a4, a6 = curve
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    disc = -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return {"b2": b2, "b4": b4, "b6": b6, "b8": b8, "disc": disc}


def count_points(curve: Sequence[int], p: int) -> int:
    """#E(F_p) including the point at infinity, by exhaustive search."""
    a1, a2, a3, a4, a6 = (c % p for c in curve)
    x = np.arange(p, dtype=np.int64)[:, None]
    y = np.arange(p, dtype=np.int64)[None, :]
    lhs = (y * y + a1 * x * y + a3 * y) % p
    rhs = (((x * x % p) * x) % p + a2 * x * x + a4 * x + a6) % p
    return int(np.sum(lhs == rhs)) + 1


def _count_points_odd(curve: Sequence[int], p: int) -> int:
    inv = curve_invariants(curve)
    b2, b4, b6 = inv["b2"] % p, inv["b4"] % p, inv["b6"] % p
    x = np.arange(p, dtype=np.int64)
    f = (4 * ((x * x) % p * x % p) + b2 * (x * x % p) + 2 * b4 * x + b6) % p
    chi = np.full(p, -1, dtype=np.int64)
    chi[(x * x) % p] = 1
    chi[0] = 0
    return p + 1 + int(np.sum(chi[f]))


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def ap_from_curve(curve: Sequence[int], p: int, local_data: Optional[dict] = None) -> int:
    """a_p = p + 1 - #E(F_p) at good primes; bad primes need local_data {p: a_p}."""
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    disc = curve_invariants(curve)["disc"]
    if disc % p == 0:
        if local_data and p in local_data:
            return int(local_data[p])
        raise BadReductionError(f"bad reduction at {p}; supply local data")
    n = count_points(curve, p) if p == 2 else _count_points_odd(curve, p)
    ap = p + 1 - n
    assert ap * ap <= 4 * p, "Hasse bound violated"
    return ap


def bad_prime_ap(curve: Sequence[int], p: int) -> int:
    """a_p at a prime of bad reduction from the singular cubic: +1 split, -1 nonsplit, 0 additive."""
    return p + 1 - count_points(curve, p)


def _primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return [int(i) for i in np.nonzero(sieve)[0]]


@dataclass(frozen=True)
class NewformCoefficients:
    level: int
    coefficients: tuple[int, ...]  # a(0..prec), a(0) = 0
    fricke_sign: int = 0
    weight: int = 2

    @property
    def prec(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, n: int) -> int:
        return self.coefficients[n]


def ap_table(curve: Sequence[int], pmax: int, local_data: Optional[dict] = None,
             cache: Optional[str] = None) -> dict[int, int]:
    """a_p for primes p <= pmax, optionally read from and written to a cache file."""
    table: dict[int, int] = {}
    if cache and os.path.exists(cache):
        table = read_ap_cache(cache)
    disc = curve_invariants(curve)["disc"]
    changed = False
    for p in _primes_upto(pmax):
        if p in table:
            continue
        if disc % p == 0 and not (local_data and p in local_data):
            table[p] = bad_prime_ap(curve, p)
        else:
            table[p] = ap_from_curve(curve, p, local_data)
        changed = True
    if cache and changed:
        write_ap_cache(cache, table)
    return {p: a for p, a in table.items() if p <= pmax}


def read_ap_cache(path: str) -> dict[int, int]:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                p, a = line.split()
                out[int(p)] = int(a)
    return out


def write_ap_cache(path: str, table: dict[int, int]) -> None:
    with open(path, "w") as fh:
        for p in sorted(table):
            fh.write(f"{p} {table[p]}\n")


def cache_path(cache_dir: str, curve: Sequence[int]) -> str:
    key = "_".join(str(c) for c in curve)
    return os.path.join(cache_dir, f"ap_{key}.txt")


def newform_coefficients(curve: Sequence[int], prec: int, level: int,
                         local_data: Optional[dict] = None, fricke_sign: int = 0,
                         cache: Optional[str] = None) -> NewformCoefficients:
    """a(n), n <= prec, from a_p by the Hecke recursion and multiplicativity."""
    aps = ap_table(curve, prec, local_data, cache)
    a = [0] * (prec + 1)
    if prec >= 1:
        a[1] = 1
    # smallest prime factor sieve
    spf = list(range(prec + 1))
    for p in _primes_upto(math.isqrt(prec) + 1):
        for k in range(p * p, prec + 1, p):
            if spf[k] == k:
                spf[k] = p
    for n in range(2, prec + 1):
        p = spf[n]
        m, k = n, 0
        while m % p == 0:
            m //= p
            k += 1
        if m > 1:
            a[n] = a[n // m] * a[m]
            continue
        ap = aps[p]
        if k == 1:
            a[n] = ap
        elif level % p == 0:
            a[n] = ap * a[n // p]
        else:
            a[n] = ap * a[n // p] - p * a[n // (p * p)]
    return NewformCoefficients(level, tuple(a), fricke_sign)
