"""Heegner points on X0(N), CM cycle degrees, closed geodesics and their traces."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Callable, Optional

import numpy as np

from .numerics import gauss_legendre
from .quadfield import (BinaryForm, class_group, is_fundamental, reduce_definite,
                        unit_count)


class NoSquareRootError(ValueError):
    pass


class SingularEvaluationError(ValueError):
    pass


class IsotropicComplementError(ValueError):
    pass


# ------------------------------------------------------------- SL2 / Gamma0(N) helpers


def _mat_mul(x, y):
    return ((x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]),
            (x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]))


def _mat_inv(x):
    (a, b), (c, d) = x
    return ((d, -b), (-c, a))


def _complete(p: int, q: int) -> tuple:
    """An SL2(Z) matrix with first column (p, q), gcd(p, q) = 1."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    a, b = p, q
    while b:
        k = a // b
        a, b = b, a - k * b
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    if a < 0:
        x0, y0 = -x0, -y0
    # p x0 + q y0 = 1 -> [[p, -y0], [q, x0]]
    return ((p, -y0), (q, x0))


def projective_line(N: int) -> list[tuple[int, int]]:
    """Coprime integer pairs (p, q), one per point of P^1(Z/N)."""
    if N == 1:
        return [(1, 0)]
    units = [u for u in range(1, N) if gcd(u, N) == 1]
    seen = set()
    reps = []
    for p in range(N):
        for q in range(N):
            if gcd(gcd(p, q), N) != 1:
                continue
            key = min(((u * p) % N, (u * q) % N) for u in units)
            if key in seen:
                continue
            seen.add(key)
            qq = q if q else N
            k = 0
            while gcd(p + k * N, qq) != 1:
                k += 1
            reps.append((p + k * N, qq))
    return reps


def gamma0_index(N: int) -> int:
    out = N
    n, p = N, 2
    while p * p <= n:
        if n % p == 0:
            out = out // p * (p + 1)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out = out // n * (n + 1)
    return out


def automorphs(f: BinaryForm) -> list[tuple]:
    """Proper automorphs of a positive definite form (with -I)."""
    D = f.disc
    w = unit_count(D)
    sols = {2: [(2, 0), (-2, 0)], 4: [(2, 0), (-2, 0), (0, 1), (0, -1)],
            6: [(2, 0), (-2, 0), (1, 1), (-1, -1), (1, -1), (-1, 1)]}[w]
    a, b, c = f.a, f.b, f.c
    out = []
    for t, u in sols:
        if t * t - D * u * u != 4:
            continue
        out.append((((t - b * u) // 2, -c * u), (a * u, (t + b * u) // 2)))
    return out


# ------------------------------------------------------------- Heegner points


@dataclass(frozen=True)
class HeegnerPoint:
    form: BinaryForm
    tau: complex
    stabilizer_order: int


@dataclass(frozen=True)
class HeegnerPointSet:
    N: int
    D: int
    r: int
    points: tuple[HeegnerPoint, ...]

    def __len__(self):
        return len(self.points)


def _translate_normal(f: BinaryForm) -> BinaryForm:
    """Move b into (-a, a] by tau -> tau + k (an element of Gamma0(N))."""
    a, b, c = f
    k = (a - b) // (2 * a)
    return f.act(((1, k), (0, 1)))


def _gamma0_equivalent(f: BinaryForm, g: BinaryForm, N: int) -> bool:
    rf, Mf = reduce_definite(f)
    rg, Mg = reduce_definite(g)
    if rf != rg:
        return False
    # f o Mf = rf, g o Mg = rg = rf, so f o (Mf A Mg^-1) = g for automorphs A of rf
    for A in automorphs(rf):
        M = _mat_mul(_mat_mul(Mf, A), _mat_inv(Mg))
        if M[1][0] % N == 0:
            return True
    return False


def _canonical(g: BinaryForm, N: int, r: int) -> BinaryForm:
    """Least (a, b) in the Gamma0(N)-class of g among forms with N | a, b = r mod 2N,
    -a < b <= a.  The search stops at g itself, so it is complete."""
    D = g.disc
    for a in range(N, g.a + 1, N):
        for b in range(-a + 1, a + 1):
            if (b - r) % (2 * N) or (b * b - D) % (4 * a):
                continue
            h = BinaryForm(a, b, (b * b - D) // (4 * a))
            if h == g or _gamma0_equivalent(h, g, N):
                return h
    return g


def heegner_points(N: int, D: int, r: int, strict: bool = True) -> HeegnerPointSet:
    """Gamma0(N)-classes of forms [a, b, c] of discriminant D with N | a, b = r mod 2N."""
    if D >= 0:
        raise ValueError("D must be negative")
    if not is_fundamental(D):
        raise ValueError(f"{D} is not fundamental")
    if strict and gcd(D, 2 * N) != 1:
        raise ValueError("need gcd(D, 2N) = 1 (pass strict=False to relax)")
    if (D - r * r) % (4 * N):
        raise NoSquareRootError(f"{D} != {r}^2 mod {4 * N}")
    cg = class_group(D)
    w = unit_count(D)
    found: list[BinaryForm] = []
    for f in cg.classes:
        for p, q in projective_line(N):
            M = _complete(p, q)
            g = f.act(M)
            if g.a % N or (g.b - r) % (2 * N):
                continue
            g = _canonical(_translate_normal(g), N, r)
            if any(_gamma0_equivalent(g, h, N) for h in found):
                continue
            found.append(g)
    found.sort(key=lambda h: (h.a, h.b, h.c))
    pts = tuple(HeegnerPoint(g, g.root(), w // 2) for g in found)
    return HeegnerPointSet(N, D, r, pts)


def cm_cycle_degree(N: int, D: int, convention: str = "classical", r: Optional[int] = None,
                    strict: bool = True) -> Fraction:
    """Sum of 1/e_tau over Heegner points: 2h/w classically, h/(2w) with the literal reading."""
    if r is None:
        r = next(x for x in range(2 * N) if (D - x * x) % (4 * N) == 0)
    pts = heegner_points(N, D, r, strict)
    if convention == "classical":
        return sum((Fraction(1, p.stabilizer_order) for p in pts.points), Fraction(0))
    if convention == "literal":
        return Fraction(len(pts), 2 * unit_count(D))
    raise ValueError(f"unknown convention {convention!r}")


def trace_cm(F: Callable[[complex], complex], N: int, D: int, r: int, strict: bool = True) -> complex:
    pts = heegner_points(N, D, r, strict)
    total = 0j
    for p in pts.points:
        val = complex(F(p.tau))
        if not cmath.isfinite(val):
            raise SingularEvaluationError(f"function is singular at {p.tau}")
        total += val / p.stabilizer_order
    return total


# ------------------------------------------------------------- j-invariant


def _series_mul(a: list[int], b: list[int], n: int) -> list[int]:
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out


@lru_cache(maxsize=4)
def j_coefficients(terms: int = 50) -> tuple[int, ...]:
    """c(-1), c(0), c(1), ... of j = E4^3 / Delta (length `terms`)."""
    n = terms + 1
    sigma3 = [0] + [sum(d ** 3 for d in range(1, k + 1) if k % d == 0) for k in range(1, n)]
    E4 = [1] + [240 * sigma3[k] for k in range(1, n)]
    E43 = _series_mul(_series_mul(E4, E4, n), E4, n)
    # Delta / q = prod (1 - q^k)^24
    P = [1] + [0] * (n - 1)
    for k in range(1, n):
        for _ in range(24):
            for i in range(n - 1, k - 1, -1):
                P[i] -= P[i - k]
    # j * q = E4^3 / P
    out = [0] * n
    for i in range(n):
        out[i] = E43[i] - sum(out[j] * P[i - j] for j in range(i))
    return tuple(out[:terms])


def reduce_to_fundamental_domain(tau: complex) -> complex:
    for _ in range(1000):
        tau = complex(tau.real - math.floor(tau.real + 0.5), tau.imag)
        if abs(tau) < 1 - 1e-15:
            tau = -1 / tau
        else:
            return tau
    raise RuntimeError("reduction did not terminate")


def j_invariant(tau: complex, terms: int = 50) -> complex:
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half plane")
    tau = reduce_to_fundamental_domain(tau)
    q = cmath.exp(2j * math.pi * tau)
    c = j_coefficients(terms)
    total = 0j
    qk = 1 / q
    for ck in c:
        total += ck * qk
        qk *= q
    return total


# ------------------------------------------------------------- closed geodesics


@dataclass(frozen=True)
class ClosedGeodesic:
    N: int
    vector: tuple[Fraction, Fraction, Fraction]
    form: BinaryForm
    m: Fraction
    endpoints: tuple[float, float]  # start, end (orientation)
    automorph: tuple
    length: float
    standard_map: tuple  # g in SL2(R) with vector = g x0 g^-1, x0 = diag(1, -1) multiple
    orientation: int = 1


def _primitive_form_of_vector(N: int, x) -> BinaryForm:
    a, b, c = map(Fraction, x)
    coeffs = [N * c, -2 * N * b, a]
    den = 1
    for v in coeffs:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in coeffs]
    g = gcd(gcd(abs(ints[0]), abs(ints[1])), abs(ints[2]))
    return BinaryForm(*(v // g for v in ints))


def _pell(D: int) -> tuple[int, int]:
    """Smallest t, u > 0 with t^2 - D u^2 = 4."""
    u = 1
    while True:
        t2 = D * u * u + 4
        t = math.isqrt(t2)
        if t * t == t2:
            return t, u
        u += 1


def geodesic_from_vector(N: int, x) -> ClosedGeodesic:
    """Closed geodesic of a vector with Q(x) = a c - N b^2 < 0 (length m = -Q(x))."""
    a, b, c = map(Fraction, x)
    Qx = a * c - N * b * b
    if Qx >= 0:
        raise ValueError("geodesics come from vectors with Q(x) < 0 in this model")
    m = -Qx
    f = _primitive_form_of_vector(N, x)
    D = f.disc
    if math.isqrt(D) ** 2 == D:
        raise IsotropicComplementError("orthogonal complement is split; the geodesic is infinite")
    t, u = _pell(D)
    base = (((t - f.b * u) // 2, -f.c * u), (f.a * u, (t + f.b * u) // 2))
    A = base
    k = 1
    while A[1][0] % N:
        A = _mat_mul(A, base)
        k += 1
    eps = (t + u * math.sqrt(D)) / 2
    length = 2 * k * math.log(eps)
    # matrix X = [[b, -a/N], [c, -b]], eigenvalues +-sqrt(m/N)
    beta = math.sqrt(float(m) / N)
    X = np.array([[float(b), -float(a) / N], [float(c), -float(b)]])
    vp = _eigvec(X, beta)
    vm = _eigvec(X, -beta)
    g = np.column_stack([vp, vm])
    if np.linalg.det(g) < 0:
        g[:, 1] = -g[:, 1]
    g = g / math.sqrt(np.linalg.det(g))
    start = _moebius_real(g, 0.0)
    end = _moebius_real(g, math.inf)
    return ClosedGeodesic(N, (a, b, c), f, m, (start, end), A, length,
                          tuple(map(tuple, g)), 1)


def geodesic_from_form(N: int, form: BinaryForm) -> ClosedGeodesic:
    """Geodesic joining the real roots of `form`, via its vector (c, -b/2N, a/N)."""
    A, B, C = form
    return geodesic_from_vector(N, (Fraction(C), Fraction(-B, 2 * N), Fraction(A, N)))


def _eigvec(X: np.ndarray, lam: float) -> np.ndarray:
    M = X - lam * np.eye(2)
    # null vector of a rank-one 2x2 matrix
    row = M[0] if np.abs(M[0]).sum() > np.abs(M[1]).sum() else M[1]
    return np.array([-row[1], row[0]])


def _moebius_real(g, x: float) -> float:
    (a, b), (c, d) = g
    if math.isinf(x):
        return a / c if c != 0 else math.inf
    den = c * x + d
    return (a * x + b) / den if den != 0 else math.inf


def automorph_fixes_vector(geo: ClosedGeodesic) -> bool:
    """gamma X gamma^-1 = X exactly, X the matrix of the vector."""
    a, b, c = geo.vector
    N = geo.N
    X = ((b, -a / N), (c, -b))
    G = tuple(tuple(Fraction(v) for v in row) for row in geo.automorph)
    Y = _mat_mul(_mat_mul(G, X), _mat_inv(G))
    return Y == X


def geodesic_point(geo: ClosedGeodesic, t) -> np.ndarray:
    """Point at arclength t along the oriented geodesic (t = 0 at g(i))."""
    (a, b), (c, d) = geo.standard_map
    z = 1j * np.exp(np.asarray(t, dtype=float))
    return (a * z + b) / (c * z + d)


def trace_geodesic(F: Callable, geo: ClosedGeodesic, quad_points: int = 64, base: float = 0.0,
                   orientation: int = 1) -> complex:
    """(1/2 pi) int over one period of F dz_x, dz_x = +-dz/(sqrt(m) z) in standard position,
    i.e. (sign / (2 pi sqrt m)) times the arclength integral."""
    if not math.isfinite(geo.length) or geo.length <= 0:
        raise ValueError("geodesic is not closed")
    nodes, weights = gauss_legendre(quad_points)
    half = geo.length / 2
    t = base + half * (nodes + 1)
    z = geodesic_point(geo, t)
    vals = np.array([F(zz) for zz in z], dtype=complex)
    integral = half * np.dot(weights, vals)
    return orientation * integral / (2 * math.pi * math.sqrt(float(geo.m)))
