"""Automorphic Green's functions: closed-form theta lifts, Legendre-Q sums, the
Gamma_0(N) resolvent kernel, Laplacian eigenchecks and CM-cycle sums.

Sign convention: lattices carry Q with signature (n, 2) read as (p, q) = (n, 2)
with the positive part of dimension n, so the special vectors have Q = m > 0
and the Grassmannian point is the positive n-plane.  The kernel argument is
x = m / Q(lambda_+) in (0, 1], equal to 1 on the divisor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .cycles import HeegnerPointSet, ClosedGeodesic, gamma0_index, trace_geodesic
from .lattice import (DiscriminantModule, MajorantBound, QuadraticLattice, _frac_part,
                      enumerate_quadric)
from .modforms import la_positive_plane, projection_data, sig12_positive_line
from .numerics import gauss_legendre, hyp2f1_real_array, legendre_q_array

Point = Union[complex, tuple[complex, complex]]


class SingularPointError(ValueError):
    """Evaluation point lies on (or within the clearance of) the singular set."""


class StencilError(ValueError):
    """Finite-difference stencil touches the singular set or a zero of F."""


@dataclass(frozen=True)
class GreenValue:
    value: float
    tail_bound: float
    terms: int


# ------------------------------------------------------------- kernels


def _legendre_q_large(s: float, t: np.ndarray) -> np.ndarray:
    """Q_{s-1}(t) from the expansion in 1/t^2 (fast for t >= 1.5)."""
    pref = math.sqrt(math.pi) * math.exp(math.lgamma(s) - math.lgamma(s + 0.5)) / 2 ** s
    return pref * t ** (-s) * hyp2f1_real_array(s / 2, (s + 1) / 2, s + 0.5, 1.0 / (t * t))


def legendre_q_fast(s: float, t) -> np.ndarray:
    """Q_{s-1}(t) for real s > 0 and t > 1, choosing the faster expansion per point."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    far = t >= 1.5
    if np.any(far):
        out[far] = _legendre_q_large(s, t[far])
    if np.any(~far):
        out[~far] = legendre_q_array(s, t[~far])
    return out


def legendre_q_tail_integral(s: float, T: float, terms: int = 200) -> float:
    """Integral of Q_{s-1}(t) over t in [T, inf), from the 1/t^2 expansion (s > 1, T > 1)."""
    if s <= 1:
        raise ValueError("the tail integral needs s > 1")
    pref = math.sqrt(math.pi) * math.exp(math.lgamma(s) - math.lgamma(s + 0.5)) / 2 ** s
    coef = 1.0
    total = 0.0
    for k in range(terms):
        piece = coef * T ** (1 - s - 2 * k) / (s + 2 * k - 1)
        total += piece
        if abs(piece) < 1e-17 * abs(total):
            break
        coef *= (s / 2 + k) * ((s + 1) / 2 + k) / ((s + 0.5 + k) * (k + 1))
    return pref * total


# ------------------------------------------------------------- theta lift


def positive_subspace(L: QuadraticLattice, z: Point) -> np.ndarray:
    """Columns spanning the positive subspace attached to the point z."""
    fam = L.meta.get("family")
    if fam == "sig12":
        return sig12_positive_line(L.meta["N"], complex(z))
    if fam == "LA":
        z1, z2 = z
        return la_positive_plane(L, complex(z1), complex(z2))
    raise ValueError(f"no Grassmannian model for lattice family {fam!r}")


@dataclass(frozen=True)
class LiftEvaluator:
    """Regularized theta lift of the Poincare series attached to (coset, m).

    `radius` bounds the majorant 2 Q(x+) - m of enumerated vectors and
    `clearance` is the minimal distance 1 - x from the divisor.
    """
    lattice: QuadraticLattice
    module: DiscriminantModule
    coset: int
    m: Fraction
    s: float
    radius: float = 400.0
    clearance: float = 1e-2

    def __post_init__(self):
        object.__setattr__(self, "m", Fraction(self.m))
        if self.lattice.signature[1] != 2:
            raise ValueError("lift needs a lattice with two negative directions")
        if self.m <= 0:
            raise ValueError("special vectors have Q = m > 0 in this sign convention")
        if self.s <= self.harmonic_point:
            raise ValueError(f"series converges only for s > {self.harmonic_point}")

    @property
    def n(self) -> int:
        return self.lattice.signature[0]

    @property
    def harmonic_point(self) -> float:
        return self.n / 4 + 0.5

    @property
    def exponent(self) -> float:
        return self.s + self.n / 4 - 0.5

    def vectors(self, z: Point, radius: Optional[float] = None) -> np.ndarray:
        """Real coordinates of the vectors in coset + L with Q = m inside the majorant ball at z."""
        mu = self.module.cosets[self.coset]
        if _frac_part(self.module.Q(self.coset) - self.m) != 0:
            return np.zeros((0, self.lattice.rank))
        _, M = projection_data(self.lattice, positive_subspace(self.lattice, z))
        R = self.radius if radius is None else radius
        sl = enumerate_quadric(self.lattice, mu, self.m, MajorantBound(M, R))
        if not sl.vectors:
            return np.zeros((0, self.lattice.rank))
        return np.array([[float(c) for c in v] for v in sl.vectors])

    def kernel_arguments(self, z: Point, X: np.ndarray) -> np.ndarray:
        """x = m / Q(lambda_+) for each row of X."""
        P, _ = projection_data(self.lattice, positive_subspace(self.lattice, z))
        G = self.lattice.gram_float()
        xp = X @ P.T
        qp = 0.5 * np.einsum("ki,ij,kj->k", xp, G, xp)
        x = float(self.m) / qp
        if x.size and np.max(x) >= 1 - self.clearance:
            raise SingularPointError(f"point within {1 - np.max(x):.2e} of the divisor")
        return x

    def tail_estimate(self, count: int, z: Point, radius: float) -> float:
        """Remainder beyond the ball, from the growth count ~ X^{n/2} of Q(x+) <= X."""
        k = self.n / 2
        a = self.exponent
        X = (radius + float(self.m)) / 2
        c = max(count, 1) / X ** k
        xR = min(float(self.m) / X, 1 - self.clearance)
        fR = float(hyp2f1_real_array(a, self.s - self.n / 4 + 0.5, 2 * self.s, np.array([xR]))[0])
        pref = 2 * math.exp(math.lgamma(a) - math.lgamma(2 * self.s))
        return 2 * pref * c * k * float(self.m) ** a * fR * X ** (k - a) / (a - k)


def lift_closed_form(ev: LiftEvaluator, z: Point, vectors: Optional[np.ndarray] = None) -> GreenValue:
    """2 Gamma(a)/Gamma(2s) sum x^a 2F1(a, s - n/4 + 1/2; 2s; x), a = s + n/4 - 1/2."""
    X = ev.vectors(z) if vectors is None else vectors
    if len(X) == 0:
        return GreenValue(0.0, 0.0 if vectors is not None else ev.tail_estimate(0, z, ev.radius), 0)
    x = ev.kernel_arguments(z, X)
    a = ev.exponent
    b = ev.s - ev.n / 4 + 0.5
    pref = 2 * math.exp(math.lgamma(a) - math.lgamma(2 * ev.s))
    val = pref * float(np.sum(x ** a * hyp2f1_real_array(a, b, 2 * ev.s, x)))
    tail = 0.0 if vectors is not None else ev.tail_estimate(len(X), z, ev.radius)
    return GreenValue(val, tail, len(X))


def lift_legendre_form(ev: LiftEvaluator, z: Point, vectors: Optional[np.ndarray] = None) -> GreenValue:
    """The same lift rewritten through Legendre functions of the second kind.

    n = 1: each term is c Q_{2s-3/2}(1/sqrt(x)); n = 2: (4/Gamma(s)) Q_{s-1}(2/x - 1).
    """
    X = ev.vectors(z) if vectors is None else vectors
    if len(X) == 0:
        return GreenValue(0.0, 0.0, 0)
    x = ev.kernel_arguments(z, X)
    s = ev.s
    if ev.n == 1:
        a = s - 0.25
        nu = 2 * s - 1.5
        conv = math.exp((nu + 1) * math.log(2) + math.lgamma(nu + 1.5)
                        - 0.5 * math.log(math.pi) - math.lgamma(nu + 1))
        pref = 2 * math.exp(math.lgamma(a) - math.lgamma(2 * s)) * conv
        val = pref * float(np.sum(legendre_q_fast(nu + 1, 1 / np.sqrt(x))))
    elif ev.n == 2:
        val = 4 / math.gamma(s) * float(np.sum(legendre_q_fast(s, 2 / x - 1)))
    else:
        raise ValueError("Legendre rewriting is available for n = 1 and n = 2")
    tail = 0.0 if vectors is not None else ev.tail_estimate(len(X), z, ev.radius)
    return GreenValue(val, tail, len(X))


def hilbert_green(L: QuadraticLattice, module: DiscriminantModule, z1: complex, z2: complex,
                  s: float, m, coset: int = 0, radius: float = 200.0,
                  vectors: Optional[np.ndarray] = None, clearance: float = 1e-2) -> GreenValue:
    """(4/Gamma(s)) sum Q_{s-1}(1 - 2 Q(lambda_-)/m) over coset + L_A with Q = m."""
    if L.meta.get("family") != "LA":
        raise ValueError("hilbert_green expects an L_A lattice")
    if s <= 1:
        raise ValueError("the Legendre sum converges only for s > 1")
    ev = LiftEvaluator(L, module, coset, Fraction(m), s, radius, clearance)
    return lift_legendre_form(ev, (z1, z2), vectors)


# ------------------------------------------------------------- resolvent kernel


def _cosh_distance(z: complex, w: np.ndarray) -> np.ndarray:
    return 1 + np.abs(z - w) ** 2 / (2 * z.imag * w.imag)


@dataclass(frozen=True)
class GroupSet:
    """Elements (a, b, c, d) of Gamma_0(N) modulo +-1 as an integer array."""
    N: int
    elements: np.ndarray

    def act(self, z: complex) -> np.ndarray:
        a, b, c, d = self.elements.T
        return (a * z + b) / (c * z + d)


def gamma0_ball(N: int, z1: complex, z2: complex, T: float) -> GroupSet:
    """All gamma in Gamma_0(N)/{+-1} with cosh d(z1, gamma z2) <= T."""
    y1, y2 = z1.imag, z2.imag
    # Im(gamma z2) = y2/|c z2 + d|^2 must exceed y1/(2T)
    bound = 2 * T * y2 / y1
    rows = []
    cmax = int(math.sqrt(bound) / y2) + 1
    for c in range(0, cmax + 1, N):
        if c == 0:
            pairs = [(1, 0, 0, 1)]
        else:
            x2 = z2.real
            half = math.sqrt(max(bound - (c * y2) ** 2, 0.0))
            dlo, dhi = math.ceil(-c * x2 - half), math.floor(-c * x2 + half)
            pairs = []
            for d in range(dlo, dhi + 1):
                if math.gcd(c, d) != 1:
                    continue
                a = pow(d, -1, c) if c > 1 else 1
                b = (a * d - 1) // c
                pairs.append((a, b, c, d))
        for a, b, c, d in pairs:
            w = (a * z2 + b) / (c * z2 + d)
            yw = w.imag
            # translates w + k with cosh distance <= T
            rad2 = 2 * y1 * yw * (T - 1) - (y1 - yw) ** 2
            if rad2 < 0:
                continue
            r = math.sqrt(rad2)
            for k in range(math.ceil(z1.real - w.real - r), math.floor(z1.real - w.real + r) + 1):
                rows.append((a + k * c, b + k * d, c, d))
    arr = np.array(rows, dtype=np.int64).reshape(-1, 4)
    return GroupSet(N, arr)


def stabilizer_order(N: int, z: complex, tol: float = 1e-9) -> int:
    """Order of the stabilizer of z in Gamma_0(N)/{+-1}."""
    gs = gamma0_ball(N, z, z, 1 + tol)
    return int(np.sum(np.abs(gs.act(z) - z) < 1e-7))


def _cutoff_weight(t: np.ndarray, T: float) -> np.ndarray:
    """1 for t <= T/2, 0 for t >= T, a C^2 quintic ramp in between."""
    u = np.clip((t - T / 2) / (T / 2), 0.0, 1.0)
    return 1 - u ** 3 * (10 - 15 * u + 6 * u * u)


@dataclass(frozen=True)
class ResolventEvaluator:
    """Gamma_0(N)-sum of -2 Q_{s-1}(cosh d(z1, gamma z2)) with a smooth cutoff.

    Terms are weighted by a ramp from 1 at cosh-distance bound/2 to 0 at
    `bound`; the removed mass is restored by its equidistribution estimate
    -(4 pi / vol) int (1 - weight) Q_{s-1}.
    """
    N: int
    s: float
    bound: float = 8000.0

    def __post_init__(self):
        if self.s <= 1:
            raise ValueError("the resolvent series converges only for s > 1")
        if self.bound <= 2:
            raise ValueError("bound is a cosh-distance and must exceed 2")

    @property
    def volume(self) -> float:
        return math.pi / 3 * gamma0_index(self.N)

    def tail(self) -> float:
        T = self.bound
        nodes, weights = gauss_legendre(64)
        t = T / 2 + (nodes + 1) * T / 4
        ramp = float(np.sum(weights * (1 - _cutoff_weight(t, T)) * legendre_q_fast(self.s, t))) * T / 4
        return -4 * math.pi / self.volume * (ramp + legendre_q_tail_integral(self.s, T))

    def group_set(self, z1: complex, z2: complex) -> GroupSet:
        return gamma0_ball(self.N, complex(z1), complex(z2), self.bound)

    def evaluate(self, z1: complex, z2: complex, group: Optional[GroupSet] = None) -> GreenValue:
        """Smoothed sum plus tail; with an explicit `group` the plain sum over it."""
        z1, z2 = complex(z1), complex(z2)
        gs = self.group_set(z1, z2) if group is None else group
        t = _cosh_distance(z1, gs.act(z2))
        if np.any(t - 1 < 1e-12):
            raise SingularPointError("z1 lies in the Gamma_0(N)-orbit of z2")
        if group is not None:
            return GreenValue(-2 * float(np.sum(legendre_q_fast(self.s, t))), 0.0, len(t))
        t = t[t <= self.bound]
        val = -2 * float(np.sum(_cutoff_weight(t, self.bound) * legendre_q_fast(self.s, t)))
        tail = self.tail()
        return GreenValue(val + tail, abs(tail), len(t))


def resolvent_gs(N: int, s: float, z1: complex, z2: complex, bound: float = 8000.0) -> GreenValue:
    return ResolventEvaluator(N, s, bound).evaluate(z1, z2)


@dataclass(frozen=True)
class LogProfile:
    """G(z1, z2) - e log|z1 - z2|^2 at shrinking distances along one direction."""
    direction: complex
    distances: tuple[float, ...]
    regular_parts: tuple[float, ...]
    stabilizer: int

    @property
    def spread(self) -> float:
        return max(self.regular_parts) - min(self.regular_parts)


def log_singularity_profile(ev: ResolventEvaluator, z2: complex, direction: complex,
                            distances: Sequence[float] = (1e-2, 1e-3, 1e-4)) -> LogProfile:
    e = stabilizer_order(ev.N, complex(z2))
    u = direction / abs(direction)
    parts = []
    for r in distances:
        z1 = z2 + r * u
        g = ev.evaluate(z1, z2).value
        parts.append(g - e * math.log(r * r))
    return LogProfile(u, tuple(distances), tuple(parts), e)


# ------------------------------------------------------------- Laplacian


@dataclass(frozen=True)
class EigenCheck:
    estimate: float
    expected: float
    residual: float


def laplacian_eigencheck(F: Callable, z: Point, eigenvalue: float, h: float = 1e-3,
                         scale: float = -1.0) -> EigenCheck:
    """Estimate (scale * sum_j y_j^2 (d_xj^2 + d_yj^2) F) / F by central differences.

    z is a point of H or a tuple of points (the Laplacians in each variable
    are added); `scale` sets the normalization, -1 giving Delta = -y^2(...).
    """
    pts = (complex(z),) if not isinstance(z, tuple) else tuple(complex(w) for w in z)
    single = not isinstance(z, tuple)

    def call(p):
        try:
            return float(F(p[0] if single else p))
        except SingularPointError as exc:
            raise StencilError(str(exc)) from exc

    f0 = call(pts)
    if f0 == 0 or not math.isfinite(f0):
        raise StencilError("F vanishes or is not finite at the stencil center")
    lap = 0.0
    for j, w in enumerate(pts):
        acc = -4 * f0
        for dz in (h, -h, 1j * h, -1j * h):
            q = list(pts)
            q[j] = w + dz
            acc += call(tuple(q))
        lap += w.imag ** 2 * acc / h ** 2
    est = scale * lap / f0
    res = abs(est - eigenvalue) / max(1.0, abs(eigenvalue))
    return EigenCheck(est, eigenvalue, res)


# ------------------------------------------------------------- cycle sums


@dataclass(frozen=True)
class CycleSum:
    value: float
    degree: float
    terms: int
    comparison: Optional[dict] = None


def sum_over_cm_cycle(F: Callable[[complex], float], cycle: HeegnerPointSet,
                      rhs: Optional[float] = None) -> CycleSum:
    """Sum of F(tau) / #stabilizer over the Heegner points of the cycle.

    When `rhs` is supplied the result carries a comparison report; it is not
    asserted.
    """
    total = 0.0
    deg = 0.0
    for p in cycle.points:
        try:
            val = float(F(p.tau))
        except SingularPointError as exc:
            raise SingularPointError(f"cycle point {p.tau} is singular for F") from exc
        total += val / p.stabilizer_order
        deg += 1 / p.stabilizer_order
    cmp = None
    if rhs is not None:
        cmp = {"lhs": total, "rhs": rhs, "difference": total - rhs}
    return CycleSum(total, deg, len(cycle.points), cmp)


def sum_over_geodesics(F: Callable[[complex], float], geodesics: Iterable[ClosedGeodesic],
                       quad_points: int = 64) -> CycleSum:
    """Sum of the normalized geodesic traces of F."""
    total = 0.0
    count = 0
    for g in geodesics:
        total += trace_geodesic(F, g, quad_points=quad_points)
        count += 1
    return CycleSum(total, float(count), count)
