"""Exact quadratic lattices, discriminant modules and quadric enumeration.

Gram matrices hold the bilinear form (x, y) = Q(x + y) - Q(x) - Q(y), so
Q(x) = x^T G x / 2.  All membership tests are exact (ints and Fractions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
from typing import Optional, Sequence

import numpy as np

from .quadfield import BinaryForm, class_group, fundamental_unit, is_fundamental

Vec = tuple  # tuple of Fractions


def _frac_matrix(rows) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def _det(M) -> Fraction:
    M = [list(map(Fraction, row)) for row in M]
    n = len(M)
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if M[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            M[i], M[piv] = M[piv], M[i]
            det = -det
        det *= M[i][i]
        for r in range(i + 1, n):
            f = M[r][i] / M[i][i]
            if f:
                for c in range(i, n):
                    M[r][c] -= f * M[i][c]
    return det


def _inverse(M) -> list[list[Fraction]]:
    n = len(M)
    A = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for i in range(n):
        piv = next(r for r in range(i, n) if A[r][i] != 0)
        A[i], A[piv] = A[piv], A[i]
        p = A[i][i]
        A[i] = [x / p for x in A[i]]
        for r in range(n):
            if r != i and A[r][i] != 0:
                f = A[r][i]
                A[r] = [x - f * y for x, y in zip(A[r], A[i])]
    return [row[n:] for row in A]


def _frac_part(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


@dataclass(frozen=True)
class QuadraticLattice:
    gram: tuple[tuple[Fraction, ...], ...]
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        g = self.gram
        n = len(g)
        if any(len(r) != n for r in g):
            raise ValueError("gram matrix must be square")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise ValueError("gram matrix must be symmetric")

    @property
    def rank(self) -> int:
        return len(self.gram)

    def bilinear(self, x: Sequence, y: Sequence) -> Fraction:
        g = self.gram
        return sum((Fraction(x[i]) * g[i][j] * Fraction(y[j])
                    for i in range(self.rank) for j in range(self.rank)), Fraction(0))

    def Q(self, x: Sequence) -> Fraction:
        return self.bilinear(x, x) / 2

    def det(self) -> Fraction:
        return _det(self.gram) if self.rank else Fraction(1)

    def gram_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.gram], dtype=float).reshape(self.rank, self.rank)

    @property
    def signature(self) -> tuple[int, int]:
        if self.rank == 0:
            return (0, 0)
        ev = np.linalg.eigvalsh(self.gram_float())
        return (int(np.sum(ev > 0)), int(np.sum(ev < 0)))

    def is_even(self) -> bool:
        g = self.gram
        return all(v.denominator == 1 for row in g for v in row) and all(g[i][i] % 2 == 0 for i in range(self.rank))

    def is_definite(self) -> bool:
        p, q = self.signature
        return p == 0 or q == 0

    def discriminant_module(self) -> "DiscriminantModule":
        return discriminant_module(self)


@dataclass(frozen=True)
class DiscriminantModule:
    lattice: QuadraticLattice
    cosets: tuple[Vec, ...]
    qvalues: tuple[Fraction, ...]
    level: int
    _index: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def order(self) -> int:
        return len(self.cosets)

    def index(self, v: Sequence) -> int:
        key = tuple(_frac_part(Fraction(x)) for x in v)
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"{v} is not in the dual lattice") from None

    def add(self, i: int, j: int) -> int:
        return self.index([a + b for a, b in zip(self.cosets[i], self.cosets[j])])

    def neg(self, i: int) -> int:
        return self.index([-a for a in self.cosets[i]])

    def scale(self, i: int, k: int) -> int:
        return self.index([k * a for a in self.cosets[i]])

    def Q(self, i: int) -> Fraction:
        return self.qvalues[i]

    def bilinear(self, i: int, j: int) -> Fraction:
        return _frac_part(self.lattice.bilinear(self.cosets[i], self.cosets[j]))

    @property
    def zero(self) -> int:
        return self.index([0] * self.lattice.rank)

    def bilinear_matrix(self) -> tuple[np.ndarray, int]:
        """(K, den) with (mu_i, mu_j) = K[i, j] / den mod 1 and 0 <= K < den."""
        r = self.lattice.rank
        if r == 0:
            return np.zeros((self.order, self.order), dtype=np.int64), 1
        cden = math.lcm(*(x.denominator for v in self.cosets for x in v))
        gden = math.lcm(*(x.denominator for row in self.lattice.gram for x in row))
        C = np.array([[int(x * cden) for x in v] for v in self.cosets], dtype=np.int64).reshape(-1, r)
        G = np.array([[int(x * gden) for x in row] for row in self.lattice.gram], dtype=np.int64)
        den = cden * cden * gden
        return (C @ G @ C.T) % den, den


def discriminant_module(L: QuadraticLattice) -> DiscriminantModule:
    """Enumerate L^vee / L by closing the dual basis under addition mod L."""
    if not L.is_even():
        raise ValueError(f"{L.label or 'lattice'} is not an even integral lattice")
    n = L.rank
    if n == 0:
        cosets = [()]
        return DiscriminantModule(L, tuple(cosets), (Fraction(0),), 1, {(): 0})
    if L.det() == 0:
        raise ValueError("degenerate lattice")
    Ginv = _inverse(L.gram)
    gens = [tuple(_frac_part(Ginv[i][j]) for i in range(n)) for j in range(n)]
    zero = tuple(Fraction(0) for _ in range(n))
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for v in frontier:
            for g in gens:
                w = tuple(_frac_part(a + b) for a, b in zip(v, g))
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    order = abs(L.det())
    if len(seen) != order:
        raise RuntimeError(f"coset count {len(seen)} != |det| {order}")
    cosets = sorted(seen, key=lambda v: (v != zero, tuple(v)))
    qv = tuple(_frac_part(L.Q(c)) for c in cosets)
    level = 1
    for q in qv:
        level = level * q.denominator // gcd(level, q.denominator)
    idx = {c: i for i, c in enumerate(cosets)}
    return DiscriminantModule(L, tuple(cosets), qv, level, idx)


# ------------------------------------------------------------- families


def build_signature12_lattice(N: int) -> tuple[QuadraticLattice, DiscriminantModule]:
    """Trace-zero matrices [[b, -a/N], [c, -b]] (a, b, c integers), Q = N det.

    Coordinates are (a, b, c) and Q = a c - N b^2.
    """
    if N < 1:
        raise ValueError("N must be positive")
    L = QuadraticLattice(_frac_matrix([[0, 0, 1], [0, -2 * N, 0], [1, 0, 0]]),
                         label=f"sig12(N={N})", meta={"family": "sig12", "N": N})
    D = discriminant_module(L)
    return L, D


def sig12_coset(D: DiscriminantModule, r: int) -> int:
    """Index of mu_r = diag(r/2N, -r/2N), i.e. coordinates (0, r/2N, 0)."""
    N = D.lattice.meta["N"]
    return D.index((0, Fraction(r, 2 * N), 0))


def sig12_r_of(D: DiscriminantModule, i: int) -> int:
    N = D.lattice.meta["N"]
    return int(D.cosets[i][1] * 2 * N) % (2 * N)


def sig12_vector_from_matrix(N: int, X) -> tuple[Fraction, Fraction, Fraction]:
    (b, q), (c, _) = X
    return (Fraction(-q) * N, Fraction(b), Fraction(c))


def sig12_matrix_from_vector(N: int, v) -> tuple:
    a, b, c = map(Fraction, v)
    return ((b, -a / N), (c, -b))


def heegner_vector(N: int, D: int, r: int) -> tuple[Fraction, Fraction, Fraction]:
    """Positive norm vector [[r/2N, 1/N], [(D - r^2)/4N, -r/2N]] of norm -D/4N."""
    if (D - r * r) % (4 * N):
        raise ValueError("need D = r^2 mod 4N")
    return sig12_vector_from_matrix(N, ((Fraction(r, 2 * N), Fraction(1, N)),
                                        (Fraction(D - r * r, 4 * N), Fraction(-r, 2 * N))))


def sig12_form_of_vector(N: int, v) -> tuple[Fraction, Fraction, Fraction]:
    """Binary form whose roots are the fixed points of the matrix of v."""
    a, b, c = map(Fraction, v)
    return (N * c, -2 * N * b, a)


def sig12_vector_of_form(N: int, form) -> tuple[Fraction, Fraction, Fraction]:
    A, B, C = map(Fraction, form)
    return (C, -B / (2 * N), A / N)


def ideal_basis(form: BinaryForm) -> tuple[int, tuple[int, int]]:
    """Z-basis [a, (-b + sqrt d)/2] of the ideal attached to [a, b, c].

    Returned as a and the pair (-b, 1) meaning (-b + 1*sqrt d)/2.
    """
    return form.a, (-form.b, 1)


def ideal_norm_form(form: BinaryForm) -> BinaryForm:
    """Q_a(x a + y w) = N(x a + y w) / N(a) = [a, -b, c](x, y)."""
    return BinaryForm(form.a, -form.b, form.c)


def binary_lattice(form: BinaryForm, label: str = "", sign: int = 1) -> QuadraticLattice:
    """Rank-2 lattice (a, +-Q_a) in the ideal basis of the class of `form`."""
    q = ideal_norm_form(form)
    g = _frac_matrix([[2 * q.a * sign, q.b * sign], [q.b * sign, 2 * q.c * sign]])
    return QuadraticLattice(g, label=label or f"ideal{tuple(form)}",
                            meta={"family": "ideal", "form": tuple(form), "disc": form.disc, "sign": sign})


def build_LA_lattice(d: int, A: int, N: int = 1) -> tuple[QuadraticLattice, Optional[DiscriminantModule]]:
    """Signature (2,2) lattice N^-1 a + N^-1 a with Q(z1, z2) = Q_a(z1) - Q_a(z2).

    The Gram matrix follows the ideal basis; for N > 1 it is not even and the
    discriminant module is returned as None.
    """
    if not is_fundamental(d):
        raise ValueError(f"{d} is not fundamental")
    if gcd(N, d) != 1:
        raise ValueError("need gcd(N, d) = 1")
    cg = class_group(d)
    form = cg.classes[A]
    q = ideal_norm_form(form)
    s = Fraction(1, N * N)
    blk = [[2 * q.a * s, q.b * s], [q.b * s, 2 * q.c * s]]
    g = [[blk[0][0], blk[0][1], 0, 0],
         [blk[1][0], blk[1][1], 0, 0],
         [0, 0, -blk[0][0], -blk[0][1]],
         [0, 0, -blk[1][0], -blk[1][1]]]
    L = QuadraticLattice(_frac_matrix(g), label=f"LA(d={d},A={A},N={N})",
                         meta={"family": "LA", "disc": d, "form": tuple(form), "N": N, "class": A})
    Dm = discriminant_module(L) if L.is_even() else None
    return L, Dm


def orthogonal_sum(*lats: QuadraticLattice, label: str = "") -> QuadraticLattice:
    n = sum(L.rank for L in lats)
    g = [[Fraction(0)] * n for _ in range(n)]
    off = 0
    for L in lats:
        for i in range(L.rank):
            for j in range(L.rank):
                g[off + i][off + j] = L.gram[i][j]
        off += L.rank
    return QuadraticLattice(tuple(map(tuple, g)), label=label)


# ------------------------------------------------------------- enumeration


@dataclass(frozen=True)
class BoxBound:
    """Enumerate coordinates n with |n_i| <= radius (vectors mu + n)."""
    radius: int


@dataclass(frozen=True)
class MajorantBound:
    """Enumerate vectors with majorant x^T M x / 2 <= radius (M positive definite)."""
    majorant: np.ndarray
    radius: float


@dataclass(frozen=True)
class UnitOrbitDomain:
    """One representative per orbit of the full unit group (real quadratic ideals).

    `shift` rotates the fundamental domain by a fraction of a period.  With
    `absolute`, solutions of |Q| = |m| are collected and reduced jointly, which
    matters when a unit of norm -1 swaps the two signs.
    """
    shift: float = 0.0
    absolute: bool = False


@dataclass(frozen=True)
class QuadricSlice:
    lattice: QuadraticLattice
    coset: Vec
    norm: Fraction
    vectors: tuple[Vec, ...]
    policy: object = None

    def __len__(self):
        return len(self.vectors)


def fincke_pohst(M: np.ndarray, shift: np.ndarray, bound: float) -> np.ndarray:
    """Integer n with (shift + n)^T M (shift + n) / 2 <= bound (M positive definite).

    Returns an array of shape (k, rank).  A small slack is added; callers
    filter exactly.
    """
    n = M.shape[0]
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    Rm = np.linalg.cholesky(M / 2).T  # upper: x^T (M/2) x = |R x|^2
    B = bound * (1 + 1e-9) + 1e-12
    out = []

    def rec(k, partial, remaining):
        # coordinates k+1..n-1 fixed in `partial`; pick coordinate k
        # residual of row k: R[k,k] y_k + sum_{j>k} R[k,j] y_j
        c = sum(Rm[k, j] * (shift[j] + partial[j]) for j in range(k + 1, n))
        rkk = Rm[k, k]
        w = math.sqrt(max(remaining, 0.0)) / rkk
        center = -c / rkk - shift[k]
        lo, hi = math.ceil(center - w - 1e-12), math.floor(center + w + 1e-12)
        if k == 0:
            if lo <= hi:
                ks = np.arange(lo, hi + 1)
                base = np.array(partial, dtype=np.int64)
                rows = np.tile(base, (len(ks), 1))
                rows[:, 0] = ks
                out.append(rows)
            return
        for v in range(lo, hi + 1):
            t = rkk * (shift[k] + v) + c
            partial[k] = v
            rec(k - 1, partial, remaining - t * t)
        partial[k] = 0

    rec(n - 1, [0] * n, B)
    if not out:
        return np.zeros((0, n), dtype=np.int64)
    return np.concatenate(out)


def _coset_vec(L: QuadraticLattice, mu) -> tuple[Fraction, ...]:
    if mu is None:
        return tuple(Fraction(0) for _ in range(L.rank))
    return tuple(Fraction(x) for x in mu)


def _exact_filter(L: QuadraticLattice, mu, cand: np.ndarray, m: Fraction) -> list[Vec]:
    if len(cand) == 0:
        return []
    # exact test Q(mu + n) = m via integer arithmetic with a common denominator
    den = 1
    for x in mu:
        den = den * x.denominator // gcd(den, x.denominator)
    for row in L.gram:
        for x in row:
            den = den * x.denominator // gcd(den, x.denominator)
    G = [[int(x * den) for x in row] for row in L.gram]
    muz = [int(x * den) for x in mu]
    out = []
    target = m * 2 * den ** 3
    if target.denominator != 1:
        return []
    target = target.numerator
    n = L.rank
    for row in cand:
        v = [muz[i] + den * int(row[i]) for i in range(n)]
        val = sum(v[i] * G[i][j] * v[j] for i in range(n) for j in range(n))
        if val == target:
            out.append(tuple(mu[i] + int(row[i]) for i in range(n)))
    return out


def enumerate_quadric(L: QuadraticLattice, mu, m, policy=None) -> QuadricSlice:
    """Vectors x in mu + L with Q(x) = m (complete for definite lattices)."""
    m = Fraction(m)
    mu = _coset_vec(L, mu)
    if L.is_even() and _frac_part(L.Q(mu)) != _frac_part(m):
        return QuadricSlice(L, mu, m, (), policy)
    p, q = L.signature
    if isinstance(policy, UnitOrbitDomain):
        return QuadricSlice(L, mu, m, tuple(_unit_orbit_reps(L, mu, m, policy)), policy)
    if policy is None:
        if p and q:
            raise ValueError("indefinite lattice needs a bound policy")
        sgn = 1 if q == 0 else -1
        if m * sgn < 0:
            return QuadricSlice(L, mu, m, (), policy)
        M = sgn * L.gram_float()
        cand = fincke_pohst(M, np.array([float(x) for x in mu]), float(m * sgn))
    elif isinstance(policy, BoxBound):
        R = policy.radius
        grids = np.meshgrid(*[np.arange(-R, R + 1)] * L.rank, indexing="ij")
        cand = np.stack([g.ravel() for g in grids], axis=1)
        # float prefilter
        x = cand + np.array([float(v) for v in mu])
        vals = 0.5 * np.einsum("ki,ij,kj->k", x, L.gram_float(), x)
        cand = cand[np.abs(vals - float(m)) < 1e-6 * (1 + abs(float(m)))]
    elif isinstance(policy, MajorantBound):
        cand = fincke_pohst(np.asarray(policy.majorant, dtype=float),
                            np.array([float(x) for x in mu]), float(policy.radius))
        x = cand + np.array([float(v) for v in mu])
        vals = 0.5 * np.einsum("ki,ij,kj->k", x, L.gram_float(), x) if len(cand) else np.zeros(0)
        cand = cand[np.abs(vals - float(m)) < 1e-6 * (1 + abs(float(m)))]
    else:
        raise TypeError(f"unknown policy {policy!r}")
    vecs = _exact_filter(L, mu, cand, m)
    return QuadricSlice(L, mu, m, tuple(vecs), policy)


def _unit_orbit_reps(L: QuadraticLattice, mu, m: Fraction, policy: UnitOrbitDomain) -> list[Vec]:
    meta = L.meta
    if meta.get("family") != "ideal" or meta["disc"] <= 0:
        raise ValueError("unit-orbit domains apply to real quadratic ideal lattices")
    if any(x != 0 for x in mu):
        raise ValueError("unit-orbit enumeration supports the zero coset only")
    d = meta["disc"]
    sign = meta["sign"]
    fa, fb, fc = meta["form"]
    q = ideal_norm_form(BinaryForm(fa, fb, fc))
    target = m * sign
    if target.denominator != 1 or target == 0:
        return []
    target = int(target)
    targets = (abs(target), -abs(target)) if policy.absolute else (target,)
    t, u, reg = fundamental_unit(d)
    eps = (t + u * math.sqrt(d)) / 2
    Mn = fa * abs(target)  # |sigma1 sigma2|
    lo = math.sqrt(Mn) * eps ** policy.shift
    hi = lo * eps
    sd = math.sqrt(d)
    ymax = int((hi + Mn / lo) / sd) + 2
    sols = []
    for tg in targets:
        for y in range(-ymax, ymax + 1):
            disc = d * y * y + 4 * fa * tg
            if disc < 0:
                continue
            r = isqrt(disc)
            if r * r != disc:
                continue
            for sgn in ((1, -1) if r else (1,)):
                num = -q.b * y + sgn * r
                if num % (2 * fa):
                    continue
                x = num // (2 * fa)
                s1 = x * fa + y * (-fb + sd) / 2
                if lo * (1 - 1e-9) <= abs(s1) <= hi * (1 + 1e-9):
                    sols.append((x, y))
    # exact orbit reduction under all units
    reps: list[tuple[int, int]] = []

    def PQ(v):
        x, y = v
        return 2 * x * fa - fb * y, y

    for v in sorted(set(sols)):
        P, Qv = PQ(v)
        same = False
        for w in reps:
            P2, Q2 = PQ(w)
            n0 = P2 * P2 - d * Q2 * Q2
            tt = 2 * (P * P2 - d * Qv * Q2)
            uu = 2 * (P2 * Qv - P * Q2)
            if tt % n0 == 0 and uu % n0 == 0:
                tt //= n0
                uu //= n0
                if (tt * tt - d * uu * uu) % 4 == 0:
                    same = True
                    break
        if not same:
            reps.append(v)
    return [(Fraction(x), Fraction(y)) for x, y in reps]


def ideal_count_in_class(d: int, A: int, m: int) -> int:
    """Number of integral ideals of norm m in the wide class inverse to class A.

    Counts elements of the ideal with |N(x)| = m N(a) up to units.  For
    d < 0 this is the representation number of the norm form divided by w.
    """
    cg = class_group(d)
    form = cg.classes[A]
    lat = binary_lattice(form)
    if m == 0:
        return 1
    if d < 0:
        from .quadfield import unit_count
        return len(enumerate_quadric(lat, None, m).vectors) // unit_count(d)
    return len(enumerate_quadric(lat, None, m, UnitOrbitDomain(absolute=True)).vectors)


# ------------------------------------------------------------- sublattices


@dataclass(frozen=True)
class CosetMaps:
    L: QuadraticLattice
    M: QuadraticLattice
    basis: tuple[tuple[int, ...], ...]  # rows: M basis vectors in L coordinates
    L_module: DiscriminantModule
    M_module: DiscriminantModule
    proj: dict  # M-coset index (in L^vee/M) -> L-coset index
    fibers: dict  # L-coset index -> list of M-coset indices
    zero_fiber: tuple  # M-cosets lying in L/M

    @property
    def index(self) -> int:
        return len(self.zero_fiber)


def sublattice(L: QuadraticLattice, basis, label: str = "") -> QuadraticLattice:
    B = [[int(x) for x in row] for row in basis]
    n = L.rank
    g = [[sum(Fraction(B[i][a]) * L.gram[a][b] * B[j][b] for a in range(n) for b in range(n))
          for j in range(len(B))] for i in range(len(B))]
    return QuadraticLattice(tuple(map(tuple, g)), label=label or f"sub({L.label})")


def sublattice_coset_maps(L: QuadraticLattice, basis) -> CosetMaps:
    """Coset correspondence for a finite-index sublattice M (rows of `basis`)."""
    B = [[int(x) for x in row] for row in basis]
    n = L.rank
    if len(B) != n or _det(B) == 0:
        raise ValueError("sublattice must have full rank")
    M = sublattice(L, B)
    DL = discriminant_module(L)
    DM = discriminant_module(M)
    proj = {}
    fibers = {i: [] for i in range(DL.order)}
    zero = []
    for j, y in enumerate(DM.cosets):
        # L coordinates x = B^T y
        x = [sum(Fraction(B[i][k]) * y[i] for i in range(n)) for k in range(n)]
        Gx = [sum(L.gram[a][b] * x[b] for b in range(n)) for a in range(n)]
        if all(v.denominator == 1 for v in Gx):
            li = DL.index(x)
            proj[j] = li
            fibers[li].append(j)
            if all(v.denominator == 1 for v in x):
                zero.append(j)
    expected = abs(_det(B))
    if len(zero) != expected:
        raise RuntimeError("index bookkeeping failed")
    return CosetMaps(L, M, tuple(map(tuple, B)), DL, DM, proj, {k: tuple(v) for k, v in fibers.items()}, tuple(zero))
