"""Weil representation of Mp2(Z) on a discriminant module and vector-valued q-series."""

from __future__ import annotations

import cmath
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .lattice import (CosetMaps, DiscriminantModule, QuadraticLattice, _frac_part,
                      fincke_pohst)


def e(x) -> complex:
    """exp(2 pi i x), exact on multiples of 1/8."""
    x = Fraction(x) if isinstance(x, (int, Fraction)) else x
    if isinstance(x, Fraction):
        r = _frac_part(x)
        if (8 * r).denominator == 1:
            k = int(8 * r)
            s = 0.7071067811865476
            return [1, complex(s, s), 1j, complex(-s, s), -1, complex(-s, -s), -1j, complex(s, -s)][k]
        x = float(r)
    return cmath.exp(2j * cmath.pi * x)


# ------------------------------------------------------------- metaplectic group

_TEST_TAU = complex(0.1234, 1.0987)


@dataclass(frozen=True)
class MpElement:
    """(matrix, branch) with phi(tau) = branch * principal sqrt(c tau + d)."""
    a: int
    b: int
    c: int
    d: int
    branch: int = 1

    def act(self, tau: complex) -> complex:
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def phi(self, tau: complex) -> complex:
        return self.branch * cmath.sqrt(self.c * tau + self.d)

    def __mul__(self, other: "MpElement") -> "MpElement":
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        tau = _TEST_TAU
        val = self.phi(other.act(tau)) * other.phi(tau)
        ref = cmath.sqrt(c * tau + d)
        branch = 1 if abs(val - ref) < abs(val + ref) else -1
        return MpElement(a, b, c, d, branch)

    @property
    def matrix(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.d))


MP_T = MpElement(1, 1, 0, 1, 1)
MP_S = MpElement(0, -1, 1, 0, 1)
MP_ID = MpElement(1, 0, 0, 1, 1)


def mp_word(word: str) -> MpElement:
    g = MP_ID
    for ch in word:
        g = g * {"S": MP_S, "T": MP_T}[ch]
    return g


# ------------------------------------------------------------- representation


@dataclass(frozen=True)
class WeilRep:
    module: DiscriminantModule
    signature: tuple[int, int]
    T_matrix: np.ndarray = field(compare=False)
    S_matrix: np.ndarray = field(compare=False)
    signature_phase: complex = 1
    dual: bool = False

    @property
    def Z_matrix(self) -> np.ndarray:
        """Image of Z = S^2 = (-I, i): e_mu -> e((q-p)/4) e_{-mu} (conjugated for the dual)."""
        p, q = self.signature
        n = self.module.order
        Z = np.zeros((n, n), dtype=complex)
        ph = e(Fraction(q - p, 4))
        if self.dual:
            ph = ph.conjugate()
        for i in range(n):
            Z[self.module.neg(i), i] = ph
        return Z

    def rho(self, word: str) -> np.ndarray:
        n = self.module.order
        M = np.eye(n, dtype=complex)
        for ch in word:
            M = M @ {"S": self.S_matrix, "T": self.T_matrix}[ch]
        return M

    def dual_rep(self) -> "WeilRep":
        return WeilRep(self.module, self.signature, self.T_matrix.conj(), self.S_matrix.conj(),
                       self.signature_phase.conjugate(), not self.dual)


def weil_generators(module: DiscriminantModule, signature: Optional[tuple[int, int]] = None) -> WeilRep:
    if signature is None:
        signature = module.lattice.signature
    p, q = signature
    n = module.order
    T = np.diag([e(module.Q(i)) for i in range(n)]).astype(complex)
    phase = e(Fraction(q - p, 8))
    K, den = module.bilinear_matrix()
    B = np.exp(-2j * np.pi * K / den)
    S = phase / np.sqrt(n) * B
    return WeilRep(module, (p, q), T, S, phase, False)


def relation_residuals(rep: WeilRep) -> dict[str, float]:
    """Sup-norm residuals of the defining relations (all should vanish)."""
    n = rep.module.order
    I = np.eye(n)
    S, T, Z = rep.S_matrix, rep.T_matrix, rep.Z_matrix
    out = {}
    for w in ("S", "T", "ST", "STS"):
        R = rep.rho(w)
        out[f"unitary_{w}"] = float(np.max(np.abs(R @ R.conj().T - I)))
    out["S_symmetric"] = float(np.max(np.abs(S - S.T)))
    out["S2_eq_Z"] = float(np.max(np.abs(S @ S - Z)))
    out["ST3_eq_S2"] = float(np.max(np.abs(np.linalg.matrix_power(S @ T, 3) - S @ S)))
    # Z^2 = (I, -1) acts by e((q - p)/2)
    p, q = rep.signature
    z2 = e(Fraction(q - p, 2))
    out["Z2_scalar"] = float(np.max(np.abs(Z @ Z - z2 * I)))
    # the metaplectic words agree as group elements, with matching branch
    st3, s2 = mp_word("STSTST"), mp_word("SS")
    out["mp_branch_ST3_vs_S2"] = 0.0 if st3 == s2 else 1.0
    out["mp_Z_branch"] = 0.0 if (s2.matrix, s2.branch) == (((-1, 0), (0, -1)), 1) else 1.0
    return out


def pairing_invariance_residual(rep: WeilRep, f: np.ndarray, h: np.ndarray) -> float:
    """max over generators of |<rho(g) f, rho_dual(g) h> - <f, h>| for coefficient vectors."""
    dual = rep.dual_rep()
    base = np.dot(f, h)
    res = 0.0
    for w in ("S", "T", "ST"):
        res = max(res, abs(np.dot(rep.rho(w) @ f, dual.rho(w) @ h) - base))
    return res


# ------------------------------------------------------------- q-series

HOLOMORPHIC = "holomorphic"
NONHOLOMORPHIC = "nonholomorphic"


class CongruenceError(ValueError):
    pass


@dataclass
class VectorValuedQSeries:
    """Finite expansion sum c(mu, m) q^m e_mu with exponent m = sign * Q(mu) mod 1.

    `dual` marks series for the conjugate representation (sign = -1).
    """
    module: DiscriminantModule
    weight: Fraction = Fraction(0)
    dual: bool = False
    terms: dict = field(default_factory=dict)
    tags: dict = field(default_factory=dict)

    def _check(self, mu: int, m: Fraction):
        sign = -1 if self.dual else 1
        if _frac_part(m - sign * self.module.Q(mu)) != 0:
            raise CongruenceError(f"exponent {m} incompatible with coset {mu} (Q = {self.module.Q(mu)})")

    def add(self, mu: int, m, c, tag: str = HOLOMORPHIC) -> "VectorValuedQSeries":
        m = Fraction(m)
        self._check(mu, m)
        key = (mu, m)
        self.terms[key] = self.terms.get(key, 0) + complex(c)
        self.tags[key] = tag
        return self

    def coefficient(self, mu: int, m) -> complex:
        return self.terms.get((mu, Fraction(m)), 0j)

    @property
    def min_exponent(self) -> Optional[Fraction]:
        return min((m for (_, m), c in self.terms.items() if c != 0), default=None)

    def copy(self) -> "VectorValuedQSeries":
        return VectorValuedQSeries(self.module, self.weight, self.dual, dict(self.terms), dict(self.tags))

    def scaled(self, k: complex) -> "VectorValuedQSeries":
        out = self.copy()
        out.terms = {key: k * v for key, v in self.terms.items()}
        return out

    def __add__(self, other: "VectorValuedQSeries") -> "VectorValuedQSeries":
        _same_module(self, other)
        if self.dual != other.dual:
            raise ValueError("representation mismatch")
        out = self.copy()
        for (mu, m), c in other.terms.items():
            out.add(mu, m, c, other.tags.get((mu, m), HOLOMORPHIC))
        return out

    def components(self) -> dict[int, dict[Fraction, complex]]:
        out: dict[int, dict[Fraction, complex]] = defaultdict(dict)
        for (mu, m), c in self.terms.items():
            out[mu][m] = c
        return out


def _same_module(f: VectorValuedQSeries, g: VectorValuedQSeries):
    if f.module is not g.module and f.module.cosets != g.module.cosets:
        raise ValueError("discriminant modules differ")


def pairing(f: VectorValuedQSeries, g: VectorValuedQSeries) -> dict[Fraction, complex]:
    """Scalar series sum_mu f_mu g_mu as {exponent: coefficient}."""
    _same_module(f, g)
    if f.dual == g.dual:
        raise ValueError("pairing needs a series and a dual-representation series")
    gc = g.components()
    out: dict[Fraction, complex] = defaultdict(complex)
    for (mu, m), c in f.terms.items():
        for m2, c2 in gc.get(mu, {}).items():
            out[m + m2] += c * c2
    return {k: v for k, v in out.items() if v != 0}


def constant_term(f: VectorValuedQSeries, g: VectorValuedQSeries) -> complex:
    """CT <<f, g>> = sum_mu sum_m c_f(mu, -m) c_g(mu, m)."""
    _same_module(f, g)
    total = 0j
    for (mu, m), c in f.terms.items():
        total += c * g.coefficient(mu, -m)
    return total


def restrict(f: VectorValuedQSeries, maps: CosetMaps) -> VectorValuedQSeries:
    """f_M: copy f onto L^vee/M inside M^vee/M, zero elsewhere."""
    if f.module.cosets != maps.L_module.cosets:
        raise ValueError("coset maps do not match the series module")
    out = VectorValuedQSeries(maps.M_module, f.weight, f.dual)
    comps = f.components()
    for j, li in maps.proj.items():
        for m, c in comps.get(li, {}).items():
            out.add(j, m, c, f.tags.get((li, m), HOLOMORPHIC))
    return out


def trace(g: VectorValuedQSeries, maps: CosetMaps) -> VectorValuedQSeries:
    """g^L: sum of g over each fiber of L^vee/M -> L^vee/L."""
    if g.module.cosets != maps.M_module.cosets:
        raise ValueError("coset maps do not match the series module")
    out = VectorValuedQSeries(maps.L_module, g.weight, g.dual)
    for (j, m), c in g.terms.items():
        if j in maps.proj:
            out.add(maps.proj[j], m, c, g.tags.get((j, m), HOLOMORPHIC))
    return out


def theta_series(L: QuadraticLattice, module: DiscriminantModule, prec) -> VectorValuedQSeries:
    """Theta series of a positive definite even lattice: sum q^{Q(x)} e_{x + L}, Q(x) <= prec."""
    if L.signature[1]:
        raise ValueError("theta_series needs a positive definite lattice")
    prec = Fraction(prec)
    out = VectorValuedQSeries(module, Fraction(L.rank, 2), False)
    G = L.gram_float()
    for i, mu in enumerate(module.cosets):
        shift = np.array([float(x) for x in mu])
        cand = fincke_pohst(G, shift, float(prec))
        counts: dict[Fraction, int] = defaultdict(int)
        for row in cand:
            x = tuple(mu[k] + int(row[k]) for k in range(L.rank))
            q = L.Q(x)
            if q <= prec:
                counts[q] += 1
        for m, c in counts.items():
            out.add(i, m, c)
    return out
