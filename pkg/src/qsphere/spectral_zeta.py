"""Spectral zeta functions Trace(b |D|^-z) for degree-zero symbols.

A ZetaCombination sum_k a_k zeta(z-k) + sum_N h_N N^-z carries exact rational
coefficients, so residues are read off directly; numeric residues are a
cross-check only.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from .errors import AbscissaError, DomainError, FormError, PoleError
from .qcore import binomial_polynomial, riemann_zeta
from .tableaux import count_patterns, lambda_nk

RICHARDSON_STEPS = (0.1, 0.05, 0.025)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


@dataclass
class ZetaCombination:
    terms: dict = field(default_factory=dict)
    remainder: dict = field(default_factory=dict)

    def __post_init__(self):
        self.terms = {int(k): _frac(v) for k, v in self.terms.items() if _frac(v) != 0}
        self.remainder = {int(N): _frac(v) for N, v in self.remainder.items() if _frac(v) != 0}
        if any(k < 0 for k in self.terms):
            raise DomainError("zeta shifts must be nonnegative")
        if any(N < 1 for N in self.remainder):
            raise DomainError("remainder indices start at N = 1")

    def __add__(self, other):
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        r = dict(self.remainder)
        for N, v in other.remainder.items():
            r[N] = r.get(N, 0) + v
        return ZetaCombination(t, r)

    def scale(self, c):
        c = _frac(c)
        return ZetaCombination({k: c * v for k, v in self.terms.items()},
                               {N: c * v for N, v in self.remainder.items()})

    def __sub__(self, other):
        return self + other.scale(-1)

    def poles(self):
        return sorted(k + 1 for k in self.terms)

    def residues(self) -> dict:
        return {k + 1: v for k, v in sorted(self.terms.items())}

    def evaluate(self, z, precision="standard") -> complex:
        z = complex(z)
        for p in self.poles():
            if z == p:
                raise PoleError(f"z={p} is a pole")
        val = sum(complex(float(a)) * riemann_zeta(z - k, precision) for k, a in self.terms.items())
        val += sum(float(h) * N ** (-z) for N, h in self.remainder.items())
        return complex(val)

    def numeric_residue(self, p, steps=RICHARDSON_STEPS) -> float:
        """Symmetric difference (eps/2)(f(p+eps) - f(p-eps)) extrapolated in eps^2."""
        g = [(e * (self.evaluate(p + e) - self.evaluate(p - e)) / 2).real for e in steps]
        return float(_neville_eps2(g, steps))

    def partial_dirichlet(self, z, Nmax) -> complex:
        """Direct partial sum of the represented Dirichlet series up to Nmax."""
        z = complex(z)
        tot = 0j
        for N in range(1, Nmax + 1):
            c = sum(float(a) * N**k for k, a in self.terms.items()) + float(self.remainder.get(N, 0))
            tot += c * N ** (-z)
        return tot

    def to_dict(self):
        return {"terms": {str(k): str(v) for k, v in sorted(self.terms.items())},
                "remainder": [[N, str(v)] for N, v in sorted(self.remainder.items())]}

    @classmethod
    def from_dict(cls, d):
        return cls({int(k): Fraction(v) for k, v in d.get("terms", {}).items()},
                   {int(N): Fraction(v) for N, v in d.get("remainder", [])})

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))


def _neville_eps2(g, steps):
    h = [e * e for e in steps]
    g = list(g)
    for lvl in range(1, len(h)):
        g = [(g[i + 1] * h[i] - g[i] * h[i + lvl]) / (h[i] - h[i + lvl]) for i in range(len(g) - 1)]
    return g[0]


@dataclass
class RapidDecaySymbol:
    """Finitely supported a(n) on N^r, to be summed against s free N-directions."""

    support_dims: int
    values: dict
    free_dims: int

    def __post_init__(self):
        if self.support_dims < 0 or self.free_dims < 0:
            raise DomainError("dimensions must be nonnegative")
        vals = {}
        for n, v in self.values.items():
            n = tuple(int(x) for x in (n if isinstance(n, (tuple, list)) else (n,)))
            if len(n) != self.support_dims or any(x < 0 for x in n):
                raise FormError(f"support point {n} is not in N^{self.support_dims}")
            vals[n] = _frac(v)
        self.values = vals


def _shifted_binomial(w: int, s: int):
    """Coefficients in N of C(N - w + s - 1, s - 1)."""
    base = binomial_polynomial(s - 1).coeffs
    out = [Fraction(0)] * s
    # sum_j c_j (N - w)^j
    for j, c in enumerate(base):
        for i in range(j + 1):
            out[i] += c * comb(j, i) * (-w) ** (j - i)
    return out


def lemma_dimension_decompose(sym: RapidDecaySymbol) -> ZetaCombination:
    """sum_{|n|+|m| >= 1} a(n) / (|n|+|m|)^z  over n in N^r, m in N^s."""
    s = sym.free_dims
    if s == 0:
        rem = {}
        for n, v in sym.values.items():
            w = sum(n)
            if w >= 1:
                rem[w] = rem.get(w, 0) + v
        return ZetaCombination({}, rem)
    terms = [Fraction(0)] * s
    rem = {}
    for n, v in sym.values.items():
        w = sum(n)
        g = _shifted_binomial(w, s)
        for k in range(s):
            terms[k] += g[k] * v
        # the polynomial counts phantom points for N < w; take them back out
        for N in range(1, w):
            P = sum(c * N**k for k, c in enumerate(g))
            if P:
                rem[N] = rem.get(N, 0) - P * v
    return ZetaCombination(dict(enumerate(terms)), rem)


def _check_torus_symbol(phi, ell):
    if not isinstance(phi, dict):
        raise FormError("degree-0 symbol must map i -> {n: lambda_n}")
    for i, vals in phi.items():
        if not 0 <= int(i) <= ell:
            raise FormError(f"symbol level i={i} outside 0..{ell}")
        for n in vals:
            nt = tuple(n) if isinstance(n, (tuple, list)) else (n,)
            if len(nt) != int(i):
                raise FormError(f"level {i} support point {n} has {len(nt)} coordinates")


def trace_torus_symbolic(phi: dict, ell: int, with_sign: bool = False, include_kernel: bool = False):
    """Trace(a |D_ell|^-z) (or Trace(a F_ell |D_ell|^-z) with with_sign) for
    a = sum_i sum_n lambda^i_n (p_n1 (x) ... (x) p_ni (x) 1).

    The Z-direction is split as 2 * sum_{t>=0} - (t=0 term); with the sign only
    the t=0 term survives.
    """
    _check_torus_symbol(phi, ell)
    out = ZetaCombination()
    kernel = Fraction(0)
    for i, vals in phi.items():
        i = int(i)
        vals = {tuple(n) if isinstance(n, (tuple, list)) else (n,): v for n, v in vals.items()}
        flat = lemma_dimension_decompose(RapidDecaySymbol(i, vals, ell - i))
        if with_sign:
            out = out + flat
        else:
            out = out + lemma_dimension_decompose(RapidDecaySymbol(i, vals, ell - i + 1)).scale(2) - flat
        kernel += _frac(vals.get((0,) * i, 0))
    if include_kernel and kernel:
        out = out + ZetaCombination({}, {1: kernel})
    return out


def count_coefficients(n_nat: int, n_int: int = 1):
    """Coefficients of N -> #{gamma in N^n_nat x Z^n_int : |gamma| = N}, valid for N >= 1."""
    if n_int not in (0, 1):
        raise DomainError("only one Z-coordinate is supported")
    if n_int == 0:
        return list(binomial_polynomial(n_nat - 1).coeffs) if n_nat else [Fraction(0)]
    two = binomial_polynomial(n_nat).coeffs
    one = binomial_polynomial(n_nat - 1).coeffs if n_nat else (Fraction(0),)
    return [2 * two[k] - (one[k] if k < len(one) else 0) for k in range(len(two))]


def trace_Deq_symbolic(ell: int) -> ZetaCombination:
    """Trace(|D_eq|^-z) = sum_k (2 c_k^{2ell} - c_k^{2ell-1}) zeta(z - k)."""
    if ell < 1:
        raise DomainError("rank must be at least 1")
    return ZetaCombination(dict(enumerate(count_coefficients(2 * ell, 1))))


def degeneracy_polynomial(ell: int, N: int) -> Fraction:
    return sum(c * N**k for k, c in enumerate(count_coefficients(2 * ell, 1)))


@lru_cache(maxsize=None)
def _lattice_count(n_nat: int, N: int) -> int:
    # points of N^n_nat with coordinate sum N, by a one-coordinate-at-a-time recursion
    if n_nat == 0:
        return 1 if N == 0 else 0
    return sum(_lattice_count(n_nat - 1, N - t) for t in range(N + 1))


def degeneracy_count_lattice(ell: int, N: int) -> int:
    """#{gamma in Gamma_Sigma : |D_eq| = N} by direct lattice counting."""
    return sum(_lattice_count(2 * ell, N - abs(t)) for t in range(-N, N + 1))


def degeneracy_count_labels(ell: int, N: int) -> int:
    """#{(n, k, s) : n + k = N} using GT pattern counts of the top rows lambda_(n,k)."""
    if ell == 1:
        # lambda_(n,k) = (n+k, 0) for every split, so each split repeats the same pattern set
        return (N + 1) * count_patterns((N, 0))
    return sum(count_patterns(lambda_nk(n, N - n, ell)) for n in range(N + 1))


# ------------------------------------------------------------ partial traces

def _count_poly(space):
    n_int = 1 if space.ell + 1 in space.index_set else 0
    return count_coefficients(len(space.index_set) - n_int, n_int)


@dataclass
class PartialTrace:
    value: complex
    tail_bound: float
    shells: int


def trace_partial(b, z, D_abs, ctx=None, decay=None) -> PartialTrace:
    """sum of b_gamma |D|'(gamma)^-z over the complete shells |D| <= cutoff, plus a tail bound.

    decay=(B, rho) certifies |b_gamma| <= B rho^|D|(gamma) outside the truncation;
    the default is B = max |b|, rho = 1 (bounded symbol).
    """
    from .operators import d_prime

    space = b.space
    z = complex(z)
    d = D_abs.diag()
    c = space.cutoff
    coeffs = [float(x) for x in _count_poly(space)]
    dim = len(coeffs)
    bdiag = b.diag()
    if decay is None:
        decay = (float(np.max(np.abs(bdiag))) if bdiag.size else 0.0, 1.0)
    B, rho = decay
    sigma = z.real
    if rho >= 1 and sigma <= dim:
        raise AbscissaError(f"Re z = {sigma} is not above the abscissa {dim}")
    inside = d <= c
    dp = d_prime(D_abs)
    val = complex(np.sum(bdiag[inside] * dp[inside] ** (-z)))
    P = lambda N: sum(a * N**k for k, a in enumerate(coeffs))
    if B == 0:
        tail = 0.0
    elif rho >= 1:
        # integral comparison for each monomial N^(k - sigma), decreasing for N > c
        tail = B * sum(a * c ** (k + 1 - sigma) / (sigma - k - 1) for k, a in enumerate(coeffs))
    else:
        tail = 0.0
        N = c + 1
        while True:
            r = rho * (1 + 1 / N) ** (dim - 1 + max(-sigma, 0.0))
            term = B * P(N) * rho**N * N ** (-sigma)
            if r < 0.9:
                tail += term / (1 - r)
                break
            tail += term
            N += 1
    return PartialTrace(val, float(tail), c)
