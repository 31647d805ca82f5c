"""Scalar primitives: q-numbers, the Q factor, binomial polynomials, zeta."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special

from .errors import AccuracyError, DomainError, InsufficientDataError, PoleError


@dataclass(frozen=True)
class QContext:
    """Deformation parameter, rank, truncation and tolerance bundle."""

    q: float = 0.5
    ell: int = 2
    cutoff: int = 8
    tol: float = 1e-12
    precision: str = "standard"

    def __post_init__(self):
        if not 0.0 <= self.q < 1.0:
            raise DomainError(f"q must lie in [0, 1), got {self.q}")
        if int(self.ell) != self.ell or self.ell < 0:
            raise DomainError(f"rank must be a nonnegative integer, got {self.ell}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise DomainError(f"cutoff must be an integer >= 2, got {self.cutoff}")
        if not self.tol > 0:
            raise DomainError(f"tolerance must be positive, got {self.tol}")
        if self.precision not in ("standard", "extended"):
            raise DomainError(f"unknown precision {self.precision!r}")

    def with_(self, **kw) -> "QContext":
        d = dict(q=self.q, ell=self.ell, cutoff=self.cutoff, tol=self.tol, precision=self.precision)
        d.update(kw)
        return QContext(**d)


def _qval(ctx) -> float:
    return ctx.q if isinstance(ctx, QContext) else float(ctx)


def q_number(n, ctx):
    """[n]_q = (q^n - q^-n)/(q - q^-1). Works elementwise on arrays."""
    q = _qval(ctx)
    if q <= 0.0:
        raise DomainError("q-number undefined at q=0")
    n = np.asarray(n, dtype=float)
    out = (q**n - q ** (-n)) / (q - 1.0 / q)
    return float(out) if out.ndim == 0 else out


def q_factor(n, ctx):
    """Q(n) = sqrt(1 - q^(2n)) for n >= 0; at q=0 this is 0 for n=0 and 1 otherwise."""
    q = _qval(ctx)
    a = np.asarray(n)
    if np.any(a < 0):
        raise DomainError("Q(n) needs n >= 0")
    if q == 0.0:
        out = (a > 0).astype(float)
    else:
        out = np.sqrt(1.0 - q ** (2.0 * a))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BinomialPolynomial:
    """Coefficients c_k^r of N -> C(N+r, r) in powers of N."""

    r: int
    coeffs: tuple

    def __call__(self, N):
        return sum(c * Fraction(N) ** k for k, c in enumerate(self.coeffs))


@lru_cache(maxsize=None)
def binomial_polynomial(r: int) -> BinomialPolynomial:
    if r < 0:
        raise DomainError("r must be nonnegative")
    if r == 0:
        return BinomialPolynomial(0, (Fraction(1),))
    prev = binomial_polynomial(r - 1).coeffs + (Fraction(0),)
    # r c_k^r = c_{k-1}^{r-1} + r c_k^{r-1}
    coeffs = tuple(((prev[k - 1] if k else 0) + r * prev[k]) / r for k in range(r + 1))
    return BinomialPolynomial(r, coeffs)


# Euler-Maclaurin: direct sum below _EM_N, Bernoulli tail through B_12.
_EM_N = 50
_EM_ORDER = 6
_BERNOULLI = [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
              Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6)]


def _em_terms(s, N, order, one, power):
    head = sum(power(n, -s) for n in range(1, N))
    tail = power(N, 1 - s) / (s - 1) + power(N, -s) / 2
    rising = s
    last = None
    for k in range(1, order + 2):
        b = _BERNOULLI[k - 1]
        term = (one * b.numerator / b.denominator) / math.factorial(2 * k) * rising * power(N, -s - 2 * k + 1)
        if k <= order:
            tail += term
            rising = rising * (s + 2 * k - 1) * (s + 2 * k)
        else:
            last = term
    return head + tail, last


def riemann_zeta(z, precision: str = "standard"):
    """Riemann zeta via Euler-Maclaurin summation.

    Raises PoleError at z=1 and AccuracyError when the first omitted
    Bernoulli term exceeds 1e-10 relative.
    """
    z = complex(z)
    if z == 1:
        raise PoleError("zeta has a pole at z=1")
    if z.real < 0:
        # the direct sum cancels catastrophically here; reflect instead
        return _reflect(z, precision)
    if precision == "extended":
        with mpmath.workdps(30):
            s = mpmath.mpc(z.real, z.imag)
            val, err = _em_terms(s, _EM_N, _EM_ORDER, mpmath.mpf(1), lambda n, e: mpmath.power(n, e))
            val, err = complex(val), abs(complex(err))
    else:
        val, err = _em_terms(z, _EM_N, _EM_ORDER, 1.0, lambda n, e: complex(n) ** e)
        err = abs(err)
    if err > 1e-10 * max(abs(val), 1e-300) and err > 1e-14:
        raise AccuracyError(f"zeta({z}) not reachable to 1e-10 (error bound {err:.2e})")
    return val


def _reflect(z, precision):
    # zeta(s) = 2^s pi^(s-1) sin(pi s/2) Gamma(1-s) zeta(1-s)
    w = riemann_zeta(1 - z, precision)
    if precision == "extended":
        with mpmath.workdps(30):
            s = mpmath.mpc(z.real, z.imag)
            f = mpmath.power(2, s) * mpmath.power(mpmath.pi, s - 1) * mpmath.sin(mpmath.pi * s / 2) * mpmath.gamma(1 - s)
            return complex(f) * w
    f = 2**z * math.pi ** (z - 1) * cmath.sin(math.pi * z / 2) * complex(special.gamma(1 - z))
    return f * w


def fit_decay_exponent(samples, q: float, poly: bool = True) -> float:
    """Exponent alpha in magnitude ~ C (1+size)^beta q^(alpha size), by least squares on logs.

    With poly=False the (1+size)^beta factor is dropped and this is the plain
    log-linear slope, which polynomial prefactors bias.
    """
    pts = [(s, m) for s, m in samples if m > 0]
    if len(pts) < 4:
        raise InsufficientDataError("need at least 4 samples with positive magnitude")
    if not 0 < q < 1:
        raise DomainError("q must lie in (0, 1)")
    s = np.array([p for p, _ in pts], dtype=float)
    y = np.log(np.array([m for _, m in pts], dtype=float))
    cols = [np.ones_like(s), s * math.log(q)]
    if poly:
        cols.append(np.log1p(s))
    coef, *_ = np.linalg.lstsq(np.stack(cols, axis=1), y, rcond=None)
    return float(coef[1])
