"""Exact arithmetic for the closed-form constants: the admissible parameter
interval, its defining quadratic, the restricted range, and the functional
triple algebra.

Interval endpoints are quadratic surds (p +- q sqrt(d)) / (2(n-1)) stored as
integer data; membership tests reduce to the sign of the defining quadratic
evaluated in rational arithmetic, so no floating point enters any decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

__all__ = [
    "c_poly", "AdmissibleInterval", "a_interval", "RestrictedRange",
    "restricted_interval", "GammaTriple", "GammaMapResult", "gamma_map",
    "i_gamma_coefficients", "surd_sign",
]


def _frac(x) -> Fraction:
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, float):
        if not x.is_integer():
            raise TypeError("exact routines need rational inputs; "
                            "pass Fraction or int")
        return Fraction(int(x))
    return Fraction(x)


def c_poly(n, a) -> Fraction:
    """The quadratic 4n^3 - 17n^2 + 28n - 16 + (n-1)(n^2-7n+8) a - (n-1)^2 a^2.

    Nonnegative exactly when a lies in the admissible interval.
    """
    n, a = _frac(n), _frac(a)
    return (4 * n**3 - 17 * n**2 + 28 * n - 16
            + (n - 1) * (n**2 - 7 * n + 8) * a
            - (n - 1) ** 2 * a**2)


def surd_sign(p: Fraction, q: Fraction, d: int) -> int:
    """Sign of p + q*sqrt(d) for rational p, q and integer d >= 0, exactly."""
    p, q = _frac(p), _frac(q)
    if d < 0:
        raise ValueError("d must be nonnegative")
    if q == 0 or d == 0:
        return (p > 0) - (p < 0)
    if p == 0:
        return (q > 0) - (q < 0)
    sp, sq = (1 if p > 0 else -1), (1 if q > 0 else -1)
    if sp == sq:
        return sp
    # opposite signs: compare p^2 with q^2 d
    lhs, rhs = p * p, q * q * d
    if lhs == rhs:
        return 0
    return sp if lhs > rhs else sq


@dataclass(frozen=True)
class AdmissibleInterval:
    """Endpoints (p +- sqrt(d)) / (2(n-1)) of the admissible a-interval."""

    n: int
    p: int          # n^2 - 7n + 8
    q: int          # 1
    d: int          # n^4 + 2n^3 - 3n^2 = n^2 (n+3)(n-1)

    @property
    def denominator(self) -> int:
        return 2 * (self.n - 1)

    @property
    def lower(self) -> float:
        return (self.p - self.q * math.sqrt(self.d)) / self.denominator

    @property
    def upper(self) -> float:
        return (self.p + self.q * math.sqrt(self.d)) / self.denominator

    def contains(self, a) -> bool:
        """a in the interval iff the defining quadratic is nonnegative."""
        return c_poly(self.n, a) >= 0

    def endpoint_roots_exact(self) -> bool:
        """Both surd endpoints annihilate the quadratic, in exact arithmetic."""
        n = Fraction(self.n)
        alpha = -((n - 1) ** 2)                 # quadratic coefficient of a^2
        beta = (n - 1) * (n**2 - 7 * n + 8)     # linear coefficient
        gamma = 4 * n**3 - 17 * n**2 + 28 * n - 16
        den = Fraction(self.denominator)
        ok = True
        for sign in (+1, -1):
            # a = (p + sign*sqrt(d))/den; C(a) = rat + irr*sqrt(d) must vanish
            p, d = Fraction(self.p), Fraction(self.d)
            rat = alpha * (p * p + d) / den**2 + beta * p / den + gamma
            irr = sign * (alpha * 2 * p / den**2 + beta / den)
            ok = ok and rat == 0 and irr == 0
        return ok

    def ordered_around_zero(self) -> bool:
        """lower < 0 < upper, exactly (equivalent to C(n, 0) > 0)."""
        return (surd_sign(Fraction(self.p), Fraction(-1), self.d) < 0
                and surd_sign(Fraction(self.p), Fraction(1), self.d) > 0)


def a_interval(n: int) -> AdmissibleInterval:
    """The admissible interval for the combination parameter in dimension n."""
    if n < 3:
        raise ValueError("the interval is defined for n >= 3")
    return AdmissibleInterval(n=n, p=n * n - 7 * n + 8, q=1,
                              d=n**4 + 2 * n**3 - 3 * n**2)


@dataclass(frozen=True)
class RestrictedRange:
    """{0} union [lower endpoint of the interval, -2(n-2)/(n-1)]."""

    n: int
    interval: AdmissibleInterval

    @property
    def right_endpoint(self) -> Fraction:
        return Fraction(-2 * (self.n - 2), self.n - 1)

    def contains(self, a) -> bool:
        a = _frac(a)
        if a == 0:
            return True
        if a > self.right_endpoint:
            return False
        # a >= lower endpoint iff a - lower >= 0 iff den*a - p + sqrt(d) >= 0
        den = Fraction(self.interval.denominator)
        return surd_sign(den * a - self.interval.p, Fraction(1),
                         self.interval.d) >= 0

    def subset_of_interval(self) -> bool:
        """The bracket part sits inside the admissible interval."""
        return c_poly(self.n, self.right_endpoint) >= 0


def restricted_interval(n: int) -> RestrictedRange:
    """The restricted parameter range used under the weaker sign hypothesis."""
    return RestrictedRange(n=n, interval=a_interval(n))


# ---------------------------------------------------------------------------
# functional triples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaTriple:
    """Weights (gamma1, gamma2, gamma3) of the three conformal primitives."""

    gamma1: Fraction
    gamma2: Fraction
    gamma3: Fraction

    def __init__(self, gamma1, gamma2, gamma3):
        object.__setattr__(self, "gamma1", _frac(gamma1))
        object.__setattr__(self, "gamma2", _frac(gamma2))
        object.__setattr__(self, "gamma3", _frac(gamma3))

    @property
    def w2_coeff(self) -> Fraction:
        return self.gamma1

    @property
    def q_coeff(self) -> Fraction:
        return self.gamma2 / 2 + 6 * self.gamma3

    @property
    def sigma2_coeff(self) -> Fraction:
        return -24 * self.gamma3

    def curvature_value(self, q, sigma2, w2) -> Fraction:
        """Exact combined curvature gamma1|W|^2 + q_coeff Q - 24 gamma3 sigma2."""
        return (self.w2_coeff * _frac(w2) + self.q_coeff * _frac(q)
                + self.sigma2_coeff * _frac(sigma2))


# log-determinant triples of the three classical operators
L2_TRIPLE = GammaTriple(Fraction(1, 8), Fraction(-1, 2), Fraction(-1, 12))
DIRAC2_TRIPLE = GammaTriple(Fraction(7, 16), Fraction(-11, 2), Fraction(-7, 24))
L4_TRIPLE = GammaTriple(Fraction(-1, 4), Fraction(-14), Fraction(8, 3))


@dataclass(frozen=True)
class GammaMapResult:
    """Normalization of a triple's curvature as scale * (Q + a sigma2 + b |W|^2)."""

    triple: GammaTriple
    scale: Fraction
    a: Fraction | None
    b: Fraction | None
    pure_weyl: bool


def gamma_map(triple: GammaTriple) -> GammaMapResult:
    """Coefficients of the triple's curvature, normalized when possible.

    When the Q-coefficient vanishes the curvature is a pure Weyl multiple and
    no (a, b) normalization exists; the result flags that case.
    """
    scale = triple.q_coeff
    if scale == 0:
        return GammaMapResult(triple, scale, None, None, True)
    return GammaMapResult(
        triple, scale,
        a=triple.sigma2_coeff / scale,
        b=triple.w2_coeff / scale,
        pure_weyl=False)


def i_gamma_coefficients(triple: GammaTriple) -> tuple[Fraction, Fraction, Fraction]:
    """(|W|^2, Q, sigma2) coefficients of the triple's curvature."""
    return triple.w2_coeff, triple.q_coeff, triple.sigma2_coeff
