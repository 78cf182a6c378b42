"""Log-linear expressions and truncated power series in eps.

A :class:`LogLinearExpr` is ``c0 + c1*log(p) + c2*log(1-p) + c3*log(2)`` with
rational-function coefficients.  Every logarithm appearing in the small-noise
expansion of the block entropy comes from ``log Z0`` with
``Z0 = (1/2) (1-p)^a p^b``, so this basis is closed under the operations the
expansion needs.  Products of two log-carrying expressions are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import EvaluationPoleError, InvalidInputError, UnsupportedRingElementError
from .poly import ONE_MINUS_P, Polynomial, RationalFunction, as_ratfunc

_ZERO = RationalFunction(0)
_LOG_NAMES = ("c_const", "c_logp", "c_log1mp", "c_log2")


@dataclass(frozen=True)
class LogLinearExpr:
    c_const: RationalFunction = _ZERO
    c_logp: RationalFunction = _ZERO
    c_log1mp: RationalFunction = _ZERO
    c_log2: RationalFunction = _ZERO

    def __post_init__(self):
        for name in _LOG_NAMES:
            object.__setattr__(self, name, as_ratfunc(getattr(self, name)))

    @classmethod
    def rational(cls, c) -> "LogLinearExpr":
        return cls(c_const=as_ratfunc(c))

    @classmethod
    def log_monomial(cls, a: int, b: int) -> "LogLinearExpr":
        """``log( (1/2) (1-p)^a p^b )``."""
        return cls(c_logp=RationalFunction(b), c_log1mp=RationalFunction(a), c_log2=RationalFunction(-1))

    @property
    def coefficients(self) -> tuple[RationalFunction, ...]:
        return (self.c_const, self.c_logp, self.c_log1mp, self.c_log2)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coefficients)

    def is_rational(self) -> bool:
        return self.c_logp.is_zero() and self.c_log1mp.is_zero() and self.c_log2.is_zero()

    def __add__(self, other: "LogLinearExpr") -> "LogLinearExpr":
        if not isinstance(other, LogLinearExpr):
            other = LogLinearExpr.rational(other)
        return LogLinearExpr(*(x + y for x, y in zip(self.coefficients, other.coefficients)))

    __radd__ = __add__

    def __neg__(self) -> "LogLinearExpr":
        return LogLinearExpr(*(-x for x in self.coefficients))

    def __sub__(self, other: "LogLinearExpr") -> "LogLinearExpr":
        return self + (-other if isinstance(other, LogLinearExpr) else -as_ratfunc(other))

    def scale(self, f) -> "LogLinearExpr":
        f = as_ratfunc(f)
        return LogLinearExpr(*(x * f for x in self.coefficients))

    def __mul__(self, other) -> "LogLinearExpr":
        if not isinstance(other, LogLinearExpr):
            return self.scale(other)
        if self.is_rational():
            return other.scale(self.c_const)
        if other.is_rational():
            return self.scale(other.c_const)
        raise UnsupportedRingElementError("product of two log-carrying expressions")

    __rmul__ = __mul__

    def __str__(self):
        names = ("", "log(p)", "log(1-p)", "log(2)")
        parts = [
            (f"[{c}]*{n}" if n else f"{c}") for c, n in zip(self.coefficients, names) if not c.is_zero()
        ]
        return " + ".join(parts) if parts else "0"

    def to_json(self) -> dict:
        return {name: ratfunc_to_json(getattr(self, name)) for name in _LOG_NAMES}

    @classmethod
    def from_json(cls, data: dict) -> "LogLinearExpr":
        return cls(*(ratfunc_from_json(data[name]) for name in _LOG_NAMES))


def ratfunc_to_json(f: RationalFunction) -> dict:
    return {"num": [str(c) for c in f.num.coeffs], "den": [str(c) for c in f.den.coeffs]}


def ratfunc_from_json(data: dict) -> RationalFunction:
    return RationalFunction(Polynomial(Fraction(c) for c in data["num"]), Polynomial(Fraction(c) for c in data["den"]))


ZERO_EXPR = LogLinearExpr()


def loglinear_eval(e: LogLinearExpr, p: float) -> float:
    """Evaluate ``e`` at ``p`` in nats."""
    if not 0.0 < float(p) < 1.0:
        raise InvalidInputError(f"p must lie strictly inside (0, 1), got {p}")
    total = 0.0
    for coeff, log_term in zip(e.coefficients, (1.0, math.log(p), math.log1p(-p), math.log(2.0))):
        if coeff.is_zero():
            continue
        den = coeff.den(float(p))
        if den == 0.0 or coeff.den(Fraction(p)) == 0:
            raise EvaluationPoleError(f"coefficient {coeff} has a pole at p={p}")
        total += coeff.num(float(p)) / den * log_term
    return total


class EpsSeries:
    """Truncated power series ``sum_i coeffs[i] * eps**i`` of fixed order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        if not coeffs:
            raise InvalidInputError("a series needs at least the constant coefficient")
        self.coeffs = tuple(c if isinstance(c, LogLinearExpr) else LogLinearExpr.rational(c) for c in coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, i: int) -> LogLinearExpr:
        return self.coeffs[i] if i <= self.order else ZERO_EXPR

    def truncate(self, k: int) -> "EpsSeries":
        return EpsSeries([self.coefficient(i) for i in range(k + 1)])

    def __add__(self, other: "EpsSeries") -> "EpsSeries":
        k = min(self.order, other.order)
        return EpsSeries([self.coeffs[i] + other.coeffs[i] for i in range(k + 1)])

    def __sub__(self, other: "EpsSeries") -> "EpsSeries":
        k = min(self.order, other.order)
        return EpsSeries([self.coeffs[i] - other.coeffs[i] for i in range(k + 1)])

    def __eq__(self, other):
        return isinstance(other, EpsSeries) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"EpsSeries(order={self.order}, coeffs=[{', '.join(map(str, self.coeffs))}])"

    def evaluate(self, p: float, eps: float) -> float:
        return sum(loglinear_eval(c, p) * eps**i for i, c in enumerate(self.coeffs))


def series_multiply(a: EpsSeries, b: EpsSeries, k: int) -> EpsSeries:
    """Cauchy product truncated at order ``k``; missing terms count as zero."""
    out = []
    for n in range(k + 1):
        acc = ZERO_EXPR
        for i in range(n + 1):
            x, y = a.coefficient(i), b.coefficient(n - i)
            if x.is_zero() or y.is_zero():
                continue
            acc = acc + x * y
        out.append(acc)
    return EpsSeries(out)


def series_log(z: EpsSeries, k: int, a: int, b: int) -> EpsSeries:
    """Series of ``log z`` to order ``k``.

    The constant term of ``z`` must equal ``(1/2) (1-p)^a p^b``; its logarithm
    becomes the (log-carrying) constant coefficient.  Higher coefficients are
    the Taylor expansion of ``log(1 + X)`` with ``X = sum_i (z_i/z_0) eps^i``,
    accumulated as polynomial numerators over ``z_0^n`` and normalized once
    per order.
    """
    z0 = z.coefficient(0)
    if z0.is_zero():
        raise InvalidInputError("series_log: constant term is zero")
    if not z0.is_rational():
        raise UnsupportedRingElementError("series_log: constant term carries logarithms")
    m = Polynomial.monomial(b) * ONE_MINUS_P**a  # z0 = m / 2
    expected = RationalFunction(m * Fraction(1, 2))
    if z0.c_const != expected:
        raise InvalidInputError(f"series_log: constant term {z0} is not (1/2)(1-p)^{a} p^{b}")

    # X_i = y_i / m, with y_i = 2 z_i; terms of the z_i are polynomial only
    # after clearing their own denominators, so carry (numerator, denominator).
    ys: list[RationalFunction] = [RationalFunction(0)]
    for i in range(1, k + 1):
        zi = z.coefficient(i)
        if not zi.is_rational():
            raise UnsupportedRingElementError("series_log: non-constant term carries logarithms")
        ys.append(zi.c_const * 2)

    # log(1+X) = sum L_n eps^n;  n L_n = n X_n - sum_{i<n} i L_i X_{n-i}.
    # With L_n = ell_n / m^n and X_i = y_i / m:
    #   n ell_n = n y_n m^{n-1} - sum_i i ell_i y_{n-i} m^{n-i-1}
    m_pow = [Polynomial((1,))]
    for _ in range(k):
        m_pow.append(m_pow[-1] * m)
    ell: list[RationalFunction] = [RationalFunction(0)]
    out = [LogLinearExpr.log_monomial(a, b)]
    for n in range(1, k + 1):
        acc = ys[n] * RationalFunction(m_pow[n - 1] * n)
        for i in range(1, n):
            if ell[i].is_zero() or ys[n - i].is_zero():
                continue
            acc = acc - ell[i] * ys[n - i] * RationalFunction(m_pow[n - i - 1] * i)
        ell_n = acc * Fraction(1, n)
        ell.append(ell_n)
        out.append(LogLinearExpr.rational(ell_n / RationalFunction(m_pow[n])))
    return EpsSeries(out)


def lambda_form_to_p(num_coeffs: Sequence[int], lambda_power: int, scale, denom_power: int) -> RationalFunction:
    """Rewrite ``scale * lambda^lambda_power * N(lambda^2) / (1-lambda^2)^denom_power``
    as a rational function of ``p`` with ``lambda = 1 - 2p``.

    ``num_coeffs[j]`` multiplies ``lambda^(2j)``; ``1 - lambda^2 = 4p(1-p)``.
    """
    lam = Polynomial((1, -2))
    lam2 = lam * lam
    numerator = Polynomial(num_coeffs).compose(lam2) * lam**lambda_power * Fraction(scale)
    denominator = (Polynomial((0, 4, -4))) ** denom_power
    return RationalFunction(numerator, denominator)
