"""Exact univariate polynomials and rational functions over the rationals.

Coefficients are :class:`fractions.Fraction`; the indeterminate is always
called ``p`` (the Markov flip probability).  Both types are immutable and
hashable, and a :class:`RationalFunction` is always kept in canonical form
(gcd removed, monic denominator), so ``==`` is structural equality.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

from .errors import EvaluationPoleError, InvalidInputError

BigRational = Fraction


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class Polynomial:
    """Dense polynomial in ``p``; ``coeffs[i]`` multiplies ``p**i``.

    The zero polynomial has an empty coefficient tuple.
    """

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable = ()):
        cs = [_as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)
        self._hash = None

    @classmethod
    def _raw(cls, coeffs: list[Fraction]) -> "Polynomial":
        # caller guarantees Fraction entries
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        obj = cls.__new__(cls)
        obj.coeffs = tuple(coeffs)
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls((c,))

    @classmethod
    def monomial(cls, power: int, c=1) -> "Polynomial":
        return cls([0] * power + [c])

    # -- structure -----------------------------------------------------
    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Polynomial((other,)).coeffs
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("Polynomial", self.coeffs))
        return self._hash

    def __repr__(self):
        return f"Polynomial({[str(c) for c in self.coeffs]})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else ("p" if i == 1 else f"p^{i}")
            if mono and c == 1:
                parts.append(mono)
            elif mono and c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}{'*' + mono if mono else ''}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- arithmetic ----------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial((other,))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw([-c for c in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Polynomial()
            return Polynomial._raw([c * other for c in self.coeffs])
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Polynomial()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] += x * y
        return Polynomial._raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise InvalidInputError("negative polynomial power")
        result = Polynomial((1,))
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, other):
        # scalar division only; use divmod for polynomial division
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("polynomial division by zero scalar")
            return self * (Fraction(1) / _as_fraction(other))
        return NotImplemented

    def __divmod__(self, other: "Polynomial"):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lc_inv = 1 / other.lc
        if len(rem) - 1 < dq:
            return Polynomial(), self
        quo = [Fraction(0)] * (len(rem) - dq)
        oc = other.coeffs
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i] * lc_inv
            if c:
                quo[i - dq] = c
                for j in range(dq + 1):
                    rem[i - dq + j] -= c * oc[j]
        return Polynomial._raw(quo), Polynomial._raw(rem[:dq])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return self / self.lc

    def derivative(self) -> "Polynomial":
        return Polynomial._raw([i * c for i, c in enumerate(self.coeffs)][1:])

    def compose(self, inner: "Polynomial") -> "Polynomial":
        """``self(inner(p))`` by Horner's rule."""
        result = Polynomial()
        for c in reversed(self.coeffs):
            result = result * inner + c
        return result

    def __call__(self, x):
        """Evaluate by Horner's rule; exact for rational ``x``."""
        acc = 0 if isinstance(x, (int, Fraction)) else 0.0
        if isinstance(x, (int, Fraction)):
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return Fraction(acc)
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    # -- gcd -----------------------------------------------------------
    @staticmethod
    def gcd(a: "Polynomial", b: "Polynomial") -> "Polynomial":
        """Monic gcd over Q (zero if both inputs are zero)."""
        while not b.is_zero():
            a, b = b, (a % b).monic()
        return a.monic()

    def divide_exact(self, other: "Polynomial") -> "Polynomial":
        q, r = divmod(self, other)
        if not r.is_zero():
            raise InvalidInputError("polynomial division is not exact")
        return q


P = Polynomial((0, 1))
ONE_MINUS_P = Polynomial((1, -1))


def _strip_factor_p(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    k = 0
    while k < len(num.coeffs) and k < len(den.coeffs) and num.coeffs[k] == 0 and den.coeffs[k] == 0:
        k += 1
    if k:
        num = Polynomial._raw(list(num.coeffs[k:]))
        den = Polynomial._raw(list(den.coeffs[k:]))
    return num, den


def _deflate_at_one(poly: Polynomial) -> tuple[Polynomial, bool]:
    """Divide by (p - 1) if p = 1 is a root."""
    cs = poly.coeffs
    if not cs or sum(cs) != 0:
        return poly, False
    # synthetic division by (p - 1)
    n = len(cs) - 1
    quo = [Fraction(0)] * n
    acc = Fraction(0)
    for i in range(n, 0, -1):
        acc = acc + cs[i]
        quo[i - 1] = acc
    return Polynomial._raw(quo), True


def _is_p_one_minus_p_monomial(den: Polynomial) -> bool:
    """True if den = c * p^x * (1-p)^y for some x, y >= 0."""
    k = 0
    while den.coeffs[k] == 0:
        k += 1
    d = Polynomial._raw(list(den.coeffs[k:]))
    while d.degree > 0:
        d, ok = _deflate_at_one(d)
        if not ok:
            return False
    return True


def _to_poly(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (list, tuple)):
        return Polynomial(x)
    return Polynomial((x,))


class RationalFunction:
    """Quotient ``num/den`` of polynomials in ``p``, kept canonical.

    Canonical form: ``gcd(num, den) = 1`` and ``den`` is monic (so its leading
    coefficient is positive).  Zero is ``0/1``.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, *, _canonical: bool = False):
        num = _to_poly(num)
        den = Polynomial._raw([Fraction(1)]) if den is None else _to_poly(den)
        if den.is_zero():
            raise InvalidInputError("rational function with zero denominator")
        if not _canonical:
            num, den = self._normalize(num, den)
        self.num = num
        self.den = den
        self._hash = None

    @staticmethod
    def _normalize(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
        if num.is_zero():
            return Polynomial(), Polynomial((1,))
        if den.degree > 0:
            num, den = _strip_factor_p(num, den)
            while den.degree > 0:
                n2, ok_n = _deflate_at_one(num)
                if not ok_n:
                    break
                d2, ok_d = _deflate_at_one(den)
                if not ok_d:
                    break
                num, den = n2, d2
            if den.degree > 0 and not _is_p_one_minus_p_monomial(den):
                g = Polynomial.gcd(num, den)
                if g.degree > 0:
                    num = num.divide_exact(g)
                    den = den.divide_exact(g)
        lc = den.lc
        if lc != 1:
            num = num / lc
            den = den / lc
        return num, den

    @classmethod
    def from_parts(cls, num, den) -> "RationalFunction":
        return cls(num, den)

    @classmethod
    def constant(cls, c) -> "RationalFunction":
        return cls(Polynomial((c,)), _canonical=False)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction, Polynomial)):
            return self == RationalFunction(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("RationalFunction", self.num.coeffs, self.den.coeffs))
        return self._hash

    def __repr__(self):
        return f"RationalFunction({self.num!r}, {self.den!r})"

    def __str__(self):
        if self.den == Polynomial((1,)):
            return str(self.num)
        return f"({self.num})/({self.den})"

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, (int, Fraction, Polynomial)):
            return RationalFunction(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return RationalFunction(1) / (self ** (-n))
        return RationalFunction(self.num**n, self.den**n, _canonical=True)

    def __call__(self, x):
        d = self.den(x)
        if d == 0:
            raise EvaluationPoleError(f"pole of {self} at p={x}")
        return self.num(x) / d


def ratfunc_normalize(f: RationalFunction) -> RationalFunction:
    """Return the canonical form of ``f`` (re-normalizes from its parts)."""
    if f.den.is_zero():
        raise InvalidInputError("zero denominator")
    return RationalFunction(f.num, f.den)


def ratfunc_equal(a: RationalFunction, b: RationalFunction) -> bool:
    """Cross-multiplication equality; independent of canonicalization."""
    return a.num * b.den == b.num * a.den


def from_monomial_denominator(num: Polynomial, p_power: int, q_power: int, scale=1) -> RationalFunction:
    """Build ``scale * num / (p^p_power (1-p)^q_power)`` in canonical form.

    Cheaper than the general constructor: the only possible common factors
    are ``p`` and ``1-p``, which are stripped by exact deflation.
    """
    if num.is_zero():
        return RationalFunction(Polynomial(), _canonical=False)
    cs = list(num.coeffs)
    k = 0
    while k < p_power and cs[k] == 0:
        k += 1
    num = Polynomial._raw(cs[k:])
    p_power -= k
    while q_power:
        n2, ok = _deflate_at_one(num)
        if not ok:
            break
        # (1-p) = -(p-1)
        num = -n2
        q_power -= 1
    den = Polynomial.monomial(p_power) * ONE_MINUS_P**q_power
    lc = den.lc
    num = num * (_as_fraction(scale) / lc)
    den = den / lc
    return RationalFunction(num, den, _canonical=True)


def as_ratfunc(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    return RationalFunction(x)


def poly_from_ints(coeffs: Sequence[int]) -> Polynomial:
    return Polynomial._raw([Fraction(c) for c in coeffs])
