"""Exact eps-expansion of the block entropy H_N and of C_N = H_N - H_{N-1}.

For every observed sequence R, Q(R) is an exact polynomial in (p, eps).  Its
eps^0 slice is Z0 = (1/2)(1-p)^a p^b, where a counts equal neighbours in R and
b = N-1-a, so log Q = log Z0 + log(1 + X) with X a pure rational series.
Summing -Q log Q over all R, order by order, gives H_N^(n) as an exact
log-linear expression.

Two independent routes compute the same thing:

* ``method="fast"`` works on integer polynomial numerators.  With
  m = (1-p)^a p^b and Y_i = 2 Z_i, the order-n rational part of Q log Q is
  G_n / (2 L m^(n-1)) for an integer polynomial G_n (L = lcm(1..k) clears the
  1/j of the log series).  Sequences sharing ``a`` share the denominator, so
  numerators are summed per bucket and combined once.
* ``method="direct"`` feeds each R through :func:`series_log` and
  :func:`series_multiply` on :class:`EpsSeries` values.

Both enumerate one representative per orbit of the global-flip/reversal
group (Q is invariant under both), weighted by orbit size, unless
``use_symmetry=False``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .errors import InvalidInputError, ResourceLimitError
from .loglinear import EpsSeries, LogLinearExpr, ZERO_EXPR, ratfunc_to_json, series_log, series_multiply
from .poly import Polynomial, RationalFunction, from_monomial_denominator, poly_from_ints
from .series import DEFAULT_TABLE, CoefficientTable

log = logging.getLogger(__name__)

DEFAULT_MAX_N = 8
DEFAULT_MAX_K = 11


# --------------------------------------------------------------------------
# integer polynomial helpers (lists of ints, index = power of p)
# --------------------------------------------------------------------------


def _imul(a: list[int], b: list[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _iadd_into(acc: list[int], b: list[int], scale: int = 1) -> list[int]:
    if len(acc) < len(b):
        acc.extend([0] * (len(b) - len(acc)))
    for i, y in enumerate(b):
        acc[i] += scale * y
    return acc


def _ipow(a: list[int], n: int) -> list[int]:
    out = [1]
    for _ in range(n):
        out = _imul(out, a)
    return out


# --------------------------------------------------------------------------
# Z(R) as a bivariate polynomial
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BivariatePoly:
    """Exact polynomial in (p, eps); ``coeffs[(i, j)]`` multiplies p^i eps^j."""

    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {k: Fraction(v) for k, v in self.coeffs.items() if v != 0}
        object.__setattr__(self, "coeffs", clean)

    @property
    def p_degree(self) -> int:
        return max((i for i, _ in self.coeffs), default=-1)

    @property
    def eps_degree(self) -> int:
        return max((j for _, j in self.coeffs), default=-1)

    def eps_slice(self, j: int) -> Polynomial:
        """Z_j(R): the coefficient of eps^j as a polynomial in p."""
        deg = self.p_degree
        return Polynomial([self.coeffs.get((i, j), 0) for i in range(deg + 1)])

    def __add__(self, other: "BivariatePoly") -> "BivariatePoly":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return BivariatePoly(out)

    def __eq__(self, other):
        if isinstance(other, BivariatePoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == BivariatePoly({(0, 0): other}).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __call__(self, p, eps):
        return sum(c * p**i * eps**j for (i, j), c in self.coeffs.items())


def _as_tuple(R) -> tuple[int, ...]:
    t = tuple(int(x) for x in R)
    if not t or any(x not in (1, -1) for x in t):
        raise InvalidInputError("R must be a nonempty sequence over {+1, -1}")
    return t


def _z_integer(R: tuple[int, ...]) -> dict[tuple[int, int], int]:
    """2 Q(R) as an integer bivariate polynomial via the forward recursion."""
    # alpha[s] : dict (i, j) -> int ; s in (+1, -1)
    def emit(poly, agree):
        # multiply by (1 - eps) if agree else eps
        out = {}
        for (i, j), c in poly.items():
            if agree:
                out[(i, j)] = out.get((i, j), 0) + c
                out[(i, j + 1)] = out.get((i, j + 1), 0) - c
            else:
                out[(i, j + 1)] = out.get((i, j + 1), 0) + c
        return out

    def step(stay, switch):
        # (1 - p) * stay + p * switch
        out = {}
        for (i, j), c in stay.items():
            out[(i, j)] = out.get((i, j), 0) + c
            out[(i + 1, j)] = out.get((i + 1, j), 0) - c
        for (i, j), c in switch.items():
            out[(i + 1, j)] = out.get((i + 1, j), 0) + c
        return out

    alpha = {s: emit({(0, 0): 1}, s == R[0]) for s in (1, -1)}
    for r in R[1:]:
        alpha = {s: emit(step(alpha[s], alpha[-s]), s == r) for s in (1, -1)}
    total = dict(alpha[1])
    for k, c in alpha[-1].items():
        total[k] = total.get(k, 0) + c
    return {k: c for k, c in total.items() if c}


def z_polynomial(R, *, max_n: int = DEFAULT_MAX_N) -> BivariatePoly:
    """Q(R) = Z(R)/2 as an exact polynomial in p and eps (prefactor 1/2 included)."""
    R = _as_tuple(R)
    if len(R) > max_n:
        raise ResourceLimitError(f"N={len(R)} exceeds the symbolic cap {max_n}")
    return BivariatePoly({k: Fraction(c, 2) for k, c in _z_integer(R).items()})


def agreement_count(R: tuple[int, ...]) -> int:
    return sum(1 for x, y in zip(R, R[1:]) if x == y)


def orbit_representatives(n: int, use_symmetry: bool = True) -> Iterator[tuple[tuple[int, ...], int]]:
    """Yield (R, multiplicity) covering all 2^n sequences exactly once in total weight."""
    if not use_symmetry:
        for R in itertools.product((1, -1), repeat=n):
            yield R, 1
        return
    for R in itertools.product((1, -1), repeat=n):
        rev = R[::-1]
        orbit = {R, tuple(-x for x in R), rev, tuple(-x for x in rev)}
        if R == max(orbit):
            yield R, len(orbit)


# --------------------------------------------------------------------------
# block entropy series
# --------------------------------------------------------------------------


def _entropy_fast(n_len: int, k: int, use_symmetry: bool) -> list[LogLinearExpr]:
    lcm = math.lcm(*range(1, k + 1)) if k >= 1 else 1
    one_minus_p = [1, -1]
    b_total = n_len - 1
    # per-order accumulators
    log_p = [[] for _ in range(k + 1)]
    log_1mp = [[] for _ in range(k + 1)]
    log_2 = [[] for _ in range(k + 1)]
    buckets: dict[int, list[list[int]]] = {}

    for R, weight in orbit_representatives(n_len, use_symmetry):
        a = agreement_count(R)
        b = b_total - a
        zint = _z_integer(R)
        ys = [[] for _ in range(k + 1)]
        for (i, j), c in zint.items():
            if j <= k:
                y = ys[j]
                if len(y) <= i:
                    y.extend([0] * (i + 1 - len(y)))
                y[i] += c
        m = _imul([0] * b + [1], _ipow(one_minus_p, a))
        m_pow = [[1]]
        for _ in range(k):
            m_pow.append(_imul(m_pow[-1], m))
        for n in range(k + 1):
            if ys[n]:
                _iadd_into(log_p[n], ys[n], -weight * b)
                _iadd_into(log_1mp[n], ys[n], -weight * a)
                _iadd_into(log_2[n], ys[n], weight)
        # g_n = L * ell_n, log(1 + X) = sum ell_n / m^n eps^n
        g: list[list[int]] = [[]]
        for n in range(1, k + 1):
            acc = [lcm * n * c for c in _imul(ys[n], m_pow[n - 1])]
            for i in range(1, n):
                if g[i] and ys[n - i]:
                    _iadd_into(acc, _imul(_imul(g[i], ys[n - i]), m_pow[n - i - 1]), -i)
            quo = []
            for c in acc:
                q, r = divmod(c, n)
                if r:
                    raise ArithmeticError("non-integral log-series numerator")
                quo.append(q)
            g.append(quo)
        bucket = buckets.setdefault(a, [[] for _ in range(k + 1)])
        for n in range(1, k + 1):
            G = list(g[n])
            for i in range(1, n):
                if ys[i] and g[n - i]:
                    _iadd_into(G, _imul(_imul(ys[i], g[n - i]), m_pow[i - 1]))
            _iadd_into(bucket[n], G, weight)

    out = []
    for n in range(k + 1):
        rational = RationalFunction(0)
        if n >= 1:
            total: list[int] = []
            for a, per_order in buckets.items():
                if not per_order[n]:
                    continue
                b = b_total - a
                shift = _imul([0] * (a * (n - 1)) + [1], _ipow(one_minus_p, b * (n - 1)))
                _iadd_into(total, _imul(per_order[n], shift))
            power = b_total * (n - 1)
            rational = from_monomial_denominator(poly_from_ints(total), power, power, Fraction(-1, 2 * lcm))
        out.append(
            LogLinearExpr(
                c_const=rational,
                c_logp=RationalFunction(poly_from_ints(log_p[n]) * Fraction(1, 2)),
                c_log1mp=RationalFunction(poly_from_ints(log_1mp[n]) * Fraction(1, 2)),
                c_log2=RationalFunction(poly_from_ints(log_2[n]) * Fraction(1, 2)),
            )
        )
    return out


def _entropy_direct(n_len: int, k: int, use_symmetry: bool) -> list[LogLinearExpr]:
    total = [ZERO_EXPR] * (k + 1)
    for R, weight in orbit_representatives(n_len, use_symmetry):
        z = z_polynomial(R, max_n=n_len)
        zs = EpsSeries([LogLinearExpr.rational(RationalFunction(z.eps_slice(j))) for j in range(k + 1)])
        a = agreement_count(R)
        logz = series_log(zs, k, a, n_len - 1 - a)
        prod = series_multiply(zs, logz, k)
        total = [t - c.scale(weight) for t, c in zip(total, prod.coeffs)]
    return total


_CACHE: dict[tuple[int, str, bool], list[LogLinearExpr]] = {}


def block_entropy_series(
    N: int,
    k: int,
    *,
    method: str = "fast",
    use_symmetry: bool = True,
    max_n: int = DEFAULT_MAX_N,
    max_k: int = DEFAULT_MAX_K,
) -> list[LogLinearExpr]:
    """Exact coefficients H_N^(0..k) of the eps-expansion of the block entropy."""
    if N < 1:
        raise InvalidInputError("N must be >= 1")
    if k < 0:
        raise InvalidInputError("order must be >= 0")
    if N > max_n or k > max_k:
        raise ResourceLimitError(f"(N={N}, k={k}) exceeds the symbolic caps (N <= {max_n}, k <= {max_k})")
    if N > DEFAULT_MAX_N or k > DEFAULT_MAX_K:
        log.warning("symbolic expansion beyond N=%d, k=%d: cost grows exponentially in N", DEFAULT_MAX_N, DEFAULT_MAX_K)
    key = (N, method, use_symmetry)
    cached = _CACHE.get(key)
    if cached is not None and len(cached) > k:
        return list(cached[: k + 1])
    if method == "fast":
        result = _entropy_fast(N, k, use_symmetry)
    elif method == "direct":
        result = _entropy_direct(N, k, use_symmetry)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    _CACHE[key] = result
    return list(result)


def conditional_series(N: int, k: int, **kwargs) -> list[LogLinearExpr]:
    """Exact coefficients C_N^(0..k) of C_N = H_N - H_{N-1}."""
    if N < 2:
        raise InvalidInputError("C_N needs N >= 2")
    upper = block_entropy_series(N, k, **kwargs)
    lower = block_entropy_series(N - 1, k, **kwargs)
    return [x - y for x, y in zip(upper, lower)]


# --------------------------------------------------------------------------
# settling conjecture
# --------------------------------------------------------------------------


def critical_length(k: int) -> int:
    """Conjectured settling length ceil((k+3)/2)."""
    return -(-(k + 3) // 2)


@dataclass
class OrderRecord:
    k: int
    values: dict[int, LogLinearExpr]
    settling_n: int
    expected_n: int
    table_match: bool | None

    @property
    def settling_matches(self) -> bool:
        return self.settling_n == self.expected_n

    @property
    def observable(self) -> bool:
        """At least two computed lengths share the settled value."""
        return self.settling_n < max(self.values)

    @property
    def settled(self) -> LogLinearExpr:
        return self.values[max(self.values)]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "settling_n": self.settling_n,
            "expected_n": self.expected_n,
            "settling_matches": self.settling_matches,
            "observable": self.observable,
            "table_match": self.table_match,
            "settled_value": self.settled.to_json(),
            "is_pure_rational": self.settled.is_rational(),
        }


@dataclass
class ConjectureReport:
    k_max: int
    n_max: int
    orders: list[OrderRecord]

    @property
    def all_settling_match(self) -> bool:
        return all(r.settling_matches for r in self.orders)

    @property
    def all_table_match(self) -> bool:
        return all(r.table_match is not False for r in self.orders)

    @property
    def ok(self) -> bool:
        return self.all_settling_match and self.all_table_match

    def to_json(self) -> dict:
        return {
            "k_max": self.k_max,
            "n_max": self.n_max,
            "ok": self.ok,
            "orders": [r.to_json() for r in self.orders],
        }


def _settling_length(values: dict[int, LogLinearExpr]) -> int:
    ns = sorted(values)
    last = values[ns[-1]]
    settle = ns[-1]
    for n in reversed(ns[:-1]):
        if values[n] != last:
            break
        settle = n
    return settle


def _same(a: LogLinearExpr, b: LogLinearExpr) -> bool:
    from .poly import ratfunc_equal

    return all(ratfunc_equal(x, y) for x, y in zip(a.coefficients, b.coefficients))


def verify_conjecture(
    k_max: int,
    n_max: int,
    table: CoefficientTable = DEFAULT_TABLE,
    *,
    max_n: int = DEFAULT_MAX_N,
    max_k: int = DEFAULT_MAX_K,
) -> ConjectureReport:
    """Compute C_N^(k) exactly for 2 <= N <= n_max, k <= k_max and check settling."""
    if n_max < critical_length(k_max) + 1:
        raise InvalidInputError(
            f"n_max={n_max} too small to observe settling up to k={k_max}; need >= {critical_length(k_max) + 1}"
        )
    per_n = {n: conditional_series(n, k_max, max_n=max_n, max_k=max_k) for n in range(2, n_max + 1)}
    records = []
    for k in range(k_max + 1):
        values = {n: per_n[n][k] for n in per_n}
        settle = _settling_length(values)
        match = None
        if k in table.low or k in table.high:
            match = _same(values[n_max], table.expr(k))
        records.append(OrderRecord(k=k, values=values, settling_n=settle, expected_n=critical_length(k), table_match=match))
    return ConjectureReport(k_max=k_max, n_max=n_max, orders=records)


def settled_coefficient(k: int) -> LogLinearExpr:
    """C^(k) taken at the conjectured settling length."""
    n = max(critical_length(k), 2)
    return conditional_series(n, k, max_n=max(n, DEFAULT_MAX_N))[k]


def free_element(k: int, value: LogLinearExpr | None = None) -> Fraction:
    """Constant term of [p(1-p)]^{2(k-1)} C^(k) as a polynomial in p."""
    if not 3 <= k <= DEFAULT_MAX_K:
        raise InvalidInputError("free element defined here for 3 <= k <= 11")
    value = settled_coefficient(k) if value is None else value
    if not value.is_rational():
        raise InvalidInputError("free element needs a pure rational coefficient")
    f = value.c_const
    weight = Polynomial((0, 1, -1)) ** (2 * (k - 1))
    scaled = RationalFunction(f.num * weight, f.den)
    if not scaled.is_polynomial():
        raise InvalidInputError(f"[p(1-p)]^{2 * (k - 1)} C^({k}) is not a polynomial")
    return scaled.num(Fraction(0)) / scaled.den(Fraction(0))


def report_rational_json(f: RationalFunction) -> dict:
    return ratfunc_to_json(f)
