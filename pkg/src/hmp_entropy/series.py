"""Small-noise expansion H(p, eps) = sum_k H^(k)(p) eps^k of the entropy rate.

Orders 0-2 are stored as exact log-linear closed forms.  Orders 3-11 are
stored as integer data in the variable ``lam = 1 - 2p``::

    H^(k) = scale * lam^lam_power * sum_j num[j] lam^(2j) / (1 - lam^2)^(2(k-1))

Also here: the i.i.d. comparison model h_b(p(1-eps) + eps(1-p)) and the
ratio-fit estimate of the radius of convergence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateRatioError, InvalidInputError, NoConvergenceError, UnsupportedOrderError
from .loglinear import LogLinearExpr, lambda_form_to_p, loglinear_eval
from .poly import Polynomial, RationalFunction

MAX_ORDER = 11


@dataclass(frozen=True)
class LambdaForm:
    """One high-order coefficient; ``num[j]`` multiplies ``lam^(2j)``."""

    order: int
    num: tuple[int, ...]
    lam_power: int
    scale: Fraction
    denom_power: int

    def value(self, p: float) -> float:
        lam = 1.0 - 2.0 * p
        lam2 = lam * lam
        acc = 0.0
        for c in reversed(self.num):
            acc = acc * lam2 + c
        return float(self.scale) * lam**self.lam_power * acc / (1.0 - lam2) ** self.denom_power

    def as_ratfunc(self) -> RationalFunction:
        return lambda_form_to_p(self.num, self.lam_power, self.scale, self.denom_power)

    def lambda_polynomial(self) -> list[int]:
        """Full numerator in powers of lam (odd entries are zero by construction)."""
        out = [0] * (self.lam_power + 2 * len(self.num) - 1)
        for j, c in enumerate(self.num):
            out[self.lam_power + 2 * j] = c
        return out


_HIGH_ORDER_DATA = {
    3: ((-3, -10, 5), 2, Fraction(-16, 3)),
    4: ((-3, -140, -114, 20, 109), 2, Fraction(8, 3)),
    5: ((-100, -769, -708, 762, 336, 95), 4, Fraction(-128, 15)),
    6: ((-115, -4001, -17995, -7825, 16511, 9525, -321, 125), 4, Fraction(128, 15)),
    7: (
        (-245, -37296, -524588, -1470296, -270014, 1628568, 666580, -110888, -45941, 280),
        4,
        Fraction(-256, 105),
    ),
    8: (
        (-49, -48286, -1872317, -14556080, -29072946, 3658284, 35666574, 12116328, -5222301, -2072958, -169169, 56),
        4,
        Fraction(64, 21),
    ),
    9: (
        (
            4683, 495993, 8950625, 46641379, 67137630, -30319318,
            -97554574, -23482698, 20135431, 8819501, 968829, 37527,
        ),
        6,
        Fraction(2048, 63),
    ),
    10: (
        (
            2187, 684129, 26886370, 296483526, 1120170657, 1173787011, -1054659252,
            -2068579420, -326987427, 571835031, 243826482, 31894966, 1394199, 38757,
        ),
        6,
        Fraction(-2048, 45),
    ),
    11: (
        (
            2277, 2569380, 217466315, 4673872550, 35567469125, 102982107048, 74948247123,
            -120533821070, -173686662185, -11635283900, 59810870313, 25070557898,
            3095961215, 92425520, -1899975, 98142,
        ),
        6,
        Fraction(8192, 495),
    ),
}


def _low_order_exprs() -> dict[int, LogLinearExpr]:
    p = Polynomial((0, 1))
    one_minus_2p = RationalFunction(Polynomial((1, -2)))
    h0 = LogLinearExpr(c_logp=RationalFunction(-p), c_log1mp=RationalFunction(p - 1))
    # 2(1-2p) log((1-p)/p)
    h1 = LogLinearExpr(c_logp=one_minus_2p * -2, c_log1mp=one_minus_2p * 2)
    rational2 = -(one_minus_2p**2) / RationalFunction(Polynomial((0, 0, 2)) * Polynomial((1, -1)) ** 2)
    h2 = LogLinearExpr(c_const=rational2, c_logp=one_minus_2p * 2, c_log1mp=one_minus_2p * -2)
    return {0: h0, 1: h1, 2: h2}


@dataclass(frozen=True)
class CoefficientTable:
    """Closed-form entropy-series coefficients keyed by order."""

    low: Mapping[int, LogLinearExpr]
    high: Mapping[int, LambdaForm]

    def __post_init__(self):
        object.__setattr__(self, "low", MappingProxyType(dict(self.low)))
        object.__setattr__(self, "high", MappingProxyType(dict(self.high)))

    @property
    def max_order(self) -> int:
        return max(max(self.low, default=-1), max(self.high, default=-1))

    def orders(self) -> list[int]:
        return sorted(set(self.low) | set(self.high))

    def expr(self, k: int) -> LogLinearExpr:
        """Exact coefficient as a log-linear expression in p."""
        if k in self.low:
            return self.low[k]
        if k in self.high:
            return LogLinearExpr.rational(self.high[k].as_ratfunc())
        raise UnsupportedOrderError(f"no coefficient of order {k} (max {self.max_order})")

    def value(self, k: int, p: float) -> float:
        if k in self.low:
            return loglinear_eval(self.low[k], p)
        if k in self.high:
            return self.high[k].value(p)
        raise UnsupportedOrderError(f"no coefficient of order {k} (max {self.max_order})")

    def to_json(self) -> dict:
        return {
            "low": {str(k): e.to_json() for k, e in self.low.items()},
            "high": {
                str(k): {"num": list(f.num), "lam_power": f.lam_power, "scale": str(f.scale), "denom_power": f.denom_power}
                for k, f in self.high.items()
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "CoefficientTable":
        low = {int(k): LogLinearExpr.from_json(v) for k, v in data.get("low", {}).items()}
        high = {
            int(k): LambdaForm(int(k), tuple(int(c) for c in v["num"]), int(v["lam_power"]), Fraction(v["scale"]), int(v["denom_power"]))
            for k, v in data.get("high", {}).items()
        }
        return cls(low, high)

    @classmethod
    def load(cls, path) -> "CoefficientTable":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _build_default() -> CoefficientTable:
    high = {
        k: LambdaForm(order=k, num=num, lam_power=lp, scale=scale, denom_power=2 * (k - 1))
        for k, (num, lp, scale) in _HIGH_ORDER_DATA.items()
    }
    return CoefficientTable(_low_order_exprs(), high)


DEFAULT_TABLE = _build_default()


def coefficient(k: int, p: float, table: CoefficientTable = DEFAULT_TABLE) -> float:
    """H^(k)(p) in nats."""
    if k < 0 or k > MAX_ORDER:
        raise UnsupportedOrderError(f"order must be in 0..{MAX_ORDER}, got {k}")
    if not 0.0 < p < 1.0:
        raise InvalidInputError(f"p must lie in (0, 1), got {p}")
    return table.value(k, p)


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms: list[float]
    diverging: bool


def divergence_flag(terms: Sequence[float], window: int = 3) -> bool:
    """True when |term_k| grew at each of the last ``window`` orders."""
    mags = [abs(t) for t in terms]
    if len(mags) < window + 1:
        return False
    tail = mags[-(window + 1):]
    return all(b > a for a, b in zip(tail, tail[1:]))


def entropy_series(p: float, eps: float, order: int = MAX_ORDER, table: CoefficientTable = DEFAULT_TABLE) -> SeriesResult:
    """Partial sum of the eps-expansion up to ``order`` with a divergence flag."""
    if order < 0 or order > table.max_order:
        raise UnsupportedOrderError(f"order must be in 0..{table.max_order}, got {order}")
    terms = [table.value(0, p)]
    for k in range(1, order + 1):
        terms.append(table.value(k, p) * eps**k if eps else 0.0)
    return SeriesResult(value=math.fsum(terms), terms=terms, diverging=divergence_flag(terms))


# --------------------------------------------------------------------------
# i.i.d. comparison model
# --------------------------------------------------------------------------


def _hb(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -(x * math.log(x) + (1.0 - x) * math.log1p(-x))


def iid_entropy(p: float, eps: float) -> float:
    """h_b(p(1-eps) + eps(1-p))."""
    return _hb(p * (1.0 - eps) + eps * (1.0 - p))


def iid_coefficient(k: int, p: float) -> float:
    """eps^k coefficient of the i.i.d. entropy for k >= 2.

    Taylor expansion of h_b(p + eps(1-2p)):
    -[(2p-1)^k / p^(k-1) + (1-2p)^k / (1-p)^(k-1)] / (k(k-1)).
    """
    if k < 2:
        raise InvalidInputError("orders 0 and 1 have explicit forms; use iid_low_order")
    if not 0.0 < p <= 0.5:
        raise InvalidInputError(f"p must lie in (0, 1/2], got {p}")
    return -((2 * p - 1) ** k / p ** (k - 1) + (1 - 2 * p) ** k / (1 - p) ** (k - 1)) / (k * (k - 1))


def iid_low_order(k: int, p: float) -> float:
    if k == 0:
        return _hb(p)
    if k == 1:
        return (1 - 2 * p) * math.log((1 - p) / p)
    raise InvalidInputError("only orders 0 and 1")


def iid_coefficients(p: float, k_max: int) -> list[float]:
    return [iid_low_order(k, p) if k < 2 else iid_coefficient(k, p) for k in range(k_max + 1)]


def iid_radius_exact(p: float) -> float:
    if not 0.0 < p < 0.5:
        raise InvalidInputError(f"radius p/(1-2p) is defined here for 0 < p < 1/2, got {p}")
    return p / (1.0 - 2.0 * p)


# --------------------------------------------------------------------------
# radius of convergence
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RadiusFit:
    a: float
    b: float
    c: float
    residual: float
    k_range: tuple[int, int]

    @property
    def radius(self) -> float:
        return self.a


def radius_estimate(coefficients: Sequence[float], k_min: int, k_max: int) -> RadiusFit:
    """Fit |c_k / c_{k+1}| ~ (a k + b)/(k + c) for k_min <= k < k_max; the radius is a.

    Solved as linear least squares via ratio_k (k + c) = a k + b.  Magnitudes
    are used because the nearest singularity may sit on the negative eps axis,
    which makes the raw ratios alternate in sign.
    """
    if k_max >= len(coefficients) or k_min < 0:
        raise InvalidInputError(f"k range {k_min}..{k_max} outside the {len(coefficients)} coefficients given")
    ks = np.arange(k_min, k_max, dtype=float)
    if ks.size < 4:
        raise InvalidInputError("need at least 4 ratios for the fit")
    c = np.asarray(coefficients, dtype=float)
    if np.any(c[k_min : k_max + 1] == 0.0):
        raise DegenerateRatioError("zero coefficient inside the fitted range")
    ratios = np.abs(c[k_min:k_max] / c[k_min + 1 : k_max + 1])
    design = np.column_stack([ks, np.ones_like(ks), -ratios])
    sol, _, rank, _ = np.linalg.lstsq(design, ratios * ks, rcond=None)
    if rank < 2 or not np.all(np.isfinite(sol)):
        raise NoConvergenceError("ratio fit is degenerate")
    a, b, cc = (float(x) for x in sol)
    with np.errstate(divide="ignore", invalid="ignore"):
        fitted = (a * ks + b) / (ks + cc)
    residual = float(np.sqrt(np.mean((fitted - ratios) ** 2)))
    if not math.isfinite(residual):
        raise NoConvergenceError("ratio fit has a pole inside the fitted range")
    return RadiusFit(a=a, b=b, c=cc, residual=residual, k_range=(k_min, k_max))


def hmp_coefficients(p: float, table: CoefficientTable = DEFAULT_TABLE) -> list[float]:
    return [table.value(k, p) for k in range(table.max_order + 1)]


def free_element(form: LambdaForm) -> Fraction:
    """Value at p = 0 of [p(1-p)]^{2(k-1)} H^(k): lam = 1 and (1-lam^2) = 4p(1-p)."""
    return form.scale * sum(form.num) / Fraction(4) ** form.denom_power
