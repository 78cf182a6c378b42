import json
import math
import re
from fractions import Fraction

import numpy as np
import pytest

from hmp_entropy.errors import DegenerateRatioError, InvalidInputError, UnsupportedOrderError
from hmp_entropy.loglinear import loglinear_eval
from hmp_entropy.series import (
    DEFAULT_TABLE,
    CoefficientTable,
    coefficient,
    divergence_flag,
    entropy_series,
    free_element,
    hmp_coefficients,
    iid_coefficient,
    iid_coefficients,
    iid_entropy,
    iid_low_order,
    iid_radius_exact,
    radius_estimate,
)

LN2 = math.log(2.0)

# Reference numerators typed in by hand (L stands for lambda),
# independent of the integer data stored in the package.
TRANSCRIBED = {
    3: ("-16", "3", "5L^4-10L^2-3", 2),
    7: (
        "-256",
        "105",
        "280L^18-45941L^16-110888L^14+666580L^12+1628568L^10-270014L^8-1470296L^6-524588L^4-37296L^2-245",
        4,
    ),
    11: (
        "8192",
        "495",
        "98142L^30-1899975L^28+92425520L^26+3095961215L^24+25070557898L^22+59810870313L^20"
        "-11635283900L^18-173686662185L^16-120533821070L^14+74948247123L^12+102982107048L^10"
        "+35567469125L^8+4673872550L^6+217466315L^4+2569380L^2+2277",
        6,
    ),
}

# highest power of lambda in each full numerator
NUMERATOR_DEGREE = {3: 6, 4: 10, 5: 14, 6: 18, 7: 22, 8: 26, 9: 28, 10: 32, 11: 36}


def parse_lambda_poly(text: str) -> dict[int, int]:
    out = {}
    for sign, coef, power in re.findall(r"([+-]?)(\d+)(?:L\^(\d+))?", text):
        out[int(power or 0)] = int(coef) * (-1 if sign == "-" else 1)
    return out


@pytest.mark.parametrize("k", sorted(TRANSCRIBED))
def test_table_checksum_against_transcription(k):
    scale_num, scale_den, text, lam_power = TRANSCRIBED[k]
    form = DEFAULT_TABLE.high[k]
    assert form.scale == Fraction(int(scale_num), int(scale_den))
    assert form.lam_power == lam_power
    reference = parse_lambda_poly(text)
    stored = {2 * j: c for j, c in enumerate(form.num) if c}
    assert stored == reference
    # spot values: the stored form and the transcription agree at three points
    for lam in (Fraction(1, 3), Fraction(-2, 5), Fraction(7, 9)):
        value = Fraction(int(scale_num), int(scale_den)) * lam**lam_power
        value *= sum(c * lam**e for e, c in reference.items()) / (1 - lam**2) ** (2 * (k - 1))
        assert form.as_ratfunc()((1 - lam) / 2) == value


@pytest.mark.parametrize("k", range(3, 12))
def test_table_structure(k):
    form = DEFAULT_TABLE.high[k]
    full = form.lambda_polynomial()
    assert all(c == 0 for c in full[1::2])
    assert len(full) - 1 == NUMERATOR_DEGREE[k]
    assert form.denom_power == 2 * (k - 1)
    assert abs(free_element(form)) == Fraction(1, k * (k - 1))


def test_table_json_roundtrip(tmp_path):
    path = tmp_path / "table.json"
    path.write_text(json.dumps(DEFAULT_TABLE.to_json()))
    loaded = CoefficientTable.load(path)
    for k in range(12):
        assert loaded.expr(k) == DEFAULT_TABLE.expr(k)


def test_coefficient_examples():
    assert coefficient(0, 0.5) == pytest.approx(LN2)
    assert coefficient(1, 0.5) == 0.0
    assert coefficient(3, 0.5) == 0.0
    with pytest.raises(UnsupportedOrderError):
        coefficient(12, 0.3)


def test_coefficient_float_matches_exact_form():
    for k in range(3, 12):
        exact = DEFAULT_TABLE.expr(k).c_const(Fraction(3, 10))
        assert coefficient(k, 0.3) == pytest.approx(float(exact), rel=1e-11)


def test_low_order_closed_forms():
    p = 0.3
    assert coefficient(0, p) == pytest.approx(-p * math.log(p) - (1 - p) * math.log(1 - p), rel=1e-14)
    assert coefficient(1, p) == pytest.approx(2 * (1 - 2 * p) * math.log((1 - p) / p), rel=1e-14)
    h2 = -2 * (1 - 2 * p) * math.log((1 - p) / p) - (1 - 2 * p) ** 2 / (2 * p**2 * (1 - p) ** 2)
    assert coefficient(2, p) == pytest.approx(h2, rel=1e-14)


@pytest.mark.parametrize("k", range(3, 12))
def test_lambda_reflection_symmetry(k):
    for p in (0.07, 0.21, 0.38):
        assert coefficient(k, p) == pytest.approx(coefficient(k, 1 - p), rel=1e-10)


def test_series_at_zero_noise_three_way():
    for p in (0.1, 0.3, 0.45):
        res = entropy_series(p, 0.0)
        assert res.value == coefficient(0, p)
        assert res.value == pytest.approx(iid_entropy(p, 0.0), abs=1e-12)


def test_series_divergence_flag():
    assert entropy_series(0.05, 0.01).diverging
    assert not entropy_series(0.3, 0.01).diverging
    assert divergence_flag([1.0, 2.0, 3.0, 4.0])
    assert not divergence_flag([1.0, 2.0, 3.0, 2.5])
    assert not divergence_flag([1.0, 2.0])


# --- i.i.d. model ----------------------------------------------------------------------


def test_iid_entropy_examples():
    assert iid_entropy(0.3, 0.0) == pytest.approx(coefficient(0, 0.3), rel=1e-14)
    assert iid_entropy(0.5, 0.2) == pytest.approx(LN2)
    assert iid_entropy(0.1, 0.5) == pytest.approx(LN2)


def test_iid_taylor_partial_sum():
    coeffs = iid_coefficients(0.3, 12)
    partial = math.fsum(c * 0.05**k for k, c in enumerate(coeffs))
    assert partial == pytest.approx(iid_entropy(0.3, 0.05), abs=1e-8)


def test_iid_coefficients_match_numeric_derivatives():
    # Taylor coefficients of h_b(p + eps(1-2p)) from exact derivatives of h_b:
    # h_b^(k)(x) = (k-2)! [(-1)^(k-1)/x^(k-1) - 1/(1-x)^(k-1)] for k >= 2
    p = 0.22
    d = 1 - 2 * p
    for k in range(2, 9):
        deriv = math.factorial(k - 2) * ((-1) ** (k - 1) / p ** (k - 1) - 1 / (1 - p) ** (k - 1))
        assert iid_coefficient(k, p) == pytest.approx(deriv * d**k / math.factorial(k), rel=1e-12)


def test_iid_at_half():
    assert iid_low_order(1, 0.5) == 0.0
    for k in range(2, 8):
        assert iid_coefficient(k, 0.5) == 0.0
    with pytest.raises(InvalidInputError):
        iid_coefficient(1, 0.3)


def test_iid_ratio_limit():
    p = 0.3
    r = iid_radius_exact(p)
    c = iid_coefficients(p, 260)
    ratio = lambda k: abs(c[k] / c[k + 1])  # noqa: E731
    # leading behaviour is r (k+1)/(k-1); the approach to r is O(1/k)
    assert ratio(30) == pytest.approx(r * 31 / 29, rel=1e-6)
    errors = [abs(ratio(k) / r - 1) for k in (10, 30, 100, 250)]
    assert errors == sorted(errors, reverse=True)
    assert errors[-1] < 0.01


def test_iid_radius_exact():
    assert iid_radius_exact(0.25) == 0.5
    assert iid_radius_exact(1e-9) == pytest.approx(0.0, abs=1e-8)
    grid = np.linspace(0.01, 0.49, 40)
    assert np.all(np.diff([iid_radius_exact(p) for p in grid]) > 0)
    with pytest.raises(InvalidInputError):
        iid_radius_exact(0.5)


# --- ratio fit -------------------------------------------------------------------------


def test_radius_fit_geometric():
    r = 0.37
    fit = radius_estimate([r**-k for k in range(12)], 2, 11)
    assert fit.a == pytest.approx(r, rel=1e-10)
    assert fit.residual < 1e-12


def test_radius_fit_iid_at_point_three():
    fit = radius_estimate(iid_coefficients(0.3, 11), 2, 11)
    assert fit.radius == pytest.approx(0.75, rel=0.15)


def test_radius_fit_errors():
    coeffs = iid_coefficients(0.3, 11)
    coeffs[5] = 0.0
    with pytest.raises(DegenerateRatioError):
        radius_estimate(coeffs, 2, 11)
    with pytest.raises(InvalidInputError):
        radius_estimate(iid_coefficients(0.3, 11), 2, 5)


def test_hmp_radius_increasing():
    grid = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35]
    est = [radius_estimate(hmp_coefficients(p), 2, 11).radius for p in grid]
    assert all(e > 0 for e in est)
    assert all(b > a for a, b in zip(est, est[1:]))


def test_low_order_table_entries_evaluate():
    for k in range(3):
        assert loglinear_eval(DEFAULT_TABLE.expr(k), 0.3) == coefficient(k, 0.3)
