import itertools
import json
import math
from fractions import Fraction

import pytest

from hmp_entropy.errors import InvalidInputError, ResourceLimitError
from hmp_entropy.exact import block_entropy
from hmp_entropy.expansion import (
    BivariatePoly,
    agreement_count,
    block_entropy_series,
    conditional_series,
    critical_length,
    free_element,
    orbit_representatives,
    verify_conjecture,
    z_polynomial,
)
from hmp_entropy.loglinear import LogLinearExpr, loglinear_eval
from hmp_entropy.model import ProcessParams
from hmp_entropy.poly import ONE_MINUS_P, P, Polynomial, RationalFunction, ratfunc_equal
from hmp_entropy.series import DEFAULT_TABLE, coefficient
from hmp_entropy.series import free_element as table_free_element


def exact_q(R, p: Fraction, eps: Fraction) -> Fraction:
    """Q(R) at rational (p, eps) by summing over hidden sequences in exact arithmetic."""
    total = Fraction(0)
    for S in itertools.product((1, -1), repeat=len(R)):
        w = Fraction(1, 2)
        for a, b in zip(S, S[1:]):
            w *= (1 - p) if a == b else p
        for s, r in zip(S, R):
            w *= (1 - eps) if s == r else eps
        total += w
    return total


def same_expr(a: LogLinearExpr, b: LogLinearExpr) -> bool:
    return all(ratfunc_equal(x, y) for x, y in zip(a.coefficients, b.coefficients))


def markov_block_entropy(n: int) -> LogLinearExpr:
    # ln 2 + (n - 1) h_b(p)
    return LogLinearExpr(
        c_logp=RationalFunction(P * -(n - 1)),
        c_log1mp=RationalFunction(ONE_MINUS_P * -(n - 1)),
        c_log2=RationalFunction(1),
    )


# --- Z(R) as a bivariate polynomial ------------------------------------------------


@pytest.mark.parametrize("n", range(1, 7))
def test_total_probability_is_exactly_one(n):
    total = BivariatePoly()
    for R in itertools.product((1, -1), repeat=n):
        total = total + z_polynomial(R)
    assert total == 1


def test_two_site_leading_slice():
    z = z_polynomial((1, 1))
    assert z.eps_slice(0) == Polynomial((Fraction(1, 2), Fraction(-1, 2)))


@pytest.mark.parametrize("n", range(1, 7))
def test_degree_bounds_and_leading_monomial(n):
    for R in itertools.product((1, -1), repeat=n):
        z = z_polynomial(R)
        assert z.eps_degree <= n
        assert z.p_degree <= n - 1
        a = agreement_count(R)
        assert z.eps_slice(0) == ONE_MINUS_P**a * P ** (n - 1 - a) * Fraction(1, 2)


def test_polynomial_matches_exact_enumeration():
    points = [(Fraction(3, 10), Fraction(1, 10)), (Fraction(1, 7), Fraction(2, 9))]
    for R in [(1, -1, -1, 1), (1, 1, 1, -1, 1), (-1, 1, -1, 1, 1, -1)]:
        z = z_polynomial(R)
        for p, eps in points:
            assert z(p, eps) == exact_q(R, p, eps)


def test_z_polynomial_cap():
    with pytest.raises(ResourceLimitError):
        z_polynomial((1,) * 9)
    assert z_polynomial((1,) * 9, max_n=9).eps_slice(0) == ONE_MINUS_P**8 * Fraction(1, 2)
    with pytest.raises(InvalidInputError):
        z_polynomial((1, 0))


# --- orbit reduction and the two expansion routes ---------------------------------


@pytest.mark.parametrize("n", range(1, 9))
def test_orbit_weights_cover_all_sequences(n):
    assert sum(w for _, w in orbit_representatives(n)) == 2**n


@pytest.mark.parametrize("n", [4, 5])
def test_symmetry_reduction_is_exact(n):
    assert block_entropy_series(n, 6) == block_entropy_series(n, 6, use_symmetry=False)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_fast_route_matches_direct_series_route(n):
    fast = block_entropy_series(n, 4)
    direct = block_entropy_series(n, 4, method="direct", use_symmetry=False)
    assert all(same_expr(a, b) for a, b in zip(fast, direct))


def test_block_series_caps():
    with pytest.raises(ResourceLimitError):
        block_entropy_series(9, 2)
    with pytest.raises(ResourceLimitError):
        block_entropy_series(3, 12)
    with pytest.raises(InvalidInputError):
        block_entropy_series(3, 2, method="other")


# --- expansion coefficients -------------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 8))
def test_order_zero_is_markov_block_entropy(n):
    h0 = block_entropy_series(n, 0)[0]
    assert same_expr(h0, markov_block_entropy(n))
    assert loglinear_eval(h0, 0.3) == pytest.approx(block_entropy(n, ProcessParams(0.3, 0.0)), rel=1e-13)


def test_second_order_of_c3_is_closed_form():
    c3 = conditional_series(3, 2)
    assert same_expr(c3[2], DEFAULT_TABLE.expr(2))
    assert loglinear_eval(c3[2], 0.3) == pytest.approx(-2.4918972, abs=1e-6)


@pytest.mark.parametrize("n", range(2, 7))
def test_low_orders_of_conditional_series(n):
    c = conditional_series(n, 2)
    assert same_expr(c[0], DEFAULT_TABLE.expr(0))
    assert same_expr(c[1], DEFAULT_TABLE.expr(1))
    if n >= 3:
        assert same_expr(c[2], DEFAULT_TABLE.expr(2))


def test_order_four_settles_at_four():
    c = {n: conditional_series(n, 4)[4] for n in range(2, 7)}
    assert c[3] != c[4]
    assert c[4] == c[5] == c[6]


@pytest.mark.parametrize("n", range(2, 7))
def test_truncation_error_is_next_order(n):
    p, eps = 0.3, 0.01
    exact = block_entropy(n, ProcessParams(p, eps))
    coeffs = [loglinear_eval(c, p) for c in block_entropy_series(n, 6)]
    for k in range(5):
        partial = math.fsum(c * eps**i for i, c in enumerate(coeffs[: k + 1]))
        tail = math.fsum(c * eps**i for i, c in enumerate(coeffs) if i > k)
        # the remaining error is the dropped tail; its leading term sets the scale
        assert abs(exact - partial - tail) < 1e-13 + 0.2 * abs(coeffs[k + 1]) * eps ** (k + 1)
        assert abs(exact - partial) < 2 * abs(coeffs[k + 1]) * eps ** (k + 1) + 1e-13


# --- settling and the table ---------------------------------------------------------------


def test_critical_length():
    assert [critical_length(k) for k in range(2, 12)] == [3, 3, 4, 4, 5, 5, 6, 6, 7, 7]


def test_verify_small_run_and_json():
    report = verify_conjecture(5, 5)
    assert report.ok
    data = json.loads(json.dumps(report.to_json()))
    rec = {r["k"]: r for r in data["orders"]}
    assert rec[5]["settling_n"] == 4
    assert rec[3]["table_match"] is True and rec[3]["is_pure_rational"] is True
    assert rec[2]["is_pure_rational"] is False
    assert set(rec[4]["settled_value"]) == {"c_const", "c_logp", "c_log1mp", "c_log2"}
    for value in rec[4]["settled_value"]["c_const"]["num"]:
        Fraction(value)  # decimal-string rationals


def test_verify_detects_corrupted_table():
    data = DEFAULT_TABLE.to_json()
    data["high"]["4"]["num"][0] += 1
    corrupted = type(DEFAULT_TABLE).from_json(data)
    report = verify_conjecture(5, 5, corrupted)
    assert not report.ok
    assert [r.k for r in report.orders if r.table_match is False] == [4]


def test_verify_needs_observable_settling():
    with pytest.raises(InvalidInputError):
        verify_conjecture(7, 5)


@pytest.mark.parametrize("k", [3, 4, 11])
def test_free_element_magnitude(k):
    value = free_element(k)
    assert abs(value) == Fraction(1, k * (k - 1))
    assert value == table_free_element(DEFAULT_TABLE.high[k])


def test_settled_orders_are_pure_rational():
    for k in range(3, 8):
        assert conditional_series(critical_length(k), k)[k].is_rational()
    for k in range(3):
        assert not conditional_series(3, k)[k].is_rational()


def test_settled_values_match_float_table():
    for k in range(3, 8):
        settled = conditional_series(critical_length(k), k)[k]
        assert loglinear_eval(settled, 0.23) == pytest.approx(coefficient(k, 0.23), rel=1e-10)
