from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nucache.delivery import delivery_rate
from nucache.rates import (
    as_fraction,
    direct_expectation,
    expected_rate,
    frac_pair_rates,
    pair_rates,
    pair_order,
    uniform_pair_rate,
)


def test_as_fraction_is_decimal_exact():
    assert as_fraction(0.8) == Fraction(4, 5)
    assert as_fraction("0.85") == Fraction(17, 20)
    assert as_fraction("3/4") == Fraction(3, 4)


def test_pair_rate_examples():
    assert pair_rates(4, 2, 1) == (1, Fraction(11, 12))
    assert pair_rates(4, 2, 2) == (Fraction(2, 3), Fraction(2, 3))
    assert pair_rates(5, 5, 5) == (0, 0)


def test_pair_order_examples():
    assert pair_order(4, 2, 1) == (True, Fraction(1, 12))
    first, gap = pair_order(4, 3, 2)
    assert not first and gap < 0
    assert pair_order(6, 4, 2) == (True, 0)
    with pytest.raises(ValueError):
        pair_order(4, 2, 2)


@pytest.mark.parametrize("K", range(2, 13))
def test_pair_order_agrees_with_pair_rates(K):
    for r1 in range(K + 1):
        for r2 in range(r1):
            R1, R2 = pair_rates(K, r1, r2)
            first, gap = pair_order(K, r1, r2)
            assert R1 - R2 == gap
            assert (R1 >= R2) == first


@pytest.mark.parametrize("K", range(1, 13))
def test_uniform_specialization(K):
    for r in range(K + 1):
        assert max(pair_rates(K, r, r)) == uniform_pair_rate(K, r)


def test_expected_rate_spot_value():
    v = expected_rate(4, 0.8, 2, 1)
    assert v == Fraction(1987, 2500)
    assert float(v) == pytest.approx(0.7948, abs=1e-12)
    assert expected_rate(4, 0.8, 4, 4) == 0


@pytest.mark.parametrize("K", range(1, 8))
def test_integer_points_match_direct_expectation(K):
    for p1 in ("0.5", "0.7", "0.93"):
        for r1 in range(K + 1):
            for r2 in range(r1 + 1):
                assert expected_rate(K, p1, r1, r2) == direct_expectation(K, p1, r1, r2)
                q1 = Fraction(p1) ** K
                q2 = (1 - Fraction(p1)) ** K
                by_class = (
                    q1 * delivery_rate(K, r1, r2, {1})
                    + q2 * delivery_rate(K, r1, r2, {2})
                    + (1 - q1 - q2) * delivery_rate(K, r1, r2, {1, 2})
                )
                assert expected_rate(K, p1, r1, r2) == by_class


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2 * 40), st.sampled_from(["0.5", "0.75", "0.9"]))
def test_line_restriction_is_convex(K, m40, p1):
    # second differences along t1 + t2 = K M on a fine grid are non-negative
    M = Fraction(m40, 40)
    total = K * M
    lo, hi = total / 2, min(Fraction(K), total)
    if hi - lo == 0:
        return
    n = 48
    xs = [lo + (hi - lo) * k / n for k in range(n + 1)]
    ys = [expected_rate(K, p1, x, total - x) for x in xs]
    assert all(ys[k - 1] - 2 * ys[k] + ys[k + 1] >= 0 for k in range(1, n))


def test_frac_pair_rates_interpolate():
    R = frac_pair_rates(4, Fraction(5, 2), Fraction(1, 2))
    a = pair_rates(4, 2, 0), pair_rates(4, 3, 0), pair_rates(4, 2, 1), pair_rates(4, 3, 1)
    assert R[0] == sum(x[0] for x in a) / 4
    with pytest.raises(ValueError):
        frac_pair_rates(4, 1, 2)
