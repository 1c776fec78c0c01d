"""
Tests for exact series arithmetic.
"""

import pytest

from app.utils.series import (
    HilbertSeries, IntPolynomial, NotPolynomial, TruncatedSeries,
    expand, is_gorenstein_symmetric, numerator_from_series,
)


class TestIntPolynomial:
    """Test the sparse integer polynomial."""

    def test_product_one_minus(self):
        """Test prod (1 - t^e) expands and renders."""
        p = IntPolynomial.product_one_minus([1, 2])
        assert p.to_list() == [1, -1, -1, 1]
        assert str(p) == "1 - t - t^2 + t^3"

    def test_multiplication(self):
        """Test (1 - t)(1 + t) = 1 - t^2."""
        p = IntPolynomial.from_list([1, -1]) * IntPolynomial.from_list([1, 1])
        assert p == IntPolynomial({0: 1, 2: -1})

    def test_zero_polynomial(self):
        """Test that zero coefficients are dropped."""
        p = IntPolynomial.from_list([0, 0])
        assert p.is_zero()
        assert p.degree == -1
        assert str(p) == "0"

    def test_negative_exponent_rejected(self):
        with pytest.raises(ValueError):
            IntPolynomial({-1: 1})


class TestTruncatedSeries:
    """Test truncated power series."""

    def test_coefficient_beyond_order(self):
        """Test that reading past the truncation raises."""
        series = TruncatedSeries([1, 2, 3])
        assert series.order == 2
        with pytest.raises(IndexError):
            series.coefficient(5)

    def test_product_truncates_to_shorter(self):
        s = TruncatedSeries([1, 1, 1, 1]) * TruncatedSeries([1, -1, 0])
        assert s.coefficients == [1, 0, 0]


class TestExpansion:
    """Test expansion and numerator recovery."""

    def test_expand_projective_line(self):
        """Test 1 / (1 - t)^2 counts monomials in two variables."""
        hs = HilbertSeries(IntPolynomial.one(), (1, 1))
        assert expand(hs, 4).coefficients == [1, 2, 3, 4, 5]

    def test_numerator_recovered(self):
        """Test the numerator of a conic is recovered from its series."""
        hs = HilbertSeries(IntPolynomial.from_list([1, 0, -1]), (1, 1))
        series = expand(hs, 6)
        assert series.coefficients == [1, 2, 2, 2, 2, 2, 2]
        assert numerator_from_series(series, (1, 1), 2).to_list() == [1, 0, -1]

    def test_not_polynomial(self):
        """Test a series that does not terminate is reported with its degree."""
        series = TruncatedSeries([1] * 6)
        with pytest.raises(NotPolynomial) as info:
            numerator_from_series(series, (), 2)
        assert info.value.offending_degree == 3

    def test_series_too_short(self):
        with pytest.raises(ValueError):
            numerator_from_series(TruncatedSeries([1, 1]), (1,), 2)

    def test_denominator_exponents_sorted(self):
        hs = HilbertSeries(IntPolynomial.one(), (5, 1, 3))
        assert hs.denominator_exponents == (1, 3, 5)

    def test_nonpositive_exponent_rejected(self):
        with pytest.raises(ValueError):
            HilbertSeries(IntPolynomial.one(), (0, 1))


class TestGorenstein:
    """Test the palindromic numerator check."""

    def test_antisymmetric_numerator(self):
        assert is_gorenstein_symmetric(IntPolynomial.from_list([1, 0, -1]), 2)

    def test_symmetric_numerator(self):
        assert is_gorenstein_symmetric(IntPolynomial.product_one_minus([2, 3]), 5)

    def test_not_symmetric(self):
        assert not is_gorenstein_symmetric(IntPolynomial.from_list([1, 1]), 2)

    def test_degree_above_socle(self):
        assert not is_gorenstein_symmetric(IntPolynomial.from_list([1, 0, 0, 1]), 2)
