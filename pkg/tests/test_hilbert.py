"""
Tests for Hilbert series and plurigenera of format families.
"""

import pytest

from app.utils.catalog import WORKED_FAMILIES, worked
from app.utils.formats import ci_family, gr_family, segre_family
from app.utils.hilbert import (
    compute_family_series, h0_vector, hilbert_series, series_gr, series_p2p2, vanishing_depth,
)
from app.utils.series import IntPolynomial


class TestFormatSeries:
    """Test numerators of the unweighted formats."""

    def test_grassmannian_numerator(self):
        """Test Gr(2,5) in P^9 has numerator 1 - 5t^2 + 5t^3 - t^5."""
        family = gr_family(('1/2',) * 5, (1,) * 8)
        assert series_gr(family).numerator == IntPolynomial({0: 1, 2: -5, 3: 5, 5: -1})

    def test_segre_numerator(self):
        """Test P2 x P2 in P^8 has numerator 1 - 9t^2 + 16t^3 - 9t^4 + t^6."""
        family = segre_family((0, 0, 0), (1, 1, 1), (1,) * 9)
        assert series_p2p2(family).numerator == IntPolynomial({0: 1, 2: -9, 3: 16, 4: -9, 6: 1})

    def test_ci_numerator(self, x36_40):
        hs = hilbert_series(x36_40)
        assert hs.numerator == IntPolynomial.product_one_minus((36, 40))
        assert hs.denominator_exponents == (5, 5, 7, 8, 9, 12, 31)

    def test_series_mismatch(self, x36_40):
        with pytest.raises(ValueError):
            series_gr(x36_40)


class TestPlurigenera:
    """Test h0(-lK) of the worked families."""

    def test_ci2_extreme(self, x36_40):
        assert h0_vector(x36_40, 4) == [0, 0, 0, 0]
        assert h0_vector(x36_40, 5) == [0, 0, 0, 0, 2]
        assert compute_family_series(x36_40, 4).vanishing_depth == 5

    def test_ci3_extreme(self, x16_18_20):
        series = compute_family_series(x16_18_20, 4)
        assert series.h0 == [0, 0, 0, 1]
        assert series.vanishing_depth == 4

    def test_worked_first_plurigenus(self):
        for example in WORKED_FAMILIES:
            series = compute_family_series(example.family, 1)
            assert series.h0[:1] == example.h0[:1], example.name

    def test_k2_families(self):
        assert compute_family_series(worked('gr25-k2').family, 1).h0 == [3]
        assert compute_family_series(worked('p2p2-k2').family, 1).h0 == [4]

    def test_numerator_degree_is_socle(self):
        series = compute_family_series(worked('p2p2-empty').family, 2)
        assert series.hs.numerator.degree == 42

    def test_vanishing_depth(self):
        assert vanishing_depth([0, 0, 1]) == 3
        assert vanishing_depth([0, 0, 0]) == 4
        assert vanishing_depth([2]) == 1

    def test_to_dict(self):
        data = compute_family_series(ci_family((2, 2), (1,) * 7), 2).to_dict()
        assert data['numerator'] == "1 - 2t^2 + t^4"
        assert data['h0'] == [7, 26]
