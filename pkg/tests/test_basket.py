"""
Tests for baskets of general members.
"""

import pytest

from app.utils.basket import (
    AmbiguousMatching, _max_matching, basket_for, ci_basket_fastpath, compute_basket, hall_surplus,
    strata_of, torus_locus,
)
from app.utils.catalog import worked
from app.utils.cas import Budget, NotZeroDimensional
from app.utils.formats import ci_family
from app.utils.orbifold import Basket
from app.utils.search import enumerate_ci


class TestStrata:
    """Test the singular strata of a weighted projective space."""

    def test_strata_of(self):
        strata = {s.r: s.indices for s in strata_of((2, 4, 6, 7))}
        assert strata == {2: (0, 1, 2), 3: (2,), 4: (1,), 6: (2,), 7: (3,)}

    def test_no_strata(self):
        assert strata_of((1, 1, 1)) == []


class TestMatching:
    """Test Hall's condition with surplus."""

    def test_hall_holds(self):
        assert hall_surplus({0: [1, 2], 1: [2]}, 0)

    def test_hall_fails(self):
        assert not hall_surplus({0: [1], 1: [1]}, 0)

    def test_surplus(self):
        assert hall_surplus({0: [1, 2]}, 1)
        assert not hall_surplus({0: [1]}, 1)

    def test_no_rows(self):
        assert hall_surplus({}, 3)

    def test_max_matching(self):
        assert _max_matching({0: [4, 5], 1: [5], 2: [5]}) == 2
        assert _max_matching({0: [7], 1: [8]}) == 2
        assert _max_matching({0: []}) == 0
        assert _max_matching({}) == 0

    def test_torus_locus_of_plane(self):
        """Two quadrics meet the torus of P^2 in finitely many points."""
        assert torus_locus((1, 1, 1), (2, 2), (0, 1, 2)).dimension == 0
        assert torus_locus((1, 1, 1), (2, 2), (0, 1)).dimension is None


class TestFastPath:
    """Test the combinatorial basket of general complete intersections."""

    def test_ci2_extreme(self, x36_40):
        report = ci_basket_fastpath(x36_40)
        assert report.basket == Basket.parse(worked('ci2-extreme').basket)
        assert report.method == 'fastpath'
        assert report.terminal
        assert report.consistent

    def test_ci3_extreme(self, x16_18_20):
        report = ci_basket_fastpath(x16_18_20)
        assert report.basket == Basket.parse(worked('ci3-extreme').basket)
        assert report.isolated

    def test_single_point(self):
        report = ci_basket_fastpath(ci_family((4, 5), (1, 1, 1, 1, 1, 2, 3)))
        assert str(report.basket) == "{1/3(1,1,1,1)}"

    def test_smooth_member(self):
        report = ci_basket_fastpath(ci_family((4, 4), (1, 1, 1, 1, 1, 2, 2)))
        assert report.basket.is_empty()

    def test_positive_dimensional_stratum(self):
        """Test a positive-dimensional locus of 1/2 points is reported, not counted."""
        with pytest.raises(NotZeroDimensional):
            ci_basket_fastpath(ci_family((3, 4), (1, 1, 1, 2, 2, 2, 2)))

    def test_rejects_other_formats(self):
        with pytest.raises(ValueError):
            ci_basket_fastpath(worked('gr25-k2').family)


class TestComputeBasket:
    """Test the Groebner path against the fast path."""

    def test_cas_matches_fastpath(self):
        family = ci_family((4, 5), (1, 1, 1, 1, 1, 2, 3))
        report = compute_basket(family, seed=11)
        assert report.method == 'cas'
        assert report.basket == ci_basket_fastpath(family).basket
        assert report.to_dict()['basket'] == "{1/3(1,1,1,1)}"

    def test_dispatch_prefers_fastpath(self, x36_40):
        assert basket_for(x36_40, seed=1).method == 'fastpath'

    @pytest.mark.slow
    def test_gr_k2_family(self):
        example = worked('gr25-k2')
        report = basket_for(example.family, seed=1)
        assert report.basket == Basket.parse(example.basket)

    @pytest.mark.slow
    def test_segre_k2_family(self):
        example = worked('p2p2-k2')
        report = basket_for(example.family, seed=1)
        assert report.basket == Basket.parse(example.basket)


class TestWorkedBaskets:
    """Test the published baskets of the worked empty families."""

    def test_gr_empty_family(self):
        example = worked('gr25-empty')
        report = basket_for(example.family, seed=1)
        assert report.method == 'cas'
        assert report.basket == Basket.parse(example.basket)
        assert report.terminal

    def test_segre_empty_family(self):
        example = worked('p2p2-empty')
        report = compute_basket(example.family, seed=1, budget=Budget(max_seconds=10.0))
        assert report.basket == Basket.parse(example.basket)
        assert report.terminal


class TestFastPathAgreement:
    """Test the fast path against the Groebner path on a whole census range."""

    @pytest.mark.slow
    def test_up_to_weight_40(self):
        """Test every forced complete-intersection basket with W <= 40 against the Groebner path."""
        compared, mismatches = 0, []
        for codim in (2, 3, 4):
            for family in enumerate_ci(codim, 40):
                try:
                    fast = ci_basket_fastpath(family)
                except (AmbiguousMatching, NotZeroDimensional):
                    continue
                cas = compute_basket(family, seed=1)
                compared += 1
                if cas.basket != fast.basket:
                    mismatches.append((str(family), str(fast.basket), str(cas.basket)))
        assert compared > 0
        assert mismatches == []
