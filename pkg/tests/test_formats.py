"""
Tests for format descriptors and regular pullbacks.
"""

import pytest

from app.utils.catalog import worked
from app.utils.formats import (
    AmbientSizeMismatch, GrDescriptor, LinearCone, MissingForm, NonIntegralWeight, SegreDescriptor,
    canonical_degree, ci_family, describe, equation_degrees, family_key, format_weights,
    monomial_exists, parse_family, segre_family, socle_degree, validate_pullback, wellformed_weights,
)


class TestGrassmannianFormat:
    """Test wGr(2,5) weights and degrees."""

    def test_weights_and_degrees(self):
        d = GrDescriptor.from_halves(('-1/2', '7/2', '11/2', '17/2', '37/2'))
        assert format_weights(d) == (3, 5, 8, 9, 12, 14, 18, 22, 24, 27)
        assert socle_degree(d) == 71
        assert equation_degrees(d) == (36, 32, 30, 27, 17)

    def test_mixed_parity_is_not_integral(self):
        d = GrDescriptor((1, 2, 3, 5, 7))
        with pytest.raises(NonIntegralWeight):
            format_weights(d)

    def test_pairwise_sums_positive(self):
        with pytest.raises(ValueError):
            GrDescriptor((-3, 1, 1, 1, 1))


class TestSegreFormat:
    """Test weighted P2 x P2."""

    def test_weights(self):
        d = SegreDescriptor.from_halves((0, 1, 2), (3, 5, 10))
        assert format_weights(d) == (3, 4, 5, 5, 6, 7, 10, 11, 12)
        assert socle_degree(d) == 42
        assert len(equation_degrees(d)) == 9

    def test_canonical_representative(self):
        """Test shifted and swapped descriptors collapse to one class."""
        expected = SegreDescriptor.from_halves((0, 1, 2), (3, 5, 10))
        assert SegreDescriptor.from_halves((3, 5, 10), (0, 1, 2)).canonical() == expected
        assert SegreDescriptor.from_halves((1, 2, 3), (2, 4, 9)).canonical() == expected


class TestPullbacks:
    """Test validation of ambient weights against a format."""

    def test_grassmannian_extreme(self):
        """Test coincident, general and unused weights of the empty-|-K| family."""
        family = worked('gr25-empty').family
        report = validate_pullback(family)
        assert report.valid
        assert report.coincident == (3, 5, 8, 9, 27)
        assert report.general == (12, 14, 18, 22, 24)
        assert report.unused_ambient == (2, 7, 11)
        assert canonical_degree(family) == -1

    def test_segre_extreme(self):
        family = worked('p2p2-empty').family
        report = validate_pullback(family)
        assert report.general == (6, 10, 12)
        assert report.unused_ambient == (2, 3, 3)
        assert canonical_degree(family) == -1

    def test_ci_extreme(self, x36_40):
        assert validate_pullback(x36_40).general == (36, 40)
        assert canonical_degree(x36_40) == -1

    def test_linear_cone(self):
        with pytest.raises(LinearCone):
            validate_pullback(ci_family((3, 4), (1, 1, 1, 1, 1, 1, 3)))

    def test_missing_form(self):
        with pytest.raises(MissingForm):
            validate_pullback(ci_family((7, 8), (2, 2, 2, 2, 4, 4, 4)))

    def test_ambient_size(self):
        with pytest.raises(AmbientSizeMismatch):
            ci_family((2, 2), (1, 1, 1))

    def test_monomial_exists(self):
        assert monomial_exists((5, 7), 12)
        assert not monomial_exists((5, 7), 13)
        assert monomial_exists((5, 7), 0)


class TestWellformed:

    def test_wellformed(self):
        assert wellformed_weights((5, 5, 7, 8, 9, 12, 31))

    def test_not_wellformed(self):
        assert not wellformed_weights((1, 2, 2, 2))


class TestDescriptors:
    """Test textual family descriptors."""

    def test_describe_ci(self, x36_40):
        assert describe(x36_40) == "CI c=2 d=[36,40] w=[5,5,7,8,9,12,31]"

    def test_describe_half_integers(self):
        text = describe(worked('gr25-empty').family)
        assert text == "GR c=[-1/2,7/2,11/2,17/2,37/2] w=[2,3,5,7,8,9,11,27]"

    def test_parse_inverts_describe(self):
        for name in ('ci3-extreme', 'gr25-empty', 'p2p2-empty', 'p2p2-k2'):
            family = worked(name).family
            assert parse_family(describe(family)) == family

    def test_key_ignores_segre_orientation(self):
        weights = (2, 3, 3, 3, 4, 5, 5, 7, 11)
        assert family_key(segre_family((3, 5, 10), (0, 1, 2), weights)) == \
            family_key(segre_family((0, 1, 2), (3, 5, 10), weights))

    def test_codimension_mismatch(self):
        with pytest.raises(ValueError):
            parse_family("CI c=3 d=[36,40] w=[5,5,7,8,9,12,31]")

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            parse_family("XX w=[1,2]")
