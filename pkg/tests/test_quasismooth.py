"""
Tests for quasismoothness certificates.
"""

import pytest

from app.utils.catalog import SEGRE_MODEL, worked
from app.utils.cas import Budget, load_model
from app.utils.formats import ci_family
from app.utils.quasismooth import (
    INCONCLUSIVE, METHOD_COMBINATORIAL, REFUTED, VERIFIED, QsCertificate,
    ci_coverage_holds, ci_quasismooth_general, coordinate_witness, verify_quasismooth, verify_system,
)

SINGULAR_CI = """
format CI
variables x0:1 x1:1 x2:1 x3:1 x4:1 x5:1 x6:1
equations
x0*x1
x2*x3
"""

# misses every coordinate point, singular at (1:1:0:0:0:0:0)
CONE_CI = """
format CI
variables x0:1 x1:1 x2:1 x3:1 x4:1 x5:1 x6:1
equations
x0*x2 - x1*x2 + x3^2 + x4^2 + x5^2 + x6^2
x0^2 - x1^2 + x2^2 + x3^2 + x4^2 + x5^2 + x6^2
"""


def segre_model(zero_entry: bool = False):
    with open(SEGRE_MODEL, 'r', encoding='utf-8') as f:
        text = f.read()
    if zero_entry:
        text = text.replace('x21 f6  x23', 'x21 0 x23')
    return load_model(text)


class TestCertificate:
    """Test certificate invariants."""

    def test_refuted_needs_witness(self):
        with pytest.raises(ValueError):
            QsCertificate(status=REFUTED, method='strata-check')

    def test_unknown_status(self):
        with pytest.raises(ValueError):
            QsCertificate(status='MAYBE', method='strata-check')

    def test_to_dict(self):
        data = QsCertificate(status=VERIFIED, method=METHOD_COMBINATORIAL).to_dict()
        assert data['status'] == VERIFIED
        assert data['witness'] is None


class TestStageOne:
    """Test refutation at coordinate points."""

    def test_singular_ci_refuted(self):
        system = load_model(SINGULAR_CI)
        witness = coordinate_witness(system)
        assert witness is not None
        assert witness['rank'] < witness['codim']
        assert verify_system(system, mode='strata').status == REFUTED

    def test_segre_model_with_zero_entry_refuted(self):
        """Test the explicit model with its f6 entry set to 0 is singular at a coordinate point."""
        system = segre_model(zero_entry=True)
        certificate = verify_system(system, Budget(max_seconds=120.0), mode='strata')
        assert certificate.status == REFUTED
        assert certificate.witness['stage'] == 1
        assert certificate.witness['rank'] < 4

    def test_zero_entry_witness_point(self):
        system = segre_model(zero_entry=True)
        assert coordinate_witness(system)['point'] == {'x0': 1}

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            verify_system(load_model(SINGULAR_CI), mode='off')


class TestCompleteIntersectionCoverage:
    """Test the monomial-coverage sufficient condition."""

    def test_quadrics_in_p6(self):
        family = ci_family((2, 2), (1,) * 7)
        assert ci_coverage_holds(family) == (True, None)
        certificate = ci_quasismooth_general(family)
        assert certificate.status == VERIFIED
        assert certificate.method == METHOD_COMBINATORIAL

    def test_failure_without_deferral(self):
        """Test two equations competing for one variable at the x6 vertex stay inconclusive."""
        family = ci_family((8, 8), (2, 2, 2, 2, 2, 3, 5))
        holds, support = ci_coverage_holds(family)
        assert not holds
        assert support is not None
        certificate = ci_quasismooth_general(family, defer=False)
        assert certificate.status == INCONCLUSIVE

    def test_rejects_other_formats(self):
        with pytest.raises(ValueError):
            ci_quasismooth_general(worked('p2p2-empty').family)


class TestFullCertificate:
    """Test the singular-locus computation on small members."""

    @pytest.mark.slow
    def test_general_quadrics_verified(self):
        certificate = verify_quasismooth(ci_family((2, 2), (1,) * 7), seed=5)
        assert certificate.status == VERIFIED

    def test_four_quadrics_verified(self):
        certificate = ci_quasismooth_general(ci_family((2, 2, 2, 2), (1,) * 9))
        assert certificate.status == VERIFIED
        assert certificate.method == METHOD_COMBINATORIAL

    @pytest.mark.slow
    def test_segre_model_verified(self):
        certificate = verify_system(segre_model(), Budget(max_seconds=300.0))
        assert certificate.status == VERIFIED, certificate.reason
        charts = [e for e in certificate.evidence if 'chart' in e]
        assert len(charts) == 9
        assert all(e['clean'] for e in charts)

    def test_zero_entry_refuted_in_full_mode(self):
        certificate = verify_system(segre_model(zero_entry=True), Budget(max_seconds=300.0))
        assert certificate.status == REFUTED
        assert certificate.witness['point'] == {'x0': 1}
        assert certificate.witness['stage'] == 1

    def test_singular_ci_refuted_by_charts(self):
        """Test a singular point off the coordinate points is found on the charts."""
        system = load_model(CONE_CI)
        assert coordinate_witness(system) is None
        certificate = verify_system(system, Budget(max_seconds=120.0))
        assert certificate.status == REFUTED
        assert certificate.witness['stage'] == 2
