"""
Hilbert series and plurigenera of format families.

Since -K_X = O(1) for index-1 families, h0(-lK_X) is read off as the
coefficient of t^l in the Hilbert series of the anticanonical ring.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List

from .formats import (
    FORMAT_CI, FORMAT_GR, FORMAT_P2P2, FormatFamily, SegreDescriptor,
    canonical_degree, format_weights, socle_degree,
)
from .series import (
    HilbertSeries, IntPolynomial, SeriesError, TruncatedSeries,
    expand, is_gorenstein_symmetric, numerator_from_series,
)

logger = logging.getLogger(__name__)


@dataclass
class FamilySeries:
    """Hilbert series of a family and its first L plurigenera."""
    family: FormatFamily
    hs: HilbertSeries
    h0: List[int] = field(default_factory=list)

    @property
    def vanishing_depth(self) -> int:
        return vanishing_depth(self.h0)

    def to_dict(self) -> Dict:
        return {
            'numerator': str(self.hs.numerator),
            'denominator': list(self.hs.denominator_exponents),
            'h0': list(self.h0),
        }


def series_ci(family: FormatFamily) -> HilbertSeries:
    if family.kind != FORMAT_CI:
        raise ValueError(f"series_ci called on {family.kind} family")
    return HilbertSeries(IntPolynomial.product_one_minus(family.descriptor.degrees),
                         family.ambient.weights)


def series_gr(family: FormatFamily) -> HilbertSeries:
    """Numerator 1 - sum t^(sigma - c_k) + sum t^(sigma + c_k) - t^(2 sigma)."""
    if family.kind != FORMAT_GR:
        raise ValueError(f"series_gr called on {family.kind} family")
    d = family.descriptor
    terms: Counter = Counter({0: 1})
    for ck in d.c2:
        terms[(d.sigma2 - ck) // 2] -= 1
        terms[(d.sigma2 + ck) // 2] += 1
    terms[d.sigma2] -= 1
    return HilbertSeries(IntPolynomial(dict(terms)), family.ambient.weights)


def _simplex_degrees(doubled: tuple, n: int, bound: int) -> Counter:
    """Doubled degrees sum(alpha_i * doubled_i) over |alpha| = n, kept up to bound."""
    out: Counter = Counter()
    u, v, w = doubled
    for i in range(n + 1):
        for j in range(n + 1 - i):
            e = i * u + j * v + (n - i - j) * w
            if e <= bound:
                out[e] += 1
    return out


def segre_format_series(descriptor: SegreDescriptor, order: int) -> TruncatedSeries:
    """
    Hilbert series of the weighted Segre cone, summed directly.

    The bidegree (n, n) part contributes A_n(t) * B_n(t); all degrees are
    handled doubled and halved at the end.
    """
    a2, b2 = descriptor.a2, descriptor.b2
    bound2 = 2 * order
    step = a2[0] + b2[0]  # doubled weight of the lightest coordinate
    coefficients = [0] * (order + 1)
    n = 0
    while n * step <= bound2:
        a_part = _simplex_degrees(a2, n, bound2 - n * b2[0])
        b_part = _simplex_degrees(b2, n, bound2 - n * a2[0])
        for ea, ca in a_part.items():
            for eb, cb in b_part.items():
                e = ea + eb
                if e <= bound2:
                    coefficients[e // 2] += ca * cb
        n += 1
    return TruncatedSeries(coefficients)


def series_p2p2(family: FormatFamily) -> HilbertSeries:
    """
    Series of a weighted Segre pullback.

    Raises:
        NotPolynomial: the numerator extraction does not terminate
    """
    if family.kind != FORMAT_P2P2:
        raise ValueError(f"series_p2p2 called on {family.kind} family")
    d = family.descriptor
    weights = format_weights(d)
    socle = socle_degree(d)
    direct = segre_format_series(d, socle + max(weights))
    numerator = numerator_from_series(direct, weights, socle)
    return HilbertSeries(numerator, family.ambient.weights)


def hilbert_series(family: FormatFamily) -> HilbertSeries:
    if family.kind == FORMAT_CI:
        return series_ci(family)
    if family.kind == FORMAT_GR:
        return series_gr(family)
    if family.kind == FORMAT_P2P2:
        return series_p2p2(family)
    raise ValueError(f"unknown format {family.kind}")


def h0_vector(family: FormatFamily, L: int) -> List[int]:
    """h0(-lK_X) for l = 1..L."""
    series = expand(hilbert_series(family), L)
    return series.coefficients[1:L + 1]


def vanishing_depth(h0: List[int]) -> int:
    """Largest m with h0(-lK) = 0 for 1 <= l < m (m = L + 1 if all vanish)."""
    m = 1
    for value in h0:
        if value:
            break
        m += 1
    return m


def compute_family_series(family: FormatFamily, L: int) -> FamilySeries:
    """
    Series plus plurigenera, with the Gorenstein checks applied.

    Raises:
        SeriesError: the numerator has the wrong degree or is not symmetric
    """
    hs = hilbert_series(family)
    socle = socle_degree(family.descriptor)
    if hs.numerator.degree != socle:
        raise SeriesError(f"numerator degree {hs.numerator.degree} differs from socle {socle}")
    if not is_gorenstein_symmetric(hs.numerator, socle):
        raise SeriesError(f"numerator {hs.numerator} is not Gorenstein symmetric")
    if canonical_degree(family) != -1:
        logger.debug(f"{family}: canonical degree {canonical_degree(family)}, h0 is not -lK")
    h0 = expand(hs, L).coefficients[1:L + 1]
    return FamilySeries(family=family, hs=hs, h0=h0)
