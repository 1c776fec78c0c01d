"""
Exact univariate series arithmetic for Hilbert-series computations.

This module provides:
- IntPolynomial: sparse integer polynomials in one variable t
- TruncatedSeries: power series known up to a fixed order
- HilbertSeries: numerator / prod(1 - t^e) with exact expansion

All arithmetic uses Python integers. Half-integer gradings are doubled
upstream, so only integer exponents appear here.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

logger = logging.getLogger(__name__)


class SeriesError(Exception):
    """Base class for series arithmetic errors."""


class NotPolynomial(SeriesError):
    """Multiplying a series by its denominator did not terminate."""

    def __init__(self, expected_degree: int, offending_degree: int, coefficient: int):
        self.expected_degree = expected_degree
        self.offending_degree = offending_degree
        self.coefficient = coefficient
        super().__init__(
            f"coefficient {coefficient} at t^{offending_degree} beyond expected degree {expected_degree}"
        )


class IntPolynomial:
    """
    Sparse polynomial with integer coefficients.

    Attributes:
        coefficients: mapping exponent -> nonzero integer coefficient
    """

    __slots__ = ('_coefficients',)

    def __init__(self, coefficients: Optional[Dict[int, int]] = None):
        clean = {}
        for exponent, value in (coefficients or {}).items():
            if exponent < 0:
                raise ValueError(f"negative exponent {exponent}")
            if value:
                clean[int(exponent)] = int(value)
        self._coefficients = clean

    @classmethod
    def from_list(cls, values: Iterable[int]) -> 'IntPolynomial':
        return cls({k: v for k, v in enumerate(values)})

    @classmethod
    def one(cls) -> 'IntPolynomial':
        return cls({0: 1})

    @classmethod
    def product_one_minus(cls, exponents: Iterable[int]) -> 'IntPolynomial':
        """Return prod_e (1 - t^e)."""
        result = cls.one()
        for e in exponents:
            result = result * cls({0: 1, e: -1})
        return result

    @property
    def coefficients(self) -> Dict[int, int]:
        return dict(self._coefficients)

    @property
    def degree(self) -> int:
        """Maximum stored exponent, -1 for the zero polynomial."""
        return max(self._coefficients) if self._coefficients else -1

    def coefficient(self, k: int) -> int:
        return self._coefficients.get(k, 0)

    def terms(self) -> List[Tuple[int, int]]:
        return sorted(self._coefficients.items())

    def to_list(self) -> List[int]:
        return [self.coefficient(k) for k in range(self.degree + 1)]

    def is_zero(self) -> bool:
        return not self._coefficients

    def __add__(self, other: 'IntPolynomial') -> 'IntPolynomial':
        out = dict(self._coefficients)
        for k, v in other._coefficients.items():
            out[k] = out.get(k, 0) + v
        return IntPolynomial(out)

    def __neg__(self) -> 'IntPolynomial':
        return IntPolynomial({k: -v for k, v in self._coefficients.items()})

    def __sub__(self, other: 'IntPolynomial') -> 'IntPolynomial':
        return self + (-other)

    def __mul__(self, other: 'IntPolynomial') -> 'IntPolynomial':
        out: Dict[int, int] = {}
        for i, a in self._coefficients.items():
            for j, b in other._coefficients.items():
                out[i + j] = out.get(i + j, 0) + a * b
        return IntPolynomial(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        return self._coefficients == other._coefficients

    def __hash__(self) -> int:
        return hash(tuple(self.terms()))

    def __repr__(self) -> str:
        return f"IntPolynomial({self})"

    def __str__(self) -> str:
        if not self._coefficients:
            return "0"
        parts = []
        for k, v in self.terms():
            sign = '-' if v < 0 else '+'
            mag = abs(v)
            if k == 0:
                body = str(mag)
            else:
                power = 't' if k == 1 else f't^{k}'
                body = power if mag == 1 else f'{mag}{power}'
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        text = ('-' if first_sign == '-' else '') + first_body
        for sign, body in parts[1:]:
            text += f' {sign} {body}'
        return text


@dataclass
class TruncatedSeries:
    """Power series known exactly for t^0 .. t^order."""
    coefficients: List[int]

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("a truncated series needs at least the constant term")
        self.coefficients = [int(c) for c in self.coefficients]

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, k: int) -> int:
        if k > self.order:
            raise IndexError(f"t^{k} is beyond truncation order {self.order}")
        return self.coefficients[k]

    def truncate(self, order: int) -> 'TruncatedSeries':
        return TruncatedSeries(self.coefficients[:order + 1])

    def __add__(self, other: 'TruncatedSeries') -> 'TruncatedSeries':
        n = min(self.order, other.order)
        return TruncatedSeries([self.coefficients[k] + other.coefficients[k] for k in range(n + 1)])

    def __sub__(self, other: 'TruncatedSeries') -> 'TruncatedSeries':
        n = min(self.order, other.order)
        return TruncatedSeries([self.coefficients[k] - other.coefficients[k] for k in range(n + 1)])

    def __mul__(self, other: 'TruncatedSeries') -> 'TruncatedSeries':
        n = min(self.order, other.order)
        out = [0] * (n + 1)
        for i, a in enumerate(self.coefficients[:n + 1]):
            if not a:
                continue
            for j in range(n + 1 - i):
                out[i + j] += a * other.coefficients[j]
        return TruncatedSeries(out)


@dataclass(frozen=True)
class HilbertSeries:
    """numerator(t) / prod_{e in denominator_exponents} (1 - t^e)."""
    numerator: IntPolynomial
    denominator_exponents: Tuple[int, ...]

    def __post_init__(self):
        exps = tuple(sorted(int(e) for e in self.denominator_exponents))
        if any(e < 1 for e in exps):
            raise ValueError(f"denominator exponents must be positive: {exps}")
        object.__setattr__(self, 'denominator_exponents', exps)

    def to_dict(self) -> Dict:
        return {
            'numerator': [[k, v] for k, v in self.numerator.terms()],
            'denominator': list(self.denominator_exponents),
        }


def divide_one_minus(coefficients: List[int], e: int) -> None:
    """In place: multiply a truncated list by 1/(1 - t^e)."""
    for k in range(e, len(coefficients)):
        coefficients[k] += coefficients[k - e]


def multiply_one_minus(coefficients: List[int], e: int) -> None:
    """In place: multiply a truncated list by (1 - t^e)."""
    for k in range(len(coefficients) - 1, e - 1, -1):
        coefficients[k] -= coefficients[k - e]


def expand(hs: HilbertSeries, order: int) -> TruncatedSeries:
    """
    Expand a Hilbert series to t^order.

    Args:
        hs: the rational series
        order: last exponent to compute

    Returns:
        TruncatedSeries of length order + 1
    """
    if order < 0:
        raise ValueError(f"order must be nonnegative, got {order}")
    coefficients = [hs.numerator.coefficient(k) for k in range(order + 1)]
    for e in hs.denominator_exponents:
        divide_one_minus(coefficients, e)
    return TruncatedSeries(coefficients)


def numerator_from_series(series: TruncatedSeries, denominator_exponents: Iterable[int],
                          expected_degree: int) -> IntPolynomial:
    """
    Recover the numerator N with N / prod(1 - t^e) equal to the series.

    Every coefficient of the product between expected_degree and the
    truncation order must vanish.

    Raises:
        NotPolynomial: the product does not stop at expected_degree
        ValueError: the series is too short to check anything
    """
    exponents = [int(e) for e in denominator_exponents]
    needed = expected_degree + (max(exponents) if exponents else 0)
    if series.order < needed:
        raise ValueError(
            f"series known to order {series.order}, need at least {needed}"
        )
    coefficients = list(series.coefficients)
    for e in exponents:
        multiply_one_minus(coefficients, e)
    for k in range(expected_degree + 1, len(coefficients)):
        if coefficients[k]:
            raise NotPolynomial(expected_degree, k, coefficients[k])
    return IntPolynomial.from_list(coefficients[:expected_degree + 1])


def is_gorenstein_symmetric(p: IntPolynomial, socle: int) -> bool:
    """True iff coefficient(k) == s * coefficient(socle - k) for one sign s."""
    if p.degree > socle:
        return False
    for s in (1, -1):
        if all(p.coefficient(k) == s * p.coefficient(socle - k) for k in range(socle + 1)):
            return True
    return False
