"""
Cyclic quotient singularities 1/r(a1,...,a4) and baskets of them.

Residues are stored exactly as the basket engine hands them over, sorted
ascending. No unit rescaling is applied, so the type-K2 point test sees the
polarization-normalized representation.
"""

import logging
import re
from collections import Counter
from dataclasses import dataclass
from math import gcd
from typing import Dict, Iterable, List, Mapping, Tuple, Union

logger = logging.getLogger(__name__)

_POINT_RE = re.compile(r'^\s*(?:(\d+)\s*[x×]\s*)?1/(\d+)\s*\(([\d,\s]+)\)\s*$')


class OrbifoldError(Exception):
    """Base class for quotient singularity errors."""


class NotIsolated(OrbifoldError):
    """The Reid-Tai check was asked about a non-isolated point."""


@dataclass(frozen=True, order=True)
class QuotientSingularity:
    """The germ of A^n modulo mu_r acting with weights a."""
    r: int
    a: Tuple[int, ...]

    def __post_init__(self):
        if self.r < 2:
            raise ValueError(f"r must be at least 2, got {self.r}")
        reduced = tuple(sorted(x % self.r for x in self.a))
        if any(x == 0 for x in reduced):
            raise ValueError(f"residue divisible by {self.r} in {self.a}")
        object.__setattr__(self, 'a', reduced)

    @classmethod
    def parse(cls, text: str) -> 'QuotientSingularity':
        match = _POINT_RE.match(text)
        if not match or match.group(1):
            raise ValueError(f"not a singularity type: {text!r}")
        return cls(int(match.group(2)), tuple(int(x) for x in match.group(3).split(',')))

    def scaled(self, u: int) -> 'QuotientSingularity':
        return QuotientSingularity(self.r, tuple(u * x for x in self.a))

    def __str__(self) -> str:
        return f"1/{self.r}({','.join(str(x) for x in self.a)})"


def is_isolated(q: QuotientSingularity) -> bool:
    return all(gcd(x, q.r) == 1 for x in q.a)


def is_terminal(q: QuotientSingularity) -> bool:
    """
    Reid-Tai criterion: sum of (k*a_i mod r) exceeds r for k = 1..r-1.

    Raises:
        NotIsolated: the criterion is only applied to isolated points
    """
    if not is_isolated(q):
        raise NotIsolated(f"{q} is not isolated")
    return all(sum((k * x) % q.r for x in q.a) > q.r for k in range(1, q.r))


def unit_orbit_equal(q1: QuotientSingularity, q2: QuotientSingularity) -> bool:
    if q1.r != q2.r or len(q1.a) != len(q2.a):
        return False
    r = q1.r
    for u in range(1, r):
        if gcd(u, r) != 1:
            continue
        if tuple(sorted((u * x) % r for x in q1.a)) == q2.a:
            return True
    return False


def k2_point_flag(q: QuotientSingularity) -> bool:
    return 1 not in q.a


class Basket:
    """
    Multiset of quotient singularities.

    Entries with the same (r, sorted residues) are merged; str() renders the
    usual "{1/3(1,2,2,2), 8 x 1/5(2,2,3,4)}" notation.
    """

    def __init__(self, entries: Union[None, Mapping[QuotientSingularity, int],
                                      Iterable[Tuple[QuotientSingularity, int]]] = None):
        self._points: Counter = Counter()
        if entries is None:
            return
        items = entries.items() if isinstance(entries, Mapping) else entries
        for q, k in items:
            self.add(q, k)

    def add(self, q: QuotientSingularity, multiplicity: int = 1) -> None:
        if multiplicity < 1:
            raise ValueError(f"multiplicity must be positive, got {multiplicity}")
        self._points[q] += multiplicity

    def items(self) -> List[Tuple[QuotientSingularity, int]]:
        return sorted(self._points.items())

    def multiplicity_at(self, r: int) -> int:
        return sum(k for q, k in self._points.items() if q.r == r)

    @property
    def size(self) -> int:
        return sum(self._points.values())

    def is_empty(self) -> bool:
        return not self._points

    def __iter__(self):
        return iter(self.items())

    def __len__(self) -> int:
        return len(self._points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Basket):
            return NotImplemented
        return basket_equal(self, other)

    def __repr__(self) -> str:
        return f"Basket({self})"

    def __str__(self) -> str:
        parts = []
        for q, k in self.items():
            parts.append(str(q) if k == 1 else f"{k} x {q}")
        return '{' + ', '.join(parts) + '}'

    def to_list(self) -> List[Dict]:
        return [{'r': q.r, 'a': list(q.a), 'k': k} for q, k in self.items()]

    @classmethod
    def from_list(cls, data: Iterable[Mapping]) -> 'Basket':
        return cls((QuotientSingularity(item['r'], tuple(item['a'])), item['k']) for item in data)

    @classmethod
    def parse(cls, text: str) -> 'Basket':
        """Parse "{1/3(1,2,2,2), 8 x 1/5(2,2,3,4)}"; an empty brace pair is the empty basket."""
        body = text.strip()
        if body.startswith('{') and body.endswith('}'):
            body = body[1:-1]
        basket = cls()
        for chunk in re.findall(r'(?:\d+\s*[x×]\s*)?1/\d+\s*\([\d,\s]+\)', body):
            match = _POINT_RE.match(chunk)
            k = int(match.group(1)) if match.group(1) else 1
            basket.add(QuotientSingularity(int(match.group(2)),
                                           tuple(int(x) for x in match.group(3).split(','))), k)
        return basket


def basket_equal(b1: Basket, b2: Basket) -> bool:
    return b1.items() == b2.items()
