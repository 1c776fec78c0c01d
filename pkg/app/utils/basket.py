"""
Baskets of quotient singularities of general family members.

Each singular toric stratum S_r = {i : r | w_i} of the ambient space is
intersected with X. Points are attributed to their exact stabilizer by
enumerating supports T with gcd(w_T) = r, and their local residues come from
the equivariant Jacobian (cas.jacobian_profiles).

Complete intersections also have a combinatorial fast path that reads the
same data off monomial supports; it raises AmbiguousMatching whenever the
answer is not forced and basket_for then falls back to the CAS.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import gcd, prod
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .cas import (
    Budget, EquationSystem, NotZeroDimensional, RankDeficient, build_equations,
    jacobian_profiles, monomials_of_degree, transverse_residues, zero_dim_points,
    DEFAULT_EXTRA_TERMS, DEFAULT_PRIME,
)
from .formats import FORMAT_CI, FormatFamily, WeightSystem, wellformed_weights
from .orbifold import Basket, QuotientSingularity, is_isolated, is_terminal

logger = logging.getLogger(__name__)

DEFAULT_RETRIES = 3


class BasketError(Exception):
    """Base class for basket computation errors."""


class AmbiguousMatching(BasketError):
    """The combinatorial rule does not determine the basket."""


@dataclass(frozen=True)
class Stratum:
    """Coordinate stratum of P(w) where mu_r acts trivially."""
    r: int
    indices: Tuple[int, ...]
    weights: Tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.indices) - 1


@dataclass
class StratumDetail:
    """What one stratum contributed: dimension of X on it (-1 if empty) and its point clusters."""
    r: int
    indices: Tuple[int, ...]
    dimension: int
    points: int = 0
    clusters: List[Dict] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {'r': self.r, 'indices': list(self.indices), 'dimension': self.dimension,
                'points': self.points, 'clusters': list(self.clusters)}


@dataclass
class BasketReport:
    """
    Basket of a general member with per-stratum evidence.

    Attributes:
        basket: the singularities with multiplicities
        strata: one StratumDetail per stratum, in increasing r
        wellformed: ambient wellformed and every stratum meets X in dimension <= 0
        isolated: every point is an isolated quotient singularity
        terminal: every point is terminal (False when some point is not isolated)
        method: "cas" or "fastpath"
        seed: seed of the member the CAS path used
    """
    basket: Basket
    strata: List[StratumDetail]
    wellformed: bool
    isolated: bool
    terminal: bool
    method: str
    seed: Optional[int] = None
    p: Optional[int] = None
    attempts: int = 1

    @property
    def consistent(self) -> bool:
        counts: Counter = Counter()
        for detail in self.strata:
            counts[detail.r] += detail.points
        return all(counts[r] == self.basket.multiplicity_at(r) for r in counts)

    def same_basket(self, other: 'BasketReport') -> bool:
        return (self.basket == other.basket and self.isolated == other.isolated
                and self.terminal == other.terminal and self.wellformed == other.wellformed)

    def to_dict(self) -> Dict:
        return {
            'basket': str(self.basket),
            'points': self.basket.to_list(),
            'strata': [d.to_dict() for d in self.strata if d.dimension >= 0],
            'wellformed': self.wellformed,
            'isolated': self.isolated,
            'terminal': self.terminal,
            'method': self.method,
            'seed': self.seed,
            'p': self.p,
        }


def strata_of(weights: Sequence[int]) -> List[Stratum]:
    """One stratum per r >= 2 dividing some weight, indexed into `weights` as given."""
    divisors = sorted({r for w in weights for r in range(2, w + 1) if w % r == 0})
    out = []
    for r in divisors:
        indices = tuple(i for i, w in enumerate(weights) if w % r == 0)
        out.append(Stratum(r, indices, tuple(weights[i] for i in indices)))
    return out


def enumerate_strata(ambient: WeightSystem) -> List[Stratum]:
    return strata_of(ambient.weights)


def wellformed_ambient(ambient: WeightSystem) -> bool:
    return wellformed_weights(ambient.weights)


def _flags(basket: Basket) -> Tuple[bool, bool]:
    points = [q for q, _ in basket.items()]
    isolated = all(is_isolated(q) for q in points)
    terminal = isolated and all(is_terminal(q) for q in points)
    return isolated, terminal


def _singularity(weights: Sequence[int], r: int, consumed: Sequence[int]) -> QuotientSingularity:
    residues = transverse_residues(weights, r, consumed)
    if len(residues) != 4:
        raise BasketError(f"expected 4 transverse residues mod {r}, got {residues}")
    if 0 in residues:
        raise NotZeroDimensional(r, residues.count(0))
    return QuotientSingularity(r, residues)


def stratum_detail(system: EquationSystem, stratum: Stratum, budget: Budget) -> Tuple[StratumDetail, Basket]:
    """
    Points of X with stabilizer exactly r on one stratum.

    Raises:
        NotZeroDimensional: X meets the stratum in positive dimension
        RankDeficient: X is singular at one of the points
    """
    detail = StratumDetail(stratum.r, stratum.indices, -1)
    contribution = Basket()
    for points in zero_dim_points(system, stratum.indices, budget, exact_stabilizer=stratum.r):
        for cluster in jacobian_profiles(system, points, budget):
            q = _singularity(system.weights, stratum.r, cluster.consumed)
            contribution.add(q, cluster.count)
            detail.points += cluster.count
            entry = cluster.to_dict()
            entry['type'] = str(q)
            detail.clusters.append(entry)
    if detail.points:
        detail.dimension = 0
    return detail, contribution


def basket_from_system(system: EquationSystem, budget: Optional[Budget] = None,
                       wellformed: Optional[bool] = None) -> BasketReport:
    """Basket of an explicit equation system (one fixed member)."""
    budget = budget or Budget()
    basket = Basket()
    details = []
    for stratum in strata_of(system.weights):
        detail, contribution = stratum_detail(system, stratum, budget)
        details.append(detail)
        for q, k in contribution.items():
            basket.add(q, k)
    isolated, terminal = _flags(basket)
    if wellformed is None:
        wellformed = wellformed_weights(system.weights)
    return BasketReport(basket=basket, strata=details, wellformed=wellformed, isolated=isolated,
                        terminal=terminal, method='cas', seed=system.seed, p=system.p)


def compute_basket(family: FormatFamily, seed: int, p: int = DEFAULT_PRIME,
                   budget: Optional[Budget] = None, retries: int = DEFAULT_RETRIES,
                   extra_terms: int = DEFAULT_EXTRA_TERMS) -> BasketReport:
    """
    Basket of a general member, computed with the CAS.

    A member that turns out singular at a stratum point is redrawn with
    seed + 1, seed + 2, ... up to `retries` times.

    Raises:
        NotZeroDimensional: X meets some stratum in positive dimension
        RankDeficient: every drawn member was singular at a stratum point
        BudgetExceeded: the Groebner budget ran out
    """
    budget = budget or Budget()
    wellformed = wellformed_ambient(family.ambient)
    last: Optional[RankDeficient] = None
    for attempt in range(retries + 1):
        system = build_equations(family, seed + attempt, p, extra_terms)
        try:
            report = basket_from_system(system, budget, wellformed)
        except RankDeficient as exc:
            logger.warning(f"{family}: member with seed {seed + attempt} is singular ({exc}), retrying")
            last = exc
            continue
        report.attempts = attempt + 1
        return report
    raise last


# Combinatorial analysis of general complete intersections -------------------

@lru_cache(maxsize=8192)
def _exponents(weights: Tuple[int, ...], degree: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(monomials_of_degree(list(weights), degree))


def _affine_rank(point_sets: Sequence[Sequence[Tuple[int, ...]]]) -> int:
    """Dimension of the Minkowski sum of the convex hulls of the point sets."""
    rows = []
    for points in point_sets:
        base = points[0]
        rows.extend([a - b for a, b in zip(m, base)] for m in points[1:])
    if not rows:
        return 0
    return int(np.linalg.matrix_rank(np.array(rows, dtype=float)))


@dataclass
class TorusLocus:
    """X restricted to the torus of a support T: nonzero coordinates exactly T."""
    support: Tuple[int, ...]
    cutting: Tuple[int, ...]  # equations with a monomial in the T variables
    dimension: Optional[int]  # None when empty
    full_rank: bool


def torus_locus(weights: Sequence[int], degrees: Sequence[int], support: Tuple[int, ...]) -> TorusLocus:
    """
    Generic intersection of the CI with the torus of `support`.

    With general coefficients the restricted forms meet in the torus iff every
    subset of them has Newton polytopes whose Minkowski sum has at least that
    dimension; the locus then has dimension |T| - 1 - #forms.
    """
    sub = tuple(weights[i] for i in support)
    cutting, polytopes = [], []
    for j, d in enumerate(degrees):
        exps = _exponents(sub, d)
        if exps:
            cutting.append(j)
            polytopes.append(exps)
    n = len(support) - 1
    full_rank = all(_affine_rank([p]) == n for p in polytopes)
    empty = len(cutting) > n
    if not empty:
        for size in range(1, len(polytopes) + 1):
            if any(_affine_rank(group) < size for group in combinations(polytopes, size)):
                empty = True
                break
    dimension = None if empty else n - len(cutting)
    return TorusLocus(tuple(support), tuple(cutting), dimension, full_rank)


def _linear_columns(weights: Sequence[int], degree: int, support: Tuple[int, ...]) -> List[int]:
    """Variables outside T whose derivative of a degree-`degree` form is nonzero on the torus of T."""
    sub = tuple(weights[i] for i in support)
    out = []
    for i, w in enumerate(weights):
        if i in support or w > degree:
            continue
        if _exponents(sub, degree - w):
            out.append(i)
    return out


def _max_matching(rows: Dict[int, List[int]]) -> int:
    """Size of a maximum matching of equation rows to variable columns."""
    edges = [(k, col) for k, row in enumerate(rows) for col in rows[row]]
    if not edges:
        return 0
    columns = {col: k for k, col in enumerate(sorted({col for _, col in edges}))}
    graph = csr_matrix((np.ones(len(edges), dtype=np.int8),
                        ([k for k, _ in edges], [columns[col] for _, col in edges])),
                       shape=(len(rows), len(columns)))
    matching = maximum_bipartite_matching(graph, perm_type='column')
    return int(np.count_nonzero(matching >= 0))


def hall_surplus(rows: Dict[int, List[int]], surplus: int) -> bool:
    """|N(R)| >= |R| + surplus for every nonempty set R of rows."""
    keys = list(rows)
    for size in range(1, len(keys) + 1):
        for group in combinations(keys, size):
            neighbours = set()
            for row in group:
                neighbours.update(rows[row])
            if len(neighbours) < size + surplus:
                return False
    return True


def transverse_rows(weights: Sequence[int], degrees: Sequence[int], locus: TorusLocus) -> Dict[int, List[int]]:
    return {j: _linear_columns(weights, d, locus.support)
            for j, d in enumerate(degrees) if j not in locus.cutting}


def ci_basket_fastpath(family: FormatFamily) -> BasketReport:
    """
    Combinatorial basket of a general complete intersection.

    For each support T with gcd(w_T) = r >= 2: the forms with monomials in T
    cut the torus of T; when they cut it in finitely many points the count is
    r * prod(d) / prod(w_T), and every remaining equation consumes the residue
    of its degree through a variable outside T.

    Raises:
        AmbiguousMatching: some count or matching is not forced
        NotZeroDimensional: X meets a stratum in positive dimension
    """
    if family.kind != FORMAT_CI:
        raise ValueError(f"ci_basket_fastpath called on {family.kind} family")
    weights = family.ambient.weights
    degrees = family.descriptor.degrees
    n = len(weights)
    loci: Dict[Tuple[int, ...], TorusLocus] = {}

    def locus(support):
        if support not in loci:
            loci[support] = torus_locus(weights, degrees, support)
        return loci[support]

    basket = Basket()
    details = []
    for stratum in strata_of(weights):
        r = stratum.r
        detail = StratumDetail(r, stratum.indices, -1)
        for size in range(1, len(stratum.indices) + 1):
            for support in combinations(stratum.indices, size):
                g = 0
                for i in support:
                    g = gcd(g, weights[i])
                if g != r:
                    continue
                here = locus(support)
                if here.dimension is None:
                    continue
                if here.dimension > 0:
                    raise NotZeroDimensional(r, here.dimension)
                if size > 1:
                    if not here.full_rank:
                        raise AmbiguousMatching(f"degenerate Newton polytopes on support {support}")
                    for inner in range(1, size):
                        for face in combinations(support, inner):
                            if locus(face).dimension is not None:
                                raise AmbiguousMatching(f"boundary points of support {support} on {face}")
                    numerator = r * prod(degrees[j] for j in here.cutting)
                    denominator = prod(weights[i] for i in support)
                    if numerator % denominator:
                        raise AmbiguousMatching(f"fractional point count {numerator}/{denominator}")
                    count = numerator // denominator
                else:
                    count = 1
                rows = transverse_rows(weights, degrees, here)
                if _max_matching(rows) < len(rows):
                    raise AmbiguousMatching(f"equations {sorted(rows)} cannot all pivot at support {support}")
                consumed = [d % r for d in degrees]
                q = _singularity(weights, r, consumed)
                basket.add(q, count)
                detail.points += count
                detail.dimension = 0
                detail.clusters.append({'support': list(support), 'r': r, 'count': count,
                                        'rank': len(degrees), 'consumed': sorted(consumed),
                                        'type': str(q)})
        details.append(detail)
    isolated, terminal = _flags(basket)
    logger.debug(f"{family}: fast path basket {basket} over {n} variables")
    return BasketReport(basket=basket, strata=details, wellformed=wellformed_ambient(family.ambient),
                        isolated=isolated, terminal=terminal, method='fastpath')


def basket_for(family: FormatFamily, seed: int, p: int = DEFAULT_PRIME, budget: Optional[Budget] = None,
               retries: int = DEFAULT_RETRIES, extra_terms: int = DEFAULT_EXTRA_TERMS) -> BasketReport:
    """Fast path for complete intersections when it is forced, the CAS otherwise."""
    if family.kind == FORMAT_CI:
        try:
            return ci_basket_fastpath(family)
        except AmbiguousMatching as exc:
            logger.info(f"{family}: fast path not forced ({exc}), using the CAS")
    return compute_basket(family, seed, p, budget, retries, extra_terms)
