"""
Sparse polynomial kernel behind basket computation and quasismoothness.

This module provides:
- WeightedRing: sympy PolyRing over GF(p) (or QQ when p = 0) whose variables
  carry weights, ordered by weighted degree then reverse lexicographically
- build_equations / load_model: the equation system of a family member
- groebner: Buchberger with normal pair selection and Gebauer-Moeller
  criteria, charged against a Budget
- ideal_dimension / quotient_dimension
- zero_dim_points / jacobian_profiles: geometric points of a stratum grouped
  by their equivariant Jacobian data, computed in chart quotient rings
- equivariant_jacobian_rank: the same data at an explicit F_p point

Points over extension fields are never written down. A chart x_k = 1 plus a
Rabinowitsch variable cuts out the points with a given support; their number
is the dimension of the quotient ring. Per-point Jacobian ranks come from
Gaussian elimination over that ring, splitting on whether each pivot vanishes.
"""

import logging
import re
import time
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Matrix, Symbol
from sympy.parsing.sympy_parser import parse_expr
from sympy.polys.domains import GF, QQ
from sympy.polys.rings import PolyRing

from .formats import (
    FORMAT_CI, FORMAT_GR, FORMAT_P2P2, GR_PAIRS, SEGRE_CELLS, FormatFamily,
    MissingForm, equation_degrees, format_entries, match_coordinates,
)

logger = logging.getLogger(__name__)

DEFAULT_PRIME = 32003
DEFAULT_EXTRA_TERMS = 12
# cap on monomials taken from one stratum set for a general form
STRATUM_TERM_CAP = 64


class CasError(Exception):
    """Base class for kernel errors."""


class BudgetExceeded(CasError):
    """The S-pair or wall-clock budget ran out."""

    def __init__(self, spairs: int, seconds: float, reason: str):
        self.spairs = spairs
        self.seconds = seconds
        self.reason = reason
        super().__init__(f"{reason} after {spairs} S-pairs, {seconds:.1f}s")


class NotZeroDimensional(CasError):
    """A stratum meets the member in a positive-dimensional locus."""

    def __init__(self, r: int, dimension: int):
        self.r = r
        self.dimension = dimension
        super().__init__(f"stratum r={r} meets X in dimension {dimension}")


class RankDeficient(CasError):
    """The Jacobian drops rank at a point of the member."""

    def __init__(self, rank: int, codim: int, witness: Dict):
        self.rank = rank
        self.codim = codim
        self.witness = witness
        super().__init__(f"Jacobian rank {rank} < {codim} at {witness}")


class ModelFormatError(CasError):
    """An explicit model file could not be parsed."""


@dataclass
class Budget:
    """Shared S-pair and time allowance for one certificate or basket run."""
    max_spairs: int = 10 ** 6
    max_seconds: float = 300.0
    spairs_used: int = 0
    started: float = field(default_factory=time.monotonic)

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self.started

    def charge(self, n: int = 1) -> None:
        self.spairs_used += n
        if self.spairs_used > self.max_spairs:
            raise BudgetExceeded(self.spairs_used, self.elapsed, "S-pair budget exhausted")
        if self.elapsed > self.max_seconds:
            raise BudgetExceeded(self.spairs_used, self.elapsed, "time budget exhausted")

    def to_dict(self) -> Dict:
        return {'spairs': self.spairs_used, 'max_spairs': self.max_spairs,
                'max_seconds': self.max_seconds}


class WeightedOrder:
    """Weighted degree, ties broken reverse lexicographically."""

    def __init__(self, weights: Sequence[int]):
        self.weights = tuple(weights)

    def __call__(self, monomial):
        return (sum(w * e for w, e in zip(self.weights, monomial)),
                tuple(-e for e in reversed(monomial)))

    def __eq__(self, other):
        return isinstance(other, WeightedOrder) and other.weights == self.weights

    def __hash__(self):
        return hash(('wgrevlex', self.weights))

    def __repr__(self):
        return f"WeightedOrder({self.weights})"


class WeightedRing:
    """
    Polynomial ring with weighted variables.

    Attributes:
        names: variable names
        weights: variable weights, aligned with names
        p: field characteristic (0 means QQ)
        ring: the underlying sympy PolyRing
    """

    def __init__(self, names: Sequence[str], weights: Sequence[int], p: int = DEFAULT_PRIME):
        if len(names) != len(weights):
            raise ValueError("one weight per variable")
        self.names = tuple(names)
        self.weights = tuple(int(w) for w in weights)
        self.p = int(p)
        self.domain = GF(self.p) if self.p else QQ
        self.ring = PolyRing(','.join(self.names) if self.names else '', self.domain,
                             WeightedOrder(self.weights))
        self.gens = self.ring.gens

    @property
    def ngens(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def from_terms(self, terms: Dict[Tuple[int, ...], object]):
        return self.ring.from_dict(terms)

    def from_expr(self, expr):
        return self.ring.from_expr(expr)

    def one(self):
        return self.ring.one

    def to_int(self, coefficient) -> int:
        """Canonical integer representative of a coefficient."""
        if self.p:
            return int(coefficient) % self.p
        return int(coefficient)

    def __repr__(self):
        return f"WeightedRing({list(zip(self.names, self.weights))}, p={self.p})"


def weighted_degrees(poly, weights: Sequence[int]) -> set:
    return {sum(w * e for w, e in zip(weights, m)) for m in poly.itermonoms()}


def is_weighted_homogeneous(poly, weights: Sequence[int]) -> bool:
    return len(weighted_degrees(poly, weights)) <= 1


def restrict(poly, target: WeightedRing, placement: Dict[int, int], ones: Iterable[int] = ()):
    """
    Restrict a polynomial to a coordinate subspace.

    Source variable i goes to target variable placement[i]; variables in
    `ones` are set to 1 and every other variable to 0.
    """
    ones = set(ones)
    out: Dict[Tuple[int, ...], object] = {}
    n = target.ngens
    for monom, coeff in poly.iterterms():
        new = [0] * n
        keep = True
        for i, e in enumerate(monom):
            if not e or i in ones:
                continue
            j = placement.get(i)
            if j is None:
                keep = False
                break
            new[j] = e
        if not keep:
            continue
        key = tuple(new)
        out[key] = out[key] + coeff if key in out else coeff
    return target.from_terms({k: v for k, v in out.items() if v})


# General forms ---------------------------------------------------------------

def monomials_of_degree(weights: Sequence[int], degree: int, limit: Optional[int] = None) -> List[Tuple[int, ...]]:
    """Exponent vectors of weighted degree `degree`, in lexicographic order."""
    n = len(weights)
    found: List[Tuple[int, ...]] = []

    def walk(i: int, remaining: int, prefix: List[int]):
        if limit is not None and len(found) >= limit:
            return
        if i == n - 1:
            if remaining % weights[i] == 0:
                found.append(tuple(prefix + [remaining // weights[i]]))
            return
        for e in range(remaining // weights[i] + 1):
            walk(i + 1, remaining - e * weights[i], prefix + [e])

    if n == 0:
        return [()] if degree == 0 else []
    walk(0, degree, [])
    return found


def singular_index_sets(weights: Sequence[int]) -> List[Tuple[int, ...]]:
    """Index sets S_r = {i : r | w_i} for r >= 2, plus every singleton."""
    sets = {(i,) for i in range(len(weights))}
    divisors = {r for w in weights for r in range(2, w + 1) if w % r == 0}
    for r in divisors:
        sets.add(tuple(i for i, w in enumerate(weights) if w % r == 0))
    return sorted(sets)


def _embed(sub: Tuple[int, ...], indices: Tuple[int, ...], n: int) -> Tuple[int, ...]:
    full = [0] * n
    for i, e in zip(indices, sub):
        full[i] = e
    return tuple(full)


def structured_support(weights: Sequence[int], degree: int) -> List[Tuple[int, ...]]:
    """
    Monomials that keep a general form general on every singular stratum.

    For each index set S (a stratum set or a single variable): the monomials
    of degree `degree` in S, and those of degree `degree - w_e` in S times x_e.
    """
    n = len(weights)
    support = set()
    for indices in singular_index_sets(weights):
        sub = [weights[i] for i in indices]
        for m in monomials_of_degree(sub, degree, STRATUM_TERM_CAP):
            support.add(_embed(m, indices, n))
        for e in range(n):
            rest = degree - weights[e]
            if rest < 0:
                continue
            for m in monomials_of_degree(sub, rest, STRATUM_TERM_CAP):
                full = list(_embed(m, indices, n))
                full[e] += 1
                support.add(tuple(full))
    return sorted(support)


def _random_monomial(weights: Sequence[int], degree: int, rng) -> Optional[Tuple[int, ...]]:
    n = len(weights)
    for _ in range(32):
        order = rng.permutation(n)
        remaining = degree
        exps = [0] * n
        for idx in order[:-1]:
            e = int(rng.integers(0, remaining // weights[idx] + 1))
            exps[idx] = e
            remaining -= e * weights[idx]
        last = int(order[-1])
        if remaining % weights[last] == 0:
            exps[last] = remaining // weights[last]
            return tuple(exps)
    return None


def general_form(ring: WeightedRing, degree: int, rng, extra_terms: int = DEFAULT_EXTRA_TERMS):
    """
    Pseudo-random weighted-homogeneous form of the given degree.

    Raises:
        MissingForm: no monomial of this degree exists
    """
    weights = ring.weights
    support = set(structured_support(weights, degree))
    for _ in range(extra_terms):
        m = _random_monomial(weights, degree, rng)
        if m is not None:
            support.add(m)
    if not support:
        raise MissingForm(degree)
    high = ring.p if ring.p else 100
    terms = {m: int(rng.integers(1, high)) for m in sorted(support)}
    return ring.from_terms(terms)


def pfaffian4(m, a: int, b: int, c: int, d: int):
    return m[a][b] * m[c][d] - m[a][c] * m[b][d] + m[a][d] * m[b][c]


def pfaffians(m) -> List:
    """The five 4x4 Pfaffians of a 5x5 skew matrix, Pf_k omitting index k."""
    out = []
    for k in range(5):
        a, b, c, d = [i for i in range(5) if i != k]
        out.append(pfaffian4(m, a, b, c, d))
    return out


def minors2(m) -> List:
    """The nine 2x2 minors of a 3x3 matrix, rows outer, columns inner."""
    out = []
    for i, k in combinations(range(3), 2):
        for j, l in combinations(range(3), 2):
            out.append(m[i][j] * m[k][l] - m[i][l] * m[k][j])
    return out


def _skew(entries: Dict[Tuple[int, int], object], zero):
    m = [[zero] * 5 for _ in range(5)]
    for (i, j), value in entries.items():
        m[i][j] = value
        m[j][i] = -value
    return m


@dataclass
class EquationSystem:
    """
    Equations of one member of a family.

    Attributes:
        ring: ambient polynomial ring
        polynomials: defining equations
        degrees: declared weighted degree of each equation
        provenance: where each equation came from
        substitution: format coordinate -> variable name or general form
        entries: format entry polynomials (empty for complete intersections)
        entry_positions: matrix position of each entry
    """
    ring: WeightedRing
    kind: str
    codim: int
    polynomials: Tuple
    degrees: Tuple[int, ...]
    provenance: Tuple[str, ...]
    substitution: Dict[str, str] = field(default_factory=dict)
    entries: Tuple = ()
    entry_positions: Tuple[Tuple[int, ...], ...] = ()
    entry_labels: Tuple[str, ...] = ()
    seed: Optional[int] = None

    def __post_init__(self):
        for poly, deg, label in zip(self.polynomials, self.degrees, self.provenance):
            degs = weighted_degrees(poly, self.ring.weights)
            if degs and degs != {deg}:
                raise CasError(f"{label} is not homogeneous of degree {deg}: {sorted(degs)}")

    @property
    def weights(self) -> Tuple[int, ...]:
        return self.ring.weights

    @property
    def p(self) -> int:
        return self.ring.p

    @cached_property
    def jacobian(self) -> List[List]:
        return [[f.diff(x) for x in self.ring.gens] for f in self.polynomials]

    def describe(self) -> Dict:
        return {
            'kind': self.kind,
            'p': self.p,
            'seed': self.seed,
            'variables': [f"{n}:{w}" for n, w in zip(self.ring.names, self.ring.weights)],
            'equations': [f"{label} (deg {d}): {len(list(poly.itermonoms()))} terms"
                          for label, d, poly in zip(self.provenance, self.degrees, self.polynomials)],
            'substitution': dict(self.substitution),
        }


@dataclass
class LocalChart:
    """
    Open piece of the affine cone on which X is a complete intersection.

    Attributes:
        label: entry or variable that is nonzero on the piece
        ring: chart ring (the slice x_k = 1, or the cone with '_z' inverting an entry)
        equations: local equations, exactly codim of them
        constraints: earlier pieces of the cover, required to vanish
    """
    label: str
    ring: WeightedRing
    equations: List
    constraints: List


def _solved_minors(kind: str, cells: Dict[Tuple[int, int], object], position: Tuple[int, int], inverse) -> List:
    """Remaining entries as functions of the row and column through a nonzero entry."""
    a, b = position
    if kind == FORMAT_GR:
        def m(x, y):
            return cells[(x, y)] if x < y else -cells[(y, x)]
        rest = [k for k in range(5) if k not in position]
        return [m(c, d) - inverse * (m(a, c) * m(b, d) - m(a, d) * m(b, c))
                for c, d in combinations(rest, 2)]
    return [cells[(i, j)] - inverse * cells[(a, j)] * cells[(i, b)]
            for i in range(3) if i != a for j in range(3) if j != b]


def local_charts(system: EquationSystem) -> List[LocalChart]:
    """
    Charts covering the cone minus the vertex, made disjoint in cover order.

    Complete intersections use x_k = 1 with x_i = 0 for i < k. Pfaffian and
    determinantal formats use one chart per nonzero entry; on it the format
    equations reduce to codim solved minors. A variable entry becomes the
    slice x_k = 1, a form entry E is inverted by '_z' with z*E - 1 added.
    """
    names = system.ring.names
    n = system.ring.ngens
    charts = []

    def slice_ring(k):
        kept = [i for i in range(n) if i != k]
        ring = WeightedRing([names[i] for i in kept], [system.weights[i] for i in kept], system.p)
        placement = {i: pos for pos, i in enumerate(kept)}
        return ring, lambda poly: restrict(poly, ring, placement, ones=(k,))

    if system.kind == FORMAT_CI:
        for k in range(n):
            ring, to_chart = slice_ring(k)
            equations = [to_chart(f) for f in system.polynomials]
            constraints = [to_chart(system.ring.gens[i]) for i in range(k)]
            charts.append(LocalChart(names[k], ring, equations, constraints))
        return charts

    everything = {i: i for i in range(n)}
    localized = WeightedRing(list(names) + ['_z'], list(system.weights) + [1], system.p)

    def to_localized(poly):
        return restrict(poly, localized, everything)

    earlier = []
    for index, entry in enumerate(system.entries):
        if not entry:
            continue
        label = system.entry_labels[index] if system.entry_labels else str(index)
        if entry in system.ring.gens:
            ring, to_chart = slice_ring(system.ring.gens.index(entry))
            inverse = ring.ring.one
            extra = []
        else:
            ring = localized
            to_chart = to_localized
            inverse = ring.gens[-1]
            extra = [inverse * to_chart(entry) - 1]
        cells = {pos: to_chart(e) for pos, e in zip(system.entry_positions, system.entries)}
        equations = _solved_minors(system.kind, cells, system.entry_positions[index], inverse) + extra
        charts.append(LocalChart(label, ring, equations, [to_chart(e) for e in earlier]))
        earlier.append(entry)
    return charts


def _linear_variable(poly, candidates: Iterable[int]) -> Optional[int]:
    """A variable that occurs in exactly one term of poly, that term being c*x_v."""
    monomials = list(poly.itermonoms())
    for v in candidates:
        hits = [m for m in monomials if m[v]]
        if len(hits) == 1 and hits[0][v] == 1 and sum(hits[0]) == 1:
            return v
    return None


def solve_linear(pivots: List, passengers: List, ring: WeightedRing,
                 candidates: Optional[Iterable[int]] = None) -> Tuple[List, List, List[int]]:
    """
    Eliminate variables solved for by some pivot c*x_v + h with constant c.

    Each step takes the shortest such pivot, substitutes x_v = -h/c into the
    other pivots and the passengers and drops the pivot.

    Returns:
        (pivots, passengers, eliminated variable indices)
    """
    pool = list(range(ring.ngens)) if candidates is None else list(candidates)
    pivots, passengers = list(pivots), list(passengers)
    eliminated = []
    while True:
        best = None
        for idx, g in enumerate(pivots):
            if best is not None and len(g) >= len(pivots[best[0]]):
                continue
            v = _linear_variable(g, pool)
            if v is not None:
                best = (idx, v)
        if best is None:
            return pivots, passengers, eliminated
        idx, v = best
        g = pivots.pop(idx)
        x = ring.gens[v]
        c = g.coeff(x)
        value = (x.mul_ground(c) - g).mul_ground(ring.domain.quo(ring.domain.one, c))
        pivots = [f.compose(x, value) for f in pivots]
        passengers = [f.compose(x, value) for f in passengers]
        pool.remove(v)
        eliminated.append(v)


def build_equations(family: FormatFamily, seed: int, p: int = DEFAULT_PRIME,
                    extra_terms: int = DEFAULT_EXTRA_TERMS) -> EquationSystem:
    """
    Sparse general member of a family.

    Format coordinates matched to ambient variables (greedy, in matrix order)
    become those variables; all others become general forms.

    Raises:
        MissingForm: a required degree has no monomial
    """
    weights = family.ambient.weights
    names = [f"x{i}" for i in range(len(weights))]
    ring = WeightedRing(names, weights, p)
    rng = np.random.default_rng(seed)
    degrees = equation_degrees(family.descriptor)

    if family.kind == FORMAT_CI:
        polys = [general_form(ring, d, rng, extra_terms) for d in degrees]
        return EquationSystem(
            ring=ring, kind=FORMAT_CI, codim=family.codim, polynomials=tuple(polys),
            degrees=tuple(degrees), provenance=tuple(f"f{d}" for d in degrees),
            substitution={f"f{j + 1}": f"general form of degree {d}" for j, d in enumerate(degrees)},
            seed=seed,
        )

    matched = match_coordinates(family)
    entries, positions, labels, substitution = [], [], [], {}
    for entry in format_entries(family.descriptor):
        if entry.label in matched:
            value = ring.gens[matched[entry.label]]
            substitution[entry.label] = names[matched[entry.label]]
        else:
            value = general_form(ring, entry.weight, rng, extra_terms)
            substitution[entry.label] = f"general form of degree {entry.weight}"
        entries.append(value)
        positions.append(entry.position)
        labels.append(entry.label)

    if family.kind == FORMAT_GR:
        matrix = _skew(dict(zip(positions, entries)), ring.ring.zero)
        polys = pfaffians(matrix)
        provenance = [f"Pf{k + 1}" for k in range(5)]
    else:
        matrix = [[None] * 3 for _ in range(3)]
        for (i, j), value in zip(positions, entries):
            matrix[i][j] = value
        polys = minors2(matrix)
        provenance = [f"m{i + 1}{k + 1}|{j + 1}{l + 1}"
                      for i, k in combinations(range(3), 2) for j, l in combinations(range(3), 2)]
    return EquationSystem(
        ring=ring, kind=family.kind, codim=family.codim, polynomials=tuple(polys),
        degrees=tuple(degrees), provenance=tuple(provenance), substitution=substitution,
        entries=tuple(entries), entry_positions=tuple(positions), entry_labels=tuple(labels),
        seed=seed,
    )


# Explicit models -------------------------------------------------------------

_KEYWORDS = ('format', 'variables', 'matrix', 'equations')


def _logical_lines(text: str) -> List[str]:
    lines = []
    for raw in text.splitlines():
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if lines and line[0] in '+-' and '=' in lines[-1]:
            lines[-1] += ' ' + line
        else:
            lines.append(line)
    return lines


def _fill_entry_weights(kind: str, weights: Dict[Tuple[int, int], Optional[int]]) -> None:
    """Infer the weights of zero entries from w_ij = w_il + w_kj - w_kl."""
    changed = True
    while changed and any(v is None for v in weights.values()):
        changed = False
        for (i, j), value in weights.items():
            if value is not None:
                continue
            for (k, l), wkl in weights.items():
                if wkl is None or k == i or l == j:
                    continue
                if kind == FORMAT_GR and len({i, j, k, l}) < 4:
                    continue
                if kind == FORMAT_GR:
                    a, b = sorted((i, k)), sorted((j, l))
                    key1, key2 = tuple(a), tuple(b)
                else:
                    key1, key2 = (i, l), (k, j)
                w1, w2 = weights.get(key1), weights.get(key2)
                if w1 is not None and w2 is not None:
                    weights[(i, j)] = w1 + w2 - wkl
                    changed = True
                    break
    missing = [key for key, v in weights.items() if v is None]
    if missing:
        raise ModelFormatError(f"cannot infer the weight of entries {missing}")


def load_model(text: str, p: int = DEFAULT_PRIME) -> EquationSystem:
    """
    Parse an explicit model.

    Layout:
        format P2P2                  (CI, GR or P2P2)
        variables x0:2 x1:3 ...
        matrix                       (3 rows for P2P2; rows of 4,3,2,1 for GR)
        equations                    (CI: one polynomial per line)
        name = polynomial            (definitions used in the matrix)

    Raises:
        ModelFormatError: malformed file
    """
    kind, variables = None, []
    matrix_rows: List[List[str]] = []
    equations: List[str] = []
    definitions: Dict[str, str] = {}
    section = None
    for line in _logical_lines(text):
        head = line.split(None, 1)
        keyword = head[0].lower()
        if keyword in _KEYWORDS and not re.match(r'^\w+\s*=', line):
            section = keyword
            rest = head[1] if len(head) > 1 else ''
            if keyword == 'format':
                kind = rest.strip().upper()
                section = None
            elif keyword == 'variables':
                variables.extend(rest.split())
                section = 'variables'
            continue
        if re.match(r'^[A-Za-z_]\w*\s*=', line):
            name, expr = line.split('=', 1)
            definitions[name.strip()] = expr.strip()
            section = None
        elif section == 'variables':
            variables.extend(line.split())
        elif section == 'matrix':
            matrix_rows.append(line.split())
        elif section == 'equations':
            equations.append(line)
        else:
            raise ModelFormatError(f"unexpected line: {line!r}")

    if kind not in (FORMAT_CI, FORMAT_GR, FORMAT_P2P2):
        raise ModelFormatError(f"unknown or missing format: {kind!r}")
    names, weights = [], []
    for token in variables:
        if ':' not in token:
            raise ModelFormatError(f"variable without weight: {token!r}")
        name, w = token.split(':', 1)
        names.append(name)
        weights.append(int(w))
    ring = WeightedRing(names, weights, p)
    symbols = {name: Symbol(name) for name in names}

    def to_poly(source: str, seen=()):
        expr_text = source.replace('^', '**')
        local = dict(symbols)
        for dname, dexpr in definitions.items():
            if dname in expr_text and dname not in seen and dname not in symbols:
                local[dname] = to_poly(dexpr, seen + (dname,)).as_expr()
        try:
            return ring.from_expr(parse_expr(expr_text, local_dict=local))
        except (SyntaxError, ValueError, TypeError) as exc:
            raise ModelFormatError(f"cannot read polynomial {source!r}: {exc}")

    def degree_of(poly) -> Optional[int]:
        degs = weighted_degrees(poly, ring.weights)
        if len(degs) > 1:
            raise ModelFormatError(f"entry {poly} is not weighted homogeneous")
        return degs.pop() if degs else None

    if kind == FORMAT_CI:
        polys = [to_poly(e) for e in equations]
        degrees = [degree_of(f) for f in polys]
        if not 2 <= len(polys) <= 4 or None in degrees:
            raise ModelFormatError("a complete intersection needs 2 to 4 nonzero equations")
        return EquationSystem(ring=ring, kind=kind, codim=len(polys), polynomials=tuple(polys),
                              degrees=tuple(degrees), provenance=tuple(f"f{d}" for d in degrees),
                              substitution={f"f{j + 1}": equations[j] for j in range(len(polys))})

    if kind == FORMAT_GR:
        if [len(row) for row in matrix_rows] != [4, 3, 2, 1]:
            raise ModelFormatError("GR matrix must list the upper triangle in rows of 4, 3, 2, 1")
        cells = {}
        for i, row in enumerate(matrix_rows):
            for offset, token in enumerate(row):
                cells[(i, i + 1 + offset)] = token
        order = list(GR_PAIRS)
    else:
        if len(matrix_rows) != 3 or any(len(row) != 3 for row in matrix_rows):
            raise ModelFormatError("P2P2 matrix must have 3 rows of 3 entries")
        cells = {(i, j): matrix_rows[i][j] for i, j in SEGRE_CELLS}
        order = list(SEGRE_CELLS)

    entry_polys = {pos: to_poly(definitions.get(tok, tok)) for pos, tok in cells.items()}
    entry_weights = {pos: degree_of(poly) for pos, poly in entry_polys.items()}
    _fill_entry_weights(kind, entry_weights)

    if kind == FORMAT_GR:
        matrix = _skew(entry_polys, ring.ring.zero)
        polys = pfaffians(matrix)
        degrees = []
        for k in range(5):
            a, b, c, d = [i for i in range(5) if i != k]
            degrees.append(entry_weights[(a, b)] + entry_weights[(c, d)])
        provenance = [f"Pf{k + 1}" for k in range(5)]
        codim = 3
    else:
        matrix = [[entry_polys[(i, j)] for j in range(3)] for i in range(3)]
        polys = minors2(matrix)
        degrees = [entry_weights[(i, j)] + entry_weights[(k, l)]
                   for i, k in combinations(range(3), 2) for j, l in combinations(range(3), 2)]
        provenance = [f"m{i + 1}{k + 1}|{j + 1}{l + 1}"
                      for i, k in combinations(range(3), 2) for j, l in combinations(range(3), 2)]
        codim = 4
    return EquationSystem(
        ring=ring, kind=kind, codim=codim, polynomials=tuple(polys), degrees=tuple(degrees),
        provenance=tuple(provenance),
        substitution={f"x{i + 1}{j + 1}": cells[(i, j)] for i, j in order},
        entries=tuple(entry_polys[pos] for pos in order), entry_positions=tuple(order),
        entry_labels=tuple(f"x{i + 1}{j + 1}" for i, j in order),
    )


# Groebner bases --------------------------------------------------------------

@dataclass
class GroebnerBasis:
    """Reduced Groebner basis, sorted by decreasing leading monomial."""
    ring: WeightedRing
    generators: Tuple
    spairs: int = 0

    def is_unit(self) -> bool:
        return len(self.generators) == 1 and self.generators[0].is_ground and bool(self.generators[0])

    def is_zero(self) -> bool:
        return not self.generators

    def leading_monomials(self) -> List[Tuple[int, ...]]:
        return [g.LM for g in self.generators]

    def reduce(self, poly):
        if not self.generators:
            return poly
        return poly.rem(list(self.generators))

    def contains(self, poly) -> bool:
        return not self.reduce(poly)


def _spoly(p1, p2, ring):
    lcm = ring.monomial_lcm(p1.LM, p2.LM)
    return p1.mul_monom(ring.monomial_div(lcm, p1.LM)) - p2.mul_monom(ring.monomial_div(lcm, p2.LM))


def _buchberger(f: List, ring, budget: Budget) -> Tuple[List, int]:
    """Improved Buchberger algorithm (Becker-Weispfenning GROEBNERNEWS2) with a budget."""
    order = ring.order
    monomial_mul = ring.monomial_mul
    monomial_div = ring.monomial_div
    monomial_lcm = ring.monomial_lcm
    spairs = 0

    def select(P):
        # normal selection: minimal lcm of the leading monomials
        return min(P, key=lambda pair: (order(monomial_lcm(f[pair[0]].LM, f[pair[1]].LM)), pair))

    def normal(g, J):
        h = g.rem([f[j] for j in J])
        if not h:
            return None
        h = h.monic()
        if h not in I:
            I[h] = len(f)
            f.append(h)
        return h.LM, I[h]

    def update(G, B, ih):
        h = f[ih]
        mh = h.LM
        C = set(G)
        D = set()
        while C:
            ig = min(C)
            C.remove(ig)
            mg = f[ig].LM
            lcm_hg = monomial_lcm(mh, mg)

            def lcm_divides(ip):
                return monomial_div(lcm_hg, monomial_lcm(mh, f[ip].LM))

            if monomial_mul(mh, mg) == lcm_hg or (
                    not any(lcm_divides(ipx) for ipx in C) and
                    not any(lcm_divides(pr[1]) for pr in D)):
                D.add((ih, ig))

        E = set()
        for ih2, ig in D:
            mg = f[ig].LM
            if monomial_mul(mh, mg) != monomial_lcm(mh, mg):
                E.add((ih2, ig))

        B_new = set()
        for ig1, ig2 in B:
            mg1, mg2 = f[ig1].LM, f[ig2].LM
            lcm12 = monomial_lcm(mg1, mg2)
            if not monomial_div(lcm12, mh) or \
                    monomial_lcm(mg1, mh) == lcm12 or \
                    monomial_lcm(mg2, mh) == lcm12:
                B_new.add((ig1, ig2))
        B_new |= E

        G_new = {ig for ig in G if not monomial_div(f[ig].LM, mh)}
        G_new.add(ih)
        return G_new, B_new

    # interreduce the input
    f1 = [g for g in f if g]
    while True:
        f = f1[:]
        f1 = []
        for i in range(len(f)):
            r = f[i].rem(f[:i])
            if r:
                f1.append(r.monic())
        if f == f1:
            break
    if not f:
        return [], 0

    I = {}
    F = set()
    G = set()
    CP = set()
    for i, h in enumerate(f):
        I[h] = i
        F.add(i)
    while F:
        h = min((f[x] for x in F), key=lambda g: order(g.LM))
        ih = I[h]
        F.remove(ih)
        G, CP = update(G, CP, ih)

    while CP:
        ig1, ig2 = select(CP)
        CP.remove((ig1, ig2))
        budget.charge()
        spairs += 1
        h = _spoly(f[ig1], f[ig2], ring)
        G1 = sorted(G, key=lambda g: order(f[g].LM))
        ht = normal(h, G1)
        if ht:
            if ht[0] == ring.zero_monom:
                # unit ideal
                return [ring.one], spairs
            G, CP = update(G, CP, ht[1])

    reduced = set()
    for ig in G:
        ht = normal(f[ig], G - {ig})
        if ht:
            reduced.add(ht[1])
    basis = sorted((f[ig] for ig in reduced), key=lambda g: order(g.LM), reverse=True)
    return basis, spairs


def groebner(generators: Iterable, ring: WeightedRing, budget: Optional[Budget] = None) -> GroebnerBasis:
    """
    Reduced Groebner basis of the ideal generated by `generators`.

    Raises:
        BudgetExceeded: the budget ran out (never a silent partial result)
    """
    budget = budget or Budget()
    polys = [g for g in generators if g]
    if any(g.is_ground for g in polys):
        return GroebnerBasis(ring, (ring.ring.one,), 0)
    basis, spairs = _buchberger(polys, ring.ring, budget)
    return GroebnerBasis(ring, tuple(basis), spairs)


def _support(monomial) -> frozenset:
    return frozenset(i for i, e in enumerate(monomial) if e)


def ideal_dimension(basis: GroebnerBasis, variables: Optional[Sequence[int]] = None) -> int:
    """
    Krull dimension of k[variables] / I from the leading monomials.

    Returns -1 for the unit ideal.
    """
    if basis.is_unit():
        return -1
    pool = list(range(basis.ring.ngens)) if variables is None else list(variables)
    supports = [_support(m) for m in basis.leading_monomials()]
    for size in range(len(pool), -1, -1):
        for subset in combinations(pool, size):
            chosen = set(subset)
            if not any(s <= chosen for s in supports):
                return size
    return 0


def quotient_dimension(basis: GroebnerBasis, variables: Optional[Sequence[int]] = None) -> Optional[int]:
    """
    Vector-space dimension of k[variables] / I, or None when it is infinite.

    Generators must only involve the listed variables.
    """
    if basis.is_unit():
        return 0
    pool = list(range(basis.ring.ngens)) if variables is None else list(variables)
    lms = basis.leading_monomials()
    for i in pool:
        if not any(_support(m) == {i} for m in lms):
            return None
    n = basis.ring.ngens

    def standard(m) -> bool:
        return not any(all(a >= b for a, b in zip(m, lm)) for lm in lms)

    start = (0,) * n
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for m in frontier:
            for i in pool:
                cand = list(m)
                cand[i] += 1
                cand = tuple(cand)
                if cand not in seen and standard(cand):
                    seen.add(cand)
                    nxt.append(cand)
        frontier = nxt
    return len(seen)


# Points on strata ------------------------------------------------------------

@dataclass
class ChartPoints:
    """Points of P(w) whose nonzero coordinates are exactly `support`."""
    support: Tuple[int, ...]
    stabilizer: int
    chart: int
    chart_weight: int
    ring: WeightedRing
    placement: Dict[int, int]
    basis: GroebnerBasis
    slice_count: int
    aux: Tuple[int, ...]

    @property
    def count(self) -> int:
        return points_on_slice(self.slice_count, self.stabilizer, self.chart_weight)


@dataclass
class PointCluster:
    """Points sharing support and equivariant Jacobian data."""
    support: Tuple[int, ...]
    r: int
    count: int
    rank: int
    consumed: Tuple[int, ...]

    def to_dict(self) -> Dict:
        return {'support': list(self.support), 'r': self.r, 'count': self.count,
                'rank': self.rank, 'consumed': list(self.consumed)}


@dataclass
class JacobianRank:
    """Jacobian data at one point fixed by mu_r."""
    rank: int
    consumed: Tuple[int, ...]
    transverse: Tuple[int, ...]


def _chart_ring(system: EquationSystem, support: Tuple[int, ...], chart: int, n_aux: int):
    kept = [i for i in support if i != chart]
    names = [system.ring.names[i] for i in kept] + [f"_z{m}" for m in range(n_aux)]
    weights = [system.weights[i] for i in kept] + [1] * n_aux
    ring = WeightedRing(names, weights, system.p)
    placement = {i: pos for pos, i in enumerate(kept)}
    aux = tuple(range(len(kept), len(kept) + n_aux))
    return ring, placement, aux


def closed_cone_dimension(system: EquationSystem, indices: Sequence[int], budget: Budget) -> int:
    """Affine dimension of X restricted to the coordinate subspace on `indices` (others zero)."""
    indices = tuple(indices)
    names = [system.ring.names[i] for i in indices]
    ring = WeightedRing(names, [system.weights[i] for i in indices], system.p)
    placement = {i: pos for pos, i in enumerate(indices)}
    restricted = [restrict(f, ring, placement) for f in system.polynomials]
    if not any(restricted):
        return len(indices)
    basis = groebner(restricted, ring, budget)
    return ideal_dimension(basis)


def support_points(system: EquationSystem, support: Tuple[int, ...], budget: Budget) -> Optional[ChartPoints]:
    """
    Points whose nonzero coordinates are exactly `support`.

    Returns None when there are none.

    Raises:
        NotZeroDimensional: infinitely many such points
    """
    support = tuple(sorted(support))
    chart = support[0]
    g = 0
    for i in support:
        g = gcd(g, system.weights[i])
    ring, placement, aux = _chart_ring(system, support, chart, system.codim + 2)
    polys = [restrict(f, ring, placement, ones=(chart,)) for f in system.polynomials]
    localizer = ring.gens[aux[0]]
    for i in support:
        if i != chart:
            localizer = localizer * ring.gens[placement[i]]
    polys.append(localizer - 1)
    basis = groebner(polys, ring, budget)
    if basis.is_unit():
        return None
    used = list(placement.values()) + [aux[0]]
    dim = quotient_dimension(basis, used)
    if dim is None:
        raise NotZeroDimensional(g, ideal_dimension(basis, used))
    return ChartPoints(support=support, stabilizer=g, chart=chart, chart_weight=system.weights[chart],
                       ring=ring, placement=placement, basis=basis, slice_count=dim, aux=aux)


def zero_dim_points(system: EquationSystem, indices: Sequence[int], budget: Budget,
                    exact_stabilizer: Optional[int] = None) -> List[ChartPoints]:
    """
    All points of X on the coordinate stratum spanned by `indices`.

    Points are grouped by support. With exact_stabilizer set, only supports
    whose weights have exactly that gcd are kept.

    Raises:
        NotZeroDimensional: the stratum meets X in positive dimension
    """
    indices = tuple(sorted(indices))
    r = 0
    for i in indices:
        r = gcd(r, system.weights[i])
    dim = closed_cone_dimension(system, indices, budget)
    if dim >= 2:
        raise NotZeroDimensional(exact_stabilizer or r, dim - 1)
    if dim <= 0:
        return []
    empty: List[frozenset] = []
    found: List[ChartPoints] = []
    for size in range(len(indices), 0, -1):
        for support in combinations(indices, size):
            key = frozenset(support)
            if any(key <= e for e in empty):
                continue
            if size < len(indices) and closed_cone_dimension(system, support, budget) <= 0:
                empty.append(key)
                continue
            g = 0
            for i in support:
                g = gcd(g, system.weights[i])
            if exact_stabilizer is not None and g != exact_stabilizer:
                continue
            pts = support_points(system, support, budget)
            if pts is not None:
                found.append(pts)
    return found


def points_on_slice(slice_count: int, stabilizer: int, chart_weight: int) -> int:
    """
    Points of P(w) behind `slice_count` points of the slice x_chart = 1.

    Each point with stabilizer mu_g has chart_weight / g preimages.

    Raises:
        CasError: the slice count is not a multiple of chart_weight / g
    """
    total = slice_count * stabilizer
    if total % chart_weight:
        raise CasError(f"{slice_count} slice points with stabilizer {stabilizer} "
                       f"do not form orbits of size {chart_weight // gcd(chart_weight, stabilizer)}")
    return total // chart_weight


def _ground_inverse(ring: WeightedRing, constant):
    return ring.ring.ground_new(ring.domain.quo(ring.domain.one, constant))


def _eliminate(points: ChartPoints, basis: GroebnerBasis, matrix: List[List], aux_next: int,
               budget: Budget) -> List[Tuple[GroebnerBasis, int, int]]:
    """
    Rank of `matrix` over the chart quotient, split by which pivots vanish.

    A pivot that is a unit of the quotient is eliminated fraction free; any
    other pivot splits into its zero locus and the locus where an auxiliary
    variable inverts it.
    """
    if basis.is_unit():
        return []
    ring = points.ring
    one = ring.ring.one
    reduced = [[basis.reduce(e) for e in row] for row in matrix]
    pivot = None
    for i, row in enumerate(reduced):
        for j, e in enumerate(row):
            if e:
                pivot = (i, j)
                break
        if pivot:
            break
    if pivot is None:
        return [(basis, 0, aux_next)]
    i, j = pivot
    e = reduced[i][j]

    def schur(scale, inverse):
        out = []
        for k, row in enumerate(reduced):
            if k == i:
                continue
            factor = row[j] * inverse
            out.append([scale * row[l] - factor * reduced[i][l] for l in range(len(row)) if l != j])
        return out

    def ranked(branches):
        return [(b, rank + 1, nxt) for b, rank, nxt in branches]

    if e.is_ground:
        return ranked(_eliminate(points, basis, schur(one, _ground_inverse(ring, e.LC)), aux_next, budget))

    gens = list(basis.generators)
    vanishing = groebner(gens + [e], ring, budget)
    if vanishing.is_unit():
        return ranked(_eliminate(points, basis, schur(e, one), aux_next, budget))

    results = _eliminate(points, vanishing, reduced, aux_next, budget)
    if aux_next >= len(points.aux):
        raise CasError("ran out of auxiliary variables while splitting Jacobian ranks")
    z = ring.gens[points.aux[aux_next]]
    inverted = groebner(gens + [z * e - 1], ring, budget)
    results.extend(ranked(_eliminate(points, inverted, schur(one, z), aux_next + 1, budget)))
    return results


def jacobian_profiles(system: EquationSystem, points: ChartPoints, budget: Budget) -> List[PointCluster]:
    """
    Equivariant Jacobian data at every point of a ChartPoints set.

    The Jacobian splits into blocks by residue class mod r (rows: equations
    with d_j = rho, columns: variables with w_i = rho); class rho consumes
    rank_rho copies of rho.

    Raises:
        RankDeficient: some point has total rank below the codimension
    """
    r = points.stabilizer
    ring = points.ring
    weights = system.weights
    residues = sorted({w % r for w in weights} | {d % r for d in system.degrees})
    blocks = []
    for rho in residues:
        rows = [j for j, d in enumerate(system.degrees) if d % r == rho]
        cols = [i for i, w in enumerate(weights) if w % r == rho]
        if rows and cols:
            blocks.append((rho, rows, cols))

    def entry(j, i):
        return restrict(system.jacobian[j][i], ring, points.placement, ones=(points.chart,))

    branches = [(points.basis, {}, 1)]
    for rho, rows, cols in blocks:
        matrix = [[entry(j, i) for i in cols] for j in rows]
        nxt = []
        for basis, ranks, aux_next in branches:
            for split, rank, aux_after in _eliminate(points, basis, matrix, aux_next, budget):
                new_ranks = dict(ranks)
                if rank:
                    new_ranks[rho] = rank
                nxt.append((split, new_ranks, aux_after))
        branches = nxt

    clusters: Dict[Tuple[int, ...], int] = {}
    total = 0
    for basis, ranks, aux_after in branches:
        used = list(points.placement.values()) + list(points.aux[:aux_after])
        dim = quotient_dimension(basis, used)
        if not dim:
            continue
        count = points_on_slice(dim, r, weights[points.chart])
        rank = sum(ranks.values())
        if rank < system.codim:
            raise RankDeficient(rank, system.codim, {
                'support': [system.ring.names[i] for i in points.support],
                'r': r, 'points': count,
            })
        consumed = tuple(sorted(rho for rho, k in ranks.items() for _ in range(k)))
        clusters[consumed] = clusters.get(consumed, 0) + count
        total += dim
    if total != points.slice_count:
        logger.warning(f"Jacobian split covers {total} of {points.slice_count} chart points "
                       f"on support {points.support}")
    return [PointCluster(points.support, r, count, system.codim, consumed)
            for consumed, count in sorted(clusters.items())]


def transverse_residues(weights: Sequence[int], r: int, consumed: Sequence[int]) -> Tuple[int, ...]:
    """All weights mod r, minus the consumed residues, minus one 0 for the orbit direction."""
    pool = [w % r for w in weights]
    for rho in list(consumed) + [0]:
        if rho not in pool:
            raise CasError(f"residue {rho} consumed twice mod {r}")
        pool.remove(rho)
    return tuple(sorted(pool))


def rank_mod_p(matrix: Sequence[Sequence[int]], p: int) -> int:
    """Rank of an integer matrix over F_p (over QQ when p = 0)."""
    rows = [list(row) for row in matrix if len(row)]
    if not rows or not rows[0]:
        return 0
    if not p:
        return Matrix(rows).rank()
    a = np.array(rows, dtype=np.int64) % p
    rank = 0
    n_rows, n_cols = a.shape
    for col in range(n_cols):
        pivot = next((k for k in range(rank, n_rows) if a[k, col]), None)
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        inv = pow(int(a[rank, col]), -1, p)
        a[rank] = (a[rank] * inv) % p
        for k in range(n_rows):
            if k != rank and a[k, col]:
                a[k] = (a[k] - a[k, col] * a[rank]) % p
        rank += 1
        if rank == n_rows:
            break
    return rank


def evaluate(poly, ring: WeightedRing, point: Sequence[int]) -> int:
    p = ring.p
    total = 0
    for monom, coeff in poly.iterterms():
        value = ring.to_int(coeff)
        for x, e in zip(point, monom):
            if e:
                value = value * pow(int(x), e, p) if p else value * int(x) ** e
        total += value
    return total % p if p else total


def equivariant_jacobian_rank(system: EquationSystem, point: Sequence[int], r: int) -> JacobianRank:
    """
    Jacobian rank at an explicit point fixed by mu_r.

    Raises:
        ValueError: the point is not on X or not fixed by mu_r
        RankDeficient: rank below the codimension
    """
    ring = system.ring
    weights = system.weights
    p = ring.p
    if any(x % p if p else x for x, w in zip(point, weights) if w % r):
        raise ValueError(f"point is not fixed by mu_{r}")
    if any(evaluate(f, ring, point) for f in system.polynomials):
        raise ValueError("point does not lie on X")
    values = [[evaluate(entry, ring, point) for entry in row] for row in system.jacobian]
    for j, d in enumerate(system.degrees):
        for i, w in enumerate(weights):
            if (d - w) % r and values[j][i]:
                raise CasError(f"equivariance violated at entry ({j}, {i})")
    consumed = []
    total = 0
    for rho in sorted({w % r for w in weights}):
        rows = [j for j, d in enumerate(system.degrees) if d % r == rho]
        cols = [i for i, w in enumerate(weights) if w % r == rho]
        if not rows or not cols:
            continue
        k = rank_mod_p([[values[j][i] for i in cols] for j in rows], p)
        consumed.extend([rho] * k)
        total += k
    if total < system.codim:
        raise RankDeficient(total, system.codim, {'point': list(point), 'r': r})
    consumed = tuple(sorted(consumed))
    return JacobianRank(total, consumed, transverse_residues(weights, r, consumed))
