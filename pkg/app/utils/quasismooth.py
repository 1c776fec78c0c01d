"""
Quasismoothness certificates for general family members.

Stage 1 checks the Jacobian rank at every coordinate point of X and at every
point of every zero-dimensional stratum intersection. Stage 2 shows that
the singular locus of the affine cone is the vertex. The cone minus the
vertex is cut into disjoint charts on which X is a complete intersection of
solved minors; after eliminating solved variables each chart gets the
incidence system g = 0, lambda^T J = 0 with lambda normalized, whose zero
set projects onto the rank-deficient locus of the Jacobian. A unit Groebner
basis on every chart certifies the member.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from .basket import (
    hall_surplus, strata_of, stratum_detail, torus_locus, transverse_rows,
)
from .cas import (
    Budget, BudgetExceeded, EquationSystem, LocalChart, NotZeroDimensional, RankDeficient,
    WeightedRing, build_equations, evaluate, groebner, ideal_dimension, local_charts, rank_mod_p,
    restrict, solve_linear, DEFAULT_EXTRA_TERMS, DEFAULT_PRIME,
)
from .formats import FORMAT_CI, FormatFamily

logger = logging.getLogger(__name__)

VERIFIED = 'VERIFIED'
REFUTED = 'REFUTED'
INCONCLUSIVE = 'INCONCLUSIVE'

MODE_STRATA = 'strata'
MODE_FULL = 'full'
QS_MODES = ('off', MODE_STRATA, MODE_FULL)

METHOD_STRATA = 'strata-check'
METHOD_FULL = 'strata-check+jacobian-ideal'
METHOD_COMBINATORIAL = 'ci-monomial-coverage'


@dataclass
class QsCertificate:
    """Outcome of a quasismoothness check, with the evidence behind it."""
    status: str
    method: str
    p: Optional[int] = None
    seed: Optional[int] = None
    budget: Dict = field(default_factory=dict)
    witness: Optional[Dict] = None
    evidence: List[Dict] = field(default_factory=list)
    reason: str = ''

    def __post_init__(self):
        if self.status not in (VERIFIED, REFUTED, INCONCLUSIVE):
            raise ValueError(f"unknown certificate status {self.status!r}")
        if self.status == REFUTED and not self.witness:
            raise ValueError("a REFUTED certificate needs a witness")

    def to_dict(self) -> Dict:
        return {
            'status': self.status,
            'method': self.method,
            'p': self.p,
            'seed': self.seed,
            'budget': dict(self.budget),
            'witness': self.witness,
            'evidence': list(self.evidence),
            'reason': self.reason,
        }


def jacobian_rank_at(system: EquationSystem, point) -> int:
    ring = system.ring
    values = [[evaluate(entry, ring, point) for entry in row] for row in system.jacobian]
    return rank_mod_p(values, system.p)


def coordinate_witness(system: EquationSystem) -> Optional[Dict]:
    """A coordinate point of X where the Jacobian drops rank, if there is one."""
    n = system.ring.ngens
    for k in range(n):
        point = [0] * n
        point[k] = 1
        if any(evaluate(f, system.ring, point) for f in system.polynomials):
            continue
        rank = jacobian_rank_at(system, point)
        if rank < system.codim:
            return {'point': {system.ring.names[k]: 1}, 'rank': rank, 'codim': system.codim,
                    'stage': 1}
    return None


def stage_one(system: EquationSystem, budget: Budget) -> Tuple[Optional[Dict], List[Dict]]:
    """
    Jacobian rank at coordinate points and on zero-dimensional strata.

    Returns:
        (witness or None, evidence per stratum)
    """
    witness = coordinate_witness(system)
    if witness:
        return witness, []
    evidence = []
    for stratum in strata_of(system.weights):
        try:
            detail, _ = stratum_detail(system, stratum, budget)
        except NotZeroDimensional as exc:
            evidence.append({'r': stratum.r, 'dimension': exc.dimension, 'checked': False})
            continue
        except RankDeficient as exc:
            witness = dict(exc.witness)
            witness.update({'rank': exc.rank, 'codim': exc.codim, 'stage': 1})
            return witness, evidence
        if detail.points:
            evidence.append({'r': stratum.r, 'points': detail.points, 'checked': True})
    return None, evidence


def _chart_is_clean(chart: LocalChart, budget: Budget) -> Tuple[bool, int, int]:
    """
    Singular points of the cone on one chart, for every lambda chart.

    Variables solved for by a local equation are eliminated first. The
    incidence system is then: local equations, constraints, and
    sum_j lambda_j grad g_j = 0 with lambda_m = 1, lambda_j = 0 for j < m.

    Returns:
        (clean, dimension of the first nonempty incidence locus, number of
        eliminated variables)
    """
    ring = chart.ring
    protected = set()
    for h in chart.constraints:
        for mono in h.itermonoms():
            if sum(mono) == 1:
                protected.add(mono.index(1))
    candidates = [v for v in range(ring.ngens) if v not in protected]
    equations, constraints, eliminated = solve_linear(chart.equations, chart.constraints, ring, candidates)
    if any(g.is_ground and g for g in equations + constraints):
        return True, -1, len(eliminated)
    c = len(equations)
    if not c:
        return True, -1, len(eliminated)
    remaining = [v for v in range(ring.ngens) if v not in eliminated]
    incidence = WeightedRing(list(ring.names) + [f"_l{j}" for j in range(c)],
                             list(ring.weights) + [1] * c, ring.p)
    placement = {v: v for v in range(ring.ngens)}
    lift = [restrict(g, incidence, placement) for g in equations]
    gradients = [[restrict(g.diff(ring.gens[v]), incidence, placement) for v in remaining] for g in equations]
    base = lift + [restrict(h, incidence, placement) for h in constraints]
    for m in range(c):
        lam = {m: incidence.ring.one}
        for j in range(m + 1, c):
            lam[j] = incidence.gens[ring.ngens + j]
        combos = []
        for pos in range(len(remaining)):
            combo = incidence.ring.zero
            for j in range(m, c):
                combo += lam[j] * gradients[j][pos]
            combos.append(combo)
        gens, _, solved = solve_linear(base + combos, [], incidence)
        if any(g.is_ground and g for g in gens):
            continue
        free = [v for v in remaining + [ring.ngens + j for j in range(m + 1, c)] if v not in solved]
        gens = [g for g in gens if g]
        if not gens:
            return False, len(free), len(eliminated)
        basis = groebner(gens, incidence, budget)
        if not basis.is_unit():
            return False, ideal_dimension(basis, free), len(eliminated)
    return True, -1, len(eliminated)


def stage_two(system: EquationSystem, budget: Budget) -> Tuple[Optional[bool], List[Dict], Optional[Dict]]:
    """
    Certify that the singular locus of the cone is the vertex.

    Returns:
        (True if certified, False if a singular point exists, None if the
        charts do not cover X; evidence; witness)
    """
    if system.kind != FORMAT_CI:
        entries = [e for e in system.entries if e]
        cover = groebner(entries, system.ring, budget)
        if ideal_dimension(cover) > 0:
            return None, [{'entries_cover': False, 'dimension': ideal_dimension(cover)}], None
    evidence = []
    for chart in local_charts(system):
        clean, dim, eliminated = _chart_is_clean(chart, budget)
        evidence.append({'chart': chart.label, 'clean': clean, 'eliminated': eliminated})
        if not clean:
            return False, evidence, {'chart': chart.label, 'dimension': dim, 'stage': 2}
    return True, evidence, None


def verify_system(system: EquationSystem, budget: Optional[Budget] = None,
                  mode: str = MODE_FULL) -> QsCertificate:
    """Certificate for one explicit member."""
    if mode not in (MODE_STRATA, MODE_FULL):
        raise ValueError(f"unknown quasismoothness mode {mode!r}")
    budget = budget or Budget()
    method = METHOD_FULL if mode == MODE_FULL else METHOD_STRATA

    def certificate(status, **kwargs):
        return QsCertificate(status=status, method=method, p=system.p, seed=system.seed,
                             budget=budget.to_dict(), **kwargs)

    try:
        witness, evidence = stage_one(system, budget)
        if witness:
            logger.warning(f"member is singular at {witness}")
            return certificate(REFUTED, witness=witness, evidence=evidence,
                               reason='Jacobian rank drops at a stratum point')
        if mode == MODE_STRATA:
            return certificate(INCONCLUSIVE, evidence=evidence,
                               reason='strata checked, singular-locus ideal not computed')
        covered, charts, witness = stage_two(system, budget)
    except BudgetExceeded as exc:
        logger.warning(f"quasismoothness budget exhausted: {exc}")
        return certificate(INCONCLUSIVE, reason=exc.reason)
    evidence = evidence + charts
    if covered is None:
        return certificate(INCONCLUSIVE, evidence=evidence, reason='format entries do not cover X')
    if not covered:
        logger.warning(f"singular locus meets chart {witness['chart']}")
        return certificate(REFUTED, witness=witness, evidence=evidence,
                           reason='singular locus of the cone is larger than the vertex')
    return certificate(VERIFIED, evidence=evidence, reason='singular locus of the cone is the vertex')


def verify_quasismooth(family: FormatFamily, seed: int, p: int = DEFAULT_PRIME,
                       budget: Optional[Budget] = None, mode: str = MODE_FULL,
                       extra_terms: int = DEFAULT_EXTRA_TERMS) -> QsCertificate:
    """Certificate for the general member drawn with `seed`."""
    system = build_equations(family, seed, p, extra_terms)
    return verify_system(system, budget, mode)


def ci_coverage_holds(family: FormatFamily) -> Tuple[bool, Optional[Tuple[int, ...]]]:
    """
    Monomial-coverage test for general complete intersections.

    For every nonempty support T: the forms with monomials in T cut a smooth
    locus Z_T of the torus of T, and the remaining equations must satisfy
    Hall's condition with surplus dim Z_T on the variables outside T.

    Returns:
        (holds, first failing support)
    """
    weights = family.ambient.weights
    degrees = family.descriptor.degrees
    n = len(weights)
    for size in range(1, n + 1):
        for support in combinations(range(n), size):
            locus = torus_locus(weights, degrees, support)
            if locus.dimension is None:
                continue
            rows = transverse_rows(weights, degrees, locus)
            if not hall_surplus(rows, locus.dimension):
                return False, support
    return True, None


def ci_quasismooth_general(family: FormatFamily, seed: Optional[int] = None, p: int = DEFAULT_PRIME,
                           budget: Optional[Budget] = None, defer: bool = True,
                           mode: str = MODE_FULL) -> QsCertificate:
    """
    Quasismoothness of a general complete intersection from its monomials.

    The test is only sufficient: when it fails the CAS certificate is
    computed instead (defer=True) or the result is INCONCLUSIVE.
    """
    if family.kind != FORMAT_CI:
        raise ValueError(f"ci_quasismooth_general called on {family.kind} family")
    holds, support = ci_coverage_holds(family)
    if holds:
        return QsCertificate(status=VERIFIED, method=METHOD_COMBINATORIAL, p=None, seed=None,
                             reason='every torus stratum is covered')
    failing = [family.ambient.weights[i] for i in support]
    logger.info(f"{family}: coverage fails on weights {failing}, deferring")
    if defer and seed is not None:
        return verify_quasismooth(family, seed, p, budget, mode)
    return QsCertificate(status=INCONCLUSIVE, method=METHOD_COMBINATORIAL,
                         reason=f"coverage fails on weights {failing}")
