"""
Tests for the polynomial kernel: rings, Groebner bases, members and models.
"""

from itertools import combinations

import pytest

from app.utils.catalog import SEGRE_MODEL, worked
from app.utils.cas import (
    Budget, BudgetExceeded, CasError, ModelFormatError, WeightedRing,
    build_equations, equivariant_jacobian_rank, groebner, ideal_dimension, is_weighted_homogeneous,
    load_model, local_charts, monomials_of_degree, pfaffians, points_on_slice, quotient_dimension,
    rank_mod_p, restrict, solve_linear,
)
from app.utils.formats import ci_family

CI_MODEL = """
format CI
variables x0:1 x1:1 x2:1 x3:1 x4:1 x5:1 x6:1
equations
x0*x1
x2*x3
"""


@pytest.fixture
def plane():
    return WeightedRing(['x', 'y'], [1, 2], p=32003)


@pytest.fixture
def x45():
    """X_{4,5} in P(1,1,1,1,1,2,3): one 1/3 point at the x6 vertex."""
    return ci_family((4, 5), (1, 1, 1, 1, 1, 2, 3))


class TestBudget:
    """Test the shared computation allowance."""

    def test_spair_budget(self):
        budget = Budget(max_spairs=0)
        with pytest.raises(BudgetExceeded) as info:
            budget.charge()
        assert info.value.reason == "S-pair budget exhausted"

    def test_time_budget(self):
        budget = Budget(max_seconds=-1.0)
        with pytest.raises(BudgetExceeded) as info:
            budget.charge()
        assert info.value.reason == "time budget exhausted"

    def test_to_dict(self):
        assert Budget(max_spairs=10, max_seconds=5.0).to_dict() == {'spairs': 0, 'max_spairs': 10, 'max_seconds': 5.0}


class TestGroebner:
    """Test Groebner bases and the dimensions read from them."""

    def test_unit_ideal(self, plane):
        x, y = plane.gens
        basis = groebner([x * y - 1, x], plane)
        assert basis.is_unit()
        assert ideal_dimension(basis) == -1
        assert quotient_dimension(basis) == 0

    def test_constant_generator(self, plane):
        assert groebner([plane.one() * 3], plane).is_unit()

    def test_maximal_ideal(self, plane):
        x, y = plane.gens
        basis = groebner([x ** 2 - y, x], plane)
        assert basis.contains(y)
        assert ideal_dimension(basis) == 0
        assert quotient_dimension(basis) == 1

    def test_monomial_ideal(self, plane):
        x, y = plane.gens
        basis = groebner([x ** 2, y ** 3], plane)
        assert quotient_dimension(basis) == 6

    def test_curve(self, plane):
        x, y = plane.gens
        basis = groebner([x ** 2 - y], plane)
        assert ideal_dimension(basis) == 1
        assert quotient_dimension(basis) is None

    def test_plucker_relations(self):
        """Test the Pfaffians of a generic skew matrix cut out the cone over Gr(2,5)."""
        pairs = list(combinations(range(5), 2))
        ring = WeightedRing([f"p{i}{j}" for i, j in pairs], [1] * 10, p=32003)
        m = [[ring.ring.zero] * 5 for _ in range(5)]
        for g, (i, j) in zip(ring.gens, pairs):
            m[i][j] = g
            m[j][i] = -g
        basis = groebner(pfaffians(m), ring)
        leading = basis.leading_monomials()

        def normal(monomial):
            return not any(all(a >= b for a, b in zip(monomial, lm)) for lm in leading)

        counts = [sum(1 for mono in monomials_of_degree((1,) * 10, d) if normal(mono)) for d in range(4)]
        assert counts == [1, 10, 50, 175]
        assert ideal_dimension(basis) == 7

    def test_budget_propagates(self, plane):
        x, y = plane.gens
        with pytest.raises(BudgetExceeded):
            groebner([x ** 3 - y, x * y - 1, y ** 2 - x], plane, Budget(max_spairs=0))


class TestMonomials:

    def test_monomials_of_degree(self):
        assert monomials_of_degree((1, 2), 4) == [(0, 2), (2, 1), (4, 0)]

    def test_no_monomials(self):
        assert monomials_of_degree((2, 4), 3) == []

    def test_limit(self):
        assert len(monomials_of_degree((1, 1, 1), 5, limit=4)) == 4


class TestRank:
    """Test exact ranks over F_p and QQ."""

    def test_rank_mod_p(self):
        assert rank_mod_p([[1, 2], [2, 4]], 7) == 1
        assert rank_mod_p([[1, 0], [0, 1]], 32003) == 2

    def test_rank_drops_mod_p(self):
        assert rank_mod_p([[1, 1], [1, 8]], 7) == 1
        assert rank_mod_p([[1, 1], [1, 8]], 0) == 2

    def test_empty_matrix(self):
        assert rank_mod_p([], 7) == 0


class TestMembers:
    """Test general members drawn from a seed."""

    def test_homogeneous_equations(self, x36_40):
        system = build_equations(x36_40, seed=1)
        assert system.degrees == (36, 40)
        assert all(is_weighted_homogeneous(f, system.weights) for f in system.polynomials)

    def test_seed_is_deterministic(self, x36_40):
        first = build_equations(x36_40, seed=7)
        second = build_equations(x36_40, seed=7)
        assert [f.terms() for f in first.polynomials] == [f.terms() for f in second.polynomials]

    def test_equivariant_rank_at_vertex(self, x45):
        """Test the 1/3 point consumes residues 1 and 2 and leaves 1/3(1,1,1,1)."""
        system = build_equations(x45, seed=3)
        data = equivariant_jacobian_rank(system, [0, 0, 0, 0, 0, 0, 1], 3)
        assert data.rank == 2
        assert data.consumed == (1, 2)
        assert data.transverse == (1, 1, 1, 1)

    def test_point_not_on_member(self, x45):
        system = build_equations(x45, seed=3)
        with pytest.raises(ValueError):
            equivariant_jacobian_rank(system, [1, 0, 0, 0, 0, 0, 0], 1)


class TestModels:
    """Test explicit model files."""

    def test_segre_model(self):
        with open(SEGRE_MODEL, 'r', encoding='utf-8') as f:
            system = load_model(f.read())
        assert system.kind == 'P2P2'
        assert system.codim == 4
        assert len(system.polynomials) == 9
        assert system.degrees[0] == 9
        assert system.weights == (2, 3, 3, 3, 4, 5, 5, 7, 11)

    def test_zero_entry_weight_inferred(self):
        with open(SEGRE_MODEL, 'r', encoding='utf-8') as f:
            text = f.read().replace('x21 f6  x23', 'x21 0 x23')
        system = load_model(text)
        assert not system.entries[4]
        assert system.degrees[0] == 9

    def test_ci_model(self):
        system = load_model(CI_MODEL)
        assert system.kind == 'CI'
        assert system.degrees == (2, 2)

    def test_unknown_format(self):
        with pytest.raises(ModelFormatError):
            load_model("format XYZ\nvariables x:1\n")

    def test_variable_without_weight(self):
        with pytest.raises(ModelFormatError):
            load_model("format CI\nvariables x y\nequations\nx*y\nx^2\n")


class TestSliceCounts:
    """Test points of P(w) recovered from a slice x_k = 1."""

    def test_orbits(self):
        assert points_on_slice(6, 1, 3) == 2
        assert points_on_slice(14, 3, 3) == 14

    def test_remainder_rejected(self):
        with pytest.raises(CasError):
            points_on_slice(5, 1, 3)


class TestLinearSolving:
    """Test elimination of solved variables."""

    def test_substitutes_into_passengers(self):
        ring = WeightedRing(['x', 'y', 'z'], [1, 1, 1])
        x, y, z = ring.gens
        pivots, passengers, eliminated = solve_linear([x - y ** 2, y * z - 1], [x * z], ring)
        assert eliminated == [0]
        assert pivots == [y * z - 1]
        assert passengers == [y ** 2 * z]

    def test_scaled_pivot(self):
        ring = WeightedRing(['x', 'y'], [1, 1])
        x, y = ring.gens
        pivots, passengers, eliminated = solve_linear([2 * x - y ** 2], [x - 1], ring)
        assert pivots == []
        assert eliminated == [0]
        assert 2 * passengers[0] == y ** 2 - 2

    def test_candidates_restrict_variables(self):
        ring = WeightedRing(['x', 'y'], [1, 1])
        x, y = ring.gens
        _, _, eliminated = solve_linear([x - y], [], ring, candidates=[1])
        assert eliminated == [1]

    def test_nonlinear_pivot_kept(self):
        ring = WeightedRing(['x', 'y'], [1, 1])
        x, y = ring.gens
        pivots, _, eliminated = solve_linear([x * y - 1], [], ring)
        assert pivots == [x * y - 1]
        assert eliminated == []


class TestLocalCharts:
    """Test the charts the singular-locus computation runs on."""

    def test_segre_model_charts(self):
        with open(SEGRE_MODEL, 'r', encoding='utf-8') as f:
            system = load_model(f.read())
        charts = local_charts(system)
        assert [c.label for c in charts] == list(system.entry_labels)
        assert [len(c.equations) for c in charts] == [4, 4, 4, 4, 5, 4, 5, 4, 5]
        assert [len(c.constraints) for c in charts] == list(range(9))
        # x11 is a variable: the slice x11 = 1 drops it
        assert 'x11' not in charts[0].ring.names
        # f6 is a form: inverted by an extra variable
        assert charts[4].ring.names[-1] == '_z'

    def test_zero_entry_skipped(self):
        with open(SEGRE_MODEL, 'r', encoding='utf-8') as f:
            system = load_model(f.read().replace('x21 f6  x23', 'x21 0 x23'))
        labels = [c.label for c in local_charts(system)]
        assert 'x22' not in labels
        assert len(labels) == 8

    def test_solved_minors_vanish_on_member(self):
        """Test the local equations on the x11 slice lie in the format ideal."""
        with open(SEGRE_MODEL, 'r', encoding='utf-8') as f:
            system = load_model(f.read())
        chart = local_charts(system)[0]
        x11 = system.ring.index('x11')
        placement = {i: pos for pos, i in enumerate(i for i in range(system.ring.ngens) if i != x11)}
        ideal = groebner([restrict(f, chart.ring, placement, ones=(x11,)) for f in system.polynomials], chart.ring)
        assert all(ideal.contains(g) for g in chart.equations)

    def test_ci_charts(self):
        system = load_model(CI_MODEL)
        charts = local_charts(system)
        assert [c.label for c in charts] == list(system.ring.names)
        assert [len(c.constraints) for c in charts] == list(range(7))
        assert all(len(c.equations) == 2 for c in charts)

    def test_gr_charts(self):
        system = build_equations(worked('gr25-k2').family, seed=1)
        charts = local_charts(system)
        assert charts
        assert all(len(c.equations) == 3 + (c.ring.names[-1] == '_z') for c in charts)
