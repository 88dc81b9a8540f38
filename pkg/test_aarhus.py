"""Tests for strut matrices, gluing and the zmin pipeline"""

from fractions import Fraction

import pytest
from hypothesis import assume, given, settings as hsettings, strategies as st

from app.config import Settings
from app.errors import (
    CertificateRefused,
    GuardExceededError,
    NonTreeTermError,
    SchemaError,
    SingularMatrixError,
)
from app.services import aarhus, clasper
from app.services.aarhus import ForestTerm, LeggedSeries, StrutMatrix
from app.services.diagrams import ColoredTree, TreeVector, canonicalize, star, vortex

HOPF = StrutMatrix.from_rows(["x", "y"], [[0, 1], [1, 0]])


def block(lk):
    m = len(lk)
    eye = [[int(i == j) for j in range(m)] for i in range(m)]
    zero = [[0] * m for _ in range(m)]
    return [z + i for z, i in zip(zero, eye)] + [i + row for i, row in zip(eye, lk)]


def two_y_series(Q=HOPF):
    a = ColoredTree.from_rooted("x", (1, 2))
    b = ColoredTree.from_rooted("y", (1, 3))
    return LeggedSeries(Q, [ForestTerm((a, b), Fraction(1))], cap=5)


LEG_LABELS = st.sampled_from([1, 2, 3, "x", "y"])
branch_shapes = st.recursive(st.none(), lambda inner: st.tuples(inner, inner), max_leaves=3)


def shape_size(shape):
    return 1 if shape is None else shape_size(shape[0]) + shape_size(shape[1])


def fill_shape(shape, labels):
    it = iter(labels)

    def fill(s):
        if s is None:
            return next(it)
        return (fill(s[0]), fill(s[1]))

    return fill(shape)


def x_legs(tree):
    return sum(1 for _, lab in tree.labels if isinstance(lab, str))


@st.composite
def legged_trees(draw):
    shape = draw(branch_shapes)
    k = shape_size(shape) + 1
    labels = draw(st.lists(LEG_LABELS, min_size=k, max_size=k))
    tree = ColoredTree.from_rooted(labels[0], fill_shape(shape, labels[1:]))
    assume(not (tree.is_strut and x_legs(tree) == 2))
    return tree


@st.composite
def legged_series(draw):
    a, b, c = draw(st.lists(st.integers(-2, 2), min_size=3, max_size=3))
    assume(a * c != b * b)
    terms = []
    for _ in range(draw(st.integers(1, 3))):
        trees = draw(st.lists(legged_trees(), min_size=1, max_size=3))
        assume(sum(x_legs(t) for t in trees) <= 8)
        terms.append(ForestTerm(tuple(trees), Fraction(draw(st.integers(1, 3)))))
    return LeggedSeries(StrutMatrix.from_rows(["x", "y"], [[a, b], [b, c]]), terms, cap=8)


class TestNegativeInverse:
    def test_two_by_two(self):
        assert aarhus.negative_inverse([[0, 1], [1, 0]]).rows() == [[0, -1], [-1, 0]]

    def test_block_identity(self):
        lk = [[0, 1, 0], [1, 0, 2], [0, 2, 1]]
        inverse = aarhus.negative_inverse(block(lk)).rows()
        m = len(lk)
        for i in range(m):
            for j in range(m):
                assert inverse[i][j] == lk[i][j]
                assert inverse[i][m + j] == -int(i == j)
                assert inverse[m + i][j] == -int(i == j)
                assert inverse[m + i][m + j] == 0

    @hsettings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(-3, 3), min_size=6, max_size=6))
    def test_block_identity_random(self, upper):
        a, b, c, d, e, f = upper
        lk = [[a, b, c], [b, d, e], [c, e, f]]
        inverse = aarhus.negative_inverse(block(lk)).rows()
        eye = [[-int(i == j) for j in range(3)] for i in range(3)]
        assert inverse == [row + e_row for row, e_row in zip(lk, eye)] + [e_row + [0, 0, 0] for e_row in eye]

    def test_singular(self):
        with pytest.raises(SingularMatrixError, match="singular strut matrix") as info:
            aarhus.negative_inverse([[0, 0], [0, 0]])
        assert any(info.value.kernel_vector)

    def test_exact_rationals(self):
        assert aarhus.negative_inverse([[2]]).rows() == [[Fraction(-1, 2)]]


class TestStrutMatrix:
    def test_symmetry_required(self):
        with pytest.raises(SchemaError):
            StrutMatrix.from_rows(["x", "y"], [[0, 1], [2, 0]])

    def test_restrict(self):
        Q = StrutMatrix.from_rows(["a", "b", "c"], [[1, 2, 3], [2, 4, 5], [3, 5, 6]])
        sub = Q.restrict(["c", "a"])
        assert sub.labels == ("a", "c")
        assert sub.rows() == [[1, 3], [3, 6]]

    def test_presentation_matrix(self, beta5):
        p = clasper.compile_surgery(clasper.build_clasper(clasper.validate_pattern(beta5)))
        Q = aarhus.strut_matrix(p)
        assert Q.rows() == block([[0] * 3 for _ in range(3)])


class TestLeggedSeries:
    def test_rejects_x_strut(self):
        with pytest.raises(SchemaError):
            LeggedSeries(HOPF, [ForestTerm((ColoredTree.from_rooted("x", "y"),), Fraction(1))], cap=2)

    def test_rejects_unknown_label(self):
        with pytest.raises(SchemaError):
            LeggedSeries(HOPF, [ForestTerm((ColoredTree.from_rooted("z", (1, 2)),), Fraction(1))], cap=2)


class TestGlue:
    def test_two_legs_join(self):
        result = aarhus.glue(two_y_series())
        assert result.value == TreeVector.from_tree(star((1, 2), 1, 3), -1)
        assert result.min_degree == 3
        assert not result.forests

    def test_brute_agrees(self):
        series = two_y_series()
        assert aarhus.brute_glue(series).same_as(aarhus.glue(series))

    @hsettings(max_examples=100, deadline=None)
    @given(legged_series())
    def test_brute_agrees_on_random_series(self, series):
        assert aarhus.brute_glue(series).same_as(aarhus.glue(series))

    def test_brute_on_three_trees(self):
        # only x-x and y-y pairings carry weight, chaining the three trees
        a = ColoredTree.from_rooted("x", (1, 2))
        b = ColoredTree.from_rooted("x", ("y", 3))
        c = ColoredTree.from_rooted("y", (1, 3))
        Q = StrutMatrix.from_rows(["x", "y"], [[1, 0], [0, 1]])
        series = LeggedSeries(Q, [ForestTerm((a, b, c), Fraction(1))], cap=4)
        result = aarhus.brute_glue(series)
        assert result.same_as(aarhus.glue(series))
        assert result.value and not result.forests
        assert result.value.degrees() == [4]

    def test_brute_singular_carries_kernel(self):
        series = two_y_series(StrutMatrix.from_rows(["x", "y"], [[1, 1], [1, 1]]))
        with pytest.raises(SingularMatrixError) as info:
            aarhus.brute_glue(series)
        assert list(info.value.kernel_vector) in ([-1, 1], [1, -1])

    def test_loop_is_dropped(self):
        looped = ColoredTree.from_rooted("x", (1, "y"))
        series = LeggedSeries(HOPF, [ForestTerm((looped,), Fraction(1))], cap=3)
        assert not aarhus.glue(series).value
        assert not aarhus.brute_glue(series).value

    def test_odd_legs_vanish(self):
        lone = ColoredTree.from_rooted("x", (1, 2))
        series = LeggedSeries(HOPF, [ForestTerm((lone,), Fraction(1))], cap=3)
        assert aarhus.glue(series).min_degree is None

    def test_disconnected_gluing_kept_as_forest(self):
        a = ColoredTree.from_rooted("x", (1, 2))
        b = ColoredTree.from_rooted("y", (1, 3))
        c = vortex(1, 2, 3)
        series = LeggedSeries(HOPF, [ForestTerm((a, b, c), Fraction(2))], cap=5)
        result = aarhus.glue(series)
        assert not result.value
        ((key, coeff),) = result.forests.items()
        assert len(key) == 2 and abs(coeff) == 2

    def test_guard(self):
        with pytest.raises(GuardExceededError):
            aarhus.glue(two_y_series(), Settings(max_x_legs=1))
        with pytest.raises(GuardExceededError):
            aarhus.brute_glue(two_y_series(), Settings(max_brute_legs=1))

    def test_non_tree_terms_refused(self):
        series = two_y_series()
        series.non_tree = 1
        with pytest.raises(NonTreeTermError):
            aarhus.glue(series)

    def test_singular_series(self):
        series = two_y_series(StrutMatrix.from_rows(["x", "y"], [[0, 0], [0, 0]]))
        with pytest.raises(SingularMatrixError):
            aarhus.glue(series)


class TestLeadingSeries:
    @pytest.fixture
    def presentation(self, beta5):
        return clasper.compile_surgery(clasper.build_clasper(clasper.validate_pattern(beta5)))

    def test_needs_certificate(self, presentation):
        with pytest.raises(CertificateRefused):
            aarhus.leading_series(presentation)

    def test_beta5_pieces(self, presentation):
        clasper.certify_null(presentation, 1)
        series = aarhus.leading_series(presentation, 5)
        singles = {canonicalize(t.trees[0])[1]: t.coeff for t in series.R if len(t.trees) == 1}
        vortex_rep = canonicalize(vortex("e1", "e3", "e2"))[1]
        assert vortex_rep in singles
        for leaf, (a, b) in zip(["l1", "l2", "l3"], [(1, 2), (1, 3), (2, 3)]):
            sign, rep = canonicalize(ColoredTree.from_rooted(leaf, (a, b)))
            assert singles[rep] == sign
        assert len(series.R) == 2 ** 4 - 1


class TestZmin:
    def test_beta5_pass(self, beta5):
        report = aarhus.zmin(clasper.validate_pattern(beta5))
        assert report.passed
        assert report.min_degree == 5
        assert report.matched_sign == 1
        assert report.lower_degrees_vanish
        assert report.certificate.granted
        assert [name for name, _ in report.stages] == [
            "build", "compile", "certify", "sphere", "series", "integrate", "compare",
        ]

    def test_beta5_oracles(self, beta5):
        report = aarhus.zmin(clasper.validate_pattern(beta5), oracle=True)
        assert report.passed
        assert report.oracle_agrees and report.filtered_agrees

    def test_one_pattern_reduce_route(self, one_pattern_tree):
        q = clasper.validate_n_pattern(one_pattern_tree, 1)
        report = aarhus.zmin(q, route="reduce")
        assert report.reduced is not None and report.reduced.degree == 1
        assert report.passed
        assert report.min_degree == 7

    def test_unknown_route(self, one_pattern_tree):
        q = clasper.validate_n_pattern(one_pattern_tree, 1)
        with pytest.raises(SchemaError) as info:
            aarhus.zmin(q, route="sideways")
        assert info.value.stage == "build"

    def test_cap_above_degree(self, beta5):
        report = aarhus.zmin(clasper.validate_pattern(beta5), cap=6)
        assert report.passed
        assert report.min_degree == 5
        assert report.result.vanishing.get(5) is False

    def test_one_pattern_expand_route(self, one_pattern_tree):
        q = clasper.validate_n_pattern(one_pattern_tree, 1)
        report = aarhus.zmin(q, route="expand")
        assert report.route == "expand" and report.reduced is None
        assert report.passed
        assert report.min_degree == 7

    @pytest.mark.parametrize("degree", [5, 6])
    def test_catalog(self, degree):
        patterns = clasper.pattern_catalog(degree, 3)
        assert patterns
        for pattern in patterns:
            report = aarhus.zmin(pattern, oracle=True)
            assert report.passed, pattern.tree.to_text()
            assert report.filtered_agrees, pattern.tree.to_text()
            assert report.oracle_agrees, pattern.tree.to_text()
