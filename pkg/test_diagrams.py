"""Tests for tree diagrams: construction, AS canonical forms, IHX, eta, dimensions"""

from fractions import Fraction

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from app.config import Settings
from app.errors import InvalidTreeError, NotInternalEdgeError, ResourceLimitError
from app.services import diagrams, linalg
from app.services.diagrams import (
    ColoredTree,
    TreeVector,
    canonicalize,
    dim,
    eta,
    eta_rank,
    ihx_resolve,
    in_relation_span,
    is_zero,
    parse_tree,
    star,
    strut,
    vortex,
)
from app.services.lie import lyndon_reduce


def bodies(max_leaves=5, colors=3):
    leaf = st.integers(min_value=1, max_value=colors)
    return st.recursive(leaf, lambda inner: st.tuples(inner, inner), max_leaves=max_leaves)


class TestConstruction:
    def test_degrees(self, beta5):
        assert strut(1, 2).degree == 1
        assert vortex(1, 2, 3).degree == 2
        assert beta5.degree == 5
        assert len(beta5.univalent) == 6 and len(beta5.trivalent) == 4

    def test_internal_edges(self, beta5):
        assert vortex(1, 2, 3).internal_edges == []
        assert len(beta5.internal_edges) == 3

    def test_parse_forms_agree(self):
        assert canonicalize(parse_tree("1-(2,3)"))[1] == canonicalize(vortex(1, 2, 3))[1]
        assert parse_tree("(1,2,3)").degree == 2

    def test_text_round_trip(self, beta5):
        again = parse_tree(beta5.to_text())
        assert canonicalize(again) == canonicalize(beta5)

    @pytest.mark.parametrize("text", ["1-(2,3", "((1,2),(1,3))", "1-(2,3,4)", "1-(2,3) 4", "1 (2,3)"])
    def test_parse_errors(self, text):
        with pytest.raises(InvalidTreeError):
            parse_tree(text)

    def test_rejects_bad_valence(self):
        with pytest.raises(InvalidTreeError, match="valence"):
            ColoredTree.build({0: (1, 2), 1: (0,), 2: (0,)}, {1: 1, 2: 2})

    def test_rejects_disconnected(self):
        with pytest.raises(InvalidTreeError):
            ColoredTree.from_edges([(0, 1), (2, 3)], {0: 1, 1: 2, 2: 1, 3: 2})

    def test_rejects_cycle(self):
        neighbors = {0: (1, 2, 6), 1: (0, 2, 3), 2: (0, 1, 4), 3: (1,), 4: (2,), 6: (0,)}
        with pytest.raises(InvalidTreeError):
            ColoredTree.build(neighbors, {3: 1, 4: 2, 6: 3})

    def test_from_edges_uses_cyclic_order(self):
        edges = [(0, 1), (0, 2), (0, 3)]
        labels = {1: 1, 2: 2, 3: 3}
        plain = ColoredTree.from_edges(edges, labels, {0: [1, 2, 3]})
        flipped = ColoredTree.from_edges(edges, labels, {0: [1, 3, 2]})
        assert canonicalize(plain)[0] == -canonicalize(flipped)[0]

    def test_from_edges_needs_every_cyclic_order(self):
        edges = [(0, 1), (0, 2), (0, 3)]
        with pytest.raises(InvalidTreeError, match="no cyclic order"):
            ColoredTree.from_edges(edges, {1: 1, 2: 2, 3: 3})
        with pytest.raises(InvalidTreeError, match="not trivalent"):
            ColoredTree.from_edges(edges, {1: 1, 2: 2, 3: 3}, {0: [1, 2, 3], 1: [0]})

    def test_dot_export(self, beta5):
        dot = diagrams.to_dot(beta5)
        assert dot.startswith("graph tree {") and dot.count("--") == len(beta5.edges)


class TestCanonicalize:
    def test_transposition_flips_sign(self):
        s1, r1 = canonicalize(vortex(1, 2, 3))
        s2, r2 = canonicalize(vortex(1, 3, 2))
        assert r1 == r2
        assert s1 == -s2

    def test_cyclic_rotation_keeps_sign(self):
        assert canonicalize(vortex(2, 3, 1)) == canonicalize(vortex(1, 2, 3))

    def test_idempotent(self, beta5):
        sign, rep = canonicalize(beta5)
        assert canonicalize(rep) == (1, rep)

    def test_repeated_color_vanishes(self):
        assert canonicalize(vortex(1, 1, 2))[0] == 0
        assert TreeVector.from_tree(vortex(1, 1, 2)).terms == {}

    def test_struts(self):
        assert canonicalize(strut(2, 1))[1] == canonicalize(strut(1, 2))[1]
        assert canonicalize(strut(1, 1))[0] == 1

    @given(bodies(), st.integers(min_value=1, max_value=3))
    @hsettings(max_examples=60, deadline=None)
    def test_rooting_independent(self, body, root):
        tree = ColoredTree.from_rooted(root, body)
        sign, rep = canonicalize(tree)
        for leaf in tree.univalent:
            label, other = tree.rooted(leaf)
            assert canonicalize(ColoredTree.from_rooted(label, other)) == (sign, rep)


class TestTreeVector:
    def test_as_cancellation(self):
        total = TreeVector.from_tree(vortex(1, 2, 3)) + TreeVector.from_tree(vortex(1, 3, 2))
        assert not total

    def test_coefficient_and_parts(self, beta5):
        v = TreeVector.from_tree(beta5, Fraction(1, 2)) + TreeVector.from_tree(strut(1, 2), 3)
        assert v.coefficient(beta5) == Fraction(1, 2)
        assert v.degrees() == [1, 5]
        assert list(v.by_degree()) == [1, 5]
        assert v.part(5) == TreeVector.from_tree(beta5, Fraction(1, 2))

    def test_scaled_and_neg(self, beta5):
        v = TreeVector.from_tree(beta5)
        assert not (v + (-v))
        assert v.scaled(0) == TreeVector()


class TestEta:
    def test_strut(self):
        coords = lyndon_reduce(eta(strut(1, 2)))
        assert coords == {(1, (2,)): 1, (2, (1,)): 1}

    def test_vortex_terms(self):
        coords = lyndon_reduce(eta(vortex(1, 2, 3)))
        assert {color for color, _ in coords} == {1, 2, 3}
        assert all(abs(c) == 1 for c in coords.values())

    def test_repeated_color_is_zero(self):
        assert is_zero(vortex(1, 1, 2))

    def test_beta5_is_nonzero(self, beta5):
        assert not is_zero(beta5)

    def test_named_labels(self):
        assert not is_zero(ColoredTree.from_rooted("root", (1, 2)))


class TestIhx:
    def test_vortex_has_no_internal_edge(self):
        tree = vortex(1, 2, 3)
        with pytest.raises(NotInternalEdgeError):
            ihx_resolve(tree, tree.edges[0])

    def test_not_an_edge(self, beta5):
        with pytest.raises(NotInternalEdgeError):
            ihx_resolve(beta5, (0, 99))

    def test_caterpillar(self):
        tree = ColoredTree.from_rooted(1, (2, (3, 4)))
        (edge,) = tree.internal_edges
        resolved = ihx_resolve(tree, edge)
        assert len(resolved) == 2
        assert all(t.degree == 3 for t, _ in resolved)
        assert is_zero(TreeVector.from_tree(tree) - resolved)
        assert in_relation_span(TreeVector.from_tree(tree) - resolved, 4)

    @given(bodies(max_leaves=5, colors=3), st.integers(min_value=1, max_value=3))
    @hsettings(max_examples=60, deadline=None)
    def test_every_ihx_relation_vanishes(self, body, root):
        tree = ColoredTree.from_rooted(root, body)
        for edge in tree.internal_edges:
            assert is_zero(TreeVector.from_tree(tree) - ihx_resolve(tree, edge))

    @pytest.mark.parametrize("m, r", [(m, r) for m in (3, 4) for r in (2, 3)])
    def test_ihx_exhaustive(self, m, r):
        for tree in diagrams.enumerate_trees(m, r):
            for a, b in tree.internal_edges:
                for edge in ((a, b), (b, a)):
                    assert is_zero(TreeVector.from_tree(tree) - ihx_resolve(tree, edge)), tree.to_text()

    @pytest.mark.parametrize("a", [1, 2, 3])
    @pytest.mark.parametrize("b", [1, 2, 3])
    def test_repeated_leg_vanishes(self, a, b):
        for tree in (vortex(a, a, b), vortex(a, b, a), vortex(b, a, a)):
            assert is_zero(tree)
            assert canonicalize(tree)[0] == 0

    @pytest.mark.parametrize("m, r", [(m, r) for m in range(1, 5) for r in (1, 2, 3)])
    def test_is_zero_matches_relation_span(self, m, r):
        trees = diagrams.enumerate_trees(m, r)
        rows = diagrams.relation_rows(trees)
        for i, tree in enumerate(trees):
            assert is_zero(tree) == linalg.in_row_span(rows, {i: Fraction(1)}, len(trees)), tree.to_text()


class TestDimensions:
    @pytest.mark.parametrize("m, r, expected", [(1, 2, 3), (2, 2, 0), (2, 3, 1), (1, 3, 6)])
    def test_dim(self, m, r, expected):
        assert dim(m, r) == expected

    @pytest.mark.parametrize("m, r", [(1, 2), (2, 3), (3, 2), (3, 3), (4, 3)])
    def test_eta_rank_matches_dim(self, m, r):
        assert eta_rank(m, r) == dim(m, r)

    def test_degree_guard(self):
        with pytest.raises(ResourceLimitError):
            dim(3, 2, Settings(max_degree=2))

    def test_colors_guard(self):
        with pytest.raises(ResourceLimitError):
            dim(1, 3, Settings(max_colors=2))

    def test_beta5_outside_relation_span(self, beta5):
        assert not in_relation_span(TreeVector.from_tree(beta5), 3)

    def test_star_builder(self):
        tree = star((1, 2), 3, 4)
        assert tree.neighbors[0] and len(tree.neighbors[0]) == 3
        assert tree.degree == 3
