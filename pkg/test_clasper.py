"""Tests for patterns, claspers, surgery presentations and certificates"""

import pytest

from app.errors import (
    CertificateRefused,
    GeneratorRangeError,
    NonNullLeafError,
    NPatternError,
    PatternError,
    SchemaError,
)
from app.models.schemas import ClasperSpecModel
from app.services import clasper, freegroup as fg
from app.services.diagrams import ColoredTree, is_zero, parse_tree, strut, vortex


def spec(words, shape=None, r=4, linking=None, framings=None, level=1):
    k = len(words)
    shape = shape or ColoredTree.from_rooted(1, (2, 3))
    framings = framings or [0] * k
    leaves = tuple(clasper.Leaf(fg.parse_word(w), f) for w, f in zip(words, framings))
    linking = linking or [[0] * k for _ in range(k)]
    return clasper.ClasperSpec(shape, leaves, tuple(tuple(row) for row in linking), r, level)


class TestPatterns:
    def test_strut_is_not_a_pattern(self):
        with pytest.raises(PatternError, match="no trivalent vertex"):
            clasper.validate_pattern(strut(1, 2))

    def test_vortex_is_not_a_pattern(self):
        with pytest.raises(PatternError, match="strut components"):
            clasper.validate_pattern(vortex(1, 2, 3))

    def test_beta5(self, beta5):
        pattern = clasper.validate_pattern(beta5)
        assert pattern.vertex == 0
        assert sorted(clasper.branch_sizes(beta5, 0)) == [2, 2, 2]

    def test_vertex_override(self, beta5):
        leafy = beta5.trivalent[1]
        with pytest.raises(PatternError):
            clasper.validate_pattern(beta5, leafy)

    def test_split(self, beta5):
        branches = clasper.split(clasper.validate_pattern(beta5))
        assert [b.body for b in branches] == [(1, 2), (1, 3), (2, 3)]
        assert [fg.phi(b) for b in branches] == [fg.phi((1, 2)), fg.phi((1, 3)), fg.phi((2, 3))]

    def test_split_degree_six(self):
        tree = parse_tree("((1,2),(1,3),(2,(3,4)))")
        branches = clasper.split(clasper.validate_pattern(tree))
        assert sorted(b.leaf_count for b in branches) == [2, 2, 3]

    def test_catalog(self):
        found = clasper.pattern_catalog(5, 3)
        assert found
        assert all(p.tree.degree == 5 and not is_zero(p.tree) for p in found)
        assert clasper.pattern_catalog(4, 3) == []


class TestCTree:
    def test_edge(self):
        c1 = clasper.c_tree(1)
        assert c1.is_strut and sorted(lab for _, lab in c1.labels) == [1, 2]

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_slot_and_vertex_counts(self, n):
        c = clasper.c_tree(n)
        assert len(c.univalent) == 2 ** n
        assert len(c.trivalent) == 2 ** n - 2


class TestNPatterns:
    def test_minimal_one_pattern(self, one_pattern_tree):
        q = clasper.validate_n_pattern(one_pattern_tree, 1)
        assert q.degree == 7
        assert len(q.branches) == 4
        assert all(isinstance(b, tuple) for b in q.branches)

    def test_beta5_is_not_a_one_pattern(self, beta5):
        with pytest.raises(NPatternError):
            clasper.validate_n_pattern(beta5, 1)

    def test_vortex_is_not_a_one_pattern(self):
        with pytest.raises(NPatternError):
            clasper.validate_n_pattern(vortex(1, 2, 3), 1)

    def test_edge_override(self, one_pattern_tree):
        q = clasper.validate_n_pattern(one_pattern_tree, 1)
        again = clasper.validate_n_pattern(one_pattern_tree, 1, q.edge)
        assert again.branches == q.branches
        with pytest.raises(NPatternError):
            clasper.validate_n_pattern(one_pattern_tree, 1, (0, 99))

    def test_two_pattern_is_a_one_pattern(self):
        tree = parse_tree("(((1,2),(1,3)),((2,3),(1,4)),(((2,4),(3,4)),((1,2),(3,4))))")
        found = clasper.n_pattern_embeddings(tree, 2)
        assert found
        assert all(len(q.branches) == 8 for q in found)
        assert clasper.n_pattern_embeddings(tree, 1)


class TestBuild:
    def test_build_beta5(self, beta5):
        s = clasper.build_clasper(clasper.validate_pattern(beta5))
        assert s.degree == 1
        assert [fg.word_to_string(leaf.word) for leaf in s.leaves] == [
            fg.word_to_string(fg.phi(b)) for b in [(1, 2), (1, 3), (2, 3)]
        ]
        assert all(leaf.framing == 0 for leaf in s.leaves)
        assert all(fg.is_null_homologous(leaf.word) for leaf in s.leaves)

    def test_build_n_clasper(self, one_pattern_tree):
        q = clasper.validate_n_pattern(one_pattern_tree, 1)
        s = clasper.build_n_clasper(q)
        assert s.degree == 2 and len(s.leaves) == 4

    def test_spec_validation(self):
        with pytest.raises(SchemaError):
            spec(["[x1,x2]", "[x1,x3]"])
        with pytest.raises(SchemaError):
            spec(["[x1,x2]", "[x1,x3]", "[x2,x3]"], linking=[[0, 1, 0], [0, 0, 0], [0, 0, 0]])
        with pytest.raises(SchemaError):
            spec(["[x1,x5]", "[x1,x3]", "[x2,x3]"], r=4)


class TestReduce:
    def test_degree_one_is_unchanged(self):
        s = spec(["[x1,x2]", "[x1,x3]", "[x2,x3]"])
        assert clasper.reduce_to_degree_one(s) is s

    def test_h_shape(self):
        words = ["[x1,x2]", "[x1,x3]", "[x2,x3]", "[x1,x4]"]
        s = spec(words, shape=clasper.c_tree(2))
        reduced = clasper.reduce_to_degree_one(s)
        w = [fg.parse_word(x) for x in words]
        assert reduced.degree == 1
        assert [leaf.word for leaf in reduced.leaves] == [w[0], w[1], fg.commutator(w[2], w[3])]

    def test_reduced_leaves_are_deeper(self):
        words = ["[x1,x2]", "[x1,x3]", "[x2,x3]", "[x1,x4]"]
        reduced = clasper.reduce_to_degree_one(spec(words, shape=clasper.c_tree(2)))
        assert fg.in_derived(reduced.leaves[2].word, 2)

    def test_two_pattern_pipeline(self):
        tree = parse_tree("(((1,2),(1,3)),((2,3),(1,4)),(((2,4),(3,4)),((1,2),(3,4))))")
        q = clasper.validate_n_pattern(tree, 2)
        s = clasper.build_n_clasper(q)
        assert s.degree == 6 and len(s.leaves) == 8
        reduced = clasper.reduce_to_degree_one(s)
        assert reduced.degree == 1 and reduced.level == 2
        assert all(fg.in_derived(leaf.word, 2) for leaf in reduced.leaves)
        presentation = clasper.compile_surgery(reduced)
        certificate = clasper.certify_null(presentation, 2)
        assert certificate.granted and len(certificate.checks) == 3
        assert clasper.check_sphere_condition(reduced).passed


class TestExpand:
    def test_degree_one(self):
        s = spec(["[x1,x2]", "[x1,x3]", "[x2,x3]"])
        expanded = clasper.expand_edges(s)
        assert expanded.specs == (s,) and expanded.hopf_pairs == ()

    @pytest.mark.parametrize("n", [2, 3])
    def test_hopf_pairs(self, n):
        shape = clasper.c_tree(n)
        words = ["[x1,x2]"] * len(shape.univalent)
        expanded = clasper.expand_edges(spec(words, shape=shape))
        assert len(expanded.specs) == len(shape.trivalent)
        assert len(expanded.hopf_pairs) == len(shape.trivalent) - 1

    def test_compiled_hopf_linking(self):
        words = ["[x1,x2]", "[x1,x3]", "[x2,x3]", "[x1,x4]"]
        expanded = clasper.expand_edges(spec(words, shape=clasper.c_tree(2)))
        p = clasper.compile_expanded(expanded)
        assert len(p.curves) == 12
        ((a, b),) = p.hopf_pairs
        assert p.leaf_linking(a, b) == 1
        assert p.curve(a).word == fg.IDENTITY


class TestSurgery:
    def test_beta5_presentation(self, beta5):
        p = clasper.compile_surgery(clasper.build_clasper(clasper.validate_pattern(beta5)))
        assert p.labels == ["e1", "e2", "e3", "l1", "l2", "l3"]
        zero, one = [0, 0, 0], [1, 0, 0]
        assert p.linking[0] == zero + one
        assert p.linking[3] == one + zero
        assert p.arms == [("e1", "l1"), ("e2", "l2"), ("e3", "l3")]
        assert p.vortices == [("e1", "e2", "e3")]

    def test_leaf_linking_block(self):
        s = spec(["[x1,x2]", "[x1,x3]", "[x2,x3]"], linking=[[0, 2, 0], [2, 0, 0], [0, 0, 0]], framings=[1, 0, 0])
        p = clasper.compile_surgery(s)
        assert p.leaf_linking("l1", "l2") == 2
        assert p.leaf_linking("l1", "l1") == 1

    def test_non_null_leaf_refused(self):
        s = spec(["x1", "[x1,x3]", "[x2,x3]"])
        with pytest.raises(NonNullLeafError) as info:
            clasper.compile_surgery(s)
        assert info.value.leaves == ["l1"]

    def test_higher_degree_needs_expansion(self):
        s = spec(["[x1,x2]"] * 4, shape=clasper.c_tree(2))
        with pytest.raises(PatternError):
            clasper.compile_surgery(s)


class TestCertificates:
    def test_beta5_granted(self, beta5):
        p = clasper.compile_surgery(clasper.build_clasper(clasper.validate_pattern(beta5)))
        cert = clasper.certify_null(p, 1)
        assert cert.granted and len(cert.checks) == 3
        assert p.certificates == [cert]

    def test_refused_names_leaf(self):
        p = clasper.compile_surgery(spec(["x1 x2", "[x1,x3]", "[x2,x3]"]), allow_non_null=True)
        with pytest.raises(CertificateRefused) as info:
            clasper.certify_null(p, 1)
        assert info.value.leaf == "l1"
        assert p.certificates == []

    def test_level_two(self):
        good = spec(["[[x1,x2],[x1,x3]]", "[[x1,x2],[x2,x3]]", "[[x1,x3],[x2,x4]]"])
        assert clasper.certify_null(clasper.compile_surgery(good), 2).granted
        bad = spec(["[x1,x2]", "[[x1,x2],[x2,x3]]", "[[x1,x3],[x2,x4]]"])
        with pytest.raises(CertificateRefused):
            clasper.certify_null(clasper.compile_surgery(bad), 2)


class TestSphere:
    def test_build_output_passes(self, beta5):
        verdict = clasper.check_sphere_condition(clasper.build_clasper(clasper.validate_pattern(beta5)))
        assert verdict.passed
        assert verdict.assumption == clasper.UNLINK_ASSUMPTION

    def test_framed_leaves_fail(self):
        s = spec(["[x1,x2]", "[x1,x3]", "[x2,x3]"], framings=[1, 1, 1])
        assert not clasper.check_sphere_condition(s).passed

    def test_linked_designated_leaves_fail(self):
        s = spec(["[x1,x2]", "[x1,x3]", "[x2,x3]"], linking=[[0, 1, 0], [1, 0, 0], [0, 0, 0]])
        verdict = clasper.check_sphere_condition(s, designated=[(0, 1), (0, 2)])
        assert not verdict.passed
        assert "lk = 1" in verdict.reasons[0]

    def test_expanded_components_need_one_leaf(self):
        words = ["[x1,x2]", "[x1,x3]", "[x2,x3]", "[x1,x4]"]
        expanded = clasper.expand_edges(spec(words, shape=clasper.c_tree(2)))
        verdict = clasper.check_sphere_condition(expanded)
        assert verdict.passed and len(verdict.designated) == 1


class TestSpecDocument:
    def test_rank_derived_from_leaves(self):
        model = ClasperSpecModel(
            shape={"text": "1-(2,3)"},
            leaves=[{"word": "[x1,x2]"}, {"word": "[x1,x4]"}, {"word": "[x2,x3]"}],
            leaf_linking=[[0, 0, 0], [0, 0, 0], [0, 0, 0]],
        )
        assert model.to_spec().r == 4

    def test_explicit_rank_bounds_the_words(self):
        model = ClasperSpecModel(
            shape={"text": "1-(2,3)"},
            leaves=[{"word": "[x1,x2]"}, {"word": "[x1,x4]"}, {"word": "[x2,x3]"}],
            leaf_linking=[[0, 0, 0], [0, 0, 0], [0, 0, 0]],
            r=3,
        )
        with pytest.raises(GeneratorRangeError):
            model.to_spec()
