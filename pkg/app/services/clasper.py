"""Patterns, n-patterns and the claspers built from them, compiled down to
framed surgery presentations on the r-component unlink.

A clasper shape is a ColoredTree whose univalent vertices carry slot
numbers 1..k; slot i holds leaf i of the spec. A leaf is recorded by its
homotopy word in the free group of unlink meridians.
"""

import logging
from dataclasses import dataclass, field
from itertools import count
from typing import Dict, List, Optional, Sequence, Tuple, Union

from app.config import Settings, get_settings
from app.errors import (
    CertificateRefused,
    NonNullLeafError,
    NPatternError,
    PatternError,
    ResourceLimitError,
    SchemaError,
)
from app.services import freegroup
from app.services.diagrams import Branch, ColoredTree, branch_size, enumerate_trees, is_node, is_zero
from app.services.freegroup import RootedTree, Word

logger = logging.getLogger(__name__)

UNLINK_ASSUMPTION = (
    "the designated 0-framed leaves form an unlink in S^3 (declared, not verified geometrically)"
)


@dataclass(frozen=True)
class Pattern:
    tree: ColoredTree
    vertex: int

    @property
    def degree(self) -> int:
        return self.tree.degree


@dataclass(frozen=True)
class NPattern:
    """A tree with an embedded copy of c^(n): the central edge (u, w), the
    images of all c^(n) vertices and the 2^(n+1) complementary branches"""

    tree: ColoredTree
    n: int
    edge: Tuple[int, int]
    embedding: Tuple[int, ...]
    branches: Tuple[Branch, ...]

    @property
    def degree(self) -> int:
        return self.tree.degree


@dataclass(frozen=True)
class Leaf:
    word: Word
    framing: int = 0


@dataclass(frozen=True)
class ClasperSpec:
    """A tree clasper: shape, one leaf per slot, and the declared linking
    numbers between leaves (diagonal unused; framings live on the leaves)"""

    shape: ColoredTree
    leaves: Tuple[Leaf, ...]
    leaf_linking: Tuple[Tuple[int, ...], ...]
    r: int
    level: int = 1

    def __post_init__(self):
        k = len(self.leaves)
        slots = sorted(lab for _, lab in self.shape.labels)
        if slots != list(range(1, k + 1)):
            raise SchemaError(f"shape slots {slots} do not match {k} leaves")
        if self.degree < 1:
            raise SchemaError("struts are not claspers: the shape needs a trivalent vertex")
        if len(self.leaf_linking) != k or any(len(row) != k for row in self.leaf_linking):
            raise SchemaError(f"leaf_linking must be a {k}x{k} matrix")
        for i in range(k):
            for j in range(k):
                if self.leaf_linking[i][j] != self.leaf_linking[j][i]:
                    raise SchemaError("leaf_linking must be symmetric")
        for i, leaf in enumerate(self.leaves, 1):
            if freegroup.rank_of(leaf.word) > self.r:
                raise SchemaError(f"leaf {i} uses a generator beyond x{self.r}")

    @property
    def degree(self) -> int:
        return len(self.shape.trivalent)

    def slot_vertex(self, slot: int) -> int:
        return next(v for v, lab in self.shape.labels if lab == slot)


def _zero_matrix(k: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(0 for _ in range(k)) for _ in range(k))


# --- patterns ----------------------------------------------------------------


def branch_sizes(tree: ColoredTree, vertex: int) -> List[int]:
    return [branch_size(tree.branch_at(vertex, n)) for n in tree.neighbors[vertex]]


def is_admissible_vertex(tree: ColoredTree, vertex: int) -> bool:
    return len(tree.neighbors.get(vertex, ())) == 3 and min(branch_sizes(tree, vertex)) >= 2


def validate_pattern(tree: ColoredTree, vertex: Optional[int] = None) -> Pattern:
    """Pick a trivalent vertex whose three complementary branches each have at
    least two leaves (the first one by vertex id unless `vertex` is given)"""
    if not tree.trivalent:
        raise PatternError("not a pattern: no trivalent vertex")
    if vertex is not None:
        if vertex not in tree.trivalent:
            raise PatternError(f"not a pattern: vertex {vertex} is not trivalent")
        if not is_admissible_vertex(tree, vertex):
            raise PatternError(f"not a pattern: removing vertex {vertex} leaves strut components")
        return Pattern(tree, vertex)
    for v in tree.trivalent:
        if is_admissible_vertex(tree, v):
            logger.debug("pattern vertex %d for %s", v, tree.to_text())
            return Pattern(tree, v)
    raise PatternError("not a pattern: every trivalent vertex leaves strut components")


def split(pattern: Pattern) -> Tuple[RootedTree, RootedTree, RootedTree]:
    """The three rooted branches at the pattern vertex, in its cyclic order"""
    tree, v = pattern.tree, pattern.vertex
    return tuple(RootedTree(tree.branch_at(v, n)) for n in tree.neighbors[v])


def c_tree(n: int, settings: Settings = None) -> ColoredTree:
    """c^(1) is an edge whose two endpoints are slots; c^(n+1) attaches two
    new slots to every slot of c^(n). Slots are numbered depth-first from
    the first endpoint of the central edge."""
    settings = settings or get_settings()
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > settings.max_c_level:
        raise ResourceLimitError(f"c^({n}) exceeds the configured bound {settings.max_c_level}")
    ids = count()
    slots = count(1)
    neighbors: Dict[int, Tuple[int, ...]] = {}
    labels: Dict[int, int] = {}

    def grow(v: int, parent: int, depth: int) -> None:
        if depth == n - 1:
            labels[v] = next(slots)
            neighbors[v] = (parent,)
            return
        a, b = next(ids), next(ids)
        neighbors[v] = (parent, a, b)
        grow(a, v, depth + 1)
        grow(b, v, depth + 1)

    u, w = next(ids), next(ids)
    grow(u, w, 0)
    grow(w, u, 0)
    return ColoredTree.build(neighbors, labels)


def _embed(tree: ColoredTree, u: int, w: int, n: int) -> Optional[Tuple[Tuple[int, ...], Tuple[Branch, ...]]]:
    """Embed c^(n) with central edge (u, w), following the cyclic orders of
    `tree`; returns (embedded vertices, complementary branches) or None"""
    nb = tree.neighbors
    vertices: List[int] = []
    branches: List[Branch] = []

    def grow(v: int, parent: int, depth: int) -> bool:
        ns = nb[v]
        if len(ns) != 3:
            return False
        vertices.append(v)
        i = ns.index(parent)
        a, b = ns[(i + 1) % 3], ns[(i + 2) % 3]
        if depth == n - 1:
            for child in (a, b):
                piece = tree.branch_at(v, child)
                if branch_size(piece) < 2:
                    return False
                branches.append(piece)
            return True
        return grow(a, v, depth + 1) and grow(b, v, depth + 1)

    if grow(u, w, 0) and grow(w, u, 0):
        return tuple(vertices), tuple(branches)
    return None


def n_pattern_embeddings(tree: ColoredTree, n: int) -> List[NPattern]:
    out = []
    for a, b in tree.internal_edges:
        for u, w in ((a, b), (b, a)):
            found = _embed(tree, u, w, n)
            if found:
                out.append(NPattern(tree, n, (u, w), found[0], found[1]))
    return out


def validate_n_pattern(
    tree: ColoredTree, n: int, edge: Optional[Sequence[int]] = None, settings: Settings = None
) -> NPattern:
    """Find an embedding of c^(n) whose complement has no strut components"""
    settings = settings or get_settings()
    if n < 1:
        raise NPatternError("n must be at least 1")
    if n + 1 > settings.max_c_level:
        raise ResourceLimitError(f"c^({n + 1}) exceeds the configured bound {settings.max_c_level}")
    if edge is not None:
        u, w = int(edge[0]), int(edge[1])
        if w not in tree.neighbors.get(u, ()):
            raise NPatternError(f"{u}-{w} is not an edge")
        found = _embed(tree, u, w, n)
        if not found:
            raise NPatternError(f"no {n}-pattern embedding on edge {u}-{w}: strut components remain")
        return NPattern(tree, n, (u, w), found[0], found[1])
    for candidate in n_pattern_embeddings(tree, n):
        return candidate
    raise NPatternError(f"not a {n}-pattern: every copy of c^({n}) leaves strut components")


# --- clasper construction ---------------------------------------------------


def _colors(tree: ColoredTree) -> int:
    labels = [lab for _, lab in tree.labels]
    if not all(isinstance(lab, int) and lab >= 1 for lab in labels):
        raise SchemaError("pattern leaves must be colored by unlink components 1..r")
    return max(labels)


def build_clasper(pattern: Pattern, r: Optional[int] = None) -> ClasperSpec:
    """Degree-1 clasper G(beta): a Y whose leaves are phi(T_1), phi(T_2), phi(T_3)"""
    r = r or _colors(pattern.tree)
    leaves = tuple(Leaf(freegroup.phi(t)) for t in split(pattern))
    shape = ColoredTree.from_rooted(1, (2, 3))
    return ClasperSpec(shape, leaves, _zero_matrix(3), r, level=1)


def build_n_clasper(q: NPattern, r: Optional[int] = None) -> ClasperSpec:
    """Tree clasper of shape c^(n+1) whose 2^(n+1) leaves are phi of the
    complementary branches, slot i carrying branch i"""
    r = r or _colors(q.tree)
    shape = c_tree(q.n + 1)
    leaves = tuple(Leaf(freegroup.phi(b)) for b in q.branches)
    return ClasperSpec(shape, leaves, _zero_matrix(len(leaves)), r, level=q.n)


def _branch_word(branch: Branch, leaves: Sequence[Leaf]) -> Word:
    if is_node(branch):
        return freegroup.commutator(_branch_word(branch[0], leaves), _branch_word(branch[1], leaves))
    return leaves[branch - 1].word


def _least_slot(branch: Branch) -> int:
    if is_node(branch):
        return min(_least_slot(branch[0]), _least_slot(branch[1]))
    return branch


def reduce_to_degree_one(spec: ClasperSpec) -> ClasperSpec:
    """Collapse a tree clasper onto its first trivalent vertex: each of the
    three branches there becomes one leaf, the iterated commutator of its
    leaf words following the shape"""
    if spec.degree == 1:
        return spec
    keeper = spec.shape.trivalent[0]
    branches = [spec.shape.branch_at(keeper, n) for n in spec.shape.neighbors[keeper]]
    start = min(range(3), key=lambda i: _least_slot(branches[i]))
    branches = branches[start:] + branches[:start]
    leaves = []
    for b in branches:
        if is_node(b):
            leaves.append(Leaf(_branch_word(b, spec.leaves)))
        else:
            leaves.append(spec.leaves[b - 1])
    direct = [b if not is_node(b) else None for b in branches]
    lk = [[0] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            if i != j and direct[i] and direct[j]:
                lk[i][j] = spec.leaf_linking[direct[i] - 1][direct[j] - 1]
    shape = ColoredTree.from_rooted(1, (2, 3))
    reduced = ClasperSpec(shape, tuple(leaves), tuple(tuple(row) for row in lk), spec.r, spec.level)
    logger.info("reduced degree-%d clasper to degree 1 at vertex %d", spec.degree, keeper)
    return reduced


@dataclass(frozen=True)
class ExpandedClasper:
    """Degree-1 claspers obtained by breaking every edge between trivalent
    vertices; `links` holds ((clasper, slot), (clasper, slot), lk) between
    leaves of different claspers, the Hopf pairs among them with lk 1"""

    specs: Tuple[ClasperSpec, ...]
    hopf_pairs: Tuple[Tuple[Tuple[int, int], Tuple[int, int]], ...]
    links: Tuple[Tuple[Tuple[int, int], Tuple[int, int], int], ...]


def expand_edges(spec: ClasperSpec) -> ExpandedClasper:
    if spec.degree == 1:
        return ExpandedClasper((spec,), (), ())
    shape = spec.shape
    vertices = shape.trivalent
    index = {v: k for k, v in enumerate(vertices)}
    # (clasper, slot) of every original leaf, and of every new Hopf leaf by directed edge
    origin: Dict[int, Tuple[int, int]] = {}
    hopf_slot: Dict[Tuple[int, int], Tuple[int, int]] = {}
    specs = []
    for k, v in enumerate(vertices):
        leaves = []
        for slot, nbr in enumerate(shape.neighbors[v], 1):
            if nbr in index:
                leaves.append(Leaf(freegroup.IDENTITY, 0))
                hopf_slot[(v, nbr)] = (k, slot)
            else:
                original = shape.label_of[nbr]
                leaves.append(spec.leaves[original - 1])
                origin[original] = (k, slot)
        specs.append(
            ClasperSpec(ColoredTree.from_rooted(1, (2, 3)), tuple(leaves), _zero_matrix(3), spec.r, spec.level)
        )
    pairs = []
    links = []
    for a, b in shape.internal_edges:
        pair = (hopf_slot[(a, b)], hopf_slot[(b, a)])
        pairs.append(pair)
        links.append((pair[0], pair[1], 1))
    k = len(spec.leaves)
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            value = spec.leaf_linking[i - 1][j - 1]
            if value:
                links.append((origin[i], origin[j], value))
    # within one degree-1 piece the links go back into its own matrix
    specs = _fold_local_links(specs, links)
    links = [item for item in links if item[0][0] != item[1][0]]
    logger.info("expanded degree-%d clasper into %d claspers with %d Hopf pairs", spec.degree, len(specs), len(pairs))
    return ExpandedClasper(tuple(specs), tuple(pairs), tuple(links))


def _fold_local_links(specs: List[ClasperSpec], links) -> List[ClasperSpec]:
    out = []
    for k, s in enumerate(specs):
        lk = [list(row) for row in s.leaf_linking]
        for (ka, sa), (kb, sb), value in links:
            if ka == kb == k:
                lk[sa - 1][sb - 1] = lk[sb - 1][sa - 1] = value
        out.append(ClasperSpec(s.shape, s.leaves, tuple(tuple(row) for row in lk), s.r, s.level))
    return out


# --- surgery presentations --------------------------------------------------


@dataclass(frozen=True)
class Curve:
    label: str
    kind: str  # "edge" or "leaf"
    word: Word
    framing: int
    clasper: int


@dataclass
class Certificate:
    level: int
    checks: List[dict] = field(default_factory=list)
    granted: bool = True


@dataclass
class SurgeryPresentation:
    """Framed link in the complement of the r-component unlink: six curves
    per degree-1 clasper. The linking matrix is ((0, I), (I, lk)) in the
    (edge curves, leaf curves) order."""

    r: int
    curves: List[Curve]
    linking: List[List[int]]
    arms: List[Tuple[str, str]]
    vortices: List[Tuple[str, str, str]]
    hopf_pairs: List[Tuple[str, str]] = field(default_factory=list)
    certificates: List[Certificate] = field(default_factory=list)

    @property
    def labels(self) -> List[str]:
        return [c.label for c in self.curves]

    @property
    def leaf_curves(self) -> List[Curve]:
        return [c for c in self.curves if c.kind == "leaf"]

    def curve(self, label: str) -> Curve:
        return next(c for c in self.curves if c.label == label)

    def leaf_linking(self, a: str, b: str) -> int:
        labels = self.labels
        return self.linking[labels.index(a)][labels.index(b)]


def compile_expanded(expanded: ExpandedClasper, allow_non_null: bool = False) -> SurgeryPresentation:
    """One surgery presentation for a family of degree-1 claspers"""
    specs = expanded.specs
    for s in specs:
        if s.degree != 1:
            raise PatternError(f"only degree-1 claspers compile directly; got degree {s.degree}")
    m = 3 * len(specs)
    non_null = []
    edges: List[Curve] = []
    leaves: List[Curve] = []
    position: Dict[Tuple[int, int], int] = {}
    vortices = []
    for k, s in enumerate(specs):
        labels = []
        # slot order around the Y is the cyclic order at its center
        center = s.shape.trivalent[0]
        for nbr in s.shape.neighbors[center]:
            slot = s.shape.label_of[nbr]
            j = len(edges) + 1
            leaf = s.leaves[slot - 1]
            edges.append(Curve(f"e{j}", "edge", freegroup.IDENTITY, 0, k))
            leaves.append(Curve(f"l{j}", "leaf", leaf.word, leaf.framing, k))
            position[(k, slot)] = j - 1
            labels.append(f"e{j}")
            if not freegroup.is_null_homologous(leaf.word):
                non_null.append(f"l{j}")
        vortices.append(tuple(labels))
    if non_null and not allow_non_null:
        raise NonNullLeafError(
            "leaves " + ", ".join(non_null) + " have nonzero exponent sums; the Alexander module would change",
            non_null,
        )
    lk = [[0] * m for _ in range(m)]
    for k, s in enumerate(specs):
        for a in range(1, 4):
            pa = position[(k, a)]
            lk[pa][pa] = s.leaves[a - 1].framing
            for b in range(1, 4):
                if a != b:
                    lk[pa][position[(k, b)]] = s.leaf_linking[a - 1][b - 1]
    for x, y, value in expanded.links:
        px, py = position[x], position[y]
        lk[px][py] = lk[py][px] = value
    linking = [[0] * (2 * m) for _ in range(2 * m)]
    for i in range(m):
        linking[i][m + i] = linking[m + i][i] = 1
        for j in range(m):
            linking[m + i][m + j] = lk[i][j]
    hopf = [(leaves[position[x]].label, leaves[position[y]].label) for x, y in expanded.hopf_pairs]
    presentation = SurgeryPresentation(
        r=specs[0].r,
        curves=edges + leaves,
        linking=linking,
        arms=[(e.label, l.label) for e, l in zip(edges, leaves)],
        vortices=vortices,
        hopf_pairs=hopf,
    )
    logger.info("compiled %d claspers into %d surgery curves", len(specs), 2 * m)
    return presentation


def compile_surgery(spec: ClasperSpec, allow_non_null: bool = False) -> SurgeryPresentation:
    """Six-curve presentation of a degree-1 clasper: the 0-framed Borromean
    core e1, e2, e3 and the leaves l1, l2, l3"""
    if spec.degree != 1:
        raise PatternError(f"compile_surgery needs a degree-1 clasper, got degree {spec.degree}")
    return compile_expanded(ExpandedClasper((spec,), (), ()), allow_non_null=allow_non_null)


def certify_null(presentation: SurgeryPresentation, level: int = 1, settings: Settings = None) -> Certificate:
    """Check that every leaf lies in F^(level); the certificate lists each
    membership verified, and is attached to the presentation"""
    settings = settings or get_settings()
    cert = Certificate(level=level)
    for curve in presentation.leaf_curves:
        if level == 1:
            sums = freegroup.exponent_sums(curve.word, presentation.r)
            ok = not any(sums)
            fact = f"exponent_sums({curve.label}) = ({', '.join(map(str, sums))})"
        else:
            ok = freegroup.in_derived(curve.word, level, settings)
            fact = f"{curve.label} in F^({level})"
        cert.checks.append(
            {"leaf": curve.label, "word": freegroup.word_to_string(curve.word), "check": fact, "passed": ok}
        )
        if not ok:
            cert.granted = False
            raise CertificateRefused(
                f"certificate refused at level {level}: leaf {curve.label} "
                f"({freegroup.word_to_string(curve.word)}) fails {fact}",
                curve.label,
            )
    presentation.certificates.append(cert)
    logger.info("null certificate at level %d granted for %d leaves", level, len(cert.checks))
    return cert


@dataclass
class SphereVerdict:
    passed: bool
    designated: List[Tuple[int, int]]
    reasons: List[str]
    assumption: str = UNLINK_ASSUMPTION


def check_sphere_condition(
    claspers: Union[ClasperSpec, ExpandedClasper],
    designated: Optional[Sequence[Tuple[int, int]]] = None,
) -> SphereVerdict:
    """Algebraic part of the condition that surgery gives back S^3: every
    connected component designates a 0-framed leaf, and designated leaves
    have vanishing mutual linking. `designated` lists (clasper, slot) pairs."""
    if isinstance(claspers, ClasperSpec):
        claspers = ExpandedClasper((claspers,), (), ())
    specs = claspers.specs
    components = _components(claspers)
    reasons = []
    if designated is None:
        chosen = []
        for comp in components:
            pick = next(
                ((k, slot) for k in comp for slot, leaf in enumerate(specs[k].leaves, 1)
                 if leaf.framing == 0 and not _is_hopf(claspers, (k, slot))),
                None,
            )
            if pick is None:
                reasons.append(f"component {sorted(comp)} has no 0-framed leaf")
            else:
                chosen.append(pick)
    else:
        chosen = [tuple(d) for d in designated]
        for k, slot in chosen:
            if specs[k].leaves[slot - 1].framing != 0:
                reasons.append(f"designated leaf {slot} of clasper {k} is not 0-framed")
        for comp in components:
            if not any(k in comp for k, _ in chosen):
                reasons.append(f"component {sorted(comp)} has no designated leaf")
    for i, a in enumerate(chosen):
        for b in chosen[i + 1:]:
            value = _leaf_lk(claspers, a, b)
            if value:
                reasons.append(f"designated leaves {a} and {b} link with lk = {value}")
    return SphereVerdict(not reasons, [tuple(c) for c in chosen], reasons)


def _is_hopf(expanded: ExpandedClasper, leaf: Tuple[int, int]) -> bool:
    return any(leaf in pair for pair in expanded.hopf_pairs)


def _leaf_lk(expanded: ExpandedClasper, a: Tuple[int, int], b: Tuple[int, int]) -> int:
    if a[0] == b[0]:
        return expanded.specs[a[0]].leaf_linking[a[1] - 1][b[1] - 1]
    for x, y, value in expanded.links:
        if {x, y} == {a, b}:
            return value
    return 0


def _components(expanded: ExpandedClasper) -> List[set]:
    parent = list(range(len(expanded.specs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for (ka, _), (kb, _) in expanded.hopf_pairs:
        parent[find(ka)] = find(kb)
    groups: Dict[int, set] = {}
    for k in range(len(expanded.specs)):
        groups.setdefault(find(k), set()).add(k)
    return list(groups.values())


# --- catalogs -----------------------------------------------------------------


def pattern_catalog(degree: int, r: int, settings: Settings = None) -> List[Pattern]:
    """Valid patterns of one degree on colors 1..r that do not vanish in A^tr,
    one per canonical form"""
    out = []
    for tree in enumerate_trees(degree, r, settings):
        try:
            pattern = validate_pattern(tree)
        except PatternError:
            continue
        if not is_zero(tree):
            out.append(pattern)
    logger.info("pattern catalog: %d patterns of degree %d on %d colors", len(out), degree, r)
    return out


def n_pattern_catalog(degree: int, r: int, n: int, settings: Settings = None) -> List[NPattern]:
    out = []
    for tree in enumerate_trees(degree, r, settings):
        try:
            q = validate_n_pattern(tree, n, settings=settings)
        except NPatternError:
            continue
        if not is_zero(tree):
            out.append(q)
    return out
