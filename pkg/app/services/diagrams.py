"""The graded space A^tr(r) of vertex-oriented unitrivalent trees modulo AS
and IHX.

A ColoredTree is stored as a graph: every vertex lists its neighbors, and a
trivalent vertex lists them in its cyclic order. Computations mostly go
through *planar rooted forms*: rooting at a univalent vertex turns the tree
into a nested pair structure (a Branch), where at every trivalent vertex the
two children are read in cyclic order after the edge towards the root.
A Branch doubles as a Lie monomial, which is how eta is computed.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from app.config import Settings, get_settings
from app.errors import InvalidTreeError, NotInternalEdgeError, ResourceLimitError
from app.services import linalg
from app.services.lie import LieVector, lyndon_reduce

logger = logging.getLogger(__name__)

Label = Union[int, str]
Branch = Union[Label, Tuple["Branch", "Branch"]]
Edge = Tuple[int, int]


def label_key(label: Label) -> Tuple[int, Union[int, str]]:
    """Total order on leg labels: unlink colors first, then named labels"""
    if isinstance(label, int):
        return (0, label)
    return (1, str(label))


def is_node(branch: Branch) -> bool:
    return isinstance(branch, tuple)


def branch_leaves(branch: Branch) -> List[Label]:
    if is_node(branch):
        return branch_leaves(branch[0]) + branch_leaves(branch[1])
    return [branch]


def branch_size(branch: Branch) -> int:
    if is_node(branch):
        return branch_size(branch[0]) + branch_size(branch[1])
    return 1


@lru_cache(maxsize=None)
def branch_key(branch: Branch) -> tuple:
    if is_node(branch):
        return (1, branch_key(branch[0]), branch_key(branch[1]))
    return (0, label_key(branch))


@lru_cache(maxsize=None)
def canonical_branch(branch: Branch) -> Tuple[int, Branch]:
    """Order children by key at every trivalent vertex.

    Returns (sign, branch) where sign is the AS sign of the reordering, or 0
    when some vertex has two identical children (an orientation-reversing
    symmetry, so the tree is zero).
    """
    if not is_node(branch):
        return 1, branch
    sl, left = canonical_branch(branch[0])
    sr, right = canonical_branch(branch[1])
    sign = sl * sr
    kl, kr = branch_key(left), branch_key(right)
    if kl == kr:
        return 0, (left, right)
    if kl > kr:
        return -sign, (right, left)
    return sign, (left, right)


@dataclass(frozen=True)
class ColoredTree:
    """Vertex-oriented unitrivalent tree with labeled univalent vertices.

    `adjacency` holds (vertex, neighbors) pairs sorted by vertex; the
    neighbor tuple of a trivalent vertex is its cyclic order. `labels` holds
    (univalent vertex, label) pairs.
    """

    adjacency: Tuple[Tuple[int, Tuple[int, ...]], ...]
    labels: Tuple[Tuple[int, Label], ...]

    def __post_init__(self):
        _validate(self)

    @classmethod
    def build(cls, neighbors: Mapping[int, Sequence[int]], labels: Mapping[int, Label]) -> "ColoredTree":
        adjacency = tuple(sorted((int(v), tuple(int(n) for n in ns)) for v, ns in neighbors.items()))
        return cls(adjacency, tuple(sorted((int(v), lab) for v, lab in labels.items())))

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[Sequence[int]],
        labels: Mapping[int, Label],
        cyclic_order: Mapping[int, Sequence[int]] = None,
    ) -> "ColoredTree":
        """Assemble from an edge list; every trivalent vertex, and nothing
        else, needs an entry in `cyclic_order`"""
        cyclic_order = cyclic_order or {}
        neighbors: Dict[int, List[int]] = {}
        for edge in edges:
            if len(edge) != 2:
                raise InvalidTreeError(f"edge {list(edge)} must join two vertices")
            a, b = int(edge[0]), int(edge[1])
            neighbors.setdefault(a, []).append(b)
            neighbors.setdefault(b, []).append(a)
        for v in labels:
            neighbors.setdefault(int(v), [])
        ordered: Dict[int, Tuple[int, ...]] = {}
        for v, ns in neighbors.items():
            given = cyclic_order.get(v)
            if len(ns) != 3:
                if given is not None:
                    raise InvalidTreeError(f"cyclic order given at {v}, which is not trivalent")
                ordered[v] = tuple(ns)
                continue
            if given is None:
                raise InvalidTreeError(f"trivalent vertex {v} has no cyclic order")
            if sorted(int(n) for n in given) != sorted(ns):
                raise InvalidTreeError(f"cyclic order at {v} must list exactly its neighbors {sorted(ns)}")
            ordered[v] = tuple(int(n) for n in given)
        unknown = sorted(set(cyclic_order) - set(neighbors))
        if unknown:
            raise InvalidTreeError(f"cyclic order given for unknown vertices {unknown}")
        return cls.build(ordered, labels)

    @classmethod
    def from_rooted(cls, root_label: Label, body: Branch) -> "ColoredTree":
        """Tree with a root leaf labeled `root_label` attached to `body`.
        Vertex ids follow a depth-first walk starting at the root (id 0)."""
        neighbors: Dict[int, Tuple[int, ...]] = {}
        labels: Dict[int, Label] = {0: root_label}
        counter = [0]

        def build(branch: Branch, parent: int) -> int:
            counter[0] += 1
            vid = counter[0]
            if is_node(branch):
                left = build(branch[0], vid)
                right = build(branch[1], vid)
                neighbors[vid] = (parent, left, right)
            else:
                labels[vid] = branch
                neighbors[vid] = (parent,)
            return vid

        child = build(body, 0)
        neighbors[0] = (child,)
        return cls.build(neighbors, labels)

    @cached_property
    def neighbors(self) -> Dict[int, Tuple[int, ...]]:
        return dict(self.adjacency)

    @cached_property
    def label_of(self) -> Dict[int, Label]:
        return dict(self.labels)

    @property
    def vertices(self) -> List[int]:
        return [v for v, _ in self.adjacency]

    @property
    def univalent(self) -> List[int]:
        return [v for v, ns in self.adjacency if len(ns) == 1]

    @property
    def trivalent(self) -> List[int]:
        return [v for v, ns in self.adjacency if len(ns) == 3]

    @cached_property
    def edges(self) -> List[Edge]:
        return sorted({(min(v, n), max(v, n)) for v, ns in self.adjacency for n in ns})

    @property
    def internal_edges(self) -> List[Edge]:
        nb = self.neighbors
        return [(a, b) for a, b in self.edges if len(nb[a]) == 3 and len(nb[b]) == 3]

    @property
    def degree(self) -> int:
        return len(self.adjacency) // 2

    @property
    def leaf_count(self) -> int:
        return len(self.labels)

    @property
    def is_strut(self) -> bool:
        return len(self.adjacency) == 2

    def legs(self, label: Label = None) -> List[int]:
        """Univalent vertices, optionally only those carrying `label`"""
        return [v for v, lab in self.labels if label is None or lab == label]

    def rooted(self, leaf: int) -> Tuple[Label, Branch]:
        """Planar rooted form at the univalent vertex `leaf`"""
        label, body, _ = self.rooted_with_paths(leaf)
        return label, body

    def rooted_with_paths(self, leaf: int) -> Tuple[Label, Branch, Dict[int, Tuple[int, ...]]]:
        """Planar rooted form plus the path (0 = left, 1 = right) from the
        body's top to every vertex of the body"""
        nb = self.neighbors
        if len(nb.get(leaf, ())) != 1:
            raise InvalidTreeError(f"vertex {leaf} is not univalent")
        paths: Dict[int, Tuple[int, ...]] = {}

        def walk(v: int, parent: int, path: Tuple[int, ...]) -> Branch:
            paths[v] = path
            ns = nb[v]
            if len(ns) == 1:
                return self.label_of[v]
            i = ns.index(parent)
            a, b = ns[(i + 1) % 3], ns[(i + 2) % 3]
            return (walk(a, v, path + (0,)), walk(b, v, path + (1,)))

        body = walk(nb[leaf][0], leaf, ())
        return self.label_of[leaf], body, paths

    def branch_at(self, vertex: int, towards: int) -> Branch:
        """The rooted branch seen from `vertex` through its neighbor `towards`"""
        nb = self.neighbors

        def walk(v: int, parent: int) -> Branch:
            ns = nb[v]
            if len(ns) == 1:
                return self.label_of[v]
            i = ns.index(parent)
            return (walk(ns[(i + 1) % 3], v), walk(ns[(i + 2) % 3], v))

        return walk(towards, vertex)

    def relabeled(self, mapping: Mapping[Label, Label]) -> "ColoredTree":
        labels = {v: mapping.get(lab, lab) for v, lab in self.labels}
        return ColoredTree.build(self.neighbors, labels)

    def to_text(self) -> str:
        label, body = self.rooted(self.univalent[0])
        return f"{_label_text(label)}-{_branch_text(body)}"

    def __repr__(self) -> str:
        return f"ColoredTree({self.to_text()})"


def _label_text(label: Label) -> str:
    return str(label)


def _branch_text(branch: Branch) -> str:
    if is_node(branch):
        return f"({_branch_text(branch[0])},{_branch_text(branch[1])})"
    return _label_text(branch)


def _validate(tree: ColoredTree) -> None:
    nb = dict(tree.adjacency)
    labels = dict(tree.labels)
    if len(nb) != len(tree.adjacency):
        raise InvalidTreeError("duplicate vertex ids")
    if len(nb) < 2:
        raise InvalidTreeError("a tree needs at least two vertices")
    for v, ns in nb.items():
        if len(ns) not in (1, 3):
            raise InvalidTreeError(f"vertex {v} has valence {len(ns)}; only 1 and 3 are allowed")
        if len(set(ns)) != len(ns) or v in ns:
            raise InvalidTreeError(f"vertex {v} has a repeated neighbor or a loop")
        for n in ns:
            if n not in nb or v not in nb[n]:
                raise InvalidTreeError(f"edge {v}-{n} is not symmetric")
        if (len(ns) == 1) != (v in labels):
            raise InvalidTreeError(f"vertex {v}: exactly the univalent vertices carry labels")
    u = sum(1 for ns in nb.values() if len(ns) == 1)
    t = len(nb) - u
    if u != t + 2:
        raise InvalidTreeError(f"{u} univalent and {t} trivalent vertices cannot form a tree")
    start = next(iter(nb))
    seen = {start}
    stack = [start]
    while stack:
        for n in nb[stack.pop()]:
            if n not in seen:
                seen.add(n)
                stack.append(n)
    if len(seen) != len(nb):
        raise InvalidTreeError("graph is not connected")


def strut(a: Label, b: Label) -> ColoredTree:
    return ColoredTree.from_rooted(a, b)


def vortex(a: Label, b: Label, c: Label) -> ColoredTree:
    """Y-shaped tree whose center reads (a, b, c) in cyclic order"""
    return ColoredTree.from_rooted(a, (b, c))


def star(first: Branch, second: Branch, third: Branch) -> ColoredTree:
    """Tree with a center vertex (id 0) whose three branches, in cyclic
    order, are the given rooted branches"""
    neighbors: Dict[int, Tuple[int, ...]] = {}
    labels: Dict[int, Label] = {}
    counter = [0]

    def build(branch: Branch, parent: int) -> int:
        counter[0] += 1
        vid = counter[0]
        if is_node(branch):
            left = build(branch[0], vid)
            right = build(branch[1], vid)
            neighbors[vid] = (parent, left, right)
        else:
            labels[vid] = branch
            neighbors[vid] = (parent,)
        return vid

    neighbors[0] = tuple(build(b, 0) for b in (first, second, third))
    return ColoredTree.build(neighbors, labels)


_TREE_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][\w.]*)|(?P<sym>[(),\-]))")


def parse_tree(text: str) -> ColoredTree:
    """Text form of a tree: "root-branch" as printed by `to_text`, e.g.
    "1-(2,3)", or a bare triple "(b1,b2,b3)" of branches around a center,
    e.g. "((1,2),(1,3),(2,3))". Integer labels are unlink colors."""
    tokens = []
    pos = 0
    while pos < len(text) and text[pos:].strip():
        m = _TREE_TOKEN.match(text, pos)
        if not m:
            raise InvalidTreeError(f"unexpected character in tree text at position {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    i = 0

    def peek(symbol: str) -> bool:
        return i < len(tokens) and tokens[i][0] == "sym" and tokens[i][1] == symbol

    def expect(symbol: str) -> None:
        nonlocal i
        if not peek(symbol):
            where = tokens[i][2] if i < len(tokens) else len(text)
            raise InvalidTreeError(f"expected {symbol!r} at position {where} in {text!r}")
        i += 1

    def label() -> Label:
        nonlocal i
        if i >= len(tokens) or tokens[i][0] == "sym":
            where = tokens[i][2] if i < len(tokens) else len(text)
            raise InvalidTreeError(f"expected a label at position {where} in {text!r}")
        kind, value, _ = tokens[i]
        i += 1
        return int(value) if kind == "int" else value

    def branches() -> List[Branch]:
        nonlocal i
        if not peek("("):
            return [label()]
        i += 1
        items = [branch()]
        while peek(","):
            i += 1
            items.append(branch())
        expect(")")
        return items

    def branch() -> Branch:
        items = branches()
        if len(items) == 1:
            return items[0]
        if len(items) != 2:
            raise InvalidTreeError(f"a rooted branch splits in two, got {len(items)} parts in {text!r}")
        return tuple(items)

    if peek("("):
        items = branches()
        if len(items) != 3:
            raise InvalidTreeError(f"a bare tree text must list three branches, got {len(items)}")
        tree = star(*items)
    else:
        root = label()
        expect("-")
        tree = ColoredTree.from_rooted(root, branch())
    if i != len(tokens):
        raise InvalidTreeError(f"trailing input at position {tokens[i][2]} in {text!r}")
    return tree


def degree(tree: ColoredTree) -> int:
    """Half the number of vertices; a strut has degree 1"""
    return tree.degree


def _planar_key(label: Label, body: Branch) -> tuple:
    return (label_key(label), branch_key(body))


@lru_cache(maxsize=100_000)
def canonicalize(tree: ColoredTree) -> Tuple[int, ColoredTree]:
    """Deterministic representative of the orbit of `tree` under
    orientation-preserving isomorphism, with the AS sign relating the two.

    The representative is rooted at the leaf whose (label, canonical body)
    key is least. Sign 0 means the tree has an orientation-reversing
    automorphism and vanishes by AS; the representative is still returned.
    """
    best = None
    zero = False
    for leaf in tree.univalent:
        label, body = tree.rooted(leaf)
        sign, canon = canonical_branch(body)
        if sign == 0:
            zero = True
        key = _planar_key(label, canon)
        if best is None or key < best[0]:
            best = (key, sign, label, canon)
        elif key == best[0] and sign != best[1]:
            zero = True
    _, sign, label, canon = best
    rep = ColoredTree.from_rooted(label, canon)
    return (0 if zero else sign), rep


def tree_sort_key(tree: ColoredTree) -> tuple:
    """Deterministic order on canonical representatives"""
    label, body = tree.rooted(0) if 0 in tree.label_of else tree.rooted(tree.univalent[0])
    return (tree.degree, _planar_key(label, body))


class TreeVector:
    """Finite rational combination of canonical trees (AS signs absorbed,
    AS-vanishing trees and zero coefficients never stored).

    Equality is equality of stored terms; use `is_zero` for equality in
    A^tr, which also accounts for IHX.
    """

    __slots__ = ("terms", "colors")

    def __init__(self, terms: Mapping[ColoredTree, Fraction] = None, colors: Optional[int] = None):
        self.terms: Dict[ColoredTree, Fraction] = {}
        self.colors = colors
        for tree, coeff in (terms or {}).items():
            self.add_tree(tree, coeff)

    @classmethod
    def from_tree(cls, tree: ColoredTree, coeff=1, colors: Optional[int] = None) -> "TreeVector":
        return cls({tree: coeff}, colors=colors)

    def add_tree(self, tree: ColoredTree, coeff=1) -> None:
        coeff = Fraction(coeff)
        if not coeff:
            return
        sign, rep = canonicalize(tree)
        if sign == 0:
            return
        total = self.terms.get(rep, 0) + sign * coeff
        if total:
            self.terms[rep] = total
        else:
            self.terms.pop(rep, None)

    def copy(self) -> "TreeVector":
        out = TreeVector(colors=self.colors)
        out.terms = dict(self.terms)
        return out

    def __add__(self, other: "TreeVector") -> "TreeVector":
        out = self.copy()
        for tree, c in other.terms.items():
            total = out.terms.get(tree, 0) + c
            if total:
                out.terms[tree] = total
            else:
                out.terms.pop(tree, None)
        if out.colors is None:
            out.colors = other.colors
        return out

    def __neg__(self) -> "TreeVector":
        return self.scaled(-1)

    def __sub__(self, other: "TreeVector") -> "TreeVector":
        return self + (-other)

    def scaled(self, factor) -> "TreeVector":
        factor = Fraction(factor)
        out = TreeVector(colors=self.colors)
        if factor:
            out.terms = {t: c * factor for t, c in self.terms.items()}
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, TreeVector) and self.terms == other.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Tuple[ColoredTree, Fraction]]:
        return iter(sorted(self.terms.items(), key=lambda item: tree_sort_key(item[0])))

    def coefficient(self, tree: ColoredTree) -> Fraction:
        sign, rep = canonicalize(tree)
        return sign * self.terms.get(rep, Fraction(0))

    def degrees(self) -> List[int]:
        return sorted({t.degree for t in self.terms})

    def by_degree(self) -> Dict[int, "TreeVector"]:
        out: Dict[int, TreeVector] = {}
        for tree, c in self.terms.items():
            out.setdefault(tree.degree, TreeVector(colors=self.colors)).terms[tree] = c
        return dict(sorted(out.items()))

    def part(self, deg: int) -> "TreeVector":
        out = TreeVector(colors=self.colors)
        out.terms = {t: c for t, c in self.terms.items() if t.degree == deg}
        return out

    def labels(self) -> List[Label]:
        found = {lab for t in self.terms for _, lab in t.labels}
        return sorted(found, key=label_key)

    def __repr__(self) -> str:
        if not self.terms:
            return "TreeVector(0)"
        return "TreeVector(" + " + ".join(f"{c}*{t.to_text()}" for t, c in self) + ")"


def _letters(labels: Iterable[Label]) -> Dict[Label, int]:
    """Lie letters for leg labels: unlink colors keep their value, any named
    labels are numbered after them"""
    labels = sorted(set(labels), key=label_key)
    if all(isinstance(lab, int) for lab in labels):
        return {lab: lab for lab in labels}
    return {lab: i + 1 for i, lab in enumerate(labels)}


def _relabel_branch(branch: Branch, letters: Mapping[Label, int]) -> Branch:
    if is_node(branch):
        return (_relabel_branch(branch[0], letters), _relabel_branch(branch[1], letters))
    return letters[branch]


def eta(value: Union[ColoredTree, TreeVector], letters: Mapping[Label, int] = None) -> LieVector:
    """Sum over univalent vertices of (label) (x) (bracket of the tree rooted there).

    Brackets follow the cyclic order at each trivalent vertex as seen from
    the root; AS and IHX combinations map to zero.
    """
    if isinstance(value, ColoredTree):
        vector = TreeVector()
        vector.terms = {value: Fraction(1)}
    else:
        vector = value
    if letters is None:
        letters = _letters(vector.labels())
    out = LieVector()
    for tree, coeff in vector.terms.items():
        for leaf in tree.univalent:
            label, body = tree.rooted(leaf)
            out.add_term(letters[label], _relabel_branch(body, letters), coeff)
    return out


def is_zero(vector: Union[TreeVector, ColoredTree]) -> bool:
    """True iff the vector vanishes in A^tr (AS and IHX)"""
    if isinstance(vector, ColoredTree):
        vector = TreeVector.from_tree(vector)
    if not vector.terms:
        return True
    return not lyndon_reduce(eta(vector))


def equal_in_atr(a: TreeVector, b: TreeVector) -> bool:
    return is_zero(a - b)


def _replace_at(branch: Branch, path: Tuple[int, ...], new: Branch) -> Branch:
    if not path:
        return new
    if path[0] == 0:
        return (_replace_at(branch[0], path[1:], new), branch[1])
    return (branch[0], _replace_at(branch[1], path[1:], new))


def _get_at(branch: Branch, path: Tuple[int, ...]) -> Branch:
    for step in path:
        branch = branch[step]
    return branch


def ihx_resolve(tree: ColoredTree, edge: Sequence[int]) -> TreeVector:
    """Rewrite `tree` along the internal edge `edge` as a two-term
    combination equal to it in A^tr.

    Rooted on the side of u, the vertex pair reads [A, [B, C]] and the
    result is [[A, B], C] + [B, [A, C]] with the AS sign of the rooting.
    """
    u, w = int(edge[0]), int(edge[1])
    nb = tree.neighbors
    if u not in nb or w not in nb or w not in nb[u]:
        raise NotInternalEdgeError(f"{u}-{w} is not an edge of the tree")
    if len(nb[u]) != 3 or len(nb[w]) != 3:
        raise NotInternalEdgeError(f"edge {u}-{w} is not internal: it touches a univalent vertex")
    root = _leaf_beyond(tree, u, w)
    label, body, paths = tree.rooted_with_paths(root)
    pu, pw = paths[u], paths[w]
    node = _get_at(body, pu)
    if pw == pu + (1,):
        sign, a, (b, c) = 1, node[0], node[1]
    else:
        sign, a, (b, c) = -1, node[1], node[0]
    h = ColoredTree.from_rooted(label, _replace_at(body, pu, ((a, b), c)))
    x = ColoredTree.from_rooted(label, _replace_at(body, pu, (b, (a, c))))
    out = TreeVector()
    out.add_tree(h, sign)
    out.add_tree(x, sign)
    return out


def _leaf_beyond(tree: ColoredTree, u: int, w: int) -> int:
    """Least univalent vertex reachable from u without crossing to w"""
    nb = tree.neighbors
    seen = {u, w}
    stack = [u]
    found = []
    while stack:
        v = stack.pop()
        for n in nb[v]:
            if n not in seen:
                seen.add(n)
                if len(nb[n]) == 1:
                    found.append(n)
                else:
                    stack.append(n)
    return min(found)


@lru_cache(maxsize=None)
def _bodies(size: int, colors: Tuple[Label, ...]) -> Tuple[Branch, ...]:
    """Canonical rooted branches with `size` leaves and no symmetric vertex"""
    if size == 1:
        return tuple(colors)
    out = []
    for a in range(1, size // 2 + 1):
        for left in _bodies(a, colors):
            for right in _bodies(size - a, colors):
                kl, kr = branch_key(left), branch_key(right)
                if kl == kr:
                    continue
                if a == size - a and kl > kr:
                    continue
                out.append((left, right) if kl < kr else (right, left))
    return tuple(out)


def _check_limits(m: int, r: int, settings: Settings) -> None:
    if m < 1 or r < 1:
        raise ResourceLimitError("degree and number of colors must be at least 1")
    if m > settings.max_degree:
        raise ResourceLimitError(f"degree {m} exceeds the configured bound {settings.max_degree}")
    if r > settings.max_colors:
        raise ResourceLimitError(f"{r} colors exceed the configured bound {settings.max_colors}")


@lru_cache(maxsize=64)
def _enumerate(m: int, r: int) -> Tuple[ColoredTree, ...]:
    colors = tuple(range(1, r + 1))
    reps = set()
    for root in colors:
        for body in _bodies(m, colors):
            sign, rep = canonicalize(ColoredTree.from_rooted(root, body))
            if sign:
                reps.add(rep)
    result = tuple(sorted(reps, key=tree_sort_key))
    logger.debug("enumerated %d trees of degree %d on %d colors", len(result), m, r)
    return result


def enumerate_trees(m: int, r: int, settings: Settings = None) -> List[ColoredTree]:
    """Canonical representatives of all AS-nonvanishing trees of degree m on
    colors 1..r"""
    _check_limits(m, r, settings or get_settings())
    return list(_enumerate(m, r))


def relation_rows(trees: Sequence[ColoredTree]) -> List[Dict[int, Fraction]]:
    """Sparse rows spanning the IHX relations among `trees`"""
    index = {t: i for i, t in enumerate(trees)}
    rows = []
    for tree in trees:
        for edge in tree.internal_edges:
            relation = TreeVector.from_tree(tree) - ihx_resolve(tree, edge)
            row = {index[t]: c for t, c in relation.terms.items()}
            if row:
                rows.append(row)
    return rows


def relation_span_rank(m: int, r: int, settings: Settings = None) -> Tuple[int, int]:
    """(number of trees, rank of the IHX relation span) in degree m"""
    trees = enumerate_trees(m, r, settings)
    return len(trees), linalg.rank(relation_rows(trees), len(trees))


def dim(m: int, r: int, settings: Settings = None) -> int:
    """Dimension of A^tr_m(r): trees modulo the span of the relations"""
    count, rel_rank = relation_span_rank(m, r, settings)
    logger.info("dim A^tr_%d(%d) = %d - %d", m, r, count, rel_rank)
    return count - rel_rank


def eta_rank(m: int, r: int, settings: Settings = None) -> int:
    """Rank of the eta image of degree m; equals dim when eta is faithful"""
    trees = enumerate_trees(m, r, settings)
    letters = {c: c for c in range(1, r + 1)}
    columns: Dict[tuple, int] = {}
    rows = []
    for tree in trees:
        coords = lyndon_reduce(eta(tree, letters))
        rows.append({columns.setdefault(key, len(columns)): c for key, c in coords.items()})
    return linalg.rank(rows, len(columns))


def in_relation_span(vector: TreeVector, r: int, settings: Settings = None) -> bool:
    """Independent zero test: membership of each graded piece in the span
    of the enumerated IHX relations"""
    for deg, piece in vector.by_degree().items():
        trees = enumerate_trees(deg, r, settings)
        index = {t: i for i, t in enumerate(trees)}
        target = {}
        for tree, c in piece.terms.items():
            if tree not in index:
                raise ValueError(f"{tree!r} uses colors beyond 1..{r}")
            target[index[tree]] = c
        if not linalg.in_row_span(relation_rows(trees), target, len(trees)):
            return False
    return True


def to_dot(tree: ColoredTree, name: str = "tree") -> str:
    """Graphviz DOT rendering; trivalent vertices are labeled with their cyclic order"""
    lines = [f"graph {name} {{"]
    for v, ns in tree.adjacency:
        if len(ns) == 1:
            lines.append(f'  v{v} [shape=plaintext, label="{tree.label_of[v]}"];')
        else:
            order = " ".join(str(n) for n in ns)
            lines.append(f'  v{v} [shape=point, xlabel="{v}: {order}"];')
    for a, b in tree.edges:
        lines.append(f"  v{a} -- v{b};")
    lines.append("}")
    return "\n".join(lines)
