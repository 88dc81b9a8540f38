"""Tree-level formal Gaussian integration.

A legged series is a strut part Q over the surgery curves X together with a
strutless part R: rational combinations of forests whose legs carry X labels
(strings) or unlink colors (ints). Integration glues all X legs of each
forest in pairs, weighting a glued pair (x, y) by (-Q^-1)_xy; terms that
close a loop belong to the non-tree part and are dropped.
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from sympy import Matrix, Rational

from app.config import Settings, get_settings
from app.errors import (
    CertificateRefused,
    GuardExceededError,
    NonTreeTermError,
    SchemaError,
    SingularMatrixError,
    SphereConditionError,
    TreeclaspError,
)
from app.services import clasper, freegroup, linalg
from app.services.diagrams import ColoredTree, TreeVector, canonicalize, is_zero, tree_sort_key, vortex

logger = logging.getLogger(__name__)

SIGN_CONVENTION = (
    "[u,v] = u v u^-1 v^-1; trees read as brackets in cyclic order after the root; "
    "Borromean vortex on (e1, e3, e2) so that a degree-1 clasper integrates to +beta"
)

Forest = Tuple[ColoredTree, ...]
Leg = Tuple[int, int, str]


@dataclass(frozen=True)
class StrutMatrix:
    labels: Tuple[str, ...]
    entries: Tuple[Tuple[Fraction, ...], ...]

    @classmethod
    def from_rows(cls, labels: Sequence[str], rows: Sequence[Sequence]) -> "StrutMatrix":
        n = len(labels)
        if len(rows) != n or any(len(row) != n for row in rows):
            raise SchemaError(f"strut matrix must be {n}x{n} for labels {list(labels)}")
        entries = tuple(tuple(Fraction(x) for x in row) for row in rows)
        for i in range(n):
            for j in range(i + 1, n):
                if entries[i][j] != entries[j][i]:
                    raise SchemaError("strut matrix must be symmetric")
        if len(set(labels)) != n:
            raise SchemaError("strut labels must be distinct")
        return cls(tuple(labels), entries)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def entry(self, a: str, b: str) -> Fraction:
        return self.entries[self.index(a)][self.index(b)]

    def restrict(self, labels: Sequence[str]) -> "StrutMatrix":
        keep = [lab for lab in self.labels if lab in set(labels)]
        idx = [self.index(lab) for lab in keep]
        return StrutMatrix(tuple(keep), tuple(tuple(self.entries[i][j] for j in idx) for i in idx))

    def rows(self) -> List[List[Fraction]]:
        return [list(row) for row in self.entries]


@dataclass(frozen=True)
class ForestTerm:
    trees: Forest
    coeff: Fraction

    def x_labels(self, xset: Set[str]) -> Set[str]:
        return {lab for t in self.trees for _, lab in t.labels if lab in xset}


@dataclass
class LeggedSeries:
    Q: StrutMatrix
    R: List[ForestTerm]
    cap: int
    non_tree: int = 0

    def __post_init__(self):
        xset = set(self.Q.labels)
        for term in self.R:
            for tree in term.trees:
                for _, lab in tree.labels:
                    if not (isinstance(lab, int) or lab in xset):
                        raise SchemaError(f"leg label {lab!r} is neither a color nor a strut label")
                if tree.is_strut and all(lab in xset for _, lab in tree.labels):
                    raise SchemaError("the strutless part contains a strut with two X legs")

    @property
    def xset(self) -> Set[str]:
        return set(self.Q.labels)


@dataclass
class GluingResult:
    """Connected glued trees in `value`; disconnected gluings in `forests`"""

    value: TreeVector
    forests: Dict[Forest, Fraction] = field(default_factory=dict)
    per_degree: Dict[int, TreeVector] = field(default_factory=dict)
    vanishing: Dict[int, bool] = field(default_factory=dict)
    min_degree: Optional[int] = None
    sign_convention: str = SIGN_CONVENTION

    @classmethod
    def from_parts(cls, value: TreeVector, forests: Dict[Forest, Fraction]) -> "GluingResult":
        per_degree = value.by_degree()
        vanishing = {d: is_zero(v) for d, v in per_degree.items()}
        nonzero = [d for d, z in vanishing.items() if not z]
        forests = {k: c for k, c in forests.items() if c}
        return cls(value, forests, per_degree, vanishing, min(nonzero) if nonzero else None)

    def same_as(self, other: "GluingResult") -> bool:
        return self.value == other.value and self.forests == other.forests


def strut_matrix(presentation: clasper.SurgeryPresentation) -> StrutMatrix:
    return StrutMatrix.from_rows(presentation.labels, presentation.linking)


def negative_inverse(Q: Union[StrutMatrix, Sequence[Sequence]]) -> StrutMatrix:
    """Exact -Q^-1; a singular Q raises SingularMatrixError carrying a kernel vector"""
    if not isinstance(Q, StrutMatrix):
        Q = StrutMatrix.from_rows([f"x{i + 1}" for i in range(len(Q))], Q)
    inverse = linalg.inverse(Q.rows())
    return StrutMatrix(Q.labels, tuple(tuple(-x for x in row) for row in inverse))


# --- leading series of a surgery presentation ----------------------------------


def _lcs(word: freegroup.Word, settings: Settings) -> int:
    return freegroup.lcs_degree(word, settings.max_degree + 1).degree


def leading_series(
    presentation: clasper.SurgeryPresentation,
    cap: Optional[int] = None,
    settings: Settings = None,
) -> LeggedSeries:
    """Strut part = linking matrix; strutless part = the forests built from
    one Borromean vortex per clasper and the tree expansion of every
    nontrivial leaf, each piece used at most once.

    Leaf expansions are truncated so that no glued tree exceeds degree cap.
    """
    settings = settings or get_settings()
    if not presentation.certificates:
        raise CertificateRefused("no null certificate attached to the presentation", leaf="*")
    Q = strut_matrix(presentation)
    real = [c for c in presentation.leaf_curves if c.word]
    lcs = {c.label: _lcs(c.word, settings) for c in real}
    if cap is None:
        cap = sum(lcs.values()) - 1
    unlinked = all(
        presentation.leaf_linking(a.label, b.label) == 0 for a in real for b in real if a.label != b.label
    )
    pieces: List[List[Tuple[ColoredTree, Fraction]]] = []
    vortices = [vortex(a, c, b) for a, b, c in presentation.vortices]
    for c in real:
        leaf_cap = cap + 1 - (sum(lcs.values()) - lcs[c.label]) if unlinked else cap + 1
        if leaf_cap < 1:
            expansion = TreeVector()
        else:
            expansion = freegroup.tree_expansion(c.word, leaf_cap, c.label)
        pieces.append(list(expansion))
        logger.debug("leaf %s: lcs %d, %d expansion terms up to %d", c.label, lcs[c.label], len(expansion), leaf_cap)
    R: List[ForestTerm] = []
    for k in range(len(vortices) + 1):
        for chosen in combinations(vortices, k):
            for picks in product(*[[None] + p for p in pieces]):
                trees = list(chosen)
                coeff = Fraction(1)
                for pick in picks:
                    if pick is not None:
                        trees.append(pick[0])
                        coeff *= pick[1]
                if trees:
                    R.append(ForestTerm(tuple(trees), coeff))
    logger.info("leading series: %d curves, %d forest terms, cap %d", len(Q.labels), len(R), cap)
    return LeggedSeries(Q, R, cap)


# --- gluing ---------------------------------------------------------------------


def _legs(term: ForestTerm, xset: Set[str]) -> List[Leg]:
    return [(ti, v, lab) for ti, tree in enumerate(term.trees) for v, lab in tree.labels if lab in xset]


def _matchings(legs: List[Leg], weights: StrutMatrix) -> Iterator[Tuple[List[Tuple[Leg, Leg]], Fraction]]:
    """Perfect matchings of the legs with their weights; zero weights
    and pairs on one tree (which close a loop) are skipped"""
    if not legs:
        yield [], Fraction(1)
        return
    first, rest = legs[0], legs[1:]
    for k, other in enumerate(rest):
        w = weights.entry(first[2], other[2])
        if not w or first[0] == other[0]:
            continue
        for tail, wt in _matchings(rest[:k] + rest[k + 1:], weights):
            yield [(first, other)] + tail, w * wt


def _glue_forest(trees: Forest, pairs: Sequence[Tuple[Leg, Leg]]) -> Optional[List[ColoredTree]]:
    """Join the neighbors of each glued pair of legs and delete the legs;
    None when the result contains a loop"""
    adj: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
    labels: Dict[Tuple[int, int], object] = {}
    for ti, tree in enumerate(trees):
        for v, ns in tree.adjacency:
            adj[(ti, v)] = [(ti, n) for n in ns]
        for v, lab in tree.labels:
            labels[(ti, v)] = lab
    for (ta, va, _), (tb, vb, _) in pairs:
        a, b = (ta, va), (tb, vb)
        na, nb = adj[a][0], adj[b][0]
        if na == b or na == nb:
            return None
        adj[na] = [nb if x == a else x for x in adj[na]]
        adj[nb] = [na if x == b else x for x in adj[nb]]
        del adj[a], adj[b]
        del labels[a], labels[b]
    seen: Set[Tuple[int, int]] = set()
    components = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            for n in adj[stack.pop()]:
                if n not in seen:
                    seen.add(n)
                    comp.append(n)
                    stack.append(n)
        edges = sum(len(adj[v]) for v in comp) // 2
        if edges != len(comp) - 1:
            return None
        ids = {v: i for i, v in enumerate(sorted(comp))}
        components.append(
            ColoredTree.build(
                {ids[v]: [ids[n] for n in adj[v]] for v in comp},
                {ids[v]: labels[v] for v in comp if v in labels},
            )
        )
    return components


def _accumulate(value: TreeVector, forests: Dict[Forest, Fraction], parts: List[ColoredTree], coeff: Fraction) -> None:
    if not coeff:
        return
    if len(parts) == 1:
        value.add_tree(parts[0], coeff)
        return
    reps = []
    for part in parts:
        sign, rep = canonicalize(part)
        if sign == 0:
            return
        coeff *= sign
        reps.append(rep)
    key = tuple(sorted(reps, key=tree_sort_key))
    total = forests.get(key, 0) + coeff
    if total:
        forests[key] = total
    else:
        forests.pop(key, None)


def _integrate(series: LeggedSeries, guard: int, guard_name: str) -> GluingResult:
    if series.non_tree:
        raise NonTreeTermError("the series carries non-tree terms; only tree-level gluing is supported")
    weights = negative_inverse(series.Q)
    xset = series.xset
    value = TreeVector()
    forests: Dict[Forest, Fraction] = {}
    for term in series.R:
        legs = _legs(term, xset)
        if len(legs) > guard:
            raise GuardExceededError(f"{len(legs)} X legs in one monomial exceed {guard_name} = {guard}")
        if len(legs) % 2:
            continue
        for pairs, w in _matchings(legs, weights):
            parts = _glue_forest(term.trees, pairs)
            if parts is not None:
                _accumulate(value, forests, parts, term.coeff * w)
    return GluingResult.from_parts(value, forests)


def glue(series: LeggedSeries, settings: Settings = None) -> GluingResult:
    """Sum over perfect pairings of X legs, weighted by -Q^-1"""
    settings = settings or get_settings()
    result = _integrate(series, guard=settings.max_x_legs, guard_name="max_x_legs")
    logger.debug("glue: %d tree terms, %d forest terms", len(result.value), len(result.forests))
    return result


def _pairings(legs: Sequence[Leg]) -> Iterator[List[Tuple[Leg, Leg]]]:
    """Every perfect pairing, grown by inserting the last two legs into the
    pairings of the rest"""
    if not legs:
        yield []
        return
    a, b = legs[-2], legs[-1]
    for rest in _pairings(legs[:-2]):
        yield rest + [(a, b)]
        for k, (x, y) in enumerate(rest):
            others = rest[:k] + rest[k + 1:]
            yield others + [(x, a), (y, b)]
            yield others + [(x, b), (y, a)]


def _sympy_negative_inverse(Q: StrutMatrix) -> Dict[Tuple[str, str], Fraction]:
    n = len(Q.labels)
    if not n:
        return {}
    m = Matrix([[Rational(x.numerator, x.denominator) for x in row] for row in Q.entries])
    if m.det() == 0:
        kernel = m.nullspace()[0]
        raise SingularMatrixError("singular strut matrix", [Fraction(int(x.p), int(x.q)) for x in kernel])
    inv = -m.inv()
    return {
        (Q.labels[i], Q.labels[j]): Fraction(int(inv[i, j].p), int(inv[i, j].q))
        for i in range(n) for j in range(n)
    }


def _contract(trees: Forest, pairs: Sequence[Tuple[Leg, Leg]]) -> Optional[List[ColoredTree]]:
    """Delete every paired leg at once, joining the two leg neighbors; None
    when a component is not a tree"""
    partner: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for (ta, va, _), (tb, vb, _) in pairs:
        partner[(ta, va)] = (tb, vb)
        partner[(tb, vb)] = (ta, va)
    nbrs = {(ti, v): [(ti, n) for n in ns] for ti, tree in enumerate(trees) for v, ns in tree.adjacency}
    labels = {(ti, v): lab for ti, tree in enumerate(trees) for v, lab in tree.labels}
    crossed: Set[Tuple[int, int]] = set()

    def through(n):
        # a glued strut passes the edge on to the far end
        path: Set[Tuple[int, int]] = set()
        while n in partner:
            if n in path:
                return None
            path.update((n, partner[n]))
            n = nbrs[partner[n]][0]
        crossed.update(path)
        return n

    graph: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
    for v, ns in nbrs.items():
        if v in partner:
            continue
        joined = [through(n) for n in ns]
        if None in joined or v in joined:
            return None
        graph[v] = joined
    if crossed != set(partner):
        return None
    parent = {v: v for v in graph}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for v, ns in graph.items():
        for n in ns:
            parent[find(v)] = find(n)
    groups: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
    for v in sorted(graph):
        groups.setdefault(find(v), []).append(v)
    out = []
    for members in groups.values():
        if sum(len(graph[v]) for v in members) != 2 * (len(members) - 1):
            return None
        ids = {v: i for i, v in enumerate(members)}
        out.append(
            ColoredTree.build(
                {ids[v]: [ids[n] for n in graph[v]] for v in members},
                {ids[v]: labels[v] for v in members if v in labels},
            )
        )
    return out


def brute_glue(series: LeggedSeries, settings: Settings = None) -> GluingResult:
    """Oracle for `glue`: every pairing of the X legs, including those that
    close loops, weighted by a separately computed -Q^-1"""
    settings = settings or get_settings()
    if series.non_tree:
        raise NonTreeTermError("the series carries non-tree terms; only tree-level gluing is supported")
    weights = _sympy_negative_inverse(series.Q)
    xset = series.xset
    value = TreeVector()
    forests: Dict[Forest, Fraction] = {}
    for term in series.R:
        legs = _legs(term, xset)
        if len(legs) > settings.max_brute_legs:
            raise GuardExceededError(
                f"{len(legs)} X legs in one monomial exceed max_brute_legs = {settings.max_brute_legs}"
            )
        if len(legs) % 2:
            continue
        for pairs in _pairings(legs):
            w = term.coeff
            for x, y in pairs:
                w *= weights[(x[2], y[2])]
            if not w:
                continue
            parts = _contract(term.trees, pairs)
            if parts is not None:
                _accumulate(value, forests, parts, w)
    return GluingResult.from_parts(value, forests)


def _arm_labels(arms: Sequence[Sequence[str]], chosen: Sequence[int]) -> Set[str]:
    return {label for i in chosen for label in arms[i]}


def arm_filtered_glue(series: LeggedSeries, arms: Sequence[Sequence[str]], settings: Settings = None) -> GluingResult:
    """Glue only the forests with legs on every arm"""
    xset = series.xset
    keep = [
        term for term in series.R
        if all(term.x_labels(xset) & set(arm) for arm in arms)
    ]
    return glue(LeggedSeries(series.Q, keep, series.cap, series.non_tree), settings)


def arm_alternation(
    presentation: clasper.SurgeryPresentation,
    series: LeggedSeries,
    settings: Settings = None,
) -> GluingResult:
    """Inclusion-exclusion of glue over the sub-presentations spanned by
    every subset of arms: sum over S of (-1)^(#arms - #S) glue(series | S)"""
    settings = settings or get_settings()
    arms = presentation.arms
    if len(arms) > settings.max_alternation_arms:
        raise GuardExceededError(f"{len(arms)} arms exceed max_alternation_arms = {settings.max_alternation_arms}")
    xset = series.xset
    value = TreeVector()
    forests: Dict[Forest, Fraction] = {}
    for k in range(len(arms) + 1):
        sign = -1 if (len(arms) - k) % 2 else 1
        for chosen in combinations(range(len(arms)), k):
            labels = _arm_labels(arms, chosen)
            sub_R = [term for term in series.R if term.x_labels(xset) <= labels]
            if not sub_R:
                continue
            part = glue(LeggedSeries(series.Q.restrict(labels), sub_R, series.cap, series.non_tree), settings)
            value = value + part.value.scaled(sign)
            for key, c in part.forests.items():
                forests[key] = forests.get(key, 0) + sign * c
    return GluingResult.from_parts(value, forests)


# --- the whole pipeline -------------------------------------------------------------


@dataclass
class ZminReport:
    target: ColoredTree
    result: GluingResult
    presentation: clasper.SurgeryPresentation
    certificate: clasper.Certificate
    sphere: clasper.SphereVerdict
    matched_sign: Optional[int]
    lower_degrees_vanish: bool
    stages: List[Tuple[str, float]]
    route: str
    reduced: Optional[clasper.ClasperSpec] = None
    oracle_agrees: Optional[bool] = None
    filtered_agrees: Optional[bool] = None

    @property
    def min_degree(self) -> Optional[int]:
        return self.result.min_degree

    @property
    def passed(self) -> bool:
        return (
            self.matched_sign is not None
            and self.lower_degrees_vanish
            and self.min_degree == self.target.degree
        )


@contextmanager
def _stage(name: str, timings: List[Tuple[str, float]]):
    start = time.perf_counter()
    try:
        yield
    except TreeclaspError as exc:
        raise exc.with_stage(name)
    finally:
        elapsed = time.perf_counter() - start
        timings.append((name, elapsed))
        logger.info("stage %s finished in %.3fs", name, elapsed)


def zmin(
    pattern: Union[clasper.Pattern, clasper.NPattern],
    cap: Optional[int] = None,
    route: str = "reduce",
    oracle: bool = False,
    settings: Settings = None,
) -> ZminReport:
    """build -> compile -> certify -> leading series -> arm alternation, then
    compare the lowest nonvanishing degree with the pattern tree"""
    settings = settings or get_settings()
    timings: List[Tuple[str, float]] = []
    target = pattern.tree
    cap = cap or target.degree
    reduced = None
    with _stage("build", timings):
        if isinstance(pattern, clasper.NPattern):
            spec = clasper.build_n_clasper(pattern)
            level = pattern.n
            if route == "reduce":
                reduced = clasper.reduce_to_degree_one(spec)
                expanded = clasper.expand_edges(reduced)
            elif route == "expand":
                expanded = clasper.expand_edges(spec)
                level = 1
            else:
                raise SchemaError(f"unknown route {route!r}; use 'reduce' or 'expand'")
        else:
            spec = clasper.build_clasper(pattern)
            expanded = clasper.expand_edges(spec)
            level = 1
    with _stage("compile", timings):
        presentation = clasper.compile_expanded(expanded)
    with _stage("certify", timings):
        certificate = clasper.certify_null(presentation, level, settings)
    with _stage("sphere", timings):
        sphere = clasper.check_sphere_condition(expanded)
        if not sphere.passed:
            raise SphereConditionError("; ".join(sphere.reasons))
    with _stage("series", timings):
        series = leading_series(presentation, cap, settings)
    with _stage("integrate", timings):
        result = arm_alternation(presentation, series, settings)
    oracle_agrees = filtered_agrees = None
    if oracle:
        with _stage("oracle", timings):
            filtered = arm_filtered_glue(series, presentation.arms, settings)
            filtered_agrees = filtered.same_as(result)
            oracle_agrees = brute_glue(series, settings).same_as(glue(series, settings))
    with _stage("compare", timings):
        beta = TreeVector.from_tree(target)
        at_target = result.per_degree.get(target.degree, TreeVector())
        if is_zero(at_target - beta):
            matched = 1
        elif is_zero(at_target + beta):
            matched = -1
        else:
            matched = None
        lower = all(z for d, z in result.vanishing.items() if d < target.degree)
    report = ZminReport(
        target=target,
        result=result,
        presentation=presentation,
        certificate=certificate,
        sphere=sphere,
        matched_sign=matched,
        lower_degrees_vanish=lower,
        stages=timings,
        route=route if isinstance(pattern, clasper.NPattern) else "direct",
        reduced=reduced,
        oracle_agrees=oracle_agrees,
        filtered_agrees=filtered_agrees,
    )
    logger.info(
        "zmin of %s: min degree %s, sign %s, %s",
        target.to_text(), report.min_degree, matched, "PASS" if report.passed else "FAIL",
    )
    return report
