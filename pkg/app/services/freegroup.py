"""Free group F on x_1..x_r: words, the phi map from rooted trees, Magnus
expansion, lower central series degree, Fox calculus and derived series.

A Word is a freely reduced tuple of nonzero ints: +i is x_i, -i is x_i^-1.
The commutator convention is [u, v] = u v u^-1 v^-1 throughout.
"""

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from app.config import Settings, get_settings
from app.errors import DepthExceededError, GeneratorRangeError, WordSyntaxError
from app.services.diagrams import Branch, ColoredTree, TreeVector, branch_leaves, branch_size, is_node
from app.services.lie import lyndon_bracket, lyndon_coordinates

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]
Monomial = Tuple[int, ...]

IDENTITY: Word = ()


def reduce_word(letters: Iterable[int]) -> Word:
    """Free reduction; the result does not depend on the cancellation order"""
    stack: List[int] = []
    for letter in letters:
        if letter == 0:
            raise ValueError("0 is not a generator")
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def generator(i: int) -> Word:
    return (i,)


def inverse(w: Word) -> Word:
    return tuple(-x for x in reversed(w))


def multiply(*words: Word) -> Word:
    return reduce_word(x for w in words for x in w)


def power(w: Word, n: int) -> Word:
    if n < 0:
        return power(inverse(w), -n)
    return reduce_word(w * n)


def commutator(u: Word, v: Word) -> Word:
    return multiply(u, v, inverse(u), inverse(v))


def rank_of(w: Word) -> int:
    """Largest generator index occurring in w"""
    return max((abs(x) for x in w), default=0)


def word_to_string(w: Word) -> str:
    """Surface syntax; runs of one letter are written as powers"""
    if not w:
        return "1"
    parts = []
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        run = (j - i) * (1 if w[i] > 0 else -1)
        parts.append(f"x{abs(w[i])}" if run == 1 else f"x{abs(w[i])}^{run}")
        i = j
    return " ".join(parts)


# --- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<gen>x\d+)|(?P<int>-?\d+)|(?P<sym>[\[\](),^*]))")


class _WordParser:
    """Recursive-descent parser for

        W    ::= fact+
        fact ::= atom ("^" int)*
        atom ::= "x" digits | "1" | "[" W "," W "]" | "(" W ")"
    """

    def __init__(self, text: str, r: Optional[int]):
        self.text = text
        self.r = r
        self.tokens: List[Tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise WordSyntaxError(f"unexpected character {text[pos:].lstrip()[0]!r}", self._skip_ws(pos), text)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def _skip_ws(self, pos: int) -> int:
        while pos < len(self.text) and self.text[pos].isspace():
            pos += 1
        return pos

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def position(self) -> int:
        tok = self.peek()
        return tok[2] if tok else len(self.text)

    def fail(self, what: str):
        tok = self.peek()
        found = f"{tok[1]!r}" if tok else "end of input"
        raise WordSyntaxError(f"expected {what}, found {found}", self.position(), self.text)

    def expect(self, symbol: str) -> None:
        tok = self.peek()
        if tok is None or tok[0] != "sym" or tok[1] != symbol:
            self.fail(repr(symbol))
        self.i += 1

    def starts_atom(self) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        return tok[0] == "gen" or (tok[0] == "int" and tok[1] == "1") or (tok[0] == "sym" and tok[1] in "[(")

    def word(self) -> Word:
        if not self.starts_atom():
            self.fail("a generator, '1', '[' or '('")
        parts = [self.factor()]
        while True:
            tok = self.peek()
            if tok and tok[0] == "sym" and tok[1] == "*":
                self.i += 1
                if not self.starts_atom():
                    self.fail("a factor after '*'")
            if not self.starts_atom():
                break
            parts.append(self.factor())
        return multiply(*parts)

    def factor(self) -> Word:
        w = self.atom()
        while True:
            tok = self.peek()
            if not (tok and tok[0] == "sym" and tok[1] == "^"):
                return w
            self.i += 1
            tok = self.peek()
            if tok is None or tok[0] != "int":
                self.fail("an integer exponent")
            self.i += 1
            w = power(w, int(tok[1]))

    def atom(self) -> Word:
        kind, value, pos = self.peek()
        if kind == "gen":
            self.i += 1
            index = int(value[1:])
            if index < 1:
                raise WordSyntaxError("generator indices start at 1", pos, self.text)
            if self.r is not None and index > self.r:
                raise GeneratorRangeError(f"generator x{index} at position {pos} exceeds r = {self.r}")
            return (index,)
        if kind == "int":
            self.i += 1
            return IDENTITY
        if value == "[":
            self.i += 1
            u = self.word()
            self.expect(",")
            v = self.word()
            self.expect("]")
            return commutator(u, v)
        self.i += 1
        w = self.word()
        self.expect(")")
        return w


def parse_word(text: str, r: Optional[int] = None) -> Word:
    """Parse surface syntax such as "[x1,[x2,x3]] x1^-2" into a reduced Word.

    Raises WordSyntaxError with the offending position, and
    GeneratorRangeError for an index above r.
    """
    parser = _WordParser(text, r)
    w = parser.word()
    if parser.peek() is not None:
        parser.fail("end of input")
    return w


# --- rooted trees and phi ---------------------------------------------------


@dataclass(frozen=True)
class RootedTree:
    """A tree with one uncolored root leaf, held as its planar body"""

    body: Branch

    @classmethod
    def from_tree(cls, tree: ColoredTree, root: int) -> "RootedTree":
        _, body = tree.rooted(root)
        return cls(body)

    @property
    def leaves(self) -> List:
        return branch_leaves(self.body)

    @property
    def leaf_count(self) -> int:
        return branch_size(self.body)

    @property
    def is_strut(self) -> bool:
        return not is_node(self.body)

    def to_tree(self, root_label) -> ColoredTree:
        return ColoredTree.from_rooted(root_label, self.body)


def phi(tree: Union[RootedTree, Branch]) -> Word:
    """Leaf colored c -> x_c; a trivalent vertex -> commutator of its two sides"""
    body = tree.body if isinstance(tree, RootedTree) else tree
    return _phi(body)


@lru_cache(maxsize=None)
def _phi(body: Branch) -> Word:
    if is_node(body):
        return commutator(_phi(body[0]), _phi(body[1]))
    if not isinstance(body, int) or body < 1:
        raise GeneratorRangeError(f"leaf color {body!r} is not a generator index")
    return (body,)


def exponent_sums(w: Word, r: Optional[int] = None) -> List[int]:
    """Exponent sum of every generator 1..r (r defaults to the largest index in w)"""
    r = rank_of(w) if r is None else r
    sums = [0] * r
    for x in w:
        if abs(x) <= r:
            sums[abs(x) - 1] += 1 if x > 0 else -1
    return sums


def is_null_homologous(w: Word) -> bool:
    return not any(exponent_sums(w))


# --- Magnus expansion -------------------------------------------------------


class MagnusSeries:
    """Truncated noncommutative power series in X_1..X_r.

    Monomials are tuples of generator indices; terms of length above `cap`
    are dropped by every operation.
    """

    __slots__ = ("cap", "coeffs")

    def __init__(self, cap: int, coeffs: Mapping[Monomial, Fraction] = None):
        if cap < 0:
            raise ValueError("cap must be non-negative")
        self.cap = cap
        self.coeffs: Dict[Monomial, Fraction] = {m: c for m, c in (coeffs or {}).items() if c and len(m) <= cap}

    @classmethod
    def one(cls, cap: int) -> "MagnusSeries":
        return cls(cap, {(): 1})

    def __mul__(self, other: "MagnusSeries") -> "MagnusSeries":
        cap = min(self.cap, other.cap)
        out: Dict[Monomial, Fraction] = {}
        for m, a in self.coeffs.items():
            room = cap - len(m)
            if room < 0:
                continue
            for n, b in other.coeffs.items():
                if len(n) <= room:
                    key = m + n
                    total = out.get(key, 0) + a * b
                    if total:
                        out[key] = total
                    else:
                        out.pop(key, None)
        return MagnusSeries(cap, out)

    def __add__(self, other: "MagnusSeries") -> "MagnusSeries":
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + c
        return MagnusSeries(min(self.cap, other.cap), out)

    def __sub__(self, other: "MagnusSeries") -> "MagnusSeries":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "MagnusSeries":
        return MagnusSeries(self.cap, {m: c * factor for m, c in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, MagnusSeries) and self.cap == other.cap and self.coeffs == other.coeffs

    def coefficient(self, monomial: Monomial):
        return self.coeffs.get(tuple(monomial), 0)

    def homogeneous(self, d: int) -> Dict[Monomial, Fraction]:
        return {m: c for m, c in self.coeffs.items() if len(m) == d}

    def lowest_degree(self) -> Optional[int]:
        """Least positive degree with a nonzero coefficient"""
        degrees = [len(m) for m in self.coeffs if m]
        return min(degrees) if degrees else None

    def to_string(self) -> str:
        items = sorted(self.coeffs.items(), key=lambda kv: (len(kv[0]), kv[0]))
        if not items:
            return "0"
        out = ""
        for m, c in items:
            mono = "".join(f"X{i}" for i in m)
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if mono:
                body = mono if mag == 1 else f"{mag}*{mono}"
            else:
                body = str(mag)
            out += (f"{'-' if sign == '-' else ''}{body}" if not out else f" {sign} {body}")
        return out

    def __repr__(self) -> str:
        return f"MagnusSeries({self.to_string()}, cap={self.cap})"


def _letter_series(letter: int, cap: int) -> MagnusSeries:
    i = abs(letter)
    if letter > 0:
        return MagnusSeries(cap, {(): 1, (i,): 1})
    return MagnusSeries(cap, {(i,) * k: (-1) ** k for k in range(cap + 1)})


def magnus(w: Word, cap: int) -> MagnusSeries:
    """Magnus expansion x_i -> 1 + X_i truncated above degree cap"""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    series = MagnusSeries.one(cap)
    for letter in w:
        series = series * _letter_series(letter, cap)
    return series


def _parse_monomial(monomial: Union[str, Sequence[int]]) -> Monomial:
    if isinstance(monomial, str):
        found = re.findall(r"X(\d+)", monomial)
        if "".join(f"X{d}" for d in found) != monomial.replace(" ", ""):
            raise WordSyntaxError(f"malformed monomial {monomial!r}", 0, monomial)
        return tuple(int(d) for d in found)
    return tuple(monomial)


def magnus_coefficient(w: Word, monomial: Union[str, Sequence[int]]) -> int:
    """Coefficient of one noncommutative monomial (e.g. "X1X2X3") in the
    Magnus expansion; the first nonvanishing ones are Milnor-type numbers"""
    key = _parse_monomial(monomial)
    if not key:
        return 1
    return int(magnus(w, len(key)).coefficient(key))


@dataclass(frozen=True)
class LcsDegree:
    """Lower central series position: w lies in the `degree`th term; when
    `saturated` the expansion vanished up to the cap and only a lower bound
    is known"""

    degree: int
    saturated: bool = False

    def __str__(self) -> str:
        return f">= {self.degree}" if self.saturated else str(self.degree)


def lcs_degree(w: Word, cap: int) -> LcsDegree:
    low = magnus(w, cap).lowest_degree()
    if low is None:
        return LcsDegree(cap, saturated=True)
    return LcsDegree(low)


# --- logarithm and tree expansion -------------------------------------------


def _exp_letter_series(letter: int, cap: int) -> MagnusSeries:
    i = abs(letter)
    sign = 1 if letter > 0 else -1
    return MagnusSeries(cap, {(i,) * k: Fraction(sign ** k, factorial(k)) for k in range(cap + 1)})


def exp_magnus(w: Word, cap: int) -> MagnusSeries:
    """Group-like expansion x_i -> exp(X_i); agrees with `magnus` in the
    lowest nonvanishing degree"""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    series = MagnusSeries.one(cap)
    for letter in w:
        series = series * _exp_letter_series(letter, cap)
    return series


def magnus_log(w: Word, cap: int) -> MagnusSeries:
    """log of the group-like expansion, a Lie series, truncated at cap"""
    a = exp_magnus(w, cap) - MagnusSeries.one(cap)
    out = MagnusSeries(cap)
    power_k = MagnusSeries.one(cap)
    for k in range(1, cap + 1):
        power_k = power_k * a
        if not power_k.coeffs:
            break
        out = out + power_k.scaled(Fraction((-1) ** (k + 1), k))
    return out


def _lie_to_trees(coords: Mapping[Tuple[int, ...], Fraction], root_label) -> TreeVector:
    out = TreeVector()
    for word, c in coords.items():
        out.add_tree(ColoredTree.from_rooted(root_label, lyndon_bracket(word)), c)
    return out


def tree_expansion(w: Word, cap: int, root_label) -> TreeVector:
    """Trees with root leaf `root_label` encoding log magnus(w) up to degree cap.

    Each Lyndon coordinate becomes the tree of its standard bracket. For
    w = phi(T) the lowest term is T itself with coefficient 1.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    log = magnus_log(w, cap)
    out = TreeVector()
    for d in range(1, cap + 1):
        piece = log.homogeneous(d)
        if piece:
            out = out + _lie_to_trees(lyndon_coordinates(piece), root_label)
    logger.debug("tree expansion of %s to cap %d: %d terms", word_to_string(w), cap, len(out))
    return out


def leading_lie_part(w: Word, cap: int, root_label) -> TreeVector:
    """Lowest nonvanishing homogeneous part of magnus(w) - 1 read directly
    as a Lie element; agrees with the leading part of tree_expansion"""
    series = magnus(w, cap)
    low = series.lowest_degree()
    if low is None:
        return TreeVector()
    return _lie_to_trees(lyndon_coordinates(series.homogeneous(low)), root_label)


# --- free solvable quotients and Fox calculus --------------------------------


@dataclass(frozen=True)
class SolvableElement:
    """Normal form of an element of F / F^(level).

    Level 0 is the trivial group. At level n the element is the pair
    (image in F / F^(n-1), Fox derivatives over Z[F / F^(n-1)]), which is
    the Magnus embedding of F / F^(n). `derivs` holds (generator, group ring
    element) pairs with nonzero entries only.
    """

    level: int
    base: Optional["SolvableElement"]
    derivs: Tuple[Tuple[int, "GroupRingElement"], ...]
    representative: Word = field(default=(), compare=False)

    @property
    def is_identity(self) -> bool:
        return not self.derivs

    def deriv(self, i: int) -> "GroupRingElement":
        return dict(self.derivs).get(i, GroupRingElement.zero())

    def exponents(self) -> Dict[int, int]:
        """Exponent vector at level 1"""
        return {i: int(d.augmentation()) for i, d in self.derivs}

    def to_string(self) -> str:
        if self.level == 1:
            return _t_monomial(self.exponents())
        return word_to_string(self.representative)

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "word": word_to_string(self.representative),
            "base": self.base.to_dict() if self.base and self.base.level > 0 else None,
            "derivs": {str(i): d.to_pairs() for i, d in self.derivs},
        }


@dataclass(frozen=True)
class GroupRingElement:
    """Integer combination of normal forms of one level"""

    terms: FrozenSet[Tuple[SolvableElement, int]]

    @classmethod
    def zero(cls) -> "GroupRingElement":
        return cls(frozenset())

    @classmethod
    def from_dict(cls, terms: Mapping[SolvableElement, int]) -> "GroupRingElement":
        return cls(frozenset((g, c) for g, c in terms.items() if c))

    def as_dict(self) -> Dict[SolvableElement, int]:
        return dict(self.terms)

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        out = self.as_dict()
        for g, c in other.terms:
            out[g] = out.get(g, 0) + c
        return GroupRingElement.from_dict(out)

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement(frozenset((g, -c) for g, c in self.terms))

    def __sub__(self, other: "GroupRingElement") -> "GroupRingElement":
        return self + (-other)

    def left_mul(self, g: SolvableElement) -> "GroupRingElement":
        out: Dict[SolvableElement, int] = {}
        for h, c in self.terms:
            key = solvable_mul(g, h)
            out[key] = out.get(key, 0) + c
        return GroupRingElement.from_dict(out)

    def is_zero(self) -> bool:
        return not self.terms

    def augmentation(self) -> int:
        return sum(c for _, c in self.terms)

    def sorted_terms(self) -> List[Tuple[SolvableElement, int]]:
        return sorted(self.terms, key=lambda gc: _element_sort_key(gc[0]))

    def to_pairs(self) -> List[List]:
        return [[g.to_string(), str(c)] for g, c in self.sorted_terms()]

    def to_string(self) -> str:
        if not self.terms:
            return "0"
        out = ""
        for g, c in self.sorted_terms():
            mono = g.to_string()
            mag = abs(c)
            body = mono if mono != "1" and mag == 1 else (str(mag) if mono == "1" else f"{mag}*{mono}")
            if not out:
                out = f"-{body}" if c < 0 else body
            else:
                out += f" - {body}" if c < 0 else f" + {body}"
        return out

    def __str__(self) -> str:
        return self.to_string()


def _t_monomial(exponents: Mapping[int, int]) -> str:
    parts = []
    for i in sorted(exponents):
        e = exponents[i]
        if e:
            parts.append(f"t{i}" if e == 1 else f"t{i}^{e}")
    return " ".join(parts) or "1"


def _element_sort_key(g: SolvableElement) -> tuple:
    if g.level == 1:
        exps = g.exponents()
        return (sum(abs(e) for e in exps.values()), sorted(exps.items()))
    return (len(g.representative), g.representative)


TRIVIAL = SolvableElement(0, None, ())


@lru_cache(maxsize=None)
def solvable_identity(level: int) -> SolvableElement:
    if level == 0:
        return TRIVIAL
    return SolvableElement(level, solvable_identity(level - 1), ())


@lru_cache(maxsize=None)
def _letter_element(letter: int, level: int) -> SolvableElement:
    """Normal form of x_i (letter i) or x_i^-1 (letter -i)"""
    if level == 0:
        return TRIVIAL
    i = abs(letter)
    base = _letter_element(letter, level - 1)
    if letter > 0:
        d = GroupRingElement.from_dict({solvable_identity(level - 1): 1})
    else:
        d = GroupRingElement.from_dict({base: -1})
    return SolvableElement(level, base, ((i, d),), (letter,))


def solvable_mul(a: SolvableElement, b: SolvableElement) -> SolvableElement:
    """(a, D)(b, E) = (ab, D + a.E)"""
    if a.level != b.level:
        raise ValueError("normal forms of different levels")
    if a.level == 0:
        return TRIVIAL
    rep = multiply(a.representative, b.representative)
    if not b.derivs:
        return SolvableElement(a.level, a.base, a.derivs, rep)
    derivs = dict(a.derivs)
    for i, e in b.derivs:
        derivs[i] = derivs.get(i, GroupRingElement.zero()) + e.left_mul(a.base)
    base = solvable_mul(a.base, b.base)
    return SolvableElement(a.level, base, tuple(sorted((i, d) for i, d in derivs.items() if not d.is_zero())), rep)


def _check_depth(level: int, settings: Settings) -> None:
    if level < 0:
        raise ValueError("level must be non-negative")
    if level > settings.max_derived_depth + 1:
        raise DepthExceededError(
            f"derived depth {level} exceeds the configured bound {settings.max_derived_depth}"
        )


def solvable_normal_form(w: Word, level: int, settings: Settings = None) -> SolvableElement:
    """Normal form of w in F / F^(level); equal for two words iff they agree there"""
    _check_depth(level, settings or get_settings())
    return _normal_form(tuple(w), level)


@lru_cache(maxsize=4096)
def _normal_form(w: Word, level: int) -> SolvableElement:
    if level == 0:
        return TRIVIAL
    # Fox derivatives as sums over prefixes, prefixes read in F / F^(level-1)
    lower = level - 1
    prefix = solvable_identity(lower)
    derivs: Dict[int, Dict[SolvableElement, int]] = {}
    for letter in w:
        i = abs(letter)
        bucket = derivs.setdefault(i, {})
        if letter > 0:
            bucket[prefix] = bucket.get(prefix, 0) + 1
            prefix = solvable_mul(prefix, _letter_element(letter, lower))
        else:
            prefix = solvable_mul(prefix, _letter_element(letter, lower))
            bucket[prefix] = bucket.get(prefix, 0) - 1
    entries = []
    for i in sorted(derivs):
        d = GroupRingElement.from_dict(derivs[i])
        if not d.is_zero():
            entries.append((i, d))
    return SolvableElement(level, prefix, tuple(entries), w)


def fox_derivative(w: Word, i: int, level: int, settings: Settings = None) -> GroupRingElement:
    """Fox derivative d w / d x_i with coefficients in Z[F / F^(level)].

    At level 0 this is the integer exponent sum; at level 1 coefficients are
    Laurent monomials in t_1..t_r.
    """
    settings = settings or get_settings()
    if level > settings.max_derived_depth:
        raise DepthExceededError(
            f"derived depth {level} exceeds the configured bound {settings.max_derived_depth}"
        )
    return solvable_normal_form(w, level + 1, settings).deriv(i)


def in_derived(w: Word, n: int, settings: Settings = None) -> bool:
    """Membership in the nth derived subgroup F^(n) (F^(0) = F, F^(1) = [F, F])"""
    settings = settings or get_settings()
    if n > settings.max_derived_depth:
        raise DepthExceededError(f"derived depth {n} exceeds the configured bound {settings.max_derived_depth}")
    if n == 0:
        return True
    if n == 1:
        return is_null_homologous(w)
    return solvable_normal_form(w, n, settings).is_identity


def derived_depth(w: Word, settings: Settings = None) -> int:
    """Largest n within the configured depth with w in F^(n)"""
    settings = settings or get_settings()
    n = 0
    while n < settings.max_derived_depth and in_derived(w, n + 1, settings):
        n += 1
    return n
