"""Free Lie algebra over the rationals: bracket monomials, associative
expansion and coordinates in the Lyndon basis.

Lie monomials are nested pairs: a letter, or a 2-tuple ``(left, right)``
standing for ``[left, right]``. Letters must be mutually comparable (the
services use positive integers). Associative polynomials are dicts from
tuples of letters to coefficients.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Hashable, Iterable, Iterator, List, Mapping, Tuple, Union

logger = logging.getLogger(__name__)

Letter = Hashable
LieWord = Union[Letter, Tuple["LieWord", "LieWord"]]
AssocWord = Tuple[Letter, ...]
Poly = Dict[AssocWord, Fraction]


def is_bracket(m: LieWord) -> bool:
    return isinstance(m, tuple)


def bracket_length(m: LieWord) -> int:
    if is_bracket(m):
        return bracket_length(m[0]) + bracket_length(m[1])
    return 1


def foliage(m: LieWord) -> AssocWord:
    """Letters of a monomial read left to right"""
    if is_bracket(m):
        return foliage(m[0]) + foliage(m[1])
    return (m,)


def bracket_to_string(m: LieWord, prefix: str = "x") -> str:
    if is_bracket(m):
        return f"[{bracket_to_string(m[0], prefix)},{bracket_to_string(m[1], prefix)}]"
    return f"{prefix}{m}"


def _add_to(poly: Dict, key, value) -> None:
    total = poly.get(key, 0) + value
    if total:
        poly[key] = total
    else:
        poly.pop(key, None)


@lru_cache(maxsize=None)
def _expand_cached(m: LieWord) -> Tuple[Tuple[AssocWord, int], ...]:
    if not is_bracket(m):
        return (((m,), 1),)
    left = _expand_cached(m[0])
    right = _expand_cached(m[1])
    out: Dict[AssocWord, int] = {}
    for u, a in left:
        for v, b in right:
            _add_to(out, u + v, a * b)
            _add_to(out, v + u, -a * b)
    return tuple(sorted(out.items()))


def expand(m: LieWord) -> Dict[AssocWord, int]:
    """Associative expansion of a Lie monomial, [a,b] = ab - ba"""
    return dict(_expand_cached(m))


def expand_combination(terms: Iterable[Tuple[LieWord, Fraction]]) -> Poly:
    out: Poly = {}
    for m, c in terms:
        for w, a in _expand_cached(m):
            _add_to(out, w, c * a)
    return out


def is_lyndon(word: AssocWord) -> bool:
    """A nonempty word strictly smaller than all its proper rotations"""
    n = len(word)
    if n == 0:
        return False
    return all(word < word[i:] + word[:i] for i in range(1, n))


def standard_factorization(word: AssocWord) -> Tuple[AssocWord, AssocWord]:
    """Split a Lyndon word of length >= 2 as u v with v its longest proper Lyndon suffix"""
    for i in range(1, len(word)):
        if is_lyndon(word[i:]):
            return word[:i], word[i:]
    raise ValueError(f"{word!r} has no standard factorization")


@lru_cache(maxsize=None)
def lyndon_bracket(word: AssocWord) -> LieWord:
    """Standard bracketing of a Lyndon word"""
    if not is_lyndon(word):
        raise ValueError(f"{word!r} is not a Lyndon word")
    if len(word) == 1:
        return word[0]
    u, v = standard_factorization(word)
    return (lyndon_bracket(u), lyndon_bracket(v))


def lyndon_words(length: int, letters: Iterable[Letter]) -> List[AssocWord]:
    """All Lyndon words of one length (Duval's generation algorithm)"""
    alphabet = sorted(set(letters))
    k = len(alphabet)
    if length < 1 or k == 0:
        return []
    out: List[AssocWord] = []
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        if m == length:
            out.append(tuple(alphabet[i] for i in w))
        while len(w) < length:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()
    return out


def lyndon_coordinates(poly: Mapping[AssocWord, Fraction]) -> Dict[AssocWord, Fraction]:
    """Coordinates of a Lie polynomial (given by its associative expansion)
    in the Lyndon basis.

    The expansion of the standard bracket of a Lyndon word w is w plus
    lexicographically larger words of the same multidegree, so peeling off
    the least word of the support is triangular.
    """
    rest: Dict[AssocWord, Fraction] = {w: Fraction(c) for w, c in poly.items() if c}
    coords: Dict[AssocWord, Fraction] = {}
    while rest:
        word = min(rest, key=lambda w: (len(w), w))
        coeff = rest[word]
        if not is_lyndon(word):
            raise ValueError(f"not a Lie polynomial: least word {word!r} is not Lyndon")
        coords[word] = coeff
        for w, a in _expand_cached(lyndon_bracket(word)):
            _add_to(rest, w, -coeff * a)
    return coords


class LieVector:
    """Rational combination of (color, Lie monomial) pairs, i.e. an element
    of H (x) L where H has basis e_color"""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Tuple[Letter, LieWord], Fraction] = None):
        self.terms: Dict[Tuple[Letter, LieWord], Fraction] = {}
        for key, c in (terms or {}).items():
            _add_to(self.terms, key, Fraction(c))

    def add_term(self, color: Letter, monomial: LieWord, coeff) -> None:
        _add_to(self.terms, (color, monomial), Fraction(coeff))

    def __add__(self, other: "LieVector") -> "LieVector":
        out = LieVector(self.terms)
        for key, c in other.terms.items():
            _add_to(out.terms, key, c)
        return out

    def __sub__(self, other: "LieVector") -> "LieVector":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "LieVector":
        factor = Fraction(factor)
        if not factor:
            return LieVector()
        return LieVector({k: c * factor for k, c in self.terms.items()})

    def __iter__(self) -> Iterator[Tuple[Tuple[Letter, LieWord], Fraction]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        parts = [f"{c}*e{col}(x){bracket_to_string(m)}" for (col, m), c in self.terms.items()]
        return "LieVector(" + " + ".join(parts) + ")"


def lyndon_reduce(vector: LieVector) -> Dict[Tuple[Letter, AssocWord], Fraction]:
    """Exact coordinates of `vector` in the basis e_color (x) Lyndon bracket.

    Applying it to the LieVector rebuilt from its own output returns the
    same coordinates.
    """
    by_color: Dict[Letter, List[Tuple[LieWord, Fraction]]] = {}
    for (color, monomial), c in vector:
        by_color.setdefault(color, []).append((monomial, c))
    out: Dict[Tuple[Letter, AssocWord], Fraction] = {}
    for color, terms in by_color.items():
        for word, c in lyndon_coordinates(expand_combination(terms)).items():
            out[(color, word)] = c
    return out


def from_lyndon_coordinates(coords: Mapping[Tuple[Letter, AssocWord], Fraction]) -> LieVector:
    return LieVector({(color, lyndon_bracket(word)): c for (color, word), c in coords.items()})
