"""Exact rational linear algebra on top of sympy's DomainMatrix over QQ"""

import logging
from fractions import Fraction
from typing import Dict, List, Mapping, Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from app.errors import SingularMatrixError

logger = logging.getLogger(__name__)

SparseRow = Mapping[int, Fraction]


def to_qq(value) -> "QQ":
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def from_qq(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def dense(rows: Sequence[Sequence], ncols: int = None) -> DomainMatrix:
    nrows = len(rows)
    if ncols is None:
        ncols = len(rows[0]) if nrows else 0
    data = [[to_qq(x) for x in row] for row in rows]
    return DomainMatrix(data, (nrows, ncols), QQ)


def sparse(rows: Sequence[SparseRow], ncols: int) -> DomainMatrix:
    data: Dict[int, Dict[int, object]] = {}
    for i, row in enumerate(rows):
        entries = {j: to_qq(c) for j, c in row.items() if c}
        if entries:
            data[i] = entries
    return DomainMatrix(data, (len(rows), ncols), QQ)


def to_fractions(matrix: DomainMatrix) -> List[List[Fraction]]:
    return [[from_qq(x) for x in row] for row in matrix.to_list()]


def rank(rows: Sequence[SparseRow], ncols: int) -> int:
    """Exact rank of a sparse rational matrix given row by row"""
    if not rows or ncols == 0:
        return 0
    result = sparse(rows, ncols).rank()
    logger.debug("rank of %dx%d matrix = %d", len(rows), ncols, result)
    return result


def in_row_span(rows: Sequence[SparseRow], vector: SparseRow, ncols: int) -> bool:
    if not any(vector.values()):
        return True
    return rank(list(rows) + [vector], ncols) == rank(rows, ncols)


def nullspace(rows: Sequence[Sequence]) -> List[List[Fraction]]:
    """Basis of the right kernel"""
    if not rows:
        return []
    return to_fractions(dense(rows).nullspace())


def inverse(rows: Sequence[Sequence]) -> List[List[Fraction]]:
    """Exact inverse; a singular input raises with a kernel vector attached"""
    n = len(rows)
    if n == 0:
        return []
    matrix = dense(rows, n)
    try:
        inv = matrix.inv()
    except (DMNonInvertibleMatrixError, ZeroDivisionError):
        kernel = nullspace(rows)
        vector = kernel[0] if kernel else []
        raise SingularMatrixError(
            "singular strut matrix: kernel vector "
            + "(" + ", ".join(str(x) for x in vector) + ")",
            kernel_vector=vector,
        )
    return to_fractions(inv)


def negate(rows: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    return [[-x for x in row] for row in rows]
