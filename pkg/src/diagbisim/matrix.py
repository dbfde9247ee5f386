"""Exact rational matrices and fraction-free elimination.

Entries are :class:`fractions.Fraction`, which is always kept in lowest
terms with a positive denominator, so structural equality is value
equality.  Shapes follow the usual rows x cols convention: a matrix with
``cols`` columns maps a ``cols``-dimensional space to a ``rows``-dimensional
one, and composition is left multiplication.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NotSquare, ParseError, ShapeError, ShapeMismatch

__all__ = [
    "RatMatrix",
    "parse_rational",
    "format_rational",
    "matmul",
    "rank",
    "det",
    "nullspace",
    "independent_subset",
]

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_rational(value) -> Fraction:
    """Read an integer or a ``"p/q"`` string as an exact rational.

    Floats are refused on purpose: a float literal has already lost the
    exact value the user meant.
    """
    if isinstance(value, bool):
        raise ParseError(f"boolean {value!r} is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if m is None:
            raise ParseError(f"cannot read {value!r} as an integer or p/q")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den == 0:
            raise ParseError(f"zero denominator in {value!r}")
        return Fraction(num, den)
    raise ParseError(f"cannot read {value!r} as a rational")


def format_rational(q: Fraction) -> int | str:
    """Inverse of :func:`parse_rational` for JSON output."""
    if q.denominator == 1:
        return q.numerator
    return f"{q.numerator}/{q.denominator}"


class RatMatrix:
    """Immutable rows x cols matrix of Fractions, stored row-major."""

    __slots__ = ("rows", "cols", "entries", "_hash")

    def __init__(self, rows: int, cols: int, entries: Iterable = ()):
        entries = tuple(Fraction(e) for e in entries)
        if rows < 0 or cols < 0:
            raise ShapeMismatch(f"negative shape {rows}x{cols}")
        if len(entries) != rows * cols:
            raise ShapeMismatch(
                f"{len(entries)} entries given for a {rows}x{cols} matrix"
            )
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("RatMatrix is immutable")

    # -- construction -------------------------------------------------
    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> RatMatrix:
        """Build from nested lists.  ``cols`` is needed only when there are no rows."""
        rows = [list(r) for r in rows]
        if rows:
            width = len(rows[0])
            for i, r in enumerate(rows):
                if len(r) != width:
                    raise ShapeError(
                        f"ragged matrix: row 0 has {width} entries, row {i} has {len(r)}"
                    )
            if cols is not None and width != cols:
                raise ShapeMismatch(f"expected {cols} columns, got {width}")
        else:
            width = cols or 0
        return cls(len(rows), width, [parse_rational(x) for r in rows for x in r])

    @classmethod
    def identity(cls, n: int) -> RatMatrix:
        return cls(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> RatMatrix:
        return cls(rows, cols, [0] * (rows * cols))

    @classmethod
    def scalar(cls, value) -> RatMatrix:
        return cls(1, 1, [parse_rational(value)])

    # -- access -------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, index: tuple[int, int]) -> Fraction:
        i, j = index
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(index)
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def to_document(self) -> list[list]:
        return [[format_rational(x) for x in self.row(i)] for i in range(self.rows)]

    def transpose(self) -> RatMatrix:
        return RatMatrix(
            self.cols,
            self.rows,
            [self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)],
        )

    def is_zero(self) -> bool:
        return not any(self.entries)

    # -- arithmetic ---------------------------------------------------
    def __matmul__(self, other: RatMatrix) -> RatMatrix:
        return matmul(self, other)

    def __add__(self, other: RatMatrix) -> RatMatrix:
        if self.shape != other.shape:
            raise ShapeMismatch(f"cannot add {self.shape} and {other.shape}")
        return RatMatrix(self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: RatMatrix) -> RatMatrix:
        if self.shape != other.shape:
            raise ShapeMismatch(f"cannot subtract {self.shape} and {other.shape}")
        return RatMatrix(self.rows, self.cols, [a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self) -> RatMatrix:
        return RatMatrix(self.rows, self.cols, [-a for a in self.entries])

    def scale(self, factor) -> RatMatrix:
        factor = Fraction(factor)
        return RatMatrix(self.rows, self.cols, [factor * a for a in self.entries])

    def det(self) -> Fraction:
        return det(self)

    def rank(self) -> int:
        return rank(self)

    def inverse(self) -> RatMatrix:
        """Exact inverse by Gauss-Jordan on ``[M | I]``; raises ZeroDivisionError if singular."""
        if not self.is_square:
            raise NotSquare(f"cannot invert a {self.rows}x{self.cols} matrix")
        n = self.rows
        aug = [list(self.row(i)) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        for col in range(n):
            piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
            if piv is None:
                raise ZeroDivisionError("matrix is singular")
            aug[col], aug[piv] = aug[piv], aug[col]
            p = aug[col][col]
            aug[col] = [x / p for x in aug[col]]
            for r in range(n):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
        return RatMatrix(n, n, [x for r in aug for x in r[n:]])

    # -- value semantics ----------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self) -> int:
        # Fraction hashing is slow and matrices serve as cache keys
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.rows, self.cols, self.entries)))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x) for x in self.row(i)) for i in range(self.rows))
        return f"RatMatrix({self.rows}x{self.cols}: [{body}])"


def matmul(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    if a.cols != b.rows:
        raise ShapeMismatch(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    n, m, k = a.rows, b.cols, a.cols
    ae, be = a.entries, b.entries
    out = []
    for i in range(n):
        arow = ae[i * k:(i + 1) * k]
        for j in range(m):
            out.append(sum((arow[t] * be[t * m + j] for t in range(k)), Fraction(0)))
    return RatMatrix(n, m, out)


# -- fraction-free elimination -----------------------------------------


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[int]], Fraction]:
    """Scale each row to integers.  Returns the rows and the product of the scale factors."""
    out = []
    scale = 1
    for r in rows:
        lcm = 1
        for x in r:
            d = x.denominator
            if d != 1:
                lcm = lcm * d // math.gcd(lcm, d)
        if lcm == 1:
            out.append([x.numerator for x in r])
        else:
            out.append([x.numerator * (lcm // x.denominator) for x in r])
            scale *= lcm
    return out, Fraction(scale)


def _bareiss(m: list[list[int]], ncols: int) -> tuple[list[int], int]:
    """In-place Bareiss forward elimination.

    Pivot is the first nonzero entry in column order.  Returns the pivot
    columns and the sign of the row permutation applied.
    """
    nrows = len(m)
    prev = 1
    sign = 1
    r = 0
    pivots = []
    for col in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if m[i][col] != 0), None)
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
            sign = -sign
        p = m[r][col]
        prow = m[r]
        for i in range(r + 1, nrows):
            row = m[i]
            f = row[col]
            for j in range(col + 1, ncols):
                row[j] = (p * row[j] - f * prow[j]) // prev
            row[col] = 0
        prev = p
        pivots.append(col)
        r += 1
    return pivots, sign


def rank(mat: RatMatrix) -> int:
    if mat.rows == 0 or mat.cols == 0:
        return 0
    m, _ = _integer_rows([mat.row(i) for i in range(mat.rows)])
    pivots, _ = _bareiss(m, mat.cols)
    return len(pivots)


def det(mat: RatMatrix) -> Fraction:
    if not mat.is_square:
        raise NotSquare(f"determinant of a {mat.rows}x{mat.cols} matrix")
    n = mat.rows
    if n == 0:
        return Fraction(1)
    m, scale = _integer_rows([mat.row(i) for i in range(n)])
    pivots, sign = _bareiss(m, n)
    if len(pivots) < n:
        return Fraction(0)
    return Fraction(sign * m[n - 1][n - 1]) / scale


def _reduced_echelon(rows: Sequence[Sequence], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Fraction-free Gauss-Jordan: integer rows in reduced echelon form, gcd-normalised."""
    m, _ = _integer_rows(rows)
    m = [r for r in m if any(r)]
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        prow = m[r]
        p = prow[col]
        for i in range(len(m)):
            if i == r or m[i][col] == 0:
                continue
            f = m[i][col]
            row = [p * a - f * b for a, b in zip(m[i], prow)]
            g = 0
            for x in row:
                g = math.gcd(g, x)
            m[i] = [x // g for x in row] if g > 1 else row
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Exact basis of ``{x : row . x = 0 for every row}``.

    One basis vector per free column, scaled to primitive integers with a
    positive leading entry.  The basis has ``ncols - rank`` elements.
    """
    for r in rows:
        if len(r) != ncols:
            raise ShapeMismatch(f"equation of length {len(r)} in a system of {ncols} unknowns")
    rows = [[x if isinstance(x, (int, Fraction)) else parse_rational(x) for x in r] for r in rows]
    echelon, pivots = _reduced_echelon(rows, ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        used = [(row, pc) for row, pc in zip(echelon, pivots) if row[free]]
        # x_free = L and x_pc = -row[free] * L / row[pc], all integral
        L = 1
        for row, pc in used:
            L = L * row[pc] // math.gcd(L, row[pc])
        vec = [0] * ncols
        vec[free] = L
        for row, pc in used:
            vec[pc] = -row[free] * (L // row[pc])
        g = 0
        for x in vec:
            g = math.gcd(g, x)
        if next(x for x in vec if x) < 0:
            g = -g
        basis.append([Fraction(x // g) for x in vec])
    return basis


def independent_subset(vectors: Sequence[Sequence], length: int) -> list[int]:
    """Indices of a maximal linearly independent subfamily, chosen greedily in order."""
    chosen: list[int] = []
    echelon: list[list[Fraction]] = []
    for idx, v in enumerate(vectors):
        w = [Fraction(x) for x in v]
        for row in echelon:
            pc = next(j for j in range(length) if row[j] != 0)
            if w[pc]:
                f = w[pc] / row[pc]
                w = [a - f * b for a, b in zip(w, row)]
        if any(w):
            echelon.append(w)
            chosen.append(idx)
    return chosen
