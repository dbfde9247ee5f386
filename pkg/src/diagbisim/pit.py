"""Zero tests for determinants of matrices of linear forms.

The invertibility question on a solution subspace comes down to deciding
whether ``t -> prod_i det(X_i(t))`` is the zero polynomial, where each
block ``X_i(t)`` depends linearly on the parameters ``t``.  Because the
polynomial ring is a domain, the product vanishes identically iff one
factor does, so each block is tested on its own.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterator, Sequence

from .matrix import RatMatrix, det

Poly = dict  # exponent tuple -> nonzero coefficient

__all__ = [
    "grid_points",
    "symbolic_det",
    "linear_block_is_singular",
    "monomial_bound",
]


def grid_points(p: int, bound: int) -> Iterator[tuple[int, ...]]:
    """All points of ``{0..bound}^p``: all-ones first, then all-zeros, then lexicographic."""
    ones = (1,) * p
    zeros = (0,) * p
    if p and bound >= 1:
        yield ones
    yield zeros
    for t in itertools.product(range(bound + 1), repeat=p):
        if t != ones and t != zeros:
            yield t


def _mul_linear(poly: Poly, form: Sequence[Fraction], nvars: int) -> Poly:
    out: Poly = {}
    for exp, coef in poly.items():
        for l, a in enumerate(form):
            if not a:
                continue
            e = exp[:l] + (exp[l] + 1,) + exp[l + 1:]
            v = out.get(e, 0) + coef * a
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return out


def symbolic_det(forms: Sequence[Sequence[Sequence[Fraction]]], nvars: int) -> Poly:
    """Expand the determinant of an n x n matrix whose entries are linear forms.

    ``forms[r][c]`` is the coefficient list of entry ``(r, c)``.  Uses row
    by row Laplace expansion over column subsets, so the work is about
    ``n * 2^n`` polynomial-times-linear-form products.
    """
    n = len(forms)
    prev: dict[int, Poly] = {0: {(0,) * nvars: Fraction(1)}}
    for k in range(n):
        cur: dict[int, Poly] = {}
        for mask, poly in prev.items():
            if not poly:
                continue
            for j in range(n):
                bit = 1 << j
                if mask & bit:
                    continue
                term = _mul_linear(poly, forms[k][j], nvars)
                if not term:
                    continue
                sign = -1 if (k + bin(mask & (bit - 1)).count("1")) % 2 else 1
                acc = cur.setdefault(mask | bit, {})
                for e, c in term.items():
                    v = acc.get(e, 0) + sign * c
                    if v:
                        acc[e] = v
                    else:
                        acc.pop(e, None)
        prev = cur
    return prev.get((1 << n) - 1, {})


def _combine(mats: Sequence[RatMatrix], coeffs: Sequence[int]) -> RatMatrix:
    n = mats[0].rows
    entries = [Fraction(0)] * (n * n)
    for m, a in zip(mats, coeffs):
        if a:
            for idx, x in enumerate(m.entries):
                if x:
                    entries[idx] += a * x
    return RatMatrix(n, n, entries)


def _probe_points(r: int) -> Iterator[tuple[int, ...]]:
    yield (1,) * r
    yield tuple(range(1, r + 1))
    yield tuple((l * l) % 7 + 1 for l in range(1, r + 1))
    yield tuple((-1) ** l * (l + 2) for l in range(r))


def monomial_bound(n: int, r: int) -> int:
    """Number of monomials of degree n in r variables: the size of a symbolic expansion."""
    from math import comb

    return comb(r + n - 1, n) if r else 1


def linear_block_is_singular(span: Sequence[RatMatrix]) -> bool:
    """True iff every matrix in the linear span of ``span`` is singular.

    ``span`` must be linearly independent n x n matrices (n >= 1); an empty
    span is the zero space.  A few probe points usually exhibit an invertible
    member; otherwise the determinant is expanded symbolically.
    """
    if not span:
        return True
    r = len(span)
    for pt in _probe_points(r):
        if det(_combine(span, pt)) != 0:
            return False
    n = span[0].rows
    forms = [[[m[i, j] for m in span] for j in range(n)] for i in range(n)]
    return not symbolic_det(forms, r)
