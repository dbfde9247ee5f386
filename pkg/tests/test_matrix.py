from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diagbisim.errors import NotSquare, ShapeError, ShapeMismatch
from diagbisim.matrix import (
    RatMatrix,
    det,
    format_rational,
    independent_subset,
    matmul,
    nullspace,
    parse_rational,
    rank,
)

from oracles import leibniz_det, minor_rank

small = st.integers(-4, 4)


@st.composite
def matrices(draw, max_rows=4, max_cols=4, rows=None, cols=None):
    r = draw(st.integers(0, max_rows)) if rows is None else rows
    c = draw(st.integers(0, max_cols)) if cols is None else cols
    return RatMatrix(r, c, draw(st.lists(small, min_size=r * c, max_size=r * c)))


@st.composite
def square(draw, max_n=5):
    n = draw(st.integers(0, max_n))
    return draw(matrices(rows=n, cols=n))


def test_rationals_are_canonical():
    assert parse_rational("6/4") == Fraction(3, 2)
    assert parse_rational("-0/7") == 0
    assert parse_rational(" 3 / 1 ") == 3
    assert format_rational(Fraction(3, 2)) == "3/2"
    assert format_rational(Fraction(4, 2)) == 2
    for bad in (1.5, True, "1/0", "x", "1.0"):
        with pytest.raises((ValueError, TypeError, ZeroDivisionError)):
            parse_rational(bad)


def test_empty_shapes_are_legal():
    m = RatMatrix(0, 3)
    assert m.shape == (0, 3) and m.entries == ()
    assert (RatMatrix(2, 0) @ RatMatrix(0, 3)) == RatMatrix.zeros(2, 3)
    assert det(RatMatrix.identity(0)) == 1
    assert rank(RatMatrix(0, 3)) == 0


def test_shape_errors():
    with pytest.raises(ShapeMismatch):
        matmul(RatMatrix.identity(2), RatMatrix.identity(3))
    with pytest.raises(NotSquare):
        det(RatMatrix(2, 3, range(6)))
    with pytest.raises(ShapeError):
        RatMatrix.from_rows([[1, 2], [3]])


def test_known_values():
    A = RatMatrix.from_rows([[1, 2], [3, 4]])
    assert det(A) == -2
    assert A.inverse() == RatMatrix.from_rows([["-2", "1"], ["3/2", "-1/2"]])
    assert rank(RatMatrix.from_rows([[1, 2, 3], [2, 4, 6]])) == 1


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_rank_matches_minor_expansion(m):
    assert rank(m) == minor_rank(m.to_rows(), m.cols)


@settings(max_examples=150, deadline=None)
@given(square())
def test_det_matches_leibniz(m):
    assert det(m) == leibniz_det(m.to_rows())


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 5).flatmap(lambda n: st.tuples(matrices(rows=n, cols=n), matrices(rows=n, cols=n))))
def test_det_is_multiplicative(pair):
    A, B = pair
    assert det(matmul(A, B)) == det(A) * det(B)


@settings(max_examples=100, deadline=None)
@given(square(4))
def test_inverse_when_invertible(m):
    if det(m) != 0:
        assert m @ m.inverse() == RatMatrix.identity(m.rows)


@settings(max_examples=150, deadline=None)
@given(matrices(max_rows=5, max_cols=6))
def test_nullspace_is_an_exact_basis(m):
    rows = m.to_rows()
    basis = nullspace(rows, m.cols)
    assert len(basis) == m.cols - rank(m)
    for v in basis:
        assert all(isinstance(x, Fraction) for x in v)
        assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in rows)
    if basis:
        assert rank(RatMatrix.from_rows(basis)) == len(basis)


def test_independent_subset_keeps_first_spanning_vectors():
    vecs = [[1, 0, 0], [2, 0, 0], [0, 1, 0], [1, 1, 0]]
    assert independent_subset(vecs, 3) == [0, 2]
