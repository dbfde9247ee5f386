"""Finitary diagrammatic path logic: syntax and positive model checking.

Grammar (``&`` is right-associative and binds looser than the prefixes)::

    S   ::= '[' NAT ']' P1
    P   ::= P1 ('&' P)?
    P1  ::= '<' MAT '>' P1 | '?' S | '!' P1 | 'true' | '(' P ')'
    MAT ::= '[' ROW (';' ROW)* ']'      ROW ::= RAT (',' RAT)*
    RAT ::= INT | INT '/' POSINT

``[n]P`` holds at an object whose space has dimension n, under some choice
of basis satisfying P.  ``<M>P`` holds when some extension of the current
object is related to M by compatible changes of basis.  A matrix literal
``M`` has as many columns as the source dimension and as many rows as the
target dimension, e.g. ``<[1;0]>`` goes from dimension 1 to dimension 2.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterator, Union

from . import etim
from .diagram import FinitaryDiagram
from .errors import NotPositive, ObjectNotFound, ParseError, ShapeError
from .matrix import RatMatrix, parse_rational

__all__ = [
    "Dim",
    "Diamond",
    "Query",
    "Neg",
    "Top",
    "And",
    "parse_formula",
    "format_formula",
    "is_positive",
    "Holds",
    "Fails",
    "Unknown",
    "iter_branches",
    "model_check_positive",
]


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Diamond:
    matrix: RatMatrix
    body: "MorphismFormula"


@dataclass(frozen=True)
class Query:
    formula: "Dim"


@dataclass(frozen=True)
class Neg:
    body: "MorphismFormula"


@dataclass(frozen=True)
class And:
    left: "MorphismFormula"
    right: "MorphismFormula"


@dataclass(frozen=True)
class Dim:
    n: int
    body: "MorphismFormula"


MorphismFormula = Union[Top, Diamond, Query, Neg, And]
PathFormula = Union[Dim, MorphismFormula]


# -- parsing -----------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(true)|(\d+)|([\[\]<>?!&();,/-]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("true", "true", start))
        elif m.group(2):
            tokens.append(("int", m.group(2), start))
        else:
            tokens.append((m.group(3), m.group(3), start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][2]

    def take(self, kind: str) -> str:
        k, v, p = self.tokens[self.i]
        if k != kind:
            shown = "end of input" if k == "eof" else repr(v)
            raise ParseError(f"expected {kind!r}, found {shown}", p)
        self.i += 1
        return v

    def object_formula(self) -> Dim:
        self.take("[")
        n = int(self.take("int"))
        self.take("]")
        return Dim(n, self.unary())

    def conj(self) -> MorphismFormula:
        left = self.unary()
        if self.peek() == "&":
            self.take("&")
            return And(left, self.conj())
        return left

    def unary(self) -> MorphismFormula:
        k = self.peek()
        if k == "<":
            self.take("<")
            m = self.matrix()
            self.take(">")
            return Diamond(m, self.unary())
        if k == "?":
            self.take("?")
            return Query(self.object_formula())
        if k == "!":
            self.take("!")
            return Neg(self.unary())
        if k == "true":
            self.take("true")
            return Top()
        if k == "(":
            self.take("(")
            body = self.conj()
            self.take(")")
            return body
        raise ParseError(
            "expected '<', '?', '!', 'true' or '('" + (", found end of input" if k == "eof" else ""),
            self.pos(),
        )

    def matrix(self) -> RatMatrix:
        start = self.pos()
        self.take("[")
        rows = [self.row()]
        while self.peek() == ";":
            self.take(";")
            rows.append(self.row())
        self.take("]")
        if len({len(r) for r in rows}) != 1:
            raise ShapeError("ragged matrix literal", start)
        return RatMatrix.from_rows(rows)

    def row(self) -> list:
        vals = [self.rational()]
        while self.peek() == ",":
            self.take(",")
            vals.append(self.rational())
        return vals

    def rational(self):
        sign = ""
        if self.peek() == "-":
            self.take("-")
            sign = "-"
        num = self.take("int")
        if self.peek() == "/":
            self.take("/")
            p = self.pos()
            den = self.take("int")
            if int(den) == 0:
                raise ParseError("zero denominator", p)
            return parse_rational(f"{sign}{num}/{den}")
        return parse_rational(f"{sign}{num}")


def parse_formula(text: str) -> Dim:
    """Parse an object formula such as ``[1]<[1;0]><[1,1]>true``."""
    p = _Parser(text)
    if p.peek() != "[":
        raise ParseError("a formula starts with '[n]'", p.pos())
    f = p.object_formula()
    if p.peek() == "&":
        raise ParseError("conjunction after an object formula must be parenthesised", p.pos())
    p.take("eof")
    return f


def _format_matrix(m: RatMatrix) -> str:
    if not m.rows or not m.cols:
        raise ValueError(f"a {m.rows}x{m.cols} matrix has no literal syntax")
    return "[" + ";".join(",".join(str(x) for x in m.row(i)) for i in range(m.rows)) + "]"


def format_formula(f: PathFormula) -> str:
    """Text that :func:`parse_formula` reads back to the same tree."""
    if isinstance(f, Dim):
        return f"[{f.n}]{_format_unary(f.body)}"
    return _format_conj(f)


def _format_conj(f) -> str:
    if isinstance(f, And):
        left = _format_unary(f.left)
        return f"{left} & {_format_conj(f.right)}"
    return _format_unary(f)


def _format_unary(f) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Diamond):
        return f"<{_format_matrix(f.matrix)}>{_format_unary(f.body)}"
    if isinstance(f, Query):
        return "?" + format_formula(f.formula)
    if isinstance(f, Neg):
        return "!" + _format_unary(f.body)
    if isinstance(f, And):
        return f"({_format_conj(f)})"
    raise TypeError(f"not a formula: {f!r}")


def is_positive(f: PathFormula) -> bool:
    if isinstance(f, Neg):
        return False
    if isinstance(f, Top):
        return True
    if isinstance(f, (Dim, Diamond)):
        return is_positive(f.body)
    if isinstance(f, Query):
        return is_positive(f.formula)
    if isinstance(f, And):
        return is_positive(f.left) and is_positive(f.right)
    raise TypeError(f"not a formula: {f!r}")


# -- model checking -------------------------------------------------------------


@dataclass(frozen=True)
class _Acc:
    vars: tuple[tuple[str, int], ...] = ()
    lin: tuple[etim.Predicate, ...] = ()

    def fresh(self, n: int) -> tuple[int, _Acc]:
        idx = len(self.vars)
        return idx, replace(self, vars=self.vars + ((f"X{idx + 1}", n),))

    def formula(self) -> etim.EtimFormula:
        return etim.EtimFormula(tuple(etim.MatrixVar(n, k) for n, k in self.vars), self.lin)


@dataclass(frozen=True)
class Holds:
    witness: dict
    formula: etim.EtimFormula
    status = "HOLDS"


@dataclass(frozen=True)
class Fails:
    status = "FAILS"


@dataclass(frozen=True)
class Unknown:
    status = "UNKNOWN"


CheckVerdict = Union[Holds, Fails, Unknown]


def _obj_branches(F: FinitaryDiagram, c: str, S: Dim, acc: _Acc, eager: bool) -> Iterator[_Acc]:
    if S.n != F.dim(c):
        return
    x, acc = acc.fresh(S.n)
    yield from _mor_branches(F, c, x, S.body, acc, eager)


def _mor_branches(F, c, x, P, acc: _Acc, eager: bool) -> Iterator[_Acc]:
    if isinstance(P, Top):
        yield acc
    elif isinstance(P, Query):
        yield from _obj_branches(F, c, P.formula, acc, eager)
    elif isinstance(P, And):
        for mid in _mor_branches(F, c, x, P.left, acc, eager):
            yield from _mor_branches(F, c, x, P.right, mid, eager)
    elif isinstance(P, Diamond):
        M = P.matrix
        if M.cols != F.dim(c):
            return
        for c2 in F.poset.up(c):
            if F.dim(c2) != M.rows:
                continue
            x2, nxt = acc.fresh(M.rows)
            # M . X = X' . F(c <= c2)
            nxt = replace(nxt, lin=nxt.lin + (etim.Predicate(M, x, x2, F.mat(c, c2)),))
            if eager and etim.forced_singular(nxt.formula()):
                continue
            yield from _mor_branches(F, c2, x2, P.body, nxt, eager)
    elif isinstance(P, Neg):
        raise NotPositive("negation is not supported by the positive model checker")
    else:
        raise TypeError(f"not a formula: {P!r}")


def iter_branches(F: FinitaryDiagram, c: str, S: Dim, *, eager: bool = False) -> Iterator[etim.EtimFormula]:
    """Matrix formulas of every structurally complete branch, in search order."""
    if c not in F.poset:
        raise ObjectNotFound(f"unknown object {c!r}")
    if not is_positive(S):
        raise NotPositive("formula contains a negation")
    for acc in _obj_branches(F, c, S, _Acc(), eager):
        yield acc.formula()


def model_check_positive(
    F: FinitaryDiagram,
    c: str,
    S: Dim | str,
    mode: etim.Mode | None = None,
    *,
    eager: bool = False,
) -> CheckVerdict:
    """Decide ``F, c |= S`` for a positive object formula.

    Each way of resolving the choice of extension in ``<M>`` subformulas
    yields one matrix formula; the formula holds iff one of them is
    satisfiable.  Conjuncts share the current variable and add their
    constraints to the same branch.
    """
    if isinstance(S, str):
        S = parse_formula(S)
    saw_unknown = False
    for phi in iter_branches(F, c, S, eager=eager):
        verdict = etim.decide(phi, mode)
        if isinstance(verdict, etim.Sat):
            return Holds(dict(verdict.witness), phi)
        if isinstance(verdict, etim.Unknown):
            saw_unknown = True
    return Unknown() if saw_unknown else Fails()
