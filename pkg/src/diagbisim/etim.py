"""Existential theory of invertible matrices over the rationals.

A formula declares square matrix unknowns ``X_1 .. X_k`` of sizes
``n_1 .. n_k`` and a conjunction of predicates ``A . X_i = X_k . B``.  It is
satisfiable when some invertible matrices make every predicate true.

Every predicate is linear, so the solutions form a subspace spanned by an
exact rational basis ``v_1 .. v_p``.  Writing ``X_i(t)`` for the i-th block
of ``t_1 v_1 + ... + t_p v_p``, the formula is satisfiable iff
``q(t) = prod_i det(X_i(t))`` is not the zero polynomial, and then some
integer point with ``q != 0`` is a rational witness.
"""

from __future__ import annotations

import json
import random
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from . import pit
from .errors import GridTooLarge, ObjectNotFound, ParseError, ShapeMismatch
from .matrix import RatMatrix, det, format_rational, independent_subset, nullspace, rank

__all__ = [
    "MatrixVar",
    "Predicate",
    "EtimFormula",
    "SolutionSpace",
    "Sat",
    "Unsat",
    "Unknown",
    "Deterministic",
    "Randomized",
    "Auto",
    "load_etim",
    "prune_unused",
    "components",
    "assemble",
    "decide",
    "satisfies",
    "forced_singular",
    "export_smt",
]

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# grid points scanned for a witness before switching to seeded sampling
WITNESS_SCAN_BUDGET = 64


@dataclass(frozen=True)
class MatrixVar:
    name: str
    n: int


@dataclass(frozen=True)
class Predicate:
    """``A . X_i = X_k . B`` with ``A`` and ``B`` both ``n_k x n_i``."""

    A: RatMatrix
    i: int
    k: int
    B: RatMatrix


@dataclass(frozen=True)
class EtimFormula:
    vars: tuple[MatrixVar, ...]
    preds: tuple[Predicate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "preds", tuple(self.preds))
        seen = set()
        for v in self.vars:
            if not _NAME_RE.match(v.name):
                raise ParseError(f"variable name {v.name!r} is not an identifier")
            if v.name in seen:
                raise ParseError(f"duplicate variable {v.name!r}")
            if isinstance(v.n, bool) or not isinstance(v.n, int) or v.n < 0:
                raise ParseError(f"size of {v.name!r} must be a non-negative integer")
            seen.add(v.name)
        k = len(self.vars)
        for j, p in enumerate(self.preds):
            if not (0 <= p.i < k and 0 <= p.k < k):
                raise ShapeMismatch(f"predicate {j} references an undeclared variable")
            want = (self.vars[p.k].n, self.vars[p.i].n)
            if p.A.shape != want or p.B.shape != want:
                raise ShapeMismatch(
                    f"predicate {j}: A is {p.A.rows}x{p.A.cols} and B is {p.B.rows}x{p.B.cols}, "
                    f"both must be {want[0]}x{want[1]}"
                )

    @classmethod
    def build(
        cls,
        vars: Iterable[tuple[str, int]],
        preds: Iterable[tuple[RatMatrix, str, str, RatMatrix]] = (),
    ) -> EtimFormula:
        """Construct with variables referenced by name."""
        vs = tuple(MatrixVar(name, n) for name, n in vars)
        index = {v.name: j for j, v in enumerate(vs)}
        ps = []
        for A, xi, xk, B in preds:
            if xi not in index or xk not in index:
                raise ObjectNotFound(f"undeclared variable in predicate on {xi!r}, {xk!r}")
            ps.append(Predicate(A, index[xi], index[xk], B))
        return cls(vs, tuple(ps))

    def var_index(self, name: str) -> int:
        for j, v in enumerate(self.vars):
            if v.name == name:
                return j
        raise ObjectNotFound(f"unknown variable {name!r}")

    def to_document(self) -> dict:
        return {
            "vars": [{"name": v.name, "n": v.n} for v in self.vars],
            "preds": [
                {
                    "A": p.A.to_document(),
                    "i": self.vars[p.i].name,
                    "k": self.vars[p.k].name,
                    "B": p.B.to_document(),
                }
                for p in self.preds
            ],
        }

    def __str__(self) -> str:
        quant = ".".join(f"E_{v.n} {v.name}" for v in self.vars)
        body = " & ".join(
            f"{_mat_str(p.A)}.{self.vars[p.i].name} = {self.vars[p.k].name}.{_mat_str(p.B)}"
            for p in self.preds
        )
        return f"{quant}. {body or 'true'}"


def _mat_str(m: RatMatrix) -> str:
    return "[" + ";".join(",".join(str(x) for x in m.row(i)) for i in range(m.rows)) + "]"


def load_etim(doc) -> EtimFormula:
    """Read ``{"vars": [{"name", "n"}], "preds": [{"A", "i", "k", "B"}]}``."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.pos) from None
    if not isinstance(doc, Mapping):
        raise ParseError("top-level document must be an object")
    raw_vars = doc.get("vars")
    raw_preds = doc.get("preds", [])
    if not isinstance(raw_vars, list) or not isinstance(raw_preds, list):
        raise ParseError("'vars' and 'preds' must be lists")
    vars_ = []
    for v in raw_vars:
        if not isinstance(v, Mapping) or "name" not in v or "n" not in v:
            raise ParseError(f"variable entry {v!r} needs 'name' and 'n'")
        vars_.append((v["name"], v["n"]))
    sizes = dict(vars_)
    preds = []
    for p in raw_preds:
        if not isinstance(p, Mapping) or not {"A", "i", "k", "B"} <= set(p):
            raise ParseError(f"predicate entry {p!r} needs 'A', 'i', 'k' and 'B'")
        if p["i"] not in sizes or p["k"] not in sizes:
            raise ParseError(f"predicate references undeclared variable {p['i']!r} or {p['k']!r}")
        rows, cols = sizes[p["k"]], sizes[p["i"]]
        preds.append((_read_matrix(p["A"], rows, cols), p["i"], p["k"], _read_matrix(p["B"], rows, cols)))
    return EtimFormula.build(vars_, preds)


def _read_matrix(raw, rows: int, cols: int) -> RatMatrix:
    if not isinstance(raw, list) or not all(isinstance(r, list) for r in raw):
        raise ParseError("matrix must be a list of rows")
    if rows == 0 and not raw:
        return RatMatrix.zeros(0, cols)
    if cols == 0 and len(raw) == rows and not any(raw):
        return RatMatrix.zeros(rows, 0)
    m = RatMatrix.from_rows(raw)
    if m.shape != (rows, cols):
        raise ShapeMismatch(f"matrix is {m.rows}x{m.cols}, expected {rows}x{cols}")
    return m


# -- solution space ----------------------------------------------------------


@dataclass(frozen=True)
class SolutionSpace:
    """Exact basis of the homogeneous system, with the position of each variable's block.

    Within a vector, entry ``(r, s)`` of variable ``i`` sits at
    ``layout[i][0] + r * n_i + s``.
    """

    N: int
    basis: tuple[tuple[Fraction, ...], ...]
    layout: Mapping[int, tuple[int, int]]

    @property
    def p(self) -> int:
        return len(self.basis)

    def point(self, t: Sequence) -> list[Fraction]:
        if len(t) != self.p:
            raise ShapeMismatch(f"{len(t)} parameters for a space of dimension {self.p}")
        vec = [Fraction(0)] * self.N
        for tj, v in zip(t, self.basis):
            if tj:
                for idx, x in enumerate(v):
                    if x:
                        vec[idx] += tj * x
        return vec

    def block(self, vec: Sequence, i: int) -> RatMatrix:
        off, n = self.layout[i]
        return RatMatrix(n, n, vec[off:off + n * n])

    def block_span(self, i: int) -> list[RatMatrix]:
        """Linearly independent n_i x n_i matrices spanning the possible values of block i."""
        off, n = self.layout[i]
        vecs = [v[off:off + n * n] for v in self.basis]
        return [RatMatrix(n, n, vecs[j]) for j in independent_subset(vecs, n * n)]


def prune_unused(phi: EtimFormula) -> tuple[EtimFormula, list[str]]:
    """Drop variables that occur in no predicate; they can always be the identity."""
    used = sorted({p.i for p in phi.preds} | {p.k for p in phi.preds})
    pruned = [v.name for j, v in enumerate(phi.vars) if j not in set(used)]
    remap = {old: new for new, old in enumerate(used)}
    reduced = EtimFormula(
        tuple(phi.vars[j] for j in used),
        tuple(Predicate(p.A, remap[p.i], remap[p.k], p.B) for p in phi.preds),
    )
    return reduced, pruned


def components(phi: EtimFormula) -> list[EtimFormula]:
    """Split into subformulas over disjoint variables, in order of first variable.

    Two variables share a component when some predicate mentions both.  The
    formula is satisfiable iff every component is, and the union of the
    component witnesses is a witness.  Variable names are kept.
    """
    parent = list(range(len(phi.vars)))

    def find(j: int) -> int:
        while parent[j] != j:
            parent[j] = parent[parent[j]]
            j = parent[j]
        return j

    for p in phi.preds:
        a, b = find(p.i), find(p.k)
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for j in range(len(phi.vars)):
        groups.setdefault(find(j), []).append(j)
    owner = {j: root for root, members in groups.items() for j in members}
    out = []
    for root, members in groups.items():
        local = {j: idx for idx, j in enumerate(members)}
        out.append(
            EtimFormula(
                tuple(phi.vars[j] for j in members),
                tuple(
                    Predicate(p.A, local[p.i], local[p.k], p.B)
                    for p in phi.preds
                    if owner[p.i] == root
                ),
            )
        )
    return out


def equations(phi: EtimFormula) -> tuple[int, list[list[Fraction]], dict[int, tuple[int, int]]]:
    """Expand every predicate into scalar homogeneous equations over the matrix entries."""
    layout = {}
    off = 0
    for j, v in enumerate(phi.vars):
        layout[j] = (off, v.n)
        off += v.n * v.n
    N = off
    rows = []
    for p in phi.preds:
        oi, ni = layout[p.i]
        ok, nk = layout[p.k]
        for r in range(nk):
            for s in range(ni):
                eq = [Fraction(0)] * N
                # (A . X_i)[r, s] = sum_t A[r, t] x_i[t, s]
                for t in range(ni):
                    eq[oi + t * ni + s] += p.A[r, t]
                # (X_k . B)[r, s] = sum_t x_k[r, t] B[t, s]
                for t in range(nk):
                    eq[ok + r * nk + t] -= p.B[t, s]
                rows.append(eq)
    return N, rows, layout


def assemble(phi: EtimFormula) -> SolutionSpace:
    N, rows, layout = equations(phi)
    basis = nullspace(rows, N)
    return SolutionSpace(N, tuple(tuple(v) for v in basis), layout)


# -- verdicts and modes --------------------------------------------------------


@dataclass(frozen=True)
class Sat:
    witness: Mapping[str, RatMatrix]
    status = "SAT"


@dataclass(frozen=True)
class Unsat:
    status = "UNSAT"


@dataclass(frozen=True)
class Unknown:
    trials: int
    status = "UNKNOWN"


EtimVerdict = Union[Sat, Unsat, Unknown]


@dataclass(frozen=True)
class Deterministic:
    """Exact decision.

    ``strategy="factored"`` tests each block determinant for identical
    vanishing (probe points, then symbolic expansion); ``"grid"`` evaluates
    the full product on ``{0..D}^p`` with ``D = sum n_i``.  Work beyond
    ``grid_limit`` raises :class:`GridTooLarge` unless ``force`` is set.
    ``rank_shortcut=False`` skips the up-front rank comparison, so that
    every verdict comes from the determinant test.
    """

    grid_limit: int = 2**20
    force: bool = False
    strategy: str = "factored"
    rank_shortcut: bool = True

    def __post_init__(self):
        if self.strategy not in ("factored", "grid"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.grid_limit < 1:
            raise ValueError("grid_limit must be at least 1")


@dataclass(frozen=True)
class Randomized:
    """Schwartz-Zippel sampling on ``{-8D..8D}^p``; may answer Unknown."""

    seed: int
    trials: int = 64


@dataclass(frozen=True)
class Auto:
    """Deterministic when its work fits ``grid_limit``, randomized otherwise."""

    seed: int = 0
    trials: int = 64
    grid_limit: int = 2**20


Mode = Union[Deterministic, Randomized, Auto]


def satisfies(phi: EtimFormula, assignment: Mapping[str, RatMatrix]) -> bool:
    """Exact check: every predicate holds and every matrix is invertible."""
    for v in phi.vars:
        m = assignment.get(v.name)
        if m is None or m.shape != (v.n, v.n) or det(m) == 0:
            return False
    for p in phi.preds:
        xi = assignment[phi.vars[p.i].name]
        xk = assignment[phi.vars[p.k].name]
        if p.A @ xi != xk @ p.B:
            return False
    return True


def _degree_bound(phi: EtimFormula) -> int:
    return sum(v.n for v in phi.vars)


def forced_singular(phi: EtimFormula, space: SolutionSpace | None = None) -> bool:
    """Cheap sufficient test for unsatisfiability: some block is zero on the whole space."""
    if space is None:
        space = assemble(phi)
    for j, v in enumerate(phi.vars):
        if v.n == 0:
            continue
        off, n = space.layout[j]
        if not any(any(vec[off:off + n * n]) for vec in space.basis):
            return True
    return False


def _q_nonzero(space: SolutionSpace, blocks: Sequence[int], t: Sequence[int]) -> list[Fraction] | None:
    vec = space.point(t)
    for j in blocks:
        if det(space.block(vec, j)) == 0:
            return None
    return vec


def _factored_cost(phi: EtimFormula, space: SolutionSpace) -> int:
    cost = 0
    for j, v in enumerate(phi.vars):
        if v.n:
            cost += pit.monomial_bound(v.n, len(space.block_span(j)))
    return cost


def _find_witness_point(space: SolutionSpace, blocks: Sequence[int], D: int) -> list[Fraction]:
    """A point with nonzero q, assuming q is not identically zero."""
    for count, t in enumerate(pit.grid_points(space.p, D)):
        if count >= WITNESS_SCAN_BUDGET:
            break
        vec = _q_nonzero(space, blocks, t)
        if vec is not None:
            return vec
    rng = random.Random(0)
    s = 8 * D
    for _ in range(100_000):
        vec = _q_nonzero(space, blocks, [rng.randint(-s, s) for _ in range(space.p)])
        if vec is not None:
            return vec
    raise AssertionError("no witness found for a polynomial certified nonzero")


def decide(phi: EtimFormula, mode: Mode | None = None) -> EtimVerdict:
    """Decide satisfiability; SAT verdicts carry an exactly verified rational witness."""
    if mode is None:
        mode = Auto()
    reduced, pruned = prune_unused(phi)
    pruned = set(pruned)

    def finish(assignment: Mapping[str, RatMatrix]) -> Sat:
        witness = {
            v.name: RatMatrix.identity(v.n) if v.name in pruned else assignment[v.name]
            for v in phi.vars
        }
        if not satisfies(phi, witness):
            raise AssertionError("internal error: witness failed exact re-verification")
        return Sat(witness)

    # invertible X, X' preserve rank, so A.X = X'.B needs rank A = rank B
    shortcut = not isinstance(mode, Deterministic) or mode.rank_shortcut
    if shortcut and any(rank(p.A) != rank(p.B) for p in reduced.preds):
        return Unsat()
    space = assemble(reduced)
    blocks = [j for j, v in enumerate(reduced.vars) if v.n > 0]
    if not blocks:
        return finish({v.name: RatMatrix.identity(0) for v in reduced.vars})
    if forced_singular(reduced, space):
        return Unsat()
    D = _degree_bound(reduced)

    def assignment_of(vec) -> dict[str, RatMatrix]:
        return {v.name: space.block(vec, j) for j, v in enumerate(reduced.vars)}

    if isinstance(mode, Auto):
        if _factored_cost(reduced, space) <= mode.grid_limit:
            mode = Deterministic(grid_limit=mode.grid_limit, force=True)
        else:
            mode = Randomized(mode.seed, mode.trials)

    if isinstance(mode, Randomized):
        rng = random.Random(mode.seed)
        s = 8 * D
        for _ in range(mode.trials):
            vec = _q_nonzero(space, blocks, [rng.randint(-s, s) for _ in range(space.p)])
            if vec is not None:
                return finish(assignment_of(vec))
        return Unknown(mode.trials)

    if mode.strategy == "grid":
        size = (D + 1) ** space.p
        if size > mode.grid_limit and not mode.force:
            raise GridTooLarge(f"grid of {size} points exceeds the limit {mode.grid_limit}")
        for t in pit.grid_points(space.p, D):
            vec = _q_nonzero(space, blocks, t)
            if vec is not None:
                return finish(assignment_of(vec))
        return Unsat()

    if not mode.force:
        cost = _factored_cost(reduced, space)
        if cost > mode.grid_limit:
            raise GridTooLarge(f"symbolic work bound {cost} exceeds the limit {mode.grid_limit}")
    for j in blocks:
        if pit.linear_block_is_singular(space.block_span(j)):
            return Unsat()
    return finish(assignment_of(_find_witness_point(space, blocks, D)))


# -- SMT-LIB export ------------------------------------------------------------


def _smt_num(q: Fraction) -> str:
    num = str(q.numerator) if q.numerator >= 0 else f"(- {-q.numerator})"
    if q.denominator == 1:
        return num
    return f"(/ {num} {q.denominator})"


def _smt_sum(terms: list[str]) -> str:
    if not terms:
        return "0"
    if len(terms) == 1:
        return terms[0]
    return "(+ " + " ".join(terms) + ")"


def export_smt(phi: EtimFormula) -> str:
    """QF_NRA problem equisatisfiable with ``phi``.

    Each retained variable ``X`` of size n gets reals ``x_X_r_s`` for its
    entries and ``y_X_r_s`` for the entries of its inverse (1-based).  The
    assertions are the entry-wise expansions of every predicate, followed,
    variable by variable, by ``X . Y = Id`` and ``Y . X = Id``.
    """
    reduced, _ = prune_unused(phi)
    names = [v.name for v in reduced.vars]

    def x(j, r, s):
        return f"x_{names[j]}_{r + 1}_{s + 1}"

    def y(j, r, s):
        return f"y_{names[j]}_{r + 1}_{s + 1}"

    lines = ["(set-logic QF_NRA)"]
    for sym in (x, y):
        for j, v in enumerate(reduced.vars):
            for r in range(v.n):
                for s in range(v.n):
                    lines.append(f"(declare-const {sym(j, r, s)} Real)")
    for p in reduced.preds:
        ni = reduced.vars[p.i].n
        nk = reduced.vars[p.k].n
        for r in range(nk):
            for s in range(ni):
                lhs = [f"(* {_smt_num(p.A[r, t])} {x(p.i, t, s)})" for t in range(ni)]
                rhs = [f"(* {_smt_num(p.B[t, s])} {x(p.k, r, t)})" for t in range(nk)]
                lines.append(f"(assert (= {_smt_sum(lhs)} {_smt_sum(rhs)}))")
    for j, v in enumerate(reduced.vars):
        n = v.n
        for first, second in ((x, y), (y, x)):
            for r in range(n):
                for s in range(n):
                    terms = [f"(* {first(j, r, t)} {second(j, t, s)})" for t in range(n)]
                    lines.append(f"(assert (= {_smt_sum(terms)} {int(r == s)}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def format_witness(witness: Mapping[str, RatMatrix]) -> dict:
    return {name: m.to_document() for name, m in witness.items()}
