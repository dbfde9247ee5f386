"""Bisimilarity of finitary diagrams by backtracking search.

The nondeterministic construction of a bisimulation is determinised as a
depth-first search.  A branch picks, for each uncovered object, a partner
on the other side, then repeatedly takes an unprocessed triple
``(c, X, d)`` and a relation ``Q`` of pairs extending it, creating a fresh
matrix variable per pair together with the naturality equation
``G(d <= d') . X = X' . F(c <= c')``.  A branch that covers every object
is accepted iff the accumulated matrix formula is satisfiable.

Two documented readings of the construction:

* every ``d' > d`` must be matched by some ``c' >= c``, since the reverse
  inequality would take ``Q`` outside its domain;
* the partner chosen for a root object may already be covered.

The search is generic over a value kernel.  :class:`VectorKernel` compares
dimensions and emits matrix equations; the word kernel used for encoded
transition systems lives in :mod:`diagbisim.encodings`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterator, Protocol, Union

from . import etim
from .diagram import BisimWitness, FinitaryDiagram, Triple, verify_bisimulation
from .errors import ShapeMismatch
from .matrix import RatMatrix, rank

__all__ = [
    "ValueKernel",
    "VectorKernel",
    "vector_kernel",
    "SearchState",
    "Yes",
    "No",
    "Unknown",
    "enumerate_matches",
    "enumerate_Q",
    "initial_state",
    "add_root",
    "run_closure",
    "iter_branches",
    "check_bisimilar",
]


class ValueKernel(Protocol):
    """What the search needs to know about the values carried by the diagrams."""

    constraint_free: bool

    def compatible(self, F, c, G, d) -> bool: ...

    def size(self, F, c) -> int: ...

    def equation(self, F, c, c2, G, d, d2) -> tuple[RatMatrix, RatMatrix] | None: ...

    def verify(self, F, G, witness: BisimWitness) -> bool: ...


class VectorKernel:
    """Objects match when dimensions agree; each extension emits a matrix equation."""

    constraint_free = False

    def compatible(self, F: FinitaryDiagram, c: str, G: FinitaryDiagram, d: str) -> bool:
        return F.dim(c) == G.dim(d)

    def size(self, F: FinitaryDiagram, c: str) -> int:
        return F.dim(c)

    def equation(self, F, c, c2, G, d, d2):
        # G(d <= d2) . X = X' . F(c <= c2)
        return G.mat(d, d2), F.mat(c, c2)

    def verify(self, F, G, witness: BisimWitness) -> bool:
        return verify_bisimulation(F, G, witness)

    def __repr__(self) -> str:
        return "VectorKernel()"


def vector_kernel() -> VectorKernel:
    return VectorKernel()


@dataclass(frozen=True)
class SearchState:
    """One node of the search tree.

    ``S`` holds the uncovered objects tagged ``("C", c)`` or ``("D", d)``;
    ``pending`` lists the unmarked triples in FIFO order.
    """

    S: frozenset
    triples: tuple[tuple[str, int, str], ...] = ()
    pending: tuple[int, ...] = ()
    vars: tuple[tuple[str, int], ...] = ()
    lin: tuple[etim.Predicate, ...] = ()

    def formula(self) -> etim.EtimFormula:
        return etim.EtimFormula(
            tuple(etim.MatrixVar(n, k) for n, k in self.vars), self.lin
        )

    def _fresh(self, n: int) -> tuple[int, tuple[tuple[str, int], ...]]:
        idx = len(self.vars)
        return idx, self.vars + ((f"X{idx + 1}", n),)


@dataclass(frozen=True)
class Yes:
    witness: BisimWitness
    formula: etim.EtimFormula | None = None
    status = "YES"


@dataclass(frozen=True)
class No:
    status = "NO"


@dataclass(frozen=True)
class Unknown:
    status = "UNKNOWN"


BisimVerdict = Union[Yes, No, Unknown]


def _kernel(kernel):
    return VectorKernel() if kernel is None else kernel


def enumerate_matches(c: str, F, G, kernel=None) -> Iterator[str]:
    """Objects of ``G`` compatible with ``c``, in ``G``'s input order."""
    kernel = _kernel(kernel)
    F.poset.index(c)
    for d in G.objects:
        if kernel.compatible(F, c, G, d):
            yield d


def _candidate_pairs(c, d, F, G, kernel) -> list[tuple[str, str]]:
    out = []
    for c2 in F.poset.up(c):
        for d2 in G.poset.up(d):
            if (c2, d2) != (c, d) and kernel.compatible(F, c2, G, d2):
                out.append((c2, d2))
    return out


def _covers(Q, c, d, F, G) -> bool:
    cs = {a for a, _ in Q}
    ds = {b for _, b in Q}
    return all(c2 in cs for c2 in F.poset.strict_up(c)) and all(
        d2 in ds for d2 in G.poset.strict_up(d)
    )


def enumerate_Q(
    c: str, d: str, F, G, kernel=None, exhaustive: bool = False
) -> Iterator[tuple[tuple[str, str], ...]]:
    """Relations extending ``(c, d)`` that match every strict successor on both sides.

    By default only unions of one partner choice per successor of ``c`` and
    one per successor of ``d`` are produced; any larger covering relation
    only adds constraints, so this loses no solutions.  ``exhaustive=True``
    produces every covering subset of the candidate pairs instead, smallest
    first.  Nothing is yielded when some successor has no compatible partner.
    """
    kernel = _kernel(kernel)
    c_opts = [
        [(c2, d2) for d2 in G.poset.up(d) if kernel.compatible(F, c2, G, d2)]
        for c2 in F.poset.strict_up(c)
    ]
    d_opts = [
        [(c2, d2) for c2 in F.poset.up(c) if kernel.compatible(F, c2, G, d2)]
        for d2 in G.poset.strict_up(d)
    ]
    if any(not opts for opts in c_opts + d_opts):
        return
    if exhaustive:
        cands = _candidate_pairs(c, d, F, G, kernel)
        for size in range(len(cands) + 1):
            for Q in itertools.combinations(cands, size):
                if _covers(Q, c, d, F, G):
                    yield Q
        return
    seen = set()
    for combo in itertools.product(*c_opts, *d_opts):
        Q = tuple(dict.fromkeys(combo))
        key = frozenset(Q)
        if key not in seen:
            seen.add(key)
            yield Q


def initial_state(F, G) -> SearchState:
    return SearchState(frozenset([("C", c) for c in F.objects] + [("D", d) for d in G.objects]))


def add_root(state: SearchState, c: str, d: str, F, G, kernel=None) -> SearchState:
    """Start a new triple ``(c, X, d)`` for an uncovered object (lines 7-13)."""
    kernel = _kernel(kernel)
    if not kernel.compatible(F, c, G, d):
        raise ShapeMismatch(f"{c!r} and {d!r} carry incompatible values")
    idx, vars_ = state._fresh(kernel.size(F, c))
    t = len(state.triples)
    return replace(
        state,
        S=state.S - {("C", c), ("D", d)},
        triples=state.triples + ((c, idx, d),),
        pending=state.pending + (t,),
        vars=vars_,
    )


def run_closure(state: SearchState, Q, F, G, kernel=None) -> SearchState | None:
    """Process the first unmarked triple with relation ``Q``; None if the branch fails."""
    kernel = _kernel(kernel)
    if not state.pending:
        raise ValueError("no unmarked triple to process")
    t, pending = state.pending[0], state.pending[1:]
    c, x, d = state.triples[t]
    S = state.S - {("C", e) for e in F.poset.up(c)} - {("D", e) for e in G.poset.up(d)}
    triples, vars_, lin = state.triples, state.vars, state.lin
    for c2, d2 in Q:
        if not kernel.compatible(F, c2, G, d2):
            return None
        idx = len(vars_)
        vars_ = vars_ + ((f"X{idx + 1}", kernel.size(F, c2)),)
        pending = pending + (len(triples),)
        triples = triples + ((c2, idx, d2),)
        eq = kernel.equation(F, c, c2, G, d, d2)
        if eq is not None:
            A, B = eq
            lin = lin + (etim.Predicate(A, x, idx, B),)
    return SearchState(S, triples, pending, vars_, lin)


def _pick_order(F, G) -> list[tuple[str, str]]:
    return [("C", c) for c in F.poset.topological_order()] + [
        ("D", d) for d in G.poset.topological_order()
    ]


class _ComponentSolver:
    """Solves branch formulas component by component, remembering each result.

    Sibling branches share most of their subsystems, so the same component
    recurs many times.  The memo lives for a single search.
    """

    def __init__(self, mode: etim.Mode | None):
        self.mode = mode
        self._verdicts: dict = {}
        self._singular: dict = {}

    @staticmethod
    def _key(sub: etim.EtimFormula):
        return tuple(v.n for v in sub.vars), tuple((p.A, p.i, p.k, p.B) for p in sub.preds)

    def forced_singular(self, phi: etim.EtimFormula) -> bool:
        for sub in etim.components(phi):
            key = self._key(sub)
            if key not in self._singular:
                self._singular[key] = etim.forced_singular(sub)
            if self._singular[key]:
                return True
        return False

    def decide(self, phi: etim.EtimFormula) -> etim.EtimVerdict:
        witness: dict[str, RatMatrix] = {}
        unknown = None
        for sub in etim.components(phi):
            key = self._key(sub)
            if key not in self._verdicts:
                v = etim.decide(sub, self.mode)
                if isinstance(v, etim.Sat):
                    v = tuple(v.witness[x.name] for x in sub.vars)
                self._verdicts[key] = v
            v = self._verdicts[key]
            if isinstance(v, etim.Unsat):
                return v
            if isinstance(v, etim.Unknown):
                unknown = v
            else:
                witness.update(zip((x.name for x in sub.vars), v))
        if unknown is not None:
            return unknown
        if not etim.satisfies(phi, witness):
            raise AssertionError("internal error: combined witness failed re-verification")
        return etim.Sat(witness)


@lru_cache(maxsize=4096)
def _rank_balanced(A: RatMatrix, B: RatMatrix) -> bool:
    return rank(A) == rank(B)


def _closures(
    state: SearchState, F, G, kernel, exhaustive: bool, feasible, skip_unbalanced: bool
) -> Iterator[SearchState]:
    """Process unmarked triples until none is left, over every choice of Q.

    A new equation A.X = X'.B with rank A != rank B has no invertible
    solution, so with ``skip_unbalanced`` the closures below it, which
    could only fail, are not generated.
    """
    if not state.pending:
        yield state
        return
    c, _, d = state.triples[state.pending[0]]
    for Q in enumerate_Q(c, d, F, G, kernel, exhaustive):
        nxt = run_closure(state, Q, F, G, kernel)
        if nxt is None:
            continue
        if skip_unbalanced and not all(_rank_balanced(p.A, p.B) for p in nxt.lin[len(state.lin):]):
            continue
        if feasible(nxt):
            yield from _closures(nxt, F, G, kernel, exhaustive, feasible, skip_unbalanced)


def _root_partners(state: SearchState, order, F, G, kernel) -> list[tuple[str, str]]:
    side, obj = next(o for o in order if o in state.S)
    if side == "C":
        return [(obj, d) for d in enumerate_matches(obj, F, G, kernel)]
    return [(c, obj) for c in F.objects if kernel.compatible(F, c, G, obj)]


def _feasibility(kernel, prune: bool, solver):
    def feasible(state: SearchState) -> bool:
        if not prune or kernel.constraint_free or not state.lin:
            return True
        return not solver.forced_singular(state.formula())

    return feasible


def iter_branches(
    F,
    G,
    kernel=None,
    *,
    exhaustive: bool = False,
    prune: bool = False,
    skip_unbalanced: bool = False,
    _solver=None,
) -> Iterator[SearchState]:
    """Every complete branch of the search, in the fixed depth-first order.

    ``prune`` and ``skip_unbalanced`` drop branches that are certainly
    unsatisfiable; the surviving ones keep their relative order.
    """
    kernel = _kernel(kernel)
    order = _pick_order(F, G)
    feasible = _feasibility(kernel, prune, _solver if _solver is not None else _ComponentSolver(None))

    def walk(state: SearchState) -> Iterator[SearchState]:
        for closed in _closures(state, F, G, kernel, exhaustive, feasible, skip_unbalanced):
            if not closed.S:
                yield closed
                continue
            for c, d in _root_partners(closed, order, F, G, kernel):
                yield from walk(add_root(closed, c, d, F, G, kernel))

    yield from walk(initial_state(F, G))


def _witness_from(state: SearchState, assignment) -> BisimWitness:
    names = [n for n, _ in state.vars]
    return BisimWitness(
        tuple(
            Triple(c, None if assignment is None else assignment[names[x]], d)
            for c, x, d in state.triples
        )
    )


def _constraint_free_search(F, G, kernel) -> BisimVerdict:
    """Same verdict as the full search when extensions emit no constraints.

    Without shared unknowns the subtrees below distinct triples are
    independent, so success of a triple depends only on its pair of
    objects and can be memoised.
    """

    @lru_cache(maxsize=None)
    def good(c: str, d: str) -> bool:
        for c2 in F.poset.strict_up(c):
            if not any(
                kernel.compatible(F, c2, G, d2) and good(c2, d2) for d2 in G.poset.up(d)
            ):
                return False
        for d2 in G.poset.strict_up(d):
            if not any(
                kernel.compatible(F, c2, G, d2) and good(c2, d2) for c2 in F.poset.up(c)
            ):
                return False
        return True

    def partner(c=None, d=None):
        if d is None:
            return next((e for e in G.objects if kernel.compatible(F, c, G, e) and good(c, e)), None)
        return next((e for e in F.objects if kernel.compatible(F, e, G, d) and good(e, d)), None)

    pairs: dict[tuple[str, str], None] = {}

    def collect(c: str, d: str) -> None:
        if (c, d) in pairs:
            return
        pairs[(c, d)] = None
        for c2 in F.poset.strict_up(c):
            d2 = next(e for e in G.poset.up(d) if kernel.compatible(F, c2, G, e) and good(c2, e))
            collect(c2, d2)
        for d2 in G.poset.strict_up(d):
            c2 = next(e for e in F.poset.up(c) if kernel.compatible(F, e, G, d2) and good(e, d2))
            collect(c2, d2)

    for side, obj in _pick_order(F, G):
        covered_c = {a for a, _ in pairs}
        covered_d = {b for _, b in pairs}
        if side == "C" and obj not in covered_c:
            d = partner(c=obj)
            if d is None:
                return No()
            collect(obj, d)
        elif side == "D" and obj not in covered_d:
            c = partner(d=obj)
            if c is None:
                return No()
            collect(c, obj)
    witness = BisimWitness(tuple(Triple(c, None, d) for c, d in pairs))
    if not kernel.verify(F, G, witness):
        raise AssertionError("internal error: constructed witness does not verify")
    return Yes(witness)


def check_bisimilar(
    F,
    G,
    kernel=None,
    mode: etim.Mode | None = None,
    *,
    exhaustive: bool = False,
    prune: bool = False,
    memoize: bool = True,
    per_root: bool = True,
) -> BisimVerdict:
    """Decide whether ``F`` and ``G`` are bisimilar.

    Yes carries a witness that has passed the exact verifier.  No means
    every branch failed with a definite answer; Unknown means some branch
    could only be answered Unknown by randomized solving.

    The tree grown from one root shares no unknowns with the trees of
    other roots, and an object without any satisfiable tree rooted at it
    rules out bisimilarity whatever else was chosen.  So by default
    (``per_root``) each root commits to its first satisfiable tree instead
    of backtracking across roots; this returns the first satisfiable
    branch of the full depth-first order.  ``per_root=False`` walks
    complete branches literally.  With a constraint-free kernel and
    ``memoize`` set, a memoised search over object pairs is used.
    """
    kernel = _kernel(kernel)
    if kernel.constraint_free and memoize:
        return _constraint_free_search(F, G, kernel)
    solver = _ComponentSolver(mode)

    def solve(state: SearchState):
        if kernel.constraint_free:
            return _witness_from(state, None), None
        formula = state.formula()
        verdict = solver.decide(formula)
        if isinstance(verdict, etim.Sat):
            return _witness_from(state, verdict.witness), formula
        return verdict, formula

    def accept(witness, formula) -> Yes:
        if not kernel.verify(F, G, witness):
            raise AssertionError("internal error: constructed witness does not verify")
        return Yes(witness, formula)

    saw_unknown = False
    if not per_root:
        for state in iter_branches(
            F, G, kernel, exhaustive=exhaustive, prune=prune, skip_unbalanced=True, _solver=solver
        ):
            result, formula = solve(state)
            if isinstance(result, BisimWitness):
                return accept(result, formula)
            saw_unknown |= isinstance(result, etim.Unknown)
        return Unknown() if saw_unknown else No()

    order = _pick_order(F, G)
    feasible = _feasibility(kernel, prune, solver)
    state = initial_state(F, G)
    result = formula = None
    while state.S:
        committed = None
        for c, d in _root_partners(state, order, F, G, kernel):
            for closed in _closures(
                add_root(state, c, d, F, G, kernel), F, G, kernel, exhaustive, feasible, True
            ):
                result, formula = solve(closed)
                if isinstance(result, BisimWitness):
                    committed = closed
                    break
                saw_unknown |= isinstance(result, etim.Unknown)
            if committed is not None:
                break
        if committed is None:
            return Unknown() if saw_unknown else No()
        state = committed
    if result is None:
        result, formula = solve(state)
    return accept(result, formula)
