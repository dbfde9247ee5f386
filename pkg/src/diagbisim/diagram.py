"""Finite posets, finitary diagrams and bisimulation witnesses.

A finitary diagram assigns a dimension to each element of a finite poset
and a rational matrix to each comparable pair ``c <= c2``.  Matrices are
stored rows x cols, so ``mat(c, c2)`` has ``dim(c2)`` rows and ``dim(c)``
columns and composition along a chain is ``mat(c1, c2) @ mat(c0, c1)``.
Input documents give matrices on generating (Hasse) edges only; every
other matrix is derived by composition and checked for path independence.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import NotAPoset, NotFunctorial, ObjectNotFound, ParseError, ShapeMismatch
from .matrix import RatMatrix, det

__all__ = [
    "FinitePoset",
    "FinitaryDiagram",
    "Triple",
    "BisimWitness",
    "load_diagram",
    "load_witness",
    "bisimulation_defects",
    "verify_bisimulation",
]


class FinitePoset:
    """A finite partial order, kept both as covering edges and as full closure.

    Elements keep their input order, which every enumeration in the package
    relies on for reproducibility.
    """

    __slots__ = ("elements", "_index", "_up", "_down", "_hasse")

    def __init__(self, elements: Iterable[str], leq: Iterable[tuple[str, str]]):
        elements = tuple(elements)
        index = {e: i for i, e in enumerate(elements)}
        if len(index) != len(elements):
            raise NotAPoset("duplicate element identifiers")
        rel = set()
        for a, b in leq:
            if a not in index or b not in index:
                raise ObjectNotFound(f"order pair ({a!r}, {b!r}) mentions an unknown element")
            rel.add((a, b))
        for e in elements:
            if (e, e) not in rel:
                raise NotAPoset(f"relation is not reflexive at {e!r}")
        for a, b in rel:
            if a != b and (b, a) in rel:
                raise NotAPoset(f"relation is not antisymmetric: {a!r} and {b!r}")
        up: dict[str, set[str]] = {e: set() for e in elements}
        for a, b in rel:
            if a != b:
                up[a].add(b)
        for a in elements:
            for b in up[a]:
                missing = up[b] - up[a]
                if missing:
                    c = min(missing, key=index.__getitem__)
                    raise NotAPoset(f"relation is not transitive: {a!r} <= {b!r} <= {c!r}")
        self._init(elements, index, up)

    def _init(self, elements, index, up) -> None:
        order = index.__getitem__
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "_index", index)
        object.__setattr__(
            self, "_up", {e: tuple(sorted(up[e], key=order)) for e in elements}
        )
        down: dict[str, list[str]] = {e: [] for e in elements}
        for e in elements:
            for b in up[e]:
                down[b].append(e)
        object.__setattr__(
            self, "_down", {e: tuple(sorted(down[e], key=order)) for e in elements}
        )
        hasse = []
        for a in elements:
            for b in self._up[a]:
                if not any(b in up[m] for m in up[a]):
                    hasse.append((a, b))
        object.__setattr__(self, "_hasse", tuple(hasse))

    def __setattr__(self, name, value):
        raise AttributeError("FinitePoset is immutable")

    @classmethod
    def from_edges(cls, elements: Iterable[str], edges: Iterable[tuple[str, str]]) -> FinitePoset:
        """Order generated by ``edges``; raises NotAPoset if the edges contain a cycle."""
        elements = tuple(elements)
        index = {e: i for i, e in enumerate(elements)}
        if len(index) != len(elements):
            raise NotAPoset("duplicate element identifiers")
        succ: dict[str, set[str]] = {e: set() for e in elements}
        for a, b in edges:
            if a not in index or b not in index:
                raise ObjectNotFound(f"edge ({a!r}, {b!r}) mentions an unknown element")
            if a == b:
                raise NotAPoset(f"self-loop at {a!r}")
            succ[a].add(b)
        up: dict[str, set[str]] = {}
        state: dict[str, int] = {}

        def visit(e: str) -> set[str]:
            if state.get(e) == 2:
                return up[e]
            if state.get(e) == 1:
                raise NotAPoset(f"cycle through {e!r}")
            state[e] = 1
            acc: set[str] = set()
            for b in succ[e]:
                acc.add(b)
                acc |= visit(b)
            state[e] = 2
            up[e] = acc
            return acc

        for e in elements:
            visit(e)
        poset = cls.__new__(cls)
        poset._init(elements, index, up)
        return poset

    # -- queries ------------------------------------------------------
    def __contains__(self, e) -> bool:
        return e in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, e: str) -> int:
        try:
            return self._index[e]
        except KeyError:
            raise ObjectNotFound(f"unknown object {e!r}") from None

    def leq(self, a: str, b: str) -> bool:
        self.index(a)
        self.index(b)
        return a == b or b in self._up[a]

    def lt(self, a: str, b: str) -> bool:
        return a != b and self.leq(a, b)

    def strict_up(self, e: str) -> tuple[str, ...]:
        """Elements strictly above ``e``, in input order."""
        self.index(e)
        return self._up[e]

    def up(self, e: str) -> tuple[str, ...]:
        """Reflexive up-set of ``e``: ``e`` first, then the strict up-set."""
        return (e,) + self.strict_up(e)

    def strict_down(self, e: str) -> tuple[str, ...]:
        self.index(e)
        return self._down[e]

    @property
    def hasse_edges(self) -> tuple[tuple[str, str], ...]:
        return self._hasse

    @property
    def pairs(self) -> tuple[tuple[str, str], ...]:
        """All pairs ``(a, b)`` with ``a <= b``, reflexive ones included."""
        return tuple((a, b) for a in self.elements for b in self.up(a))

    def topological_order(self) -> tuple[str, ...]:
        """Linear extension; ties are broken by input order."""
        indeg = {e: len(self._down[e]) for e in self.elements}
        remaining = list(self.elements)
        out = []
        while remaining:
            e = next(x for x in remaining if indeg[x] == 0)
            remaining.remove(e)
            out.append(e)
            for b in self._up[e]:
                indeg[b] -= 1
        return tuple(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinitePoset):
            return NotImplemented
        return self.elements == other.elements and self._up == other._up

    def __hash__(self) -> int:
        return hash((self.elements, tuple(self._up.items())))

    def __repr__(self) -> str:
        return f"FinitePoset({list(self.elements)!r}, hasse={list(self._hasse)!r})"


class FinitaryDiagram:
    """A functor from a finite poset to rational matrices.

    Build with :meth:`from_edges` or :func:`load_diagram`; the constructor
    takes the fully composed data and validates both functor laws.
    """

    __slots__ = ("poset", "_dims", "_mats")

    def __init__(
        self,
        poset: FinitePoset,
        dims: Mapping[str, int],
        mats: Mapping[tuple[str, str], RatMatrix],
        *,
        check: bool = True,
    ):
        object.__setattr__(self, "poset", poset)
        object.__setattr__(self, "_dims", {e: int(dims[e]) for e in poset})
        object.__setattr__(self, "_mats", dict(mats))
        if check:
            self.check_laws()

    def __setattr__(self, name, value):
        raise AttributeError("FinitaryDiagram is immutable")

    @classmethod
    def from_edges(
        cls,
        objects: Sequence[tuple[str, int]],
        edges: Sequence[tuple[str, str, RatMatrix]],
    ) -> FinitaryDiagram:
        """Derive every composite matrix from generating edges.

        Edges need not be covering pairs; a redundant edge must agree with
        the composite along the other paths.
        """
        ids = [o for o, _ in objects]
        dims = {}
        for o, n in objects:
            if o in dims:
                raise ParseError(f"duplicate object id {o!r}")
            if isinstance(n, bool) or not isinstance(n, int) or n < 0:
                raise ParseError(f"dimension of {o!r} must be a non-negative integer")
            dims[o] = n
        seen = set()
        incoming: dict[str, list[tuple[str, RatMatrix]]] = {o: [] for o in ids}
        for src, dst, m in edges:
            if src not in dims or dst not in dims:
                raise ObjectNotFound(f"edge {src!r} -> {dst!r} mentions an unknown object")
            if (src, dst) in seen:
                raise ParseError(f"duplicate edge {src!r} -> {dst!r}")
            seen.add((src, dst))
            if m.shape != (dims[dst], dims[src]):
                raise ShapeMismatch(
                    f"edge {src!r} -> {dst!r}: matrix is {m.rows}x{m.cols}, "
                    f"expected {dims[dst]}x{dims[src]} (dim(dst) x dim(src))"
                )
            incoming[dst].append((src, m))
        poset = FinitePoset.from_edges(ids, [(s, d) for s, d, _ in edges])
        topo = poset.topological_order()
        mats: dict[tuple[str, str], RatMatrix] = {}
        for c in ids:
            mats[(c, c)] = RatMatrix.identity(dims[c])
            for c2 in topo:
                if not poset.lt(c, c2):
                    continue
                found = None
                for b, m in incoming[c2]:
                    if not poset.leq(c, b):
                        continue
                    candidate = m @ mats[(c, b)]
                    if found is None:
                        found = candidate
                    elif candidate != found:
                        raise NotFunctorial(
                            f"paths from {c!r} to {c2!r} compose to different matrices "
                            f"{found!r} and {candidate!r}"
                        )
                mats[(c, c2)] = found
        return cls(poset, dims, mats, check=False)

    def check_laws(self) -> None:
        """Raise unless identities and all chain compositions hold exactly."""
        p = self.poset
        for a, b in p.pairs:
            m = self._mats.get((a, b))
            if m is None:
                raise NotFunctorial(f"missing matrix for {a!r} <= {b!r}")
            if m.shape != (self._dims[b], self._dims[a]):
                raise ShapeMismatch(f"matrix for {a!r} <= {b!r} has shape {m.shape}")
        for a in p:
            if self._mats[(a, a)] != RatMatrix.identity(self._dims[a]):
                raise NotFunctorial(f"matrix for {a!r} <= {a!r} is not the identity")
            for b in p.strict_up(a):
                for c in p.strict_up(b):
                    if self._mats[(b, c)] @ self._mats[(a, b)] != self._mats[(a, c)]:
                        raise NotFunctorial(f"composition fails on {a!r} <= {b!r} <= {c!r}")

    @property
    def objects(self) -> tuple[str, ...]:
        return self.poset.elements

    def dim(self, c: str) -> int:
        try:
            return self._dims[c]
        except KeyError:
            raise ObjectNotFound(f"unknown object {c!r}") from None

    def mat(self, c: str, c2: str) -> RatMatrix:
        if not self.poset.leq(c, c2):
            raise ShapeMismatch(f"{c!r} is not below {c2!r}")
        return self._mats[(c, c2)]

    def to_document(self) -> dict:
        return {
            "objects": [{"id": o, "dim": self._dims[o]} for o in self.objects],
            "edges": [
                {"src": a, "dst": b, "matrix": self._mats[(a, b)].to_document()}
                for a, b in self.poset.hasse_edges
            ],
        }

    def rename(self, mapping: Mapping[str, str]) -> FinitaryDiagram:
        """Same diagram with object ids replaced (order of objects kept)."""
        edges = [
            (mapping[a], mapping[b], self._mats[(a, b)]) for a, b in self.poset.hasse_edges
        ]
        return FinitaryDiagram.from_edges([(mapping[o], self._dims[o]) for o in self.objects], edges)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinitaryDiagram):
            return NotImplemented
        return self.poset == other.poset and self._dims == other._dims and self._mats == other._mats

    def __hash__(self) -> int:
        return hash((self.poset, tuple(self._dims.items())))

    def __repr__(self) -> str:
        dims = ", ".join(f"{o}:{self._dims[o]}" for o in self.objects)
        return f"FinitaryDiagram({dims}; edges={list(self.poset.hasse_edges)!r})"


def _as_document(doc) -> Mapping:
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.pos) from None
    if not isinstance(doc, Mapping):
        raise ParseError("top-level document must be an object")
    return doc


def _matrix_from_document(raw, rows: int, cols: int, where: str) -> RatMatrix:
    if not isinstance(raw, list) or not all(isinstance(r, list) for r in raw):
        raise ParseError(f"{where}: matrix must be a list of rows")
    # zero-dimensional sides: [] for 0 rows, [[], ...] for 0 columns
    if rows == 0 and not raw:
        return RatMatrix.zeros(0, cols)
    if cols == 0 and len(raw) == rows and not any(raw):
        return RatMatrix.zeros(rows, 0)
    m = RatMatrix.from_rows(raw)
    if m.shape != (rows, cols):
        raise ShapeMismatch(f"{where}: matrix is {m.rows}x{m.cols}, expected {rows}x{cols}")
    return m


def load_diagram(doc) -> FinitaryDiagram:
    """Read a diagram from JSON text or an already-parsed mapping.

    Format::

        {"objects": [{"id": "0", "dim": 1}, ...],
         "edges":   [{"src": "0", "dst": "1", "matrix": [[1], [0]]}, ...]}

    Each edge matrix has ``dim(dst)`` rows and ``dim(src)`` columns; entries
    are integers or ``"p/q"`` strings.
    """
    doc = _as_document(doc)
    try:
        raw_objects = doc["objects"]
    except KeyError:
        raise ParseError("missing 'objects'") from None
    raw_edges = doc.get("edges", [])
    if not isinstance(raw_objects, list) or not isinstance(raw_edges, list):
        raise ParseError("'objects' and 'edges' must be lists")
    objects = []
    for o in raw_objects:
        if not isinstance(o, Mapping) or "id" not in o or "dim" not in o:
            raise ParseError(f"object entry {o!r} needs 'id' and 'dim'")
        if not isinstance(o["id"], str):
            raise ParseError(f"object id {o['id']!r} must be a string")
        objects.append((o["id"], o["dim"]))
    dims = {}
    for oid, n in objects:
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise ParseError(f"dimension of {oid!r} must be a non-negative integer")
        dims[oid] = n
    edges = []
    for e in raw_edges:
        if not isinstance(e, Mapping) or not {"src", "dst", "matrix"} <= set(e):
            raise ParseError(f"edge entry {e!r} needs 'src', 'dst' and 'matrix'")
        src, dst = e["src"], e["dst"]
        if src not in dims or dst not in dims:
            raise ParseError(f"edge {src!r} -> {dst!r} mentions an unknown object")
        m = _matrix_from_document(e["matrix"], dims[dst], dims[src], f"edge {src!r} -> {dst!r}")
        edges.append((src, dst, m))
    return FinitaryDiagram.from_edges(objects, edges)


# -- bisimulation witnesses -------------------------------------------------


@dataclass(frozen=True)
class Triple:
    c: str
    matrix: RatMatrix | None
    d: str


@dataclass(frozen=True)
class BisimWitness:
    """A finite family of triples ``(c, M, d)`` with ``M: F(c) -> G(d)``.

    Duplicated ``(c, d)`` pairs with different matrices are allowed.  The
    matrix is ``None`` for word-valued diagrams, where the only isomorphism
    is the identity.
    """

    triples: tuple[Triple, ...] = field(default_factory=tuple)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples)

    def __len__(self) -> int:
        return len(self.triples)

    def swapped(self) -> BisimWitness:
        """Witness for the reversed pair ``(G, F)``: swap sides and invert each matrix."""
        return BisimWitness(
            tuple(
                Triple(t.d, None if t.matrix is None else t.matrix.inverse(), t.c)
                for t in self.triples
            )
        )

    def to_document(self) -> dict:
        return {
            "triples": [
                {"c": t.c, "d": t.d}
                | ({} if t.matrix is None else {"matrix": t.matrix.to_document()})
                for t in self.triples
            ]
        }


def load_witness(doc, F: FinitaryDiagram, G: FinitaryDiagram) -> BisimWitness:
    """Read ``{"triples": [{"c", "d", "matrix"}, ...]}``; shapes come from the diagrams."""
    doc = _as_document(doc)
    raw = doc.get("triples")
    if not isinstance(raw, list):
        raise ParseError("missing 'triples' list")
    triples = []
    for t in raw:
        if not isinstance(t, Mapping) or not {"c", "d", "matrix"} <= set(t):
            raise ParseError(f"triple {t!r} needs 'c', 'd' and 'matrix'")
        c, d = t["c"], t["d"]
        if c not in F.poset:
            raise ObjectNotFound(f"witness mentions unknown object {c!r} of the first diagram")
        if d not in G.poset:
            raise ObjectNotFound(f"witness mentions unknown object {d!r} of the second diagram")
        m = _matrix_from_document(t["matrix"], G.dim(d), F.dim(c), f"triple ({c!r}, {d!r})")
        triples.append(Triple(c, m, d))
    return BisimWitness(tuple(triples))


def bisimulation_defects(
    F: FinitaryDiagram, G: FinitaryDiagram, W: BisimWitness, *, limit: int | None = None
) -> list[str]:
    """Human-readable reasons why ``W`` is not a bisimulation; empty if it is one."""
    defects: list[str] = []

    def report(msg: str) -> bool:
        defects.append(msg)
        return limit is not None and len(defects) >= limit

    triples = list(W)
    for t in triples:
        if t.c not in F.poset or t.d not in G.poset:
            raise ShapeMismatch(f"triple ({t.c!r}, {t.d!r}) mentions an unknown object")
        if t.matrix is None or t.matrix.shape != (G.dim(t.d), F.dim(t.c)):
            raise ShapeMismatch(
                f"triple ({t.c!r}, {t.d!r}) needs a {G.dim(t.d)}x{F.dim(t.c)} matrix"
            )
    by_c: dict[str, list[Triple]] = {}
    by_d: dict[str, list[Triple]] = {}
    for t in triples:
        by_c.setdefault(t.c, []).append(t)
        by_d.setdefault(t.d, []).append(t)

    for t in triples:
        if not t.matrix.is_square or det(t.matrix) == 0:
            if report(f"matrix of ({t.c!r}, {t.d!r}) is not invertible"):
                return defects
    for t in triples:
        for c2 in F.poset.strict_up(t.c):
            lhs_src = F.mat(t.c, c2)
            ok = any(
                G.poset.leq(t.d, u.d) and u.matrix @ lhs_src == G.mat(t.d, u.d) @ t.matrix
                for u in by_c.get(c2, ())
            )
            if not ok and report(f"({t.c!r}, {t.d!r}): extension to {c2!r} is not matched"):
                return defects
        for d2 in G.poset.strict_up(t.d):
            rhs = G.mat(t.d, d2) @ t.matrix
            ok = any(
                F.poset.leq(t.c, u.c) and u.matrix @ F.mat(t.c, u.c) == rhs
                for u in by_d.get(d2, ())
            )
            if not ok and report(f"({t.c!r}, {t.d!r}): extension to {d2!r} is not matched"):
                return defects
    for c in F.objects:
        if c not in by_c and report(f"object {c!r} of the first diagram is not covered"):
            return defects
    for d in G.objects:
        if d not in by_d and report(f"object {d!r} of the second diagram is not covered"):
            return defects
    return defects


def verify_bisimulation(F: FinitaryDiagram, G: FinitaryDiagram, W: BisimWitness) -> bool:
    """Exact check of the four bisimulation conditions plus invertibility."""
    return not bisimulation_defects(F, G, W, limit=1)
