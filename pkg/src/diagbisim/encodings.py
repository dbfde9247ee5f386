"""Labelled transition systems as word-valued diagrams.

A run of a transition system is a sequence of transitions starting at the
initial state.  Runs ordered by prefix form a finite tree when the
reachable part is acyclic, and labelling every run with its word of
actions gives a diagram with values in words.  The only isomorphisms
between words are identities, so bisimulations of such diagrams reduce to
matching runs with equal words; :func:`word_kernel` plugs that into the
generic search of :mod:`diagbisim.bisim`.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterable

from .diagram import BisimWitness, FinitePoset
from .errors import CyclicLts, ObjectNotFound, ParseError

__all__ = [
    "Lts",
    "WordDiagram",
    "WordKernel",
    "load_lts",
    "encode_lts",
    "lts_bisimilar",
    "word_kernel",
    "verify_word_bisimulation",
]


@dataclass(frozen=True)
class Lts:
    states: tuple[str, ...]
    init: str
    transitions: tuple[tuple[str, str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", tuple(dict.fromkeys(tuple(t) for t in self.transitions)))
        known = set(self.states)
        if len(known) != len(self.states):
            raise ParseError("duplicate state")
        if self.init not in known:
            raise ObjectNotFound(f"initial state {self.init!r} is not a state")
        for src, _, dst in self.transitions:
            if src not in known or dst not in known:
                raise ObjectNotFound(f"transition {src!r} -> {dst!r} mentions an unknown state")

    def successors(self, q: str) -> list[tuple[str, str]]:
        return [(a, dst) for src, a, dst in self.transitions if src == q]

    def to_document(self) -> dict:
        return {
            "states": list(self.states),
            "init": self.init,
            "transitions": [{"src": s, "label": a, "dst": d} for s, a, d in self.transitions],
        }


def load_lts(doc) -> Lts:
    """Read ``{"states": [...], "init": q, "transitions": [{"src", "label", "dst"}]}``."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.pos) from None
    if not isinstance(doc, Mapping) or not {"states", "init"} <= set(doc):
        raise ParseError("LTS document needs 'states' and 'init'")
    trans = []
    for t in doc.get("transitions", []):
        if not isinstance(t, Mapping) or not {"src", "label", "dst"} <= set(t):
            raise ParseError(f"transition {t!r} needs 'src', 'label' and 'dst'")
        trans.append((str(t["src"]), str(t["label"]), str(t["dst"])))
    return Lts(tuple(str(s) for s in doc["states"]), str(doc["init"]), tuple(trans))


@dataclass(frozen=True)
class WordDiagram:
    """Runs ordered by prefix, each labelled with its word of actions."""

    poset: FinitePoset
    words: Mapping[str, tuple[str, ...]]
    runs: Mapping[str, tuple[tuple[str, str, str], ...]]

    @property
    def objects(self) -> tuple[str, ...]:
        return self.poset.elements

    def word(self, run_id: str) -> tuple[str, ...]:
        try:
            return self.words[run_id]
        except KeyError:
            raise ObjectNotFound(f"unknown run {run_id!r}") from None

    def to_document(self) -> dict:
        return {
            "objects": [{"id": r, "word": list(self.words[r])} for r in self.objects],
            "edges": [{"src": a, "dst": b} for a, b in self.poset.hasse_edges],
        }


def _run_id(init: str, run: Iterable[tuple[str, str, str]]) -> str:
    return init + "".join(f" -{a}-> {dst}" for _, a, dst in run)


def encode_lts(T: Lts) -> WordDiagram:
    """All runs from the initial state, the empty one included."""
    ids: list[str] = []
    words: dict[str, tuple[str, ...]] = {}
    runs: dict[str, tuple] = {}
    edges: list[tuple[str, str]] = []

    def visit(q: str, run: tuple, on_path: frozenset) -> None:
        rid = _run_id(T.init, run)
        ids.append(rid)
        runs[rid] = run
        words[rid] = tuple(a for _, a, _ in run)
        for a, dst in T.successors(q):
            if dst in on_path:
                raise CyclicLts(f"cycle through state {dst!r}")
            step = run + ((q, a, dst),)
            edges.append((rid, _run_id(T.init, step)))
            visit(dst, step, on_path | {dst})

    visit(T.init, (), frozenset([T.init]))
    return WordDiagram(FinitePoset.from_edges(ids, edges), words, runs)


def lts_bisimilar(T: Lts, S: Lts) -> bool:
    """Strong bisimilarity of the initial states by partition refinement."""
    states = [("T", q) for q in T.states] + [("S", q) for q in S.states]
    succ = {("T", q): [(a, ("T", d)) for a, d in T.successors(q)] for q in T.states}
    succ.update({("S", q): [(a, ("S", d)) for a, d in S.successors(q)] for q in S.states})
    block = {s: 0 for s in states}
    while True:
        sigs = {s: (block[s], frozenset((a, block[d]) for a, d in succ[s])) for s in states}
        ids: dict = {}
        new = {s: ids.setdefault(sigs[s], len(ids)) for s in states}
        if len(ids) == len(set(block.values())):
            break
        block = new
    return block[("T", T.init)] == block[("S", S.init)]


class WordKernel:
    """Runs match iff their words are equal; extensions emit no constraint."""

    constraint_free = True

    def compatible(self, F: WordDiagram, c: str, G: WordDiagram, d: str) -> bool:
        return F.word(c) == G.word(d)

    def size(self, F, c) -> int:
        return 0

    def equation(self, F, c, c2, G, d, d2):
        return None

    def verify(self, F, G, witness: BisimWitness) -> bool:
        return verify_word_bisimulation(F, G, witness)

    def __repr__(self) -> str:
        return "WordKernel()"


def word_kernel() -> WordKernel:
    return WordKernel()


def verify_word_bisimulation(F: WordDiagram, G: WordDiagram, W: BisimWitness) -> bool:
    """The four bisimulation conditions with identities as the only isomorphisms."""
    pairs = {(t.c, t.d) for t in W}
    for c, d in pairs:
        if c not in F.poset or d not in G.poset:
            raise ObjectNotFound(f"witness pair ({c!r}, {d!r}) mentions an unknown run")
        if F.word(c) != G.word(d):
            return False
    for c, d in pairs:
        for c2 in F.poset.strict_up(c):
            if not any((c2, d2) in pairs for d2 in G.poset.up(d)):
                return False
        for d2 in G.poset.strict_up(d):
            if not any((c2, d2) in pairs for c2 in F.poset.up(c)):
                return False
    return {c for c, _ in pairs} == set(F.objects) and {d for _, d in pairs} == set(G.objects)
