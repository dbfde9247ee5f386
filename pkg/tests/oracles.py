"""Independent reference implementations and random instance generators.

Nothing here calls the search in ``diagbisim.bisim``; the oracles only rely
on the matrix layer and on ``etim.decide`` for final constraint solving.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from functools import lru_cache

from diagbisim import etim
from diagbisim.diagram import FinitaryDiagram
from diagbisim.encodings import Lts
from diagbisim.errors import NotFunctorial
from diagbisim.matrix import RatMatrix

EXACT = etim.Deterministic(force=True)


# -- linear algebra oracles -----------------------------------------------------


def leibniz_det(rows) -> Fraction:
    n = len(rows)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        term = Fraction(1)
        for r in range(n):
            term *= rows[r][perm[r]]
        total += -term if inversions % 2 else term
    return total


def minor_rank(rows, ncols: int) -> int:
    """Largest k with a nonzero k x k minor."""
    nrows = len(rows)
    for k in range(min(nrows, ncols), 0, -1):
        for rs in itertools.combinations(range(nrows), k):
            for cs in itertools.combinations(range(ncols), k):
                if leibniz_det([[rows[r][c] for c in cs] for r in rs]) != 0:
                    return k
    return 0


# -- random generators ------------------------------------------------------------


def random_matrix(rng: random.Random, rows: int, cols: int, lo: int = -3, hi: int = 3) -> RatMatrix:
    return RatMatrix(rows, cols, [rng.randint(lo, hi) for _ in range(rows * cols)])


def random_invertible(rng: random.Random, n: int, lo: int = -3, hi: int = 3) -> RatMatrix:
    while True:
        m = random_matrix(rng, n, n, lo, hi)
        if m.det() != 0:
            return m


def random_formula(rng: random.Random, k_max: int = 3, n_max: int = 2, preds_max: int = 3) -> etim.EtimFormula:
    k = rng.randint(1, k_max)
    vars_ = [etim.MatrixVar(f"V{j}", rng.randint(1, n_max)) for j in range(k)]
    preds = []
    for _ in range(rng.randint(0, preds_max)):
        i, kk = rng.randrange(k), rng.randrange(k)
        shape = (vars_[kk].n, vars_[i].n)
        preds.append(etim.Predicate(random_matrix(rng, *shape, -1, 1), i, kk, random_matrix(rng, *shape, -1, 1)))
    return etim.EtimFormula(tuple(vars_), tuple(preds))


def planted_formula(rng: random.Random, k_max: int = 4, n_max: int = 3, preds_max: int = 4) -> etim.EtimFormula:
    """Satisfiable by construction: B is chosen as X_k^-1 . A . X_i for hidden invertible X."""
    k = rng.randint(1, k_max)
    sizes = [rng.randint(1, n_max) for _ in range(k)]
    hidden = [random_invertible(rng, n, -2, 2) for n in sizes]
    preds = []
    for _ in range(rng.randint(1, preds_max)):
        i, kk = rng.randrange(k), rng.randrange(k)
        A = random_matrix(rng, sizes[kk], sizes[i], -2, 2)
        preds.append(etim.Predicate(A, i, kk, hidden[kk].inverse() @ A @ hidden[i]))
    return etim.EtimFormula(tuple(etim.MatrixVar(f"P{j}", n) for j, n in enumerate(sizes)), tuple(preds))


def random_diagram(
    rng: random.Random,
    n_objects: int,
    *,
    max_dim: int = 2,
    p_edge: float = 0.45,
    lo: int = -1,
    hi: int = 1,
    zero_dim: float = 0.05,
    prefix: str = "c",
) -> FinitaryDiagram:
    """Random functor on a random DAG; non-commuting diamonds are resampled or dropped."""
    names = [f"{prefix}{j}" for j in range(n_objects)]
    dims = [0 if rng.random() < zero_dim else rng.randint(1, max_dim) for _ in names]
    objects = list(zip(names, dims))
    pairs = [(a, b) for a in range(n_objects) for b in range(a + 1, n_objects) if rng.random() < p_edge]
    edges: list = []
    for a, b in pairs:
        for _ in range(20):
            trial = edges + [(names[a], names[b], random_matrix(rng, dims[b], dims[a], lo, hi))]
            try:
                FinitaryDiagram.from_edges(objects, trial)
            except NotFunctorial:
                continue
            edges = trial
            break
    return FinitaryDiagram.from_edges(objects, edges)


def conjugate(rng: random.Random, F: FinitaryDiagram, prefix: str = "d", *, with_maps: bool = False):
    """An isomorphic copy with fresh names and a random change of basis at every object.

    With ``with_maps`` also returns ``{c: (new name, P_c)}``.
    """
    P = {c: random_invertible(rng, F.dim(c), -2, 2) for c in F.objects}
    rename = {c: f"{prefix}{j}" for j, c in enumerate(F.objects)}
    objects = [(rename[c], F.dim(c)) for c in F.objects]
    edges = [(rename[a], rename[b], P[b] @ F.mat(a, b) @ P[a].inverse()) for a, b in F.poset.hasse_edges]
    E = FinitaryDiagram.from_edges(objects, edges)
    if with_maps:
        return E, {c: (rename[c], P[c]) for c in F.objects}
    return E


def perturb(rng: random.Random, F: FinitaryDiagram) -> FinitaryDiagram:
    """Replace one Hasse edge matrix, keeping the result functorial when possible."""
    hasse = list(F.poset.hasse_edges)
    if not hasse:
        return F
    objects = [(c, F.dim(c)) for c in F.objects]
    for _ in range(20):
        target = rng.choice(hasse)
        edges = [
            (a, b, random_matrix(rng, F.dim(b), F.dim(a), -1, 1) if (a, b) == target else F.mat(a, b))
            for a, b in hasse
        ]
        try:
            return FinitaryDiagram.from_edges(objects, edges)
        except NotFunctorial:
            continue
    return F


def random_pair(rng: random.Random, max_objects: int = 4, max_dim: int = 2):
    """Mixture of isomorphic, perturbed and independent pairs."""
    kind = rng.choice(["iso", "perturbed", "independent"])
    F = random_diagram(rng, rng.randint(1, max_objects), max_dim=max_dim)
    if kind == "iso":
        return F, conjugate(rng, F)
    if kind == "perturbed":
        return F, conjugate(rng, perturb(rng, F))
    return F, random_diagram(rng, rng.randint(1, max_objects), max_dim=max_dim, prefix="d")


def random_acyclic_lts(rng: random.Random, max_states: int = 6, labels: str = "ab", prefix: str = "q") -> Lts:
    """Transitions only go from lower to higher index, so the result is acyclic."""
    n = rng.randint(1, max_states)
    states = [f"{prefix}{j}" for j in range(n)]
    trans = [
        (states[i], a, states[j])
        for i in range(n)
        for j in range(i + 1, n)
        for a in labels
        if rng.random() < 0.3
    ]
    return Lts(tuple(states), states[0], tuple(trans))


def bisimilar_variant(rng: random.Random, T: Lts, prefix: str = "v") -> Lts:
    """Renamed copy of T where one transition target gets a twin with the same moves."""
    name = {q: f"{prefix}{q}" for q in T.states}
    trans = [(name[a], l, name[b]) for a, l, b in T.transitions]
    states = [name[q] for q in T.states]
    if T.transitions:
        src, label, dst = rng.choice(T.transitions)
        twin = f"{prefix}{dst}_twin"
        states.append(twin)
        trans.append((name[src], label, twin))
        trans += [(twin, l, name[b]) for a, l, b in T.transitions if a == dst]
    return Lts(tuple(states), name[T.init], tuple(trans))


# -- bisimilarity by tree unfolding -------------------------------------------------


def brute_force_bisimilar(F: FinitaryDiagram, G: FinitaryDiagram, mode=EXACT) -> bool:
    """Bisimilarity by enumerating every tree-shaped relation skeleton.

    Any bisimulation can be unfolded into, for every object, a finite tree
    of pairs whose children answer every strict extension on either side.
    Each tree node carries its own unknown isomorphism, so the enumeration
    is exhaustive; satisfiability of a tree is decided by ``etim``.  Trees
    for different roots share no unknowns and are solved separately.
    """

    def compatible(c, d):
        return F.dim(c) == G.dim(d)

    @lru_cache(maxsize=None)
    def trees(c: str, d: str) -> tuple:
        """Each tree is a tuple of nodes ``(c, d, parent)`` with node 0 the root."""
        slots = [[(c2, d2) for d2 in G.poset.up(d) if compatible(c2, d2)] for c2 in F.poset.strict_up(c)]
        slots += [[(c2, d2) for c2 in F.poset.up(c) if compatible(c2, d2)] for d2 in G.poset.strict_up(d)]
        out = []
        for children in itertools.product(*slots):
            for subtrees in itertools.product(*(trees(*ch) for ch in children)):
                nodes = [(c, d, None)]
                for sub in subtrees:
                    base = len(nodes)
                    for sc, sd, parent in sub:
                        nodes.append((sc, sd, 0 if parent is None else base + parent))
                out.append(tuple(nodes))
        return tuple(out)

    def satisfiable(tree) -> bool:
        vars_ = [(f"Y{j}", F.dim(c)) for j, (c, _, _) in enumerate(tree)]
        preds = []
        for j, (c2, d2, parent) in enumerate(tree):
            if parent is None:
                continue
            c, d, _ = tree[parent]
            preds.append(etim.Predicate(G.mat(d, d2), parent, j, F.mat(c, c2)))
        phi = etim.EtimFormula(tuple(etim.MatrixVar(n, k) for n, k in vars_), tuple(preds))
        verdict = etim.decide(phi, mode)
        assert not isinstance(verdict, etim.Unknown)
        return isinstance(verdict, etim.Sat)

    @lru_cache(maxsize=None)
    def rooted(c: str, d: str) -> bool:
        return compatible(c, d) and any(satisfiable(t) for t in trees(c, d))

    return all(any(rooted(c, d) for d in G.objects) for c in F.objects) and all(
        any(rooted(c, d) for c in F.objects) for d in G.objects
    )
