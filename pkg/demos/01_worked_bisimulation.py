"""
Bisimilarity of two small diagrams
==================================

Two diagrams over different posets turn out to be bisimilar, while a third
one that differs in a single matrix is not.  The search produces a witness
and an independent verifier checks it.
"""

from pathlib import Path

from diagbisim import check_bisimilar, iter_branches, load_diagram, verify_bisimulation

DATA = Path(__file__).parent / "data"
F = load_diagram((DATA / "F.json").read_text())
G = load_diagram((DATA / "G.json").read_text())
H = load_diagram((DATA / "H.json").read_text())

###############################################################################
# F is a chain 0 < 1 < 2 with dimensions 1, 2, 1.  G is a four-element chain.
for D in (F, G):
    print(D, [D.dim(c) for c in D.objects])

###############################################################################
# Search for a bisimulation.  Each triple pairs an object of F with one of G
# through an invertible matrix.
verdict = check_bisimilar(F, G)
print(verdict.status)
for t in verdict.witness:
    print(f"  {t.c} ~ {t.d} via {t.matrix}")
print("verified:", verify_bisimulation(F, G, verdict.witness))

###############################################################################
# The search tree can be inspected.  Here the very first complete branch in
# depth-first order is already satisfiable, so its system is the one behind
# the verdict above.
first = next(iter_branches(F, G))
print(first.formula())
print(first.formula() == verdict.formula)

###############################################################################
# H only changes the last map of F, and that is enough to break bisimilarity.
print("F vs H:", check_bisimilar(F, H).status)
