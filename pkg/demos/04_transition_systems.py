"""
Transition systems as diagrams
==============================

Runs of an acyclic transition system, ordered by prefix and labelled with
their words, form a diagram.  Bisimilarity of such diagrams agrees with
the classical notion.
"""

from diagbisim import Lts, check_bisimilar, encode_lts, lts_bisimilar, word_kernel

###############################################################################
# a.(b + c) against a.b + a.c: same traces, different branching.
left = Lts(("p", "p1", "p2", "p3"), "p", (("p", "a", "p1"), ("p1", "b", "p2"), ("p1", "c", "p3")))
right = Lts(
    ("q", "q1", "q2", "q3", "q4"),
    "q",
    (("q", "a", "q1"), ("q", "a", "q2"), ("q1", "b", "q3"), ("q2", "c", "q4")),
)

W = encode_lts(right)
for run in W.objects:
    print(repr(run), W.word(run))

###############################################################################
# Both procedures agree that the systems differ.
print("partition refinement:", lts_bisimilar(left, right))
print("diagram search:", check_bisimilar(encode_lts(left), W, word_kernel()).status)

###############################################################################
# Duplicating a branch preserves bisimilarity.
twice = Lts(
    ("r", "r1", "r2", "x", "y", "z", "w"),
    "r",
    (("r", "a", "r1"), ("r", "a", "r2"), ("r1", "b", "x"), ("r1", "c", "y"), ("r2", "b", "z"), ("r2", "c", "w")),
)
print(check_bisimilar(encode_lts(left), encode_lts(twice), word_kernel()).status)
