"""
Invertible matrix formulas
==========================

Conjunctions of equations ``A . X = X' . B`` over invertible unknowns are
decided exactly.  The linear equations cut out a subspace and the question
becomes whether a product of determinants vanishes on all of it.
"""

from pathlib import Path

from diagbisim import Deterministic, EtimFormula, RatMatrix, Randomized, assemble, decide, export_smt, load_etim

DATA = Path(__file__).parent / "data"

###############################################################################
# The system produced by the bisimulation search has 8 unknowns.
worked = load_etim((DATA / "worked.etim.json").read_text())
print(worked)
space = assemble(worked)
print("free parameters:", space.p)
v = decide(worked, Deterministic(force=True))
print(v.status)
for name, m in v.witness.items():
    print(" ", name, m)

###############################################################################
# The system from H forces X1 = 0 on the whole solution space.
h = load_etim((DATA / "h.etim.json").read_text())
print(decide(h).status)

###############################################################################
# Sampling is cheaper on large systems and never claims SAT without a witness.
print(decide(worked, Randomized(seed=7, trials=8)).status)

###############################################################################
# A single equation is satisfiable exactly when both sides have equal rank.
A = RatMatrix.from_rows([[1, 2], [2, 4]])
for B in (RatMatrix.from_rows([[0, 1], [0, 0]]), RatMatrix.identity(2)):
    phi = EtimFormula.build([("X", 2), ("Y", 2)], [(A, "X", "Y", B)])
    print(B, decide(phi).status)

###############################################################################
# The same question in real arithmetic, for an external solver.
print(export_smt(load_etim((DATA / "appendix.etim.json").read_text())))
