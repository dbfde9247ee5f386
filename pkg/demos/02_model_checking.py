"""
Model checking a positive path formula
======================================

A formula can tell F and H apart where no bisimulation exists, and by
invariance it cannot tell F and G apart.
"""

from pathlib import Path

from diagbisim import format_formula, load_diagram, model_check_positive, parse_formula

DATA = Path(__file__).parent / "data"
F, G, H = (load_diagram((DATA / f"{n}.json").read_text()) for n in "FGH")

###############################################################################
# Start in dimension 1, extend along a map equivalent to (1 0)^T, then along
# one equivalent to (1 1).
phi = parse_formula("[1]<[1;0]><[1,1]>true")
print(format_formula(phi))

for name, D, c in (("F", F, "0"), ("G", G, "a"), ("H", H, "0")):
    v = model_check_positive(D, c, phi)
    print(f"{name}, {c}: {v.status}")

###############################################################################
# When the formula holds, the verdict carries the changes of basis that
# make each step match.
v = model_check_positive(F, "0", phi)
for var, m in v.witness.items():
    print(var, m)
