import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diagbisim import etim
from diagbisim.errors import DiagBisimError, GridTooLarge, ShapeMismatch
from diagbisim.etim import (
    Auto,
    Deterministic,
    EtimFormula,
    MatrixVar,
    Predicate,
    Randomized,
    Sat,
    Unknown,
    Unsat,
    assemble,
    components,
    decide,
    export_smt,
    forced_singular,
    load_etim,
    prune_unused,
    satisfies,
)
from diagbisim.matrix import RatMatrix, rank

from conftest import data_path, etim_file
from oracles import random_formula, random_matrix

M = RatMatrix.from_rows
EXACT = Deterministic(force=True)
GRID = Deterministic(force=True, strategy="grid")
PIT_ONLY = Deterministic(force=True, rank_shortcut=False)


def single(A, B):
    n, m = A.rows, A.cols
    return EtimFormula.build([("X", m), ("Y", n)], [(A, "X", "Y", B)])


def test_prune_unused_drops_free_variables():
    phi = EtimFormula.build([("X", 1), ("U", 3), ("Y", 1)], [(M([[2]]), "X", "Y", M([[1]]))])
    reduced, pruned = prune_unused(phi)
    assert pruned == ["U"]
    assert [v.name for v in reduced.vars] == ["X", "Y"]
    v = decide(phi)
    assert isinstance(v, Sat) and v.witness["U"] == RatMatrix.identity(3)


def test_assemble_scalar_case():
    # 2x = 3y has the one-dimensional solution space spanned by (3, 2)
    space = assemble(EtimFormula.build([("X", 1), ("Y", 1)], [(M([[2]]), "X", "Y", M([[3]]))]))
    assert space.N == 2 and space.p == 1
    assert [list(v) for v in space.basis] == [[3, 2]]


def test_components_split_disjoint_variables():
    phi = EtimFormula.build(
        [("A", 1), ("B", 1), ("C", 2), ("D", 2), ("E", 1)],
        [(M([[1]]), "A", "B", M([[1]])), (RatMatrix.identity(2), "C", "D", RatMatrix.identity(2))],
    )
    parts = components(phi)
    assert [[v.name for v in p.vars] for p in parts] == [["A", "B"], ["C", "D"], ["E"]]
    assert [len(p.preds) for p in parts] == [1, 1, 0]


def test_worked_formula_is_sat_in_every_mode():
    phi = etim_file("worked")
    for mode in (EXACT, GRID, Randomized(seed=1), Auto()):
        v = decide(phi, mode)
        assert isinstance(v, Sat)
        assert satisfies(phi, v.witness)
        assert all(isinstance(x, Fraction) for m in v.witness.values() for x in m.entries)


def test_h_formula_is_unsat():
    phi = etim_file("h")
    for mode in (EXACT, GRID, Randomized(seed=3), Auto()):
        assert isinstance(decide(phi, mode), Unsat)


def test_h_contradiction_by_hand():
    # X2 = [[x, y], [0, z]] from the first predicate with x = X1; the second
    # forces x + 0 = 0 and so X1 = 0.  The solution space agrees.
    space = assemble(etim_file("h"))
    assert forced_singular(etim_file("h"), space)


def test_empty_and_zero_dimensional_formulas():
    assert isinstance(decide(EtimFormula(())), Sat)
    phi = EtimFormula.build([("Z", 0), ("W", 0)], [(RatMatrix(0, 0), "Z", "W", RatMatrix(0, 0))])
    v = decide(phi)
    assert isinstance(v, Sat) and v.witness["Z"].shape == (0, 0)


def test_grid_limit_requires_force():
    phi = etim_file("worked")
    with pytest.raises(GridTooLarge):
        decide(phi, Deterministic(grid_limit=1, strategy="grid"))
    with pytest.raises(GridTooLarge):
        decide(phi, Deterministic(grid_limit=1))
    assert isinstance(decide(phi, Deterministic(grid_limit=1, force=True)), Sat)


def test_auto_falls_back_to_sampling():
    phi = etim_file("worked")
    assert isinstance(decide(phi, Auto(seed=4, grid_limit=1)), Sat)
    assert isinstance(decide(phi, Randomized(seed=4, trials=0)), Unknown)


def test_shape_validation():
    with pytest.raises(ShapeMismatch):
        EtimFormula.build([("X", 2), ("Y", 1)], [(M([[1]]), "X", "Y", M([[1]]))])
    with pytest.raises(DiagBisimError):
        load_etim({"vars": [{"name": "X", "n": 1}], "preds": [{"A": [[1]], "i": "X", "k": "Q", "B": [[1]]}]})
    with pytest.raises(DiagBisimError):
        load_etim({"vars": [{"name": "1bad", "n": 1}], "preds": []})


def test_file_round_trip():
    phi = etim_file("worked")
    assert load_etim(json.dumps(phi.to_document())) == phi


@settings(max_examples=120, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.randoms(use_true_random=False))
def test_rank_criterion(n, m, rnd):
    A = RatMatrix(n, m, [rnd.randint(-2, 2) for _ in range(n * m)])
    B = RatMatrix(n, m, [rnd.randint(-2, 2) for _ in range(n * m)])
    expected = rank(A) == rank(B)
    assert isinstance(decide(single(A, B), PIT_ONLY), Sat) == expected
    assert isinstance(decide(single(A, B), EXACT), Sat) == expected


def test_strategies_agree_on_random_formulas():
    rng = random.Random(21)
    for _ in range(150):
        phi = random_formula(rng)
        verdicts = {type(decide(phi, mode)) for mode in (EXACT, GRID, PIT_ONLY)}
        assert len(verdicts) == 1
        rv = decide(phi, Randomized(seed=rng.randrange(2**32)))
        assert type(rv) in verdicts or isinstance(rv, Unknown)


def test_decide_invariant_under_permutation_and_renaming():
    rng = random.Random(7)
    for _ in range(80):
        phi = random_formula(rng, k_max=4, preds_max=4)
        base = isinstance(decide(phi, EXACT), Sat)
        preds = list(phi.preds)
        rng.shuffle(preds)
        order = list(range(len(phi.vars)))
        rng.shuffle(order)
        where = {old: new for new, old in enumerate(order)}
        renamed = EtimFormula(
            tuple(MatrixVar(f"R{j}_{phi.vars[old].name}", phi.vars[old].n) for j, old in enumerate(order)),
            tuple(Predicate(p.A, where[p.i], where[p.k], p.B) for p in preds),
        )
        assert isinstance(decide(renamed, EXACT), Sat) == base


def test_witnesses_verify_exactly():
    rng = random.Random(99)
    seen = 0
    for _ in range(120):
        phi = random_formula(rng, k_max=4, n_max=3, preds_max=4)
        v = decide(phi, EXACT)
        if isinstance(v, Sat):
            seen += 1
            assert satisfies(phi, v.witness)
            for p in phi.preds:
                lhs = p.A @ v.witness[phi.vars[p.i].name]
                rhs = v.witness[phi.vars[p.k].name] @ p.B
                assert (lhs - rhs).is_zero()
    assert seen > 20


APPENDIX_SMT = """\
(set-logic QF_NRA)
(declare-const x_X1_1_1 Real)
(declare-const x_X1_1_2 Real)
(declare-const x_X1_2_1 Real)
(declare-const x_X1_2_2 Real)
(declare-const x_X2_1_1 Real)
(declare-const y_X1_1_1 Real)
(declare-const y_X1_1_2 Real)
(declare-const y_X1_2_1 Real)
(declare-const y_X1_2_2 Real)
(declare-const y_X2_1_1 Real)
(assert (= (+ (* 1 x_X1_1_1) (* 2 x_X1_2_1)) (* 3 x_X2_1_1)))
(assert (= (+ (* 1 x_X1_1_2) (* 2 x_X1_2_2)) (* 4 x_X2_1_1)))
(assert (= (+ (* x_X1_1_1 y_X1_1_1) (* x_X1_1_2 y_X1_2_1)) 1))
(assert (= (+ (* x_X1_1_1 y_X1_1_2) (* x_X1_1_2 y_X1_2_2)) 0))
(assert (= (+ (* x_X1_2_1 y_X1_1_1) (* x_X1_2_2 y_X1_2_1)) 0))
(assert (= (+ (* x_X1_2_1 y_X1_1_2) (* x_X1_2_2 y_X1_2_2)) 1))
(assert (= (+ (* y_X1_1_1 x_X1_1_1) (* y_X1_1_2 x_X1_2_1)) 1))
(assert (= (+ (* y_X1_1_1 x_X1_1_2) (* y_X1_1_2 x_X1_2_2)) 0))
(assert (= (+ (* y_X1_2_1 x_X1_1_1) (* y_X1_2_2 x_X1_2_1)) 0))
(assert (= (+ (* y_X1_2_1 x_X1_1_2) (* y_X1_2_2 x_X1_2_2)) 1))
(assert (= (* x_X2_1_1 y_X2_1_1) 1))
(assert (= (* y_X2_1_1 x_X2_1_1) 1))
(check-sat)
"""


def test_smt_export_matches_hand_expansion():
    # (1 2) . X1 = X2 . (3 4) with X1 2x2 and X2 1x1, expanded by hand
    assert export_smt(etim_file("appendix")) == APPENDIX_SMT


def test_smt_export_prunes_and_formats_rationals():
    phi = EtimFormula.build([("X", 1), ("U", 1), ("Y", 1)], [(M([["-1/2"]]), "X", "Y", M([[3]]))])
    text = export_smt(phi)
    assert "U" not in text
    assert "(* (/ (- 1) 2) x_X_1_1)" in text
    assert text.count("(assert") == 1 + 2 + 2
    assert export_smt(phi) == text


def test_data_files_exist():
    for name in ("worked", "h", "appendix"):
        assert data_path(f"{name}.etim.json").exists()
