from fractions import Fraction as F

import pytest
from hypothesis import given

from conftest import M, rng_of, seeds
from eapr.constraints import Poly, linear_feasible
from eapr.generate import random_mod
from eapr.oracle import Bounds, oracle_sat_mod
from eapr.semantics import eval_mod
from eapr.syntax.formula import HALF, FNeg, Var, delta
from eapr.tableau import (
    GE, LE, branch_system, entails_mod, prove_valid, sat_mod, saturate, start_branch,
)


@pytest.mark.parametrize("text", [
    "p -> p", "K_A p -> p", "D<a>q -> <a>Dq", "[a](p -> q) -> ([a]p -> [a]q)",
    "(p => q) -> (p -> q)", "K_A p -> K_A K_A p", "!K_A p -> K_A !K_A p", "!(p (.) !p)",
])
def test_valid(text):
    assert prove_valid(M(text)).status == "PROVED"


@pytest.mark.parametrize("text", ["p -> K_A p", "(p -> q) -> (p => q)", "<a>p", "p + q"])
def test_countermodels(text):
    r = prove_valid(M(text))
    assert r.status == "COUNTERMODEL"
    assert eval_mod(M(text), r.model, r.world) < 1


def test_two_state_countermodel_for_knowledge():
    r = prove_valid(M("p -> K_A p"))
    (cls,) = [c for c in r.model.frame.epistemic["A"] if 0 in c]
    assert len(cls) == 2


def test_satisfiability_examples():
    assert sat_mod(M("p (.) !p")).status == "UNSAT"
    assert sat_mod(HALF).status == "UNSAT"
    assert sat_mod(FNeg(delta(HALF))).status == "SAT"
    r = sat_mod(M("K_A p (.) K_A p"))
    assert r.status == "SAT" and eval_mod(M("K_A p"), r.model, 0) == 1


def test_box_below_one_needs_no_successor():
    # the body is false everywhere, so only a world without b-successors works
    f = M("!([b]!K_A ((q -> p) * q -> q) => p)")
    r = sat_mod(f)
    assert r.status == "SAT" and not r.model.frame.succ("b", 0)


def test_knowledge_loop_terminates():
    r = sat_mod(M("K_A (K_A (p -> q) -> p)"))
    assert r.status == "SAT"
    assert len(r.model.frame.worlds) <= 3


def test_saturate_closes_valid_start():
    b = start_branch([M("p -> p")], LE, "y")
    b.num("y", "<", 1)
    leaves = saturate(b)
    assert all(not linear_feasible(branch_system(l)).sat for l in leaves)
    b = start_branch([Var("p")], LE, "y")
    b.num("y", "<", 1)
    assert any(linear_feasible(branch_system(l)).sat for l in saturate(b))


def test_branch_system_rows():
    b = start_branch([Var("p")], LE, F(1, 2))
    (row,) = branch_system(b).constraints
    assert (row.expr, row.rel) == (Poly.var("x1") - F(1, 2), "<=")
    b = start_branch([HALF], GE, "P")
    (leaf,) = saturate(b)
    assert any(c.expr == Poly.var("P") - F(1, 2) for c in branch_system(leaf).constraints)


def test_trace_is_stable():
    f = M("D<a>q -> <a>Dq")
    a = prove_valid(f, trace=True).trace
    b = prove_valid(f, trace=True).trace
    assert a == b and a and all(line.startswith("(") for line in a)


def test_entailment_direct():
    assert entails_mod([M("p"), M("p -> q")], M("q")).status == "PROVED"
    assert entails_mod([M("q")], M("!!((p -> !p) -> !p)")).status == "COUNTERMODEL"


def test_budget_reports_unknown():
    r = sat_mod(M("K_A (p -> [a](q -> K_A p)) (.) <a>!q"), budget=2)
    assert r.status == "UNKNOWN" and r.note == "budget"


@given(seeds)
def test_sat_answers_are_models(seed):
    f = random_mod(rng_of(seed), 8, 2, agents=("A", "B"), actions=("a", "b"), product=True)
    r = sat_mod(f)
    if r.status == "SAT":
        assert eval_mod(f, r.model, r.world) == 1


@given(seeds)
def test_oracle_witness_implies_sat(seed):
    f = random_mod(rng_of(seed), 7, 2)
    o = oracle_sat_mod(f, Bounds(2, 1, 2))
    r = sat_mod(f)
    if o.sat:
        assert r.status == "SAT"
    if r.status == "UNSAT":
        assert not o.sat


@given(seeds)
def test_valid_formulas_have_no_grid_countermodel(seed):
    f = random_mod(rng_of(seed), 6, 2)
    if prove_valid(f).status == "PROVED":
        assert not oracle_sat_mod(FNeg(delta(f)), Bounds(2, 1, 2)).sat
