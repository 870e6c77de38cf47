from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import E, M, P, rng_of, seeds
from eapr.generate import random_event, random_mod, random_prob
from eapr.semantics import Frame, ModModel, eval_mod
from eapr.syntax import ParseError, classify, classify_theory, closure_neg, desugar, parse, size, to_text
from eapr.syntax.classify import epr_rule_clause
from eapr.syntax.formula import (
    HALF, Box, CNeg, Const, FNeg, Knows, LImp, PrAtom, Prod, Var, const, delta, odot, oplus,
    rational,
)

GRID = [Fraction(k, 4) for k in range(5)]


def test_parse_examples():
    assert P("Pr_A([a]p) -> Pr_A([b]p)") == LImp(PrAtom("A", Box("a", Var("p"))), PrAtom("A", Box("b", Var("p"))))
    assert parse("1/2") == HALF
    with pytest.raises(ParseError) as e:
        P("Pr_A(p")
    assert e.value.offset == 7


def test_desugar_shapes():
    p, q = Var("p"), Var("q")
    assert desugar("oplus", p, q) == LImp(FNeg(p), q)
    assert desugar("one") == LImp(HALF, HALF)
    assert rational(Fraction(3, 4)) == oplus(HALF, Prod(HALF, HALF))
    with pytest.raises(ValueError):
        rational(Fraction(1, 3))


def test_const_normalization():
    assert const(Fraction(1, 2)) is HALF
    with pytest.raises(ValueError):
        Const(Fraction(3, 2))


def _value(f, a, b):
    fr = Frame([0], {}, {})
    return eval_mod(f, ModModel(fr, {("p", 0): a, ("q", 0): b}), 0)


@pytest.mark.parametrize("a", GRID)
@pytest.mark.parametrize("b", GRID)
def test_derived_connective_tables(a, b):
    p, q = Var("p"), Var("q")
    assert _value(oplus(p, q), a, b) == min(1, a + b)
    assert _value(odot(p, q), a, b) == max(0, a + b - 1)
    assert _value(delta(p), a, b) == (1 if a == 1 else 0)
    assert _value(desugar("zero"), a, b) == 0


@pytest.mark.parametrize("q", [Fraction(k, 8) for k in range(9)])
def test_rational_expansion_value(q):
    assert _value(rational(q), 0, 0) == q


def test_closure_neg():
    p = Var("p")
    assert closure_neg(p) == {p, CNeg(p)}
    assert closure_neg(E("K_A p")) == {E("K_A p"), p, CNeg(E("K_A p")), CNeg(p)}
    # four subformulas and their four negations
    assert len(closure_neg(E("[a](p & q)"))) == 8


def test_size_counts_annotations():
    assert size(Var("p")) == 1
    assert size(Knows("A", Var("p"))) == 3
    assert size(P("Pr_A(p) -> 1/2")) == 5


@given(seeds)
def test_roundtrip_event(seed):
    f = random_event(rng_of(seed), 3)
    assert parse(to_text(f), "event") == f


@given(seeds)
def test_roundtrip_mod(seed):
    f = random_mod(rng_of(seed), 9, 3, agents=("A", "B"), actions=("a", "b"), product=True)
    assert parse(to_text(f), "mod") == f


@given(seeds)
def test_roundtrip_prob(seed):
    f = random_prob(rng_of(seed), 7, 2, 2, agents=("A", "B"), actions=("a", "b"), product=True)
    assert parse(to_text(f), "prob") == f


@pytest.mark.parametrize("text,tag", [
    ("<a>!Pr_A(p)", "UPR_rule"),
    ("[a]Pr_A(p) -> c(0)", "UPR_rule"),
    ("<a>!Pr_A(p) -> Kd_A Pr_B(q)", "none"),
    ("Pr_A(p)", "UPL_set_member"),
    ("[a]K_B Pr_A(<a>p)", "UPL_box"),
    ("Kd_A Pr_A(p)", "UPL_diamond"),
    ("Pr_A(p) * Pr_A(q)", "none"),
])
def test_classify_examples(text, tag):
    assert classify(P(text)).tag == tag


@pytest.mark.parametrize("text,tag", [("[a]p", "UML_box"), ("<a>~p", "UML_diamond"), ("K_A <a>p", "none")])
def test_classify_event_literals(text, tag):
    assert classify(M(text) if "~" not in text else E(text)).tag == tag


def test_negative_head_rule_fits_both_grammars():
    f = P("!Pr_A([a]p) (.) !Pr_B(K_A K_B q) -> c(0)")
    # universal rules are tried first
    assert classify(f).tag == "UPR_rule"
    assert epr_rule_clause(f) is not None


def test_rule_and_sum_forms_classify_alike():
    rule = P("[a]Pr_A(p) (.) K_B Pr_B(q) -> [a]Pr_A(q)")
    clause = P("<a>!Pr_A(p) + Kd_B !Pr_B(q) + [a]Pr_A(q)")
    assert classify(rule) == classify(clause)
    assert classify_theory([rule]) == classify_theory([clause]) == "UPR"


def test_parse_error_types():
    for bad in ["p ->", "Pr_A(p & )", "K_ p", "c(3/2)", "Pr_A(Pr_B(p))"]:
        with pytest.raises(ParseError):
            parse(bad)


@given(st.fractions(min_value=0, max_value=1, max_denominator=12))
def test_const_text_roundtrip(q):
    f = const(q)
    assert parse(to_text(f)) == f
