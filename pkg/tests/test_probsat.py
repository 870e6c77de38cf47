from fractions import Fraction as F

import pytest
from hypothesis import given

from conftest import M, P, rng_of, seeds
from eapr.generate import random_event, random_prob
from eapr.oracle import Bounds, oracle_sat_prob
from eapr.probsat import entails_fb, sat_fb, sat_fb_global, sat_fb_pathlocal, valid_fb
from eapr.semantics import Frame, SIModel, eval_prob
from eapr.syntax.formula import CNeg, FNeg, PrAtom, const, delta, diamond, iff, odot_all, pratoms


def pinned(*pairs):
    return odot_all([iff(P(a), const(q)) for a, q in pairs])


def check_model(f, r):
    m = r.model
    assert eval_prob(f, m, r.world) == 1
    for masses in m.mu.values():
        assert sum(masses.values()) == 1


def test_named_satisfiable():
    for text in ["Pr_A([a]p)", "Pr_A([a]p) -> Pr_A([b]p)", "[a](Pr_A(p) -> Pr_A(p))"]:
        r = sat_fb_global(P(text))
        assert r.status == "SAT"
        check_model(P(text), r)


@pytest.mark.parametrize("text", [
    "Pr_A(p & q) -> Pr_A(p)",
    "D<a>Pr_A(p) -> <a>DPr_A(p)",
    "Pr_A(~p) -> !Pr_A(p)",
    "!Pr_A(p) -> Pr_A(~p)",
    "Pr_A(K_A p) -> Pr_A(p)",
])
@pytest.mark.parametrize("mode", ["global", "pathlocal"])
def test_named_valid(text, mode):
    assert valid_fb(P(text), mode).status == "PROVED"


def test_countermodel_is_real():
    f = P("Pr_A(p) -> Pr_A(p & q)")
    r = valid_fb(f)
    assert r.status == "COUNTERMODEL" and eval_prob(f, r.model, r.world) < 1


def test_coherence_examples():
    assert sat_fb_global(pinned(("Pr_A(p)", F(1, 2)))).status == "SAT"
    assert sat_fb_global(pinned(("Pr_A(p)", F(3, 10)), ("Pr_A(K_A p)", F(1, 2)))).status == "UNSAT"
    assert sat_fb_global(pinned(("Pr_A(p)", F(1, 3)), ("Pr_A(~p)", F(1, 2)))).status == "UNSAT"
    r = sat_fb_global(pinned(("Pr_A(p)", F(1, 3)), ("Pr_A(~p)", F(2, 3))))
    assert r.status == "SAT"


def test_contradiction_at_successor():
    assert sat_fb_global(P("[a]Pr_A(p) (.) <a>!Pr_A(p)")).status == "UNSAT"


def test_entailments():
    assert entails_fb([P("Pr_A(p)")], P("Pr_A(p)")).status == "PROVED"
    chi = M("!!((p -> !p) -> !p)")
    assert entails_fb([M("q"), M("!!!((p -> !p) -> !p)")], const(0)).status == "PROVED"
    assert entails_fb([M("q")], chi).status == "COUNTERMODEL"


def test_sparse_support_bound():
    f = odot_all([
        pinned(("Pr_A(p)", F(1, 2)), ("Pr_A(q)", F(1, 3)), ("Pr_A(p & q)", F(1, 5))),
        diamond("a", pinned(("Pr_A(p)", F(1, 7)))),
    ])
    r = sat_fb_global(f, sparse=True)
    assert r.status == "SAT"
    check_model(f, r)
    atoms = {a.event for a in pratoms(f)}
    for masses in r.model.mu.values():
        assert len(masses) <= len(atoms) + 1


def test_unreachable_world_keeps_value():
    f = P("<a>Pr_A(p) (.) K_B Pr_A(q)")
    r = sat_fb_global(f)
    m = r.model
    extra = "unreachable"
    fr = Frame(m.outer.worlds + [extra], {a: [set(c) for c in cs] + [{extra}] for a, cs in m.outer.epistemic.items()},
               dict(m.outer.actions))
    mu = dict(m.mu)
    for a in {a for (_, a) in m.mu}:
        mu[extra, a] = next(iter(v for (w, b), v in m.mu.items() if b == a))
    assert eval_prob(f, SIModel(fr, m.inner, mu), r.world) == 1


@given(seeds)
def test_global_and_pathlocal_agree(seed):
    f = random_prob(rng_of(seed), 6, 2, 1, agents=("A", "B"), actions=("a", "b"))
    g, p = sat_fb(f, "global"), sat_fb(f, "pathlocal")
    assert g.status == p.status
    for r in (g, p):
        if r.status == "SAT":
            check_model(f, r)


@given(seeds)
def test_witness_coherence(seed):
    rng = rng_of(seed)
    f = random_prob(rng, 6, 1, 2, agents=("A", "B"))
    r = sat_fb_global(f)
    if r.status != "SAT":
        return
    check_model(f, r)
    alpha = random_event(rng, 2)
    for w in r.model.outer.worlds:
        for a in {a for (_, a) in r.model.mu}:
            assert eval_prob(PrAtom(a, alpha), r.model, w) + eval_prob(PrAtom(a, CNeg(alpha)), r.model, w) == 1


@given(seeds)
def test_oracle_witness_implies_sat(seed):
    f = random_prob(rng_of(seed), 5, 1, 1)
    if oracle_sat_prob(f, Bounds(1, 2, 2)).sat:
        assert sat_fb_global(f).status == "SAT"


def test_negated_delta_of_valid_has_no_grid_model():
    f = FNeg(delta(P("D<a>Pr_A(p) -> <a>DPr_A(p)")))
    assert sat_fb_pathlocal(f).status == "UNSAT"
    assert not oracle_sat_prob(f, Bounds(2, 2, 2)).sat
