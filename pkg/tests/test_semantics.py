from fractions import Fraction as F

import pytest
from hypothesis import given

from conftest import E, M, P, rng_of, seeds
from eapr.generate import random_event, random_mod, random_mod_model, random_prob, random_si_model
from eapr.semantics import (
    EventModel, Frame, ModelError, ModModel, SIModel, denote, entails_on_model, eval_mod, eval_prob,
    lower_upper, model_from_json, model_to_json, si_to_standard,
)
from eapr.syntax.formula import HALF, Box, CNeg, Knows, LImp, PImp, PrAtom, Prod, Var, delta, zero

AGENTS = ("A", "B")


def point(**v) -> ModModel:
    return ModModel(Frame([0]), {(p, 0): F(q) for p, q in v.items()})


def test_denote_examples():
    m = EventModel([1, 2, 3], {"A": [{1, 2}, {3}]}, {"a": set()}, {"p": {1, 2}})
    assert denote(Var("p"), EventModel([1, 2], {}, {}, {"p": {1}})) == {1}
    assert denote(E("K_A p"), m) == {1, 2}
    assert 1 in denote(E("[a]p"), m)


def test_connective_values():
    m = point(p=F(7, 10), q=F(2, 5), r=F(4, 5))
    assert eval_mod(HALF, m, 0) == F(1, 2)
    assert eval_mod(LImp(Var("p"), Var("q")), m, 0) == F(7, 10)
    assert eval_mod(PImp(Var("r"), Var("q")), m, 0) == F(1, 2)
    assert eval_mod(Prod(HALF, HALF), m, 0) == F(1, 4)


def test_probability_of_half_split():
    inner = EventModel([0, 1], {}, {}, {"p": {0}})
    m = SIModel(Frame([0]), inner, {(0, "A"): {0: F(1, 2), 1: F(1, 2)}})
    assert eval_prob(P("Pr_A(p)"), m, 0) == F(1, 2)


def test_delta_and_knowledge():
    assert eval_mod(delta(Var("p")), point(p=F(99, 100)), 0) == 0
    fr = Frame([0, 1], {"A": [{0, 1}]})
    assert eval_mod(M("K_A p"), ModModel(fr, {("p", 0): F(3, 10), ("p", 1): F(4, 5)}), 0) == F(3, 10)
    assert eval_mod(M("!!((p -> !p) -> !p)"), point(p=F(1, 2)), 0) == F(1, 2)


def test_unknown_variable_is_empty():
    inner = EventModel([0], {}, {}, {})
    m = SIModel(Frame([0]), inner, {(0, "A"): {0: 1}})
    assert eval_prob(P("Pr_A(z)"), m, 0) == 0


@pytest.mark.parametrize("bad", [
    lambda: Frame([]),
    lambda: Frame([0, 1], {"A": [{0}]}),
    lambda: Frame([0], {}, {"a": {(0, 5)}}),
    lambda: SIModel(Frame([0]), EventModel([0], {}, {}, {}), {(0, "A"): {0: F(1, 2)}}),
])
def test_model_validation(bad):
    with pytest.raises(ModelError):
        bad()


def test_lower_upper():
    assert lower_upper([{0: F(1, 3), 1: F(2, 3)}], {0}) == (F(1, 3), F(1, 3))
    assert lower_upper([{0: 1}, {1: 1}], {0}) == (0, 1)


def test_entailment_on_points():
    q, nn = M("q"), M("!!!((p -> !p) -> !p)")
    for a in (0, F(1, 4), F(1, 2), 1):
        for b in (0, F(1, 2), 1):
            assert entails_on_model([q, nn], zero(), point(p=a, q=b), 0)
    assert not entails_on_model([q], M("!!((p -> !p) -> !p)"), point(p=F(1, 2), q=1), 0)


def test_si_to_standard_smallest():
    inner = EventModel([0], {}, {}, {"p": {0}})
    m = SIModel(Frame([0]), inner, {(0, "A"): {0: 1}})
    s = si_to_standard(m)
    assert len(s.outer.worlds) == 2
    assert eval_prob(P("Pr_A(p)"), s, ("o", 0)) == 1


def test_si_to_standard_keeps_vacuous_boxes():
    inner = EventModel([0], {}, {"a": {(0, 0)}}, {"p": set()})
    m = SIModel(Frame([0]), inner, {(0, "A"): {0: 1}})
    assert eval_prob(P("[a]!Pr_A(p)"), si_to_standard(m), ("o", 0)) == 1


@given(seeds)
def test_values_in_unit_interval_and_additivity(seed):
    rng = rng_of(seed)
    m = random_si_model(rng)
    f = random_prob(rng, 6, 2, 2, agents=AGENTS, actions=("a", "b"), product=True)
    alpha = random_event(rng, 2)
    for w in m.outer.worlds:
        assert 0 <= eval_prob(f, m, w) <= 1
        for a in AGENTS:
            total = eval_prob(PrAtom(a, alpha), m, w) + eval_prob(PrAtom(a, CNeg(alpha)), m, w)
            assert total == 1


@given(seeds)
def test_delta_is_crisp(seed):
    rng = rng_of(seed)
    m = random_mod_model(rng)
    f = random_mod(rng, 5, 2, agents=AGENTS, actions=("a", "b"), product=True)
    for w in m.frame.worlds:
        d = eval_mod(delta(f), m, w)
        assert d in (0, 1) and (d == 1) == (eval_mod(f, m, w) == 1)


@given(seeds)
def test_knowledge_is_reflexive(seed):
    rng = rng_of(seed)
    m = random_mod_model(rng)
    f = random_mod(rng, 5, 1, agents=AGENTS)
    for w in m.frame.worlds:
        for a in AGENTS:
            assert eval_mod(Knows(a, f), m, w) <= eval_mod(f, m, w)


@given(seeds)
def test_measure_monotone(seed):
    m = random_si_model(rng_of(seed))
    for w in m.outer.worlds:
        assert eval_prob(P("Pr_A(p & q)"), m, w) <= eval_prob(P("Pr_A(p)"), m, w)


@given(seeds)
def test_box_probability_is_lower_probability(seed):
    rng = rng_of(seed)
    m = random_si_model(rng)
    alpha = random_event(rng, 2)
    ext = denote(alpha, m.inner)
    for w in m.outer.worlds:
        succ = m.outer.succ("a", w)
        if succ:
            lo, _ = lower_upper([m.mu[u, "A"] for u in succ], ext)
            assert eval_prob(Box("a", PrAtom("A", alpha)), m, w) == lo


@given(seeds)
def test_si_to_standard_preserves_values(seed):
    rng = rng_of(seed)
    m = random_si_model(rng)
    s = si_to_standard(m)
    f = random_prob(rng, 6, 2, 2, agents=AGENTS, actions=("a", "b"), product=True)
    for w in m.outer.worlds:
        assert eval_prob(f, m, w) == eval_prob(f, s, ("o", w))


@given(seeds)
def test_json_roundtrip_si(seed):
    rng = rng_of(seed)
    m = random_si_model(rng)
    back = model_from_json(model_to_json(m))
    f = random_prob(rng, 6, 2, 2, agents=AGENTS, actions=("a", "b"))
    for w in m.outer.worlds:
        assert eval_prob(f, m, w) == eval_prob(f, back, str(w))


@given(seeds)
def test_json_roundtrip_mod(seed):
    rng = rng_of(seed)
    m = random_mod_model(rng)
    back = model_from_json(model_to_json(m))
    f = random_mod(rng, 6, 2, agents=AGENTS, actions=("a", "b"), product=True)
    for w in m.frame.worlds:
        assert eval_mod(f, m, w) == eval_mod(f, back, str(w))
