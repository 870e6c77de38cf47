import random

import pytest
from hypothesis import given

from conftest import P, rng_of, seeds
from eapr.fragments import (
    FragmentError, classicalize, epr_sat, fragment_sat, parse_theory, reduce_theory, theory_of,
    upl_entails, upl_sat, upr_sat,
)
from eapr.generate import random_mod_model, random_theory
from eapr.probsat import sat_fb_global
from eapr.semantics import eval_mod, eval_prob
from eapr.syntax.formula import Box, Knows, Var, diamond, kdiamond, oplus_all

HALF_RULES = ["Pr_ob(q) -> !Pr_ob(q)", "!Pr_ob(q) -> Pr_ob(q)", "Pr_ob(q) -> Pr_ob(K_A p)"]


def theory(*texts):
    return [P(t) for t in texts]


def closed_loop(fs, r):
    assert r.status == "SAT"
    for f in fs:
        assert eval_prob(f, r.model, r.world) == 1


def test_upl_sets():
    assert upl_sat(theory("Pr_A(p)", "!Pr_A(p)")).status == "UNSAT"
    r = upl_sat(theory("K_A Pr_B(p)"))
    closed_loop(theory("K_A Pr_B(p)"), r)
    fs = theory("Pr_A(<a>p)", "!Pr_A(p)")
    closed_loop(fs, upl_sat(fs))


def test_upl_entailment():
    assert upl_entails(theory("Pr_A(p)"), P("Pr_A(p)"))
    assert upl_entails(theory("Pr_A(K_B p)"), P("Pr_A(p)"))
    assert not upl_entails(theory("Pr_A(p)"), P("Pr_A(q)"))


def test_half_encoding():
    fs = theory(*HALF_RULES)
    r = upr_sat(fs)
    closed_loop(fs, r)
    assert eval_prob(P("Pr_ob(q)"), r.model, r.world) == pytest.approx(0.5)


@pytest.mark.parametrize("texts,status", [
    (["Pr_A(p)", "Pr_A(p) -> c(0)"], "UNSAT"),
    (["!Pr_A([a]p) (.) !Pr_B(K_A K_B q) -> c(0)"], "SAT"),
    (["Pr_A(<a>p) -> c(0)", "Pr_A(<a>p)"], "UNSAT"),
    (["Pr_A(p)", "[a]!Pr_A(p) + Pr_A(q)", "!Pr_A(q)"], "SAT"),
    (["Pr_A(p)", "!Pr_A(p) + !Pr_A(p)"], "UNSAT"),
    (["!Pr_A(q) + !Pr_A(q)", "Pr_A(p) + Pr_A(q)"], "SAT"),
])
def test_theory_verdicts(texts, status):
    fs = theory(*texts)
    r = fragment_sat(fs)
    assert r.status == status == sat_fb_global(fs).status
    if status == "SAT":
        closed_loop(fs, r)


def test_epr_grammar_is_strict():
    fs = theory("<a>Pr_A(p) + <b>Pr_A(q)")
    with pytest.raises(FragmentError):
        epr_sat(fs)
    assert sat_fb_global(fs).status == "SAT"


def test_rejects_non_fragment_input():
    with pytest.raises(FragmentError):
        upr_sat(theory("Pr_A(p) * Pr_A(q)"))
    with pytest.raises(FragmentError):
        epr_sat(theory("<a>!Pr_A(p) -> Kd_A Pr_B(q)"))


def test_theory_file_comments():
    text = "# the half encoding\n" + "\n".join(f"{r}  # rule {i}" for i, r in enumerate(HALF_RULES)) + "\n\n"
    assert parse_theory(text) == theory(*HALF_RULES)


def test_propositional_clauses_take_half():
    fs = theory("Pr_A(p) + Pr_A(q)", "Pr_A(q) + Pr_A(r)")
    r = fragment_sat(fs)
    closed_loop(fs, r)
    for e in ("p", "q", "r"):
        assert eval_prob(P(f"Pr_A({e})"), r.model, r.world) == pytest.approx(0.5)


def _clause_formula(c):
    return c[0].formula() if len(c) == 1 else oplus_all([l.formula() for l in c])


@given(seeds)
def test_reduction_preserves_status(seed):
    rng = rng_of(seed)
    kind = rng.choice(["UPR", "EPR+"])
    fs = random_theory(rng, "UPR" if kind == "UPR" else "EPR", clauses=rng.randint(1, 3), names=("p",))
    red = reduce_theory(theory_of(fs, kind))
    before = sat_fb_global(fs).status
    assert red.status == before
    if red.status == "SAT":
        after = [l.formula() for l in red.theta] + [_clause_formula(c) for c in red.clauses]
        assert sat_fb_global(after).status == "SAT"


@given(seeds)
def test_fragment_matches_general(seed):
    rng = rng_of(seed)
    kind = rng.choice(["UPR", "EPR"])
    fs = random_theory(rng, kind, clauses=rng.randint(2, 4), names=("p",))
    r = fragment_sat(fs)
    assert r.status == sat_fb_global(fs).status
    if r.status == "SAT":
        closed_loop(fs, r)


def _monotone(rng: random.Random, depth: int):
    if depth == 0 or rng.random() < 0.3:
        return Var(rng.choice("pq"))
    sub = _monotone(rng, depth - 1)
    return rng.choice([
        lambda: Box("a", sub), lambda: Knows("A", sub), lambda: diamond("a", sub), lambda: kdiamond("A", sub),
    ])()


@given(seeds)
def test_classicalize_thresholds(seed):
    rng = rng_of(seed)
    m = random_mod_model(rng, names=("p", "q"), agents=("A",), actions=("a",))
    lam = _monotone(rng, 2)
    pos, one = classicalize(m, "positive"), classicalize(m, "one")
    for w in m.frame.worlds:
        v = eval_mod(lam, m, w)
        if v > 0:
            assert eval_mod(lam, pos, w) == 1
        if v == 1:
            assert eval_mod(lam, one, w) == 1
        assert eval_mod(lam, pos, w) in (0, 1)
