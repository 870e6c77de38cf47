"""Polynomial procedures for uniform literal sets and rule theories.

A uniform literal at value 1 only ever asks for probabilities 0 or 1, so a
set of them is decided by a classical tableau over the outer modalities
in which ``Pr_A(beta) = 1`` is a propositional atom, followed by one
event-layer check per (state, agent).  Rule theories are reduced against
their literal part until they are contradictory or irreducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .classical import branch_result, build_mcs_model, ea_branch, ea_extend, ea_sat, mcs_enumerate
from .constraints import IneqSystem, Poly, linear_feasible
from .semantics import EventModel, Frame, ModModel, SIModel, eval_prob, ONE
from .syntax.classify import Lit, classify_theory, lit_of, member_clause
from .syntax.formula import Box, CNeg, Formula, Knows, Var, closure_neg
from .syntax.parser import parse, to_text
from .tableau import Result


class FragmentError(ValueError):
    pass


# literal sets


def _target(l: Lit) -> Formula:
    """Event that the literal's probability atom must give mass 1."""
    return CNeg(l.event) if l.neg else l.event


class _Atoms:
    """Names for the outer atoms Pr_A(beta) = 1."""

    def __init__(self):
        self.names: dict = {}
        self.back: dict = {}

    def var(self, agent: str, beta: Formula) -> Var:
        key = (agent, beta)
        if key not in self.names:
            name = f"_pi{len(self.names)}"
            self.names[key] = name
            self.back[name] = key
        return Var(self.names[key])


def _classical(l: Lit, atoms: _Atoms) -> Formula:
    f: Formula = atoms.var(l.agent, _target(l))
    for kind, label in reversed(l.chain):
        if l.box:
            f = Knows(label, f) if kind == "K" else Box(label, f)
        else:
            g = Knows(label, CNeg(f)) if kind == "K" else Box(label, CNeg(f))
            f = CNeg(g)
    return f


@dataclass
class _Outer:
    model: EventModel
    facts: dict  # (state, agent) -> (certain events, events of mass < 1)


def _chain_agents(l: Lit) -> set:
    return {label for kind, label in l.chain if kind == "K"}


class _Base:
    """Saturated outer branch for a literal set, reused by every entailment test against it."""

    def __init__(self, theta: Iterable[Lit], agents: Iterable[str] = ()):
        self.atoms = _Atoms()
        gamma = [_classical(l, self.atoms) for l in theta]
        self.branch = ea_branch(gamma, agents)
        self.facts = self.atom_facts(self.branch.order, self.branch.facts) if self.branch else {}

    def atom_facts(self, entries, signs: dict, facts: Optional[dict] = None) -> dict:
        """(state, agent) -> (certain events, events of mass < 1), extended copy-on-write."""
        out: dict = {}
        for w, f in entries:
            if isinstance(f, Var) and f.name in self.atoms.back:
                agent, beta = self.atoms.back[f.name]
                key = (w, agent)
                if key not in out:
                    pos, neg = (facts or {}).get(key, ((), ()))
                    out[key] = (set(pos), set(neg))
                (out[key][0] if signs[w, f] else out[key][1]).add(beta)
        return out

    def entails(self, below: Lit) -> bool:
        """Does the (coherent) base literal set force ``below`` to 1?"""
        b = ea_extend(self.branch, CNeg(_classical(below, self.atoms)))
        if b is None:
            return True
        # states whose atom facts did not change stay coherent
        touched = self.atom_facts(b.order[len(self.branch.order):], b.facts, self.facts)
        return any(_coherent(pos, neg) is None for pos, neg in touched.values())


def _outer(theta: Iterable[Lit], below: Optional[Lit] = None, base: Optional[_Base] = None) -> Optional[_Outer]:
    if base is None:
        base = _Base(theta, _chain_agents(below) if below is not None else ())
    b = base.branch
    if b is not None and below is not None:
        b = ea_extend(b, CNeg(_classical(below, base.atoms)))
    if b is None:
        return None
    model, signed = branch_result(b)
    return _Outer(model, base.atom_facts(signed, signed))


def _coherent(pos: set, neg: set) -> Optional[list]:
    """Witness worlds for a measure giving every pos event mass 1 and every neg event mass < 1."""
    base = ea_sat(pos)
    if not base.sat:
        return None
    out = [base]
    for beta in sorted(neg, key=to_text):
        w = ea_sat(list(pos) + [CNeg(beta)])
        if not w.sat:
            return None
        out.append(w)
    return out


def upl_check(theta: Iterable[Lit], below: Optional[Lit] = None, base: Optional[_Base] = None):
    """Decide Theta at 1 (plus ``below`` under 1); returns witness data or None."""
    o = _outer(theta, below, base)
    if o is None:
        return None
    wit = {}
    for key, (pos, neg) in o.facts.items():
        ws = _coherent(pos, neg)
        if ws is None:
            return None
        wit[key] = ws
    return o, wit


def _assemble(o: _Outer, wit: dict, agents: Iterable[str], root_override=None) -> SIModel:
    outer = Frame(o.model.worlds, dict(o.model.epistemic), dict(o.model.actions))
    worlds: list = []
    epistemic: dict = {}
    actions: dict = {}
    valuation: dict = {}
    comps = 0

    def attach(m: EventModel) -> int:
        nonlocal comps
        k = comps
        comps += 1
        worlds.extend((k, x) for x in m.worlds)
        for a, classes in m.epistemic.items():
            epistemic.setdefault(a, []).extend(frozenset((k, x) for x in c) for c in classes)
        for act, pairs in m.actions.items():
            actions.setdefault(act, set()).update(((k, x), (k, y)) for x, y in pairs)
        for p, ws in m.valuation.items():
            valuation.setdefault(p, set()).update((k, x) for x in ws)
        return k

    mu = {}
    need_default = False
    for w in outer.worlds:
        for a in agents:
            if root_override and (w, a) in root_override:
                m, masses = root_override[w, a]
                k = attach(m)
                mu[w, a] = {(k, x): q for x, q in masses.items()}
                continue
            ws = wit.get((w, a))
            if not ws:
                mu[w, a] = {"d": ONE}
                need_default = True
                continue
            q = Fraction(1, len(ws))
            masses: dict = {}
            for cert in ws:
                k = attach(cert.model)
                masses[k, cert.world] = masses.get((k, cert.world), 0) + q
            mu[w, a] = masses
    if need_default or not worlds:
        worlds.append("d")
    for a in epistemic:
        seen = set().union(*epistemic[a])
        epistemic[a] += [frozenset((x,)) for x in worlds if x not in seen]
    return SIModel(outer, EventModel(worlds, epistemic, actions, valuation), mu)


def _lits(fs: Iterable) -> list[Lit]:
    out = []
    for f in fs:
        l = f if isinstance(f, Lit) else lit_of(f)
        if l is None:
            raise FragmentError(f"not a uniform probabilistic literal: {to_text(f)}")
        out.append(l)
    return out


def upl_sat(theta: Iterable) -> Result:
    lits = _lits(theta)
    hit = upl_check(lits)
    if hit is None:
        return Result("UNSAT")
    m = _assemble(*hit, agents=sorted({l.agent for l in lits}))
    for l in lits:
        assert eval_prob(l.formula(), m, 0) == ONE, f"literal witness fails {to_text(l.formula())}"
    return Result("SAT", m, 0)


def upl_entails(theta: Iterable, goal) -> bool:
    lits = _lits(theta)
    (g,) = _lits([goal])
    return upl_check(lits, below=g) is None


# rule theories


@dataclass
class FragmentTheory:
    kind: str  # UPR | EPR+
    theta: list  # unit literals
    clauses: list  # lists of at least two literals
    source: list = field(default_factory=list)


def theory_of(fs: list[Formula], kind: Optional[str] = None) -> FragmentTheory:
    kind = kind or classify_theory(fs)
    if kind is None:
        raise FragmentError("theory is neither UPR nor EPR+")
    theta, clauses = [], []
    for f in fs:
        lits = member_clause(f, kind)
        if lits is None:
            raise FragmentError(f"member outside the {kind} fragment: {to_text(f)}")
        if len(lits) == 1:
            theta.append(lits[0])
        else:
            clauses.append(lits)
    return FragmentTheory(kind, theta, clauses, list(fs))


class _Entails:
    """Entailment tests against the current literal set, cached until it grows."""

    def __init__(self, agents: Iterable[str]):
        self.agents = set(agents)
        self.theta: list = []
        self.base: Optional[_Base] = None
        self.cache: dict = {}
        self.calls = 0

    def reset(self, theta: list) -> None:
        self.theta = list(theta)
        self.base = _Base(self.theta, self.agents)
        self.cache = {}

    def __call__(self, l: Lit) -> bool:
        if l not in self.cache:
            self.calls += 1
            self.cache[l] = self.base.entails(l)
        return self.cache[l]


@dataclass
class Reduction:
    status: str  # SAT | UNSAT
    theta: list
    clauses: list
    steps: list


def reduce_theory(t: FragmentTheory) -> Reduction:
    theta = list(dict.fromkeys(t.theta))
    clauses = [list(c) for c in t.clauses]  # multisets: oplus is not idempotent
    steps: list = []
    if upl_check(theta) is None:
        return Reduction("UNSAT", theta, clauses, steps + ["literal part unsatisfiable"])
    ent = _Entails({a for l in theta + [l for c in clauses for l in c] for a in _chain_agents(l)})
    ent.reset(theta)
    changed = True
    while changed:
        changed = False
        kept = []
        for i, c in enumerate(clauses):
            if any(ent(l) for l in c):
                steps.append(f"drop clause {i}: a literal is entailed")
                continue
            rest = [l for l in c if not ent(l.negate())]
            if len(rest) < len(c):
                steps.append(f"clause {i}: removed {len(c) - len(rest)} refuted literal(s)")
            if not rest:
                return Reduction("UNSAT", theta, clauses, steps + [f"clause {i} emptied"])
            if len(rest) == 1:
                theta.append(rest[0])
                steps.append(f"clause {i}: unit moved to the literal part")
                if upl_check(theta) is None:
                    return Reduction("UNSAT", theta, clauses, steps + ["literal part unsatisfiable"])
                ent.reset(theta)
                changed = True
                continue
            kept.append(rest)
        clauses = kept
    return Reduction("SAT", theta, clauses, steps)


def _pick(c: list, kind: str) -> Optional[Lit]:
    want_box = kind == "EPR+"
    for l in c:
        if l.proper and l.box == want_box:
            return l
    return None


def _half_pair(pos: set, neg: set, events: set) -> Optional[list]:
    """Two certain-event worlds that split every event, so their even mixture gives each mass 1/2."""
    plus, minus = sorted(pos, key=to_text), sorted(pos, key=to_text)
    for e in sorted(events, key=to_text):
        for x, y in ((e, CNeg(e)), (CNeg(e), e)):
            if ea_sat(plus + [x]).sat and ea_sat(minus + [y]).sat:
                plus.append(x)
                minus.append(y)
                break
        else:
            return None
    # an event of mass < 1 must fail in at least one of the two
    for beta in sorted(neg, key=to_text):
        if ea_sat(plus + [CNeg(beta)]).sat:
            plus.append(CNeg(beta))
        elif ea_sat(minus + [CNeg(beta)]).sat:
            minus.append(CNeg(beta))
        else:
            return None
    return [ea_sat(plus), ea_sat(minus)]


def _value_poly(l: Lit, mass: dict) -> Poly:
    m = mass[l.agent, l.event]
    return 1 - m if l.neg else m


def _root_lp(o: _Outer, wit: dict, prop_clauses: list):
    """Measures at the root satisfying every propositional clause and the root facts."""
    agents = sorted({l.agent for c in prop_clauses for l in c})
    s = IneqSystem()
    parts = {}
    mass: dict = {}
    for a in agents:
        pos, neg = o.facts.get((0, a), (set(), set()))
        events = {l.event for c in prop_clauses for l in c if l.agent == a} | pos | neg
        sf: set = set()
        for e in events:
            sf |= closure_neg(e)
        sf = frozenset(sf)
        mcss = mcs_enumerate(sf)
        us = [f"u_{a}_{i}" for i in range(len(mcss))]
        s.add(sum((Poly.var(u) for u in us), Poly()), "=", 1)
        for e in events:
            mass[a, e] = sum((Poly.var(u) for u, m in zip(us, mcss) if e in m), Poly())
        for e in pos:
            s.add(mass[a, e], "=", 1)
        for e in neg:
            s.add(mass[a, e], "<", 1)
        parts[a] = (sf, us)
    for c in prop_clauses:
        s.add(sum((_value_poly(l, mass) for l in c), Poly()), ">=", 1)
    # prefer every clause literal at exactly 1/2, else any solution
    half = s.copy()
    for c in prop_clauses:
        for l in c:
            half.add(mass[l.agent, l.event], "=", Fraction(1, 2))
    res = linear_feasible(half)
    if not res.sat:
        res = linear_feasible(s)
    if not res.sat:
        return None
    out = {}
    for a, (sf, us) in parts.items():
        mm = build_mcs_model(sf)
        masses = {i: res.witness.get(u, Fraction(0)) for i, u in enumerate(us)}
        out[0, a] = (mm.model, {i: q for i, q in masses.items() if q})
    return out


def fragment_witness(t: FragmentTheory, red: Reduction) -> Optional[SIModel]:
    """Model of an irreducible theory: one chosen literal per modal clause, even splits for the rest."""
    chosen, prop = [], []
    for c in red.clauses:
        l = _pick(c, t.kind)
        if l is None:
            prop.append(c)
        else:
            chosen.append(l)
    hit = upl_check(red.theta + chosen)
    if hit is None:
        return None
    o, wit = hit
    hard = []
    for a in sorted({l.agent for c in prop for l in c}):
        pos, neg = o.facts.get((0, a), (set(), set()))
        pair = _half_pair(pos, neg, {l.event for c in prop for l in c if l.agent == a})
        if pair is None:
            hard += [c for c in prop if any(l.agent == a for l in c)]
        else:
            wit = {**wit, (0, a): pair}
    override = _root_lp(o, wit, hard) if hard else {}
    if override is None:
        return None
    agents = sorted({l.agent for l in red.theta + chosen} | {l.agent for c in red.clauses for l in c})
    return _assemble(o, wit, agents, override)


def _solve(t: FragmentTheory, witness: bool) -> Result:
    red = reduce_theory(t)
    if red.status == "UNSAT":
        return Result("UNSAT", note="; ".join(red.steps), trace=red.steps)
    if not witness:
        return Result("SAT", note="irreducible", trace=red.steps)
    m = fragment_witness(t, red)
    if m is None:
        # the construction failed; fall back to the general procedure
        from .probsat import sat_fb_global

        r = sat_fb_global(t.source)
        r.note = "witness by general search"
        r.trace = red.steps
        return r
    for f in t.source:
        val = eval_prob(f, m, 0)
        assert val == ONE, f"fragment witness gives {val} for {to_text(f)}"
    return Result("SAT", m, 0, note="irreducible", trace=red.steps)


def upr_sat(fs: list[Formula], witness: bool = True) -> Result:
    t = theory_of(fs, "UPR")
    return _solve(t, witness)


def epr_sat(fs: list[Formula], witness: bool = True) -> Result:
    t = theory_of(fs, "EPR+")
    return _solve(t, witness)


def fragment_sat(fs: list[Formula], witness: bool = True) -> Result:
    t = theory_of(fs)
    return _solve(t, witness)


# helpers


def classicalize(m: ModModel, threshold: str = "positive") -> ModModel:
    """Boolean valuation: 1 where the value is positive, or where it equals 1."""
    if threshold not in ("positive", "one"):
        raise ValueError(f"unknown threshold {threshold!r}")
    if threshold == "positive":
        v = {k: (ONE if q > 0 else Fraction(0)) for k, q in m.v.items()}
    else:
        v = {k: (ONE if q == 1 else Fraction(0)) for k, q in m.v.items()}
    return ModModel(m.frame, v)


def parse_theory(text: str) -> list[Formula]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse(line, "prob"))
    return out
