"""Satisfiability of probabilistic formulas over finitely branching frames.

The tableau treats ``Pr_A(alpha)`` as an atom.  Each (state, agent) pair
with probability atoms gets a coherence system: one mass variable per
maximal consistent subset of the atoms' negation closure, masses summing
to 1, and the value of each atom equal to the mass of the sets holding it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .classical import build_mcs_model, mcs_enumerate
from .constraints import IneqSystem, Poly, feasible, linear_feasible
from .semantics import EventModel, SIModel, eval_prob, ONE
from .syntax.formula import (
    Box, FNeg, Formula, Knows, LImp, PrAtom, closure_neg, delta, is_closed, odot_all, pratoms,
    variables,
)
from .syntax.parser import to_text
from .tableau import (
    GE, BudgetExceeded, Branch, Result, Step, _Counter, _frame, apply, branch_system,
    linear_part, next_step, sat_mod, saturate_iter, start_branch,
)


@dataclass
class CoherenceSystem:
    agent: str
    w: int
    atoms: list
    closure: frozenset
    mcss: list
    uvars: list
    links: list  # x variable per atom
    rows: IneqSystem

    def matrix(self) -> list:
        return [[1 if a in m else 0 for a in self.atoms] for m in self.mcss]


def atoms_at(b: Branch, w: int, agent: str) -> list:
    seen = {}
    for c in b.fcons:
        if c.w == w and isinstance(c.phi, PrAtom) and c.phi.agent == agent:
            seen.setdefault(c.phi.event, None)
    return sorted(seen, key=to_text)


def coherence_system(w: int, agent: str, b: Branch) -> CoherenceSystem:
    atoms = atoms_at(b, w, agent)
    if not atoms:
        raise ValueError(f"state {w} has no probability atoms for {agent}")
    sf: set = set()
    for a in atoms:
        sf |= closure_neg(a)
    sf = frozenset(sf)
    mcss = mcs_enumerate(sf)
    uvars = [f"u_{w}_{agent}_{i}" for i in range(len(mcss))]
    rows = IneqSystem()
    rows.add(sum((Poly.var(u) for u in uvars), Poly()), "=", 1)
    links = []
    for a in atoms:
        x = b.x(w, PrAtom(agent, a))
        links.append(x)
        mass = sum((Poly.var(u) for u, m in zip(uvars, mcss) if a in m), Poly())
        rows.add(mass, "=", x)
    return CoherenceSystem(agent, w, atoms, sf, mcss, uvars, links, rows)


def _agents_of(b: Branch, labels: Iterable[int]) -> list:
    pairs = set()
    labels = set(labels)
    for c in b.fcons:
        if c.w in labels and isinstance(c.phi, PrAtom):
            pairs.add((c.w, c.phi.agent))
    return sorted(pairs)


def coherence_for(b: Branch, labels: Iterable[int]) -> list:
    return [coherence_system(w, a, b) for w, a in _agents_of(b, labels)]


def full_system(b: Branch, cohs: list, labels: Optional[set] = None) -> IneqSystem:
    s = branch_system(b, labels)
    for cs in cohs:
        s.extend(cs.rows.constraints)
    return s


def sparsify(cs: CoherenceSystem, witness: dict) -> dict:
    """A distribution with at most |atoms|+1 nonzero masses matching the witness links."""
    s = IneqSystem()
    s.add(sum((Poly.var(u) for u in cs.uvars), Poly()), "=", 1)
    for a, x in zip(cs.atoms, cs.links):
        mass = sum((Poly.var(u) for u, m in zip(cs.uvars, cs.mcss) if a in m), Poly())
        s.add(mass, "=", witness[x])
    res = linear_feasible(s)
    assert res.sat, "sparsifier lost a feasible distribution"
    return {u: res.witness.get(u, Fraction(0)) for u in cs.uvars}


def build_model(b: Branch, cohs: list, witness: dict, agents: Iterable[str],
                sparse: bool = False) -> SIModel:
    """Outer frame from the branch; inner frame is a disjoint union of MCS models."""
    outer = _frame(b)
    comps: dict = {}
    for cs in cohs:
        if cs.closure not in comps:
            comps[cs.closure] = (len(comps), build_mcs_model(cs.closure))
    worlds: list = []
    epistemic: dict = {}
    actions: dict = {}
    valuation: dict = {}
    for k, mm in comps.values():
        m = mm.model
        worlds += [(k, i) for i in m.worlds]
        for a, classes in m.epistemic.items():
            epistemic.setdefault(a, []).extend(frozenset((k, i) for i in c) for c in classes)
        for act, pairs in m.actions.items():
            actions.setdefault(act, set()).update(((k, i), (k, j)) for i, j in pairs)
        for p, ws in m.valuation.items():
            valuation.setdefault(p, set()).update((k, i) for i in ws)
    default = "d"
    need_default = False
    mu = {}
    by_pair = {(cs.w, cs.agent): cs for cs in cohs}
    for w in outer.worlds:
        for a in agents:
            cs = by_pair.get((w, a))
            if cs is None:
                mu[w, a] = {default: ONE}
                need_default = True
                continue
            k = comps[cs.closure][0]
            masses = sparsify(cs, witness) if sparse else {u: witness[u] for u in cs.uvars}
            mu[w, a] = {(k, i): masses[u] for i, u in enumerate(cs.uvars) if masses[u]}
    if need_default or not worlds:
        worlds.append(default)
    covered = set(worlds)
    for a in list(epistemic):
        seen = set().union(*epistemic[a])
        epistemic[a] += [frozenset((x,)) for x in covered - seen]
    inner = EventModel(worlds, epistemic, actions, valuation)
    return SIModel(outer, inner, mu)


def _prob_agents(phis) -> set:
    return {p.agent for f in phis for p in pratoms(f)}


def _finish(phis, leaf, cohs, witness, sparse) -> Result:
    m = build_model(leaf, cohs, witness, sorted(_prob_agents(phis)), sparse)
    for f in phis:
        val = eval_prob(f, m, 0)
        assert val == ONE, f"witness model gives {val} for {to_text(f)}"
    return Result("SAT", m, 0)


def _as_list(phi) -> list:
    return list(phi) if isinstance(phi, (list, tuple)) else [phi]


def sat_fb_global(phi, budget: Optional[int] = 200_000, sparse: bool = False) -> Result:
    """Saturate fully, then solve each open branch with its coherence systems."""
    phis = _as_list(phi)
    b = start_branch(phis, GE, 1)
    unknown = None
    try:
        for leaf in saturate_iter(b, budget):
            cohs = coherence_for(leaf, range(leaf.labels))
            res = feasible(full_system(leaf, cohs))
            if res.sat:
                return _finish(phis, leaf, cohs, res.witness, sparse)
            if res.status == "UNKNOWN":
                unknown = "nonlinear system undecided"
    except BudgetExceeded:
        return Result("UNKNOWN", note="budget")
    return Result("UNKNOWN", note=unknown) if unknown else Result("UNSAT")


# path-local search


def _subtree(b: Branch, u: int) -> set:
    """States reachable from u through shared classes and action edges."""
    out = {u}
    todo = [u]
    while todo:
        w = todo.pop()
        nxt = [v for (x, _, v) in b.edges if x == w]
        for a in b.agents:
            nxt += b.class_members(w, a)
        for v in nxt:
            if v not in out:
                out.add(v)
                todo.append(v)
    return out


def _pending_boxes(b: Branch, labels=None) -> list:
    return [
        i for i, c in enumerate(b.fcons)
        if c.rel == "<=" and isinstance(c.phi, Box) and ("p", c) not in b.done
        and c.w not in b.retired and (labels is None or c.w in labels)
    ]


def _leaf_check(b: Branch, labels: set):
    cohs = coherence_for(b, labels)
    s = full_system(b, cohs, labels)
    return feasible(s), cohs


def _retire(b: Branch, labels: set, cohs: list) -> None:
    """Freeze the numeric content of finished states and drop their formulas."""
    rows = IneqSystem()
    for c in b.fcons:
        if c.w in labels and not is_closed(c.phi):
            x = b.x(c.w, c.phi)
            if c.bound.terms != {(x,): 1}:
                rows.add(x, c.rel, c.bound)
    for cs in cohs:
        rows.extend(cs.rows.constraints)
    b.frozen = b.frozen + rows.constraints
    b.retired |= labels
    b.fcons = [c for c in b.fcons if c.w not in labels]
    b.fset = set(b.fcons)
    b.cohs = b.cohs + cohs


def _knows_only(_b: Branch, c) -> bool:
    return isinstance(c.phi, Knows)


def sat_fb_pathlocal(phi, budget: Optional[int] = 200_000, sparse: bool = False) -> Result:
    """Depth-first state generation; finished action subtrees are checked and retired."""
    phis = _as_list(phi)
    b = start_branch(phis, GE, 1)
    counter = _Counter(budget)
    stack = [b]
    unknown = False
    try:
        while stack:
            cur = stack.pop()
            alive = True
            while alive:
                step = next_step(cur, create_filter=_knows_only)
                if step is not None:
                    counter.tick()
                    kids = apply(cur, step)
                    if len(kids) == 2:
                        kids = [k for k in kids if linear_feasible(linear_part(branch_system(k))).sat]
                    if not kids:
                        alive = False
                        break
                    cur = kids[0]
                    stack.extend(reversed(kids[1:]))
                    continue
                # cluster saturated: retire finished action subtrees, deepest first
                for u in sorted((u for u in cur.parent if u not in cur.retired), reverse=True):
                    sub = _subtree(cur, u) - cur.retired
                    if _pending_boxes(cur, sub):
                        continue
                    res, cohs = _leaf_check(cur, sub)
                    if not res.sat:
                        unknown |= res.status == "UNKNOWN"
                        alive = False
                        break
                    _retire(cur, sub, cohs)
                if not alive:
                    break
                pend = _pending_boxes(cur)
                if pend:
                    i = max(pend, key=lambda j: (cur.fcons[j].w, -j))
                    counter.tick()
                    kids = apply(cur, Step("create", i))
                    kids = [k for k in kids if linear_feasible(linear_part(branch_system(k))).sat]
                    if not kids:
                        break
                    cur = kids[0]
                    stack.extend(reversed(kids[1:]))
                    continue
                live = set(range(cur.labels)) - cur.retired
                cohs = coherence_for(cur, live)
                res = feasible(full_system(cur, cohs, live))
                if res.sat:
                    return _finish(phis, cur, _all_cohs(cur, cohs), res.witness, sparse)
                unknown |= res.status == "UNKNOWN"
                alive = False
    except BudgetExceeded:
        return Result("UNKNOWN", note="budget")
    return Result("UNKNOWN", note="nonlinear system undecided") if unknown else Result("UNSAT")


def _all_cohs(b: Branch, live_cohs: list) -> list:
    return list(b.cohs) + live_cohs


def _has_vars(phis) -> bool:
    return any(variables(f) and not pratoms(f) for f in phis)


def sat_fb(phi, mode: str = "global", **kw) -> Result:
    phis = _as_list(phi)
    if _has_vars(phis):
        # bare variables: the pure modal layer, decided by the plain tableau
        kw.pop("sparse", None)
        return sat_mod(phis[0] if len(phis) == 1 else odot_all([delta(f) for f in phis]), **kw)
    if mode == "global":
        return sat_fb_global(phi, **kw)
    if mode == "pathlocal":
        return sat_fb_pathlocal(phi, **kw)
    raise ValueError(f"unknown mode {mode!r}")


def valid_fb(phi: Formula, mode: str = "global", **kw) -> Result:
    """phi is valid iff the negation of its delta is unsatisfiable."""
    r = sat_fb(FNeg(delta(phi)), mode, **kw)
    if r.status == "SAT":
        return Result("COUNTERMODEL", r.model, r.world)
    if r.status == "UNSAT":
        return Result("PROVED")
    return r


def entailment_formula(gamma: Iterable[Formula], chi: Formula) -> Formula:
    out = chi
    for g in reversed(list(gamma)):
        out = LImp(delta(g), out)
    return out


def entails_fb(gamma: Iterable[Formula], chi: Formula, mode: str = "global", **kw) -> Result:
    return valid_fb(entailment_formula(gamma, chi), mode, **kw)
