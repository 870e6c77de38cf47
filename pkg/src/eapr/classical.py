"""Classical reasoning on event formulas: S5 knowledge per agent, K per action."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

from .semantics import EventModel, denote
from .syntax.formula import Box, CAnd, CNeg, Formula, Knows, Var, event_agents, size
from .syntax.parser import to_text


class _Branch:
    """Signed formulas on labels; equivalence classes stand in for S5 accessibility."""

    def __init__(self, agents):
        self.agents = sorted(agents)
        self.facts: dict = {}  # (label, formula) -> bool
        self.order: list = []
        self.edges: list = []  # (label, action, label)
        self.cls: dict = {}  # (label, agent) -> class id
        self.members: dict = {}  # class id -> list of labels
        self.labels = 0
        self.classes = 0
        self.done: set = set()
        self.kwit: set = set()  # (class, K-formula) pairs already refuted by some member
        self.succ: dict = {}  # (label, action) -> successor labels
        self.kfacts: dict = {}  # class id -> subformulas of true K facts in that class
        self.bfacts: dict = {}  # (label, action) -> subformulas of true box facts there
        self.pending: list = []  # (label, formula) owed by propagation
        self.pcur = self.ccur = self.gcur = 0  # positions before these are settled for each phase

    def copy(self) -> "_Branch":
        b = _Branch.__new__(_Branch)
        b.agents = self.agents
        b.facts = dict(self.facts)
        b.order = list(self.order)
        b.edges = list(self.edges)
        b.cls = dict(self.cls)
        b.members = {k: list(v) for k, v in self.members.items()}
        b.labels, b.classes = self.labels, self.classes
        b.done = set(self.done)
        b.kwit = set(self.kwit)
        b.succ = {k: list(v) for k, v in self.succ.items()}
        b.kfacts = {k: list(v) for k, v in self.kfacts.items()}
        b.bfacts = {k: list(v) for k, v in self.bfacts.items()}
        b.pending = list(self.pending)
        b.pcur, b.ccur, b.gcur = self.pcur, self.ccur, self.gcur
        return b

    def new_label(self, share: Optional[tuple] = None) -> int:
        w = self.labels
        self.labels += 1
        for a in self.agents:
            if share and share[0] == a:
                c = share[1]
                self.pending.extend((w, g) for g in self.kfacts.get(c, ()))
            else:
                c = self.classes
                self.classes += 1
                self.members[c] = []
            self.cls[w, a] = c
            self.members[c].append(w)
        return w

    def add(self, w: int, f: Formula, sign: bool) -> bool:
        """Record a signed formula; False signals a clash."""
        old = self.facts.get((w, f))
        if old is None:
            self.facts[w, f] = sign
            self.order.append((w, f))
            if sign and isinstance(f, Knows):
                c = self.cls[w, f.agent]
                self.kfacts.setdefault(c, []).append(f.sub)
                self.pending.extend((u, f.sub) for u in self.members[c])
            elif sign and isinstance(f, Box):
                self.bfacts.setdefault((w, f.action), []).append(f.sub)
                self.pending.extend((u, f.sub) for u in self.succ.get((w, f.action), ()))
            return True
        return old == sign

    def edge(self, w: int, action: str, u: int) -> None:
        self.edges.append((w, action, u))
        self.succ.setdefault((w, action), []).append(u)
        self.pending.extend((u, g) for g in self.bfacts.get((w, action), ()))


def _saturate(b: _Branch) -> Optional[_Branch]:
    """Depth-first search for an open saturated branch."""
    while True:
        step = _next_step(b)
        if step is None:
            return b
        kind, data = step
        if kind == "split":
            w, f = data
            b.done.add(("p", w, f))
            for part in (f.left, f.right):
                c = b.copy()
                if c.add(w, part, False):
                    out = _saturate(c)
                    if out is not None:
                        return out
            return None
        if not data(b):
            return None


def _next_step(b: _Branch):
    # propositional rules
    while b.pcur < len(b.order):
        w, f = b.order[b.pcur]
        if ("p", w, f) in b.done or not isinstance(f, (CNeg, CAnd)):
            b.pcur += 1
            continue
        sign = b.facts[w, f]
        if isinstance(f, CNeg):
            b.done.add(("p", w, f))
            return "apply", lambda b, w=w, f=f, s=sign: b.add(w, f.sub, not s)
        if sign:
            b.done.add(("p", w, f))
            return "apply", lambda b, w=w, f=f: b.add(w, f.left, True) and b.add(w, f.right, True)
        return "split", (w, f)
    # state creation
    while b.ccur < len(b.order):
        w, f = b.order[b.ccur]
        b.ccur += 1
        if ("p", w, f) in b.done or b.facts[w, f]:
            continue
        if isinstance(f, Knows):
            b.done.add(("p", w, f))

            def make(b, w=w, f=f):
                # K_A f is false on the whole class once one member refutes f.sub
                key = (b.cls[w, f.agent], f)
                if key in b.kwit:
                    return True
                b.kwit.add(key)
                u = b.new_label((f.agent, key[0]))
                return b.add(u, f.sub, False)
            return "apply", make
        if isinstance(f, Box):
            b.done.add(("p", w, f))

            def make(b, w=w, f=f):
                u = b.new_label()
                b.edge(w, f.action, u)
                return b.add(u, f.sub, False)
            return "apply", make
    # propagation
    while b.gcur < len(b.pending):
        u, g = b.pending[b.gcur]
        b.gcur += 1
        if b.facts.get((u, g)) is not True:
            return "apply", lambda b, u=u, g=g: b.add(u, g, True)
    return None


def _model(b: _Branch) -> EventModel:
    worlds = list(range(b.labels))
    epistemic = {}
    for a in b.agents:
        classes = {}
        for w in worlds:
            classes.setdefault(b.cls[w, a], set()).add(w)
        epistemic[a] = list(classes.values())
    actions: dict = {}
    for u, a, v in b.edges:
        actions.setdefault(a, set()).add((u, v))
    val: dict = {}
    for (w, f), sign in b.facts.items():
        if isinstance(f, Var):
            val.setdefault(f.name, set())
            if sign:
                val[f.name].add(w)
    return EventModel(worlds, epistemic, actions, val)


@dataclass
class EventSat:
    sat: bool
    model: Optional[EventModel] = None
    world: int = 0


def ea_sat(gamma: Iterable[Formula]) -> EventSat:
    gamma = list(gamma)
    return _ea_sat_cached(frozenset(gamma))


@lru_cache(maxsize=200_000)
def _ea_sat_cached(gamma: frozenset) -> EventSat:
    agents = set()
    for g in gamma:
        agents |= event_agents(g)
    b = _Branch(agents)
    w = b.new_label()
    for g in sorted(gamma, key=to_text):
        if not b.add(w, g, True):
            return EventSat(False)
    out = _saturate(b)
    if out is None:
        return EventSat(False)
    m = _model(out)
    for g in gamma:
        assert w in denote(g, m), f"event witness fails {to_text(g)}"
    return EventSat(True, m, w)


def ea_branch(gamma: Iterable[Formula], agents: Iterable[str] = ()) -> Optional[_Branch]:
    """Saturated open branch for gamma at one root label, or None if unsatisfiable."""
    gamma = list(gamma)
    agents = set(agents)
    for g in gamma:
        agents |= event_agents(g)
    b = _Branch(agents)
    w = b.new_label()
    for g in gamma:
        if not b.add(w, g, True):
            return None
    return _saturate(b)


def ea_extend(b: _Branch, f: Formula) -> Optional[_Branch]:
    """Add f at the root of a saturated branch and saturate again."""
    if not event_agents(f) <= set(b.agents):
        raise ValueError("formula mentions agents the branch was not built for")
    c = b.copy()
    if not c.add(0, f, True):
        return None
    return _saturate(c)


def branch_result(b: _Branch) -> tuple[EventModel, dict]:
    return _model(b), dict(b.facts)


def ea_tableau(gamma: Iterable[Formula]) -> Optional[tuple[EventModel, dict]]:
    """Witness model plus the signed facts of the open branch, or None if unsatisfiable."""
    b = ea_branch(gamma)
    return None if b is None else branch_result(b)


# maximal consistent sets


def _core(f: Formula) -> tuple[Formula, bool]:
    pos = True
    while isinstance(f, CNeg):
        f, pos = f.sub, not pos
    return f, pos


@dataclass(frozen=True)
class MCS:
    members: frozenset
    certificate: Optional[EventSat] = None

    def __contains__(self, f) -> bool:
        return f in self.members


def mcs_enumerate(sf: Iterable[Formula]) -> list[MCS]:
    return list(_mcs_cached(frozenset(sf)))


@lru_cache(maxsize=4096)
def _mcs_cached(sf: frozenset) -> tuple:
    bases = sorted({_core(f)[0] for f in sf}, key=lambda f: (size(f), to_text(f)))
    out = []

    def lit(b, v):
        return b if v else CNeg(b)

    def rec(i: int, chosen: list):
        if i == len(bases):
            cert = ea_sat(chosen)
            truth = {b: chosen[j] == b for j, b in enumerate(bases)}
            members = frozenset(f for f in sf if truth[_core(f)[0]] == _core(f)[1])
            out.append(MCS(members, cert))
            return
        for v in (True, False):
            nxt = chosen + [lit(bases[i], v)]
            if ea_sat(nxt).sat:
                rec(i + 1, nxt)

    rec(0, [])
    return tuple(out)


@dataclass
class MCSModel:
    sf: frozenset
    mcss: list
    model: EventModel  # worlds are indices into mcss


def build_mcs_model(sf: Iterable[Formula], agents: Iterable[str] = ()) -> MCSModel:
    sf = frozenset(sf)
    mcss = mcs_enumerate(sf)
    worlds = list(range(len(mcss)))
    all_agents = set(agents)
    for f in sf:
        all_agents |= event_agents(f)
    epistemic = {}
    for a in sorted(all_agents):
        ks = [f for f in sf if isinstance(f, Knows) and f.agent == a]
        groups: dict = {}
        for i, m in enumerate(mcss):
            groups.setdefault(frozenset(k for k in ks if k in m), set()).add(i)
        epistemic[a] = list(groups.values())
    actions: dict = {}
    boxes = [f for f in sf if isinstance(f, Box)]
    for a in sorted({f.action for f in boxes}):
        mine = [f for f in boxes if f.action == a]
        pairs = set()
        for i, m in enumerate(mcss):
            needs = [f.sub for f in mine if f in m]
            for j, n in enumerate(mcss):
                if all(g in n for g in needs):
                    pairs.add((i, j))
        actions[a] = pairs
    val = {}
    for f in sf:
        if isinstance(f, Var):
            val[f.name] = {i for i, m in enumerate(mcss) if f in m}
    return MCSModel(sf, mcss, EventModel(worlds or [0], epistemic, actions, val) if mcss else None)


def truth_lemma_holds(mm: MCSModel) -> bool:
    if mm.model is None:
        return not mm.mcss
    for f in mm.sf:
        ext = denote(f, mm.model)
        for i, m in enumerate(mm.mcss):
            if (f in m) != (i in ext):
                return False
    return True
