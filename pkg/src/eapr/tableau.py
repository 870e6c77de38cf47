"""Constraint tableaux for the fuzzy modal layer over finitely branching frames.

A branch holds labelled constraints ``w:phi <= P`` / ``w:phi >= P`` with
polynomial bounds P, numeric constraints, action edges and one class per
(state, agent).  Probability atoms behave like propositional variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from .constraints import Constraint, IneqSystem, Poly, feasible, linear_feasible
from .semantics import Frame, ModModel, eval_mod, ONE
from .syntax.formula import (
    Box, FNeg, Formula, Knows, LImp, PImp, PrAtom, Prod, Var, closed_value, is_closed, outer_agents,
)
from .syntax.parser import to_text

LE, GE = "<=", ">="


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class FConstraint:
    w: int
    phi: Formula
    rel: str
    bound: Poly


_closed_value = closed_value


class Branch:
    def __init__(self, agents: Iterable[str] = ()):
        self.agents = sorted(set(agents))
        self.fcons: list = []
        self.fset: set = set()
        self.numeric: list = []
        self.edges: list = []
        self.cls: dict = {}
        self.members: dict = {}
        self.xvars: dict = {}
        self.labels = 0
        self.classes = 0
        self.nvars = 0
        self.done: set = set()
        self.retired: set = set()
        self.frozen: list = []  # system rows kept from retired states
        self.cohs: list = []  # coherence data of retired states
        self.parent: dict = {}  # label -> (label, action) for action children
        self.kwit: dict = {}  # (class, K-formula) -> shared upper bound variable
        self.path = "0"
        self.trace: Optional[list] = None

    def copy(self) -> "Branch":
        b = Branch.__new__(Branch)
        b.agents = self.agents
        b.fcons = list(self.fcons)
        b.fset = set(self.fset)
        b.numeric = list(self.numeric)
        b.edges = list(self.edges)
        b.cls = dict(self.cls)
        b.members = {k: list(v) for k, v in self.members.items()}
        b.xvars = dict(self.xvars)
        b.labels, b.classes, b.nvars = self.labels, self.classes, self.nvars
        b.done = set(self.done)
        b.retired = set(self.retired)
        b.frozen = list(self.frozen)
        b.cohs = list(self.cohs)
        b.parent = dict(self.parent)
        b.kwit = dict(self.kwit)
        b.path = self.path
        b.trace = self.trace
        return b

    # construction helpers

    def new_label(self, share: Optional[tuple] = None) -> int:
        w = self.labels
        self.labels += 1
        for a in self.agents:
            if share is not None and share[0] == a:
                c = share[1]
            else:
                c = self.classes
                self.classes += 1
                self.members[c] = []
            self.cls[w, a] = c
            self.members[c].append(w)
        return w

    def fresh(self) -> Poly:
        self.nvars += 1
        return Poly.var(f"y{self.nvars}")

    def x(self, w: int, phi: Formula) -> str:
        key = (w, phi)
        name = self.xvars.get(key)
        if name is None:
            name = f"x{len(self.xvars) + 1}"
            self.xvars[key] = name
        return name

    def add(self, w: int, phi: Formula, rel: str, bound) -> None:
        c = FConstraint(w, phi, rel, Poly.lift(bound))
        if c not in self.fset:
            self.fset.add(c)
            self.fcons.append(c)

    def num(self, lhs, rel: str, rhs) -> None:
        self.numeric.append(Constraint.make(lhs, rel, rhs))

    def value_term(self, w: int, phi: Formula) -> Poly:
        """A term equal to the value of phi at w; reuses x_{w:phi} so monomials are shared."""
        if is_closed(phi):
            return Poly.const(_closed_value(phi))
        y = Poly.var(self.x(w, phi))
        self.add(w, phi, LE, y)
        self.add(w, phi, GE, y)
        return y

    def log(self, rule: str, c, concl: str) -> None:
        if self.trace is not None:
            prem = c if isinstance(c, str) else show(c)
            self.trace.append(f"({self.path}, {rule}, {prem}, {concl})")

    # queries

    def successors(self, w: int, action: str) -> list:
        return [v for (u, a, v) in self.edges if u == w and a == action]

    def class_members(self, w: int, agent: str) -> list:
        return self.members[self.cls[w, agent]]


def show(c: FConstraint) -> str:
    return f"{c.w}:{to_text(c.phi)} {c.rel} {c.bound}"


def _is_atom(phi: Formula) -> bool:
    return isinstance(phi, (Var, PrAtom))


# rules


def _propositional(b: Branch, c: FConstraint) -> list:
    """Children produced by the propositional rule for c (None if no rule)."""
    w, phi, rel, P = c.w, c.phi, c.rel, c.bound
    if is_closed(phi):
        b.num(_closed_value(phi), rel, P)
        b.log("const", c, f"{_closed_value(phi)} {rel} {P}")
        return [b]
    if isinstance(phi, FNeg):
        flip = GE if rel == LE else LE
        b.add(w, phi.sub, flip, 1 - P)
        b.log(f"neg{rel}", c, f"{w}:{to_text(phi.sub)} {flip} {1 - P}")
        return [b]
    if isinstance(phi, LImp):
        if rel == GE:
            y = b.fresh()
            b.add(w, phi.left, LE, 1 - P + y)
            b.add(w, phi.right, GE, y)
            b.log("imp>=", c, "2 constraints")
            return [b]
        left, right = b, b.copy()
        left.num(P, GE, 1)
        y = right.fresh()
        right.add(w, phi.left, GE, 1 - P + y)
        right.add(w, phi.right, LE, y)
        right.num(y, LE, P)
        b.log("imp<=", c, "split")
        return [left, right]
    if isinstance(phi, Prod):
        y1 = b.value_term(w, phi.left)
        y2 = b.value_term(w, phi.right)
        b.num(y1 * y2, rel, P)
        b.log(f"prod{rel}", c, f"{y1} * {y2} {rel} {P}")
        return [b]
    if isinstance(phi, PImp):
        left, right = b, b.copy()
        if rel == LE:
            left.num(P, GE, 1)
            y1 = right.value_term(w, phi.left)
            y2 = right.value_term(w, phi.right)
            right.num(y2, LE, P * y1)
            right.num(y1, ">", 0)
        else:
            if is_closed(phi.right):
                left.add(w, phi.left, LE, _closed_value(phi.right))
            else:
                y = left.fresh()
                left.add(w, phi.left, LE, y)
                left.add(w, phi.right, GE, y)
            y1 = right.value_term(w, phi.left)
            y2 = right.value_term(w, phi.right)
            right.num(y2, GE, P * y1)
        b.log(f"pimp{rel}", c, "split")
        return [left, right]
    return None


def _create(b: Branch, c: FConstraint) -> list:
    w, phi = c.w, c.phi
    if isinstance(phi, Knows):
        # K_A phi has one value per class, so one witness state per class suffices
        key = (b.cls[w, phi.agent], phi)
        k = b.kwit.get(key)
        if k is not None:
            b.num(k, LE, c.bound)
            b.log("K<=", c, f"{k} <= {c.bound}")
            return [b]
        k = b.kwit[key] = b.fresh()
        u = b.new_label((phi.agent, key[0]))
        b.add(u, phi.sub, LE, k)
        b.num(k, LE, c.bound)
        b.log("K<=", c, f"new state {u}")
        return [b]
    # with no a-successor the box is 1, so a successor is only forced when P < 1
    P = c.bound
    if P.is_const() and P.constant >= 1:
        b.log("box<=", c, "trivial")
        return [b]
    kids = []
    if not P.is_const():
        stay = b.copy()
        stay.num(P, GE, 1)
        stay.log("box<=", c, f"{P} >= 1")
        kids.append(stay)
    u = b.new_label()
    b.edges.append((w, phi.action, u))
    b.parent[u] = (w, phi.action)
    b.add(u, phi.sub, LE, P)
    b.log("box<=", c, f"new state {u}")
    kids.append(b)
    return kids


def _targets(b: Branch, c: FConstraint) -> list:
    if isinstance(c.phi, Knows):
        return b.class_members(c.w, c.phi.agent)
    return b.successors(c.w, c.phi.action)


@dataclass
class Step:
    kind: str  # prop | create | spread
    index: int
    target: Optional[int] = None


def next_step(b: Branch, create_filter: Optional[Callable] = None) -> Optional[Step]:
    """Next rule application: propositional, then state creation, then propagation."""
    live = [(i, c) for i, c in enumerate(b.fcons) if c.w not in b.retired]
    for i, c in live:
        if ("p", c) not in b.done and not _is_atom(c.phi) and not isinstance(c.phi, (Knows, Box)):
            return Step("prop", i)
    for i, c in live:
        if c.rel == LE and isinstance(c.phi, (Knows, Box)) and ("p", c) not in b.done:
            if create_filter is None or create_filter(b, c):
                return Step("create", i)
    for i, c in live:
        if c.rel == GE and isinstance(c.phi, (Knows, Box)):
            for u in _targets(b, c):
                if u not in b.retired and ("g", c, u) not in b.done:
                    return Step("spread", i, u)
    return None


def apply(b: Branch, step: Step) -> list:
    c = b.fcons[step.index]
    if step.kind == "spread":
        b.done.add(("g", c, step.target))
        b.add(step.target, c.phi.sub, GE, c.bound)
        b.log("K>=" if isinstance(c.phi, Knows) else "box>=", c, f"{step.target}:{to_text(c.phi.sub)} >= {c.bound}")
        return [b]
    b.done.add(("p", c))
    kids = _create(b, c) if step.kind == "create" else _propositional(b, c)
    if len(kids) == 2:
        base = b.path
        kids[0].path, kids[1].path = base + ".0", base + ".1"
    return kids


def expand(b: Branch) -> list:
    step = next_step(b)
    if step is None:
        return [b]
    return apply(b.copy(), step)


def branch_system(b: Branch, labels: Optional[set] = None) -> IneqSystem:
    s = IneqSystem()
    s.extend(b.frozen)
    for c in b.fcons:
        if c.w in b.retired or (labels is not None and c.w not in labels):
            continue
        if not is_closed(c.phi):
            x = b.x(c.w, c.phi)
            if c.bound.terms != {(x,): 1}:
                s.add(x, c.rel, c.bound)
    s.extend(b.numeric)
    return s


def linear_part(s: IneqSystem) -> IneqSystem:
    return IneqSystem([c for c in s.constraints if c.expr.is_linear()])


def relaxation_open(b: Branch) -> bool:
    return linear_feasible(linear_part(branch_system(b))).sat


class _Counter:
    def __init__(self, budget: Optional[int]):
        self.left = budget

    def tick(self):
        if self.left is not None:
            self.left -= 1
            if self.left < 0:
                raise BudgetExceeded("rule budget exhausted")


def saturate_iter(b: Branch, budget: Optional[int] = None, eager: bool = True,
                  counter: Optional[_Counter] = None) -> Iterator[Branch]:
    """Depth-first, left child first; yields saturated branches not refuted early."""
    counter = counter or _Counter(budget)
    stack = [b]
    while stack:
        cur = stack.pop()
        while True:
            step = next_step(cur)
            if step is None:
                yield cur
                break
            counter.tick()
            kids = apply(cur, step)
            if eager and (len(kids) == 2 or step.kind == "create"):
                kids = [k for k in kids if relaxation_open(k)]
            if not kids:
                break
            cur = kids[0]
            stack.extend(reversed(kids[1:]))


def saturate(b: Branch, budget: Optional[int] = None) -> list:
    return list(saturate_iter(b, budget))


# entry points for the pure modal layer


def start_branch(phis: Iterable[Formula], rel: str, bound, agents: Iterable[str] = ()) -> Branch:
    phis = list(phis)
    ags = set(agents)
    for f in phis:
        ags |= outer_agents(f)
    b = Branch(ags)
    w = b.new_label()
    for f in phis:
        b.add(w, f, rel, bound)
    return b


def realize(b: Branch, witness: dict) -> ModModel:
    frame = _frame(b)
    v = {}
    for (w, phi), name in b.xvars.items():
        if isinstance(phi, Var) and name in witness:
            v[phi.name, w] = witness[name]
    return ModModel(frame, v)


def _frame(b: Branch) -> Frame:
    worlds = list(range(b.labels))
    epistemic = {}
    for a in b.agents:
        groups: dict = {}
        for w in worlds:
            groups.setdefault(b.cls[w, a], set()).add(w)
        epistemic[a] = list(groups.values())
    actions: dict = {}
    for u, a, v in b.edges:
        actions.setdefault(a, set()).add((u, v))
    return Frame(worlds, epistemic, actions)


@dataclass
class Result:
    status: str  # SAT | UNSAT | UNKNOWN | PROVED | COUNTERMODEL
    model: object = None
    world: object = 0
    note: str = ""
    trace: list = field(default_factory=list)


def _search(b: Branch, budget, trace: bool):
    """First feasible saturated branch, or the reason none was found."""
    if trace:
        b.trace = []
    unknown = False
    try:
        for leaf in saturate_iter(b, budget):
            s = branch_system(leaf)
            res = feasible(s)
            if res.sat:
                return leaf, res.witness, b.trace
            if res.status == "UNKNOWN":
                unknown = True
    except BudgetExceeded:
        return None, "budget", b.trace
    return None, ("unknown" if unknown else "closed"), b.trace


def sat_mod(phi: Formula, budget: Optional[int] = 200_000, trace: bool = False) -> Result:
    """Is there a finitely branching model where phi takes value 1?"""
    b = start_branch([phi], GE, 1)
    leaf, info, tr = _search(b, budget, trace)
    if leaf is None:
        status = "UNSAT" if info == "closed" else "UNKNOWN"
        return Result(status, note=info, trace=tr or [])
    m = realize(leaf, info)
    val = eval_mod(phi, m, 0)
    assert val == ONE, f"extracted model gives {val}, not 1"
    return Result("SAT", m, 0, trace=tr or [])


def prove_valid(phi: Formula, budget: Optional[int] = 200_000, trace: bool = False) -> Result:
    b = start_branch([phi], LE, "y0")
    b.num("y0", "<", 1)
    leaf, info, tr = _search(b, budget, trace)
    if leaf is None:
        status = "PROVED" if info == "closed" else "UNKNOWN"
        return Result(status, note=info, trace=tr or [])
    m = realize(leaf, info)
    val = eval_mod(phi, m, 0)
    assert val < ONE, f"countermodel gives {val}"
    return Result("COUNTERMODEL", m, 0, trace=tr or [])


def entails_mod(gamma: Iterable[Formula], chi: Formula, budget: Optional[int] = 200_000) -> Result:
    """Direct entailment check: premises at 1, conclusion strictly below 1."""
    gamma = list(gamma)
    b = start_branch(gamma, GE, 1, outer_agents(chi))
    b.add(0, chi, LE, "y0")
    b.num("y0", "<", 1)
    leaf, info, _ = _search(b, budget, False)
    if leaf is None:
        return Result("PROVED" if info == "closed" else "UNKNOWN", note=info)
    return Result("COUNTERMODEL", realize(leaf, info), 0)
