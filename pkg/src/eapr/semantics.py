"""Finite models and exact evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping

from .syntax.formula import (
    Box, CAnd, CNeg, Const, FNeg, Formula, Half, Knows, LImp, PImp, PrAtom, Prod, Var,
)

World = Hashable
ONE = Fraction(1)
ZERO = Fraction(0)
HALF_VALUE = Fraction(1, 2)


class ModelError(ValueError):
    pass


@dataclass
class Frame:
    """Worlds with S5 partitions per agent and arbitrary relations per action.

    Agents without a listed partition see every world alone.
    """

    worlds: list
    epistemic: dict = field(default_factory=dict)  # agent -> list of classes
    actions: dict = field(default_factory=dict)  # action -> set of (from, to)

    def __post_init__(self):
        self.worlds = list(self.worlds)
        if not self.worlds:
            raise ModelError("a frame needs at least one world")
        ws = set(self.worlds)
        self._cls: dict = {}
        for agent, classes in self.epistemic.items():
            classes = [frozenset(c) for c in classes]
            seen: set = set()
            for c in classes:
                if not c or c & seen or not c <= ws:
                    raise ModelError(f"partition for {agent} is not a partition")
                seen |= c
            if seen != ws:
                raise ModelError(f"partition for {agent} misses worlds")
            self.epistemic[agent] = classes
            for c in classes:
                for w in c:
                    self._cls[agent, w] = c
        self._succ: dict = {}
        for action, pairs in self.actions.items():
            pairs = {tuple(p) for p in pairs}
            for u, v in pairs:
                if u not in ws or v not in ws:
                    raise ModelError(f"relation {action} leaves the frame")
                self._succ.setdefault((action, u), []).append(v)
            self.actions[action] = pairs

    def cls(self, agent: str, w: World) -> frozenset:
        return self._cls.get((agent, w), frozenset((w,)))

    def succ(self, action: str, w: World) -> list:
        return self._succ.get((action, w), [])


@dataclass
class EventModel(Frame):
    valuation: dict = field(default_factory=dict)  # var -> set of worlds

    def __post_init__(self):
        super().__post_init__()
        self.valuation = {p: frozenset(ws) for p, ws in self.valuation.items()}


def denote(alpha: Formula, m: EventModel, _memo=None) -> frozenset:
    """Worlds of m where the event formula holds; unknown variables are empty."""
    memo = {} if _memo is None else _memo
    if alpha in memo:
        return memo[alpha]
    if isinstance(alpha, Var):
        out = m.valuation.get(alpha.name, frozenset())
    elif isinstance(alpha, CNeg):
        out = frozenset(m.worlds) - denote(alpha.sub, m, memo)
    elif isinstance(alpha, CAnd):
        out = denote(alpha.left, m, memo) & denote(alpha.right, m, memo)
    elif isinstance(alpha, Knows):
        inner = denote(alpha.sub, m, memo)
        out = frozenset(w for w in m.worlds if m.cls(alpha.agent, w) <= inner)
    elif isinstance(alpha, Box):
        inner = denote(alpha.sub, m, memo)
        out = frozenset(w for w in m.worlds if all(v in inner for v in m.succ(alpha.action, w)))
    else:
        raise TypeError(f"not an event formula: {alpha!r}")
    memo[alpha] = out
    return out


def holds(alpha: Formula, m: EventModel, w: World) -> bool:
    return w in denote(alpha, m)


@dataclass
class SIModel:
    """Outer frame, shared inner event model, and a mass function per (world, agent)."""

    outer: Frame
    inner: EventModel
    mu: dict  # (outer world, agent) -> {inner world: Fraction}

    def __post_init__(self):
        iw = set(self.inner.worlds)
        ow = set(self.outer.worlds)
        for (w, agent), masses in self.mu.items():
            if w not in ow:
                raise ModelError(f"measure at unknown outer world {w!r}")
            masses = {x: Fraction(q) for x, q in masses.items() if Fraction(q) != 0}
            if any(q < 0 for q in masses.values()) or sum(masses.values()) != 1:
                raise ModelError(f"masses at ({w!r}, {agent}) do not form a distribution")
            if not set(masses) <= iw:
                raise ModelError(f"masses at ({w!r}, {agent}) leave the inner frame")
            self.mu[w, agent] = masses

    def measure(self, w: World, agent: str) -> dict:
        try:
            return self.mu[w, agent]
        except KeyError:
            raise ModelError(f"no measure for agent {agent} at {w!r}") from None

    def prob(self, w: World, agent: str, alpha: Formula, memo=None) -> Fraction:
        ext = denote(alpha, self.inner, memo)
        return sum((q for x, q in self.measure(w, agent).items() if x in ext), ZERO)


@dataclass
class ModModel:
    frame: Frame
    v: dict  # (var, world) -> Fraction; missing pairs read as 0

    def __post_init__(self):
        self.v = {k: Fraction(q) for k, q in self.v.items()}
        if any(not 0 <= q <= 1 for q in self.v.values()):
            raise ModelError("valuation outside [0,1]")


def _connective(f: Formula, rec) -> Fraction:
    if isinstance(f, Half):
        return HALF_VALUE
    if isinstance(f, Const):
        return f.value
    if isinstance(f, FNeg):
        return ONE - rec(f.sub)
    if isinstance(f, LImp):
        return min(ONE, ONE - rec(f.left) + rec(f.right))
    if isinstance(f, Prod):
        return rec(f.left) * rec(f.right)
    if isinstance(f, PImp):
        x, y = rec(f.left), rec(f.right)
        return ONE if x <= y else y / x
    raise TypeError(f"unexpected node {f!r}")


def _evaluate(phi: Formula, frame: Frame, w: World, atom) -> Fraction:
    memo: dict = {}

    def rec(f: Formula, u: World) -> Fraction:
        key = (f, u)
        if key in memo:
            return memo[key]
        if isinstance(f, (Var, PrAtom)):
            val = atom(f, u)
        elif isinstance(f, Knows):
            val = min((rec(f.sub, x) for x in frame.cls(f.agent, u)), default=ONE)
        elif isinstance(f, Box):
            val = min((rec(f.sub, x) for x in frame.succ(f.action, u)), default=ONE)
        else:
            val = _connective(f, lambda g: rec(g, u))
        assert ZERO <= val <= ONE, (f, val)
        memo[key] = val
        return val

    return rec(phi, w)


def eval_prob(phi: Formula, m: SIModel, w: World) -> Fraction:
    ev_memo: dict = {}

    def atom(f, u):
        if not isinstance(f, PrAtom):
            raise TypeError(f"bare variable {f!r} in a probabilistic formula")
        return m.prob(u, f.agent, f.event, ev_memo)

    return _evaluate(phi, m.outer, w, atom)


def eval_mod(phi: Formula, m: ModModel, w: World) -> Fraction:
    def atom(f, u):
        if not isinstance(f, Var):
            raise TypeError(f"probability atom {f!r} in a pure modal formula")
        return m.v.get((f.name, u), ZERO)

    return _evaluate(phi, m.frame, w, atom)


def evaluate(phi: Formula, m, w: World) -> Fraction:
    if isinstance(m, SIModel):
        return eval_prob(phi, m, w)
    if isinstance(m, ModModel):
        return eval_mod(phi, m, w)
    raise TypeError(f"not a model: {type(m).__name__}")


def si_to_standard(m: SIModel) -> SIModel:
    """Disjoint union of the outer and inner frames as a single-frame model.

    Outer world w becomes ("o", w) and inner world x becomes ("i", x); the
    outer and inner frames of the result coincide.  Inner copies carry a
    point mass on themselves, which no outer evaluation ever reads.
    """
    worlds = [("o", w) for w in m.outer.worlds] + [("i", x) for x in m.inner.worlds]
    agents = set(m.outer.epistemic) | set(m.inner.epistemic)
    epistemic = {}
    for a in agents:
        classes = [frozenset(("o", w) for w in m.outer.cls(a, w0)) for w0 in m.outer.worlds]
        classes += [frozenset(("i", x) for x in m.inner.cls(a, x0)) for x0 in m.inner.worlds]
        epistemic[a] = list(dict.fromkeys(classes))
    actions = {}
    for a in set(m.outer.actions) | set(m.inner.actions):
        pairs = {(("o", u), ("o", v)) for u, v in m.outer.actions.get(a, ())}
        pairs |= {(("i", u), ("i", v)) for u, v in m.inner.actions.get(a, ())}
        actions[a] = pairs
    valuation = {p: {("i", x) for x in ws} for p, ws in m.inner.valuation.items()}
    frame = EventModel(worlds, epistemic, actions, valuation)
    mu_agents = {a for (_, a) in m.mu}
    mu = {}
    for (w, a), masses in m.mu.items():
        mu[("o", w), a] = {("i", x): q for x, q in masses.items()}
    for x in m.inner.worlds:
        for a in mu_agents:
            mu[("i", x), a] = {("i", x): ONE}
    return SIModel(frame, frame, mu)


def lower_upper(measures: Iterable[Mapping], X: Iterable) -> tuple[Fraction, Fraction]:
    X = set(X)
    vals = [sum((Fraction(q) for x, q in mu.items() if x in X), ZERO) for mu in measures]
    if not vals:
        raise ValueError("empty set of measures")
    return min(vals), max(vals)


def entails_on_model(gamma: Iterable[Formula], chi: Formula, m, w: World) -> bool:
    if all(evaluate(g, m, w) == ONE for g in gamma):
        return evaluate(chi, m, w) == ONE
    return True


# JSON I/O


def _frac(s) -> Fraction:
    return Fraction(str(s))


def _fmt(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _frame_json(fr: Frame, name) -> dict:
    return {
        "epistemic": {a: [sorted((name(w) for w in c)) for c in cls] for a, cls in fr.epistemic.items()},
        "actions": {a: sorted([name(u), name(v)] for u, v in ps) for a, ps in fr.actions.items()},
    }


def model_to_json(m) -> dict:
    if isinstance(m, ModModel):
        return _mod_to_json(m)
    oname = {w: str(w) for w in m.outer.worlds}
    iname = {x: str(x) for x in m.inner.worlds}
    if len(set(oname.values())) < len(oname) or len(set(iname.values())) < len(iname):
        oname = {w: f"w{i}" for i, w in enumerate(m.outer.worlds)}
        iname = {x: f"x{i}" for i, x in enumerate(m.inner.worlds)}
    outer = _frame_json(m.outer, oname.__getitem__)
    inner = _frame_json(m.inner, iname.__getitem__)
    inner["worlds"] = [iname[x] for x in m.inner.worlds]
    inner["valuation"] = {p: sorted(iname[x] for x in ws) for p, ws in m.inner.valuation.items()}
    return {
        "outer_worlds": [oname[w] for w in m.outer.worlds],
        "epistemic": outer["epistemic"],
        "actions": outer["actions"],
        "inner": inner,
        "mu": [
            {"world": oname[w], "agent": a, "masses": {iname[x]: _fmt(q) for x, q in ms.items()}}
            for (w, a), ms in m.mu.items()
        ],
    }


def _mod_to_json(m: ModModel) -> dict:
    name = {w: str(w) for w in m.frame.worlds}
    fr = _frame_json(m.frame, name.__getitem__)
    return {
        "kind": "mod",
        "worlds": [name[w] for w in m.frame.worlds],
        "epistemic": fr["epistemic"],
        "actions": fr["actions"],
        "valuation": [
            {"var": p, "world": name[w], "value": _fmt(q)} for (p, w), q in sorted(m.v.items(), key=str)
        ],
    }


def _mod_from_json(d: dict) -> ModModel:
    frame = Frame(
        d["worlds"],
        {a: [set(c) for c in cls] for a, cls in d.get("epistemic", {}).items()},
        {a: {tuple(p) for p in ps} for a, ps in d.get("actions", {}).items()},
    )
    return ModModel(frame, {(e["var"], e["world"]): _frac(e["value"]) for e in d.get("valuation", [])})


def model_from_json(d: dict):
    if d.get("kind") == "mod":
        return _mod_from_json(d)
    outer = Frame(
        d["outer_worlds"],
        {a: [set(c) for c in cls] for a, cls in d.get("epistemic", {}).items()},
        {a: {tuple(p) for p in ps} for a, ps in d.get("actions", {}).items()},
    )
    i = d["inner"]
    inner = EventModel(
        i["worlds"],
        {a: [set(c) for c in cls] for a, cls in i.get("epistemic", {}).items()},
        {a: {tuple(p) for p in ps} for a, ps in i.get("actions", {}).items()},
        {p: set(ws) for p, ws in i.get("valuation", {}).items()},
    )
    mu = {(e["world"], e["agent"]): {x: _frac(q) for x, q in e["masses"].items()} for e in d["mu"]}
    return SIModel(outer, inner, mu)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_json(json.load(fh))


def dump_model(m, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(m), fh, indent=2)
