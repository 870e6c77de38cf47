"""Sound but incomplete feasibility for polynomial systems over [0,1].

Boxes are refuted by exact interval bounds (every variable is nonnegative,
so a monomial ranges between the products of its endpoints).  With
``use_lp`` the refutation also uses a McCormick relaxation, and witnesses
are searched by fixing a set of variables that linearizes the system and
solving the rest exactly.  Constraints of the form ``v*q rel 0`` are split
into the cases ``v = 0`` and ``v > 0``.
"""

from __future__ import annotations

from fractions import Fraction

from .poly import Constraint, FeasibilityResult, IneqSystem, Poly, substitute_check
from .simplex import _presolve, linear_feasible

HALF = Fraction(1, 2)


class _Budget:
    def __init__(self, nodes: int):
        self.left = nodes

    def spend(self) -> bool:
        self.left -= 1
        return self.left >= 0


def _range(p: Poly, box: dict) -> tuple[Fraction, Fraction]:
    lo = hi = Fraction(0)
    for m, c in p.terms.items():
        a = b = Fraction(1)
        for v in m:
            a *= box[v][0]
            b *= box[v][1]
        if c > 0:
            lo += c * a
            hi += c * b
        else:
            lo += c * b
            hi += c * a
    return lo, hi


def _refuted(c: Constraint, box: dict) -> bool:
    lo, hi = _range(c.expr, box)
    if c.rel == "<=":
        return lo > 0
    if c.rel == "<":
        return lo >= 0
    return lo > 0 or hi < 0


def _certain(c: Constraint, box: dict) -> bool:
    lo, hi = _range(c.expr, box)
    if c.rel == "<=":
        return hi <= 0
    if c.rel == "<":
        return hi < 0
    return lo == hi == 0


def _check(cons, env) -> bool:
    return all(c.holds(env) for c in cons)


def _interval_search(cons, box, budget: _Budget):
    """Plain branch and prune; returns (status, witness)."""
    stack = [(box, cons)]
    exhausted = False
    while stack:
        box, cons = stack.pop()
        if not budget.spend():
            exhausted = True
            break
        if any(_refuted(c, box) for c in cons):
            continue
        live = [c for c in cons if not _certain(c, box)]
        center = {v: (lo + hi) / 2 for v, (lo, hi) in box.items()}
        if not live or _check(live, center):
            return "SAT", center
        vs = {v for c in live for v in c.expr.variables()}
        v = max(sorted(vs), key=lambda u: box[u][1] - box[u][0])
        lo, hi = box[v]
        if hi == lo:
            continue
        mid = (lo + hi) / 2
        left, right = dict(box), dict(box)
        left[v] = (lo, mid)
        right[v] = (mid, hi)
        stack.append((right, live))
        stack.append((left, live))
    return ("UNKNOWN" if exhausted else "UNSAT"), None


def _mccormick(cons, box) -> IneqSystem:
    """Linear relaxation of cons on box; auxiliary columns stand for monomials."""
    out = IneqSystem()
    aux: dict = {}

    def lift(m: tuple):
        if len(m) == 1:
            return m[0], box[m[0]]
        if m in aux:
            return aux[m]
        x, (xl, xu) = lift(m[:-1])
        y = m[-1]
        yl, yu = box[y]
        z = "mc_" + "_".join(m)
        X, Y, Z = Poly.var(x), Poly.var(y), Poly.var(z)
        out.add(Z, ">=", xl * Y + yl * X - xl * yl)
        out.add(Z, ">=", xu * Y + yu * X - xu * yu)
        out.add(Z, "<=", xu * Y + yl * X - xu * yl)
        out.add(Z, "<=", xl * Y + yu * X - xl * yu)
        aux[m] = (z, (xl * yl, xu * yu))
        return aux[m]

    for c in cons:
        lin = Poly()
        for m, k in c.expr.terms.items():
            if len(m) <= 1:
                lin = lin + Poly({m: k})
            else:
                lin = lin + k * Poly.var(lift(m)[0])
        out.constraints.append(Constraint(lin, c.rel))
    for v, (lo, hi) in box.items():
        if lo > 0:
            out.add(v, ">=", lo)
        if hi < 1:
            out.add(v, "<=", hi)
    return out


def _cover(cons) -> list:
    """Variables whose fixing leaves every monomial linear."""
    monos = {m for c in cons for m in c.expr.terms if len(m) >= 2}
    count: dict = {}
    for m in monos:
        for v in m:
            count[v] = count.get(v, 0) + 1
    chosen: set = set()
    for m in sorted(monos, key=lambda m: (-len(m), m)):
        rest = [v for v in m if v not in chosen]
        # a repeated variable must be fixed itself
        while len(rest) > 1 or (rest and m.count(rest[0]) > 1):
            v = max(rest, key=lambda u: (count[u], u))
            chosen.add(v)
            rest = [u for u in rest if u != v]
    return sorted(chosen)


def _linear_attempt(cons, fixed: dict):
    sub = [Constraint(c.expr.substitute(fixed), c.rel) for c in cons]
    res = linear_feasible(IneqSystem(sub))
    if res.sat:
        env = dict(fixed)
        env.update(res.witness)
        return env
    return None


def _lp_search(cons, box, budget: _Budget, all_vars):
    stack = [(box, cons)]
    exhausted = False
    while stack:
        box, cons = stack.pop()
        if not budget.spend():
            exhausted = True
            break
        if any(_refuted(c, box) for c in cons):
            continue
        live = [c for c in cons if not _certain(c, box)]
        if not live:
            return "SAT", {v: (lo + hi) / 2 for v, (lo, hi) in box.items()}
        relax = linear_feasible(_mccormick(live, box))
        if not relax.sat:
            continue
        guess = {v: relax.witness.get(v, (box[v][0] + box[v][1]) / 2) for v in box}
        if _check(live, guess):
            return "SAT", guess
        cover = _cover(live)
        for pick in (guess, {v: (lo + hi) / 2 for v, (lo, hi) in box.items()}):
            env = _linear_attempt(live + _box_rows(box), {v: pick[v] for v in cover})
            if env is not None:
                for v in box:
                    env.setdefault(v, guess[v])
                if _check(live, env):
                    return "SAT", env
        vs = cover or sorted({v for c in live for v in c.expr.variables()})
        v = max(vs, key=lambda u: (box[u][1] - box[u][0], u))
        lo, hi = box[v]
        if hi - lo < Fraction(1, 2**40):
            exhausted = True
            continue
        mid = (lo + hi) / 2
        left, right = dict(box), dict(box)
        left[v] = (lo, mid)
        right[v] = (mid, hi)
        stack.append((right, live))
        stack.append((left, live))
    return ("UNKNOWN" if exhausted else "UNSAT"), None


def _box_rows(box) -> list:
    rows = []
    for v, (lo, hi) in box.items():
        if lo > 0:
            rows.append(Constraint.make(v, ">=", lo))
        if hi < 1:
            rows.append(Constraint.make(v, "<=", hi))
    return rows


def _factor(c: Constraint):
    """A variable dividing every monomial of a nonlinear constraint."""
    if c.expr.is_linear() or () in c.expr.terms:
        return None
    common = None
    for m in c.expr.terms:
        common = set(m) if common is None else common & set(m)
        if not common:
            return None
    v = min(common)
    quot = {}
    for m, k in c.expr.terms.items():
        rest = list(m)
        rest.remove(v)
        quot[tuple(rest)] = k
    return v, Poly(quot)


def _decide(cons: list, names: list, budget: _Budget, use_lp: bool):
    pre = _presolve(cons, names)
    if pre is None:
        return "UNSAT", None
    rows, bounds, fixed = pre
    free = [v for v in names if v not in fixed]
    if all(c.expr.is_linear() for c in rows) and use_lp:
        res = linear_feasible(IneqSystem(rows + _bound_rows(bounds, free)))
        if not res.sat:
            return "UNSAT", None
        env = dict(fixed)
        env.update({v: res.witness.get(v, bounds.lo[v]) for v in free})
        return "SAT", env
    if use_lp:
        for i, c in enumerate(rows):
            hit = _factor(c)
            if hit is None:
                continue
            v, q = hit
            rest = rows[:i] + rows[i + 1:] + _bound_rows(bounds, free)
            if c.rel == "<":
                cases = [[Constraint.make(v, ">", 0), Constraint(q, "<")]]
            else:
                cases = [
                    [Constraint.make(v, "=", 0)],
                    [Constraint.make(v, ">", 0), Constraint(q, c.rel)],
                ]
            statuses = []
            for extra in cases:
                st, env = _decide(rest + extra, free, budget, use_lp)
                if st == "SAT":
                    env.update(fixed)
                    return "SAT", env
                statuses.append(st)
            return ("UNSAT" if all(s == "UNSAT" for s in statuses) else "UNKNOWN"), None
    rows = rows + _strict_bound_rows(bounds, free)
    box = {v: (bounds.lo[v], bounds.hi[v]) for v in free}
    if use_lp:
        st, env = _lp_search(rows, box, budget, free)
    else:
        st, env = _interval_search(rows, box, budget)
    if st == "SAT":
        env.update(fixed)
    return st, env


def _bound_rows(bounds, free) -> list:
    rows = []
    for v in free:
        if bounds.lo[v] > 0 or bounds.lo_strict[v]:
            rows.append(Constraint.make(v, ">" if bounds.lo_strict[v] else ">=", bounds.lo[v]))
        if bounds.hi[v] < 1 or bounds.hi_strict[v]:
            rows.append(Constraint.make(v, "<" if bounds.hi_strict[v] else "<=", bounds.hi[v]))
    return rows


def _strict_bound_rows(bounds, free) -> list:
    rows = []
    for v in free:
        if bounds.lo_strict[v]:
            rows.append(Constraint.make(v, ">", bounds.lo[v]))
        if bounds.hi_strict[v]:
            rows.append(Constraint.make(v, "<", bounds.hi[v]))
    return rows


def poly_feasible(s: IneqSystem, budget: int = 2000, use_lp: bool = True) -> FeasibilityResult:
    """Decide a polynomial system where possible.

    ``use_lp=False`` runs the pure interval search, which never calls the
    simplex and serves as an independent cross-check of it.
    """
    names = sorted(s.variables())
    st, env = _decide(list(s.constraints), names, _Budget(budget), use_lp)
    if st == "SAT":
        for v in names:
            env.setdefault(v, Fraction(0))
        env = {v: env[v] for v in names}
        if not substitute_check(s, env):
            raise AssertionError("polynomial witness failed the substitution check")
        return FeasibilityResult("SAT", env, note="lp-assisted prune" if use_lp else "interval prune")
    return FeasibilityResult(st, note="budget exhausted" if st == "UNKNOWN" else "all boxes refuted")


def feasible(s: IneqSystem, budget: int = 2000) -> FeasibilityResult:
    """Exact simplex for linear systems, otherwise the LP-assisted prune."""
    if s.is_linear():
        return linear_feasible(s)
    return poly_feasible(s, budget)
