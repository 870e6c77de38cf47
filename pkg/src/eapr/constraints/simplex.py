"""Exact linear feasibility over [0,1] boxes.

Strict rows get a shared slack ``eps``; the system is feasible iff the
largest attainable ``eps`` is positive, in which case the optimal vertex
satisfies every strict row as it stands.
"""

from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq

from .poly import Constraint, FeasibilityResult, IneqSystem, substitute_check

ZERO = mpq(0)
ONE = mpq(1)


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class _Bounds:
    """Interval bounds with strictness flags, tightened by single-variable rows."""

    def __init__(self, names):
        self.lo = {v: Fraction(0) for v in names}
        self.hi = {v: Fraction(1) for v in names}
        self.lo_strict = {v: False for v in names}
        self.hi_strict = {v: False for v in names}

    def upper(self, v, b: Fraction, strict: bool) -> None:
        if b < self.hi[v] or (b == self.hi[v] and strict):
            self.hi[v], self.hi_strict[v] = b, strict

    def lower(self, v, b: Fraction, strict: bool) -> None:
        if b > self.lo[v] or (b == self.lo[v] and strict):
            self.lo[v], self.lo_strict[v] = b, strict

    def empty(self, v) -> bool:
        lo, hi = self.lo[v], self.hi[v]
        return lo > hi or (lo == hi and (self.lo_strict[v] or self.hi_strict[v]))

    def fixed(self, v) -> bool:
        return self.lo[v] == self.hi[v]


def _presolve(cons: list[Constraint], names):
    """Move single-variable rows into bounds and substitute fixed variables."""
    bounds = _Bounds(names)
    fixed: dict = {}
    rows = list(cons)
    changed = True
    while changed:
        changed = False
        keep = []
        for c in rows:
            e = c.expr.substitute(fixed) if fixed else c.expr
            vs = e.variables()
            if not vs:
                k = e.constant
                ok = k <= 0 if c.rel == "<=" else k < 0 if c.rel == "<" else k == 0
                if not ok:
                    return None
                continue
            if len(vs) == 1 and e.is_linear():
                (v,) = vs
                a = e.terms[(v,)]
                b = -e.constant / a
                strict = c.rel == "<"
                if c.rel == "=":
                    bounds.upper(v, b, False)
                    bounds.lower(v, b, False)
                elif a > 0:
                    bounds.upper(v, b, strict)
                else:
                    bounds.lower(v, b, strict)
                if bounds.empty(v):
                    return None
                continue
            keep.append(Constraint(e, c.rel))
        rows = keep
        for v in names:
            if v not in fixed and bounds.fixed(v):
                fixed[v] = bounds.lo[v]
                changed = True
    return rows, bounds, fixed


class _Tableau:
    def __init__(self, rows, rhs, kinds, ncols):
        # rows: list of dense coefficient lists; kinds: "<=" or "="
        self.ncols = ncols
        self.basis = []
        self.t = []
        nslack = sum(1 for k in kinds if k == "<=")
        self.first_art = ncols + nslack
        width = ncols + nslack + len(rows)
        si = ncols
        self.art_cols = []
        for i, (r, b, k) in enumerate(zip(rows, rhs, kinds)):
            row = list(r) + [ZERO] * (width - ncols) + [b]
            slack = None
            if k == "<=":
                slack = si
                row[si] = ONE
                si += 1
            if b < 0:
                row = [-x for x in row]
            if slack is not None and row[slack] == ONE:
                self.basis.append(slack)
            else:
                a = self.first_art + i
                row[a] = ONE
                self.basis.append(a)
                self.art_cols.append(a)
            self.t.append(row)
        self.width = width

    def pivot(self, r: int, c: int) -> None:
        t = self.t
        pr = t[r]
        p = pr[c]
        if p != ONE:
            pr = [x / p for x in pr]
            t[r] = pr
        nz = [j for j, x in enumerate(pr) if x]
        for i, row in enumerate(t):
            if i != r:
                f = row[c]
                if f:
                    for j in nz:
                        row[j] -= f * pr[j]
        obj = self.obj
        f = obj[c]
        if f:
            for j in nz:
                obj[j] -= f * pr[j]
        self.basis[r] = c

    def set_objective(self, coeffs: dict) -> None:
        # minimize sum coeffs[j] x_j; obj row holds reduced costs and -value
        obj = [ZERO] * (self.width + 1)
        for j, c in coeffs.items():
            obj[j] = c
        for i, b in enumerate(self.basis):
            f = obj[b]
            if f:
                row = self.t[i]
                for j, x in enumerate(row):
                    if x:
                        obj[j] -= f * x
        self.obj = obj

    def optimize(self, allowed) -> None:
        t = self.t
        while True:
            enter = next((j for j in allowed if self.obj[j] < 0), None)
            if enter is None:
                return
            best, leave = None, None
            for i, row in enumerate(t):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        best, leave = ratio, i
            if leave is None:
                raise ArithmeticError("unbounded objective")
            self.pivot(leave, enter)

    def value(self, j):
        for i, b in enumerate(self.basis):
            if b == j:
                return self.t[i][-1]
        return ZERO


def _solve(rows, rhs, kinds, ncols, maximize=None):
    """Phase one then optional maximization of a single column.

    Returns (feasible, values of the first ncols columns, optimum).
    """
    tab = _Tableau(rows, rhs, kinds, ncols)
    real_cols = list(range(tab.first_art))
    if tab.art_cols:
        tab.set_objective({a: ONE for a in tab.art_cols})
        tab.optimize(list(range(tab.width)))
        if -tab.obj[-1] > 0:
            return False, None, None
        # drive artificials out of the basis
        arts = set(tab.art_cols)
        drop = []
        for i, b in enumerate(tab.basis):
            if b in arts:
                j = next((j for j in real_cols if tab.t[i][j]), None)
                if j is None:
                    drop.append(i)
                else:
                    tab.pivot(i, j)
        for i in reversed(drop):
            del tab.t[i]
            del tab.basis[i]
    opt = None
    if maximize is not None:
        tab.set_objective({maximize: -ONE})
        tab.optimize(real_cols)
        opt = tab.value(maximize)
    return True, [tab.value(j) for j in range(ncols)], opt


def linear_feasible(s: IneqSystem) -> FeasibilityResult:
    if not s.is_linear():
        raise ValueError("linear_feasible needs a linear system")
    names = sorted(s.variables())
    pre = _presolve(s.constraints, names)
    if pre is None:
        return FeasibilityResult("UNSAT", note="presolve: contradictory bounds")
    rows_c, bounds, fixed = pre
    free = [v for v in names if v not in fixed]
    # shift x = lo + x' so every column is nonnegative
    col = {v: i for i, v in enumerate(free)}
    rows, rhs, kinds, strict = [], [], [], []
    n = len(free)

    def emit(coeffs: dict, const: Fraction, rel: str):
        r = [ZERO] * (n + 1)
        b = -const
        for v, a in coeffs.items():
            r[col[v]] = mpq(a)
            b -= a * bounds.lo[v]
        rows.append(r)
        rhs.append(mpq(b))
        kinds.append("=" if rel == "=" else "<=")
        strict.append(rel == "<")

    for c in rows_c:
        coeffs = {m[0]: a for m, a in c.expr.terms.items() if m}
        emit(coeffs, c.expr.constant, c.rel)
    for v in free:
        emit({v: Fraction(1)}, -bounds.hi[v], "<" if bounds.hi_strict[v] else "<=")
        if bounds.lo_strict[v]:
            emit({v: Fraction(-1)}, bounds.lo[v], "<")
    any_strict = any(strict)
    ncols = n + 1 if any_strict else n
    if any_strict:
        for r, st in zip(rows, strict):
            if st:
                r[n] = ONE
        r = [ZERO] * (n + 1)
        r[n] = ONE
        rows.append(r)
        rhs.append(ONE)
        kinds.append("<=")
    else:
        rows = [r[:n] for r in rows]
    ok, vals, opt = _solve(rows, rhs, kinds, ncols, maximize=n if any_strict else None)
    if not ok:
        return FeasibilityResult("UNSAT", note="simplex phase one")
    if any_strict and opt <= 0:
        return FeasibilityResult("UNSAT", note="strict rows: best slack is zero")
    witness = dict(fixed)
    for v in free:
        witness[v] = bounds.lo[v] + _frac(vals[col[v]])
    if not substitute_check(s, witness):
        raise AssertionError("simplex witness failed the substitution check")
    return FeasibilityResult("SAT", witness, note="simplex")
