import itertools
from fractions import Fraction as F

from hypothesis import given, strategies as st

from eapr.constraints import IneqSystem, Poly, feasible, linear_feasible, poly_feasible, substitute_check
from eapr.constraints.poly import Constraint

X, Y = Poly.var("x"), Poly.var("y")


def system(*rows) -> IneqSystem:
    s = IneqSystem()
    for lhs, rel, rhs in rows:
        s.add(lhs, rel, rhs)
    return s


def test_linear_examples():
    assert linear_feasible(system((X, "<=", F(1, 2)), (X, ">=", F(3, 5)))).status == "UNSAT"
    r = linear_feasible(system((X + Y, "=", 1), (X, ">=", F(3, 10))))
    assert r.sat and r.witness["x"] + r.witness["y"] == 1 and r.witness["x"] >= F(3, 10)
    assert linear_feasible(system((X, "<", 1), (X, ">=", 1))).status == "UNSAT"


def test_variables_live_in_unit_box():
    assert linear_feasible(system((X, ">=", 2))).status == "UNSAT"
    assert linear_feasible(system((X + Y, ">=", 2))).sat


def test_strict_rows_are_not_relaxed():
    r = linear_feasible(system((X, "<", Y), (Y, "<", 1), (X, ">", F(9, 10))))
    assert r.sat and F(9, 10) < r.witness["x"] < r.witness["y"] < 1


def test_nonlinear_examples():
    assert poly_feasible(system((X * Y, ">=", F(1, 2)), (X, "<=", F(3, 5)), (Y, "<=", F(3, 5)))).status == "UNSAT"
    r = poly_feasible(system((X * X, "=", F(1, 4))))
    assert r.sat and r.witness["x"] == F(1, 2)
    assert poly_feasible(system((X * Y, "=", Y), (Y, ">=", F(1, 2)), (X, "<=", F(1, 2)))).status == "UNSAT"


def test_product_implication_shape():
    # y2 <= P*y1 with y1 > 0 and y2 >= y1 forces P = 1
    P = Poly.var("p")
    s = system((Y, "<=", P * X), (X, ">", 0), (Y, ">=", X), (P, "<", 1))
    # infeasible only in the limit x -> 0, which the box search cannot close
    assert feasible(s).status in ("UNSAT", "UNKNOWN")
    s.add(X, ">=", F(1, 10))
    assert feasible(s).status == "UNSAT"


coef = st.integers(-3, 3)
row = st.tuples(coef, coef, coef, st.sampled_from(["<=", "<", "=", ">="]), st.integers(-3, 4))
systems = st.lists(row, min_size=1, max_size=4)


def build(rows) -> IneqSystem:
    s = IneqSystem(extra_vars={"x", "y", "z"})
    for a, b, c, rel, d in rows:
        s.add(a * X + b * Y + c * Poly.var("z"), rel, F(d, 2))
    return s


def grid_hit(s: IneqSystem, g: int = 4) -> bool:
    pts = [F(k, g) for k in range(g + 1)]
    return any(
        all(c.holds(dict(zip("xyz", p))) for c in s.constraints)
        for p in itertools.product(pts, repeat=3)
    )


@given(systems)
def test_simplex_agrees_with_interval_search(rows):
    s = build(rows)
    lin = linear_feasible(s)
    assert lin.status in ("SAT", "UNSAT")
    if lin.sat:
        assert substitute_check(s, lin.witness)
    box = poly_feasible(s, budget=4000, use_lp=False)
    if box.status != "UNKNOWN":
        assert box.status == lin.status
    if grid_hit(s):
        assert lin.sat


@given(systems, row)
def test_adding_a_row_never_helps(rows, extra):
    if linear_feasible(build(rows)).status == "UNSAT":
        assert linear_feasible(build(rows + [extra])).status == "UNSAT"


@given(st.lists(st.tuples(coef, coef, st.sampled_from(["<=", ">="]), st.integers(-2, 4)), min_size=1, max_size=3))
def test_nonlinear_witnesses_substitute(rows):
    s = IneqSystem()
    for a, b, rel, d in rows:
        s.add(a * X * Y + b * Y, rel, F(d, 4))
    r = poly_feasible(s)
    if r.sat:
        assert substitute_check(s, r.witness)
    lr = poly_feasible(s, use_lp=False)
    if r.status != "UNKNOWN" and lr.status != "UNKNOWN":
        assert r.status == lr.status


def test_constraint_normal_form():
    c = Constraint.make("x", ">", F(1, 2))
    assert c.rel == "<" and c.holds({"x": F(3, 4)}) and not c.holds({"x": F(1, 2)})
