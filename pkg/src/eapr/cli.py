"""Command-line front end.

Exit codes: 0 SAT / proved / true, 1 UNSAT / countermodel / false,
2 UNKNOWN, 64 usage, 65 parse error, 66 missing file.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import resources
from typing import Optional, Sequence

from . import __version__
from .fragments import FragmentError, fragment_sat, parse_theory
from .oracle import Bounds, oracle_sat
from .probsat import entailment_formula, sat_fb, valid_fb
from .semantics import evaluate, load_model, model_to_json
from .syntax import ParseError, classify, classify_theory, parse, to_text
from .syntax.classify import lit_of
from .syntax.formula import const, pratoms
from .tableau import prove_valid, sat_mod

EX_OK, EX_NO, EX_UNKNOWN = 0, 1, 2
EX_USAGE, EX_DATAERR, EX_NOINPUT = 64, 65, 66


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EX_USAGE)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except FileNotFoundError:
        raise FileNotFoundError(path) from None


def _formulas(args) -> list:
    """The formula argument, or every line of --file."""
    if getattr(args, "file", None):
        return parse_theory(_read(args.file))
    if not args.formula:
        raise UsageError("give a formula or --file")
    return [parse(args.formula)]


def _is_prob(fs) -> bool:
    return any(pratoms(f) for f in fs)


def _conj(fs):
    from .syntax.formula import odot_all, delta

    if len(fs) == 1:
        return fs[0]
    return odot_all([delta(f) for f in fs])


def _emit_witness(path: Optional[str], model) -> None:
    if path and model is not None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(model_to_json(model), fh, indent=2)


def _status_code(status: str) -> int:
    return {"SAT": EX_OK, "PROVED": EX_OK, "UNSAT": EX_NO, "COUNTERMODEL": EX_NO}.get(status, EX_UNKNOWN)


# subcommands


def cmd_parse(args) -> int:
    f = parse(args.formula, args.layer)
    print(to_text(f))
    if args.tree:
        print(repr(f))
    return EX_OK


def cmd_eval(args) -> int:
    m = load_model(args.model)
    f = parse(args.formula)
    worlds = m.frame.worlds if hasattr(m, "frame") else m.outer.worlds
    w = args.world
    if w not in worlds:
        raise UsageError(f"world {w!r} is not in the model")
    q = evaluate(f, m, w)
    print(q if isinstance(q, Fraction) and q.denominator != 1 else int(q))
    return EX_OK


def _sat(fs, mode: str, budget: int):
    if mode in ("fragment", "auto") and _is_prob(fs):
        kind = classify_theory(fs)
        if kind is not None:
            return fragment_sat(fs), f"fragment ({kind})"
        if mode == "fragment":
            raise UsageError("input is neither a UPR nor an EPR+ theory")
    elif mode == "fragment":
        raise UsageError("fragment mode needs probabilistic input")
    if _is_prob(fs):
        m = "pathlocal" if mode == "pathlocal" else "global"
        return sat_fb(fs, m, budget=budget), m
    return sat_mod(_conj(fs), budget=budget), "tableau"


def cmd_sat(args) -> int:
    fs = _formulas(args)
    t = time.perf_counter()
    r, how = _sat(fs, args.mode, args.budget)
    print(r.status)
    if args.verbose:
        print(f"# solver: {how}; {time.perf_counter() - t:.3f}s" + (f"; {r.note}" if r.note else ""))
    if r.status == "SAT":
        _emit_witness(args.witness, r.model)
    return _status_code(r.status)


def _prove(f, budget: int, trace: bool):
    if pratoms(f):
        return valid_fb(f, budget=budget)
    return prove_valid(f, budget=budget, trace=trace)


def cmd_prove(args) -> int:
    f = parse(args.formula)
    r = _prove(f, args.budget, args.trace)
    print({"PROVED": "proved", "COUNTERMODEL": "countermodel"}.get(r.status, "unknown"))
    for line in r.trace:
        print(line)
    if r.status == "COUNTERMODEL":
        _emit_witness(args.witness, r.model)
    return _status_code(r.status)


def cmd_entails(args) -> int:
    premises = [parse(p) for p in args.premises]
    goal = parse(args.goal)
    r = _prove(entailment_formula(premises, goal), args.budget, False)
    print({"PROVED": "true", "COUNTERMODEL": "false"}.get(r.status, "unknown"))
    if r.status == "COUNTERMODEL":
        _emit_witness(args.witness, r.model)
    return _status_code(r.status)


def cmd_classify(args) -> int:
    if args.file:
        fs = parse_theory(_read(args.file))
        print(classify_theory(fs) or "none")
        return EX_OK
    f = parse(args.formula)
    c = classify(f)
    line = c.tag + (" (proper)" if c.proper else "")
    lit = lit_of(f)
    if c.tag == "UPR_rule" and lit is not None:
        # a negated diamond literal stands for a rule with an empty head
        line += f"  {to_text(lit.negate().formula())} -> {to_text(const(0))}"
    print(line)
    return EX_OK


def cmd_oracle(args) -> int:
    f = parse(args.formula)
    r = oracle_sat(f, Bounds(args.outer, args.inner, args.grid))
    print(r.status, f"({r.checked} candidates)")
    if r.sat:
        _emit_witness(args.witness, r.model)
    return EX_OK if r.sat else EX_UNKNOWN


def _corpus() -> list:
    text = resources.files("eapr").joinpath("data/selftest.txt").read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            cmd, formula, expected = (x.strip() for x in line.split("|"))
            out.append((cmd, formula, expected))
    return out


def _run_case(case) -> tuple:
    cmd, formula, expected = case
    if cmd == "sat":
        got = _sat([parse(formula)], "auto", 200_000)[0].status
    elif cmd == "prove":
        got = _prove(parse(formula), 200_000, False).status
    elif cmd == "classify":
        got = classify(parse(formula)).tag
    elif cmd == "theory":
        got = fragment_sat(parse_theory(formula.replace(";", "\n"))).status
    else:
        raise ValueError(f"unknown corpus command {cmd!r}")
    return case, got


def _random_cases(n: int, seed: int) -> list:
    """Oracle witnesses must be matched by the tableau."""
    from .generate import random_mod

    rng = random.Random(seed)
    return [random_mod(rng, rng.randint(2, 7), 2) for _ in range(n)]


def cmd_selftest(args) -> int:
    cases = _corpus()
    failures = 0
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        for (cmd, formula, expected), got in pool.map(_run_case, cases):
            ok = got == expected
            failures += not ok
            print(f"{'ok  ' if ok else 'FAIL'} {cmd:8s} {formula}  expected {expected}, got {got}")
    for f in _random_cases(args.random, args.seed):
        o = oracle_sat(f, Bounds(2, 1, 2))
        r = sat_mod(f)
        ok = not o.sat or r.status == "SAT"
        failures += not ok
        print(f"{'ok  ' if ok else 'FAIL'} random   {to_text(f)}  oracle {o.status}, solver {r.status}")
    print(f"{len(cases) + args.random - failures} passed, {failures} failed")
    return EX_OK if failures == 0 else EX_NO


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eapr", description="Solvers for a fuzzy probabilistic logic of knowledge and actions.")
    p.add_argument("--version", action="version", version=f"eapr {__version__}")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized commands")
    p.add_argument("--jobs", type=int, default=1, help="worker cap")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("parse", help="parse and pretty-print a formula")
    s.add_argument("formula")
    s.add_argument("--layer", choices=("auto", "event", "mod", "prob"), default="auto")
    s.add_argument("--tree", action="store_true", help="also print the syntax tree")
    s.set_defaults(run=cmd_parse)

    s = sub.add_parser("eval", help="evaluate a formula on a JSON model")
    s.add_argument("--model", required=True)
    s.add_argument("--formula", required=True)
    s.add_argument("--world", required=True)
    s.set_defaults(run=cmd_eval)

    s = sub.add_parser("sat", help="satisfiability at value 1")
    s.add_argument("formula", nargs="?")
    s.add_argument("--file", help="theory file, one formula per line")
    s.add_argument("--mode", choices=("global", "pathlocal", "fragment", "auto"), default="auto")
    s.add_argument("--witness", help="write the witness model as JSON")
    s.add_argument("--budget", type=int, default=200_000, help="rule applications before giving up")
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(run=cmd_sat)

    s = sub.add_parser("prove", help="validity over finitely branching frames")
    s.add_argument("formula")
    s.add_argument("--witness", help="write a countermodel as JSON")
    s.add_argument("--trace", action="store_true", help="print one line per rule application")
    s.add_argument("--budget", type=int, default=200_000)
    s.set_defaults(run=cmd_prove)

    s = sub.add_parser("entails", help="do the premises entail the goal")
    s.add_argument("premises", nargs="*")
    s.add_argument("--goal", required=True)
    s.add_argument("--witness")
    s.add_argument("--budget", type=int, default=200_000)
    s.set_defaults(run=cmd_entails)

    s = sub.add_parser("classify", help="fragment of a formula or theory file")
    s.add_argument("formula", nargs="?")
    s.add_argument("--file")
    s.set_defaults(run=cmd_classify)

    s = sub.add_parser("oracle", help="bounded grid search for a model")
    s.add_argument("formula")
    s.add_argument("--outer", type=int, default=2)
    s.add_argument("--inner", type=int, default=3)
    s.add_argument("--grid", type=int, default=4)
    s.add_argument("--witness")
    s.set_defaults(run=cmd_oracle)

    s = sub.add_parser("selftest", help="run the bundled regression corpus")
    s.add_argument("--random", type=int, default=0, help="also check N random formulas against the oracle")
    s.set_defaults(run=cmd_selftest)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "classify" and not (args.formula or args.file):
        print("eapr classify: give a formula or --file", file=sys.stderr)
        return EX_USAGE
    try:
        return args.run(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EX_DATAERR
    except FileNotFoundError as e:
        print(f"no such file: {e}", file=sys.stderr)
        return EX_NOINPUT
    except (UsageError, FragmentError) as e:
        print(f"eapr: {e}", file=sys.stderr)
        return EX_USAGE


if __name__ == "__main__":
    sys.exit(main())
