from .formula import *  # noqa: F401,F403
from .formula import Formula, closure_neg, desugar, size
from .parser import ParseError, parse, to_text
from .classify import FragmentClass, Lit, classify, classify_theory, lit_of, member_clause

__all__ = [
    "Formula", "ParseError", "parse", "to_text", "desugar", "size", "closure_neg",
    "FragmentClass", "Lit", "classify", "classify_theory", "lit_of", "member_clause",
]
