"""redlab: typed reduction rules, principal types and weak subject reduction."""
from .acceptability import (ARBITRARY, FULL, FULL_PRESERVING, REJECTED, WEAK,
                            WEAKLY_RELATED, check_sr_instances, classify_calculus,
                            classify_rule)
from .calculus import (BUILTIN_NAMES, Calculus, builtin, load_calculus, parse_calculus,
                       pretty_print, validate)
from .infer import reconstruct, reconstruct_schema, typecheck
from .meaning import denotation, sense
from .rewrite import joinable, normalize, reduction_graph, step
from .terms import alpha_eq, canonicalize, parse_term, show, substitute
from .typelang import FROWN, parse_type, show_type, unify

__version__ = "0.1.0"

__all__ = [
    "ARBITRARY", "FULL", "FULL_PRESERVING", "REJECTED", "WEAK", "WEAKLY_RELATED",
    "check_sr_instances", "classify_calculus", "classify_rule",
    "BUILTIN_NAMES", "Calculus", "builtin", "load_calculus", "parse_calculus",
    "pretty_print", "validate", "reconstruct", "reconstruct_schema", "typecheck",
    "denotation", "sense", "joinable", "normalize", "reduction_graph", "step",
    "alpha_eq", "canonicalize", "parse_term", "show", "substitute",
    "FROWN", "parse_type", "show_type", "unify",
]
