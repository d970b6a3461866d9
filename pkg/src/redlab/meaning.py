"""Sense and denotation of a derivation.

The sense is the set of subjects annotated in one reconstruction branch's
derivation (deduplicated up to alpha-equivalence); the denotation is the
end-term's leftmost-outermost normal form.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .calculus import Calculus
from .infer import reconstruct
from .rewrite import DEFAULT_MAX_STEPS, Cycle, NormalForm, normalize
from .terms import canonicalize, show

__all__ = ["Sense", "EndTermNF", "NoNormalFormWithinBounds", "Untypable", "NoSuchBranch",
           "sense", "denotation"]


class Untypable(ValueError):
    pass


class NoSuchBranch(IndexError):
    pass


@dataclass(frozen=True)
class Sense:
    """``terms`` holds canonical forms; ``shown`` the first occurrence of each."""
    terms: frozenset
    end_term: object
    shown: tuple = field(default=(), compare=False)

    def to_json(self) -> list:
        return sorted(show(t) for t in self.shown) if self.shown else sorted(
            show(t) for t in self.terms)


@dataclass(frozen=True)
class EndTermNF:
    """``term`` is canonical, so alpha-variants compare equal; ``shown`` is the reduct."""
    term: object
    shown: object = field(default=None, compare=False)

    def to_json(self) -> dict:
        return {"normal_form": show(self.shown if self.shown is not None else self.term)}


@dataclass(frozen=True)
class NoNormalFormWithinBounds:
    reason: str          # "cycle" | "step-limit"

    def to_json(self) -> dict:
        return {"normal_form": None, "reason": self.reason}


def sense(calc: Calculus, t, branch: int = 0) -> Sense:
    recon = reconstruct(calc, t)
    if not recon.branches:
        raise Untypable(f"{show(t)} has no derivation in {calc.name}")
    if not 0 <= branch < len(recon.branches):
        raise NoSuchBranch(f"branch {branch} out of range (0..{len(recon.branches) - 1})")
    d = recon.branches[branch].derivation
    first: dict = {}
    for n in d.nodes():
        first.setdefault(canonicalize(n.subject), n.subject)
    return Sense(frozenset(first), canonicalize(t), tuple(first.values()))


def denotation(calc: Calculus, t, max_steps: int = DEFAULT_MAX_STEPS):
    r = normalize(calc, t, max_steps=max_steps)
    if isinstance(r, NormalForm):
        return EndTermNF(canonicalize(r.term), r.term)
    return NoNormalFormWithinBounds("cycle" if isinstance(r, Cycle) else "step-limit")
