"""Classify reduction rules as FULL, WEAK or REJECTED.

The redex schema is reconstructed with its metavariables as opaque
leaves.  In each branch the contractum's hat is read off the redex
derivation and compared with the redex's hat:

* identical                                   -> FullPreserving
* mentions a metavariable the redex hat lacks  -> Arbitrary
* otherwise (e.g. FROWN)                       -> WeaklyRelated

A rule is FULL when every branch preserves, REJECTED when some branch is
arbitrary, WEAK otherwise.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .calculus import Calculus, ReductionRule
from .infer import Branch, reconstruct_schema, typecheck
from .rewrite import GenerationFailed, Reduced, generate_well_typed, step
from .terms import Binder, Meta, MetaSubst, Node, Var, show
from .typelang import ARROW, FROWN, Atom, Frown, TCon, apply, meta_vars, show_type

__all__ = [
    "FULL", "WEAK", "REJECTED", "FULL_PRESERVING", "WEAKLY_RELATED", "ARBITRARY",
    "BranchVerdict", "Classification", "RuleError", "UntypableRedex", "SRReport",
    "classify_rule", "classify_calculus", "check_sr_instances", "contractum_hat",
]

FULL, WEAK, REJECTED = "FULL", "WEAK", "REJECTED"
FULL_PRESERVING, WEAKLY_RELATED, ARBITRARY = "FullPreserving", "WeaklyRelated", "Arbitrary"


class UntypableRedex(ValueError):
    pass


@dataclass(frozen=True)
class BranchVerdict:
    index: int
    redex_hat: object
    contractum_hat: object
    fresh_metavars: tuple
    status: str

    def to_json(self, calc: Calculus) -> dict:
        return {
            "index": self.index,
            "redex_hat": calc.show_hat(self.redex_hat),
            "contractum_hat": calc.show_hat(self.contractum_hat),
            "fresh_metavars": [show_type(v) for v in self.fresh_metavars],
            "status": self.status,
        }


@dataclass(frozen=True)
class Classification:
    rule: str
    verdict: str
    branches: tuple
    witness: Optional[Branch] = None
    reconstruction: tuple = field(default=(), compare=False)
    notes: tuple = ()

    def to_json(self, calc: Calculus) -> dict:
        return {
            "rule": self.rule,
            "verdict": self.verdict,
            "branches": [b.to_json(calc) for b in self.branches],
            "witness": self.witness.to_json(calc) if self.witness is not None else None,
            "notes": list(self.notes),
        }

    def report(self, calc: Calculus) -> str:
        lines = [f"reduction {self.rule}: {self.verdict}"]
        for bv, br in zip(self.branches, self.reconstruction):
            lines.append(f"  branch {bv.index} ({' / '.join(br.rules)}): "
                         f"redex {calc.show_hat(bv.redex_hat, True)}, "
                         f"contractum {calc.show_hat(bv.contractum_hat, True)} -> {bv.status}")
            if bv.fresh_metavars:
                lines.append("    unrelated: " + ", ".join(
                    show_type(v, letters=True) for v in bv.fresh_metavars))
            lines.append(br.derivation.render(calc, letters=True, indent=2))
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)


@dataclass(frozen=True)
class RuleError:
    rule: str
    error: str

    def to_json(self, calc=None) -> dict:
        return {"rule": self.rule, "verdict": None, "error": self.error}


def contractum_hat(branch: Branch, rule: ReductionRule):
    con = rule.contractum
    if isinstance(con, Meta):
        return branch.schema_hat(con.name)
    if isinstance(con, MetaSubst):
        return branch.schema_hat(con.body)
    raise ValueError(f"bad contractum {con!r}")


def _status(redex_hat, con_hat):
    fresh = tuple(sorted(meta_vars(con_hat) - meta_vars(redex_hat),
                         key=lambda v: (type(v).__name__, str(v.id))))
    if con_hat == redex_hat:
        return FULL_PRESERVING, fresh
    if fresh:
        return ARBITRARY, fresh
    return WEAKLY_RELATED, fresh


def classify_rule(calc: Calculus, rule) -> Classification:
    if isinstance(rule, str):
        rule = calc.reduction(rule)
    recon = reconstruct_schema(calc, rule.redex)
    if not recon.branches:
        raise UntypableRedex(f"redex of {rule.name} has no typing in {calc.name}")
    verdicts = []
    for i, br in enumerate(recon.branches):
        red, con = br.conclusion, contractum_hat(br, rule)
        status, fresh = _status(red, con)
        verdicts.append(BranchVerdict(i, red, con, fresh, status))
    statuses = {v.status for v in verdicts}
    witness = None
    notes = []
    if ARBITRARY in statuses:
        verdict = REJECTED
        witness = recon.branches[next(v.index for v in verdicts if v.status == ARBITRARY)]
    elif statuses == {FULL_PRESERVING}:
        verdict = FULL
    else:
        verdict = WEAK
        for v in verdicts:
            if v.status == WEAKLY_RELATED and not isinstance(v.contractum_hat, Frown):
                notes.append(
                    f"branch {v.index}: contractum type differs from the redex type but "
                    f"shares all its unknowns; whether such related-but-distinct types are "
                    f"acceptable is a judgement call")
    return Classification(rule.name, verdict, tuple(verdicts), witness, recon.branches,
                          tuple(notes))


def classify_calculus(calc: Calculus) -> list:
    out = []
    for r in calc.reductions:
        try:
            out.append(classify_rule(calc, r))
        except (UntypableRedex, RuntimeError) as e:
            out.append(RuleError(r.name, str(e)))
    return out


# --- concrete instances -------------------------------------------------------

@dataclass
class SRReport:
    rule: str
    trials: int
    preserved: int = 0
    hat_changed: int = 0
    failed: int = 0
    skipped_branches: tuple = ()
    failures: list = field(default_factory=list)

    def to_json(self, calc: Calculus) -> dict:
        return {
            "rule": self.rule, "trials": self.trials, "preserved": self.preserved,
            "hat_changed": self.hat_changed, "failed": self.failed,
            "skipped_branches": list(self.skipped_branches),
            "failures": [{"redex": show(r), "context": [[x, calc.show_hat(h)] for x, h in g.items()],
                          "type": calc.show_hat(a), "contractum": show(c)}
                         for r, g, a, c in self.failures],
        }


def _ground_assignment(hats, rng):
    vs = set()
    for h in hats:
        vs |= {v for v in meta_vars(h)}
    out = {}
    for v in sorted(vs, key=lambda v: (type(v).__name__, str(v.id))):
        a = Atom(rng.choice(("p", "q", "r")))
        if rng.random() < 0.3:
            a = TCon(ARROW, (a, Atom(rng.choice(("p", "q")))))
        out[v] = a
    return out


def _instantiate(schema, comps):
    if isinstance(schema, Meta):
        return comps[schema.name]
    if isinstance(schema, Binder):
        return Binder(schema.head, schema.bound, _instantiate(schema.body, comps))
    if isinstance(schema, Node):
        return Node(schema.head, tuple(_instantiate(a, comps) for a in schema.args))
    return schema


def _evaluate(calc, rule, report, redex, gamma, ty):
    r = step(calc, redex, (), rule=rule.name)
    con = r.next
    if typecheck(calc, gamma, con, ty):
        report.preserved += 1
    elif typecheck(calc, gamma, con, FROWN):
        report.hat_changed += 1
    else:
        report.failed += 1
        if len(report.failures) < 10:
            report.failures.append((redex, dict(gamma), ty, con))


def check_sr_instances(calc: Calculus, rule, trials: int, seed: int,
                       fixtures=()) -> SRReport:
    """Contract concrete well-typed redex instances and typecheck the contracta.

    Instances are built per generatable branch of the redex reconstruction:
    its unknowns are grounded at random and each metavariable is filled with
    a generated term (or a fresh free variable) of the demanded type.
    ``fixtures`` are extra ``(redex, context, type)`` triples.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if isinstance(rule, str):
        rule = calc.reduction(rule)
    recon = reconstruct_schema(calc, rule.redex)
    usable = [b for b in recon.branches
              if not any(isinstance(h, Frown) for _, h, _ in b.schema)]
    skipped = tuple(i for i, b in enumerate(recon.branches) if b not in usable)
    report = SRReport(rule.name, trials, skipped_branches=skipped)
    if not usable:
        raise GenerationFailed(f"no branch of {rule.name} has generatable components")
    rng = random.Random(seed)
    done = 0
    attempts = 0
    while done < trials:
        attempts += 1
        if attempts > trials * 20:
            raise GenerationFailed(f"could not build well-typed instances of {rule.name}")
        br = usable[done % len(usable)]
        hats = [br.conclusion] + [h for _, h, hy in br.schema] + [
            t for _, _, hy in br.schema for _, t in hy]
        g = _ground_assignment(hats, rng)
        gamma: dict = {}
        comps = {}
        for i, (m, h, hyps) in enumerate(br.schema):
            ty = apply(g, h)
            local = {v: apply(g, t) for v, t in hyps}
            term = None
            if rng.random() < 0.7:
                try:
                    term = generate_well_typed(calc, rng.randint(1, 4), rng.randrange(2**31),
                                               ty=ty, ctx={**gamma, **local})
                except GenerationFailed:
                    term = None
            if term is None:
                name = f"f{i}"
                gamma[name] = ty
                term = Var(name)
            comps[m] = term
        redex = _instantiate(rule.redex, comps)
        ty = apply(g, br.conclusion)
        if not typecheck(calc, gamma, redex, ty):
            continue
        _evaluate(calc, rule, report, redex, gamma, ty)
        done += 1
    for redex, gamma, ty in fixtures:
        if not isinstance(step(calc, redex, (), rule=rule.name), Reduced):
            raise ValueError(f"fixture {show(redex)} is not a {rule.name}-redex")
        report.trials += 1
        _evaluate(calc, rule, report, redex, gamma, ty)
    return report
