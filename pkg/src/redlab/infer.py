"""Principal-type reconstruction and typechecking over any calculus.

Reconstruction is syntax-directed and bottom-up: subterms are
reconstructed first (binder hypotheses get a fresh metavariable), then
every typing rule for the node's head is tried in declaration order and
its premises unified against the children.  A head with several rules
therefore yields several *branches*.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .calculus import Calculus
from .terms import Binder, Meta, MetaSubst, Node, Var, show
from .typelang import (Atom, Frown, HatVar, MetaVar, TCon, UnifyError, apply,
                       meta_vars, rename_jointly, unify)

__all__ = [
    "Derivation", "Branch", "Reconstruction", "UnknownHead", "BranchLimitExceeded",
    "reconstruct", "reconstruct_schema", "typecheck", "replay", "rigid",
    "DEFAULT_BRANCH_CAP",
]

DEFAULT_BRANCH_CAP = 64


class UnknownHead(ValueError):
    pass


class BranchLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Derivation:
    """One annotated node; ``rule`` is a rule name, or ``hyp``/``var``/``schema`` at leaves."""
    rule: str
    subject: object
    hat: object
    children: tuple = ()

    def nodes(self):
        yield self
        for c in self.children:
            yield from c.nodes()

    def map_hats(self, f) -> "Derivation":
        return Derivation(self.rule, self.subject, f(self.hat),
                          tuple(c.map_hats(f) for c in self.children))

    def to_json(self, calc: Calculus, letters: bool = False) -> dict:
        return {
            "rule": self.rule,
            "subject": show(self.subject),
            "hat": calc.show_hat(self.hat, letters),
            "children": [c.to_json(calc, letters) for c in self.children],
        }

    def render(self, calc: Calculus, letters: bool = True, indent: int = 0) -> str:
        pad = "  " * indent
        lines = [f"{pad}{show(self.subject)} : {calc.show_hat(self.hat, letters)}"
                 f"    ({self.rule})"]
        for c in self.children:
            lines.append(c.render(calc, letters, indent + 1))
        return "\n".join(lines)


@dataclass(frozen=True)
class Branch:
    derivation: Derivation
    conclusion: object
    context: tuple          # ((free variable, hat), ...) in first-occurrence order
    schema: tuple = ()      # (($meta, hat, ((bound var, hat), ...)), ...)
    rules: tuple = ()       # rule names used, pre-order
    subst: tuple = ()       # final substitution as sorted (var, hat) pairs

    def context_dict(self) -> dict:
        return dict(self.context)

    def schema_hat(self, meta: str):
        for name, hat, _ in self.schema:
            if name == meta:
                return hat
        raise KeyError(meta)

    def schema_hyps(self, meta: str) -> tuple:
        for name, _, hyps in self.schema:
            if name == meta:
                return hyps
        raise KeyError(meta)

    def to_json(self, calc: Calculus, letters: bool = False) -> dict:
        sh = lambda h: calc.show_hat(h, letters)  # noqa: E731
        return {
            "conclusion": sh(self.conclusion),
            "context": [[x, sh(h)] for x, h in self.context],
            "schema": [{"meta": "$" + m, "hat": sh(h), "hypotheses": [[v, sh(t)] for v, t in hy]}
                       for m, h, hy in self.schema],
            "derivation": self.derivation.to_json(calc, letters),
        }


@dataclass(frozen=True)
class Reconstruction:
    subject: object
    branches: tuple

    @property
    def typable(self) -> bool:
        return bool(self.branches)


# --- engine ------------------------------------------------------------------

@dataclass(frozen=True)
class _State:
    subst: dict
    ctx: dict
    schema: dict


def _rule_vars(rule) -> list:
    hats = [rule.hat] + [p.hat for p in rule.premises] + [
        p.hyp[1] for p in rule.premises if p.hyp is not None]
    out = []
    for h in hats:
        for v in sorted(meta_vars(h), key=repr):
            if v not in out:
                out.append(v)
    return out


class _Engine:
    def __init__(self, calc: Calculus, cap: int, schema_mode: bool):
        self.calc = calc
        self.cap = cap
        self.schema_mode = schema_mode
        self.counter = itertools.count()
        self._rvars: dict = {}

    def fresh(self, kind=MetaVar):
        return kind(next(self.counter))

    def instantiate(self, rule) -> dict:
        vs = self._rvars.get(rule.name)
        if vs is None:
            vs = self._rvars[rule.name] = _rule_vars(rule)
        return {v: self.fresh(type(v)) for v in vs}

    def check_cap(self, results):
        if len(results) > self.cap:
            raise BranchLimitExceeded(
                f"more than {self.cap} partial reconstruction branches; raise the cap")

    def infer(self, t, env: dict, st: _State) -> list:
        if isinstance(t, Var):
            if t.name in env:
                h = env[t.name]
                return [(st, h, Derivation("hyp", t, h))]
            if t.name in st.ctx:
                h = st.ctx[t.name]
                return [(st, h, Derivation("var", t, h))]
            h = self.fresh()
            return [(_State(st.subst, {**st.ctx, t.name: h}, st.schema), h,
                     Derivation("var", t, h))]
        if isinstance(t, Meta):
            if not self.schema_mode:
                raise ValueError("term metavariables only occur in schemas")
            if t.name in st.schema:
                h = st.schema[t.name][0]
            else:
                h = self.fresh(HatVar)
                st = _State(st.subst, st.ctx,
                            {**st.schema, t.name: (h, tuple(env.items()))})
            return [(st, h, Derivation("schema", t, h))]
        if isinstance(t, Binder):
            head = self.calc.head(t.head)
            if head is None or head.binds is None:
                raise UnknownHead(f"{t.head!r} is not a binding head of {self.calc.name}")
            x = self.fresh()
            body = self.infer(t.body, {**env, t.bound: x}, st)
            out = []
            for st1, hb, db in body:
                for rule in self.calc.rules_for(t.head):
                    inst = self.instantiate(rule)
                    p = rule.premises[0]
                    try:
                        s = st1.subst
                        if p.hyp is not None:
                            s = unify(x, apply(inst, p.hyp[1]), s)
                        s = unify(hb, apply(inst, p.hat), s)
                    except UnifyError:
                        continue
                    concl = apply(inst, rule.hat)
                    out.append((_State(s, st1.ctx, st1.schema), concl,
                                Derivation(rule.name, t, concl, (db,))))
            self.check_cap(out)
            return out
        if isinstance(t, Node):
            head = self.calc.head(t.head)
            if head is None or head.binds is not None or head.arity != len(t.args):
                raise UnknownHead(f"{t.head!r} with {len(t.args)} arguments is not a head "
                                  f"of {self.calc.name}")
            partial = [(st, (), ())]
            for a in t.args:
                nxt = []
                for st0, hats, ds in partial:
                    for st1, h, d in self.infer(a, env, st0):
                        nxt.append((st1, hats + (h,), ds + (d,)))
                partial = nxt
                self.check_cap(partial)
            out = []
            for st1, hats, ds in partial:
                for rule in self.calc.rules_for(t.head):
                    inst = self.instantiate(rule)
                    pos = {m.name: i for i, m in enumerate(rule.subject.args)}
                    try:
                        s = st1.subst
                        for p in rule.premises:
                            s = unify(hats[pos[p.subject.name]], apply(inst, p.hat), s)
                    except UnifyError:
                        continue
                    concl = apply(inst, rule.hat)
                    out.append((_State(s, st1.ctx, st1.schema), concl,
                                Derivation(rule.name, t, concl, ds)))
            self.check_cap(out)
            return out
        if isinstance(t, MetaSubst):
            raise ValueError("substitution forms only occur in contracta")
        raise TypeError(f"not a term: {t!r}")


def _finish(st: _State, hat, deriv: Derivation) -> Branch:
    s = st.subst
    concl = apply(s, hat)
    ctx = [(x, apply(s, h)) for x, h in st.ctx.items()]
    schema = [(m, apply(s, h), tuple((v, apply(s, hv)) for v, hv in hyps))
              for m, (h, hyps) in st.schema.items()]
    deriv = deriv.map_hats(lambda h: apply(s, h))
    order = [concl] + [h for _, h in ctx]
    for _, h, hyps in schema:
        order.append(h)
        order.extend(hv for _, hv in hyps)
    order.extend(n.hat for n in deriv.nodes())
    _, mapping = rename_jointly(order)
    r = lambda h: apply(mapping, h)  # noqa: E731
    rules = tuple(n.rule for n in deriv.nodes() if n.rule not in ("hyp", "var", "schema"))
    final_subst = tuple(sorted(((repr(k), r(v)) for k, v in s.items()), key=lambda kv: kv[0]))
    return Branch(
        derivation=deriv.map_hats(r),
        conclusion=r(concl),
        context=tuple((x, r(h)) for x, h in ctx),
        schema=tuple((m, r(h), tuple((v, r(hv)) for v, hv in hyps)) for m, h, hyps in schema),
        rules=rules,
        subst=final_subst,
    )


def reconstruct(calc: Calculus, t, cap: int = DEFAULT_BRANCH_CAP) -> Reconstruction:
    """All principal typings of ``t``, one branch per consistent rule choice.

    Free variables become context demands; an empty branch tuple means
    ``t`` is untypable.
    """
    eng = _Engine(calc, cap, schema_mode=False)
    results = eng.infer(t, {}, _State({}, {}, {}))
    return Reconstruction(t, tuple(_finish(*r) for r in results))


def reconstruct_schema(calc: Calculus, redex, cap: int = DEFAULT_BRANCH_CAP) -> Reconstruction:
    """Like :func:`reconstruct`, with ``$m`` leaves as fresh hat unknowns."""
    eng = _Engine(calc, cap, schema_mode=True)
    results = eng.infer(redex, {}, _State({}, {}, {}))
    return Reconstruction(redex, tuple(_finish(*r) for r in results))


def rigid(h):
    """Freeze metavariables into atoms that cannot collide with user atoms."""
    if isinstance(h, MetaVar):
        return Atom(f"?{h.id}")
    if isinstance(h, HatVar):
        return Atom(f"?^{h.id}")
    if isinstance(h, TCon):
        return TCon(h.name, tuple(rigid(a) for a in h.args))
    return h


def typecheck(calc: Calculus, ctx: dict, t, hat, recon: Optional[Reconstruction] = None) -> bool:
    """Does ``ctx |- t : hat`` hold?  Metavariables in the inputs are rigid."""
    ctx_r = {}
    for x, h in ctx.items():
        if isinstance(h, (Frown, HatVar)):
            raise ValueError(f"context binding {x} must be a type")
        ctx_r[x] = rigid(h)
    goal = rigid(hat)
    recon = recon if recon is not None else reconstruct(calc, t)
    for b in recon.branches:
        try:
            s = unify(b.conclusion, goal)
            for x, h in b.context:
                if x not in ctx_r:
                    raise UnifyError(f"{x} is not in the context")
                s = unify(h, ctx_r[x], s)
        except UnifyError:
            continue
        return True
    return False


def replay(calc: Calculus, branch: Branch) -> bool:
    """Re-check a branch's derivation rule by rule (hats treated as rigid)."""
    ctx = {x: rigid(h) for x, h in branch.context}
    schema = {m: rigid(h) for m, h, _ in branch.schema}
    counter = itertools.count()

    def fresh_inst(rule):
        return {v: type(v)(f"r{next(counter)}") for v in _rule_vars(rule)}

    def go(d: Derivation, env: dict, s: dict):
        hat = rigid(d.hat)
        if d.rule == "hyp":
            if not isinstance(d.subject, Var) or d.subject.name not in env:
                raise UnifyError("hyp leaf without binder")
            return unify(env[d.subject.name], hat, s)
        if d.rule == "var":
            if not isinstance(d.subject, Var) or ctx.get(d.subject.name) != hat:
                raise UnifyError("free variable disagrees with context")
            return s
        if d.rule == "schema":
            if not isinstance(d.subject, Meta) or schema.get(d.subject.name) != hat:
                raise UnifyError("schema leaf disagrees with demands")
            return s
        rule = next((r for r in calc.rules if r.name == d.rule), None)
        if rule is None or rule.head != getattr(d.subject, "head", None):
            raise UnifyError(f"rule {d.rule} does not apply")
        inst = fresh_inst(rule)
        s = unify(apply(inst, rule.hat), hat, s)
        if isinstance(d.subject, Binder):
            p = rule.premises[0]
            child = d.children[0]
            hyp = apply(inst, p.hyp[1]) if p.hyp is not None else MetaVar(f"h{next(counter)}")
            s = go(child, {**env, d.subject.bound: hyp}, s)
            return unify(apply(inst, p.hat), rigid(child.hat), s)
        pos = {m.name: i for i, m in enumerate(rule.subject.args)}
        if len(d.children) != len(d.subject.args):
            raise UnifyError("child count mismatch")
        for c in d.children:
            s = go(c, env, s)
        for p in rule.premises:
            s = unify(apply(inst, p.hat), rigid(d.children[pos[p.subject.name]].hat), s)
        return s

    try:
        go(branch.derivation, {}, {})
    except UnifyError:
        return False
    return True
