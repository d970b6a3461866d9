"""Calculus definitions: connectives, heads, typing rules, reductions.

Calculi are written in the line-oriented ``.rcalc`` format::

    calculus stlc
    typecon -> 2 infix
    head lam constructor 1 binds 0
    head app destructor 2
    rule arrow-I:  [x: ?A] |- $t : ?B  ==>  lam x. $t : ?A -> ?B
    rule arrow-E:  $s : ?A -> ?B , $t : ?A  ==>  app($s, $t) : ?B
    reduction beta:  app(lam x. $t, $s)  ~>  $t[$s/x]

``?A`` is a schema type variable (local to its rule), ``$t`` a term
metavariable, ``FROWN`` the non-type hat.  See ``docs/rcalc.md``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .terms import (Binder, Meta, MetaSubst, Node, TermSyntaxError, Var,
                    parse_term, show)
from .typelang import (Frown, HatVar, TCon, TypeSyntaxError,
                       parse_type, show_type)

__all__ = [
    "Head", "TypeCon", "Premise", "TypeRule", "ReductionRule", "Calculus",
    "Diagnostic", "ParseError", "ValidationError", "UnknownCalculus",
    "parse_calculus", "pretty_print", "validate", "builtin", "BUILTIN_NAMES",
    "load_calculus", "term_diagnostics",
]


@dataclass(frozen=True)
class TypeCon:
    name: str
    arity: int
    fixity: str = "prefix"


@dataclass(frozen=True)
class Head:
    name: str
    kind: str                  # "constructor" | "destructor"
    arity: int
    binds: Optional[int] = None


@dataclass(frozen=True)
class Premise:
    subject: Meta
    hat: object
    hyp: Optional[tuple] = None     # (variable name, hat schema)


@dataclass(frozen=True)
class TypeRule:
    name: str
    premises: tuple
    subject: object            # Node or Binder over Meta leaves
    hat: object

    @property
    def head(self) -> str:
        return self.subject.head


@dataclass(frozen=True)
class ReductionRule:
    name: str
    redex: object
    contractum: object         # Meta or MetaSubst


@dataclass(frozen=True)
class Calculus:
    name: str
    typecons: tuple = ()
    heads: tuple = ()
    rules: tuple = ()
    reductions: tuple = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {
            "heads": {h.name: h for h in self.heads},
            "typecons": {t.name: t for t in self.typecons},
            "rules": _group(self.rules),
            "reductions": {r.name: r for r in self.reductions},
        })

    def head(self, name: str) -> Optional[Head]:
        return self._index["heads"].get(name)

    def typecon(self, name: str) -> Optional[TypeCon]:
        return self._index["typecons"].get(name)

    def rules_for(self, head: str) -> tuple:
        return self._index["rules"].get(head, ())

    def reduction(self, name: str) -> ReductionRule:
        try:
            return self._index["reductions"][name]
        except KeyError:
            raise KeyError(f"calculus {self.name!r} has no reduction {name!r}") from None

    def connectives(self) -> dict:
        return {t.name: (t.arity, t.fixity) for t in self.typecons}

    def is_infix(self, name: str) -> bool:
        tc = self.typecon(name)
        return tc is None or tc.fixity == "infix"

    def show_hat(self, h, letters: bool = False) -> str:
        return show_type(h, letters=letters, infix=self.is_infix)

    def renamed(self, name: str) -> "Calculus":
        return Calculus(name, self.typecons, self.heads, self.rules, self.reductions)


def _group(rules):
    out: dict = {}
    for r in rules:
        out.setdefault(r.head, ())
        out[r.head] += (r,)
    return out


# --- errors ------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    where: str = ""

    def __str__(self):
        loc = f" [{self.where}]" if self.where else ""
        return f"{self.code}: {self.message}{loc}"


class ParseError(ValueError):
    def __init__(self, msg, line, col=1):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


class ValidationError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class UnknownCalculus(KeyError):
    pass


# --- parsing -----------------------------------------------------------------

_NAME = r"[A-Za-z0-9_'+\-]+"
_HEAD_LINE = re.compile(
    r"^head\s+(?P<name>[a-zA-Z][a-zA-Z0-9_']*)\s+(?P<kind>constructor|destructor)"
    r"\s+(?P<arity>\d+)(?:\s+binds\s+(?P<binds>\d+))?\s*$")
_TYPECON_LINE = re.compile(
    r"^typecon\s+(?P<name>->|[a-zA-Z][a-zA-Z0-9_']*)\s+(?P<arity>\d+)"
    r"(?:\s+(?P<fixity>infix|prefix))?\s*$")
_RULE_LINE = re.compile(rf"^(?P<kw>rule|reduction)\s+(?P<name>{_NAME})\s*:(?P<body>.*)$")


def _split_top(text: str, sep: str):
    """Split on ``sep`` outside brackets; yields ``(offset, piece)``."""
    depth = 0
    start = 0
    i = 0
    out = []
    while i < len(text):
        ch = text[i]
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif depth == 0 and text.startswith(sep, i):
            out.append((start, text[start:i]))
            i += len(sep)
            start = i
            continue
        i += 1
    out.append((start, text[start:]))
    return out


def _strip_offset(off, piece):
    lead = len(piece) - len(piece.lstrip())
    return off + lead, piece.strip()


def parse_calculus(source: str, validate_result: bool = True) -> Calculus:
    """Parse ``.rcalc`` text; raises :class:`ParseError` or :class:`ValidationError`."""
    name = None
    typecons, heads, rules, reductions = [], [], [], []
    conns: dict = {}
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        line = line.strip()
        col0 = indent + 1
        try:
            if line.startswith("calculus"):
                parts = line.split()
                if len(parts) != 2:
                    raise ParseError("expected 'calculus NAME'", lineno, col0)
                if name is not None:
                    raise ParseError("duplicate calculus declaration", lineno, col0)
                name = parts[1]
            elif line.startswith("typecon"):
                m = _TYPECON_LINE.match(line)
                if not m:
                    raise ParseError("expected 'typecon NAME ARITY [infix|prefix]'", lineno, col0)
                arity = int(m["arity"])
                fixity = m["fixity"] or ("infix" if arity == 2 else "prefix")
                if fixity == "infix" and arity != 2:
                    raise ParseError("infix connectives must be binary", lineno, col0)
                typecons.append(TypeCon(m["name"], arity, fixity))
                conns[m["name"]] = (arity, fixity)
            elif line.startswith("head"):
                m = _HEAD_LINE.match(line)
                if not m:
                    raise ParseError(
                        "expected 'head NAME constructor|destructor ARITY [binds I]'",
                        lineno, col0)
                binds = int(m["binds"]) if m["binds"] is not None else None
                heads.append(Head(m["name"], m["kind"], int(m["arity"]), binds))
            elif line.startswith(("rule", "reduction")):
                m = _RULE_LINE.match(line)
                if not m:
                    raise ParseError("expected 'rule NAME: ...' or 'reduction NAME: ...'",
                                     lineno, col0)
                body_col = col0 + m.start("body")
                if m["kw"] == "rule":
                    rules.append(_parse_rule(m["name"], m["body"], conns, lineno, body_col))
                else:
                    reductions.append(_parse_reduction(m["name"], m["body"], lineno, body_col))
            else:
                raise ParseError(f"unknown declaration {line.split()[0]!r}", lineno, col0)
        except (TermSyntaxError, TypeSyntaxError) as e:
            raise ParseError(str(e).split(": ", 1)[1], e.line, e.col) from None
    if name is None:
        raise ParseError("missing 'calculus NAME' declaration", 1, 1)
    calc = Calculus(name, tuple(typecons), tuple(heads), tuple(rules), tuple(reductions))
    if validate_result:
        diags = validate(calc)
        if diags:
            raise ValidationError(diags)
    return calc


def _parse_judgment(text, conns, lineno, col, allow_hyp):
    parts = _split_top(text, "|-")
    hyp = None
    if len(parts) == 2:
        if not allow_hyp:
            raise ParseError("hypotheses are only allowed in premises", lineno, col)
        hoff, htext = _strip_offset(*parts[0])
        if not (htext.startswith("[") and htext.endswith("]")):
            raise ParseError("expected '[x: HAT]' before '|-'", lineno, col + hoff)
        inner = htext[1:-1]
        hv = _split_top(inner, ":")
        if len(hv) != 2:
            raise ParseError("expected '[x: HAT]'", lineno, col + hoff)
        var = hv[0][1].strip()
        if not re.fullmatch(r"[a-zA-Z][a-zA-Z0-9_']*", var):
            raise ParseError(f"bad hypothesis variable {var!r}", lineno, col + hoff + 1)
        hoff2, htype = _strip_offset(hv[1][0], hv[1][1])
        hat = parse_type(htype, conns, allow_frown=True, line=lineno, col=col + hoff + 1 + hoff2)
        hyp = (var, hat)
        off, text = parts[1]
        col += off
    elif len(parts) > 2:
        raise ParseError("at most one '|-' per judgment", lineno, col)
    pieces = _split_top(text, ":")
    if len(pieces) != 2:
        raise ParseError("expected 'SUBJECT : HAT'", lineno, col)
    soff, stext = _strip_offset(*pieces[0])
    toff, ttext = _strip_offset(*pieces[1])
    if not stext:
        raise ParseError("missing subject", lineno, col)
    subject = parse_term(stext, allow_meta=True, line=lineno, col=col + soff)
    hat = parse_type(ttext, conns, allow_frown=True, line=lineno, col=col + toff)
    return subject, hat, hyp


def _parse_rule(name, body, conns, lineno, col):
    sides = _split_top(body, "==>")
    if len(sides) != 2:
        raise ParseError("expected 'PREMISES ==> CONCLUSION'", lineno, col)
    (poff, ptext), (coff, ctext) = sides
    premises = []
    if ptext.strip():
        for off, piece in _split_top(ptext, ","):
            off2, piece = _strip_offset(off, piece)
            subj, hat, hyp = _parse_judgment(piece, conns, lineno, col + poff + off2, True)
            if not isinstance(subj, Meta):
                raise ParseError("premise subjects must be term metavariables", lineno,
                                 col + poff + off2)
            premises.append(Premise(subj, hat, hyp))
    coff2, ctext = _strip_offset(coff, ctext)
    subj, hat, _ = _parse_judgment(ctext, conns, lineno, col + coff2, False)
    return TypeRule(name, tuple(premises), subj, hat)


def _parse_reduction(name, body, lineno, col):
    sides = _split_top(body, "~>")
    if len(sides) != 2:
        raise ParseError("expected 'REDEX ~> CONTRACTUM'", lineno, col)
    (roff, rtext), (coff, ctext) = sides
    roff, rtext = _strip_offset(roff, rtext)
    coff, ctext = _strip_offset(coff, ctext)
    redex = parse_term(rtext, allow_meta=True, line=lineno, col=col + roff)
    contractum = parse_term(ctext, allow_meta=True, line=lineno, col=col + coff)
    return ReductionRule(name, redex, contractum)


# --- pretty printing ---------------------------------------------------------

def pretty_print(c: Calculus) -> str:
    out = [f"calculus {c.name}"]
    for t in c.typecons:
        out.append(f"typecon {t.name} {t.arity} {t.fixity}")
    for h in c.heads:
        line = f"head {h.name} {h.kind} {h.arity}"
        if h.binds is not None:
            line += f" binds {h.binds}"
        out.append(line)
    for r in c.rules:
        prem = []
        for p in r.premises:
            j = f"{p.subject} : {c.show_hat(p.hat)}"
            if p.hyp is not None:
                j = f"[{p.hyp[0]}: {c.show_hat(p.hyp[1])}] |- " + j
            prem.append(j)
        lhs = " , ".join(prem)
        out.append(f"rule {r.name}: {lhs} ==> {show(r.subject)} : {c.show_hat(r.hat)}".replace(
            ":  ==>", ": ==>"))
    for r in c.reductions:
        out.append(f"reduction {r.name}: {show(r.redex)} ~> {show(r.contractum)}")
    return "\n".join(out) + "\n"


# --- validation --------------------------------------------------------------

def _hat_diags(c, h, where, out):
    if isinstance(h, TCon):
        tc = c.typecon(h.name)
        if tc is None:
            out.append(Diagnostic("UnknownTypeCon", f"type connective {h.name!r} is not declared",
                                  where))
        elif tc.arity != len(h.args):
            out.append(Diagnostic("TypeArityMismatch",
                                  f"{h.name!r} takes {tc.arity} arguments, got {len(h.args)}",
                                  where))
        for a in h.args:
            if isinstance(a, (Frown, HatVar)):
                out.append(Diagnostic("FrownInType", "FROWN cannot occur inside a type", where))
            _hat_diags(c, a, where, out)


def _schema_metas(t):
    if isinstance(t, Meta):
        return [t.name]
    if isinstance(t, Binder):
        return _schema_metas(t.body)
    if isinstance(t, Node):
        return [m for a in t.args for m in _schema_metas(a)]
    return []


def _term_diags(c, t, where, out, allow_meta=True):
    """Heads known, arities and binder positions respected."""
    if isinstance(t, Binder):
        h = c.head(t.head)
        if h is None:
            out.append(Diagnostic("UnknownHead", f"unknown head {t.head!r}", where))
        elif h.binds is None or h.arity != 1:
            out.append(Diagnostic("BinderMismatch", f"head {t.head!r} does not bind a variable",
                                  where))
        _term_diags(c, t.body, where, out, allow_meta)
    elif isinstance(t, Node):
        h = c.head(t.head)
        if h is None:
            out.append(Diagnostic("UnknownHead", f"unknown head {t.head!r}", where))
        else:
            if h.binds is not None:
                out.append(Diagnostic("BinderMismatch",
                                      f"head {t.head!r} binds a variable; write "
                                      f"'{t.head} x. body'", where))
            elif h.arity != len(t.args):
                out.append(Diagnostic("ArityMismatch",
                                      f"head {t.head!r} takes {h.arity} arguments, "
                                      f"got {len(t.args)}", where))
        for a in t.args:
            _term_diags(c, a, where, out, allow_meta)
    elif isinstance(t, (Meta, MetaSubst)) and not allow_meta:
        out.append(Diagnostic("MetaInTerm", "term metavariables only belong in schemas", where))


def _binder_scopes(t, scope=(), out=None):
    """Map each metavariable to the binder variables in scope above it."""
    out = {} if out is None else out
    if isinstance(t, Meta):
        out[t.name] = scope
    elif isinstance(t, Binder):
        _binder_scopes(t.body, scope + (t.bound,), out)
    elif isinstance(t, Node):
        for a in t.args:
            _binder_scopes(a, scope, out)
    return out


def _free_pattern_vars(t, bound=frozenset()):
    if isinstance(t, Var):
        return set() if t.name in bound else {t.name}
    if isinstance(t, Binder):
        return _free_pattern_vars(t.body, bound | {t.bound})
    if isinstance(t, Node):
        return set().union(*(_free_pattern_vars(a, bound) for a in t.args)) if t.args else set()
    return set()


def _binder_vars(t):
    if isinstance(t, Binder):
        return [t.bound] + _binder_vars(t.body)
    if isinstance(t, Node):
        return [v for a in t.args for v in _binder_vars(a)]
    return []


def _direct_binder_body(t, meta):
    """Binder variable whose body is exactly ``$meta``, if any."""
    if isinstance(t, Binder):
        if t.body == Meta(meta):
            return t.bound
        return _direct_binder_body(t.body, meta)
    if isinstance(t, Node):
        for a in t.args:
            v = _direct_binder_body(a, meta)
            if v is not None:
                return v
    return None


def validate(c: Calculus) -> list:
    """One :class:`Diagnostic` per violated invariant; empty when well-formed."""
    out: list = []
    seen = set()
    for h in c.heads:
        if h.name in seen:
            out.append(Diagnostic("DuplicateHead", f"head {h.name!r} declared twice", h.name))
        seen.add(h.name)
        if h.binds is not None and (h.arity != 1 or h.binds != 0):
            out.append(Diagnostic("BinderMismatch",
                                  "binding heads must have arity 1 and bind argument 0", h.name))
    tseen = set()
    for t in c.typecons:
        if t.name in tseen:
            out.append(Diagnostic("DuplicateTypeCon", f"connective {t.name!r} declared twice",
                                  t.name))
        tseen.add(t.name)
    names = set()
    for r in c.rules:
        where = f"rule {r.name}"
        if r.name in names:
            out.append(Diagnostic("DuplicateRule", f"rule name {r.name!r} reused", where))
        names.add(r.name)
        _validate_rule(c, r, where, out)
    for h in c.heads:
        if not c.rules_for(h.name):
            out.append(Diagnostic("MissingTypingRule",
                                  f"head {h.name!r} has no type-assignment rule", h.name))
    rnames = set()
    for r in c.reductions:
        where = f"reduction {r.name}"
        if r.name in rnames:
            out.append(Diagnostic("DuplicateReduction", f"reduction name {r.name!r} reused",
                                  where))
        rnames.add(r.name)
        _validate_reduction(c, r, where, out)
    return out


def _validate_rule(c, r, where, out):
    subj = r.subject
    if isinstance(subj, Binder):
        if not isinstance(subj.body, Meta):
            out.append(Diagnostic("NotSyntaxDirected",
                                  "conclusion must be one head applied to metavariables", where))
    elif isinstance(subj, Node):
        if not all(isinstance(a, Meta) for a in subj.args):
            out.append(Diagnostic("NotSyntaxDirected",
                                  "conclusion must be one head applied to metavariables", where))
    else:
        out.append(Diagnostic("NotSyntaxDirected", "conclusion subject must have a head", where))
        return
    _term_diags(c, subj, where, out)
    metas = _schema_metas(subj)
    if len(set(metas)) != len(metas):
        out.append(Diagnostic("NotSyntaxDirected",
                              "conclusion metavariables must be distinct", where))
    bound = subj.bound if isinstance(subj, Binder) else None
    typed = []
    for p in r.premises:
        m = p.subject.name
        if m not in metas:
            out.append(Diagnostic("UnknownMetavariable",
                                  f"premise subject ${m} does not occur in the conclusion", where))
        typed.append(m)
        if p.hyp is not None:
            var, hh = p.hyp
            if bound is None or var != bound or subj.body != p.subject:
                out.append(Diagnostic("BadHypothesis",
                                      f"hypothesis [{var}: ...] must be discharged by the "
                                      f"conclusion's binder over ${m}", where))
            if not isinstance(hh, (TCon,)) and isinstance(hh, (Frown, HatVar)):
                out.append(Diagnostic("FrownHypothesis", "hypotheses carry types, never FROWN",
                                      where))
            _hat_diags(c, hh, where, out)
        _hat_diags(c, p.hat, where, out)
    for m in metas:
        if typed.count(m) == 0:
            out.append(Diagnostic("UntypedArgument",
                                  f"${m} is not typed by any premise", where))
        elif typed.count(m) > 1:
            out.append(Diagnostic("DuplicateTyping", f"${m} is typed by several premises", where))
    _hat_diags(c, r.hat, where, out)


def _validate_reduction(c, r, where, out):
    redex, con = r.redex, r.contractum
    if not isinstance(redex, (Node, Binder)):
        out.append(Diagnostic("RedexNotRigid", "redex must start with a head", where))
        return
    _term_diags(c, redex, where, out)
    metas = _schema_metas(redex)
    if len(set(metas)) != len(metas):
        out.append(Diagnostic("NonLinearRedex", "redex metavariables must be distinct", where))
    fv = _free_pattern_vars(redex)
    if fv:
        out.append(Diagnostic("FreeVariableInRedex",
                              f"redex mentions free variables {sorted(fv)}; use metavariables",
                              where))
    bvs = _binder_vars(redex)
    if len(set(bvs)) != len(bvs):
        out.append(Diagnostic("DuplicateBinder", "redex binder names must be distinct", where))
    scopes = _binder_scopes(redex)
    if isinstance(con, Meta):
        if con.name not in metas:
            out.append(Diagnostic("ContractumMetaNotInRedex",
                                  f"${con.name} does not occur in the redex", where))
        elif scopes.get(con.name):
            out.append(Diagnostic("ContractumEscapesBinder",
                                  f"${con.name} sits under a binder; its bound variable "
                                  f"would become free", where))
    elif isinstance(con, MetaSubst):
        for m in (con.body, con.arg):
            if m not in metas:
                out.append(Diagnostic("ContractumMetaNotInRedex",
                                      f"${m} does not occur in the redex", where))
        if con.body in metas and _direct_binder_body(redex, con.body) != con.var:
            out.append(Diagnostic("BadSubstitutionForm",
                                  f"${con.body} must be the body of a binder over {con.var}",
                                  where))
        elif con.body in metas and scopes.get(con.body, ()) != (con.var,):
            out.append(Diagnostic("ContractumEscapesBinder",
                                  f"${con.body} sits under binders other than {con.var}", where))
        if con.arg in metas and scopes.get(con.arg):
            out.append(Diagnostic("ContractumEscapesBinder",
                                  f"${con.arg} sits under a binder", where))
    else:
        out.append(Diagnostic("BadContractum",
                              "contractum must be $m or $m[$n/x]", where))


# --- built-ins ---------------------------------------------------------------

_STLC_RULES = """\
typecon -> 2 infix
head lam constructor 1 binds 0
head app destructor 2
rule arrow-I: [x: ?A] |- $t : ?B ==> lam x. $t : ?A -> ?B
rule arrow-E: $s : ?A -> ?B , $t : ?A ==> app($s, $t) : ?B
reduction beta: app(lam x. $t, $s) ~> $t[$s/x]
"""

BUILTIN_SOURCES = {
    "stlc": "calculus stlc\n" + _STLC_RULES,
    "tonk": """\
calculus tonk
typecon tonk 2 infix
head k constructor 1
head k' destructor 1
rule tonk-I: $t : ?A ==> k($t) : ?A tonk ?B
rule tonk-E: $t : ?A tonk ?B ==> k'($t) : ?B
reduction tonk-red: k'(k($t)) ~> $t
""",
    "liar": """\
calculus liar
typecon -> 2 infix
head l constructor 1
head l' destructor 1
rule L-I: $t : L -> bot ==> l($t) : L
rule L-E: $t : L ==> l'($t) : L -> bot
reduction liar-red: l'(l($t)) ~> $t
""",
    "stlc+ekman": "calculus stlc+ekman\n" + _STLC_RULES
                  + "reduction ekman: app($y, app($x, $t)) ~> $t\n",
    "core": """\
calculus core
typecon -> 2 infix
head lam constructor 1 binds 0
head app destructor 2
rule arrow-I: [x: ?A] |- $t : ?B ==> lam x. $t : ?A -> ?B
rule arrow-I-bang: [x: ?A] |- $t : FROWN ==> lam x. $t : ?A -> ?B
rule arrow-E: $s : ?A -> ?B , $t : ?A ==> app($s, $t) : ?B
reduction beta: app(lam x. $t, $s) ~> $t[$s/x]
""",
}

BUILTIN_NAMES = tuple(BUILTIN_SOURCES)
_BUILTIN_CACHE: dict = {}


def builtin(name: str) -> Calculus:
    if name not in BUILTIN_SOURCES:
        raise UnknownCalculus(f"unknown calculus {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    if name not in _BUILTIN_CACHE:
        _BUILTIN_CACHE[name] = parse_calculus(BUILTIN_SOURCES[name])
    return _BUILTIN_CACHE[name]


def load_calculus(source: str) -> Calculus:
    """A built-in name or a path to an ``.rcalc`` file."""
    if source in BUILTIN_SOURCES:
        return builtin(source)
    with open(source, encoding="utf-8") as fh:
        return parse_calculus(fh.read())


def term_diagnostics(c: Calculus, t) -> list:
    """Diagnostics for a user term (known heads, arities, no metavariables)."""
    out: list = []
    _term_diags(c, t, "term", out, allow_meta=False)
    return out
