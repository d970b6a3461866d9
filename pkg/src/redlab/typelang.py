"""Type expressions, hats and first-order unification.

A *hat* is whatever can sit to the right of a colon in a judgment: a
type expression, the non-type marker :data:`FROWN`, or a hat
metavariable standing for either.  ``FROWN`` never occurs inside a
compound type, which the unifier enforces structurally by only letting
:class:`HatVar` (never :class:`MetaVar`) take it as a value.
"""
from __future__ import annotations

import re
import string
from dataclasses import dataclass
from typing import Union

from .terms import _Cached

__all__ = [
    "Atom", "TCon", "MetaVar", "HatVar", "Frown", "FROWN", "Hat",
    "UnifyError", "UnifyMismatch", "OccursCheck",
    "unify", "apply", "meta_vars", "rename_canonical", "rename_jointly",
    "show_type", "parse_type", "TypeSyntaxError", "ARROW", "is_type",
]

ARROW = "->"


@dataclass(frozen=True)
class Atom(_Cached):
    name: str
    __hash__ = _Cached.__hash__


@dataclass(frozen=True)
class TCon(_Cached):
    name: str
    args: tuple
    __hash__ = _Cached.__hash__


@dataclass(frozen=True)
class MetaVar(_Cached):
    """Unknown standing for a type."""
    id: Union[int, str]
    __hash__ = _Cached.__hash__


@dataclass(frozen=True)
class HatVar(_Cached):
    """Unknown standing for a type or for FROWN."""
    id: Union[int, str]
    __hash__ = _Cached.__hash__


class Frown:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "FROWN"

    def __reduce__(self):
        return (Frown, ())


FROWN = Frown()

Hat = Union[Atom, TCon, MetaVar, HatVar, Frown]


def arrow(a, b):
    return TCon(ARROW, (a, b))


def is_type(h) -> bool:
    return isinstance(h, (Atom, TCon, MetaVar))


class UnifyError(Exception):
    pass


class UnifyMismatch(UnifyError):
    pass


class OccursCheck(UnifyError):
    pass


def apply(s: dict, h):
    """Apply an idempotent substitution."""
    if not s:
        return h
    if isinstance(h, (MetaVar, HatVar)):
        return s.get(h, h)
    if isinstance(h, TCon):
        return TCon(h.name, tuple(apply(s, a) for a in h.args))
    return h


def meta_vars(h) -> set:
    if isinstance(h, (MetaVar, HatVar)):
        return {h}
    if isinstance(h, TCon):
        out = set()
        for a in h.args:
            out |= meta_vars(a)
        return out
    return set()


def _occurs(v, h) -> bool:
    if h == v:
        return True
    return isinstance(h, TCon) and any(_occurs(v, a) for a in h.args)


def _bind(s: dict, v, h) -> dict:
    if v == h:
        return s
    if _occurs(v, h):
        raise OccursCheck(f"{show_type(v)} occurs in {show_type(h)}")
    one = {v: h}
    out = {k: apply(one, e) for k, e in s.items()}
    out[v] = h
    return out


def unify(a, b, s: dict | None = None) -> dict:
    """Most general extension of ``s`` equating ``a`` and ``b``.

    Returns a new substitution; ``s`` is never mutated.
    """
    s = dict(s or {})
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x, y = apply(s, x), apply(s, y)
        if x == y:
            continue
        if isinstance(x, HatVar):
            s = _bind(s, x, y)
        elif isinstance(y, HatVar):
            s = _bind(s, y, x)
        elif isinstance(x, Frown) or isinstance(y, Frown):
            raise UnifyMismatch(f"cannot unify {show_type(x)} with {show_type(y)}")
        elif isinstance(x, MetaVar):
            s = _bind(s, x, y)
        elif isinstance(y, MetaVar):
            s = _bind(s, y, x)
        elif (isinstance(x, TCon) and isinstance(y, TCon)
              and x.name == y.name and len(x.args) == len(y.args)):
            stack.extend(reversed(list(zip(x.args, y.args))))
        else:
            raise UnifyMismatch(f"cannot unify {show_type(x)} with {show_type(y)}")
    return s


def rename_jointly(hats, start: int = 0):
    """Renumber metavariables across ``hats`` in first-occurrence order.

    Returns ``(renamed_hats, mapping)``.
    """
    mapping: dict = {}

    def visit(h):
        if isinstance(h, (MetaVar, HatVar)):
            if h not in mapping:
                mapping[h] = type(h)(start + len(mapping))
        elif isinstance(h, TCon):
            for a in h.args:
                visit(a)

    hats = list(hats)
    for h in hats:
        visit(h)
    return [apply(mapping, h) for h in hats], mapping


def rename_canonical(h):
    return rename_jointly([h])[0][0]


# --- rendering ---------------------------------------------------------------

def _letter(i: int) -> str:
    letters = string.ascii_uppercase
    return letters[i % 26] + ("" if i < 26 else str(i // 26))


def show_type(h, letters: bool = False, infix=None) -> str:
    """Concrete syntax; ``letters`` renders integer metavariables as A, B, ..."""
    infix = infix if infix is not None else _infix_default
    if isinstance(h, Frown):
        return "FROWN"
    if isinstance(h, Atom):
        return h.name
    if isinstance(h, MetaVar):
        if letters and isinstance(h.id, int):
            return _letter(h.id)
        return f"?{h.id}"
    if isinstance(h, HatVar):
        if letters and isinstance(h.id, int):
            return "^" + _letter(h.id)
        return f"?^{h.id}"
    if isinstance(h, TCon):
        if len(h.args) == 2 and infix(h.name):
            left, right = h.args
            ls = show_type(left, letters, infix)
            if isinstance(left, TCon) and len(left.args) == 2 and infix(left.name):
                ls = f"({ls})"
            return f"{ls} {h.name} {show_type(right, letters, infix)}"
        inner = ", ".join(show_type(a, letters, infix) for a in h.args)
        return f"{h.name}({inner})"
    raise TypeError(f"not a hat: {h!r}")


def _infix_default(name):
    return True


# --- parsing -----------------------------------------------------------------

class TypeSyntaxError(ValueError):
    def __init__(self, msg, line=1, col=1):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


_TTOKEN = re.compile(
    r"\s*(?:(?P<meta>\?\^?[A-Za-z0-9_']+)|(?P<arrow>->)|"
    r"(?P<ident>[a-zA-Z][a-zA-Z0-9_']*)|(?P<punct>[(),]))")


def parse_type(text: str, connectives: dict | None = None, allow_frown: bool = True,
               line: int = 1, col: int = 1):
    """Parse a hat.

    ``connectives`` maps names to ``(arity, fixity)``; ``->`` is always
    available as a right-associative infix arrow.  Infix connectives share
    one precedence level and associate to the right.
    """
    conns = {ARROW: (2, "infix")}
    conns.update(connectives or {})
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TTOKEN.match(text, pos)
        if not m:
            j = pos
            while text[j].isspace():
                j += 1
            raise TypeSyntaxError(f"unexpected character {text[j]!r}", line, col + j)
        toks.append((m.lastgroup, m.group(m.lastgroup), col + m.start(m.lastgroup)))
        pos = m.end()
    toks.append((None, None, col + len(text)))
    i = 0

    def err(msg):
        raise TypeSyntaxError(msg, line, toks[i][2])

    def is_infix_op(tok):
        kind, val, _ = tok
        return (kind == "arrow" or (kind == "ident" and val in conns
                and conns[val][1] == "infix"))

    def expr():
        nonlocal i
        left = primary()
        if is_infix_op(toks[i]):
            op = toks[i][1]
            if conns[op][0] != 2:
                err(f"infix connective {op!r} must be binary")
            i += 1
            return TCon(op, (left, expr()))
        return left

    def primary():
        nonlocal i
        kind, val, _ = toks[i]
        if kind == "meta":
            i += 1
            name = val[1:]
            cls = MetaVar
            if name.startswith("^"):
                cls, name = HatVar, name[1:]
            return cls(int(name) if name.isdigit() else name)
        if kind == "ident":
            if val == "FROWN":
                if not allow_frown:
                    err("FROWN is only legal where a hat is expected")
                i += 1
                return FROWN
            i += 1
            if val in conns and conns[val][1] == "prefix":
                arity = conns[val][0]
                args = []
                if arity:
                    if toks[i][1] != "(":
                        err(f"expected '(' after {val!r}")
                    i += 1
                    args.append(expr())
                    while toks[i][1] == ",":
                        i += 1
                        args.append(expr())
                    if toks[i][1] != ")":
                        err("expected ')'")
                    i += 1
                if len(args) != arity:
                    err(f"connective {val!r} takes {arity} arguments, got {len(args)}")
                return TCon(val, tuple(args))
            return Atom(val)
        if val == "(":
            i += 1
            t = expr()
            if toks[i][1] != ")":
                err("expected ')'")
            i += 1
            return t
        err("unexpected end of input" if kind is None else f"unexpected {val!r}")

    h = expr()
    if toks[i][0] is not None:
        err(f"trailing input {toks[i][1]!r}")
    if _hat_nested(h):
        raise TypeSyntaxError("FROWN and hat variables cannot occur inside a compound type",
                              line, col)
    return h


def _hat_nested(h) -> bool:
    return isinstance(h, TCon) and any(
        isinstance(a, (Frown, HatVar)) or _hat_nested(a) for a in h.args)
