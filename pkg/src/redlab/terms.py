"""Untyped term language shared by every calculus.

Terms are immutable trees of three kinds: variables, single-variable
binders (``lam x. body``) and fixed-arity nodes (``app(s, t)``).  Rule
schemas additionally use :class:`Meta` leaves (``$t``) and the
contractum form :class:`MetaSubst` (``$t[$s/x]``).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Union

__all__ = [
    "Var", "Binder", "Node", "Meta", "MetaSubst", "Term",
    "free_vars", "alpha_eq", "substitute", "canonicalize", "subterms",
    "size", "fresh_name", "show", "parse_term", "TermSyntaxError",
]


class _Cached:
    """Mixin that memoises the structural hash of a frozen dataclass."""

    def __hash__(self):
        return self._hash

    @cached_property
    def _hash(self):
        return hash((type(self).__name__,) + tuple(
            getattr(self, f) for f in self.__dataclass_fields__))


@dataclass(frozen=True, eq=True)
class Var(_Cached):
    name: str

    __hash__ = _Cached.__hash__

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=True)
class Binder(_Cached):
    head: str
    bound: str
    body: "Term"

    __hash__ = _Cached.__hash__

    @cached_property
    def _fv(self):
        return free_vars(self.body) - {self.bound}

    def __str__(self):
        return show(self)


@dataclass(frozen=True, eq=True)
class Node(_Cached):
    head: str
    args: tuple

    __hash__ = _Cached.__hash__

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    @cached_property
    def _fv(self):
        return frozenset().union(*(free_vars(a) for a in self.args))

    def __str__(self):
        return show(self)


@dataclass(frozen=True, eq=True)
class Meta(_Cached):
    """Term metavariable; only legal inside rule schemas."""
    name: str

    __hash__ = _Cached.__hash__

    def __str__(self):
        return "$" + self.name


@dataclass(frozen=True, eq=True)
class MetaSubst(_Cached):
    """Contractum form ``$body[$arg/var]``."""
    body: str
    arg: str
    var: str

    __hash__ = _Cached.__hash__

    def __str__(self):
        return f"${self.body}[${self.arg}/{self.var}]"


Term = Union[Var, Binder, Node, Meta]


def free_vars(t) -> frozenset:
    """Names with a free occurrence in ``t``."""
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, (Binder, Node)):
        return t._fv
    return frozenset()


def size(t) -> int:
    """Number of binder and node constructors (variables are free)."""
    if isinstance(t, Binder):
        return 1 + size(t.body)
    if isinstance(t, Node):
        return 1 + sum(size(a) for a in t.args)
    return 0


_SUFFIX = re.compile(r"^(.*?)(\d*)$")


def fresh_name(base: str, avoid) -> str:
    """Smallest numeric suffix appended to ``base`` that avoids ``avoid``."""
    stem = _SUFFIX.match(base).group(1) or base
    i = 1
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


def substitute(t, x: str, s):
    """Capture-avoiding ``t[s/x]``."""
    if isinstance(t, Var):
        return s if t.name == x else t
    if isinstance(t, Node):
        if x not in free_vars(t):
            return t
        return Node(t.head, tuple(substitute(a, x, s) for a in t.args))
    if isinstance(t, Binder):
        if t.bound == x or x not in free_vars(t.body):
            return t
        fs = free_vars(s)
        if t.bound in fs:
            y = fresh_name(t.bound, fs | free_vars(t.body) | {x})
            body = substitute(t.body, t.bound, Var(y))
            return Binder(t.head, y, substitute(body, x, s))
        return Binder(t.head, t.bound, substitute(t.body, x, s))
    return t


def canonicalize(t):
    """Rename binders to ``#0, #1, ...`` in pre-order; free names are kept."""
    counter = [0]

    def go(u, env):
        if isinstance(u, Var):
            return Var(env.get(u.name, u.name))
        if isinstance(u, Binder):
            name = f"#{counter[0]}"
            counter[0] += 1
            return Binder(u.head, name, go(u.body, {**env, u.bound: name}))
        if isinstance(u, Node):
            return Node(u.head, tuple(go(a, env) for a in u.args))
        return u

    return go(t, {})


def alpha_eq(t1, t2) -> bool:
    return canonicalize(t1) == canonicalize(t2)


def subterms(t) -> list:
    """All subterm occurrences in pre-order, ``t`` first."""
    out = []
    stack = [t]
    while stack:
        u = stack.pop()
        out.append(u)
        if isinstance(u, Binder):
            stack.append(u.body)
        elif isinstance(u, Node):
            stack.extend(reversed(u.args))
    return out


def iter_positions(t, path=()) -> Iterator[tuple]:
    """Yield ``(path, subterm)`` in pre-order; binder bodies are index 0."""
    yield path, t
    if isinstance(t, Binder):
        yield from iter_positions(t.body, path + (0,))
    elif isinstance(t, Node):
        for i, a in enumerate(t.args):
            yield from iter_positions(a, path + (i,))


def at_path(t, path):
    for i in path:
        if isinstance(t, Binder) and i == 0:
            t = t.body
        elif isinstance(t, Node) and 0 <= i < len(t.args):
            t = t.args[i]
        else:
            raise IndexError(f"no position {format_path(path)}")
    return t


def replace_at(t, path, new):
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(t, Binder):
        return Binder(t.head, t.bound, replace_at(t.body, rest, new))
    args = list(t.args)
    args[i] = replace_at(args[i], rest, new)
    return Node(t.head, tuple(args))


def format_path(path) -> str:
    return "root" if not path else ".".join(map(str, path))


def parse_path(text: str) -> tuple:
    text = text.strip()
    if text in ("", "root"):
        return ()
    return tuple(int(p) for p in text.split("."))


def show(t) -> str:
    if isinstance(t, (Var, Meta, MetaSubst)):
        return str(t)
    if isinstance(t, Binder):
        return f"{t.head} {t.bound}. {show(t.body)}"
    if isinstance(t, Node):
        return f"{t.head}({', '.join(show(a) for a in t.args)})"
    raise TypeError(f"not a term: {t!r}")


# --- concrete syntax -------------------------------------------------------

class TermSyntaxError(ValueError):
    def __init__(self, msg, line=1, col=1):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


IDENT = r"[a-zA-Z][a-zA-Z0-9_']*"
_TOKEN = re.compile(rf"\s*(?:(?P<meta>\${IDENT})|(?P<ident>{IDENT})|(?P<punct>[().,\[\]/]))")


def tokenize(text: str, line: int = 1, col0: int = 1):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            j = pos
            while j < n and text[j].isspace():
                j += 1
            raise TermSyntaxError(f"unexpected character {text[j]!r}", line, col0 + j)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), col0 + start))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, text, allow_meta, line=1, col0=1):
        self.toks = tokenize(text, line, col0)
        self.i = 0
        self.allow_meta = allow_meta
        self.line = line
        self.end_col = col0 + len(text)

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else (None, None, self.end_col)

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise TermSyntaxError(msg, self.line, tok[2])

    def expect(self, value):
        tok = self.peek()
        if tok[1] != value:
            self.error(f"expected {value!r}, found {tok[1]!r}")
        self.i += 1
        return tok

    def term(self):
        kind, val, _ = self.peek()
        k2, v2, _ = self.peek(1)
        k3, v3, _ = self.peek(2)
        if kind == "ident" and k2 == "ident" and v3 == ".":
            self.i += 3
            return Binder(val, v2, self.term())
        return self.atom()

    def atom(self):
        tok = self.peek()
        kind, val, _ = tok
        if kind == "ident":
            self.i += 1
            if self.peek()[1] == "(":
                self.i += 1
                args = []
                if self.peek()[1] != ")":
                    args.append(self.term())
                    while self.peek()[1] == ",":
                        self.i += 1
                        args.append(self.term())
                self.expect(")")
                return Node(val, tuple(args))
            return Var(val)
        if kind == "meta":
            if not self.allow_meta:
                self.error("term metavariables are only allowed in rule schemas", tok)
            self.i += 1
            name = val[1:]
            if self.peek()[1] == "[":
                self.i += 1
                arg = self.peek()
                if arg[0] != "meta":
                    self.error("expected a term metavariable", arg)
                self.i += 1
                self.expect("/")
                var = self.peek()
                if var[0] != "ident":
                    self.error("expected a variable name", var)
                self.i += 1
                self.expect("]")
                return MetaSubst(name, arg[1][1:], var[1])
            return Meta(name)
        if val == "(":
            self.i += 1
            t = self.term()
            self.expect(")")
            return t
        if kind is None:
            self.error("unexpected end of input")
        self.error(f"unexpected {val!r}")


def parse_term(text: str, allow_meta: bool = False, line: int = 1, col: int = 1):
    """Parse concrete syntax, e.g. ``app(lam y. lam x. x, lam y. y)``."""
    p = _Parser(text, allow_meta, line, col)
    t = p.term()
    if p.i != len(p.toks):
        p.error(f"trailing input {p.peek()[1]!r}")
    return t
