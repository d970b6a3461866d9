"""Redex matching, contraction, normalization and reduction graphs.

Reduction is untyped: rules match syntactically and typing questions are
asked separately.  Positions are paths of argument indices from the root
(a binder's body is index 0).
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Union

from .calculus import Calculus
from .terms import (Binder, Meta, MetaSubst, Node, Var, at_path, canonicalize,
                    format_path, iter_positions, replace_at, show, substitute)
from .typelang import ARROW, Atom, TCon

__all__ = [
    "Reduced", "NoRedex", "NormalForm", "Cycle", "StepLimit", "ReductionGraph",
    "Joined", "NotJoinedWithinBounds", "InvalidPosition", "GenerationFailed",
    "match", "contract", "step", "all_steps", "normalize", "reduction_graph",
    "joinable", "generate_well_typed", "enumerate_terms", "search_distinct_normal_forms",
    "LEFTMOST_OUTERMOST", "DEFAULT_MAX_STEPS", "DEFAULT_MAX_NODES", "DEFAULT_MAX_DEPTH",
]

LEFTMOST_OUTERMOST = "leftmost-outermost"
DEFAULT_MAX_STEPS = 10_000
DEFAULT_MAX_NODES = 50_000
DEFAULT_MAX_DEPTH = 64


class InvalidPosition(ValueError):
    pass


class GenerationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class Reduced:
    next: object
    rule: str
    position: tuple


@dataclass(frozen=True)
class NoRedex:
    pass


@dataclass(frozen=True)
class NormalForm:
    term: object
    steps: int


@dataclass(frozen=True)
class Cycle:
    trace: tuple        # canonical terms; first == last


@dataclass(frozen=True)
class StepLimit:
    last: object
    steps: int


# --- matching ----------------------------------------------------------------

def match(pattern, term) -> Optional[tuple]:
    """Match a redex schema; returns ``(metas, binder_names)`` or None."""
    metas: dict = {}
    names: dict = {}

    def go(p, t, plev, tlev, depth):
        if isinstance(p, Meta):
            metas[p.name] = t
            return True
        if isinstance(p, Var):
            return (isinstance(t, Var) and p.name in plev
                    and tlev.get(t.name) == plev[p.name])
        if isinstance(p, Binder):
            if not (isinstance(t, Binder) and t.head == p.head):
                return False
            names[p.bound] = t.bound
            return go(p.body, t.body, {**plev, p.bound: depth},
                      {**tlev, t.bound: depth}, depth + 1)
        if isinstance(p, Node):
            if not (isinstance(t, Node) and t.head == p.head and len(t.args) == len(p.args)):
                return False
            return all(go(pa, ta, plev, tlev, depth) for pa, ta in zip(p.args, t.args))
        return False

    if go(pattern, term, {}, {}, 0):
        return metas, names
    return None


def contract(rule, metas: dict, names: dict):
    con = rule.contractum
    if isinstance(con, Meta):
        return metas[con.name]
    if isinstance(con, MetaSubst):
        return substitute(metas[con.body], names[con.var], metas[con.arg])
    raise ValueError(f"bad contractum {con!r}")


def _try_rules(calc, sub, rule_name=None):
    for rule in calc.reductions:
        if rule_name is not None and rule.name != rule_name:
            continue
        m = match(rule.redex, sub)
        if m is not None:
            yield rule, contract(rule, *m)


def step(calc: Calculus, t, strategy: Union[str, tuple] = LEFTMOST_OUTERMOST,
         rule: Optional[str] = None):
    """One contraction.

    ``strategy`` is ``"leftmost-outermost"`` or a position path; at a path,
    rules are tried in declaration order unless ``rule`` names one.
    """
    if strategy == LEFTMOST_OUTERMOST:
        for path, sub in iter_positions(t):
            for r, new in _try_rules(calc, sub, rule):
                return Reduced(replace_at(t, path, new), r.name, path)
        return NoRedex()
    path = tuple(strategy)
    try:
        sub = at_path(t, path)
    except IndexError as e:
        raise InvalidPosition(str(e)) from None
    for r, new in _try_rules(calc, sub, rule):
        return Reduced(replace_at(t, path, new), r.name, path)
    raise InvalidPosition(f"no redex at {format_path(path)}")


def all_steps(calc: Calculus, t) -> list:
    """Every single step at every position with every rule, pre-order."""
    out = []
    for path, sub in iter_positions(t):
        for r, new in _try_rules(calc, sub):
            out.append(Reduced(replace_at(t, path, new), r.name, path))
    return out


def normalize(calc: Calculus, t, strategy: str = LEFTMOST_OUTERMOST,
              max_steps: int = DEFAULT_MAX_STEPS):
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    if strategy != LEFTMOST_OUTERMOST:
        raise ValueError(f"unsupported strategy {strategy!r}")
    trace = [t]
    seen = {canonicalize(t): 0}
    steps = 0
    while True:
        r = step(calc, t)
        if isinstance(r, NoRedex):
            return NormalForm(t, steps)
        if steps >= max_steps:
            return StepLimit(t, steps)
        t = r.next
        steps += 1
        c = canonicalize(t)
        if c in seen:
            return Cycle(tuple(trace[seen[c]:]) + (t,))
        seen[c] = len(trace)
        trace.append(t)


# --- reduction graphs ----------------------------------------------------------

@dataclass(frozen=True)
class ReductionGraph:
    nodes: tuple              # canonical terms, BFS order; index 0 is the root
    terms: tuple              # a representative (named) term per node
    depths: tuple
    edges: tuple              # (src, dst, rule, position-string), sorted
    normal: frozenset         # indices of expanded nodes without successors
    truncated: bool
    root: int = 0
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.nodes)})

    def index(self, canonical) -> Optional[int]:
        return self._index.get(canonical)

    def normal_forms(self) -> list:
        return [self.nodes[i] for i in sorted(self.normal)]

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "truncated": self.truncated,
            "nodes": [{"id": i, "term": show(c), "depth": d, "normal": i in self.normal}
                      for i, (c, d) in enumerate(zip(self.nodes, self.depths))],
            "edges": [{"from": a, "to": b, "rule": r, "position": p}
                      for a, b, r, p in self.edges],
        }

    def to_dot(self) -> str:
        def q(s):
            return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'
        lines = ["digraph reductions {"]
        for i, c in enumerate(self.nodes):
            attrs = f"label={q(show(c))}"
            if i in self.normal:
                attrs += ", shape=doublecircle"
            lines.append(f"  n{i} [{attrs}];")
        for a, b, r, p in self.edges:
            lines.append(f"  n{a} -> n{b} [label={q(f'{r}@{p}')}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def reduction_graph(calc: Calculus, t, max_nodes: int = DEFAULT_MAX_NODES,
                    max_depth: int = DEFAULT_MAX_DEPTH) -> ReductionGraph:
    """Breadth-first closure of ``t`` under all single steps."""
    if max_nodes < 1 or max_depth < 1:
        raise ValueError("bounds must be at least 1")
    root = canonicalize(t)
    nodes, terms, depths = [root], [t], [0]
    index = {root: 0}
    edges = set()
    normal = set()
    truncated = False
    queue = deque([0])
    while queue:
        i = queue.popleft()
        succ = all_steps(calc, terms[i])
        if not succ:
            normal.add(i)
            continue
        if depths[i] >= max_depth:
            truncated = True
            continue
        for r in succ:
            c = canonicalize(r.next)
            j = index.get(c)
            if j is None:
                if len(nodes) >= max_nodes:
                    truncated = True
                    continue
                j = len(nodes)
                index[c] = j
                nodes.append(c)
                terms.append(r.next)
                depths.append(depths[i] + 1)
                queue.append(j)
            edges.add((i, j, r.rule, format_path(r.position)))
    return ReductionGraph(tuple(nodes), tuple(terms), tuple(depths), tuple(sorted(edges)),
                          frozenset(normal), truncated)


@dataclass(frozen=True)
class Joined:
    witness: object


@dataclass(frozen=True)
class NotJoinedWithinBounds:
    truncated: bool


def joinable(calc: Calculus, t1, t2, max_nodes: int = DEFAULT_MAX_NODES,
             max_depth: int = DEFAULT_MAX_DEPTH):
    g1 = reduction_graph(calc, t1, max_nodes, max_depth)
    g2 = reduction_graph(calc, t2, max_nodes, max_depth)
    best = None
    for i, c in enumerate(g1.nodes):
        j = g2.index(c)
        if j is None:
            continue
        key = (g1.depths[i] + g2.depths[j], show(c))
        if best is None or key < best[0]:
            best = (key, g1.terms[i])
    if best is None:
        return NotJoinedWithinBounds(g1.truncated or g2.truncated)
    return Joined(best[1])


def search_distinct_normal_forms(calc: Calculus, max_size: int, pool=("x", "y"),
                                 max_nodes: int = 200, max_depth: int = 24,
                                 terms=None) -> dict:
    """Look for one term whose reduction graph has two distinct normal forms.

    Returns a report dict; ``witness`` is None when the bound is exhausted.
    """
    examined = 0
    truncated = 0
    candidates = terms if terms is not None else (
        t for n in range(1, max_size + 1) for t in enumerate_terms(calc, n, pool))
    for t in candidates:
        examined += 1
        g = reduction_graph(calc, t, max_nodes, max_depth)
        if g.truncated:
            truncated += 1
        nfs = g.normal_forms()
        if len(nfs) >= 2:
            a, b = nfs[0], nfs[1]
            return {"witness": t, "normal_forms": (g.terms[g.index(a)], g.terms[g.index(b)]),
                    "examined": examined, "truncated_graphs": truncated,
                    "max_size": max_size, "exhausted": False}
    return {"witness": None, "normal_forms": (), "examined": examined,
            "truncated_graphs": truncated, "max_size": max_size, "exhausted": True}


# --- enumeration and generation ------------------------------------------------

def enumerate_terms(calc: Calculus, n: int, pool=("x", "y"), free=()):
    """All terms with exactly ``n`` head occurrences.

    Variables come from ``free`` or from binders in scope; binders draw
    their names from ``pool``.
    """
    def go(n, scope):
        if n == 0:
            for v in dict.fromkeys(tuple(free) + tuple(scope)):
                yield Var(v)
            return
        for h in calc.heads:
            if h.binds is not None:
                for v in pool:
                    for body in go(n - 1, scope + (v,)):
                        yield Binder(h.name, v, body)
            else:
                for args in _split(n - 1, h.arity, scope):
                    yield Node(h.name, args)

    def _split(budget, k, scope):
        if k == 0:
            if budget == 0:
                yield ()
            return
        for first in range(budget + 1):
            for a in go(first, scope):
                for rest in _split(budget - first, k - 1, scope):
                    yield (a,) + rest

    yield from go(n, ())


_ATOMS = ("p", "q", "r")
_NAMES = ("x", "y", "z")


def _arrow_shape(calc: Calculus):
    lam = next((h for h in calc.heads if h.binds is not None), None)
    app = next((h for h in calc.heads if h.binds is None and h.arity == 2
                and h.kind == "destructor"), None)
    if lam is None or app is None or calc.typecon(ARROW) is None:
        raise GenerationFailed(f"no lambda/application heads in calculus {calc.name!r}")
    return lam.name, app.name


def _random_type(rng, depth):
    if depth <= 0 or rng.random() < 0.4:
        return Atom(rng.choice(_ATOMS[:2]))
    return TCon(ARROW, (_random_type(rng, depth - 1), _random_type(rng, depth - 1)))


class _Gen:
    def __init__(self, lam, app, rng):
        self.lam, self.app, self.rng = lam, app, rng
        self.calls = 0

    def term(self, ty, ctx: dict, budget: int):
        """A term of type ``ty`` under ``ctx`` using at most ``budget`` heads."""
        self.calls += 1
        if self.calls > 5_000:
            return None
        rng = self.rng
        options = []
        if budget >= 1 and isinstance(ty, TCon):
            options += ["lam"] * 3
        if budget >= 1:
            options += ["app", "redex"]
        vs = [x for x, t in ctx.items() if t == ty]
        rng.shuffle(options)
        # spend budget before settling on a variable
        if vs and (budget == 0 or rng.random() < 0.5 / budget):
            options.insert(0, "var")
        elif vs:
            options.append("var")
        for opt in options:
            if opt == "var":
                return Var(rng.choice(vs))
            if opt == "lam":
                x = rng.choice(_NAMES)
                body = self.term(ty.args[1], {**ctx, x: ty.args[0]}, budget - 1)
                if body is not None:
                    return Binder(self.lam, x, body)
            elif opt in ("app", "redex"):
                arg_ty = self._arg_type(ty, ctx)
                rest = budget - 1
                if opt == "redex":
                    if rest < 1:
                        continue
                    b_fun = rng.randint(1, rest)
                    x = rng.choice(_NAMES)
                    body = self.term(ty, {**ctx, x: arg_ty}, b_fun - 1)
                    if body is None:
                        continue
                    arg = self.term(arg_ty, ctx, rest - b_fun)
                    if arg is not None:
                        return Node(self.app, (Binder(self.lam, x, body), arg))
                else:
                    b_fun = rng.randint(0, rest)
                    fun = self.term(TCon(ARROW, (arg_ty, ty)), ctx, b_fun)
                    if fun is None:
                        continue
                    arg = self.term(arg_ty, ctx, rest - b_fun)
                    if arg is not None:
                        return Node(self.app, (fun, arg))
        return None

    def _arg_type(self, ty, ctx):
        rng = self.rng
        # prefer argument types that some hypothesis can consume
        cands = [t.args[0] for t in ctx.values()
                 if isinstance(t, TCon) and t.name == ARROW and t.args[1] == ty]
        if cands and rng.random() < 0.6:
            return rng.choice(cands)
        if ctx and rng.random() < 0.3:
            return rng.choice(list(ctx.values()))
        return _random_type(rng, 1)


def generate_well_typed(calc: Calculus, size: int, seed: int, ty=None, ctx=None):
    """Deterministic closed (or ``ctx``-open) well-typed term with at most ``size`` heads.

    Grows a typing derivation top-down over ground types built from the
    atoms ``p`` and ``q``.
    """
    if size < 1:
        raise GenerationFailed("size must be at least 1")
    lam, app = _arrow_shape(calc)
    rng = random.Random(seed)
    ctx = dict(ctx or {})
    for attempt in range(200 if ty is None else 12):
        target = ty if ty is not None else _random_type(rng, 2 if attempt < 150 else 1)
        if ty is None and not isinstance(target, TCon):
            target = TCon(ARROW, (target, target)) if not ctx else target
        gen = _Gen(lam, app, rng)
        t = gen.term(target, ctx, size)
        if t is not None:
            return t
    if ty is None and not ctx:
        x = _NAMES[0]
        return Binder(lam, x, Var(x))
    raise GenerationFailed(f"no term of size <= {size} found")
