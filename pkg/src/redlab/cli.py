"""``redlab`` command-line front end.

Exit status: 0 on an answer (including REJECTED verdicts and negative
typecheck results), 1 on domain errors (untypable terms, invalid
calculi, missing branches), 2 on usage and parse errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import acceptability, infer, meaning, rewrite
from .calculus import (BUILTIN_NAMES, ParseError, UnknownCalculus, ValidationError,
                       load_calculus, parse_calculus, term_diagnostics, validate)
from .terms import TermSyntaxError, format_path, parse_path, parse_term, show
from .typelang import TypeSyntaxError, parse_type

SCHEMA_VERSION = 1
GRAPH_COMMANDS = ("graph",)


class UsageError(Exception):
    pass


class DomainError(Exception):
    pass


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _envelope(command, calc, **payload):
    return {"schema_version": SCHEMA_VERSION, "command": command, "calculus": calc.name,
            **payload}


# --- argument handling -------------------------------------------------------

def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="redlab",
                                description="Typed reduction workbench.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, term=True, nterms=1):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--calculus", default=None,
                         help=f"built-in calculus ({', '.join(BUILTIN_NAMES)}); default stlc")
        src.add_argument("--calculus-file", default=None, help="path to a .rcalc file")
        sp.add_argument("--format", choices=("text", "json", "dot"), default="text")
        if term:
            sp.add_argument("term", nargs="?" if nterms == 1 else "*",
                            help="term in concrete syntax")
            sp.add_argument("--term-file", default=None, help="read the term from a file")

    sp = sub.add_parser("infer", help="principal type reconstruction")
    common(sp)
    sp.add_argument("--derivation", action="store_true", help="print derivation trees")

    sp = sub.add_parser("typecheck", help="decide ctx |- term : hat")
    common(sp)
    sp.add_argument("--type", required=True, dest="hat", help="type or FROWN")
    sp.add_argument("--ctx", action="append", default=[], metavar="X:TYPE",
                    help="context binding, repeatable")

    sp = sub.add_parser("reduce", help="normalize, or contract one redex")
    common(sp)
    sp.add_argument("--max-steps", type=_positive, default=rewrite.DEFAULT_MAX_STEPS)
    sp.add_argument("--single", action="store_true", help="one leftmost-outermost step")
    sp.add_argument("--at", default=None, metavar="PATH", help="contract the redex at PATH")

    sp = sub.add_parser("graph", help="reduction graph")
    common(sp)
    sp.add_argument("--max-nodes", type=_positive, default=rewrite.DEFAULT_MAX_NODES)
    sp.add_argument("--max-depth", type=_positive, default=rewrite.DEFAULT_MAX_DEPTH)

    sp = sub.add_parser("confluence", help="joinability and normal-form uniqueness")
    common(sp, nterms=2)
    sp.add_argument("--max-nodes", type=_positive, default=rewrite.DEFAULT_MAX_NODES)
    sp.add_argument("--max-depth", type=_positive, default=rewrite.DEFAULT_MAX_DEPTH)
    sp.add_argument("--search-size", type=_positive, default=None,
                    help="search terms up to this size for two distinct normal forms")

    sp = sub.add_parser("classify", help="FULL / WEAK / REJECTED verdicts")
    common(sp, term=False)
    sp.add_argument("--rule", default=None, help="one reduction rule (default: all)")

    sp = sub.add_parser("sr-instances", help="check subject reduction on concrete redexes")
    common(sp, term=False)
    sp.add_argument("--rule", required=True)
    sp.add_argument("--trials", type=_positive, default=200)
    sp.add_argument("--seed", type=int, default=None, help="default: $REDLAB_SEED or 0")

    sp = sub.add_parser("sense", help="terms occurring in a derivation")
    common(sp)
    sp.add_argument("--branch", type=int, default=0)

    sp = sub.add_parser("denotation", help="normal form of the end-term")
    common(sp)
    sp.add_argument("--max-steps", type=_positive, default=rewrite.DEFAULT_MAX_STEPS)

    sp = sub.add_parser("validate", help="check a calculus definition")
    common(sp, term=False)
    return p


def _calculus(args):
    try:
        if args.calculus_file:
            with open(args.calculus_file, encoding="utf-8") as fh:
                src = fh.read()
            if args.command == "validate":
                return parse_calculus(src, validate_result=False)
            return parse_calculus(src)
        name = args.calculus or "stlc"
        if name not in BUILTIN_NAMES:
            raise UsageError(f"unknown calculus {name!r} (built-ins: {', '.join(BUILTIN_NAMES)})")
        return load_calculus(name)
    except UnknownCalculus as e:
        raise UsageError(e.args[0]) from None
    except OSError as e:
        raise UsageError(str(e)) from None
    except ParseError as e:
        raise UsageError(f"{args.calculus_file}:{e}") from None


def _terms(args, calc, want):
    texts = []
    if getattr(args, "term_file", None):
        with open(args.term_file, encoding="utf-8") as fh:
            texts.extend(line for line in (ln.strip() for ln in fh) if line)
    raw = args.term
    if isinstance(raw, list):
        texts.extend(raw)
    elif raw is not None:
        texts.append(raw)
    if len(texts) not in want:
        raise UsageError(f"expected {' or '.join(map(str, want))} term(s), got {len(texts)}")
    out = []
    for text in texts:
        try:
            t = parse_term(text)
        except TermSyntaxError as e:
            raise UsageError(f"term: {e}") from None
        diags = term_diagnostics(calc, t)
        if diags:
            raise UsageError("; ".join(str(d) for d in diags))
        out.append(t)
    return out


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("REDLAB_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"REDLAB_SEED={env!r} is not an integer") from None


# --- commands ----------------------------------------------------------------

def cmd_infer(args, calc):
    (t,) = _terms(args, calc, (1,))
    recon = infer.reconstruct(calc, t)
    if not recon.branches:
        raise DomainError(f"{show(t)} is untypable in {calc.name}")
    if args.format == "json":
        branches = []
        for b in recon.branches:
            j = b.to_json(calc)
            j["display"] = _judgment(calc, t, b)
            branches.append(j)
        return dumps(_envelope("infer", calc, term=show(t), branches=branches))
    lines = []
    for i, b in enumerate(recon.branches):
        prefix = f"[{i}] " if len(recon.branches) > 1 else ""
        lines.append(prefix + _judgment(calc, t, b))
        if args.derivation:
            lines.append(b.derivation.render(calc, letters=True, indent=1))
    return "\n".join(lines) + "\n"


def _judgment(calc, t, b):
    ctx = ", ".join(f"{x}: {calc.show_hat(h, True)}" for x, h in b.context)
    lhs = f"{ctx} |- " if ctx else ""
    return f"{lhs}{show(t)} : {calc.show_hat(b.conclusion, True)}"


def _parse_hat(calc, text, what):
    try:
        return parse_type(text, calc.connectives())
    except TypeSyntaxError as e:
        raise UsageError(f"{what}: {e}") from None


def cmd_typecheck(args, calc):
    (t,) = _terms(args, calc, (1,))
    hat = _parse_hat(calc, args.hat, "--type")
    ctx = {}
    for item in args.ctx:
        for part in item.split(","):
            if not part.strip():
                continue
            if ":" not in part:
                raise UsageError(f"--ctx expects X:TYPE, got {part!r}")
            x, ty = part.split(":", 1)
            ctx[x.strip()] = _parse_hat(calc, ty.strip(), "--ctx")
    try:
        ok = infer.typecheck(calc, ctx, t, hat)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.format == "json":
        return dumps(_envelope("typecheck", calc, term=show(t), type=calc.show_hat(hat),
                               context=[[x, calc.show_hat(h)] for x, h in ctx.items()],
                               result=ok))
    return ("true" if ok else "false") + "\n"


def _norm_json(r):
    if isinstance(r, rewrite.NormalForm):
        return {"outcome": "normal-form", "term": show(r.term), "steps": r.steps}
    if isinstance(r, rewrite.Cycle):
        return {"outcome": "cycle", "trace": [show(c) for c in r.trace]}
    return {"outcome": "step-limit", "term": show(r.last), "steps": r.steps}


def cmd_reduce(args, calc):
    (t,) = _terms(args, calc, (1,))
    if args.single or args.at is not None:
        try:
            strategy = parse_path(args.at) if args.at is not None else rewrite.LEFTMOST_OUTERMOST
        except ValueError:
            raise UsageError(f"bad position {args.at!r}") from None
        try:
            r = rewrite.step(calc, t, strategy)
        except rewrite.InvalidPosition as e:
            raise DomainError(str(e)) from None
        if isinstance(r, rewrite.NoRedex):
            payload = {"outcome": "no-redex"}
            text = "no redex\n"
        else:
            payload = {"outcome": "reduced", "term": show(r.next), "rule": r.rule,
                       "position": format_path(r.position)}
            text = f"{show(r.next)}    ({r.rule}@{format_path(r.position)})\n"
        if args.format == "json":
            return dumps(_envelope("reduce", calc, input=show(t), **payload))
        return text
    r = rewrite.normalize(calc, t, max_steps=args.max_steps)
    if args.format == "json":
        return dumps(_envelope("reduce", calc, input=show(t), **_norm_json(r)))
    if isinstance(r, rewrite.NormalForm):
        n = r.steps
        return f"normal form {show(r.term)} in {n} step{'s' if n != 1 else ''}\n"
    if isinstance(r, rewrite.Cycle):
        return "cycle: " + " ~> ".join(show(c) for c in r.trace) + "\n"
    return f"step limit reached after {r.steps} steps at {show(r.last)}\n"


def cmd_graph(args, calc):
    (t,) = _terms(args, calc, (1,))
    g = rewrite.reduction_graph(calc, t, args.max_nodes, args.max_depth)
    if args.format == "dot":
        return g.to_dot()
    if args.format == "json":
        return dumps(_envelope("graph", calc, term=show(t), graph=g.to_json()))
    lines = [f"{len(g.nodes)} nodes, {len(g.edges)} edges"
             + (" (truncated)" if g.truncated else "")]
    for a, b, r, p in g.edges:
        lines.append(f"  {show(g.nodes[a])}  ~{r}@{p}~>  {show(g.nodes[b])}")
    for c in g.normal_forms():
        lines.append(f"normal form: {show(c)}")
    return "\n".join(lines) + "\n"


def confluence_report(calc, t, max_nodes, max_depth) -> dict:
    """Unique normal form and pairwise joinability of one-step reducts of ``t``."""
    g = rewrite.reduction_graph(calc, t, max_nodes, max_depth)
    reducts = [r.next for r in rewrite.all_steps(calc, t)]
    pairs = []
    for i in range(len(reducts)):
        for j in range(i + 1, len(reducts)):
            r = rewrite.joinable(calc, reducts[i], reducts[j], max_nodes, max_depth)
            pairs.append({"left": show(reducts[i]), "right": show(reducts[j]),
                          "joined": isinstance(r, rewrite.Joined),
                          "witness": show(r.witness) if isinstance(r, rewrite.Joined) else None})
    return {"term": show(t), "normal_forms": [show(c) for c in g.normal_forms()],
            "truncated": g.truncated, "pairs": pairs,
            "confluent_within_bounds": len(g.normal_forms()) <= 1
            and all(p["joined"] for p in pairs)}


def cmd_confluence(args, calc):
    if args.search_size is not None:
        rep = rewrite.search_distinct_normal_forms(calc, args.search_size,
                                                   max_nodes=min(args.max_nodes, 200),
                                                   max_depth=min(args.max_depth, 24))
        payload = {"search": {
            "witness": show(rep["witness"]) if rep["witness"] is not None else None,
            "normal_forms": [show(x) for x in rep["normal_forms"]],
            "examined": rep["examined"], "truncated_graphs": rep["truncated_graphs"],
            "max_size": rep["max_size"], "exhausted": rep["exhausted"]}}
        if args.format == "json":
            return dumps(_envelope("confluence", calc, **payload))
        s = payload["search"]
        if s["witness"] is None:
            return (f"no term up to size {s['max_size']} has two normal forms "
                    f"({s['examined']} examined, {s['truncated_graphs']} truncated graphs)\n")
        return (f"{s['witness']} has normal forms {s['normal_forms'][0]} and "
                f"{s['normal_forms'][1]}\n")
    ts = _terms(args, calc, (1, 2))
    if len(ts) == 2:
        r = rewrite.joinable(calc, ts[0], ts[1], args.max_nodes, args.max_depth)
        payload = {"left": show(ts[0]), "right": show(ts[1]),
                   "joined": isinstance(r, rewrite.Joined),
                   "witness": show(r.witness) if isinstance(r, rewrite.Joined) else None}
        if args.format == "json":
            return dumps(_envelope("confluence", calc, **payload))
        if payload["joined"]:
            return f"joined at {payload['witness']}\n"
        return "not joined within bounds\n"
    rep = confluence_report(calc, ts[0], args.max_nodes, args.max_depth)
    if args.format == "json":
        return dumps(_envelope("confluence", calc, **rep))
    lines = [f"normal forms: {', '.join(rep['normal_forms']) or '(none found)'}"]
    for p in rep["pairs"]:
        lines.append(f"  {p['left']} | {p['right']}: "
                     + (f"joined at {p['witness']}" if p["joined"] else "not joined"))
    lines.append("confluent within bounds" if rep["confluent_within_bounds"]
                 else "NOT confluent within bounds")
    return "\n".join(lines) + "\n"


def cmd_classify(args, calc):
    if args.rule is not None:
        try:
            rule = calc.reduction(args.rule)
        except KeyError as e:
            raise UsageError(e.args[0]) from None
        try:
            results = [acceptability.classify_rule(calc, rule)]
        except acceptability.UntypableRedex as e:
            raise DomainError(str(e)) from None
    else:
        results = acceptability.classify_calculus(calc)
    if args.format == "json":
        return dumps(_envelope("classify", calc,
                               classifications=[r.to_json(calc) for r in results]))
    out = []
    for r in results:
        if isinstance(r, acceptability.RuleError):
            out.append(f"reduction {r.rule}: error: {r.error}")
        else:
            out.append(r.report(calc))
    return "\n".join(out) + "\n"


def cmd_sr_instances(args, calc):
    try:
        calc.reduction(args.rule)
    except KeyError as e:
        raise UsageError(e.args[0]) from None
    try:
        rep = acceptability.check_sr_instances(calc, args.rule, args.trials, _seed(args))
    except rewrite.GenerationFailed as e:
        raise DomainError(str(e)) from None
    if args.format == "json":
        return dumps(_envelope("sr-instances", calc, seed=_seed(args), report=rep.to_json(calc)))
    lines = [f"{rep.rule}: {rep.trials} trials, {rep.preserved} preserved, "
             f"{rep.hat_changed} to FROWN, {rep.failed} failed"]
    for redex, gamma, ty, con in rep.failures[:3]:
        ctx = ", ".join(f"{x}: {calc.show_hat(h)}" for x, h in gamma.items())
        lines.append(f"  {ctx} |- {show(redex)} : {calc.show_hat(ty)}  contracts to {show(con)}, which does not")
    return "\n".join(lines) + "\n"


def cmd_sense(args, calc):
    (t,) = _terms(args, calc, (1,))
    try:
        s = meaning.sense(calc, t, args.branch)
    except (meaning.Untypable, meaning.NoSuchBranch) as e:
        raise DomainError(str(e)) from None
    if args.format == "json":
        return dumps(_envelope("sense", calc, term=show(t), branch=args.branch,
                               sense=s.to_json()))
    return "\n".join(s.to_json()) + "\n"


def cmd_denotation(args, calc):
    (t,) = _terms(args, calc, (1,))
    d = meaning.denotation(calc, t, args.max_steps)
    if args.format == "json":
        return dumps(_envelope("denotation", calc, term=show(t), denotation=d.to_json()))
    if isinstance(d, meaning.EndTermNF):
        return d.to_json()["normal_form"] + "\n"
    return f"no normal form within bounds ({d.reason})\n"


def cmd_validate(args, calc):
    diags = validate(calc)
    if args.format == "json":
        text = dumps(_envelope("validate", calc, diagnostics=[
            {"code": d.code, "message": d.message, "where": d.where} for d in diags]))
    else:
        text = "".join(f"{d}\n" for d in diags) or "ok\n"
    if diags:
        raise DomainError(text.rstrip("\n"))
    return text


COMMANDS = {
    "infer": cmd_infer, "typecheck": cmd_typecheck, "reduce": cmd_reduce,
    "graph": cmd_graph, "confluence": cmd_confluence, "classify": cmd_classify,
    "sr-instances": cmd_sr_instances, "sense": cmd_sense, "denotation": cmd_denotation,
    "validate": cmd_validate,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.format == "dot" and args.command not in GRAPH_COMMANDS:
            raise UsageError("--format dot is only available for graph")
        calc = _calculus(args)
        stdout.write(COMMANDS[args.command](args, calc))
        return 0
    except UsageError as e:
        stderr.write(f"redlab: error: {e}\n")
        return 2
    except ValidationError as e:
        stderr.write("".join(f"redlab: {d}\n" for d in e.diagnostics))
        return 2
    except DomainError as e:
        if args.command == "validate":
            stdout.write(str(e) + "\n")
        else:
            stderr.write(f"redlab: {e}\n")
        return 1
    except (infer.UnknownHead, infer.BranchLimitExceeded) as e:
        stderr.write(f"redlab: {e}\n")
        return 1


def main(argv=None) -> int:
    sys.exit(run(argv))
