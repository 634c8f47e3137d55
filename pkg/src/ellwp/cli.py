"""Command-line front end: ``ellwp <subcommand> ...``.

Exit codes: 0 when a verdict (of any kind) was produced, 2 on usage
errors, 3 when a resource budget ran out.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import freedec, perm, present, wreath
from .term import LTerm, ParseError, UnknownGenerator, normalize, parse, to_text

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_EXHAUSTED = 3


class UsageError(Exception):
    pass


def _alphabet(text: Optional[str]) -> Optional[list[str]]:
    if text is None:
        return None
    names = [g.strip() for g in text.split(",") if g.strip()]
    if len(set(names)) != len(names):
        raise UsageError(f"repeated generator in --gens {text!r}")
    return names


def _read_term(text: str, alphabet: Optional[Sequence[str]]) -> LTerm:
    if text == "-":
        text = sys.stdin.read().strip()
    return parse(text, alphabet)


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(human)


# ---------------------------------------------------------------------------
# subcommands


def cmd_decide(args) -> int:
    t = _read_term(args.term, _alphabet(args.gens))
    v = freedec.decide(
        t, max_diagrams=args.max_diagrams, jobs=args.jobs, deterministic=args.deterministic, equalities=args.equalities
    )
    lines = [f"{v.kind.value} ({v.explored} diagrams)"]
    if args.render and v.witness is not None:
        lines.append(freedec.render(v.witness))
    _emit(args, v.to_json(), "\n".join(lines))
    return EXIT_OK


def cmd_sign(args) -> int:
    t = _read_term(args.term, _alphabet(args.gens))
    s = freedec.sign(
        t, max_diagrams=args.max_diagrams, jobs=args.jobs, deterministic=args.deterministic, equalities=args.equalities
    )
    _emit(args, {"sign": s.value}, s.value)
    return EXIT_OK


def cmd_witness(args) -> int:
    t = _read_term(args.term, _alphabet(args.gens))
    w = perm.find_witness(t, budget=args.budget, seed=args.seed, jobs=args.jobs, deterministic=args.deterministic)
    if w is None:
        _emit(args, {"witness": None}, f"no witness in {args.budget} samples")
        return EXIT_OK
    human = [f"x = {w.x}, x t = {w.image}"]
    human += [f"{g} = {m.to_json()}" for g, m in sorted(w.assignment.items())]
    _emit(args, {"witness": w.to_json()}, "\n".join(human))
    return EXIT_OK


def _g_oracle(args, g_gens: list[str]) -> wreath.GroupOracle:
    if args.g_oracle == "z2":
        if len(g_gens) != 1:
            raise UsageError("--g-oracle z2 needs exactly one G generator")
        return wreath.z2_oracle(g_gens[0])
    return wreath.free_oracle(g_gens, max_diagrams=args.max_diagrams)


def cmd_wreath_decide(args) -> int:
    g_gens = _alphabet(args.g_gens) or []
    tops = [args.shift_gen] if args.tower == "z" else [args.inner_gen, args.shift_gen]
    t = _read_term(args.term, g_gens + tops)
    oracle = _g_oracle(args, g_gens)
    if args.tower == "z":
        v = wreath.w_decide(t, oracle, args.shift_gen)
    else:
        v = wreath.lex_w_decide(t, oracle, args.inner_gen, args.shift_gen)
    human = v.kind.value if v.value is None else f"{v.kind.value} {v.value}"
    _emit(args, v.to_json(), human)
    return EXIT_OK


def cmd_sum_factor(args) -> int:
    partition = {}
    for item in args.component:
        gen, sep, comp = item.partition("=")
        if not sep or not gen or not comp:
            raise UsageError(f"--component expects GEN=COMPONENT, got {item!r}")
        partition[gen.strip()] = comp.strip()
    t = _read_term(args.term, list(partition))
    factors = wreath.sum_factor(t, partition)
    payload = {"factors": {k: to_text(v) for k, v in factors.items()}, "product": wreath.factor_text(factors)}
    _emit(args, payload, payload["product"])
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        p = present.Presentation.load(args.presentation)
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read presentation: {exc}") from exc
    w = _read_term(args.term, list(p.generators))
    cert = present.solve(p, w, budget=args.budget, seed=args.seed, max_diagrams=args.max_diagrams)
    payload = cert.to_json(p)
    _emit(args, payload, json.dumps(payload, sort_keys=True))
    return EXIT_OK


def cmd_gdagger(args) -> int:
    g_gens = _alphabet(args.gens) or []
    try:
        with open(args.pairs) as fh:
            raw = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read pairs: {exc}") from exc
    pairs = [(parse(u, g_gens), parse(v, g_gens)) for u, v in raw]
    try:
        rels = present.gdagger_schema(g_gens, pairs, args.m, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    payload = {
        "generators": present.gdagger_alphabet(g_gens, args.m),
        "relators": [r.to_json() for r in rels],
    }
    _emit(args, payload, "\n".join(to_text(r.relator) for r in rels))
    return EXIT_OK


def cmd_godel(args) -> int:
    alphabet = _alphabet(args.gens) or []
    if args.encode is not None:
        words = []
        for part in args.encode.split(","):
            rows = normalize(parse(part.strip() or "e", alphabet)).rows
            if len(rows) != 1 or len(rows[0]) != 1:
                raise UsageError(f"{part.strip()!r} is not a group word")
            words.append(rows[0][0])
        n = present.godel_index(words, alphabet, args.padding)
        _emit(args, {"index": n}, str(n))
        return EXIT_OK
    if args.index is None:
        raise UsageError("give an index or --encode")
    s = present.pseudo_godel(args.index, alphabet)
    payload = {"index": args.index, "meet_string": [str(w) for w in s]}
    _emit(args, payload, " /\\ ".join(str(w) for w in s))
    return EXIT_OK


def _plmap(text: str) -> perm.PLMap:
    try:
        return perm.PLMap((Fraction(str(x)), Fraction(str(y))) for x, y in json.loads(text))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad PL map {text!r}: {exc}") from exc


def cmd_conjugator(args) -> int:
    f, g = _plmap(args.f), _plmap(args.g)
    h0 = json.loads(args.h0) if args.h0 else None
    try:
        h = perm.conjugator(f, g, Fraction(args.alpha), Fraction(args.beta), h0, budget=args.budget)
        values = [(Fraction(x), h(Fraction(x))) for x in args.at]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    payload = {"values": [[str(x), str(y)] for x, y in values]}
    _emit(args, payload, "\n".join(f"h({x}) = {y}" for x, y in values))
    return EXIT_OK


# ---------------------------------------------------------------------------


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit one JSON document")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=_positive, default=1)
    common.add_argument("--max-diagrams", type=_positive, default=freedec.DEFAULT_MAX_DIAGRAMS)
    common.add_argument("--budget", type=_positive, default=1000)
    common.add_argument("--deterministic", action="store_true", help="parallel runs report the same answer as serial ones")

    ap = argparse.ArgumentParser(prog="ellwp", description="Word problems for lattice-ordered groups.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, term=True, gens=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if gens:
            p.add_argument("--gens", help="comma-separated generators")
        if term:
            p.add_argument("term", help="term text, or - for stdin")
        p.set_defaults(func=func)
        return p

    p = add("decide", cmd_decide, "is the term the identity in the free l-group?")
    p.add_argument("--render", action="store_true", help="draw the refuting diagram")
    p.add_argument("--equalities", action="store_true", help="also branch on coinciding points")
    p = add("sign", cmd_sign, "Zero, Positive, Negative or Incomparable")
    p.add_argument("--equalities", action="store_true", help="also branch on coinciding points")
    add("witness", cmd_witness, "search random PL assignments for a moved point")

    p = add("wreath-decide", cmd_wreath_decide, "word problem in G wr Z or G wr (Z lex Z)", gens=False)
    p.add_argument("--g-gens", required=True, help="generators of G")
    p.add_argument("--tower", choices=["z", "zlexz"], default="z")
    p.add_argument("--g-oracle", choices=["free", "z2"], default="free")
    p.add_argument("--shift-gen", default="c")
    p.add_argument("--inner-gen", default="a")

    p = add("sum-factor", cmd_sum_factor, "split a term over a cardinal sum", gens=False)
    p.add_argument("--component", action="append", default=[], metavar="GEN=COMP", required=True)

    p = add("solve", cmd_solve, "prove or refute w = e in a presentation", gens=False)
    p.add_argument("--presentation", required=True)

    p = add("gdagger", cmd_gdagger, "emit the truncated relator schema", term=False)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--pairs", required=True, help="JSON list of [u, v] term pairs")

    p = add("godel", cmd_godel, "decode or encode pseudo-Goedel indices", term=False)
    p.add_argument("index", nargs="?", type=int)
    p.add_argument("--encode", help="comma-separated words of a meet string")
    p.add_argument("--padding", type=int, default=0)

    p = add("conjugator", cmd_conjugator, "evaluate h with h^-1 f h = g", term=False, gens=False)
    p.add_argument("--f", required=True, help="breakpoints as JSON, e.g. [[0,0],[1,2],[4,4]]")
    p.add_argument("--g", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--h0", help="breakpoints of h0 as JSON; affine if omitted")
    p.add_argument("--at", nargs="+", required=True, help="points to evaluate h at")
    return ap


def run(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except freedec.ResourceExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except perm.ConjugatorBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (UsageError, ParseError, UnknownGenerator) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
