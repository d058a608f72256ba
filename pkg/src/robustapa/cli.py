"""Command line: summarize programs, close formulas, check simulations, run the law suite.

Exit codes: 0 when everything holds, 1 when a check is refuted, 2 on bad input.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from .flowgraph import GraphError, ReducibilityError, eliminate, is_reducible, summarize
from .frontend import ParseError, load_graph, parse_formula_file, parse_map
from .iterate import STARS
from .laws import LawConfig, run_laws
from .ratlin import DomainError
from .simcheck import check_loop_preserving, check_stutter_sim, verify_robustness

OK, REFUTED, BAD_INPUT = 0, 1, 2

FORCE_BANNER = ("*** WARNING: irreducible graph eliminated in reverse postorder.\n"
                "*** These summaries depend on the elimination order: no robustness guarantee. ***")


@dataclass
class RunConfig:
    command: str
    inputs: List[str] = field(default_factory=list)
    domain: str = "combined"
    samples: int = 100
    seed: int = 0
    verbose: int = 0
    force: bool = False

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("--samples must be at least 1")
        if not -2**63 <= self.seed < 2**64:
            raise ValueError("--seed must fit in 64 bits")
        if self.domain not in STARS:
            raise ValueError(f"unknown domain {self.domain!r}")


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None


def _graph(path: str):
    try:
        return load_graph(_read(path), Path(path).stem)
    except ParseError as e:
        raise InputError(f"{path}: {e}") from None


def _point(pt) -> str:
    if pt is None:
        return "(none)"
    pre, post = pt
    return ", ".join([f"{v}={x}" for v, x in pre.items()] + [f"{v}'={x}" for v, x in post.items()])


def cmd_summarize(args, out) -> int:
    G = _graph(args.program)
    star = STARS[args.domain]
    try:
        S = summarize(G, star=star, force=args.force)
    except ReducibilityError as e:
        raise InputError(f"{e}; pass --force to eliminate anyway") from None
    if args.force and not is_reducible(G):
        print(FORCE_BANNER, file=out)
    if args.order:
        print("order: " + " ".join(map(str, S.order)), file=out)
    out.write(S.render())
    return OK


def cmd_star(args, out) -> int:
    try:
        F = parse_formula_file(_read(args.formula))
    except ParseError as e:
        raise InputError(f"{args.formula}: {e}") from None
    print(STARS[args.domain](F), file=out)
    return OK


def cmd_check_sim(args, out) -> int:
    G, H = _graph(args.graph_g), _graph(args.graph_h)
    try:
        m = parse_map(_read(args.map), G, H)
        m.validate(G, H)
    except (ParseError, DomainError) as e:
        raise InputError(f"{args.map}: {e}") from None
    sim = check_stutter_sim(G, H, m)
    if not sim:
        u, v = sim.edge
        print(f"stuttering simulation: REFUTED at edge {u} -> {v}: {sim.reason}", file=out)
        print(f"  weight: {G.weight(u, v)}", file=out)
        print(f"  counterexample: {_point(sim.point)}", file=out)
        return REFUTED
    print("stuttering simulation: ok", file=out)
    if args.verbose:
        for (u, v), t in sorted(sim.tags.items(), key=str):
            print(f"  {u} -> {v}: {t}", file=out)
    if not (args.loop_preserving or args.robustness):
        return OK
    lp = check_loop_preserving(G, H, m, sim)
    if not lp:
        print(f"loop preservation: REFUTED ({lp.clause}): {lp.detail}", file=out)
        return REFUTED
    counts = ", ".join(f"{v}:{n}" for v, n in lp.unrolling.items()) or "no loops"
    print(f"loop preservation: ok (unrolling {counts})", file=out)
    if not args.robustness:
        return OK
    try:
        res = verify_robustness(G, H, m, STARS[args.domain])
    except ReducibilityError as e:
        raise InputError(str(e)) from None
    if not res:
        print(f"robustness: REFUTED at vertex {res.vertex}", file=out)
        print(f"  G summary: {res.g_summary}", file=out)
        print(f"  H summary: {res.h_summary}", file=out)
        print(f"  counterexample: {_point(res.point)}", file=out)
        return REFUTED
    print("robustness: ok", file=out)
    return OK


def cmd_laws(args, out) -> int:
    try:
        cfg = LawConfig(samples=args.samples, seed=args.seed, nvars=args.vars, domain=args.domain)
    except ValueError as e:
        raise InputError(str(e)) from None
    report = run_laws(cfg)
    for law, n in report.checked.items():
        bad = sum(1 for f in report.failures if f.law == law)
        print(f"{law:<13} {n - bad}/{n}", file=out)
    for f in report.failures:
        print(f.render(), file=out)
    print("all laws hold" if report.ok else f"{len(report.failures)} law violations", file=out)
    return OK if report.ok else REFUTED


def cmd_eliminate(args, out) -> int:
    G = _graph(args.graph)
    if args.vertex not in G.vertices:
        raise InputError(f"no vertex {args.vertex!r} in {G.name}")
    try:
        out.write(eliminate(G, args.vertex, STARS[args.domain]).to_text())
    except GraphError as e:
        raise InputError(str(e)) from None
    return OK


def _seed(text: str) -> int:
    v = int(text, 0)
    if not -2**63 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robustapa", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def domain(sp):
        sp.add_argument("--domain", choices=sorted(STARS), default="combined", help="iteration operator")

    s = sub.add_parser("summarize", help="per-vertex summaries of a program or graph file")
    s.add_argument("program")
    s.add_argument("--order", action="store_true", help="also print the elimination order")
    s.add_argument("--force", action="store_true", help="eliminate irreducible graphs in reverse postorder")
    domain(s)
    s.set_defaults(run=cmd_summarize)

    s = sub.add_parser("star", help="apply an iteration operator to a formula file")
    s.add_argument("formula")
    domain(s)
    s.set_defaults(run=cmd_star)

    s = sub.add_parser("check-sim", help="check a stuttering simulation between two graphs")
    s.add_argument("graph_g")
    s.add_argument("graph_h")
    s.add_argument("map")
    s.add_argument("--loop-preserving", action="store_true")
    s.add_argument("--robustness", action="store_true", help="also compare the summaries (implies --loop-preserving)")
    domain(s)
    s.set_defaults(run=cmd_check_sim)

    s = sub.add_parser("laws", help="randomized law suite for an iteration operator")
    s.add_argument("--samples", type=_positive, default=100)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--vars", type=int, choices=(1, 2, 3), default=2)
    domain(s)
    s.set_defaults(run=cmd_laws)

    s = sub.add_parser("eliminate", help="eliminate one vertex and print the resulting graph")
    s.add_argument("graph")
    s.add_argument("vertex")
    domain(s)
    s.set_defaults(run=cmd_eliminate)
    return p


def main(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return BAD_INPUT if e.code else OK
    inputs = [getattr(args, k) for k in ("program", "formula", "graph_g", "graph_h", "map", "graph")
              if getattr(args, k, None)]
    try:
        args.config = RunConfig(args.command, inputs, getattr(args, "domain", "combined"),
                                getattr(args, "samples", 1), getattr(args, "seed", 0), args.verbose,
                                getattr(args, "force", False))
        return args.run(args, out)
    except InputError as e:
        print(f"error: {e}", file=err)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
