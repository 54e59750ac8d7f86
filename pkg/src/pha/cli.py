"""Command-line interface: ``pha compile-bn | explain | posterior | check``.

Exit status is 0 on success, 1 for domain or validation failures and 2 for
I/O or usage errors.  A path of ``-`` means stdin (or stdout for output).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from typing import List, Optional, Sequence

from . import __version__
from .bayesnet import compile_bn, parse_bn
from .engine import Search, StopCriteria
from .errors import DiagnosticError, PhaError
from .kb import build_kb, load_kb
from .oracle import marginal, posterior_exact
from .probability import distribution, mass, value_domain
from .syntax import parse_query
from .terms import Compound, Const

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2
SIDECAR_SUFFIX = ".domains.json"
MAX_CHECK_BITS = 14


class _IOFailure(Exception):
    pass


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path: str, text: str) -> None:
    try:
        if path == "-":
            sys.stdout.write(text)
            return
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc.strerror or exc}") from None


def _stop(args) -> StopCriteria:
    return StopCriteria(max_expansions=args.max_expansions, max_explanations=args.max_explanations,
                        epsilon=args.epsilon, floor=args.floor)


def _engine_options(args) -> dict:
    return {"keep_zero": args.keep_zero, "log_space": args.log_space}


# -- compile-bn ----------------------------------------------------------------

def cmd_compile_bn(args) -> int:
    bn = parse_bn(_read(args.input))
    compiled = compile_bn(bn, both_orders=args.both_orders, c_constraints=args.c_constraints)
    _write(args.output, compiled.text())
    if args.output != "-" and not args.no_sidecar:
        sidecar = {"domains": compiled.domains}
        _write(args.output + SIDECAR_SUFFIX, json.dumps(sidecar, indent=2) + "\n")
    return EXIT_OK


# -- explain -------------------------------------------------------------------

def query_report(query_text: str, search: Search, result, wall_time: float) -> dict:
    """The machine-readable report for one query."""
    return {
        "query": query_text,
        "explanations": [
            {"rank": i, "hypotheses": e.sorted_hypotheses(), "prior": e.prior}
            for i, e in enumerate(result.explanations, 1)
        ],
        "bounds": {"lower": result.lower, "upper": result.upper},
        "termination": result.termination.value,
        "expansions": result.expansions,
        "wall_time": wall_time,
    }


def _trace(stream):
    def on_step(search: Search, outcome) -> None:
        stream.write(f"{search.expansions}\t{outcome.kind.value}\t{search.p_d:.12g}\t{search.p_q:.12g}\n")
    return on_step


def cmd_explain(args) -> int:
    kb = load_kb(_read(args.kb))
    query = parse_query(args.query)
    start = time.perf_counter()
    search = Search(kb, query, **_engine_options(args))
    if args.trace:
        sys.stderr.write("expansion\tstep\tP_D\tP_Q\n")
    result = search.run(_stop(args), on_step=_trace(sys.stderr) if args.trace else None)
    report = query_report(args.query, search, result, time.perf_counter() - start)
    if args.format == "json":
        print(json.dumps(report, indent=2))
        return EXIT_OK
    print(f"query: {args.query or 'true'}")
    print(f"{'rank':>4}  {'prior':>14}  hypotheses")
    for row in report["explanations"]:
        print(f"{row['rank']:>4}  {row['prior']:>14.10g}  {', '.join(row['hypotheses'])}")
    print(f"bounds: [{result.lower:.12g}, {result.upper:.12g}]")
    print(f"termination: {result.termination.value} after {result.expansions} expansions")
    if result.disjointness_warning:
        print(f"warning: {result.duplicates} explanation(s) found by more than one proof; "
              "the rules are not exclusive and the mass may be overcounted", file=sys.stderr)
    return EXIT_OK


# -- posterior -----------------------------------------------------------------

def _values_for(args, kb) -> List[str]:
    if args.values:
        return [v.strip() for v in args.values.split(",") if v.strip()]
    if args.kb != "-":
        sidecar = args.kb + SIDECAR_SUFFIX
        if os.path.exists(sidecar):
            domains = json.loads(_read(sidecar)).get("domains", {})
            if args.var in domains:
                return list(domains[args.var])
    return value_domain(kb, args.var)


def cmd_posterior(args) -> int:
    kb = load_kb(_read(args.kb))
    obs = parse_query(args.obs)
    values = _values_for(args, kb)
    if not values:
        print(f"error: cannot determine the values of {args.var!r}; pass --values", file=sys.stderr)
        return EXIT_DOMAIN
    dist = distribution(kb, args.var, obs, _stop(args), values=values, **_engine_options(args))
    rows = [{"value": v, "lower": r.lower, "upper": r.upper, "exact": r.exact} for v, r in dist.items()]
    if args.format == "json":
        print(json.dumps({"variable": args.var, "observation": args.obs, "values": rows}, indent=2))
        return EXIT_OK
    print(f"P({args.var} | {args.obs or 'true'})")
    for row in rows:
        if row["exact"]:
            print(f"  {args.var}={row['value']}\t{row['lower']:.12g}\texact")
        else:
            print(f"  {args.var}={row['value']}\t[{row['lower']:.12g}, {row['upper']:.12g}]")
    return EXIT_OK


# -- check ---------------------------------------------------------------------

def _atom(name: str, value: str):
    return Compound(name, (Const(value),))


def cmd_check(args) -> int:
    bn = parse_bn(_read(args.bn))
    if bn.size_bits() > args.max_bits:
        print(f"error[size-guard]: network has {bn.size_bits():.1f} binary-equivalent variables; "
              f"the oracle is limited to {args.max_bits}", file=sys.stderr)
        return EXIT_DOMAIN
    kb = load_kb(_read(args.kb)) if args.kb else build_kb(compile_bn(bn).program)
    rows = []
    for node in bn.nodes:
        for value in node.values:
            engine = mass(kb, (_atom(node.name, value),)).lower
            oracle = marginal(bn, {node.name: value})
            rows.append(("marginal", f"{node.name}={value}", engine, oracle))

    rng = random.Random(args.seed)
    for _ in range(args.posteriors):
        observed = rng.sample(bn.nodes, rng.randint(1, max(1, min(2, len(bn.nodes) - 1))))
        obs = {n.name: rng.choice(n.values) for n in observed}
        if marginal(bn, obs) == 0:
            continue
        free = [n for n in bn.nodes if n.name not in obs] or list(bn.nodes)
        target = rng.choice(free)
        obs_atoms = tuple(_atom(k, v) for k, v in obs.items())
        try:
            dist = distribution(kb, target.name, obs_atoms, values=list(target.values))
        except PhaError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DOMAIN
        label = ",".join(f"{k}={v}" for k, v in obs.items())
        for value, res in dist.items():
            rows.append(("posterior", f"{target.name}={value} | {label}", res.lower,
                         posterior_exact(bn, target.name, value, obs)))

    worst = 0.0
    failures = 0
    print(f"{'kind':<10} {'quantity':<36} {'engine':>16} {'oracle':>16} {'abs diff':>10}")
    for kind, label, engine, oracle in rows:
        diff = abs(engine - oracle)
        worst = max(worst, diff)
        flag = "" if diff <= args.tolerance else "  MISMATCH"
        failures += bool(flag)
        print(f"{kind:<10} {label:<36} {engine:>16.12g} {oracle:>16.12g} {diff:>10.2e}{flag}")
    n_marg = sum(1 for r in rows if r[0] == "marginal")
    print(f"{n_marg} marginals and {len(rows) - n_marg} posteriors compared; max abs diff {worst:.3e}")
    if failures:
        print(f"{failures} mismatch(es) beyond tolerance {args.tolerance:g}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


# -- wiring ----------------------------------------------------------------------

def _add_stop_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("stopping and search")
    g.add_argument("--epsilon", type=float, help="stop once P_Q <= epsilon * max(P_D, floor)")
    g.add_argument("--floor", type=float, default=0.0, help="floor for the epsilon test (default 0)")
    g.add_argument("--max-explanations", type=int)
    g.add_argument("--max-expansions", type=int)
    g.add_argument("--keep-zero", action="store_true", help="keep zero-prior partial explanations")
    g.add_argument("--log-space", action="store_true", help="order the queue by log prior")
    p.add_argument("--format", choices=["table", "json"], default="table")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pha", description="Probabilistic Horn abduction.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile-bn", help="translate a JSON Bayesian network into a .pha program")
    p.add_argument("input")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--both-orders", action="store_true", help="emit both orders of each exclusivity pair")
    p.add_argument("--c-constraints", action="store_true", help="add constraints between c-hypotheses")
    p.add_argument("--no-sidecar", action="store_true", help="do not write OUTPUT.domains.json")
    p.set_defaults(func=cmd_compile_bn)

    p = sub.add_parser("explain", help="enumerate explanations of a ground conjunction")
    p.add_argument("kb")
    p.add_argument("query", help='e.g. "smoke(yes), report(yes)"')
    p.add_argument("--trace", action="store_true", help="print P_D and P_Q after every step to stderr")
    _add_stop_flags(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("posterior", help="posterior distribution of one variable")
    p.add_argument("kb")
    p.add_argument("--var", required=True)
    p.add_argument("--obs", default="", help="observed conjunction")
    p.add_argument("--values", help="comma-separated values (default: sidecar or knowledge base)")
    _add_stop_flags(p)
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("check", help="compare engine results with brute-force inference")
    p.add_argument("bn")
    p.add_argument("--kb", help="check this .pha file instead of compiling the network")
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--posteriors", type=int, default=5, help="number of sampled posterior checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-bits", type=float, default=MAX_CHECK_BITS)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DiagnosticError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return EXIT_DOMAIN
    except PhaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
