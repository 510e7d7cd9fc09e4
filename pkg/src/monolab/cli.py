"""Command-line entry point: ``monolab <command> [options]``.

Exit codes: 0 success, 2 usage or parse error, 3 capability error,
4 I/O error, 5 bracket error (the message names the end to extend).
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace

import numpy as np

from .errors import BracketError, CapabilityError, ConsistencyError, DomainError
from .io import RunReport, load_state, scan_csv, write_atomic
from .measures import default_cut, evaluate, is_closed_form, parse_cut, parse_measure
from .monogamy import (
    PowerConfig,
    SamplePool,
    SamplingConfig,
    _refine,
    default_split,
    estimate_monogamy_power,
    estimate_polygamy_power,
    parse_split,
    residual,
)
from .propositions import STATEMENTS, PropositionConfig, proposition_driver
from .reproduce import TARGETS, reproduce
from .roof import RoofBudget
from .states import RandomSpec, ghz_state, random_state, w_state

EXIT_OK, EXIT_USAGE, EXIT_CAPABILITY, EXIT_IO, EXIT_BRACKET = 0, 2, 3, 4, 5
CLOSED_SAMPLES, ROOF_SAMPLES = 5000, 200

SAMPLES_HELP = (f"number of seeded samples (default {CLOSED_SAMPLES} when every term has a "
                f"closed form, {ROOF_SAMPLES} when terms need convex-roof optimization)")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise DomainError(message)


def parse_dims(text: str) -> tuple:
    try:
        dims = tuple(int(t) for t in text.replace("x", ",").split(",") if t)
    except ValueError as exc:
        raise DomainError(f"cannot parse dims {text!r}: expected e.g. 2,2,2") from exc
    if not dims:
        raise DomainError("dims must be non-empty")
    return dims


def parse_grid(text: str) -> list:
    """``lo:hi:step`` inclusive of ``hi``, or a comma list of increasing exponents."""
    try:
        if ":" in text:
            lo, hi, step = (float(t) for t in text.split(":"))
            if step <= 0:
                raise DomainError("grid step must be positive")
            n = int(np.floor((hi - lo) / step + 1e-9)) + 1
            grid = [round(lo + i * step, 12) for i in range(max(n, 0))]
        else:
            grid = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise DomainError(f"cannot parse grid {text!r}: expected lo:hi:step") from exc
    if not grid:
        raise DomainError(f"grid {text!r} is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("grid must be strictly increasing")
    if grid[0] <= 0:
        raise DomainError("grid exponents must be positive")
    return grid


def parse_bracket(text: str) -> tuple:
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError as exc:
        raise DomainError(f"cannot parse bracket {text!r}: expected lo:hi") from exc
    return lo, hi


def _add_state_source(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--state", metavar="PATH", help="state file (JSON)")
    g.add_argument("--ghz", type=int, metavar="N", help="N-qubit GHZ state")
    g.add_argument("--w", type=int, metavar="N", help="N-qubit W state")
    g.add_argument("--haar", metavar="DIMS", help="seeded random state with these dims, e.g. 2,2,2")
    p.add_argument("--index", type=int, default=0, help="sample index for --haar (default 0)")
    p.add_argument("--rank", type=int, default=None, help="induced mixed state of this rank for --haar")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--out", metavar="PATH", help="write the report to PATH (atomically)")
    p.add_argument("--json", action="store_true", help="print the full JSON report")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="monolab", description="Entanglement monogamy and polygamy laboratory.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("measure", help="evaluate one measure on one state")
    _add_state_source(p)
    p.add_argument("--measure", required=True, help="measure text, e.g. C, C^2, a:C, ~N, renyi:2")
    p.add_argument("--cut", help="bipartition, e.g. 0|1,2 (default 0|rest)")
    p.add_argument("--budget", type=int, help="roof optimizer iterations per restart (default 500)")
    _add_common(p)

    p = sub.add_parser("residual", help="monogamy residual of one state")
    _add_state_source(p)
    p.add_argument("--measure", required=True)
    p.add_argument("--alpha", type=float, default=1.0, help="residual exponent (default 1)")
    p.add_argument("--split", help="focus and partner groups, e.g. 0|1|2 (default 0|1|...|n-1)")
    p.add_argument("--budget", type=int, help="roof optimizer iterations per restart (default 500)")
    _add_common(p)

    p = sub.add_parser("scan", help="worst residual over sampled states across an exponent grid")
    p.add_argument("--measure", required=True)
    p.add_argument("--grid", required=True, help="lo:hi:step (inclusive) or comma list")
    p.add_argument("--dims", default="2,2,2")
    p.add_argument("--samples", type=int, help=SAMPLES_HELP)
    p.add_argument("--budget", type=int, help="adversarial refinement evaluations per start "
                   "(default 1500 closed form, 0 roof-backed)")
    p.add_argument("--direction", choices=("monogamy", "polygamy"), default=None,
                   help="default: polygamy for assisted measures, else monogamy")
    p.add_argument("--mixed-rank", type=int, default=None, help="sample induced mixed states of this rank")
    p.add_argument("--split")
    _add_common(p)

    p = sub.add_parser("estimate", help="bisect for the monogamy or polygamy power")
    p.add_argument("--measure", required=True)
    p.add_argument("--kind", choices=("monogamy", "polygamy"), default=None,
                   help="default: polygamy for assisted measures, else monogamy")
    p.add_argument("--dims", default="2,2,2")
    p.add_argument("--samples", type=int, help=SAMPLES_HELP)
    p.add_argument("--budget", type=int, help="adversarial refinement evaluations per start")
    p.add_argument("--bracket", default="0.25:8", help="lo:hi search bracket (default 0.25:8)")
    p.add_argument("--resolution", type=float, default=0.02, help="final bracket width (default 0.02)")
    p.add_argument("--tol", type=float, help="residual tolerance (default 1e-6 closed form, 5e-3 roof)")
    p.add_argument("--mixed-rank", type=int, default=None)
    p.add_argument("--split")
    _add_common(p)

    p = sub.add_parser("prop", help="run a sampling driver for one of the power or roof properties")
    p.add_argument("prop_id", choices=sorted(STATEMENTS))
    p.add_argument("--measure")
    p.add_argument("--samples", type=int)
    p.add_argument("--grid")
    p.add_argument("--tol", type=float)
    _add_common(p)

    p = sub.add_parser("reproduce", help="desk-scale reproductions")
    p.add_argument("target", help="one of: " + ", ".join(TARGETS))
    p.add_argument("--samples", type=int, help="override sample counts for table targets")
    p.add_argument("--budget", type=int, help="adversarial (tables) or per-round (conjecture) evaluations")
    _add_common(p)
    return parser


def _state(args):
    if args.state:
        return load_state(args.state), {"file": args.state}
    if args.ghz is not None:
        return ghz_state(args.ghz), {"ghz": args.ghz}
    if args.w is not None:
        return w_state(args.w), {"w": args.w}
    dims = parse_dims(args.haar)
    kind = "haar_pure" if args.rank is None else "induced_mixed"
    spec = RandomSpec(args.seed, args.index, kind, args.rank)
    return random_state(dims, spec), {"dims": list(dims), "random_spec": spec.to_dict()}


def _roof(args):
    return RoofBudget(seed=args.seed) if args.budget is None else RoofBudget(max_iter=args.budget, seed=args.seed)


def _closed(measure, dims, split, mixed_rank) -> bool:
    """True when every residual term of a sampled state has a closed form."""
    terms = split.term_cuts() + ([split.whole] if mixed_rank is not None else [])
    side = lambda ks: int(np.prod([dims[k] for k in ks]))
    return all(is_closed_form(replace(measure, tilde=False), (side(c.left), side(c.right)), False)
               for c in terms)


def _sampling(args, measure, dims):
    split = (parse_split(args.split) if args.split else default_split(len(dims))).check(len(dims))
    closed = _closed(measure, dims, split, args.mixed_rank)
    n = args.samples if args.samples is not None else (CLOSED_SAMPLES if closed else ROOF_SAMPLES)
    budget = args.budget if args.budget is not None else (1500 if closed else 0)
    return SamplingConfig(dims=dims, n_samples=n, seed=args.seed, adversarial_budget=budget,
                          mixed_rank=args.mixed_rank, split=split)


def cmd_measure(args):
    measure = parse_measure(args.measure)
    state, src = _state(args)
    cut = parse_cut(args.cut) if args.cut else default_cut(state)
    mv = evaluate(measure, state, cut, _roof(args))
    payload = {"measure": measure.text, "cut": cut.text(), "state": src, **mv.to_dict()}
    return "MeasureValue", payload, f"{measure.text} [{cut.text()}] = {mv.value:.10g} ({mv.method})"


def cmd_residual(args):
    measure = parse_measure(args.measure)
    state, src = _state(args)
    split = parse_split(args.split) if args.split else None
    rep = residual(measure, args.alpha, state, split, _roof(args))
    payload = rep.to_dict()
    payload["state_ref"]["source"] = src
    return "ResidualReport", payload, f"residual {rep.measure} at {rep.exponent:g} [{rep.split}] = {rep.residual:.10g}"


def cmd_scan(args):
    measure = parse_measure(args.measure)
    grid = parse_grid(args.grid)
    dims = parse_dims(args.dims)
    direction = args.direction or ("polygamy" if measure.assisted else "monogamy")
    if direction == "polygamy" and not measure.assisted:
        raise DomainError("polygamy scans need an assisted measure (prefix a:)")
    cfg = _sampling(args, measure, dims)
    pool = SamplePool(measure, cfg)
    rows = []
    for a in grid:
        rep, _ = _refine(pool, a, direction)
        ref = rep.state_ref
        wid = f"sample:{ref['sample_index']}" if "sample_index" in ref else f"refined:{ref['fingerprint']}"
        rows.append({"exponent": a, "worst_residual": rep.residual, "witness_id": wid})
    payload = {"measure": measure.text, "direction": direction, "sampling": cfg.validated().to_dict(),
               "tol": pool.tol, "rows": rows}
    return "ScanTable", payload, scan_csv(rows).rstrip("\n")


def cmd_estimate(args):
    measure = parse_measure(args.measure)
    dims = parse_dims(args.dims)
    kind = args.kind or ("polygamy" if measure.assisted else "monogamy")
    config = PowerConfig(parse_bracket(args.bracket), args.resolution, _sampling(args, measure, dims), args.tol)
    fn = estimate_polygamy_power if kind == "polygamy" else estimate_monogamy_power
    est = fn(measure, dims, config)
    lo, hi = est.bracket
    return "PowerEstimate", est.to_dict(), f"{kind} power of {est.measure}: {est.estimate:.4f} in [{lo:.4f}, {hi:.4f}]"


def cmd_prop(args):
    cfg = PropositionConfig(n_samples=args.samples, seed=args.seed,
                            grid=tuple(parse_grid(args.grid)) if args.grid else None,
                            measure=args.measure, tol=args.tol)
    rep = proposition_driver(args.prop_id, cfg)
    verdict = "PASS" if rep.passed else "FAIL"
    return "PropertyReport", rep.to_dict(), f"{rep.prop_id} {verdict}: {rep.n_passed}/{rep.n_checked}"


def cmd_reproduce(args):
    if args.target not in TARGETS:
        raise DomainError(f"unknown target {args.target!r}; choose from {', '.join(TARGETS)}")
    payload = reproduce(args.target, args.seed, args.samples, args.budget)
    return "Reproduction", payload, _reproduce_text(args.target, payload)


def _reproduce_text(target, p):
    if target == "examples":
        c = p["claimed"]
        lines = [f"claimed: C={c['C_whole']} C_first={c['C_first']} second separable={c['second_separable']}",
                 "focus b1 b2  C(f|rest)  C(f,b1)  C(f,b2)  sep(f,b1) sep(f,b2)  match"]
        for r in p["rows"]:
            lines.append(f"{r['focus']:5d} {r['b1']:2d} {r['b2']:2d}  {r['C_whole']:9.4f} {r['C_first']:8.4f} "
                         f"{r['C_second']:8.4f}  {str(r['first_ppt']):9s} {str(r['second_separable']):9s}  "
                         f"{r['matches_claim']}")
        if not p["any_orientation_matches"]:
            lines.append("DISCREPANCY: no orientation reproduces the claimed triple")
        return "\n".join(lines)
    if target in ("table1", "table2"):
        return "\n".join(f"{'ok ' if r['agrees'] else 'BAD'} {r['row']:40s} worst residual {r['worst_residual']:+.3e}"
                         f" holds={r['holds']}" for r in p["rows"])
    if target == "theorem2":
        out = []
        for t in p["tables"]:
            for r in t["rows"]:
                out.append(f"{t['measure']:3s} exponent {r['exponent']:g}: lhs {r['lhs']:.6g} rhs {r['rhs_terms']}")
        return "\n".join(out)
    return "\n".join(f"{s['measure']}: best constrained violation {s['best_violation']:.4g} (eps {s['epsilon']})"
                     for s in p["scans"])


COMMANDS = {"measure": cmd_measure, "residual": cmd_residual, "scan": cmd_scan, "estimate": cmd_estimate,
            "prop": cmd_prop, "reproduce": cmd_reproduce}


def run(argv=None):
    """Execute a command and return ``(exit_code, RunReport or None)``."""
    argv = list(sys.argv[1:] if argv is None else argv)
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        payload_type, payload, text = COMMANDS[args.command](args)
        report = RunReport(["monolab", *argv], args.seed, payload_type, payload, time.perf_counter() - t0)
        if args.out:
            body = scan_csv(payload["rows"]) if args.command == "scan" else report.dumps()
            try:
                write_atomic(args.out, body)
            except OSError as exc:
                raise OSError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
        print(report.dumps() if args.json else text)
        return EXIT_OK, report
    except BracketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BRACKET, None
    except CapabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY, None
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE, None
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO, None
    except ConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return 1, None


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
