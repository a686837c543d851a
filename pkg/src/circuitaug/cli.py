"""Command-line entry point: ``python -m circuitaug <command> ...``.

Exit codes: 0 success, 2 invalid input or flags, 3 numerical failure or a
violated invariant. Errors are also reported on stderr as one JSON line.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import numeric as nm
from .augment import SolveOptions, solve_existential, solve_full, solve_wallacher
from .lp_kernel import solve as kernel_solve, solve_standard
from .lp_model import KINDS, InstanceError, generate, load_instance, sample_feasible_points, save_instance
from .mcp.oracles import EXACT_MAX_N, McpOracle, optimal_value
from .mcp.piecewise import slc
from .mcp.polarized import polarized_decomposition
from .trace import export, load as load_trace, verify_walk

OPT_REL = 1e-7


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind = code, kind


def _size(text: str):
    try:
        m, n = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like m,n (got {text!r})")
    return m, n


def _seeds(text: str) -> list:
    """``seeds=1..20`` or ``1,4,7`` or ``3..5``."""
    text = text.split("=", 1)[1] if text.startswith("seeds=") else text
    out = []
    try:
        for part in text.split(","):
            if ".." in part:
                a, b = part.split("..")
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad corpus spec {text!r}")
    return out


def _load(path):
    try:
        return load_instance(path)
    except FileNotFoundError:
        raise CliError(2, "io", f"instance file not found: {path}")
    except InstanceError as exc:
        raise CliError(2, "instance", str(exc))


def center_ish(inst) -> np.ndarray:
    """Average of the ``n`` vertices maximizing each coordinate (relative interior when bounded)."""
    pts = []
    for i in range(inst.n):
        cost = np.zeros(inst.n)
        cost[i] = -1.0
        sol = solve_standard(inst.A, inst.b, cost)
        if sol.status == "infeasible":
            raise CliError(2, "x0", "instance is infeasible")
        if sol.status == "optimal":
            pts.append(np.asarray(sol.x, dtype=float))
    if not pts:
        sol = solve_standard(inst.A, inst.b, np.zeros(inst.n))
        pts.append(np.asarray(sol.x, dtype=float))
    return np.maximum(sum(pts) / len(pts), 0.0)


def _x0(inst, spec: str, seed: int):
    if spec == "witness" and inst.witness is not None:
        return inst.witness
    if spec in ("witness", "analytic-center-ish"):
        return center_ish(inst)
    if spec == "random":
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        return sample_feasible_points(inst, 1, rng)[0]
    try:
        return np.array(json.loads(Path(spec).read_text()), dtype=float)
    except (OSError, ValueError) as exc:
        raise CliError(2, "x0", f"cannot read x0 from {spec}: {exc}")


def run_rule(inst, x0, rule: str, opts: SolveOptions):
    if rule == "wallacher":
        return solve_wallacher(inst, x0, opts)
    if rule == "full":
        return solve_full(inst, x0, opts)
    exact = inst.n <= EXACT_MAX_N
    v_star = kernel_solve(inst, exact=exact).objective
    A, _, c = inst.data(exact)
    g0 = c.dot(nm.to_exact(x0) if exact else np.asarray(x0, dtype=float)) - v_star
    if g0 <= 0:
        return solve_wallacher(inst, x0, opts)
    oracle = McpOracle(inst, g0, exact=exact, v_star=v_star)
    return solve_existential(inst, x0, polarized_decomposition(oracle, g0), oracle, opts)


def _summary(inst, rule, fp, trace) -> dict:
    sol = kernel_solve(inst, exact=inst.n <= EXACT_MAX_N)
    v_star = float(sol.objective)
    obj = float(fp.objective)
    return {
        "instance": inst.name, "rule": rule, "objective": obj, "kernel_optimum": v_star,
        "optimal": abs(obj - v_star) <= OPT_REL * (1 + abs(v_star)),
        "augmentations": trace.totals["wallacher_steps"] + trace.totals["lsc_steps"], **trace.totals,
    }


# -- commands --------------------------------------------------------------------

def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ss = np.random.SeedSequence(args.seed)
    for child in ss.spawn(args.count):
        seed = int(child.generate_state(1)[0])
        inst = generate(args.kind, args.size, seed)
        path = out / f"{inst.name}.json"
        save_instance(inst, path)
        print(path)
    return 0


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    x0 = _x0(inst, args.x0, args.seed)
    opts = SolveOptions(rule=args.rule, max_iters=args.max_iters, eps_term=args.eps_term,
                        trace_level=args.trace_level, exact=args.exact, short_steps=args.short_steps)
    fp, trace = run_rule(inst, x0, args.rule, opts)
    if args.trace:
        export(trace, args.trace)
    summary = _summary(inst, args.rule, fp, trace)
    print(json.dumps(summary, sort_keys=True))
    if not summary["optimal"]:
        raise CliError(3, "not-optimal", f"objective {summary['objective']} != kernel {summary['kernel_optimum']}")
    return 0


def cmd_verify(args) -> int:
    inst = _load(args.instance)
    try:
        trace = load_trace(args.trace)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(2, "trace", f"cannot read trace: {exc}")
    x0 = trace.x0 if args.x0 is None else _x0(inst, args.x0, 0)
    try:
        report = verify_walk(inst, x0, trace)
    except ValueError as exc:
        raise CliError(2, "mismatch", str(exc))
    for line in report:
        print(line)
    print(json.dumps({"steps": len(trace.augmentations), "violations": len(report)}))
    if report:
        raise CliError(3, "walk", f"{len(report)} violation(s)")
    return 0


def _oracle(inst, g):
    exact = inst.n <= EXACT_MAX_N
    v_star = optimal_value(inst, exact)
    if g is None:
        if inst.witness is None:
            raise CliError(2, "gap", "no witness point: pass --gap")
        A, _, c = inst.data(exact)
        g = c.dot(nm.to_exact(inst.witness) if exact else inst.witness) - v_star
    if g <= 0:
        raise CliError(2, "gap", "the gap range must have positive length")
    return McpOracle(inst, g, exact=exact, v_star=v_star)


def cmd_mcp(args) -> int:
    """Wide CSV: ``g, xm_1..xm_n, sm_1..sm_n`` at every breakpoint of the curves."""
    inst = _load(args.instance)
    oracle = _oracle(inst, args.gap)
    gs = sorted({oracle.curves[0].lo, oracle.g_max, *oracle.breakpoints()})
    if not args.no_dual:
        gs = sorted(set(gs) | {k for cv in oracle.dual_curves() if cv is not None for k in cv.kinks()})
    n = inst.n
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["g"] + [f"xm_{i + 1}" for i in range(n)]
    if not args.no_dual:
        header += [f"sm_{i + 1}" for i in range(n)]
    w.writerow(header)
    for g in gs:
        row = [repr(float(g))] + [repr(float(v)) for v in oracle.xm(g)]
        if not args.no_dual:
            row += [repr(float(v)) for v in oracle.sm(g)]
        w.writerow(row)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_decompose(args) -> int:
    inst = _load(args.instance)
    oracle = _oracle(inst, args.gap)
    dec = polarized_decomposition(oracle, oracle.g_max, gamma=args.gamma)
    eta = 2 * float(dec.gamma) if args.eta is None else args.eta
    brackets = [list(slc(cv, nm._q(eta) if oracle.exact else eta)) for cv in oracle.curves]
    doc = {
        "instance": inst.name, "gamma": float(dec.gamma), "eta": eta,
        "breakpoints": [float(g) for g in dec.breakpoints],
        "partitions": [{"B": list(B), "N": list(N)} for B, N in dec.partitions],
        "slc": brackets, "intervals": dec.r,
    }
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return 0


def _bench_one(job):
    kind, size, seed, rules, max_iters = job
    inst = generate(kind, size, seed)
    rows = []
    for rule in rules:
        fp, trace = run_rule(inst, inst.witness, rule, SolveOptions(rule=rule, max_iters=max_iters))
        s = _summary(inst, rule, fp, trace)
        rows.append([inst.name, rule, s["augmentations"], s["oracle_calls"], repr(s["objective"]),
                     repr(s["kernel_optimum"]), s["optimal"]])
    return rows


def cmd_bench(args) -> int:
    rules = args.rules.split(",")
    bad = [r for r in rules if r not in ("wallacher", "existential", "full")]
    if bad:
        raise CliError(2, "flags", f"unknown rule(s): {bad}")
    jobs = [(args.kind, args.size, s, rules, args.max_iters) for s in args.corpus]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_bench_one, jobs))
    else:
        results = [_bench_one(j) for j in jobs]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["instance", "rule", "augmentations", "oracle_calls", "objective", "kernel_optimum", "optimal"])
    for rows in results:
        w.writerows(rows)
    _emit(buf.getvalue(), args.out)
    if not all(r[-1] for rows in results for r in rows):
        raise CliError(3, "not-optimal", "some runs did not reach the kernel optimum")
    return 0


def _emit(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circuitaug", description="Circuit augmentation LP toolkit")
    ap.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[seeded], help="write generated instances as JSON")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--size", type=_size, required=True, help="m,n")
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", parents=[seeded], help="run one augmentation rule")
    s.add_argument("--rule", choices=("wallacher", "existential", "full"), default="full")
    s.add_argument("--instance", required=True)
    s.add_argument("--x0", default="witness", help="witness (falls back to analytic-center-ish) | analytic-center-ish | random | FILE (JSON list)")
    s.add_argument("--trace", help="write the walk (.jsonl or .csv)")
    s.add_argument("--trace-level", choices=("off", "steps", "full"), default="steps")
    s.add_argument("--max-iters", type=int, default=20000)
    s.add_argument("--eps-term", type=float, default=1e-9)
    s.add_argument("--short-steps", type=int, default=None)
    s.add_argument("--exact", action="store_true", help="rational arithmetic")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", parents=[seeded], help="replay a trace against an instance")
    v.add_argument("--trace", required=True)
    v.add_argument("--instance", required=True)
    v.add_argument("--x0", default=None, help="override the trace's starting point")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("mcp", parents=[seeded], help="exact max central path oracles")
    m.add_argument("action", choices=("dump",), help="dump: primal and dual curves as CSV")
    m.add_argument("--instance", required=True)
    m.add_argument("--gap", type=float, default=None, help="upper end of the gap range (default: witness gap)")
    m.add_argument("--no-dual", action="store_true", help="skip the dual curves")
    m.add_argument("--out")
    m.set_defaults(func=cmd_mcp)

    d = sub.add_parser("decompose", parents=[seeded], help="polarized decomposition and SLC brackets as JSON")
    d.add_argument("--instance", required=True)
    d.add_argument("--gap", type=float, default=None)
    d.add_argument("--gamma", type=float, default=None)
    d.add_argument("--eta", type=float, default=None)
    d.add_argument("--out")
    d.set_defaults(func=cmd_decompose)

    b = sub.add_parser("bench", parents=[seeded], help="iteration counts per rule over a generated corpus (CSV)")
    b.add_argument("--corpus", type=_seeds, default=_seeds("seeds=1..20"))
    b.add_argument("--rules", default="wallacher,full")
    b.add_argument("--kind", choices=KINDS, default="generalized-flow")
    b.add_argument("--size", type=_size, default=(4, 8))
    b.add_argument("--max-iters", type=int, default=20000)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except CliError as exc:
        err = {"code": exc.code, "kind": exc.kind, "message": str(exc)}
    except (InstanceError, ValueError) as exc:
        err = {"code": 2, "kind": type(exc).__name__, "message": str(exc)}
    except ArithmeticError as exc:
        err = {"code": 3, "kind": type(exc).__name__, "message": str(exc)}
    except RuntimeError as exc:
        err = {"code": 3, "kind": type(exc).__name__, "message": str(exc)}
    print("error: " + json.dumps(err), file=sys.stderr)
    return err["code"]


if __name__ == "__main__":
    sys.exit(main())
