"""Acceptance criteria 1-11.

Each test records one PASS/FAIL line through ``criteria.record`` and then
asserts, so the pytest summary and a plain script run
(``python3 tests/test_acceptance.py``) report the same verdicts.
"""
import csv
import io
import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from circuitaug import numeric as nm  # noqa: E402
from circuitaug.augment import (  # noqa: E402
    FConstants, SolveOptions, existential_long_steps, guess_partition, solve_existential, solve_full,
    solve_wallacher,
)
from circuitaug.augment.implement import expected_round_calls  # noqa: E402
from circuitaug.circuits import enumerate_circuits, is_elementary  # noqa: E402
from circuitaug.cli import main as cli_main  # noqa: E402
from circuitaug.lifting import SubspaceBasis, build_operator, rescale_operator, singular_subspace  # noqa: E402
from circuitaug.lp_kernel import solve  # noqa: E402
from circuitaug.lp_model import generate, sample_feasible_points  # noqa: E402
from circuitaug.mcp.approx import approx_gap, approx_mcp  # noqa: E402
from circuitaug.mcp.oracles import exact_mcp, optimal_value  # noqa: E402
from circuitaug.mcp.polarized import IdealPotential, build_h, check_polarized  # noqa: E402
from circuitaug.ratio_circuit import ratio_circuit  # noqa: E402
from circuitaug.trace import verify_walk  # noqa: E402
from corpus import exact_start, main_corpus, oracle_for, small_corpus  # noqa: E402
from criteria import record, summary_lines  # noqa: E402

Q = nm.Q
EXACT = SolveOptions(exact=True)


def long_family() -> list:
    return [generate("long-interval", (2, 6), s) for s in (1, 2, 3)] + \
           [generate("long-interval", (3, 9), s) for s in (1, 2)]


def ray_points(inst, exps):
    """Exact points ``x* + 2^-e (x0 - x*)`` approaching the optimal vertex."""
    xs = nm.to_exact(solve(inst, exact=True).x)
    x0 = exact_start(inst)
    return [xs + Q(1, 2 ** e) * (x0 - xs) for e in exps]


# -- 1 -------------------------------------------------------------------------------

def _min_ratio(circuits, u, v, w):
    best = 0.0
    for ev in circuits:
        for h in (ev.z, -ev.z):
            if np.any((h < 0) & np.isinf(w)):
                continue
            fin = np.isfinite(w)
            den = v @ np.maximum(h, 0) + w[fin] @ np.maximum(-h[fin], 0)
            best = min(best, (u @ h) / den)
    return best


def test_criterion_01_ratio_circuit():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst, bad, nonzero = 0.0, [], 0
    for trial in range(200):
        n = int(rng.integers(3, 11))
        m = int(rng.integers(1, min(n - 1, 5) + 1))
        inst = generate("random", (m, n), 1000 + trial)
        u = rng.standard_normal(n)
        v = rng.uniform(0.1, 2.0, n)
        w = rng.uniform(0.1, 2.0, n)
        w[rng.random(n) < 0.2] = math.inf
        res = ratio_circuit(inst.A, u, v, w)
        ref = _min_ratio(enumerate_circuits(inst.A), u, v, w)
        got = float(u @ res.z) if not res.is_zero else 0.0
        err = abs(got - ref) / (1 + abs(ref))
        worst = max(worst, err)
        if not res.is_zero:
            nonzero += 1
            if not is_elementary(inst.A, res.z):
                bad.append((trial, "not elementary"))
        if err > 1e-7:
            bad.append((trial, got, ref))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 30
    record(1, "ratio-circuit minimum ratio and elementarity", ok,
           f"200 cases, {nonzero} nonzero, max rel err {worst:.1e}, {dt:.1f}s")
    assert ok, bad[:5]


# -- 2 -------------------------------------------------------------------------------

def test_criterion_02_wallacher_guarantees():
    insts = main_corpus() + small_corpus() + long_family()
    walks, steps, bad = 0, 0, []
    for inst in insts:
        v = optimal_value(inst, exact=True)
        starts = [exact_start(inst)] + ray_points(inst, (1, 3))
        for x0 in starts:
            _, tr = solve_wallacher(inst, x0, SolveOptions(rule="wallacher", exact=True))
            n = inst.n
            gaps = [inst.data(True)[2].dot(x0) - v] + [s.objective_after - v for s in tr.augmentations]
            walks += 1
            for s, g0, g1 in zip(tr.augmentations, gaps, gaps[1:]):
                steps += 1
                if not 1 <= s.alpha <= n:
                    bad.append((inst.name, "alpha", float(s.alpha)))
                if g1 > (1 - Q(1, n)) * g0:
                    bad.append((inst.name, "decay", float(g1 / g0)))
            for i in range(len(gaps)):
                for j in range(i + 1, len(gaps)):
                    if gaps[j] > 0 and j - i > math.ceil(n * math.log(gaps[i] / gaps[j])) + 1:
                        bad.append((inst.name, "count", i, j))
            if verify_walk(inst, x0, tr):
                bad.append((inst.name, "verify"))
    record(2, "Wallacher step length, decay and step count", not bad,
           f"{walks} exact walks, {steps} steps, {len(bad)} violations")
    assert not bad, bad[:5]


# -- 3 -------------------------------------------------------------------------------

def test_criterion_03_gap_bracketing():
    rng = np.random.default_rng(303)
    pts, bad = 0, []
    for inst in main_corpus():
        v = float(optimal_value(inst, exact=True))
        for x in sample_feasible_points(inst, 13, rng):
            if pts == 500:
                break
            g = float(inst.c @ x) - v
            lam = float(approx_gap(inst, x)[0])
            pts += 1
            if not g / inst.n - 1e-8 <= lam <= g + 1e-8:
                bad.append((inst.name, g, lam))
    ok = not bad and pts == 500
    record(3, "gap bracketing g/n <= lambda <= g", ok, f"{pts} points, {len(bad)} violations")
    assert ok, bad[:5]


# -- 4 -------------------------------------------------------------------------------

def test_criterion_04_mcp_band():
    rng = np.random.default_rng(404)
    pts, bad, tol = 0, [], 1e-7
    insts = main_corpus()
    while pts < 100:
        inst = insts[pts % len(insts)]
        v = optimal_value(inst, exact=True)
        x = sample_feasible_points(inst, 1, rng)[0]
        g = float(inst.c @ x) - float(v)
        if g <= 1e-9:
            continue
        xm = nm.to_float(exact_mcp(inst, nm._q(g), v_star=v).xm).astype(float)
        am = approx_mcp(inst, x)
        xh = np.asarray(am.xhat, dtype=float)
        n = inst.n
        lo = xm / (2 * n) * (1 - tol) - tol
        hi = 2 * xm * (1 + tol) + tol
        if np.any(xh < lo) or np.any(xh > hi):
            bad.append((inst.name, "band"))
        for p in am.points:
            if float(inst.c @ p) - float(v) > 2 * g * (1 + tol) + tol:
                bad.append((inst.name, "stored gap"))
        pts += 1
    record(4, "MCP approximation band and stored-point gaps", not bad, f"{pts} points, {len(bad)} violations")
    assert not bad, bad[:5]


# -- 5 -------------------------------------------------------------------------------

def test_criterion_05_centrality():
    insts = main_corpus() + small_corpus() + long_family()
    checks, skipped, bad = 0, 0, []
    for inst in insts:
        orc, _ = oracle_for(inst)
        assert orc.exact
        for k in range(1, 21):
            g = orc.g_max * Q(k, 20)
            xm, sm = orc.xm(g), orc.sm(g)
            for i in range(inst.n):
                if sm[i] == math.inf:
                    skipped += 1
                    continue
                p = xm[i] * sm[i]
                checks += 1
                if not (g <= p and float(p) <= 2 * float(g) * (1 + 1e-7)):
                    bad.append((inst.name, i, float(g), float(p)))
    record(5, "centrality g <= x^m s^m <= 2g (rational)", not bad,
           f"{len(insts)} instances, {checks} products, {skipped} fixed-zero skipped, {len(bad)} violations")
    assert not bad, bad[:5]


# -- 6 -------------------------------------------------------------------------------

def _random_config(rng):
    n = int(rng.integers(3, 11))
    m = int(rng.integers(1, n))
    A = rng.standard_normal((m, n))
    basis = SubspaceBasis.kernel(A)
    nb = int(rng.integers(1, n))
    perm = rng.permutation(n)
    B, N = sorted(perm[:nb].tolist()), sorted(perm[nb:].tolist())
    return basis, B, N


def test_criterion_06_lifting_lemmas():
    rng = np.random.default_rng(606)
    tol = 1e-7
    bad, proj_checks = [], 0
    for trial in range(1000):
        basis, B, N = _random_config(rng)
        op = build_operator(basis, B, N)
        z = basis.M @ rng.standard_normal(basis.dim)
        zB, zN = z[B], z[N]
        for k in range(1, op.dim + 1):
            Vd = singular_subspace(op, op.dim - k)
            resid = np.linalg.norm(zN - Vd @ (Vd.T @ zN))
            sk = op.sigma(k)
            proj_checks += 1
            if sk > 0 and resid > np.linalg.norm(zB) / sk * (1 + tol) + 1e-12:
                bad.append((trial, "projection", k))
        y = np.exp(rng.uniform(-2, 2, basis.n))
        sp = rescale_operator(basis, y, B, N).singular_values
        s = op.singular_values
        lo = sp / (np.max(1 / y[B]) * np.max(y[N]))
        hi = np.max(y[B]) * np.max(1 / y[N]) * sp
        if np.any(lo > s * (1 + tol) + 1e-12) or np.any(s > hi * (1 + tol) + 1e-12):
            bad.append((trial, "sandwich"))
    intervals = 0
    for inst in main_corpus() + small_corpus() + long_family():
        orc, dec = oracle_for(inst)
        A = nm.to_float(inst.A).astype(float)
        n = inst.n
        for j, (_, Nj) in enumerate(dec.partitions):
            if not Nj or dec.breakpoints[j] > dec.breakpoints[j + 1] / (8 * n):
                continue
            xm = nm.to_float(orc.xm(dec.breakpoints[j + 1])).astype(float)
            keep = np.flatnonzero(xm > 0)
            Nk = [k for k, i in enumerate(keep) if i in set(Nj)]
            Bk = [k for k in range(keep.size) if k not in set(Nk)]
            if not Nk:
                continue
            op = build_operator(SubspaceBasis.kernel(A[:, keep], xm[keep]), Bk, Nk)
            if not op.dim:
                continue
            intervals += 1
            if op.sigma(op.dim) > 2 * n ** 1.5 * (1 + tol):
                bad.append((inst.name, "sigma_min", j, op.sigma(op.dim)))
    ok = not bad and intervals > 0
    record(6, "lifting projection bound, scaling sandwich, smallest singular value", ok,
           f"1000 configs, {proj_checks} projection checks, {intervals} normalized intervals, {len(bad)} violations")
    assert ok, bad[:5]


# -- 7 -------------------------------------------------------------------------------

def test_criterion_07_long_step_dichotomy():
    insts = long_family() + main_corpus()[:10]
    opts = SolveOptions(rule="existential", exact=True)
    rounds, steps, bad = 0, 0, []
    for inst in insts:
        orc, dec = oracle_for(inst)
        for x in ray_points(inst, range(0, 81, 4)):
            if orc.gap(x) <= 0:
                continue
            _, info, tr = existential_long_steps(inst, x, dec, orc, opts)
            if info is None or not info["steps"]:
                continue
            rounds += 1
            steps += len(info["steps"])
            if len(info["steps"]) > inst.n:
                bad.append((inst.name, "too many steps"))
            for st in info["steps"]:
                if not (st["grew"] or st["exited"]):
                    bad.append((inst.name, "neither", st))
            if verify_walk(inst, x, tr):
                bad.append((inst.name, "verify"))
    ok = not bad and rounds > 0
    record(7, "long-step dichotomy: S_p grows or gap exits, <= n steps per round", ok,
           f"{rounds} rounds, {steps} long steps, {len(bad)} violations")
    assert ok, bad[:5]


# -- 8 -------------------------------------------------------------------------------

def test_criterion_08_partition_guessing():
    insts = long_family()[:3] + main_corpus()[:3] + main_corpus()[20:23]
    pairs, bad = 0, []
    for inst in insts:
        orc, dec = oracle_for(inst)
        if check_polarized(orc, dec):
            bad.append((inst.name, "decomposition not polarized"))
            continue
        n = inst.n
        data = []
        for x in ray_points(inst, range(0, 121, 3)):
            g = orc.gap(x)
            if g <= 0 or any(v == 0 for v in orc.xm(g)):
                continue
            data.append((g, approx_mcp(inst, x)))
        for a, (g0, m0) in enumerate(data):
            j = dec.interval_of(g0)
            for g1, m1 in data[a + 1:]:
                if g1 > g0 / (256 * n ** 4) or g1 <= dec.breakpoints[j]:
                    continue
                B, N, ok = guess_partition(n, m0.xhat, m1.xhat, m0.lam, m1.lam)
                pairs += 1
                if not ok or (tuple(B), tuple(N)) != tuple(map(tuple, dec.partitions[j])):
                    bad.append((inst.name, float(g0), float(g1)))
    ok = not bad and pairs > 0
    record(8, "partition guess equals the oracle partition", ok,
           f"{len(insts)} instances, {pairs} same-interval pairs, {len(bad)} mismatches")
    assert ok, bad[:5]


# -- 9 -------------------------------------------------------------------------------

def test_criterion_09_end_to_end():
    t0 = time.perf_counter()
    runs, bad = 0, []
    for inst in main_corpus():
        v = float(optimal_value(inst, exact=True))
        orc, dec = oracle_for(inst)
        x0 = inst.witness
        for name, (fp, tr) in (("full", solve_full(inst, x0)),
                               ("existential", solve_existential(inst, x0, dec, orc))):
            runs += 1
            if abs(float(fp.objective) - v) > 1e-7 * (1 + abs(v)):
                bad.append((inst.name, name, float(fp.objective), v))
            if verify_walk(inst, x0, tr):
                bad.append((inst.name, name, "verify"))
    dt = time.perf_counter() - t0
    record(9, "solve_full and solve_existential reach the kernel optimum", not bad,
           f"{runs} runs on 40 instances, {len(bad)} failures, {dt:.1f}s")
    assert not bad, bad[:5]


# -- 10 ------------------------------------------------------------------------------

def test_criterion_10_potential():
    insts = main_corpus() + small_corpus() + long_family()
    points, crossings, bad = 0, 0, []
    for inst in insts:
        orc, dec = oracle_for(inst)
        pot = IdealPotential(inst, dec, build_h(orc, dec))
        x0 = exact_start(inst)
        fp, tr = solve_full(inst, x0, EXACT)
        gaps = [orc.gap(x0)] + [s.objective_after - orc.v_star for s in tr.augmentations]
        phis = [pot(g) for g in gaps]
        points += len(gaps)
        for g, p in zip(gaps, phis):
            if (p == 0) != (g == 0):
                bad.append((inst.name, "zero", float(g), p))
        for (g0, p0), (g1, p1) in zip(zip(gaps, phis), zip(gaps[1:], phis[1:])):
            if p1 > p0:
                bad.append((inst.name, "increase", p0, p1))
            if g1 > 0 and dec.interval_of(g1) < dec.interval_of(g0):
                crossings += 1
                if p1 >= p0:
                    bad.append((inst.name, "crossing", p0, p1))
        if gaps[-1] != 0:
            bad.append((inst.name, "not optimal"))
    ok = not bad and crossings > 0
    record(10, "ideal potential nonincreasing, zero at optimum, strict at crossings", ok,
           f"{len(insts)} traces, {points} points, {crossings} crossings, {len(bad)} violations")
    assert ok, bad[:5]


# -- 11 ------------------------------------------------------------------------------

def _rounds(tr):
    return [s.round_diag for s in tr.steps if s.kind == "none" and s.round_diag and "round" in s.round_diag]


def test_criterion_11_accounting(tmp_path):
    bad, complete, total_rounds = [], 0, 0
    for inst in small_corpus() + long_family():
        # an override budget lets exact rounds complete on these tiny instances
        _, tr = solve_full(inst, exact_start(inst), SolveOptions(exact=True, short_steps=2))
        rounds = _rounds(tr)
        total_rounds += len(rounds)
        for d in rounds:
            if d["complete"]:
                complete += 1
                if d["calls"] != expected_round_calls(inst.n, d["short"], d["long"]):
                    bad.append((inst.name, d["round"]))
        if sum(d["calls"] for d in rounds) != tr.oracle_calls:
            bad.append((inst.name, "total"))
    for inst in main_corpus():
        _, tr = solve_full(inst, inst.witness)
        if sum(d["calls"] for d in _rounds(tr)) != tr.oracle_calls:
            bad.append((inst.name, "default total"))
    FConstants.for_n(12).check_budget()

    out = tmp_path / "bench.csv"
    code = cli_main(["bench", "--kind", "long-interval", "--size", "3,8", "--corpus", "seeds=1..20",
                     "--rules", "wallacher,full", "--out", str(out)])
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    per = {}
    for r in rows:
        per.setdefault(r["instance"], {})[r["rule"]] = int(r["augmentations"])
    worse = [k for k, v in per.items() if v["full"] > v["wallacher"]]
    ok = not bad and complete > 0 and code == 0 and len(per) == 20 and not worse
    tw = sum(v["wallacher"] for v in per.values())
    tf = sum(v["full"] for v in per.values())
    record(11, "oracle-call accounting per round; full <= wallacher on long-interval", ok,
           f"{complete} complete rounds (of {total_rounds}) match the formula, long-interval augmentations full {tf} vs wallacher {tw}")
    assert ok, (bad[:5], worse)


if __name__ == "__main__":
    import tempfile

    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                pass
    print("\n".join(["", "summary:"] + summary_lines()))
