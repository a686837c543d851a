import math

import numpy as np
import pytest

from circuitaug import numeric as nm
from circuitaug.lifting import count_sigma
from circuitaug.lp_model import LpInstance, check_feasible, generate, sample_feasible_points
from circuitaug.mcp.approx import WeightError, approx_gap, approx_mcp, mcp_weights
from circuitaug.mcp.oracles import (
    McpOracle, exact_dual_mcp, exact_mcp, fixed_zero_variables, optimal_value,
)
from circuitaug.mcp.piecewise import PiecewiseLinear, slc
from circuitaug.mcp.polarized import (
    IdealPotential, build_h, check_h, check_polarized, h_at, ideal_potential, polarized_decomposition,
)
from circuitaug.augment import SolveOptions, solve_wallacher
from corpus import oracle_for, simplex3

Q = nm.Q
HALF = Q(1, 2)


# -- exact oracles ---------------------------------------------------------------

def test_exact_mcp_simplex3():
    inst = simplex3()
    assert list(exact_mcp(inst, HALF).xm) == [HALF, Q(1, 4), 1]
    assert list(exact_mcp(inst, 0).xm) == [0, 0, 1]
    big1, big2 = exact_mcp(inst, 10).xm, exact_mcp(inst, 50).xm
    assert list(big1) == list(big2) == [1, 1, 1]


def test_mcp_sample_invariants():
    inst = generate("generalized-flow", (3, 6), 4)
    v = optimal_value(inst)
    g = Q(3, 2)
    smp = exact_mcp(inst, g, v)
    _, _, c = inst.data(True)
    for wit in smp.witnesses:
        assert isinstance(check_feasible(inst, wit), type(check_feasible(inst, smp.xm_feasible)))
        assert c.dot(wit) - v <= g
    n = inst.n
    assert all(smp.xm[i] / n <= smp.xm_feasible[i] <= smp.xm[i] for i in range(n))


def test_exact_dual_mcp_simplex3():
    inst = simplex3()
    assert list(exact_dual_mcp(inst, HALF)) == [Q(3, 2), Q(5, 2), HALF]
    assert list(exact_dual_mcp(inst, 0)) == [1, 2, 0]
    prod = exact_mcp(inst, HALF).xm * exact_dual_mcp(inst, HALF)
    assert list(prod) == [Q(3, 4), Q(5, 8), HALF]
    assert all(HALF <= p <= 1 for p in prod)


def test_mcp_negative_gap():
    with pytest.raises(ValueError):
        exact_mcp(simplex3(), -1)


def test_oracle_curves_match_pointwise():
    inst = generate("random", (3, 6), 2)
    orc, _ = oracle_for(inst)
    for t in (Q(0), orc.g_max / 7, orc.g_max / 2, orc.g_max):
        assert list(orc.xm(t)) == list(exact_mcp(inst, t, orc.v_star).xm)
    for cv in orc.curves:
        assert cv.is_concave_nondecreasing(tol=0)


def test_lemma_2_8_pairs():
    inst = generate("generalized-flow", (4, 8), 3)
    orc, _ = oracle_for(inst)
    grid = sorted({orc.g_max * Q(k, 17) for k in range(18)})
    for g, gp in zip(grid, grid[1:]):
        xg, xgp = orc.xm(g), orc.xm(gp)
        assert all((g / gp) * xgp[i] <= xg[i] <= xgp[i] for i in range(inst.n))


def test_dual_curves_and_fixed_zero():
    A = [[1, 1, 0], [0, 0, 1]]
    inst = LpInstance(A, [1, 0], [1, 0, 0], "fixed")
    assert fixed_zero_variables(inst) == [2]
    orc = McpOracle(inst, 1)
    s = orc.sm(HALF)
    assert s[2] == math.inf


# -- approximations -----------------------------------------------------------------

def test_approx_gap_examples():
    inst = simplex3()
    lam, s, y = approx_gap(inst, nm.to_exact([Q(1, 3)] * 3))
    assert lam == Q(2, 3)
    assert approx_gap(inst, nm.to_exact([0, 0, 1]))[0] == 0
    lam, _, _ = approx_gap(inst, nm.to_exact([1, 0, 0]))
    assert Q(1, 3) <= lam <= 1


def test_approx_mcp_simplex3_band():
    inst = simplex3()
    x = nm.to_exact([Q(1, 3)] * 3)
    am = approx_mcp(inst, x)
    xm = exact_mcp(inst, 1).xm
    for i in range(3):
        assert xm[i] / 6 <= am.xhat[i] <= 2 * xm[i]
    _, _, c = inst.data(True)
    for p in am.points:
        assert c.dot(p) <= 2 * 1
    assert list(am.xbar) == list(sum(am.points[1:], am.points[0]) / 3)
    for i in range(3):
        assert xm[i] / 18 <= am.xbar[i] <= 2 * xm[i]


def test_approx_mcp_optimal_rejected():
    with pytest.raises(ValueError):
        approx_mcp(simplex3(), nm.to_exact([0, 0, 1]))


def test_mcp_weights_nonnegative():
    x = np.array([0.5, 0.0, 0.5])
    v, w = mcp_weights(x, np.array([0.2, 1.0, 0.1]), 1.0)
    assert w[1] == math.inf and np.all(v >= 0)
    assert np.all(w[[0, 2]] >= 1 / x[[0, 2]] - 1e-12)
    with pytest.raises(WeightError):
        mcp_weights(x, np.array([-1.0, 0.0, 0.0]), 1.0)


@pytest.mark.parametrize("kind", ["generalized-flow", "random"])
def test_approx_mcp_band_on_samples(kind):
    inst = generate(kind, (3, 7), 6)
    v = optimal_value(inst)
    n = inst.n
    for x in sample_feasible_points(inst, 4, np.random.default_rng(1)):
        g = inst.data(True)[2].dot(nm.to_exact(x)) - v
        if g <= 1e-9:
            continue
        am = approx_mcp(inst, x)
        xm = nm.to_float(exact_mcp(inst, g, v).xm)
        assert np.all(am.xhat >= xm / (2 * n) * (1 - 1e-7) - 1e-9)
        assert np.all(am.xhat <= 2 * xm * (1 + 1e-7) + 1e-9)
        assert np.all(am.xbar >= xm / (2 * n * n) * (1 - 1e-7) - 1e-9)


# -- piecewise linear & SLC --------------------------------------------------------

def test_piecewise_eval_and_restrict():
    f = PiecewiseLinear((0, 1, 2), (0, 1, 1))
    assert f(HALF) == HALF and f(Q(3, 2)) == 1
    r = f.restrict(HALF, Q(3, 2))
    assert r.xs == (HALF, 1, Q(3, 2))
    with pytest.raises(ValueError):
        f(3)
    with pytest.raises(ValueError):
        PiecewiseLinear((0, 0), (1, 1))


def test_from_pieces_simplifies():
    f = PiecewiseLinear.from_pieces([(0, 1, 1, 0), (1, 2, 1, 0), (2, 4, 0, 2)])
    assert f.xs == (0, 2, 4)


def test_slc_examples():
    cap = PiecewiseLinear((0, 1, 2), (0, 1, 1))
    assert slc(cap, HALF) == (1, 1)
    assert slc(PiecewiseLinear((0, 5), (1, 3)), Q(1, 10)) == (1, 1)
    lower, upper = slc(PiecewiseLinear((0, 1, 8), (0, 1, 1)), HALF)
    assert lower >= 2 and lower <= upper
    with pytest.raises(ValueError):
        slc(PiecewiseLinear((0, 1, 2), (0, 1, 3)), HALF)
    with pytest.raises(ValueError):
        slc(cap, 0)


def test_slc_lower_le_upper_random():
    rng = np.random.default_rng(3)
    for _ in range(200):
        k = int(rng.integers(2, 7))
        slopes = np.sort(rng.choice(30, size=k, replace=False))[::-1] / 10
        xs = np.concatenate([[0.0], np.cumsum(rng.uniform(0.1, 2, k))])
        ys = rng.uniform(0, 1) + np.concatenate([[0.0], np.cumsum(slopes * np.diff(xs))])
        eta = 1.0 if rng.random() < 0.1 else float(rng.uniform(0.2, 1.0))
        lo, up = slc(PiecewiseLinear(tuple(xs), tuple(ys)), eta)
        assert 1 <= lo <= up <= k


# -- polarized decomposition and ideal potential --------------------------------------

def test_decomposition_simplex3():
    orc = McpOracle(simplex3(), 2)
    dec = polarized_decomposition(orc, 2, Q(1, 4))
    assert dec.r <= 3
    assert dec.breakpoints[0] == 0 and dec.breakpoints[-1] == 2
    assert check_polarized(orc, dec) == []
    for B, N in dec.partitions:
        assert 2 in B


def test_decomposition_constant_mcp():
    inst = LpInstance([[1, 1]], [1], [0, 0], "flat")
    orc = McpOracle(inst, 1)
    dec = polarized_decomposition(orc)
    assert dec.r == 1 and dec.partitions[0][1] == ()


def test_decomposition_gamma_one():
    orc = McpOracle(simplex3(), 2)
    dec = polarized_decomposition(orc, 2, 1)
    kinks = [0] + orc.breakpoints() + [2]
    assert all(b in kinks for b in dec.breakpoints)
    assert check_polarized(orc, dec) == []


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_decomposition_corpus(seed):
    inst = generate("generalized-flow", (3, 7), seed)
    orc, dec = oracle_for(inst)
    assert check_polarized(orc, dec) == []
    assert dec.slc_upper_sum is not None and dec.bound_ratio > 0
    g = dec.breakpoints[-1]
    assert dec.interval_of(g) == dec.r - 1
    with pytest.raises(ValueError):
        dec.interval_of(0)


def test_ideal_potential_examples():
    inst = simplex3()
    orc = McpOracle(inst, 2)
    dec = polarized_decomposition(orc, 2)
    H = build_h(orc, dec)
    assert ideal_potential(inst, dec, H, 0) == 0
    phi = IdealPotential(inst, dec, H)
    top = dec.breakpoints[-1]
    prefix = 1 + sum(len(set(dec.partitions[i - 1][1]) ^ set(dec.partitions[i][1])) + 1 for i in range(1, dec.r))
    op = phi.operator(dec.r - 1)
    # at g = g_r the count is the number of singular values >= 1
    assert phi(top) == prefix + (count_sigma(op, 1.0) if op is not None else 0)
    tiny = dec.breakpoints[-2] + (top - dec.breakpoints[-2]) * Q(999, 1000)
    if op is None or count_sigma(op, float(top / tiny)) == 0:
        assert phi(tiny) == prefix
    assert all(phi(g) >= 1 for g in (top, top / 3, top / 1000))
    assert isinstance(check_h(orc, dec, H), list)
    assert list(h_at(dec, H, top)) == list(H[-1])


def test_ideal_potential_along_wallacher_simplex3():
    inst = simplex3()
    orc = McpOracle(inst, 2)
    dec = polarized_decomposition(orc, 2)
    phi = IdealPotential(inst, dec, build_h(orc, dec))
    x0 = nm.to_exact([Q(1, 3)] * 3)
    _, trace = solve_wallacher(inst, x0, SolveOptions(rule="wallacher", exact=True))
    gaps = [orc.gap(x0)] + [s.objective_after - orc.v_star for s in trace.augmentations]
    vals = [phi(g) for g in gaps]
    assert vals == sorted(vals, reverse=True)
    assert vals[-1] == 0
