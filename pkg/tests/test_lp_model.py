import json

import numpy as np
import pytest

from circuitaug import numeric as nm
from circuitaug.lp_kernel import solve, solve_standard
from circuitaug.lp_model import (
    KINDS, FeasiblePoint, InstanceError, LpInstance, ViolationReport, check_feasible, generate, load_instance,
    sample_feasible_points, save_instance,
)


def _write(tmp_path, d, name="inst.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return p


def test_load_simplex3(tmp_path):
    p = _write(tmp_path, {"name": "simplex3", "m": 1, "n": 3, "A": [[1, 1, 1]], "b": [1], "c": [1, 2, 0]})
    inst = load_instance(p)
    assert (inst.m, inst.n) == (1, 3)
    assert inst.c.tolist() == [1.0, 2.0, 0.0]
    assert inst.metadata.removed_rows == ()


def test_load_drops_dependent_row(tmp_path):
    p = _write(tmp_path, {"m": 2, "n": 3, "A": [[1, 1, 1], [2, 2, 2]], "b": [1, 2], "c": [1, 2, 0]})
    inst = load_instance(p)
    assert inst.m == 1
    assert len(inst.metadata.removed_rows) == 1


def test_load_dimension_mismatch(tmp_path):
    p = _write(tmp_path, {"m": 1, "n": 3, "A": [[1, 1, 1]], "b": [1], "c": [1, 2]})
    with pytest.raises(InstanceError, match="dimension mismatch"):
        load_instance(p)


def test_load_malformed(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(InstanceError, match="parse error"):
        load_instance(p)
    with pytest.raises(InstanceError):
        load_instance(_write(tmp_path, {"A": [[1]]}, "nob.json"))


def test_check_feasible_examples():
    inst = LpInstance([[1, 1, 1]], [1], [1, 2, 0])
    fp = check_feasible(inst, nm.to_exact([nm.Q(1, 3)] * 3))
    assert isinstance(fp, FeasiblePoint) and fp.residual_inf == 0
    rep = check_feasible(inst, [1, 1, -1])
    assert isinstance(rep, ViolationReport) and rep.kind == "coordinate" and rep.index == 2
    rep = check_feasible(inst, [1, 1, 1])
    assert rep.kind == "row" and rep.index == 0 and rep.value == pytest.approx(2.0)
    assert str(rep) == "row 1 residual 2"


def test_check_feasible_wrong_length():
    with pytest.raises(InstanceError):
        check_feasible(LpInstance([[1, 1]], [1], [0, 0]), [1, 0, 0])


def test_generate_simplex_template():
    inst = generate("simplex", (1, 3), 0)
    assert inst.A.tolist() == [[1, 1, 1]] and inst.b.tolist() == [1]
    assert np.all(inst.c >= 0)


def test_generalized_flow_two_nonzeros_per_column():
    inst = generate("generalized-flow", (4, 8), 7)
    assert np.all((inst.A != 0).sum(axis=0) <= 2)


def test_dual_2vpi_two_nonzeros_per_row_of_transpose():
    inst = generate("dual-2vpi", (4, 9), 3)
    assert np.all((inst.A != 0).sum(axis=0) <= 2)


def _incidence(m, arcs):
    A = np.zeros((m, len(arcs)))
    for j, (t, h) in enumerate(arcs):
        A[t, j], A[h, j] = -1, 1
    return A


def test_mincost_flow_incidence():
    inst = generate("mincost-flow", (3, 5), 1)
    arcs = inst.metadata.arcs
    assert len(arcs) == inst.n - 1
    np.testing.assert_array_equal(inst.A[:, :-1], _incidence(inst.m, arcs))
    assert np.all(np.abs(inst.A[:, :-1]).sum(axis=0) == 2)


@pytest.mark.parametrize("kind", KINDS)
def test_generated_feasible_bounded_deterministic(kind):
    size = (2, 5) if kind != "simplex" else (1, 4)
    inst = generate(kind, size, 11)
    again = generate(kind, size, 11)
    assert np.array_equal(inst.A, again.A) and np.array_equal(inst.c, again.c)
    assert isinstance(check_feasible(inst, inst.witness), FeasiblePoint)
    assert np.linalg.matrix_rank(inst.A) == inst.m
    for i in range(inst.n):
        cost = np.zeros(inst.n)
        cost[i] = -1.0
        assert solve_standard(inst.A, inst.b, cost).status == "optimal"


@pytest.mark.parametrize("size", [(3, 3), (0, 2), (4, 2)])
def test_generate_invalid_size(size):
    with pytest.raises(ValueError):
        generate("random", size, 0)


def test_round_trip_bit_exact(tmp_path):
    inst = generate("random", (3, 7), 5)
    inst = LpInstance(inst.A + 1e-3 / 7, inst.b, inst.c / 3, inst.name, inst.metadata)
    save_instance(inst, tmp_path / "r.json")
    back = load_instance(tmp_path / "r.json")
    for key in "Abc":
        assert np.array_equal(getattr(inst, key), getattr(back, key))
    assert np.array_equal(inst.witness, back.witness)


def test_instances_are_immutable():
    inst = generate("random", (2, 4), 1)
    with pytest.raises(ValueError):
        inst.A[0, 0] = 5.0


def test_sample_feasible_points():
    inst = generate("generalized-flow", (3, 6), 2)
    pts = sample_feasible_points(inst, 25, np.random.default_rng(0))
    assert len(pts) == 25
    for x in pts:
        assert isinstance(check_feasible(inst, x), FeasiblePoint)
    assert any((x == 0).any() for x in pts)


@pytest.mark.parametrize("seed", range(1, 7))
def test_mincost_flow_matches_network_simplex(seed):
    nx = pytest.importorskip("networkx")
    inst = generate("mincost-flow", (4, 9), seed)
    G = nx.DiGraph()
    for v in range(inst.m):
        G.add_node(v, demand=int(round(inst.b[v])))
    # the slack column drains the sink into an extra node
    G.add_node("out", demand=-int(round(inst.b.sum())))
    G.add_edge(inst.m - 1, "out", weight=int(inst.c[-1]))
    for j, (t, h) in enumerate(inst.metadata.arcs):
        if G.has_edge(t, h):  # parallel arc: route through a midpoint
            G.add_edge(t, ("mid", j), weight=int(inst.c[j]))
            G.add_edge(("mid", j), h, weight=0)
        else:
            G.add_edge(t, h, weight=int(inst.c[j]))
    cost, _ = nx.network_simplex(G)
    assert solve(inst).objective == pytest.approx(cost)
