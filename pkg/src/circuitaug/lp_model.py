"""LP instances in standard equality form ``min <c,x> s.t. Ax = b, x >= 0``."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import numeric as nm

EPS_FEAS = 1e-9
KINDS = ("simplex", "mincost-flow", "generalized-flow", "dual-2vpi", "random", "long-interval")


class InstanceError(ValueError):
    """Malformed instance data (parse error or dimension mismatch)."""


class InfeasibleInstance(ValueError):
    pass


@dataclass(frozen=True)
class InstanceMetadata:
    optimal_value: Optional[float] = None
    bounded: str = "unknown"  # yes | no | unknown
    generator_seed: Optional[int] = None
    kind: Optional[str] = None
    removed_rows: tuple = ()
    witness: Optional[tuple] = None
    arcs: Optional[tuple] = None


@dataclass(frozen=True)
class LpInstance:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    name: str = "lp"
    metadata: InstanceMetadata = field(default_factory=InstanceMetadata)

    def __post_init__(self):
        for key in ("A", "b", "c"):
            arr = np.array(getattr(self, key), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, key, arr)
        if self.A.ndim != 2:
            raise InstanceError("A must be a matrix")
        m, n = self.A.shape
        if self.b.shape != (m,):
            raise InstanceError(f"dimension mismatch: |b|={self.b.size}, m={m}")
        if self.c.shape != (n,):
            raise InstanceError(f"dimension mismatch: |c|={self.c.size}, n={n}")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def witness(self) -> Optional[np.ndarray]:
        w = self.metadata.witness
        return None if w is None else np.array(w, dtype=float)

    def data(self, exact: bool = False):
        """(A, b, c) as float arrays or as exact rationals."""
        if exact:
            return nm.to_exact(self.A), nm.to_exact(self.b), nm.to_exact(self.c)
        return np.array(self.A), np.array(self.b), np.array(self.c)

    def with_metadata(self, **changes) -> "LpInstance":
        return replace(self, metadata=replace(self.metadata, **changes))

    def with_cost(self, c, name: Optional[str] = None) -> "LpInstance":
        meta = replace(self.metadata, optimal_value=None)
        return LpInstance(self.A, self.b, np.asarray(c, dtype=float), name or self.name, meta)


@dataclass(frozen=True)
class FeasiblePoint:
    x: np.ndarray
    residual_inf: float
    min_coord: float
    objective: object

    def gap(self, v_star) -> object:
        return self.objective - v_star


@dataclass(frozen=True)
class ViolationReport:
    kind: str  # "row" | "coordinate"
    index: int
    value: float
    residual_inf: float
    min_coord: float

    def __str__(self):
        if self.kind == "row":
            return f"row {self.index + 1} residual {self.value:g}"
        return f"coordinate {self.index + 1} negative ({self.value:g})"


def feasibility_scale(inst: LpInstance) -> float:
    return EPS_FEAS * (1.0 + (np.abs(inst.b).max() if inst.m else 0.0))


def check_feasible(inst: LpInstance, x) -> Union[FeasiblePoint, ViolationReport]:
    x = np.asarray(x)
    if x.shape != (inst.n,):
        raise InstanceError(f"point has length {x.size}, expected {inst.n}")
    if nm.is_exact(x):
        A, b, c = inst.data(exact=True)
        res = A.dot(x) - b
        res_abs = np.array([abs(float(r)) for r in res]) if res.size else np.zeros(0)
        objective = c.dot(x)
    else:
        x = x.astype(float)
        res_abs = np.abs(inst.A @ x - inst.b)
        objective = float(inst.c @ x)
    residual_inf = float(res_abs.max()) if res_abs.size else 0.0
    xf = nm.to_float(x)
    min_coord = float(xf.min()) if xf.size else 0.0
    row_bad = residual_inf > feasibility_scale(inst)
    coord_bad = min_coord < -EPS_FEAS
    if row_bad or coord_bad:
        row_excess = residual_inf / (1.0 + (np.abs(inst.b).max() if inst.m else 0.0))
        if row_bad and (not coord_bad or row_excess >= -min_coord):
            i = int(np.argmax(res_abs))
            return ViolationReport("row", i, float(res_abs[i]), residual_inf, min_coord)
        i = int(np.argmin(xf))
        return ViolationReport("coordinate", i, float(xf[i]), residual_inf, min_coord)
    return FeasiblePoint(x, residual_inf, min_coord, objective)


def independent_rows(A: np.ndarray, threshold: Optional[float] = None) -> list:
    """Rows kept by Gaussian elimination with partial pivoting."""
    M = np.array(A, dtype=float)
    m, n = M.shape
    if threshold is None:
        threshold = 1e-10 * max(1.0, np.abs(M).max() if M.size else 0.0)
    active = list(range(m))
    kept = []
    for j in range(n):
        if not active:
            break
        col = np.abs(M[active, j])
        k = int(np.argmax(col))
        if col[k] <= threshold:
            continue
        p = active.pop(k)
        kept.append(p)
        for i in active:
            f = M[i, j] / M[p, j]
            if f != 0.0:
                M[i] -= f * M[p]
    return sorted(kept)


def repair_rank(inst: LpInstance) -> LpInstance:
    keep = independent_rows(inst.A)
    if len(keep) == inst.m:
        return inst
    removed = tuple(i for i in range(inst.m) if i not in keep)
    A, b = inst.A[keep], inst.b[keep]
    # dropped rows must be implied by the kept ones
    coef, *_ = np.linalg.lstsq(A.T, inst.A[list(removed)].T, rcond=None)
    implied_b = coef.T @ b
    if np.abs(implied_b - inst.b[list(removed)]).max() > feasibility_scale(inst):
        raise InfeasibleInstance("dependent rows have inconsistent right-hand sides")
    meta = replace(inst.metadata, removed_rows=inst.metadata.removed_rows + removed)
    return LpInstance(A, b, inst.c, inst.name, meta)


def instance_from_dict(d: dict) -> LpInstance:
    try:
        A = np.array(d["A"], dtype=float)
        b = np.array(d["b"], dtype=float)
        c = np.array(d["c"], dtype=float)
        m, n = int(d.get("m", A.shape[0])), int(d.get("n", A.shape[1] if A.ndim == 2 else -1))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"parse error: {exc}") from exc
    if A.ndim != 2 or A.shape != (m, n):
        raise InstanceError(f"dimension mismatch: A has shape {A.shape}, header says ({m}, {n})")
    if b.shape != (m,) or c.shape != (n,):
        raise InstanceError(f"dimension mismatch: |b|={b.size}, |c|={c.size}, (m, n)=({m}, {n})")
    x0 = d.get("x0")
    meta = InstanceMetadata(
        optimal_value=d.get("optimal_value"),
        bounded=d.get("bounded", "unknown"),
        generator_seed=d.get("seed"),
        kind=d.get("kind"),
        witness=None if x0 is None else tuple(float(v) for v in x0),
    )
    return LpInstance(A, b, c, str(d.get("name", "lp")), meta)


def instance_to_dict(inst: LpInstance) -> dict:
    d = {
        "name": inst.name,
        "m": inst.m,
        "n": inst.n,
        "A": inst.A.tolist(),
        "b": inst.b.tolist(),
        "c": inst.c.tolist(),
    }
    meta = inst.metadata
    if meta.witness is not None:
        d["x0"] = list(meta.witness)
    if meta.optimal_value is not None:
        d["optimal_value"] = float(meta.optimal_value)
    if meta.kind is not None:
        d["kind"] = meta.kind
    if meta.generator_seed is not None:
        d["seed"] = meta.generator_seed
    if meta.bounded != "unknown":
        d["bounded"] = meta.bounded
    return d


def load_instance(path) -> LpInstance:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"parse error: {exc}") from exc
    if not isinstance(d, dict):
        raise InstanceError("parse error: top-level JSON value must be an object")
    d.setdefault("name", Path(path).stem)
    return repair_rank(instance_from_dict(d))


def save_instance(inst: LpInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst)))


# ---------------------------------------------------------------- generators


def _finish(kind, A, x0, c, seed, name=None, arcs=None) -> LpInstance:
    A = np.asarray(A, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    meta = InstanceMetadata(
        bounded="yes",
        generator_seed=seed,
        kind=kind,
        witness=tuple(x0.tolist()),
        arcs=arcs,
    )
    m, n = A.shape
    return LpInstance(A, A @ x0, np.asarray(c, dtype=float), name or f"{kind}-{m}x{n}-s{seed}", meta)


def _positive_dual_ok(A: np.ndarray, y: np.ndarray) -> bool:
    return bool(np.all(y @ A > 0))


def generate(kind: str, size: Sequence[int], seed: int = 0) -> LpInstance:
    """Feasible, bounded, full-row-rank instance with an interior witness point."""
    m, n = int(size[0]), int(size[1])
    if not (n > m >= 1):
        raise ValueError(f"invalid size (m={m}, n={n}): need n > m >= 1")
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, KINDS.index(kind), m, n]))

    if kind == "simplex":
        groups = np.array_split(np.arange(n), m)
        A = np.zeros((m, n))
        x0 = np.zeros(n)
        for r, g in enumerate(groups):
            A[r, g] = 1.0
            x0[g] = 1.0 / len(g)
        c = rng.integers(0, 10, size=n).astype(float)
        inst = _finish(kind, A, x0, c, seed)
        return LpInstance(inst.A, np.ones(m), inst.c, inst.name, inst.metadata)

    if kind == "long-interval":
        groups = np.array_split(np.arange(n), m)
        A = np.zeros((m, n))
        x0 = np.zeros(n)
        c = np.zeros(n)
        for r, g in enumerate(groups):
            A[r, g] = 1.0
            x0[g] = 1.0 / len(g)
            # costs 1, 2^-40, 2^-80, ... make polarized intervals of huge length
            for k, j in enumerate(g[:-1]):
                c[j] = 2.0 ** (-40 * k)
        order = rng.permutation(n)
        A, x0, c = A[:, order], x0[order], c[order]
        inst = _finish(kind, A, x0, c, seed)
        return LpInstance(inst.A, np.ones(m), inst.c, inst.name, inst.metadata)

    x0 = rng.integers(1, 5, size=n).astype(float)
    c = rng.integers(-5, 11, size=n).astype(float)

    if kind == "mincost-flow":
        if m < 2:
            raise ValueError("mincost-flow needs at least 2 nodes (m >= 2)")
        arcs = []
        for v in range(1, m):
            arcs.append((int(rng.integers(0, v)), v))
        while len(arcs) < n - 1:
            t = int(rng.integers(0, m - 1))
            h = int(rng.integers(t + 1, m))
            arcs.append((t, h))
        A = np.zeros((m, n))
        for j, (t, h) in enumerate(arcs):
            A[t, j] = -1.0
            A[h, j] = 1.0
        A[m - 1, n - 1] = -1.0  # slack: outflow at the sink node
        return _finish(kind, A, x0, c, seed, arcs=tuple(arcs))

    y = rng.integers(1, 5, size=m).astype(float)
    for _ in range(1000):
        A = np.zeros((m, n))
        for j in range(n):
            if kind == "random":
                col = rng.integers(-3, 4, size=m).astype(float)
                col[0] = abs(col[0]) + 1.0
                A[:, j] = col
                continue
            single = m == 1 or rng.random() < 0.25
            if single:
                A[int(rng.integers(0, m)), j] = float(rng.integers(1, 4))
                continue
            t, h = rng.choice(m, size=2, replace=False)
            if kind == "generalized-flow":
                A[t, j] = -1.0
                gain = max(int(rng.integers(1, 5)), int(math.floor(y[t] / y[h])) + 1)
                A[h, j] = float(gain)
            else:  # dual-2vpi: two arbitrary nonzeros, positive dual certificate
                while True:
                    a1, a2 = rng.integers(-4, 5, size=2)
                    if a1 != 0 and a2 != 0 and a1 * y[t] + a2 * y[h] > 0:
                        break
                A[t, j], A[h, j] = float(a1), float(a2)
        if np.linalg.matrix_rank(A) == m and (kind == "random" or _positive_dual_ok(A, y)):
            return _finish(kind, A, x0, c, seed)
    raise RuntimeError("failed to draw a full-rank instance")  # pragma: no cover


def sample_feasible_points(inst: LpInstance, count: int, rng: np.random.Generator, boundary_steps: int = 2) -> list:
    """Feasible points around the witness: boundary hits plus a partial step.

    Each point takes up to ``boundary_steps`` maximal steps along random
    directions of the current face (each zeroes a coordinate), then a random
    fraction of one more maximal step.
    """
    x0 = inst.witness
    if x0 is None:
        raise ValueError("instance has no witness point")
    pts = []
    for _ in range(count):
        x = x0.copy()
        hits = int(rng.integers(0, boundary_steps + 1))
        for s in range(hits + 1):
            zero = np.flatnonzero(x == 0.0)
            M = np.vstack([inst.A, np.eye(inst.n)[zero]])
            K = nm.nullspace(M)
            if K.shape[1] == 0:
                break
            d = K @ rng.standard_normal(K.shape[1])
            tol = 1e-12 * np.abs(d).max()
            if not (d < -tol).any():
                d = -d
            neg = d < -tol
            if not neg.any():
                break
            ratios = np.full(inst.n, np.inf)
            ratios[neg] = x[neg] / -d[neg]
            j = int(np.argmin(ratios))
            if s < hits:
                x = x + ratios[j] * d
                x[j] = 0.0
            else:
                x = x + rng.uniform(0.05, 0.95) * ratios[j] * d
            x[np.abs(x) < 1e-14] = 0.0
            x = np.maximum(x, 0.0)
        pts.append(x)
    return pts
