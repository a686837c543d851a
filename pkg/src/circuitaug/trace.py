"""Circuit-walk traces: recording, JSONL/CSV serialization and replay verification.

JSONL layout, one JSON object per line:

* header: ``{"type": "header", "instance": name, "exact": bool, "x0": [...]}``
* step:   ``{"type": "step", "index", "kind", "support", "alpha", "direction",
  "objective_after", "lambda", "round_diag"}``
* footer: ``{"type": "footer", "totals": {...}}``

Exact runs store rationals as ``"p/q"`` strings so the file round-trips losslessly.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import numeric as nm
from .circuits import is_elementary
from .lp_model import EPS_FEAS, LpInstance, check_feasible

KINDS = ("wallacher", "lsc", "none")
CSV_COLUMNS = ["index", "kind", "alpha", "objective_after", "lambda", "k", "S_size"]


@dataclass
class WalkStep:
    index: int
    kind: str
    support: tuple
    alpha: object
    direction: Optional[np.ndarray]
    objective_after: object
    lam: object = None
    round_diag: Optional[dict] = None


@dataclass
class WalkTrace:
    instance_name: str
    x0: np.ndarray
    exact: bool = False
    steps: list = field(default_factory=list)
    oracle_calls: int = 0
    record: bool = True
    counts: dict = field(default_factory=lambda: {"wallacher": 0, "lsc": 0})
    long_rounds: list = field(default_factory=list)  # existential long-step diagnostics

    @property
    def totals(self) -> dict:
        return {
            "oracle_calls": self.oracle_calls,
            "wallacher_steps": self.counts["wallacher"],
            "lsc_steps": self.counts["lsc"],
        }

    @property
    def augmentations(self) -> list:
        return [s for s in self.steps if s.kind != "none"]

    def add(self, kind, direction, alpha, objective_after, lam=None, round_diag=None) -> WalkStep:
        if kind not in KINDS:
            raise ValueError(f"unknown step kind {kind!r}")
        if kind in self.counts:
            self.counts[kind] += 1
        if not self.record:
            return None
        support = () if direction is None else tuple(int(i) for i in np.flatnonzero([v != 0 for v in direction]))
        step = WalkStep(len(self.steps), kind, support, alpha, direction, objective_after, lam, round_diag)
        self.steps.append(step)
        return step


# -- serialization -------------------------------------------------------------

def _enc(v):
    if v is None:
        return None
    if isinstance(v, type(nm.ONE)):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_enc(e) for e in v]
    if isinstance(v, dict):
        return {k: _enc(e) for k, e in v.items()}
    return v


def _dec(v, exact):
    if v is None:
        return None
    if isinstance(v, str) and exact:
        return nm.Q(v)
    if isinstance(v, (int, float)) and exact:
        return nm._q(v)
    return v


def _vec(v, exact):
    if v is None:
        return None
    return nm.to_exact([nm.Q(e) if isinstance(e, str) else e for e in v]) if exact else np.array(v, dtype=float)


def to_jsonl(trace: WalkTrace) -> str:
    lines = [json.dumps({"type": "header", "instance": trace.instance_name, "exact": trace.exact,
                         "x0": _enc(trace.x0)})]
    for s in trace.steps:
        lines.append(json.dumps({
            "type": "step", "index": s.index, "kind": s.kind, "support": list(s.support),
            "alpha": _enc(s.alpha), "direction": _enc(s.direction),
            "objective_after": _enc(s.objective_after), "lambda": _enc(s.lam),
            "round_diag": _enc(s.round_diag),
        }))
    lines.append(json.dumps({"type": "footer", "totals": trace.totals}))
    return "\n".join(lines) + "\n"


def from_jsonl(text: str) -> WalkTrace:
    trace = None
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        if trace is None and rec.get("type") != "header":
            raise ValueError("trace must start with a header line")
        if rec["type"] == "header":
            exact = rec["exact"]
            trace = WalkTrace(rec["instance"], _vec(rec["x0"], exact), exact)
        elif rec["type"] == "step":
            ex = trace.exact
            trace.steps.append(WalkStep(
                rec["index"], rec["kind"], tuple(rec["support"]), _dec(rec["alpha"], ex),
                _vec(rec["direction"], ex), _dec(rec["objective_after"], ex), _dec(rec["lambda"], ex),
                rec["round_diag"]))
            if rec["kind"] in trace.counts:
                trace.counts[rec["kind"]] += 1
        elif rec["type"] == "footer":
            totals = rec["totals"]
            trace.oracle_calls = totals["oracle_calls"]
            if (totals["wallacher_steps"], totals["lsc_steps"]) != (trace.counts["wallacher"], trace.counts["lsc"]):
                trace.record = False  # steps were not all recorded
                trace.counts = {"wallacher": totals["wallacher_steps"], "lsc": totals["lsc_steps"]}
    if trace is None:
        raise ValueError("trace has no header line")
    return trace


def to_csv(trace: WalkTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in trace.steps:
        diag = s.round_diag or {}
        w.writerow([s.index, s.kind, _num(s.alpha), _num(s.objective_after), _num(s.lam),
                    "" if diag.get("k") is None else diag["k"],
                    "" if diag.get("S_size") is None else diag["S_size"]])
    return buf.getvalue()


def _num(v):
    return "" if v is None else repr(float(v))


def export(trace: WalkTrace, path, fmt: Optional[str] = None) -> None:
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix == ".csv" else "jsonl")
    if fmt not in ("jsonl", "csv"):
        raise ValueError(f"unknown trace format {fmt!r}")
    path.write_text(to_jsonl(trace) if fmt == "jsonl" else to_csv(trace))


def load(path) -> WalkTrace:
    return from_jsonl(Path(path).read_text())


# -- verification --------------------------------------------------------------

def verify_walk(inst: LpInstance, x0, trace: WalkTrace, rel_tol: float = 1e-7) -> list:
    """Replay ``trace`` from ``x0``; return a list of violation strings (empty on success)."""
    exact = trace.exact
    A, _, c = inst.data(exact)
    x = nm.to_exact(x0) if exact else np.asarray(x0, dtype=float).copy()
    if x.shape != (inst.n,):
        raise ValueError("trace/instance mismatch: x0 has the wrong length")
    out = []
    prev_obj = c.dot(x)
    scale = 1.0 + float(np.abs(nm.to_float(x)).max())
    for s in trace.steps:
        if s.kind == "none":
            continue
        z = s.direction
        if z is None or len(z) != inst.n:
            raise ValueError(f"step {s.index}: direction missing or of wrong length")
        if not any(v != 0 for v in z):
            out.append(f"step {s.index}: empty direction")
            continue
        if not is_elementary(A, z):
            out.append(f"step {s.index}: direction is not elementary")
        neg = [i for i in range(inst.n) if z[i] < 0]
        if not neg:
            out.append(f"step {s.index}: direction has no negative coordinate")
            continue
        alpha_max = min(x[i] / -z[i] for i in neg)
        alpha = s.alpha
        if exact:
            if alpha != alpha_max:
                out.append(f"step {s.index}: step length {alpha} is not maximal ({alpha_max})")
        elif abs(float(alpha) - float(alpha_max)) > rel_tol * (1.0 + abs(float(alpha_max))):
            out.append(f"step {s.index}: step length {float(alpha):.12g} is not maximal ({float(alpha_max):.12g})")
        x = x + alpha * z
        if not exact:
            x[np.abs(x) <= 1e-12 * scale] = 0.0
            x[x < 0] = np.where(x[x < 0] >= -EPS_FEAS * scale, 0.0, x[x < 0])
        fp = check_feasible(inst, x)
        if not hasattr(fp, "objective"):
            out.append(f"step {s.index}: infeasible point ({fp})")
        obj = c.dot(x)
        tol = 0 if exact else rel_tol * (1.0 + abs(float(prev_obj)))
        if obj > prev_obj + tol:
            out.append(f"step {s.index}: objective increased")
        recorded = s.objective_after
        if recorded is not None and abs(float(obj) - float(recorded)) > rel_tol * (1.0 + abs(float(obj))):
            out.append(f"step {s.index}: recorded objective {float(recorded):.12g} != replayed {float(obj):.12g}")
        prev_obj = obj
    return out
