"""Piecewise-linear functions of the gap and straight-line-complexity brackets."""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

from .. import numeric as nm


def _is_exact(v) -> bool:
    return isinstance(v, type(nm.ONE))


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function through ``(xs[k], ys[k])``; xs strictly increasing."""

    xs: tuple
    ys: tuple

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or not self.xs:
            raise ValueError("need matching, nonempty breakpoint lists")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def from_pieces(cls, pieces: Sequence[tuple]) -> "PiecewiseLinear":
        """Build from ``(lo, hi, slope, intercept)`` tuples covering a contiguous range."""
        pieces = sorted(pieces, key=lambda p: p[0])
        xs, ys = [pieces[0][0]], [pieces[0][3] + pieces[0][2] * pieces[0][0]]
        for lo, hi, q, p in pieces:
            if hi > xs[-1]:
                xs.append(hi)
                ys.append(p + q * hi)
        return cls(tuple(xs), tuple(ys)).simplified()

    def simplified(self) -> "PiecewiseLinear":
        """Drop breakpoints where the slope does not change."""
        xs, ys = [self.xs[0]], [self.ys[0]]
        for k in range(1, len(self.xs)):
            if len(xs) >= 2 and k < len(self.xs):
                s1 = (ys[-1] - ys[-2]) * (self.xs[k] - xs[-1])
                s2 = (self.ys[k] - ys[-1]) * (xs[-1] - xs[-2])
                if _close(s1, s2):
                    xs[-1], ys[-1] = self.xs[k], self.ys[k]
                    continue
            xs.append(self.xs[k])
            ys.append(self.ys[k])
        return PiecewiseLinear(tuple(xs), tuple(ys))

    @property
    def lo(self):
        return self.xs[0]

    @property
    def hi(self):
        return self.xs[-1]

    @property
    def pieces(self) -> int:
        return max(len(self.xs) - 1, 1)

    def kinks(self) -> tuple:
        return self.xs[1:-1]

    def slopes(self) -> list:
        return [(y1 - y0) / (x1 - x0) for x0, x1, y0, y1 in zip(self.xs, self.xs[1:], self.ys, self.ys[1:])]

    def __call__(self, t):
        xs = self.xs
        if t < xs[0] or t > xs[-1]:
            span = xs[-1] - xs[0]
            tol = 0 if _is_exact(t) and _is_exact(xs[0]) else 1e-12 * (1 + abs(float(span)))
            if t < xs[0] - tol or t > xs[-1] + tol:
                raise ValueError(f"{t} outside [{xs[0]}, {xs[-1]}]")
            t = xs[0] if t < xs[0] else xs[-1]
        if len(xs) == 1:
            return self.ys[0]
        k = min(max(bisect.bisect_right(xs, t) - 1, 0), len(xs) - 2)
        x0, x1, y0, y1 = xs[k], xs[k + 1], self.ys[k], self.ys[k + 1]
        return y0 + (y1 - y0) * (t - x0) / (x1 - x0)

    def restrict(self, a, b) -> "PiecewiseLinear":
        inner = [(x, y) for x, y in zip(self.xs, self.ys) if a < x < b]
        pts = [(a, self(a))] + inner + ([(b, self(b))] if b > a else [])
        return PiecewiseLinear(tuple(p[0] for p in pts), tuple(p[1] for p in pts))

    def to_float(self) -> "PiecewiseLinear":
        return PiecewiseLinear(tuple(float(x) for x in self.xs), tuple(float(y) for y in self.ys))

    def is_concave_nondecreasing(self, tol: float = 1e-12) -> bool:
        s = self.slopes()
        scale = 1.0 + max([abs(float(v)) for v in s] or [0.0])
        if any(float(v) < -tol * scale for v in s):
            return False
        return all(float(b) <= float(a) + tol * scale for a, b in zip(s, s[1:]))


def _close(a, b) -> bool:
    if _is_exact(a) and _is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= 1e-12 * (1.0 + abs(float(a)) + abs(float(b)))


# -- straight line complexity -------------------------------------------------

def _fit(phi: PiecewiseLinear, eta, a, b, pin=None, tol=0.0):
    """Line ``(p, q)`` with ``eta*phi <= p + q t <= phi`` on ``[a, b]``, or None.

    ``phi`` is concave, so the upper bound is checked at the endpoints and the
    lower bound at the endpoints and the interior breakpoints. With ``pin =
    (t0, y0)`` the line must pass through that point.
    """
    uppers = [(a, phi(a)), (b, phi(b))]
    lowers = [(t, eta * phi(t)) for t in (a,) + tuple(x for x in phi.xs if a < x < b) + (b,)]
    if pin is not None:
        t0, y0 = pin
        lo_q, hi_q = None, None
        for (t, u), kind in [(c, "u") for c in uppers] + [(c, "l") for c in lowers]:
            d = t - t0
            rhs = u - y0
            if d == 0:
                if (kind == "u" and rhs < -tol) or (kind == "l" and rhs > tol):
                    return None
                continue
            bound = rhs / d
            # kind u: q*d <= rhs ; kind l: q*d >= rhs
            upper_side = (kind == "u") == (d > 0)
            if upper_side:
                hi_q = bound if hi_q is None else min(hi_q, bound)
            else:
                lo_q = bound if lo_q is None else max(lo_q, bound)
        if lo_q is not None and hi_q is not None and lo_q > hi_q + tol * (1 + abs(hi_q)):
            return None
        q = lo_q if lo_q is not None else (hi_q if hi_q is not None else 0)
        if lo_q is not None and hi_q is not None:
            q = (lo_q + hi_q) / 2 if hi_q >= lo_q else lo_q
        return (y0 - q * t0, q)

    def F(q):
        return min(u - q * t for t, u in uppers) - max(l - q * t for t, l in lowers)

    lines = [(t, u) for t, u in uppers] + [(t, l) for t, l in lowers]
    cands = {0 * a}
    for (t1, c1), (t2, c2) in combinations(lines, 2):
        if t1 != t2:
            cands.add((c1 - c2) / (t1 - t2))
    best_q = max(cands, key=F)
    val = F(best_q)
    scale = 1.0 + abs(float(phi(b)))
    if val < -tol * scale:
        return None
    p = min(u - best_q * t for t, u in uppers)
    return (p, best_q)


def _reach(phi, eta, a, pin, tol, rel_prec=1e-13):
    """Largest ``b`` in ``(a, phi.hi]`` for which one line fits on ``[a, b]``."""
    hi = phi.hi
    if _fit(phi, eta, a, hi, pin, tol) is not None:
        return hi
    good = a
    for x in phi.xs:
        if x <= a:
            continue
        if _fit(phi, eta, a, x, pin, tol) is None:
            bad = x
            break
        good = x
    exact = _is_exact(good) and _is_exact(bad)
    span = float(bad - good)
    for _ in range(200):
        if span <= rel_prec * (1.0 + abs(float(bad))):
            break
        mid = good + (bad - good) / 2
        if exact:
            mid = nm.Q(float(mid)) if float(mid) > float(good) else mid
        if _fit(phi, eta, a, mid, pin, tol) is not None:
            good = mid
        else:
            bad = mid
        span = float(bad - good)
    return good


def slc(phi: PiecewiseLinear, eta, g=None) -> tuple:
    """Bracket ``(lower, upper)`` on the straight line complexity of ``phi`` on ``[0, g]``."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    if not phi.is_concave_nondecreasing():
        raise ValueError("phi must be concave and nondecreasing")
    g = phi.hi if g is None else g
    phi = phi.restrict(phi.lo, g) if g < phi.hi else phi
    exact = _is_exact(phi.xs[0]) and _is_exact(eta)
    tol = 0 if exact else 1e-12
    if phi.hi == phi.lo:
        return 1, 1

    lower, a = 0, phi.lo
    while True:
        lower += 1
        b = _reach(phi, eta, a, None, tol)
        if b >= phi.hi:
            break
        if b <= a:
            raise ArithmeticError("no progress while covering phi")
        a = b

    upper, a, pin = 0, phi.lo, None
    while True:
        upper += 1
        b = _reach(phi, eta, a, pin, tol)
        if b <= a:
            raise ArithmeticError("pinned greedy stalled")
        if b >= phi.hi:
            break
        p, q = _fit(phi, eta, a, b, pin, tol)
        nxt = (b, p + q * b)
        if _stalls(phi, eta, nxt, tol):
            nxt = _top_anchor(phi, eta, a, pin, tol)
            if nxt[0] >= phi.hi:
                break
        pin = nxt
        a = nxt[0]
    return lower, max(upper, lower)


def _stalls(phi, eta, pin, tol) -> bool:
    b = pin[0]
    reach = _reach(phi, eta, b, pin, tol)
    return reach <= b or (not _is_exact(reach) and float(reach - b) <= 1e-12 * (1.0 + abs(float(b))))


def _top_anchor(phi, eta, a, pin, tol):
    """Pin ``(b, phi(b))`` at the last breakpoint reachable by a line from ``pin`` ending on ``phi``.

    A piece that ends on the upper envelope can always be continued up to the
    next breakpoint, so this fallback never stalls.
    """
    best = None
    for b in [x for x in phi.xs if x > a]:
        if not _line_ok(phi, eta, a, b, pin, (b, phi(b)), tol):
            break
        best = b
    if best is None:
        raise ArithmeticError("pinned greedy stalled")
    return (best, phi(best))


def _line_ok(phi, eta, a, b, pin, end, tol) -> bool:
    t1, y1 = end
    if pin is None:
        return _fit(phi, eta, a, b, end, tol) is not None
    t0, y0 = pin
    q = (y1 - y0) / (t1 - t0)
    for t in (a,) + tuple(x for x in phi.xs if a < x < b) + (b,):
        val = y0 + q * (t - t0)
        slack = tol * (1.0 + abs(float(phi(t))))
        if val > phi(t) + slack or val < eta * phi(t) - slack:
            return False
    return True
