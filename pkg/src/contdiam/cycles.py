"""Pairs of shortcuts for polygonal cycles.

Two chords ``pq`` and ``rs`` either alternate (ccw order p, r, q, s) or are
consecutive (ccw order p, q, r, s).  For an alternating pair with ccw arcs
``a = p->r``, ``b = r->q``, ``c = q->s``, ``d = s->p`` the candidate
diametral cycles are::

    bowtie     = a + c + |pq| + |rs|
    hourglass  = b + d + |pq| + |rs|
    red split  = c + d + |pq|
    blue split = a + d + |rs|

On a convex cycle some optimal pair has all four equal.  Such a *balanced*
configuration is unique for each position of ``p``, and its diameter is the
arc ``d``.  :func:`optimal_pair` slides ``p`` once around the cycle, carrying
the balanced triple along edge by edge, and keeps the smallest ``d``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import Degenerate, NotAShortcut, NotConvex, SolverError, WrongConfiguration
from .geometry import REL_TOL, ArcPosition, CycleNetwork, euclidean, is_convex, is_degenerate

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# solver settings
MAX_BISECT = 200
STAGE_SAMPLES = 32
STAGE_REFINE_TOL = 1e-9
NEWTON_TOL = 1e-13
NEWTON_MAXITER = 30


# --------------------------------------------------------------------------
# pair bookkeeping
# --------------------------------------------------------------------------

class CandidateCycleLengths(NamedTuple):
    bowtie: float
    hourglass: float
    red_split: float
    blue_split: float


@dataclass(frozen=True)
class AlternatingPair:
    """Two chords ``pq`` and ``rs`` whose endpoints alternate along the cycle.

    Labels are normalized so that ``a + b <= c + d`` and ``b + c <= a + d``
    (the red split contains ``s``, the blue split contains ``p``).
    """

    a: float
    b: float
    c: float
    d: float
    len_pq: float
    len_rs: float
    p: ArcPosition | None = None
    r: ArcPosition | None = None
    q: ArcPosition | None = None
    s: ArcPosition | None = None

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < -REL_TOL * max(self.total, 1.0):
            raise ValueError("arcs of an alternating pair must be non-negative")

    @property
    def total(self) -> float:
        return self.a + self.b + self.c + self.d

    @property
    def positions(self) -> tuple[ArcPosition, ArcPosition, ArcPosition, ArcPosition]:
        return self.p, self.r, self.q, self.s

    def _rotated(self, k: int) -> "AlternatingPair":
        arcs = [self.a, self.b, self.c, self.d]
        pos = [self.p, self.r, self.q, self.s]
        arcs = arcs[k:] + arcs[:k]
        pos = pos[k:] + pos[:k]
        lens = (self.len_pq, self.len_rs) if k % 2 == 0 else (self.len_rs, self.len_pq)
        return AlternatingPair(*arcs, *lens, *pos)

    def normalized(self, tol: float | None = None) -> "AlternatingPair":
        """Relabel (rotate) so that ``a + b <= c + d`` and ``b + c <= a + d``."""
        tol = REL_TOL * self.total if tol is None else tol
        best, best_bad = self, math.inf
        for k in range(4):
            cand = self._rotated(k)
            bad = max(cand.a + cand.b - cand.c - cand.d, cand.b + cand.c - cand.a - cand.d, 0.0)
            if bad <= tol:
                return cand
            if bad < best_bad:
                best, best_bad = cand, bad
        return best

    @classmethod
    def from_positions(cls, cycle: CycleNetwork, p: ArcPosition, r: ArcPosition,
                       q: ArcPosition, s: ArcPosition, normalize: bool = True) -> "AlternatingPair":
        """Build from four points given in ccw order p, r, q, s (chords pq, rs)."""
        t = [cycle.arc_length(x) for x in (p, r, q, s)]
        a = cycle.d_ccw(t[0], t[1])
        b = cycle.d_ccw(t[1], t[2])
        c = cycle.d_ccw(t[2], t[3])
        d = cycle.total_length - a - b - c
        if d < -cycle.tol:
            raise WrongConfiguration("points are not in ccw order p, r, q, s")
        pair = cls(a, b, c, max(d, 0.0),
                   euclidean(cycle.point_at(p), cycle.point_at(q)),
                   euclidean(cycle.point_at(r), cycle.point_at(s)),
                   p, r, q, s)
        return pair.normalized() if normalize else pair

    def check_shortcuts(self, tol: float | None = None) -> None:
        tol = REL_TOL * self.total if tol is None else tol
        d_pq = min(self.a + self.b, self.c + self.d)
        d_rs = min(self.b + self.c, self.a + self.d)
        if self.len_pq >= d_pq - tol:
            raise NotAShortcut(f"|pq| = {self.len_pq:.12g} >= d(p,q) = {d_pq:.12g}")
        if self.len_rs >= d_rs - tol:
            raise NotAShortcut(f"|rs| = {self.len_rs:.12g} >= d(r,s) = {d_rs:.12g}")


@dataclass(frozen=True)
class ConsecutivePair:
    """Two chords ``pq`` and ``rs`` with ccw order p, q, r, s.

    Normalized so that ``gap_qr <= gap_sp``.
    """

    gap_pq: float
    gap_qr: float
    gap_rs: float
    gap_sp: float
    len_pq: float
    len_rs: float
    p: ArcPosition | None = None
    q: ArcPosition | None = None
    r: ArcPosition | None = None
    s: ArcPosition | None = None

    @property
    def total(self) -> float:
        return self.gap_pq + self.gap_qr + self.gap_rs + self.gap_sp

    def normalized(self) -> "ConsecutivePair":
        if self.gap_qr <= self.gap_sp:
            return self
        return ConsecutivePair(self.gap_rs, self.gap_sp, self.gap_pq, self.gap_qr,
                               self.len_rs, self.len_pq, self.r, self.s, self.p, self.q)

    @classmethod
    def from_positions(cls, cycle: CycleNetwork, p: ArcPosition, q: ArcPosition,
                       r: ArcPosition, s: ArcPosition) -> "ConsecutivePair":
        t = [cycle.arc_length(x) for x in (p, q, r, s)]
        gaps = [cycle.d_ccw(t[i], t[(i + 1) % 4]) for i in range(4)]
        if abs(sum(gaps) - cycle.total_length) > 4 * cycle.tol:
            raise WrongConfiguration("chords alternate; expected ccw order p, q, r, s")
        return cls(*gaps,
                   euclidean(cycle.point_at(p), cycle.point_at(q)),
                   euclidean(cycle.point_at(r), cycle.point_at(s)),
                   p, q, r, s).normalized()

    def check_shortcuts(self, tol: float | None = None) -> None:
        total = self.total
        tol = REL_TOL * total if tol is None else tol
        d_pq = min(self.gap_pq, total - self.gap_pq)
        d_rs = min(self.gap_rs, total - self.gap_rs)
        if self.len_pq >= d_pq - tol:
            raise NotAShortcut(f"|pq| = {self.len_pq:.12g} >= d(p,q) = {d_pq:.12g}")
        if self.len_rs >= d_rs - tol:
            raise NotAShortcut(f"|rs| = {self.len_rs:.12g} >= d(r,s) = {d_rs:.12g}")


def classify_chords(cycle: CycleNetwork, chord1: tuple[ArcPosition, ArcPosition],
                    chord2: tuple[ArcPosition, ArcPosition]) -> AlternatingPair | ConsecutivePair:
    """Label two chords as an alternating or a consecutive pair.

    Chords sharing an endpoint belong to both families; they are reported as
    alternating.
    """
    (u1, v1), (u2, v2) = chord1, chord2
    for p, q in ((u1, v1), (v1, u1)):
        for r, s in ((u2, v2), (v2, u2)):
            try:
                return AlternatingPair.from_positions(cycle, p, r, q, s)
            except WrongConfiguration:
                pass
    for p, q in ((u1, v1), (v1, u1)):
        for r, s in ((u2, v2), (v2, u2)):
            try:
                return ConsecutivePair.from_positions(cycle, p, q, r, s)
            except WrongConfiguration:
                pass
    raise WrongConfiguration("could not order the chord endpoints")  # pragma: no cover


def candidate_cycle_lengths(pair: AlternatingPair) -> CandidateCycleLengths:
    a, b, c, d = pair.a, pair.b, pair.c, pair.d
    return CandidateCycleLengths(
        bowtie=a + c + pair.len_pq + pair.len_rs,
        hourglass=b + d + pair.len_pq + pair.len_rs,
        red_split=c + d + pair.len_pq,
        blue_split=a + d + pair.len_rs,
    )


class Relation(NamedTuple):
    by_length: str
    by_shortcuts: str

    @property
    def agree(self) -> bool:
        return self.by_length == self.by_shortcuts


def _cmp(x: float, y: float, tol: float) -> str:
    if x < y - tol:
        return "<"
    if x > y + tol:
        return ">"
    return "="


def relations(pair: AlternatingPair, tol: float | None = None) -> dict[str, Relation]:
    """Order of each pair of candidate cycles, computed two ways.

    The left column compares the cycle lengths; the right column compares the
    equivalent arc/chord expressions, e.g. bowtie ~ red  <=>  a + |rs| ~ d.
    """
    tol = REL_TOL * pair.total if tol is None else tol
    a, b, c, d, pq, rs = pair.a, pair.b, pair.c, pair.d, pair.len_pq, pair.len_rs
    cc = candidate_cycle_lengths(pair)
    return {
        "bowtie~hourglass": Relation(_cmp(cc.bowtie, cc.hourglass, tol), _cmp(a + c, b + d, tol)),
        "red~blue": Relation(_cmp(cc.red_split, cc.blue_split, tol), _cmp(c + pq, a + rs, tol)),
        "bowtie~red": Relation(_cmp(cc.bowtie, cc.red_split, tol), _cmp(a + rs, d, tol)),
        "hourglass~red": Relation(_cmp(cc.hourglass, cc.red_split, tol), _cmp(b + rs, c, tol)),
        "bowtie~blue": Relation(_cmp(cc.bowtie, cc.blue_split, tol), _cmp(c + pq, d, tol)),
        "hourglass~blue": Relation(_cmp(cc.hourglass, cc.blue_split, tol), _cmp(b + pq, a, tol)),
    }


def useful_alternating(pair: AlternatingPair) -> bool:
    """True iff adding both chords strictly lowers the cycle's diameter."""
    pair.check_shortcuts()
    pq_rs = pair.len_pq + pair.len_rs
    return pq_rs < pair.a + pair.c and pq_rs < pair.b + pair.d


def useful_consecutive(pair: ConsecutivePair) -> bool:
    """Consecutive chords help iff ``|pq| + |rs| < d_ccw(s,p) - d_ccw(q,r)``."""
    pair = pair.normalized()
    pair.check_shortcuts()
    return pair.len_pq + pair.len_rs < pair.gap_sp - pair.gap_qr


def consecutive_to_alternating(cycle: CycleNetwork, pair: ConsecutivePair | AlternatingPair) -> AlternatingPair:
    """Trade a consecutive pair for a touching alternating pair that is no worse.

    The chord spanning the longer arc is kept; the other one is replaced by
    the chord from its far endpoint to the near endpoint of the kept chord.
    """
    if isinstance(pair, AlternatingPair):
        raise WrongConfiguration("pair is already alternating")
    pair = pair.normalized()
    if pair.p is None:
        raise ValueError("consecutive_to_alternating needs the chord endpoints")
    if pair.gap_pq <= pair.gap_rs:
        p, r, q, s = pair.p, pair.r, pair.r, pair.s  # chords pr and rs
    else:
        p, r, q, s = pair.p, pair.q, pair.q, pair.s  # chords pq and qs
    return AlternatingPair.from_positions(cycle, p, r, q, s)


# --------------------------------------------------------------------------
# balanced configurations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BalancedConfiguration:
    pair: AlternatingPair
    residuals: tuple[float, float, float]
    diameter: float
    arcs: tuple[float, float, float, float]  # unwrapped (tp, tr, tq, ts)

    @property
    def max_residual(self) -> float:
        return max(abs(x) for x in self.residuals)


@dataclass(frozen=True)
class StageResult:
    t_start: float
    t_end: float
    best: BalancedConfiguration
    exit_arcs: tuple[float, float, float, float]
    next_edges: tuple[int, int, int, int]
    crossing: str
    samples: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class CyclePairSolution:
    config: BalancedConfiguration
    diameter: float
    improvement: float
    stage_count: int
    stages: tuple[StageResult, ...] = field(default=(), repr=False)

    @property
    def pair(self) -> AlternatingPair:
        return self.config.pair


class _Frame(NamedTuple):
    """An edge of the cycle placed on the unwrapped arc axis."""

    edge: int
    start: float
    length: float
    x0: float
    y0: float
    ux: float
    uy: float

    @property
    def end(self) -> float:
        return self.start + self.length

    def xy(self, t: float) -> tuple[float, float]:
        u = t - self.start
        return self.x0 + u * self.ux, self.y0 + u * self.uy


def _frame(cycle: CycleNetwork, edge: int, wrap: int) -> _Frame:
    s0, ln, x0, y0, ux, uy = cycle.edge_frame(edge)
    return _Frame(edge, s0 + wrap * cycle.total_length, ln, x0, y0, ux, uy)


def _frame_at(cycle: CycleNetwork, t: float) -> _Frame:
    L = cycle.total_length
    wrap = math.floor(t / L)
    pos = cycle.locate(t - wrap * L)
    if t - wrap * L >= L:  # pragma: no cover - rounding guard
        wrap += 1
    return _frame(cycle, pos.edge, wrap)


def _next_frame(cycle: CycleNetwork, fr: _Frame) -> _Frame:
    L = cycle.total_length
    wrap = round((fr.start - cycle.cumulative_length[fr.edge]) / L)
    nxt = fr.edge + 1
    if nxt == cycle.n_edges:
        nxt, wrap = 0, wrap + 1
    return _frame(cycle, nxt, wrap)


def _residuals_xy(L, T, P, R, Q, S):
    tp, tr, tq, ts = T
    rs = math.hypot(R[0] - S[0], R[1] - S[1])
    pq = math.hypot(P[0] - Q[0], P[1] - Q[1])
    a, b, c, d = tr - tp, tq - tr, ts - tq, tp + L - ts
    return (a + c) - (b + d), rs - (d - a), pq - (d - c), pq, rs


def _solve3(M, v):
    (a, b, c), (d, e, f), (g, h, i) = M
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    if det == 0.0 or not math.isfinite(det):
        return None
    x = (v[0] * (e * i - f * h) - b * (v[1] * i - f * v[2]) + c * (v[1] * h - e * v[2])) / det
    y = (a * (v[1] * i - f * v[2]) - v[0] * (d * i - f * g) + c * (d * v[2] - v[1] * g)) / det
    z = (a * (e * v[2] - v[1] * h) - b * (d * v[2] - v[1] * g) + v[0] * (d * h - e * g)) / det
    return x, y, z


class _BalanceSolver:
    """Balanced-configuration solves on one convex cycle."""

    def __init__(self, cycle: CycleNetwork, tol: float = 1e-7):
        self.cycle = cycle
        self.L = cycle.total_length
        self.tol = tol * self.L

    # -- global nested bisection ------------------------------------------
    def _dist(self, s: float, t: float) -> float:
        a = self.cycle.xy_at_arc(s)
        b = self.cycle.xy_at_arc(t)
        return math.hypot(a[0] - b[0], a[1] - b[1])

    def _inner(self, tp: float, d: float) -> tuple[float, int]:
        """Slide the rigid (r, q) pair until red split == blue split.

        Returns ``(a, status)``; status is 0 when a root exists inside
        ``[b, d]``, otherwise the side on which it would lie.
        """
        L, half = self.L, 0.5 * self.L
        b = half - d
        ts = tp + L - d

        def f(a):
            tr = tp + a
            return (half - a) + self._dist(tp, tr + b) - a - self._dist(tr, ts)

        lo, hi = b, d
        if f(lo) < 0.0:
            return lo, -1
        if f(hi) > 0.0:
            return hi, 1
        for _ in range(MAX_BISECT):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if f(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi), 0

    def nested(self, tp: float, outer: tuple[float, float] | None = None) -> tuple[float, float, float, float]:
        """Balanced triple for ``p`` at arc ``tp`` by nested bisection.

        Outer search on ``d = d_ccw(s, p)`` in ``[|C|/4, |C|/2]``; for each
        ``d`` the gap ``b = |C|/2 - d`` keeps bowtie == hourglass and the inner
        search balances the splits.  bowtie - red decreases in ``d``.
        """
        L = self.L
        lo, hi = outer if outer is not None else (0.25 * L, 0.5 * L)

        def g(d):
            a, status = self._inner(tp, d)
            if status != 0:
                return a, math.inf  # s too close to p: treat as bowtie > red
            return a, a + self._dist(tp + a, tp + L - d) - d

        a_hi, g_hi = g(hi)
        # at d = |C|/2 this is |rs| - d_ccw(r, s) <= 0, up to rounding
        if g_hi > self.tol:
            raise SolverError(f"no balanced configuration in bracket {lo, hi} (bowtie - red = {g_hi:.3g})")
        best = (hi, a_hi)
        for _ in range(MAX_BISECT):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            a_mid, g_mid = g(mid)
            if g_mid > 0.0:
                lo = mid
            else:
                hi, best = mid, (mid, a_mid)
        d, a = best
        b = 0.5 * L - d
        return tp, tp + a, tp + a + b, tp + L - d

    # -- local Newton on fixed edges --------------------------------------
    def newton(self, T, frames: Sequence[_Frame], pin: int = 0):
        """Solve the three balance equations with coordinate ``pin`` held fixed.

        Points move along the (extended) lines of ``frames``.  Returns the
        arcs or ``None`` if Newton does not converge.
        """
        L = self.L
        T = list(T)
        free = [i for i in range(4) if i != pin]
        for _ in range(NEWTON_MAXITER):
            P, R, Q, S = (frames[i].xy(T[i]) for i in range(4))
            r1, r2, r3, pq, rs = _residuals_xy(L, T, P, R, Q, S)
            if max(abs(r1), abs(r2), abs(r3)) <= NEWTON_TOL * L:
                return tuple(T)
            if pq <= 0.0 or rs <= 0.0:
                return None
            fp, fr, fq, fs = frames
            gp = ((P[0] - Q[0]) * fp.ux + (P[1] - Q[1]) * fp.uy) / pq
            gq = ((Q[0] - P[0]) * fq.ux + (Q[1] - P[1]) * fq.uy) / pq
            gr = ((R[0] - S[0]) * fr.ux + (R[1] - S[1]) * fr.uy) / rs
            gs = ((S[0] - R[0]) * fs.ux + (S[1] - R[1]) * fs.uy) / rs
            J = (
                (-2.0, 2.0, -2.0, 2.0),
                (-2.0, 1.0 + gr, 0.0, 1.0 + gs),
                (-1.0 + gp, 0.0, -1.0 + gq, 2.0),
            )
            M = [[row[j] for j in free] for row in J]
            step = _solve3(M, (-r1, -r2, -r3))
            if step is None:
                return None
            for j, dx in zip(free, step):
                T[j] += dx
            if not all(math.isfinite(x) for x in T):
                return None
        return None

    def tangent(self, T, frames: Sequence[_Frame]) -> tuple[float, float, float, float] | None:
        """dT/dtp along the balanced family (implicit function theorem)."""
        P, R, Q, S = (frames[i].xy(T[i]) for i in range(4))
        _, _, _, pq, rs = _residuals_xy(self.L, T, P, R, Q, S)
        if pq <= 0.0 or rs <= 0.0:
            return None
        fp, fr, fq, fs = frames
        gp = ((P[0] - Q[0]) * fp.ux + (P[1] - Q[1]) * fp.uy) / pq
        gq = ((Q[0] - P[0]) * fq.ux + (Q[1] - P[1]) * fq.uy) / pq
        gr = ((R[0] - S[0]) * fr.ux + (R[1] - S[1]) * fr.uy) / rs
        gs = ((S[0] - R[0]) * fs.ux + (S[1] - R[1]) * fs.uy) / rs
        M = ((2.0, -2.0, 2.0), (1.0 + gr, 0.0, 1.0 + gs), (0.0, -1.0 + gq, 2.0))
        sol = _solve3(M, (2.0, 2.0, 1.0 - gp))
        if sol is None:
            return None
        return 1.0, sol[0], sol[1], sol[2]

    def residuals(self, T) -> tuple[float, float, float]:
        xy = [self.cycle.xy_at_arc(t) for t in T]
        return _residuals_xy(self.L, T, *xy)[:3]

    def configuration(self, T) -> BalancedConfiguration:
        cyc = self.cycle
        pos = [cyc.locate(t) for t in T]
        L = self.L
        tp, tr, tq, ts = T
        xy = [cyc.point_at(x) for x in pos]
        pair = AlternatingPair(tr - tp, tq - tr, ts - tq, tp + L - ts,
                               euclidean(xy[0], xy[2]), euclidean(xy[1], xy[3]),
                               *pos)
        res = self.residuals(T)
        return BalancedConfiguration(pair=pair, residuals=tuple(res), diameter=pair.d, arcs=tuple(T))


def _require_convex(cycle: CycleNetwork) -> None:
    if is_degenerate(cycle):
        raise Degenerate("cycle is a doubled segment; no pair of shortcuts lowers its diameter")
    if not is_convex(cycle):
        raise NotConvex("optimal pairs are only computed for convex cycles; for non-convex cycles "
                        "only the bowtie = hourglass characterization is available")


def balanced_configuration(cycle: CycleNetwork, p: ArcPosition, tol: float = 1e-7,
                           outer_bracket: tuple[float, float] | None = None) -> BalancedConfiguration:
    """The unique q, r, s with bowtie = hourglass = red split = blue split."""
    _require_convex(cycle)
    solver = _BalanceSolver(cycle, tol)
    T = solver.nested(cycle.arc_length(p), outer_bracket)
    frames = [_frame_at(cycle, t) for t in T]
    polished = solver.newton(T, frames)
    if polished is not None and _inside(polished, frames, solver.L * 1e-9) and _ordered(polished, solver.L):
        if max(map(abs, solver.residuals(polished))) <= max(map(abs, solver.residuals(T))):
            T = polished
    config = solver.configuration(T)
    if config.max_residual > solver.tol:
        raise SolverError(f"balanced configuration did not converge: residuals {config.residuals}")
    return config


def _inside(T, frames, slack) -> bool:
    return all(fr.start - slack <= t <= fr.end + slack for t, fr in zip(T, frames))


def _ordered(T, L) -> bool:
    eps = 1e-12 * L
    return T[0] <= T[1] + eps and T[1] <= T[2] + eps and T[2] <= T[3] + eps and T[3] <= T[0] + L + eps


def _gss(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Golden-section search; returns (argmin, min) among evaluated points."""
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    best = min((fc, c), (fd, d))
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
        best = min(best, (fc, c), (fd, d))
    return best[1], best[0]


_LABELS = ("p", "r", "q", "s")


def run_stage(cycle: CycleNetwork, config: BalancedConfiguration | Sequence[float],
              t_stop: float | None = None, tol: float = 1e-7) -> StageResult:
    """Minimize the diameter over one stage of the sweep.

    A stage keeps p, r, q, s on fixed edges.  It ends when the first of them
    reaches the end of its edge (or at ``t_stop``).  The stage's family is
    sampled at 32 values of p's arc and refined by golden-section search.
    """
    T0 = tuple(config.arcs) if isinstance(config, BalancedConfiguration) else tuple(config)
    frames = [_frame_at(cycle, t) for t in T0]
    return _advance(cycle, _BalanceSolver(cycle, tol), T0, frames, t_stop)[0]


def advance_stage(cycle: CycleNetwork, config: BalancedConfiguration,
                  edges: Sequence[int] | None = None,
                  tol: float = 1e-7) -> tuple[BalancedConfiguration, tuple[int, int, int, int]]:
    """Stage minimum and the edges hosting (p, r, q, s) once the stage ends."""
    frames = [_frame_at(cycle, t) for t in config.arcs]
    if edges is not None and [f.edge for f in frames] != list(edges):
        raise WrongConfiguration(f"points are on edges {[f.edge for f in frames]}, not {list(edges)}")
    stage = run_stage(cycle, config, tol=tol)
    return stage.best, stage.next_edges


def _advance(cycle, solver, T0, frames, t_stop=None):
    L = solver.L
    t_stop = T0[0] + L if t_stop is None else t_stop
    t0 = T0[0]

    t_exit, T_exit, crossing = _stage_exit(solver, T0, frames, t_stop)

    # sample the family, warm-starting each solve from the previous one
    ts = np.linspace(t0, t_exit, STAGE_SAMPLES)
    samples: list[tuple[float, tuple]] = []
    prev = T0
    for t in ts:
        guess = (t,) + tuple(prev[1:])
        T = solver.newton(guess, frames) if t != t0 else T0
        if T is None:
            T = solver.nested(t)
        samples.append((t, T))
        prev = T

    def diam(T):
        return T[0] + L - T[3]

    k = min(range(len(samples)), key=lambda i: (diam(samples[i][1]), i))
    best_T = samples[k][1]
    if t_exit > t0:
        lo = samples[max(k - 1, 0)][0]
        hi = samples[min(k + 1, len(samples) - 1)][0]
        cache = {}

        def f(t):
            guess = (t,) + tuple(best_T[1:])
            T = solver.newton(guess, frames)
            if T is None:
                T = solver.nested(t)
            cache[t] = T
            return diam(T)

        t_best, d_best = _gss(f, lo, hi, STAGE_REFINE_TOL * L)
        if d_best < diam(best_T):
            best_T = cache[t_best]

    next_frames = [
        _next_frame(cycle, fr) if T_exit[i] >= fr.end - 1e-11 * L else fr
        for i, fr in enumerate(frames)
    ]
    return StageResult(
        t_start=t0,
        t_end=t_exit,
        best=solver.configuration(best_T),
        exit_arcs=tuple(T_exit),
        next_edges=tuple(f.edge for f in next_frames),
        crossing=crossing,
        samples=tuple((t, diam(T)) for t, T in samples),
    ), next_frames


def _stage_exit(solver: _BalanceSolver, T0, frames, t_stop):
    """First arc of p at which some point reaches the end of its edge."""
    L = solver.L
    slack = 1e-9 * L
    tan = solver.tangent(T0, frames)
    best = None
    for i, fr in enumerate(frames):
        if i == 0:
            target = min(fr.end, t_stop)
            guess = (target,) + tuple(T0[1:]) if tan is None else tuple(
                T0[j] + (target - T0[0]) * tan[j] for j in range(4))
            T = solver.newton(guess, frames, pin=0)
            label = "p" if fr.end <= t_stop else "stop"
        else:
            if tan is None or tan[i] <= 0.0:
                continue
            dt = (fr.end - T0[i]) / tan[i]
            guess = [T0[j] + dt * tan[j] for j in range(4)]
            guess[i] = fr.end
            T = solver.newton(guess, frames, pin=i)
            label = _LABELS[i]
        if T is None or T[0] < T0[0] - slack or T[0] > t_stop + slack:
            continue
        if best is None or T[0] < best[1][0]:
            best = (label, T)
    if best is not None and _inside(best[1], frames, slack) and _ordered(best[1], L):
        label, T = best
        return max(T[0], T0[0]), T, label
    return _stage_exit_bisect(solver, T0, frames, t_stop)


def _stage_exit_bisect(solver, T0, frames, t_stop):
    """Fallback: bisection on p's arc for the first edge exit."""
    L = solver.L
    slack = 1e-12 * L
    hi_t = min(frames[0].end, t_stop)
    lo_T = T0
    T = solver.newton((hi_t,) + tuple(T0[1:]), frames)
    if T is not None and _inside(T, frames, slack):
        return hi_t, T, "p" if hi_t == frames[0].end else "stop"
    lo, hi = T0[0], hi_t
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= 1e-14 * L:
            break
        T = solver.newton((mid,) + tuple(lo_T[1:]), frames)
        if T is not None and _inside(T, frames, slack):
            lo, lo_T = mid, T
        else:
            hi = mid
    if lo_T is T0 and lo == T0[0]:
        return T0[0], T0, "vertex"
    ends = [fr.end - t for fr, t in zip(frames, lo_T)]
    return lo, lo_T, _LABELS[int(np.argmin(ends))]


def optimal_pair(cycle: CycleNetwork, tol: float = 1e-7, keep_stages: bool = True) -> CyclePairSolution:
    """Optimal pair of shortcuts for a convex cycle.

    Sweeps ``p`` once around the cycle.  Every stage boundary moves at least
    one of the four points onto its next edge, so there are at most about
    ``4n`` stages.  Ties between equally good stages go to the smallest arc of
    ``p``.
    """
    _require_convex(cycle)
    solver = _BalanceSolver(cycle, tol)
    L = solver.L
    n = cycle.n_edges
    T = solver.nested(0.0)
    frames = [_frame_at(cycle, t) for t in T]
    polished = solver.newton(T, frames)
    if polished is not None and _inside(polished, frames, 1e-9 * L):
        T = polished
    t_stop = L
    stages: list[StageResult] = []
    best: BalancedConfiguration | None = None
    limit = 4 * n + 16
    while T[0] < t_stop - 1e-12 * L:
        if len(stages) >= limit:
            raise SolverError(f"sweep did not finish within {limit} stages")
        stage, frames = _advance(cycle, solver, T, frames, t_stop)
        stages.append(stage)
        if best is None or stage.best.diameter < best.diameter - 1e-12 * L:
            best = stage.best
        T = stage.exit_arcs
    assert best is not None
    if best.max_residual > solver.tol:
        raise SolverError(f"optimal configuration has residuals {best.residuals}")
    diameter = best.diameter
    return CyclePairSolution(
        config=best,
        diameter=diameter,
        improvement=L / 2.0 - diameter,
        stage_count=len(stages),
        stages=tuple(stages) if keep_stages else (),
    )


def check_corollary_3_14(config: BalancedConfiguration | AlternatingPair) -> np.ndarray:
    """Absolute residuals of the seven optimality identities for a balanced pair.

    1. a + c = b + d = |C|/2           5. b = |C|/4 - (|pq| + |rs|)/2
    2. |rs| = d - a = c - b            6. a = |C|/4 + (|pq| - |rs|)/2
    3. |pq| = d - c = a - b            7. c = |C|/4 + (|rs| - |pq|)/2
    4. d = |C|/4 + (|pq| + |rs|)/2
    """
    pair = config.pair if isinstance(config, BalancedConfiguration) else config
    a, b, c, d = pair.a, pair.b, pair.c, pair.d
    pq, rs = pair.len_pq, pair.len_rs
    L = pair.total
    q4 = L / 4.0
    return np.array([
        max(abs(a + c - L / 2), abs(b + d - L / 2)),
        max(abs(rs - (d - a)), abs(rs - (c - b))),
        max(abs(pq - (d - c)), abs(pq - (a - b))),
        abs(d - (q4 + (pq + rs) / 2)),
        abs(b - (q4 - (pq + rs) / 2)),
        abs(a - (q4 + (pq - rs) / 2)),
        abs(c - (q4 + (rs - pq) / 2)),
    ])


def single_shortcut_no_gain_check(cycle: CycleNetwork, p: ArcPosition, q: ArcPosition,
                                  h: float | None = None) -> bool:
    """Oracle check that one shortcut never lowers the diameter of a cycle."""
    from .oracle import approx_diameter

    _, _, geo = _cycle_geodesic(cycle, p, q)
    chord = euclidean(cycle.point_at(p), cycle.point_at(q))
    if chord >= geo - cycle.tol:
        raise NotAShortcut(f"|pq| = {chord:.12g} >= d(p,q) = {geo:.12g}")
    h = cycle.total_length / 2000.0 if h is None else h
    return approx_diameter(cycle, [(p, q)], h) >= cycle.total_length / 2.0 - h


def _cycle_geodesic(cycle, p, q):
    ccw = cycle.d_ccw(cycle.arc_length(p), cycle.arc_length(q))
    return ccw, cycle.total_length - ccw, min(ccw, cycle.total_length - ccw)
