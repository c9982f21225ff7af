"""Optimal single shortcut for a polygonal path.

With ``x = d(s, p)``, ``y = d(e, q)`` and slack ``z = (d(p, q) - |pq|) / 2``
the continuous diameter of ``P + pq`` is the largest of three path lengths:

* ``U = x + |pq| + y``       (endpoint to endpoint through the shortcut)
* ``S = x + |pq| + z``       (from ``s`` to the far side of the new cycle)
* ``E = y + |pq| + z``       (from ``e`` to the far side of the new cycle)

Some optimal shortcut has ``x == y``, so the search runs over one variable:
``p(x)`` and ``q(x)`` sit at distance ``x`` from ``s`` and ``e``, and the
diameter is ``(|P| + D(x)) / 2`` with ``D(x) = |p(x) q(x)|``, subject to
``4x + D(x) <= |P|``.  ``D(x)**2`` is a quadratic between consecutive vertex
events, which gives an exact linear-time minimization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NotAShortcut
from .geometry import REL_TOL, ArcPosition, PathNetwork, euclidean


@dataclass(frozen=True)
class PathCandidateLengths:
    u_len: float
    s_len: float
    e_len: float
    slack: float
    x: float
    y: float
    chord: float

    @property
    def diameter(self) -> float:
        return max(self.u_len, self.s_len, self.e_len)

    @property
    def diametral(self) -> tuple[str, ...]:
        """Names of the candidates attaining the diameter (ties included)."""
        top = self.diameter
        tol = REL_TOL * max(top, 1.0)
        names = ("U", "S", "E")
        vals = (self.u_len, self.s_len, self.e_len)
        return tuple(n for n, v in zip(names, vals) if v >= top - tol)


@dataclass(frozen=True)
class ParabolicPiece:
    """``D(x)**2`` on ``[x_lo, x_hi]`` in Bernstein form.

    With ``lam = (x - x_lo) / (x_hi - x_lo)``::

        D2 = (1 - lam)**2 * A + 2 * lam * (1 - lam) * B + lam**2 * C
    """

    x_lo: float
    x_hi: float
    coeff_A: float
    coeff_B: float
    coeff_C: float

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    def dsq(self, x: float) -> float:
        lam = (x - self.x_lo) / self.width
        mu = 1.0 - lam
        return mu * mu * self.coeff_A + 2.0 * lam * mu * self.coeff_B + lam * lam * self.coeff_C

    def curvature(self) -> float:
        # |(v1 - u1) - (v2 - u2)|**2; zero when p and q translate in parallel
        return self.coeff_A - 2.0 * self.coeff_B + self.coeff_C

    def argmin(self, hi: float | None = None) -> float:
        """Smallest minimizer of ``D2`` on ``[x_lo, hi]`` (default ``x_hi``)."""
        hi = self.x_hi if hi is None else hi
        k = self.curvature()
        if k <= 1e-15 * max(self.coeff_A, self.coeff_C, 1e-300):
            # constant piece (up to rounding): leftmost point wins ties
            return self.x_lo if self.dsq(self.x_lo) <= self.dsq(hi) else hi
        apex = self.x_lo + self.width * (self.coeff_A - self.coeff_B) / k
        return min(max(apex, self.x_lo), hi)


@dataclass(frozen=True)
class PathShortcutSolution:
    x_star: float
    p: ArcPosition
    q: ArcPosition
    shortcut_length: float
    diameter: float
    budget_bound: float
    path_length: float

    @property
    def improvement(self) -> float:
        return max(self.path_length - self.diameter, 0.0)

    @property
    def is_shortcut(self) -> bool:
        return self.improvement > REL_TOL * self.path_length


def candidate_lengths(path: PathNetwork, p: ArcPosition, q: ArcPosition) -> PathCandidateLengths:
    """Lengths of U(p,q), S(p,q), E(p,q); ``p`` and ``q`` are swapped if needed."""
    tp, tq = path.arc_length(p), path.arc_length(q)
    if tp > tq:
        p, q, tp, tq = q, p, tq, tp
    chord = euclidean(path.point_at(p), path.point_at(q))
    geodesic = tq - tp
    if chord >= geodesic - path.tol:
        raise NotAShortcut(f"|pq| = {chord:.12g} is not shorter than d(p,q) = {geodesic:.12g}")
    x = tp
    y = path.total_length - tq
    slack = (geodesic - chord) / 2.0
    return PathCandidateLengths(
        u_len=x + chord + y,
        s_len=x + chord + slack,
        e_len=y + chord + slack,
        slack=slack,
        x=x,
        y=y,
        chord=chord,
    )


def augmented_path_diameter(path: PathNetwork, p: ArcPosition, q: ArcPosition) -> float:
    """Exact continuous diameter of ``path + pq``."""
    return candidate_lengths(path, p, q).diameter


def balanced_points(path: PathNetwork, x: float) -> tuple[ArcPosition, ArcPosition]:
    """Points at distance ``x`` from ``s`` and from ``e``."""
    half = path.total_length / 2.0
    if x < -path.tol or x > half + path.tol:
        raise ValueError(f"x = {x} outside [0, {half}]")
    x = min(max(x, 0.0), half)
    return path.locate(x), path.locate(path.total_length - x)


def shortcut_length_at(path: PathNetwork, x: float) -> float:
    """D(x): Euclidean length of the balanced chord at parameter ``x``."""
    return euclidean(path.xy_at_arc(x), path.xy_at_arc(path.total_length - x))


def budget_function(path: PathNetwork, x: float) -> float:
    """B(x) = 4x + D(x); strictly increasing on [0, |P|/2]."""
    return 4.0 * x + shortcut_length_at(path, x)


def dsq_pieces(path: PathNetwork) -> list[ParabolicPiece]:
    """Split [0, |P|/2] at vertex events and fit D(x)**2 on each piece."""
    total = path.total_length
    half = total / 2.0
    events = {0.0, half}
    for c in path.cumulative_length.tolist():
        for x in (c, total - c):
            if 0.0 < x < half:
                events.add(x)
    xs = sorted(events)
    merge = 1e-12 * total
    breaks = [xs[0]]
    for x in xs[1:]:
        if x - breaks[-1] > merge:
            breaks.append(x)
    if len(breaks) == 1:
        breaks.append(half)
    breaks[-1] = half

    pieces = []
    prev = _chord_vector(path, breaks[0])
    for lo, hi in zip(breaks, breaks[1:]):
        cur = _chord_vector(path, hi)
        pieces.append(
            ParabolicPiece(
                x_lo=lo,
                x_hi=hi,
                coeff_A=prev[0] ** 2 + prev[1] ** 2,
                coeff_B=prev[0] * cur[0] + prev[1] * cur[1],
                coeff_C=cur[0] ** 2 + cur[1] ** 2,
            )
        )
        prev = cur
    return pieces


def _chord_vector(path: PathNetwork, x: float) -> tuple[float, float]:
    px, py = path.xy_at_arc(x)
    qx, qy = path.xy_at_arc(path.total_length - x)
    return px - qx, py - qy


def _solve_budget_in_piece(piece: ParabolicPiece, total: float) -> float | None:
    """Root of D2(x) = (total - 4x)**2 inside the piece with total - 4x >= 0."""
    w = piece.width
    A, B, C = piece.coeff_A, piece.coeff_B, piece.coeff_C
    r0 = total - 4.0 * piece.x_lo
    # in t = x - x_lo:  alpha t^2 + beta t + gamma = 0
    alpha = (A - 2.0 * B + C) / (w * w) - 16.0
    beta = -2.0 * (A - B) / w + 8.0 * r0
    gamma = A - r0 * r0
    roots: list[float] = []
    if abs(alpha) < 1e-14 * max(abs(beta), 1.0):
        if beta != 0.0:
            roots.append(-gamma / beta)
    else:
        disc = beta * beta - 4.0 * alpha * gamma
        if disc >= 0.0:
            sq = math.sqrt(disc)
            qq = -0.5 * (beta + math.copysign(sq, beta))
            if qq != 0.0:
                roots.append(qq / alpha)
                roots.append(gamma / qq)
            else:
                roots.append(0.0)
    slack = 1e-9 * w
    for t in sorted(roots):
        if -slack <= t <= w + slack and r0 - 4.0 * t >= -1e-9 * total:
            return piece.x_lo + min(max(t, 0.0), w)
    return None


def budget_bound(path: PathNetwork, pieces: list[ParabolicPiece] | None = None) -> float:
    """The unique b in [0, |P|/2] with 4b + D(b) = |P|."""
    pieces = dsq_pieces(path) if pieces is None else pieces
    total = path.total_length
    tol = REL_TOL * total

    def excess(piece: ParabolicPiece, x: float) -> float:
        return 4.0 * x + math.sqrt(max(piece.dsq(x), 0.0)) - total

    if excess(pieces[0], 0.0) >= -tol:
        return 0.0
    for piece in pieces:
        if excess(piece, piece.x_hi) < 0.0:
            continue
        b = _solve_budget_in_piece(piece, total)
        if b is None or abs(excess(piece, b)) > tol:
            b = _bisect_budget(piece, total, excess)
        return b
    # B(|P|/2) = 2|P| > |P|, so some piece always crosses
    raise AssertionError("budget function never reached |P|")


def _bisect_budget(piece, total, excess) -> float:
    lo, hi = piece.x_lo, piece.x_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(piece, mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * total:
            break
    return 0.5 * (lo + hi)


def optimal_path_shortcut(path: PathNetwork) -> PathShortcutSolution:
    """Shortcut ``p(x*) q(x*)`` minimizing the continuous diameter of the path.

    Walks the parabolic pieces of ``D**2`` up to the budget bound ``b`` and
    keeps the smallest value; ties go to the smallest ``x``.
    """
    pieces = dsq_pieces(path)
    b = budget_bound(path, pieces)
    total = path.total_length

    best_x, best_val = 0.0, pieces[0].dsq(0.0)
    tie = 1e-12 * total * total
    for piece in pieces:
        if piece.x_lo > b:
            break
        hi = min(piece.x_hi, b)
        for x in (piece.x_lo, piece.argmin(hi), hi):
            val = piece.dsq(x)
            # candidates arrive in increasing x, so near-ties keep the earlier one
            if val < best_val - tie:
                best_x, best_val = x, val

    p, q = balanced_points(path, best_x)
    d = math.sqrt(max(best_val, 0.0))
    return PathShortcutSolution(
        x_star=best_x,
        p=p,
        q=q,
        shortcut_length=d,
        diameter=(total + d) / 2.0,
        budget_bound=b,
        path_length=total,
    )
