"""Polygonal paths and cycles in the plane, parameterized by arc length.

A point on a network is an :class:`ArcPosition`: the index of its edge and
the relative position ``lam`` along that edge.  Paths measure distance along
the polyline; cycles measure it both ways round and take the shorter one.

Cycles are stored counter-clockwise, so ``d_ccw`` always means the same
direction regardless of how the input was given.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

# Relative geometry tolerance; multiplied by the network's total length.
REL_TOL = 1e-9


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True, order=True)
class ArcPosition:
    """Point on a network: edge index and relative parameter along that edge."""

    edge: int
    lam: float

    def __post_init__(self):
        if self.edge < 0:
            raise ValueError(f"edge index must be >= 0, got {self.edge}")
        if not (0.0 <= self.lam <= 1.0):
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")


class _Polyline:
    closed = False

    def __init__(self, vertices: Sequence[Sequence[float]]):
        pts = np.asarray(vertices, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("vertices must be a sequence of (x, y) pairs")
        if not np.all(np.isfinite(pts)):
            raise ValueError("vertex coordinates must be finite")
        pts = self._prepare(pts)
        if len(pts) < 2:
            raise ValueError("a network needs at least two vertices")
        ends = np.roll(pts, -1, axis=0) if self.closed else pts[1:]
        starts = pts if self.closed else pts[:-1]
        seg = ends - starts
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        bad = np.flatnonzero(lengths <= 0.0)
        if bad.size:
            raise ValueError(f"edge {int(bad[0])} has zero length (repeated vertex)")

        pts.setflags(write=False)
        lengths.setflags(write=False)
        self.vertices = pts
        self.edge_lengths = lengths
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        cum.setflags(write=False)
        self.cumulative_length = cum
        self.total_length = float(cum[-1])
        self.n_edges = len(lengths)
        self._cum = cum.tolist()
        self._starts = starts.tolist()
        self._dirs = (seg / lengths[:, None]).tolist()
        self._lengths = lengths.tolist()

    def _prepare(self, pts: np.ndarray) -> np.ndarray:
        return pts.copy()

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def tol(self) -> float:
        return REL_TOL * self.total_length

    def _check(self, pos: ArcPosition) -> None:
        if pos.edge >= self.n_edges:
            raise ValueError(f"edge index {pos.edge} out of range (network has {self.n_edges} edges)")

    def arc_length(self, pos: ArcPosition) -> float:
        """Distance from the first vertex along the network to ``pos``."""
        self._check(pos)
        return self._cum[pos.edge] + pos.lam * self._lengths[pos.edge]

    def point_at(self, pos: ArcPosition) -> Point:
        self._check(pos)
        (x0, y0), (ux, uy) = self._starts[pos.edge], self._dirs[pos.edge]
        t = pos.lam * self._lengths[pos.edge]
        return Point(x0 + t * ux, y0 + t * uy)

    def _edge_of(self, s: float) -> int:
        i = bisect.bisect_right(self._cum, s) - 1
        return min(max(i, 0), self.n_edges - 1)

    def xy_at_arc(self, s: float) -> tuple[float, float]:
        """Coordinates of the point at arc length ``s`` (fast path, no ArcPosition)."""
        s = self._normalize_arc(s)
        i = self._edge_of(s)
        (x0, y0), (ux, uy) = self._starts[i], self._dirs[i]
        t = s - self._cum[i]
        return x0 + t * ux, y0 + t * uy

    def xy_at_arcs(self, s: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`xy_at_arc`; returns shape ``s.shape + (2,)``."""
        s = np.asarray(s, dtype=float)
        if self.closed:
            s = np.mod(s, self.total_length)
        else:
            s = np.clip(s, 0.0, self.total_length)
        i = np.clip(np.searchsorted(self.cumulative_length, s, side="right") - 1, 0, self.n_edges - 1)
        starts = np.asarray(self._starts)[i]
        dirs = np.asarray(self._dirs)[i]
        t = (s - self.cumulative_length[i])[..., None]
        return starts + t * dirs

    def edge_frame(self, i: int) -> tuple[float, float, float, float, float, float]:
        """(start arc, length, x0, y0, ux, uy) of edge ``i``."""
        (x0, y0), (ux, uy) = self._starts[i], self._dirs[i]
        return self._cum[i], self._lengths[i], x0, y0, ux, uy

    def locate(self, s: float) -> ArcPosition:
        """Inverse of :meth:`arc_length`; lam is canonicalized into [0, 1)."""
        s = self._normalize_arc(s)
        if not self.closed and s >= self.total_length:
            return ArcPosition(self.n_edges - 1, 1.0)
        i = self._edge_of(s)
        lam = (s - self._cum[i]) / self._lengths[i]
        if lam >= 1.0:
            # only reachable through rounding right at a vertex
            if i + 1 < self.n_edges:
                return ArcPosition(i + 1, 0.0)
            if self.closed:
                return ArcPosition(0, 0.0)
            return ArcPosition(i, 1.0)
        return ArcPosition(i, max(lam, 0.0))

    def canonical(self, pos: ArcPosition) -> ArcPosition:
        return self.locate(self.arc_length(pos))

    def _normalize_arc(self, s: float) -> float:
        raise NotImplementedError


class PathNetwork(_Polyline):
    """Polygonal path from ``s`` (first vertex) to ``e`` (last vertex)."""

    closed = False

    def _normalize_arc(self, s: float) -> float:
        if s < -self.tol or s > self.total_length + self.tol:
            raise ValueError(f"arc length {s} outside [0, {self.total_length}]")
        return min(max(s, 0.0), self.total_length)

    @property
    def start(self) -> ArcPosition:
        return ArcPosition(0, 0.0)

    @property
    def end(self) -> ArcPosition:
        return ArcPosition(self.n_edges - 1, 1.0)

    def __repr__(self):
        return f"PathNetwork(n={self.n_vertices}, length={self.total_length:.6g})"


class CycleNetwork(_Polyline):
    """Closed polygon; vertices are implicitly joined last-to-first.

    A repeated closing vertex is dropped and clockwise input is reversed
    (keeping the first vertex first); ``input_ccw`` records which happened.
    """

    closed = True

    def _prepare(self, pts: np.ndarray) -> np.ndarray:
        if len(pts) >= 2 and np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        area = _signed_area(pts)
        self.input_ccw = area >= 0.0
        if area < 0.0:
            pts = np.concatenate([pts[:1], pts[:0:-1]])
        return pts.copy()

    def _normalize_arc(self, s: float) -> float:
        s = math.fmod(s, self.total_length)
        if s < 0.0:
            s += self.total_length
        if s >= self.total_length:
            s = 0.0
        return s

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    def d_ccw(self, a: float, b: float) -> float:
        """Counter-clockwise arc distance from arc length ``a`` to ``b``."""
        d = math.fmod(b - a, self.total_length)
        if d < 0.0:
            d += self.total_length
        return d

    def __repr__(self):
        return f"CycleNetwork(n={self.n_vertices}, length={self.total_length:.6g})"


Network = Union[PathNetwork, CycleNetwork]


def _signed_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def point_at(net: Network, pos: ArcPosition) -> Point:
    return net.point_at(pos)


def locate(net: Network, arc_length: float) -> ArcPosition:
    return net.locate(arc_length)


def euclidean(p: Sequence[float], q: Sequence[float]) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def path_distance(path: PathNetwork, a: ArcPosition, b: ArcPosition) -> float:
    return abs(path.arc_length(a) - path.arc_length(b))


def cycle_distances(cycle: CycleNetwork, a: ArcPosition, b: ArcPosition) -> tuple[float, float, float]:
    """Return ``(d_ccw, d_cw, d)`` from ``a`` to ``b`` along the cycle."""
    ccw = cycle.d_ccw(cycle.arc_length(a), cycle.arc_length(b))
    cw = cycle.total_length - ccw
    return ccw, cw, min(ccw, cw)


def plain_diameter(net: Network) -> float:
    """Continuous diameter without shortcuts: |P| for a path, |C|/2 for a cycle."""
    if isinstance(net, CycleNetwork):
        return net.total_length / 2.0
    return net.total_length


def is_convex(cycle: CycleNetwork) -> bool:
    """True for a simple convex polygon with positive area.

    Collinear vertices are allowed.  A polygon whose turns are all left
    but which winds around more than once (a star) is rejected through the
    total turning angle.
    """
    pts = cycle.vertices
    if len(pts) < 3 or cycle.area <= REL_TOL * cycle.total_length ** 2:
        return False
    e_in = pts - np.roll(pts, 1, axis=0)
    e_out = np.roll(pts, -1, axis=0) - pts
    cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    dot = np.einsum("ij,ij->i", e_in, e_out)
    norms = np.hypot(e_in[:, 0], e_in[:, 1]) * np.hypot(e_out[:, 0], e_out[:, 1])
    if np.any(cross / norms < -REL_TOL):
        return False
    turning = float(np.sum(np.arctan2(cross, dot)))
    return abs(turning - 2.0 * math.pi) < 1e-6


def is_degenerate(cycle: CycleNetwork) -> bool:
    """True iff the cycle traces one segment forth and back."""
    pts = cycle.vertices
    rel = pts - pts[0]
    far = int(np.argmax(np.hypot(rel[:, 0], rel[:, 1])))
    span = math.hypot(*rel[far])
    if span == 0.0:
        return False
    u = rel[far] / span
    off_line = np.abs(rel[:, 0] * u[1] - rel[:, 1] * u[0])
    if np.any(off_line > REL_TOL * cycle.total_length):
        return False
    proj = rel @ u
    extent = float(proj.max() - proj.min())
    return abs(cycle.total_length - 2.0 * extent) <= REL_TOL * cycle.total_length
