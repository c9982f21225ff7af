"""Brute-force checks for the solvers.

Two independent ways to get the diameter of a network with chords:

* :func:`approx_diameter` samples every edge (chords included) at spacing
  at most ``h`` and runs all-pairs Dijkstra; the answer lies in
  ``[true - h, true]`` (reported conservatively as ``2h``).
* :func:`exact_diameter` reduces the network to its key vertices and uses the
  closed form for the farthest pair of points on two edges of a metric graph.

The grid searches enumerate shortcut placements and never call the
path/cycle solvers.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import BudgetExceeded
from .geometry import ArcPosition, CycleNetwork, Network, PathNetwork

Chord = tuple[ArcPosition, ArcPosition]

MAX_CYCLE_GRID = 60
_SOURCE_CHUNK = 256


@dataclass
class DiscretizedNetwork:
    spacing: float
    coords: np.ndarray  # (N, 2)
    tags: list  # ArcPosition for network nodes, ("chord", k, frac) for chord interiors
    edges: np.ndarray  # (E, 2) int
    weights: np.ndarray  # (E,)
    key_nodes: list[int] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.coords)


def _key_arcs(net: Network, chords: Sequence[Chord]) -> list[float]:
    arcs = set(net.cumulative_length.tolist())
    if net.closed:
        arcs.discard(net.total_length)
    for u, v in chords:
        arcs.add(net.arc_length(u) % net.total_length if net.closed else net.arc_length(u))
        arcs.add(net.arc_length(v) % net.total_length if net.closed else net.arc_length(v))
    merge = 1e-12 * net.total_length
    out: list[float] = []
    for s in sorted(arcs):
        if not out or s - out[-1] > merge:
            out.append(s)
    if net.closed and len(out) > 1 and net.total_length - out[-1] <= merge:
        out.pop()
    return out


def discretize(net: Network, chords: Sequence[Chord] = (), h: float = 0.01,
               sample_chords: bool = True) -> DiscretizedNetwork:
    """Sample the network (and chords) so consecutive nodes are at most ``h`` apart."""
    if h <= 0:
        raise ValueError("spacing h must be positive")
    total = net.total_length
    keys = _key_arcs(net, chords)
    spans = list(zip(keys, keys[1:]))
    if net.closed:
        spans.append((keys[-1], keys[0] + total))

    arcs: list[float] = []
    key_index: dict[float, int] = {}
    for lo, hi in spans:
        key_index[lo % total if net.closed else lo] = len(arcs)
        k = max(1, math.ceil((hi - lo) / h - 1e-12))
        arcs.extend(lo + (hi - lo) * np.arange(k) / k)
    if not net.closed:
        key_index[keys[-1]] = len(arcs)
        arcs.append(keys[-1])
    arcs_arr = np.asarray(arcs)
    coords = [net.xy_at_arcs(arcs_arr)]
    tags: list = [net.locate(float(s) % total if net.closed else float(s)) for s in arcs_arr]

    n_net = len(arcs_arr)
    src = list(range(n_net - 1))
    dst = list(range(1, n_net))
    wts = list(np.diff(arcs_arr))
    if net.closed:
        src.append(n_net - 1)
        dst.append(0)
        wts.append(arcs_arr[0] + total - arcs_arr[-1])

    def node_of(pos: ArcPosition) -> int:
        s = net.arc_length(pos)
        s = s % total if net.closed else s
        best = min(key_index, key=lambda k: min(abs(k - s), total - abs(k - s)) if net.closed else abs(k - s))
        return key_index[best]

    n_next = n_net
    for ci, (u, v) in enumerate(chords):
        iu, iv = node_of(u), node_of(v)
        pu, pv = coords[0][iu], coords[0][iv]
        length = float(np.hypot(*(pv - pu)))
        k = max(1, math.ceil(length / h - 1e-12)) if sample_chords else 1
        chain = [iu]
        if k > 1:
            fr = np.arange(1, k) / k
            coords.append(pu + fr[:, None] * (pv - pu))
            tags.extend(("chord", ci, float(f)) for f in fr)
            chain.extend(range(n_next, n_next + k - 1))
            n_next += k - 1
        chain.append(iv)
        for x, y in zip(chain, chain[1:]):
            src.append(x)
            dst.append(y)
            wts.append(length / k)

    return DiscretizedNetwork(
        spacing=h,
        coords=np.vstack(coords),
        tags=tags,
        edges=np.column_stack([src, dst]).astype(int),
        weights=np.asarray(wts, dtype=float),
        key_nodes=sorted(set(key_index.values())),
    )


def approx_diameter(net: Network, chords: Sequence[Chord] = (), h: float = 0.01) -> float:
    """Largest pairwise network distance over the sampled nodes.

    Never exceeds the true continuous diameter and is within ``h`` of it.
    """
    g = discretize(net, chords, h)
    n = g.n_nodes
    # zero-weight edges (coincident nodes) must survive the sparse format
    w = np.maximum(g.weights, 1e-300)
    adj = coo_matrix((w, (g.edges[:, 0], g.edges[:, 1])), shape=(n, n)).tocsr()
    best = 0.0
    for start in range(0, n, _SOURCE_CHUNK):
        idx = np.arange(start, min(start + _SOURCE_CHUNK, n))
        dist = shortest_path(adj, method="D", directed=False, indices=idx)
        best = max(best, float(dist.max()))
    return best


def metric_graph_diameter(n_nodes: int, edges: Sequence[tuple[int, int, float]]) -> float:
    """Exact continuous diameter of a connected metric graph.

    For distinct edges ``e = (x1, x2)`` and ``f = (y1, y2)`` the farthest pair
    of points is ``min(le + lf + D11 + D22, le + lf + D12 + D21) / 2``; on a
    single edge it is ``min(l, (l + D(x1, x2)) / 2)``.
    """
    D = np.full((n_nodes, n_nodes), np.inf)
    np.fill_diagonal(D, 0.0)
    for x, y, l in edges:
        if l < D[x, y]:
            D[x, y] = D[y, x] = l
    for k in range(n_nodes):
        D = np.minimum(D, D[:, k, None] + D[None, k, :])
    if not np.all(np.isfinite(D)):
        raise ValueError("metric graph is disconnected")
    E = np.asarray(edges, dtype=float)
    x1, x2, le = E[:, 0].astype(int), E[:, 1].astype(int), E[:, 2]
    same = np.minimum(le, 0.5 * (le + D[x1, x2]))
    lsum = le[:, None] + le[None, :]
    pair = 0.5 * np.minimum(
        lsum + D[x1[:, None], x1[None, :]] + D[x2[:, None], x2[None, :]],
        lsum + D[x1[:, None], x2[None, :]] + D[x2[:, None], x1[None, :]],
    )
    np.fill_diagonal(pair, 0.0)
    return float(max(same.max(), pair.max()))


def exact_diameter(net: Network, chords: Sequence[Chord] = ()) -> float:
    """Exact continuous diameter of ``net`` plus straight chords."""
    keys = _key_arcs(net, chords)
    total = net.total_length
    edges: list[tuple[int, int, float]] = []
    for i, (lo, hi) in enumerate(zip(keys, keys[1:])):
        edges.append((i, i + 1, hi - lo))
    if net.closed:
        edges.append((len(keys) - 1, 0, keys[0] + total - keys[-1]))

    def key_of(pos: ArcPosition) -> int:
        s = net.arc_length(pos)
        if net.closed:
            s %= total
            return int(np.argmin([min(abs(k - s), total - abs(k - s)) for k in keys]))
        return int(np.argmin([abs(k - s) for k in keys]))

    for u, v in chords:
        pu, pv = net.point_at(u), net.point_at(v)
        edges.append((key_of(u), key_of(v), math.hypot(pu.x - pv.x, pu.y - pv.y)))
    return metric_graph_diameter(len(keys), edges)


def two_chord_cycle_diameters(total: float, arcs: np.ndarray, len_pq: np.ndarray,
                              len_rs: np.ndarray) -> np.ndarray:
    """Exact diameters of ``C + pq + rs`` for a batch of alternating placements.

    ``arcs`` has columns ``a, b, c, d`` (ccw arcs p->r->q->s->p).  Vectorized
    form of :func:`metric_graph_diameter` for the six-edge skeleton.
    """
    arcs = np.asarray(arcs, dtype=float)
    m = arcs.shape[0]
    # nodes: 0=p, 1=r, 2=q, 3=s
    ex = np.array([0, 1, 2, 3, 0, 1])
    ey = np.array([1, 2, 3, 0, 2, 3])
    le = np.column_stack([arcs, len_pq, len_rs])  # (m, 6)
    D = np.full((m, 4, 4), np.inf)
    D[:, range(4), range(4)] = 0.0
    for j in range(6):
        x, y = ex[j], ey[j]
        v = np.minimum(D[:, x, y], le[:, j])
        D[:, x, y] = v
        D[:, y, x] = v
    for k in range(4):
        D = np.minimum(D, D[:, :, k, None] + D[:, None, k, :])
    same = np.minimum(le, 0.5 * (le + D[:, ex, ey])).max(axis=1)
    best = same
    for i, j in itertools.combinations(range(6), 2):
        s = le[:, i] + le[:, j]
        v = 0.5 * np.minimum(
            s + D[:, ex[i], ex[j]] + D[:, ey[i], ey[j]],
            s + D[:, ex[i], ey[j]] + D[:, ey[i], ex[j]],
        )
        best = np.maximum(best, v)
    return best


# --------------------------------------------------------------------------
# grid searches
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GridPathResult:
    p: ArcPosition
    q: ArcPosition
    diameter: float
    error_bound: float
    evaluated: int


def _path_candidate_arrays(path: PathNetwork, tp: np.ndarray, tq: np.ndarray) -> np.ndarray:
    total = path.total_length
    chord = np.hypot(*(path.xy_at_arcs(tp) - path.xy_at_arcs(tq)).T)
    geo = tq - tp
    ok = chord < geo - 1e-9 * total
    slack = 0.5 * (geo - chord)
    u = tp + chord + (total - tq)
    s = tp + chord + slack
    e = (total - tq) + chord + slack
    return np.where(ok, np.maximum(u, np.maximum(s, e)), total)


def grid_search_path(path: PathNetwork, m: int) -> GridPathResult:
    """Exhaustive search over all pairs of ``m`` equally spaced arc positions."""
    if m < 2:
        raise ValueError("grid needs m >= 2")
    total = path.total_length
    grid = np.linspace(0.0, total, m)
    i, j = np.triu_indices(m, k=1)
    diam = _path_candidate_arrays(path, grid[i], grid[j])
    k = int(np.argmin(diam))
    return GridPathResult(
        p=path.locate(float(grid[i[k]])),
        q=path.locate(float(grid[j[k]])),
        diameter=float(diam[k]),
        error_bound=2.0 * total / (m - 1),
        evaluated=len(diam),
    )


def grid_search_path_balanced(path: PathNetwork, m: int) -> GridPathResult:
    """Search the one-parameter family ``d(s,p) = d(e,q) = x`` on ``m + 1`` grid steps."""
    if m < 1:
        raise ValueError("grid needs m >= 1")
    total = path.total_length
    xs = np.linspace(0.0, total / 2.0, m + 1)
    diam = _path_candidate_arrays(path, xs, total - xs)
    k = int(np.argmin(diam))
    return GridPathResult(
        p=path.locate(float(xs[k])),
        q=path.locate(float(total - xs[k])),
        diameter=float(diam[k]),
        # each endpoint moves at most half a step of width |P|/(2m)
        error_bound=2.0 * total / m,
        evaluated=len(diam),
    )


@dataclass(frozen=True)
class GridPairResult:
    p: ArcPosition
    r: ArcPosition
    q: ArcPosition
    s: ArcPosition
    grid_diameter: float
    diameter: float  # after local refinement; an achievable value (upper bound on optimum)
    discretized_diameter: float  # approx_diameter of the returned placement at spacing h
    grid_error_bound: float  # optimum >= grid_diameter - grid_error_bound
    spacing: float
    evaluated: int

    @property
    def lower_bound(self) -> float:
        return self.grid_diameter - self.grid_error_bound


def _placement_diameters(cycle: CycleNetwork, T: np.ndarray) -> np.ndarray:
    """Exact diameters for unwrapped arc rows ``(tp, tr, tq, ts)``."""
    total = cycle.total_length
    arcs = np.column_stack([T[:, 1] - T[:, 0], T[:, 2] - T[:, 1], T[:, 3] - T[:, 2],
                            total - (T[:, 3] - T[:, 0])])
    xy = cycle.xy_at_arcs(T)
    lpq = np.hypot(*(xy[:, 0] - xy[:, 2]).T)
    lrs = np.hypot(*(xy[:, 1] - xy[:, 3]).T)
    return two_chord_cycle_diameters(total, arcs, lpq, lrs)


def _refine_pair(cycle: CycleNetwork, start: np.ndarray, step: float, tol: float) -> tuple[np.ndarray, float]:
    """Pattern search over all 80 sign combinations of the four arc moves."""
    total = cycle.total_length
    dirs = np.array([d for d in itertools.product((-1, 0, 1), repeat=4) if any(d)], dtype=float)
    x = start.copy()
    fx = float(_placement_diameters(cycle, x[None, :])[0])
    while step > tol:
        trial = x[None, :] + step * dirs
        trial[:, 1:] = np.maximum(trial[:, 1:], trial[:, [0]])
        trial = np.sort(trial, axis=1)
        trial[:, 3] = np.minimum(trial[:, 3], trial[:, 0] + total)
        f = _placement_diameters(cycle, trial)
        k = int(np.argmin(f))
        if f[k] < fx - 1e-15 * total:
            x, fx = trial[k], float(f[k])
        else:
            step *= 0.5
    return x, fx


def grid_search_cycle_pair(cycle: CycleNetwork, m: int, h: float, refine: bool = True,
                           n_starts: int = 4) -> GridPairResult:
    """Exhaustive search over alternating placements on ``m`` grid positions.

    Every 4-multiset of grid positions ``p <= r <= q <= s`` is scored with
    the exact skeleton diameter.  The best placements are then polished by a
    pattern search; the polished placement is re-measured by
    :func:`approx_diameter` at spacing ``h``.
    """
    if m > MAX_CYCLE_GRID:
        raise BudgetExceeded(f"grid m={m} exceeds the limit {MAX_CYCLE_GRID} (O(m^4) placements)")
    if m < 4:
        raise ValueError("grid needs m >= 4")
    total = cycle.total_length
    grid = np.arange(m) * (total / m)
    combos = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations_with_replacement(range(m), 4)),
        dtype=np.int32,
    ).reshape(-1, 4)
    diam = np.empty(len(combos))
    for lo in range(0, len(combos), 50_000):
        T = grid[combos[lo:lo + 50_000]]
        diam[lo:lo + 50_000] = _placement_diameters(cycle, T)
    order = np.argsort(diam, kind="stable")
    best_T = grid[combos[order[0]]]
    grid_best = float(diam[order[0]])

    best_val = grid_best
    if refine:
        for k in order[:n_starts]:
            T, val = _refine_pair(cycle, grid[combos[k]], total / m, 1e-10 * total)
            if val < best_val - 1e-15 * total:
                best_T, best_val = T, val

    pos = [cycle.locate(float(t)) for t in best_T]
    chords = [(pos[0], pos[2]), (pos[1], pos[3])]
    return GridPairResult(
        p=pos[0], r=pos[1], q=pos[2], s=pos[3],
        grid_diameter=grid_best,
        diameter=best_val,
        discretized_diameter=approx_diameter(cycle, chords, h),
        # each endpoint snaps by <= |C|/(2m) and the diameter is 2-Lipschitz per endpoint
        grid_error_bound=4.0 * total / m,
        spacing=h,
        evaluated=len(combos),
    )
