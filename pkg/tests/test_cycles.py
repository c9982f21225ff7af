import math

import numpy as np
import pytest
from scipy.optimize import least_squares

from conftest import circle_gap_root, random_convex_cycle, regular_polygon
from contdiam.cycles import (
    AlternatingPair,
    ConsecutivePair,
    advance_stage,
    balanced_configuration,
    candidate_cycle_lengths,
    check_corollary_3_14,
    classify_chords,
    consecutive_to_alternating,
    optimal_pair,
    relations,
    run_stage,
    single_shortcut_no_gain_check,
    useful_alternating,
    useful_consecutive,
)
from contdiam.errors import Degenerate, NotAShortcut, NotConvex, WrongConfiguration
from contdiam.geometry import ArcPosition, CycleNetwork
from contdiam.oracle import approx_diameter, exact_diameter, grid_search_cycle_pair

REFLEX = [(0, 0), (2, 0), (2, 2), (1, 0.5), (0, 2)]


def pair(a, b, c, d, pq, rs):
    return AlternatingPair(a, b, c, d, pq, rs).normalized()


# -- candidate cycles and relations -------------------------------------------

def test_candidate_cycle_examples():
    assert tuple(candidate_cycle_lengths(pair(1, 1, 1, 1, 0.5, 0.5))) == (3, 3, 2.5, 2.5)
    cc = candidate_cycle_lengths(AlternatingPair(1, 2, 3, 4, 0, 0))
    assert (cc.bowtie, cc.hourglass) == (4, 6)
    cc = candidate_cycle_lengths(AlternatingPair(2, 0.5, 1.5, 2, 0.5, 1))
    assert tuple(cc) == (5, 4, 4, 5)


def test_normalization_rotates_labels(rng):
    for _ in range(200):
        a, b, c, d = rng.uniform(0.1, 2, 4)
        pq, rs = rng.uniform(0, 1, 2)
        raw = AlternatingPair(a, b, c, d, pq, rs)
        n = raw.normalized()
        assert n.a + n.b <= n.c + n.d + 1e-12
        assert n.b + n.c <= n.a + n.d + 1e-12
        assert n.total == pytest.approx(raw.total)
        # relabelling permutes the six cycles through the chords
        assert sorted(_all_cycles(n)) == pytest.approx(sorted(_all_cycles(raw)))
        # and the named splits are the longer split of each chord
        cc = candidate_cycle_lengths(n)
        assert cc.red_split >= n.a + n.b + n.len_pq - 1e-12
        assert cc.blue_split >= n.b + n.c + n.len_rs - 1e-12


def _all_cycles(p):
    return [p.a + p.c + p.len_pq + p.len_rs, p.b + p.d + p.len_pq + p.len_rs,
            p.a + p.b + p.len_pq, p.c + p.d + p.len_pq, p.b + p.c + p.len_rs, p.a + p.d + p.len_rs]


def test_relations_symmetric_pair_all_equal():
    rel = relations(AlternatingPair(1, 1, 1, 1, 0.5, 0.5))
    assert rel["bowtie~hourglass"].by_length == "="
    assert rel["red~blue"].by_length == "="
    assert all(r.agree for r in rel.values())


def test_relation_bowtie_red():
    p = AlternatingPair(1, 1, 1.5, 2.5, 0.4, 0.5)  # a + |rs| = 1.5 < d = 2.5
    rel = relations(p)
    assert rel["bowtie~red"] == ("<", "<")


def test_relations_agree_on_random_pairs(rng):
    for _ in range(500):
        a, b, c, d = rng.uniform(0, 2, 4)
        pq, rs = rng.uniform(0, 1.5, 2)
        for r in relations(pair(a, b, c, d, pq, rs)).values():
            assert r.agree


# -- usefulness ---------------------------------------------------------------

def test_useful_alternating_examples():
    assert useful_alternating(AlternatingPair(1, 1, 1, 1, 0.5, 0.5))
    assert not useful_alternating(AlternatingPair(1, 1, 1, 1, 1.1, 1.1))
    with pytest.raises(NotAShortcut):
        useful_alternating(AlternatingPair(1, 1, 1, 1, 2.0, 0.5))


def test_useful_alternating_confirmed_by_oracle(rng):
    checked = 0
    while checked < 8:
        cycle = random_convex_cycle(rng, 16)
        total = cycle.total_length
        t = np.sort(rng.uniform(0, total, 4))
        pos = [cycle.locate(x) for x in t]
        try:
            pr = AlternatingPair.from_positions(cycle, *pos)
            useful = useful_alternating(pr)
        except NotAShortcut:
            continue
        h = total / 1000
        d = approx_diameter(cycle, [(pr.p, pr.q), (pr.r, pr.s)], h)
        if useful:
            assert d < total / 2 - 1e-9 * total
        checked += 1


def test_useful_consecutive_examples():
    ok = ConsecutivePair(0.75, 0.5, 0.75, 2.0, 0.15, 0.15)
    assert useful_consecutive(ok)
    bad = ConsecutivePair(1.0, 0.5, 1.0, 2.0, 0.8, 0.8)
    assert not useful_consecutive(bad)
    with pytest.raises(NotAShortcut):
        useful_consecutive(ConsecutivePair(0.5, 0.5, 1.0, 2.0, 0.6, 0.2))


def test_consecutive_normalization_swaps_chords():
    raw = ConsecutivePair(0.3, 2.0, 0.4, 0.5, 0.2, 0.1)
    n = raw.normalized()
    assert (n.gap_qr, n.gap_sp) == (0.5, 2.0)
    assert (n.len_pq, n.len_rs) == (0.1, 0.2)


def test_alternating_positions_rejected_as_consecutive(unit_square):
    c = unit_square
    p, r, q, s = (c.locate(t) for t in (0.5, 1.5, 2.5, 3.5))
    with pytest.raises(WrongConfiguration):
        ConsecutivePair.from_positions(c, p, q, r, s)
    with pytest.raises(WrongConfiguration):
        AlternatingPair.from_positions(c, p, q, r, s)
    assert isinstance(classify_chords(c, (p, q), (r, s)), AlternatingPair)
    assert isinstance(classify_chords(c, (p, r), (q, s)), ConsecutivePair)


def _useful_consecutive_pairs(rng, cycle, count):
    total = cycle.total_length
    found = []
    while len(found) < count:
        g_pq, g_rs = rng.uniform(0.05, 0.3, 2) * total
        g_qr = rng.uniform(0, 0.1) * total
        tp = rng.uniform(0, total)
        arcs = np.cumsum([tp, g_pq, g_qr, g_rs])
        try:
            pr = ConsecutivePair.from_positions(cycle, *(cycle.locate(a) for a in arcs))
            if useful_consecutive(pr):
                found.append(pr)
        except NotAShortcut:
            pass
    return found


def test_useful_consecutive_confirmed_by_oracle(rng):
    cycle = random_convex_cycle(rng, 12)
    h = cycle.total_length / 1000
    for pr in _useful_consecutive_pairs(rng, cycle, 5):
        d = approx_diameter(cycle, [(pr.p, pr.q), (pr.r, pr.s)], h)
        assert d < cycle.total_length / 2 - 1e-9 * cycle.total_length


def test_consecutive_to_alternating_on_square(rng, unit_square):
    for pr in _useful_consecutive_pairs(rng, unit_square, 10):
        alt = consecutive_to_alternating(unit_square, pr)
        assert useful_alternating(alt)


def test_consecutive_to_alternating_touching_case(unit_square):
    c = unit_square
    p, q, s = c.locate(0.3), c.locate(1.6), c.locate(3.2)
    pr = ConsecutivePair.from_positions(c, p, q, q, s)
    alt = consecutive_to_alternating(c, pr)
    chords = {frozenset((alt.p, alt.q)), frozenset((alt.r, alt.s))}
    assert chords == {frozenset((p, q)), frozenset((q, s))}


def test_consecutive_to_alternating_rejects_alternating(unit_square):
    with pytest.raises(WrongConfiguration):
        consecutive_to_alternating(unit_square, AlternatingPair(1, 1, 1, 1, 0.5, 0.5))


def test_consecutive_to_alternating_oracle_non_increasing(rng):
    for _ in range(10):
        cycle = random_convex_cycle(rng, 12)
        h = cycle.total_length / 800
        for pr in _useful_consecutive_pairs(rng, cycle, 5):
            alt = consecutive_to_alternating(cycle, pr)
            before = approx_diameter(cycle, [(pr.p, pr.q), (pr.r, pr.s)], h)
            after = approx_diameter(cycle, [(alt.p, alt.q), (alt.r, alt.s)], h)
            assert after <= before + 2 * h


# -- balanced configurations --------------------------------------------------

def test_balanced_requires_convex():
    with pytest.raises(NotConvex):
        balanced_configuration(CycleNetwork(REFLEX), ArcPosition(0, 0.5))
    with pytest.raises(Degenerate):
        balanced_configuration(CycleNetwork([(0, 0), (1, 0)]), ArcPosition(0, 0.5))


def _grid_balance_oracle(cycle, tp, m=120):
    """Coarse grid over (r, q, s) minimizing the worst residual, then least squares."""
    total = cycle.total_length
    g = tp + np.arange(1, m) * total / m
    i, j, k = np.meshgrid(np.arange(m - 1), np.arange(m - 1), np.arange(m - 1), indexing="ij")
    keep = (i <= j) & (j <= k)
    tr, tq, ts = g[i[keep]], g[j[keep]], g[k[keep]]
    P = np.array(cycle.xy_at_arc(tp))
    R, Q, S = cycle.xy_at_arcs(tr), cycle.xy_at_arcs(tq), cycle.xy_at_arcs(ts)
    pq = np.hypot(*(Q - P).T)
    rs = np.hypot(*(S - R).T)
    a, b, c, d = tr - tp, tq - tr, ts - tq, tp + total - ts
    res = np.maximum.reduce([abs(a + c - b - d), abs(rs - (d - a)), abs(pq - (d - c))])
    best = int(np.argmin(res))

    def f(x):
        r_, q_, s_ = x
        xy = cycle.xy_at_arcs(np.array([r_, q_, s_]))
        lpq = math.hypot(*(xy[1] - P))
        lrs = math.hypot(*(xy[2] - xy[0]))
        a_, b_, c_, d_ = r_ - tp, q_ - r_, s_ - q_, tp + total - s_
        return [a_ + c_ - b_ - d_, lrs - (d_ - a_), lpq - (d_ - c_)]

    sol = least_squares(f, [tr[best], tq[best], ts[best]], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return sol.x


def test_balanced_square_matches_independent_oracle(unit_square):
    p = ArcPosition(0, 0.5)
    cfg = balanced_configuration(unit_square, p)
    total = unit_square.total_length
    assert cfg.max_residual <= 1e-7 * total
    ref = _grid_balance_oracle(unit_square, 0.5)
    assert np.array(cfg.arcs[1:]) == pytest.approx(ref, abs=1e-6 * total)


def test_balanced_random_matches_independent_oracle(rng):
    for _ in range(3):
        cycle = random_convex_cycle(rng, 12, n_points=40)
        tp = rng.uniform(0, cycle.total_length)
        cfg = balanced_configuration(cycle, cycle.locate(tp))
        ref = _grid_balance_oracle(cycle, cycle.arc_length(cycle.locate(tp)))
        assert np.array(cfg.arcs[1:]) == pytest.approx(ref, abs=1e-6 * cycle.total_length)


def test_balanced_circle_prediction():
    c = regular_polygon(64)
    cfg = balanced_configuration(c, ArcPosition(0, 0.0))
    assert cfg.diameter == pytest.approx(math.pi - circle_gap_root(), abs=1e-2)


def test_balanced_invariants(rng):
    for _ in range(10):
        cycle = random_convex_cycle(rng, 20)
        total = cycle.total_length
        for t in rng.uniform(0, total, 5):
            cfg = balanced_configuration(cycle, cycle.locate(t))
            pr = cfg.pair
            assert cfg.max_residual <= 1e-7 * total
            assert pr.a + pr.b <= total / 2 + 1e-7 * total
            assert pr.b + pr.c <= total / 2 + 1e-7 * total
            assert cfg.diameter == pytest.approx(total / 4 + (pr.len_pq + pr.len_rs) / 2, abs=1e-7 * total)
            # the four cycles agree
            cc = candidate_cycle_lengths(pr)
            assert max(cc) - min(cc) <= 4e-7 * total
            # a positive middle gap is the same as usefulness
            if pr.b > 1e-7 * total:
                assert useful_alternating(pr)
            assert (pr.len_pq + pr.len_rs) == pytest.approx(2 * pr.d - total / 2, abs=1e-6 * total)


def test_balanced_unique_under_brackets(rng):
    for _ in range(10):
        cycle = random_convex_cycle(rng, 20)
        total = cycle.total_length
        p = cycle.locate(rng.uniform(0, total))
        c1 = balanced_configuration(cycle, p)
        c2 = balanced_configuration(cycle, p, outer_bracket=(0.25 * total, 0.5 * (c1.diameter + 0.5 * total)))
        assert np.array(c1.arcs) == pytest.approx(np.array(c2.arcs), abs=1e-6 * total)


def test_trivial_balanced_configuration_is_stationary():
    # two consecutive edges cover half the perimeter: the only balanced triple
    # for p on the long edge puts q = r at the shared vertex, chords on the edges
    tri = CycleNetwork([(0, 0), (3, 0), (0, 1)])
    total = tri.total_length
    c0 = balanced_configuration(tri, tri.locate(0.5))
    c1 = balanced_configuration(tri, tri.locate(1.0))
    for c in (c0, c1):
        assert c.pair.b == pytest.approx(0, abs=1e-9 * total)
        assert c.diameter == pytest.approx(total / 2)
    assert c0.arcs[1:3] == pytest.approx(c1.arcs[1:3])
    # and the sweep still finds a real improvement
    assert optimal_pair(tri).improvement > 0


def test_even_red_split_not_above_bowtie_or_hourglass(rng):
    hits = 0
    while hits < 50:
        cycle = random_convex_cycle(rng, 20)
        total = cycle.total_length
        tp = rng.uniform(0, total)
        tq = tp + total / 2
        tr = rng.uniform(tp, tq)
        ts = rng.uniform(tq, tp + total)
        try:
            pr = AlternatingPair.from_positions(cycle, *(cycle.locate(t) for t in (tp, tr, tq, ts)), normalize=False)
            if not useful_alternating(pr):
                continue
        except NotAShortcut:
            continue
        cc = candidate_cycle_lengths(pr)
        assert cc.red_split <= max(cc.bowtie, cc.hourglass) + 1e-9 * total
        hits += 1


# -- stages and the sweep -----------------------------------------------------

def test_stage_exit_is_balanced_and_monotone(rng):
    for _ in range(5):
        cycle = random_convex_cycle(rng, 16, n_points=40)
        total = cycle.total_length
        cfg = balanced_configuration(cycle, cycle.locate(rng.uniform(0, total)))
        stage = run_stage(cycle, cfg)
        solver_exit = balanced_configuration(cycle, cycle.locate(stage.exit_arcs[0] % total))
        assert max(map(abs, stage.best.residuals)) <= 1e-7 * total
        assert solver_exit.max_residual <= 1e-7 * total
        assert stage.t_end >= stage.t_start
        prev = None
        for t in np.linspace(stage.t_start, stage.t_end, 16):
            arcs = np.array(balanced_configuration(cycle, cycle.locate(t % total)).arcs)
            if prev is not None and stage.t_end - stage.t_start > 1e-6 * total:
                delta = np.mod(arcs - prev + total / 2, total) - total / 2
                assert np.all(delta[1:] > 0)
            prev = arcs


def test_advance_stage_contract(unit_square):
    cfg = balanced_configuration(unit_square, ArcPosition(0, 0.25))
    edges = [unit_square.locate(t).edge for t in cfg.arcs]
    best, nxt = advance_stage(unit_square, cfg, edges)
    assert best.max_residual <= 1e-7 * unit_square.total_length
    assert len(nxt) == 4 and nxt != tuple(edges)
    with pytest.raises(WrongConfiguration):
        advance_stage(unit_square, cfg, [3, 3, 3, 3])


def test_square_sweep_matches_grid_oracle(unit_square):
    sol = optimal_pair(unit_square)
    total = unit_square.total_length
    stage_min = min(s.best.diameter for s in sol.stages)
    grid = grid_search_cycle_pair(unit_square, 40, total / 400)
    assert stage_min == pytest.approx(sol.diameter)
    assert abs(stage_min - grid.diameter) <= 1e-3 * total
    assert sol.diameter == pytest.approx(2 * math.sqrt(2) - 1, abs=1e-9)


def test_optimal_pair_is_realized_exactly(rng):
    shapes = [CycleNetwork([(0, 0), (3, 0), (0, 1)]), CycleNetwork([(0, 0), (10, 0), (10, 0.1), (0, 0.1)])]
    shapes += [random_convex_cycle(rng, 24) for _ in range(10)]
    for cycle in shapes:
        sol = optimal_pair(cycle)
        pr = sol.pair
        total = cycle.total_length
        assert sol.improvement > 0
        assert sol.diameter < total / 2
        assert pr.len_pq + pr.len_rs < min(pr.a + pr.c, pr.b + pr.d)
        assert exact_diameter(cycle, [(pr.p, pr.q), (pr.r, pr.s)]) == pytest.approx(sol.diameter, abs=1e-9 * total)
        cc = candidate_cycle_lengths(pr)
        assert cc.bowtie == pytest.approx(cc.hourglass, abs=1e-6 * total)
        assert cc.red_split == pytest.approx(cc.bowtie, abs=1e-6 * total)
        assert cc.blue_split == pytest.approx(cc.bowtie, abs=1e-6 * total)
        assert sol.stage_count <= 4 * cycle.n_edges + 8


def test_optimal_pair_errors():
    with pytest.raises(NotConvex):
        optimal_pair(CycleNetwork(REFLEX))
    with pytest.raises(Degenerate):
        optimal_pair(CycleNetwork([(0, 0), (1, 0)]))
    with pytest.raises(Degenerate):
        optimal_pair(CycleNetwork([(0, 0), (0.5, 0), (1, 0)]))


def test_optimal_pair_circle():
    sol = optimal_pair(regular_polygon(64))
    assert sol.diameter == pytest.approx(math.pi - circle_gap_root(), abs=1e-2)


# -- residual checks ----------------------------------------------------------

def test_optimality_residuals_at_optimum_and_off(unit_square):
    sol = optimal_pair(unit_square)
    total = unit_square.total_length
    res = check_corollary_3_14(sol.config)
    assert res.shape == (7,) and res.max() <= 1e-6 * total
    assert sol.pair.b == pytest.approx(total / 2 - sol.diameter, abs=1e-9)
    off = check_corollary_3_14(AlternatingPair(1, 0.5, 1.5, 1, 0.3, 0.2))
    assert off.max() > 0.1


def test_single_shortcut_examples(unit_square):
    assert single_shortcut_no_gain_check(unit_square, ArcPosition(0, 0), ArcPosition(2, 0), h=0.01)
    with pytest.raises(NotAShortcut):
        single_shortcut_no_gain_check(unit_square, ArcPosition(0, 0.1), ArcPosition(0, 0.9))


def test_single_shortcut_random(rng):
    for _ in range(8):
        cycle = random_convex_cycle(rng, 16)
        while True:
            t = rng.uniform(0, cycle.total_length, 2)
            p, q = cycle.locate(t[0]), cycle.locate(t[1])
            if p.edge != q.edge:
                break
        assert single_shortcut_no_gain_check(cycle, p, q, h=cycle.total_length / 800)
