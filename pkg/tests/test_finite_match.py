import itertools
import math

import numpy as np
import pytest

from matchlab.costs import CostSpec, arrangement, compare, pair_legal, score, EQUAL
from matchlab.errors import DegenerateDistances, InvalidParameter, TooLarge
from matchlab.finite_match import Matching, detect_tie, oracle_min, solve_min, solve_stable, tile_match
from matchlab.points import fixed_count, make_config, sample_poisson

from conftest import random_small_config

KINDS = [-2, -1, 0, 0.5, 1, 1.5, 2, 3, "-inf", "+inf", "1-", "1+"]


def test_examples_two_colour():
    cfg = make_config([0.0, 1.0], [2.0, 3.0])
    m = solve_min(CostSpec.finite(2), cfg)
    assert set(m.edges) == {(0, 0), (1, 1)}
    assert score(CostSpec.finite(2), cfg, m).cost == 8
    m = solve_min(CostSpec.finite(0.5), cfg)
    assert set(m.edges) == {(0, 1), (1, 0)}
    assert math.isclose(score(CostSpec.finite(0.5), cfg, m).cost, 1 + math.sqrt(3))
    assert not m.tie


def test_example_one_colour():
    cfg = make_config([0.0, 1.0, 5.0], mode="one-colour")
    m = solve_min(CostSpec.finite(1), cfg)
    assert m.edges == ((0, 1),) and m.unmatched_red == (2,)


def test_oracle_examples():
    cfg = make_config([0.0], [4.0])
    assert oracle_min(CostSpec.finite(2), cfg) == {Matching.from_edges(cfg, [(0, 0)])}
    cfg = make_config([0.0, 1.0], [2.0, 3.0])
    assert len(oracle_min(CostSpec.finite(1), cfg)) == 2
    assert detect_tie(CostSpec.finite(1), cfg)
    assert solve_min(CostSpec.finite(1), cfg).tie
    with pytest.raises(TooLarge):
        oracle_min(CostSpec.finite(1), fixed_count((0, 10), 7, 6, seed=0))


def test_one_pm_resolve_gamma_one_tie():
    cfg = make_config([0.0, 1.0], [2.0, 3.0])
    assert set(solve_min(CostSpec.parse("1-"), cfg).edges) == {(0, 1), (1, 0)}
    assert set(solve_min(CostSpec.parse("1+"), cfg).edges) == {(0, 0), (1, 1)}


def test_detect_tie_examples():
    assert not detect_tie(CostSpec.finite(2), make_config([0.0], [1.0]))
    cfg = fixed_count((0, 10), 4, 4, seed=12)
    assert not detect_tie(CostSpec.finite(2), cfg)


def test_solve_stable_examples():
    cfg = make_config([0.0], [1.0])
    assert solve_stable(cfg).edges == ((0, 0),)
    cfg = make_config([0.0, 1.0, 3.0, 7.0], mode="one-colour")
    assert set(solve_stable(cfg).edges) == {(0, 1), (2, 3)}
    with pytest.raises(DegenerateDistances):
        solve_stable(make_config([0.0, 2.0], [1.0]))


def test_empty_config():
    cfg = make_config([], [])
    assert solve_min(CostSpec.finite(1), cfg).edges == ()


@pytest.mark.parametrize("kind", KINDS)
def test_oracle_equivalence_small(kind):
    spec = CostSpec.parse(kind)
    for seed in range(60):
        for dim in (1, 2):
            for two in (True, False):
                cfg = random_small_config(1000 * dim + seed, max_total=8, dim=dim, two_colour=two)
                m = solve_min(spec, cfg)
                opt = oracle_min(spec, cfg)
                best = next(iter(opt))
                assert compare(spec, score(spec, cfg, m), score(spec, cfg, best)) == EQUAL
                assert m in opt
                assert m.tie == (len(opt) > 1)


@pytest.mark.parametrize("kind", KINDS)
def test_perfect_at_equal_cardinality(kind):
    spec = CostSpec.parse(kind)
    for seed in range(20):
        cfg = fixed_count([(0, 10), (0, 10)] if seed % 2 else (0, 10), 15, 15, seed=seed, dim=2 if seed % 2 else 1)
        m = solve_min(spec, cfg, check_ties=False)
        assert m.n_unmatched == 0
    cfg = fixed_count((0, 10), 9, 4, seed=1)
    m = solve_min(spec, cfg, check_ties=False)
    assert len(m.unmatched_red) == 5 and not m.unmatched_blue


def test_large_solvers_agree_with_each_other():
    # blossom path (above the DP cap) against DP on the same costs restricted to 16 points
    cfg = fixed_count((0, 50), 40, 0, seed=9, mode="one-colour")
    m = solve_min(CostSpec.finite(2), cfg)
    assert m.n_unmatched == 0 and len(m.edges) == 20
    # the +inf bottleneck at scale against brute-force on the largest edge only
    cfg = fixed_count((0, 50), 30, 30, seed=4)
    m = solve_min(CostSpec.parse("+inf"), cfg)
    s = score(CostSpec.parse("+inf"), cfg, m)
    # no perfect matching uses only edges shorter than the achieved bottleneck
    from matchlab.finite_match import _distance_matrix, _max_matching_size

    D = _distance_matrix(cfg)
    assert _max_matching_size(cfg, D < s.lengths[0] * (1 - 1e-12)) < 30


def _sorted_four(cfg, e, f):
    pos = []
    for (i, j), tag in ((e, "e"), (f, "f")):
        if cfg.two_colour:
            pos += [(float(cfg.red[i]), "r", tag), (float(cfg.blue[j]), "b", tag)]
        else:
            pos += [(float(cfg.red[i]), "a", tag), (float(cfg.red[j]), "a", tag)]
    pos.sort()
    colours = "".join(p[1] for p in pos)
    gaps = [pos[k + 1][0] - pos[k][0] for k in range(3)]
    idx_e = [k for k, p in enumerate(pos) if p[2] == "e"]
    idx_f = [k for k, p in enumerate(pos) if p[2] == "f"]
    return colours, arrangement(tuple(idx_e), tuple(idx_f)), gaps


@pytest.mark.parametrize("kind", KINDS)
def test_outputs_pass_pair_legal(kind):
    spec = CostSpec.parse(kind)
    for seed in range(30):
        for two in (True, False):
            cfg = random_small_config(seed + 77, max_total=10, dim=1, two_colour=two)
            m = solve_min(spec, cfg)
            for e, f in itertools.combinations(m.edges, 2):
                colours, arr, gaps = _sorted_four(cfg, e, f)
                assert pair_legal(spec, colours, arr, gaps), (kind, seed, e, f)


def test_tile_match():
    cfg = fixed_count((0, 10), 5, 5, seed=3)
    for kind in (1, "-inf", "+inf", 0.5):
        spec = CostSpec.parse(kind)
        assert tile_match(spec, cfg, 20.0, [0.0]) == solve_min(spec, cfg)
    cfg = make_config([0.2, 1.7], [0.6, 1.2])
    m = tile_match(CostSpec.finite(0.5), cfg, 1.0, [0.0])
    assert set(m.edges) == {(0, 0), (1, 1)}
    with pytest.raises(InvalidParameter):
        tile_match(CostSpec.finite(1), cfg, 0.0)


def test_tile_match_unmatched_is_imbalance():
    cfg = sample_poisson([(0, 20), (0, 20)], 0.2, "two-colour", seed=5, dim=2)
    m = tile_match(CostSpec.finite(1), cfg, 5.0, [0.0, 0.0])
    cells = lambda p: [tuple(c) for c in np.floor(p.reshape(-1, 2) / 5.0).astype(int).tolist()]
    from collections import Counter

    cr, cb = Counter(cells(cfg.red)), Counter(cells(cfg.blue))
    assert m.n_unmatched == sum(abs(cr[c] - cb[c]) for c in set(cr) | set(cb))
    for i, j in m.edges:
        assert cells(cfg.red[i])[0] == cells(cfg.blue[j])[0]


def test_scale_invariance_property():
    for seed in range(30):
        cfg = random_small_config(seed + 500, max_total=10)
        for kind in (-1, 0, 0.5, 2):
            spec = CostSpec.finite(kind)
            base = solve_min(spec, cfg, check_ties=False)
            for s in (0.5, 2.0, 10.0):
                assert solve_min(spec, cfg.scaled(s), check_ties=False).edges == base.edges
