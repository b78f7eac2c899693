import itertools
import math

import numpy as np
import pytest

from matchlab.costs import CostSpec, arrangement, has_entwined, pair_legal, score
from matchlab.errors import InvalidInput, OutOfRange, WindowTooSmall
from matchlab.finite_match import Matching, solve_min
from matchlab.lazyline import LazyLine
from matchlab.line_constructions import (
    MINUS,
    PLUS,
    alternating,
    certified_edges,
    certify,
    coding_radius,
    compare_matchings,
    finitary_partner,
    interval_selector,
    kappa,
    level_matching,
    meshalkin,
    one_swap_variant,
    order_matching_k,
    to_matching,
)
from matchlab.points import Seed, make_config, palm_augment, sample_poisson, sorted_union
from matchlab.walklevel import RED, assign_levels, build_walk


def _two(red, blue, window=None):
    return make_config(red, blue, window=window, mode="two-colour")


def test_alternating_examples():
    cfg = make_config([-1.0, 1.0, 2.0, 4.0], mode="one-colour", window=(-5, 5))
    plus = alternating(cfg, PLUS)
    assert plus.edges == ((0, 1), (2, 3)) and plus.boundary_red == ()
    minus = alternating(cfg, MINUS)
    assert minus.edges == ((1, 2),) and minus.boundary_red == (0, 3)
    with pytest.raises(InvalidInput):
        alternating(_two([0.0], [1.0]))


def test_alternating_edges_separate():
    cfg = sample_poisson((-200, 200), 1.0, "one-colour", seed=4)
    for phase in (PLUS, MINUS):
        iv = alternating(cfg, phase).intervals()
        assert np.all(iv[1:, 0] > iv[:-1, 1])


def test_alternating_union_is_one_path():
    cfg = sample_poisson((-100, 100), 1.0, "one-colour", seed=2)
    res = compare_matchings(alternating(cfg, PLUS), alternating(cfg, MINUS))
    # the nearest-neighbour path spans the window and touches both ends
    assert res["sizes"] == [] and res["excluded"] == 1


def test_order_matching_examples():
    cfg = _two([1.0], [2.0], window=(0, 5))
    assert order_matching_k(cfg, 0).edges == ((0, 0),)
    cfg = sample_poisson((-500, 500), 1.0, "two-colour", seed=1)
    for k in (-3, 0, 2, 5):
        wm = order_matching_k(cfg, k)
        assert wm.crossing_count(0.0) == abs(k)
        r0 = int(np.searchsorted(cfg.red, 0.0))
        b0 = int(np.searchsorted(cfg.blue, 0.0))
        assert (r0 + k, b0) in wm.edges


def test_meshalkin_examples():
    assert meshalkin(_two([0.0], [1.0])).edges == ((0, 0),)
    assert set(meshalkin(_two([0.0, 1.0], [2.0, 3.0])).edges) == {(0, 1), (1, 0)}
    sw = meshalkin(_two([0.0, 1.0], [2.0, 3.0]), colour_swap=True)
    assert sw.edges == () and sw.boundary_blue == (0, 1) and sw.boundary_red == (0, 1)


@pytest.mark.parametrize("seed", range(10))
def test_meshalkin_invariants(seed):
    cfg = sample_poisson((-300, 300), 1.0, "two-colour", seed=seed)
    wm = meshalkin(cfg)
    for i, j in wm.edges:
        assert cfg.red[i] < cfg.blue[j]
    assert not has_entwined(wm.intervals())
    lv = assign_levels(build_walk(cfg), cfg)
    for i, j in wm.edges:
        assert lv.red[i] == lv.blue[j]
    assert wm.same_as(level_matching(cfg, lv, -math.inf))
    # colour swap gives the leftward first-return matching M_{+inf}
    assert meshalkin(cfg, colour_swap=True).same_as(level_matching(cfg, lv, math.inf))


def test_level_matching_example():
    cfg = _two([1.0], [2.0], window=(0, 5))
    assert level_matching(cfg, None, 0).edges == ((0, 0),)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("k", [-2, 0, 3])
def test_level_matching_crossing_and_legality(seed, k):
    cfg = sample_poisson((-300, 300), 1.0, "two-colour", seed=seed)
    w = build_walk(cfg)
    wm = level_matching(cfg, assign_levels(w, cfg), k)
    rng = np.random.default_rng(seed)
    iv = wm.intervals()
    pts = np.concatenate([cfg.red, cfg.blue])
    # away from the window ends, where every crossing edge is present
    for x in rng.uniform(-300, 300, 200):
        if np.any(pts == x):
            continue
        crossing = int(np.sum((iv[:, 0] < x) & (x < iv[:, 1])))
        missing = _missing_crossings(cfg, wm, w, x)
        if missing:
            continue
        assert crossing == abs(w.value(x) - k)
    spec = CostSpec.parse("1-")
    edges = sorted(wm.edges, key=lambda e: cfg.red[e[0]])
    for e, f in itertools.combinations(edges[:60], 2):
        pos = sorted([(cfg.red[e[0]], "r", 0), (cfg.blue[e[1]], "b", 0), (cfg.red[f[0]], "r", 1), (cfg.blue[f[1]], "b", 1)])
        gaps = [pos[t + 1][0] - pos[t][0] for t in range(3)]
        arr = arrangement(tuple(t for t in range(4) if pos[t][2] == 0), tuple(t for t in range(4) if pos[t][2] == 1))
        assert pair_legal(spec, "".join(p[1] for p in pos), arr, gaps)


def _missing_crossings(cfg, wm, w, x):
    """True when a boundary point's unseen edge might cross x."""
    for i in wm.boundary_red:
        if cfg.red[i] < x:
            return True
    for j in wm.boundary_blue:
        if cfg.blue[j] > x:
            return True
    return False


def test_one_swap_examples():
    cfg = _two([0.0, 1.0], [2.0, 3.0], window=(-1, 4))
    base = meshalkin(cfg)
    assert one_swap_variant(base, lambda g: False).same_as(base)
    sw = one_swap_variant(base, lambda g: True)
    assert set(sw.edges) == {(0, 0), (1, 1)}
    g1 = CostSpec.finite(1)
    assert math.isclose(score(g1, cfg, to_matching(sw)).cost, score(g1, cfg, to_matching(base)).cost)
    sel = interval_selector([(0.5, 1.5)])
    assert sel(1.0) and not sel(2.0)


def test_one_swap_is_locally_one_minimal():
    from matchlab.verify import is_gamma_minimal_local

    cfg = sample_poisson((0, 30), 1.0, "two-colour", seed=8)
    base = meshalkin(cfg)
    sw = one_swap_variant(base, interval_selector([(0.0, 0.7)]))
    assert sw.edges != base.edges
    # boundary points are not units, so only determined edges are checked
    assert is_gamma_minimal_local(CostSpec.finite(1), cfg, sw, subset_cap=6, samples=100, seed=1)


def test_kappa_values():
    assert kappa("-inf") == 1.0
    assert kappa(0) == 3.0
    assert kappa(-1) == 3.0
    assert kappa(-2) == pytest.approx(2**0.5 + 1)
    # derived by an independent root finder on 2u^g - 1 - (1+2u)^g
    assert kappa(0.5) == pytest.approx(5.0, abs=1e-8)
    from scipy.optimize import brentq

    for g in (0.2, 0.5, 0.9):
        u = brentq(lambda u: 2 * u**g - 1 - (1 + 2 * u) ** g, 1e-6, 1e6, xtol=1e-12)
        assert kappa(g) == pytest.approx(u + 1, abs=1e-8)
    with pytest.raises(OutOfRange):
        kappa(1)
    with pytest.raises(OutOfRange):
        kappa("1-")


@pytest.mark.parametrize("g", [-3, -2, -1, -0.5, 0, 0.2, 0.5, 0.9])
def test_kappa_inequality_grid(g):
    """Distances scaled so |x-y| = 1; partners further than kappa cannot both be kept."""
    k = kappa(g)
    if g > 0:
        # g(u, v) = u^g + v^g - 1 - (1+u+v)^g is increasing, so positive beyond its diagonal root
        u = (k - 1) * np.geomspace(1.0 + 1e-9, 1e4, 80)
        U, V = np.meshgrid(u, u)
        assert np.all(U**g + V**g - 1 - (1 + U + V) ** g > 0)
        return
    u = k * np.geomspace(1.0 + 1e-9, 1e4, 40)
    U, V = np.meshgrid(u, u)
    if g == 0:
        assert np.all(np.log(1 + U + V) - np.log(U) - np.log(V) < 0)
        return
    # any third length w in (0, 1+u+v]: u^g + v^g < 1 + w^g
    for frac in np.linspace(1e-3, 1.0, 25):
        W = frac * (1 + U + V)
        assert np.all(U**g + V**g - 1 - W**g < 0)


def test_coding_radius_example():
    from matchlab.line_constructions import FinitaryCertificate

    c = FinitaryCertificate(0.0, 0.5, 1, 0, 3.0, 7.0, 1.0, np.array([0.5, 0.7]), np.array([1, -1]), 0.7, -1)
    assert coding_radius(c) == 7.0


def _certs(g, n, max_n=3, seed=0):
    a = 2 * kappa(g) + 1
    out = []
    s = 0
    while len(out) < n:
        line = LazyLine(a * (3 * a) ** (max_n + 1) * 1.01, Seed(seed, s))
        s += 1
        c = certify(line, g, 0.0, max_n)
        if c is not None:
            out.append((line, c))
    return out


@pytest.mark.parametrize("g", [0.0, -1.0, 0.5, "-inf"])
def test_certificate_invariants(g):
    for line, c in _certs(g, 15):
        assert c.balanced
        assert c.v_pos in c.h_pos.tolist() and c.partner_pos in c.h_pos.tolist()
        assert c.v_colour != c.partner_colour
        base = line.value_left(c.query)
        assert line.positive_on(c.query - c.a * c.Y, c.query - c.Y, base)
        assert line.positive_on(c.query + c.Y, c.query + c.a * c.Y, base)
        assert c.distance <= coding_radius(c)
        # H is matched to itself: the restricted optimum is perfect
        assert len(c.h_edges) * 2 == len(c.h_pos)
        # larger max_n and a larger valid scale give the same partner
        assert certify(line, g, c.query, 4).partner_pos == c.partner_pos
        n = round(math.log(c.Y) / math.log(3 * c.a))
        big = certify(line, g, c.query, 4, min_n=n + 1)
        if big is not None:
            assert big.partner_pos == c.partner_pos
        # involution
        q = c.partner_pos
        reach = c.a * (3 * c.a) ** 3
        if line.covers(q - reach, q + reach):
            back = certify(line, g, q, 3)
            if back is not None:
                assert back.partner_pos == c.v_pos


def test_finitary_partner_explicit_window():
    cfg = sample_poisson((-4000, 4000), 1.0, "two-colour", seed=3)
    w = build_walk(cfg)
    hits = 0
    for q in np.linspace(-200, 200, 40):
        c = finitary_partner(cfg, 0.0, float(q), 2, walk=w)
        if c is None:
            continue
        hits += 1
        d = c.to_dict()
        tag_v = "red" if d["V_colour"] == "r" else "blue"
        assert d["V"] in d["H"][tag_v]
        assert (cfg.red if d["V_colour"] == "r" else cfg.blue)[d["V"]] == c.v_pos
    assert hits > 0
    with pytest.raises(WindowTooSmall):
        finitary_partner(cfg, 0.0, 0.0, 3, walk=w)


def test_finitary_neg_inf_agrees_with_stable():
    """kappa=1 certificates for -inf agree with solve_stable on the window."""
    from matchlab.finite_match import solve_stable

    cfg = sample_poisson((-400, 400), 1.0, "two-colour", seed=12)
    stable = solve_stable(cfg)
    partner = {i: j for i, j in stable.edges}
    w = build_walk(cfg)
    edges, certs, conflicts = certified_edges(cfg, "-inf", 2, walk=w)
    assert conflicts == 0 and certs
    # certified edges far from the window ends are stable edges
    for i, j in edges:
        if abs(cfg.red[i]) < 100:
            assert partner.get(i) == j


def test_certified_edges_consistent():
    cfg = sample_poisson((-3000, 3000), 1.0, "two-colour", seed=5)
    edges, certs, conflicts = certified_edges(cfg, 0.0, 2)
    assert conflicts == 0
    assert len({i for i, _ in edges}) == len(edges) == len({j for _, j in edges})
    iv = np.array([[min(cfg.red[i], cfg.blue[j]), max(cfg.red[i], cfg.blue[j])] for i, j in edges])
    assert not has_entwined(iv)


def test_compare_matchings_examples():
    cfg = sample_poisson((-200, 200), 1.0, "two-colour", seed=6)
    m = meshalkin(cfg)
    res = compare_matchings(m, m)
    assert set(res["sizes"]) <= {2}
    lv = assign_levels(build_walk(cfg), cfg)
    res = compare_matchings(m, level_matching(cfg, lv, 0))
    assert all(s % 2 == 0 for s in res["sizes"])
    with pytest.raises(InvalidInput):
        compare_matchings(m, meshalkin(sample_poisson((-200, 200), 1.0, "two-colour", seed=7)))
