"""Explicit matchings of the whole line, realized on finite windows.

Every construction returns a WindowMatching: the edges it can determine from
the window, plus the boundary points whose partner may lie outside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .costs import FINITE, NEG_INF, CostSpec
from .errors import InvalidInput, OutOfRange
from .finite_match import Matching, solve_min
from .points import ONE_COLOUR, TWO_COLOUR, PointConfig, sorted_union
from .walklevel import RED, LevelAssignment, Walk, assign_levels, build_walk, find_scale

PLUS, MINUS = "plus", "minus"


@dataclass(frozen=True, eq=False)
class WindowMatching:
    config: PointConfig
    edges: tuple
    unmatched_red: tuple = ()
    unmatched_blue: tuple = ()
    boundary_red: tuple = ()
    boundary_blue: tuple = ()

    @property
    def mode(self) -> str:
        return self.config.mode

    @property
    def tie(self) -> bool:
        return False

    def same_as(self, other: "WindowMatching") -> bool:
        return (
            self.edges == other.edges
            and self.unmatched_red == other.unmatched_red
            and self.unmatched_blue == other.unmatched_blue
            and self.boundary_red == other.boundary_red
            and self.boundary_blue == other.boundary_blue
        )

    def partner_map(self) -> dict:
        """{("r", i): ("b", j), ...}; one-colour points are tagged "r"."""
        out = {}
        tag = "b" if self.config.two_colour else "r"
        for i, j in self.edges:
            out[("r", i)] = (tag, j)
            out[(tag, j)] = ("r", i)
        return out

    def intervals(self) -> np.ndarray:
        other = self.config.blue if self.config.two_colour else self.config.red
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        x, y = self.config.red[e[:, 0]], other[e[:, 1]]
        return np.stack([np.minimum(x, y), np.maximum(x, y)], axis=1)

    def crossing_count(self, x: float) -> int:
        """Number of edges whose span contains x."""
        iv = self.intervals()
        return int(np.sum((iv[:, 0] < x) & (x < iv[:, 1])))


def _make(config, edges, boundary_red=(), boundary_blue=(), unmatched_red=(), unmatched_blue=()):
    if config.two_colour:
        es = tuple(sorted((int(i), int(j)) for i, j in edges))
    else:
        es = tuple(sorted((min(int(i), int(j)), max(int(i), int(j))) for i, j in edges))
    return WindowMatching(
        config,
        es,
        tuple(sorted(map(int, unmatched_red))),
        tuple(sorted(map(int, unmatched_blue))),
        tuple(sorted(map(int, boundary_red))),
        tuple(sorted(map(int, boundary_blue))),
    )


def _need_line(config: PointConfig, two_colour: bool) -> None:
    if config.dim != 1:
        raise InvalidInput("line constructions need d=1")
    if two_colour and not config.two_colour:
        raise InvalidInput("construction needs a two-colour configuration")
    if not two_colour and config.two_colour:
        raise InvalidInput("construction needs a one-colour configuration")


# ------------------------------------------------------------ one colour


def alternating(config: PointConfig, phase: str = PLUS) -> WindowMatching:
    """Pair consecutive points, the pair straddling the origin being present for ``plus``.

    With x_{-1} < 0 <= x_0, ``plus`` pairs (x_{2m-1}, x_{2m}) and ``minus`` pairs (x_{2m}, x_{2m+1}).
    """
    _need_line(config, two_colour=False)
    if phase not in (PLUS, MINUS):
        raise InvalidInput(f"unknown phase {phase!r}")
    x = config.red
    n = len(x)
    i0 = int(np.searchsorted(x, 0.0, side="left"))
    lead_odd = phase == PLUS  # relative index t pairs with t+1 when t has this parity
    edges, boundary = [], []
    for i in range(n):
        t = i - i0
        forward = (t % 2 == 1) if lead_odd else (t % 2 == 0)
        j = i + 1 if forward else i - 1
        if 0 <= j < n:
            if forward:
                edges.append((i, j))
        else:
            boundary.append(i)
    return _make(config, edges, boundary_red=boundary)


# ------------------------------------------------------------ two colours


def order_matching_k(config: PointConfig, k: int) -> WindowMatching:
    """Match r_{i+k} with b_i, with reds and blues indexed from the first point >= 0."""
    _need_line(config, two_colour=True)
    k = int(k)
    r0 = int(np.searchsorted(config.red, 0.0, side="left"))
    b0 = int(np.searchsorted(config.blue, 0.0, side="left"))
    edges, bb = [], []
    used = set()
    for j in range(config.n_blue):
        i = r0 + (j - b0) + k
        if 0 <= i < config.n_red:
            edges.append((i, j))
            used.add(i)
        else:
            bb.append(j)
    br = [i for i in range(config.n_red) if i not in used]
    return _make(config, edges, boundary_red=br, boundary_blue=bb)


def swap_colours(config: PointConfig) -> PointConfig:
    return PointConfig(config.dim, config.window, config.blue, config.red, config.mode)


def meshalkin(config: PointConfig, colour_swap: bool = False) -> WindowMatching:
    """Each red is matched to the first blue to its right at which the counts balance.

    With ``colour_swap`` the roles are exchanged (blues open, reds close).
    """
    _need_line(config, two_colour=True)
    if colour_swap:
        m = meshalkin(swap_colours(config))
        return _make(config, [(j, i) for i, j in m.edges], boundary_red=m.boundary_blue, boundary_blue=m.boundary_red)
    pos, col, idx = sorted_union(config)
    stack: list[int] = []
    edges, bb = [], []
    for c, i in zip(col.tolist(), idx.tolist()):
        if c == RED:
            stack.append(i)
        elif stack:
            edges.append((stack.pop(), i))
        else:
            bb.append(i)
    return _make(config, edges, boundary_red=stack, boundary_blue=bb)


def level_matching(config: PointConfig, assignment: LevelAssignment | None = None, k_threshold=0) -> WindowMatching:
    """Within each level j pair every red with its neighbour in the level:
    the previous point (edges pointing left) when j <= k-1, the next point
    (edges pointing right) when j >= k. ``k_threshold`` may be +-inf.
    """
    _need_line(config, two_colour=True)
    if assignment is None:
        assignment = assign_levels(build_walk(config), config)
    k = k_threshold
    if isinstance(k, str):
        k = float(k)
    if not (isinstance(k, float) and math.isinf(k)):
        k = int(k)
    pos, col, idx = sorted_union(config)
    is_red = col == RED
    lv = np.empty(len(pos), dtype=np.int64)
    lv[is_red] = assignment.red[idx[is_red]]
    lv[~is_red] = assignment.blue[idx[~is_red]]
    by_level: dict[int, list[int]] = {}
    for t, j in enumerate(lv.tolist()):
        by_level.setdefault(j, []).append(t)
    edges, br, bb = [], [], []
    for j, members in by_level.items():
        rightward = j >= k
        m = len(members)
        for s, t in enumerate(members):
            if col[t] != RED:
                continue
            u = s + 1 if rightward else s - 1
            if 0 <= u < m:
                edges.append((int(idx[t]), int(idx[members[u]])))
            else:
                br.append(int(idx[t]))
        # the blue at the open end of the level has its red outside the window
        first, last = members[0], members[-1]
        if rightward and col[first] != RED:
            bb.append(int(idx[first]))
        if not rightward and col[last] != RED:
            bb.append(int(idx[last]))
    return _make(config, edges, boundary_red=br, boundary_blue=bb)


def one_swap_variant(base: WindowMatching, selector: Callable[[float], bool]) -> WindowMatching:
    """Swap partners in every run r<r'<b'<b of consecutive points matched as (r,b),(r',b')
    for which ``selector(b' - r')`` holds."""
    config = base.config
    _need_line(config, two_colour=True)
    pos, col, idx = sorted_union(config)
    edges = set(base.edges)
    out = set(edges)
    c = col.tolist()
    for t in range(len(c) - 3):
        if c[t] == RED and c[t + 1] == RED and c[t + 2] != RED and c[t + 3] != RED:
            r, r2, b2, b = int(idx[t]), int(idx[t + 1]), int(idx[t + 2]), int(idx[t + 3])
            if (r, b) in edges and (r2, b2) in edges and selector(float(pos[t + 2] - pos[t + 1])):
                out -= {(r, b), (r2, b2)}
                out |= {(r, b2), (r2, b)}
    return _make(config, out, base.boundary_red, base.boundary_blue, base.unmatched_red, base.unmatched_blue)


def interval_selector(intervals) -> Callable[[float], bool]:
    """Selector true on a union of closed intervals [lo, hi]."""
    ivs = [(float(lo), float(hi)) for lo, hi in intervals]
    return lambda g: any(lo <= g <= hi for lo, hi in ivs)


# ---------------------------------------------------- finitary partner


def _g(u: float, gamma: float) -> float:
    return 2.0 * u**gamma - 1.0 - (1.0 + 2.0 * u) ** gamma


def kappa(spec) -> float:
    """Quasistability constant for the subcritical costs (gamma < 1 or -inf)."""
    spec = CostSpec.parse(spec)
    if spec.kind == NEG_INF:
        return 1.0
    if spec.kind != FINITE or spec.gamma >= 1:
        raise OutOfRange("kappa is defined for gamma < 1 and for -inf")
    g = spec.gamma
    if g < 0:
        return 2.0 ** (-1.0 / g) + 1.0
    if g == 0:
        return 3.0
    # g(u,u) is negative near 0 and positive for large u; bisect for its root
    lo, hi = 1e-12, 1.0
    while _g(hi, g) <= 0:
        hi *= 2.0
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if _g(mid, g) > 0:
            hi = mid
        else:
            lo = mid
    return hi + 1.0


@dataclass
class FinitaryCertificate:
    query: float
    v_pos: float
    v_colour: int
    level: int
    kappa: float
    a: float
    Y: float
    h_pos: np.ndarray
    h_colour: np.ndarray
    partner_pos: float
    partner_colour: int
    h_edges: list = field(default_factory=list)  # (red position, blue position)
    v_index: int | None = None
    partner_index: int | None = None
    h_red_index: list | None = None
    h_blue_index: list | None = None

    @property
    def balanced(self) -> bool:
        return int(np.sum(self.h_colour)) == 0

    @property
    def distance(self) -> float:
        return abs(self.partner_pos - self.v_pos)

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "V": self.v_index if self.v_index is not None else self.v_pos,
            "V_position": self.v_pos,
            "V_colour": "r" if self.v_colour == RED else "b",
            "level": self.level,
            "kappa": self.kappa,
            "a": self.a,
            "Y": self.Y,
            "H": {
                "red": self.h_red_index if self.h_red_index is not None else self.h_pos[self.h_colour == RED].tolist(),
                "blue": self.h_blue_index if self.h_blue_index is not None else self.h_pos[self.h_colour != RED].tolist(),
            },
            "partner": self.partner_index if self.partner_index is not None else self.partner_pos,
            "partner_position": self.partner_pos,
            "coding_radius": coding_radius(self),
        }


def certify(w, spec, query: float, max_n: int, kap: float | None = None, min_n: int = 0):
    """Certificate for the partner of the first point >= query, or None.

    ``w`` is any walk-like object: an explicit Walk or a LazyLine. With
    ``min_n`` > 0 the scales below (3a)^min_n are skipped, which gives a
    second, larger certificate to compare against.
    """
    spec = CostSpec.parse(spec)
    if kap is None:
        kap = kappa(spec)
    a = 2.0 * kap + 1.0
    y = find_scale(w, query, a, max_n, min_n)
    if y is None:
        return None
    base = w.value_left(query)
    first = w.first_point_at_or_after(query)
    if first is None or first[0] >= query + y:  # pragma: no cover - excluded by positivity at query+Y
        raise RuntimeError("no point between query and query+Y")
    v_pos, v_col = first
    level = base if v_col == RED else base - 1
    h_pos, h_col = w.level_points(level, query - y, query + y)
    if int(h_col.sum()) != 0:  # pragma: no cover - would contradict positivity of the walk
        raise RuntimeError("unbalanced level set in certificate")
    red = h_pos[h_col == RED]
    blue = h_pos[h_col != RED]
    sub = PointConfig(1, (query - y, query + y), red, blue, TWO_COLOUR)
    m = solve_min(spec, sub, check_ties=False)
    h_edges = [(float(red[i]), float(blue[j])) for i, j in m.edges]
    partner = None
    for rp, bp in h_edges:
        if rp == v_pos:
            partner = (bp, -1)
        elif bp == v_pos:
            partner = (rp, RED)
    return FinitaryCertificate(query, float(v_pos), int(v_col), int(level), kap, a, y, h_pos, h_col,
                               float(partner[0]), int(partner[1]), h_edges)


def _tag(walk: Walk, x: float):
    k = walk.jump_index(x)
    return ("r" if walk.steps[k] == RED else "b"), int(walk.index[k])


def finitary_partner(config: PointConfig, spec, query: float, max_n: int, walk: Walk | None = None):
    """Certified partner of the first point at or after ``query`` (None when no scale up to max_n works)."""
    _need_line(config, two_colour=True)
    if walk is None:
        walk = build_walk(config)
    cert = certify(walk, spec, query, max_n)
    if cert is None:
        return None
    cert.v_index = _tag(walk, cert.v_pos)[1]
    cert.partner_index = _tag(walk, cert.partner_pos)[1]
    cert.h_red_index = [int(i) for i in np.searchsorted(config.red, cert.h_pos[cert.h_colour == RED])]
    cert.h_blue_index = [int(j) for j in np.searchsorted(config.blue, cert.h_pos[cert.h_colour != RED])]
    return cert


def coding_radius(cert: FinitaryCertificate) -> float:
    return cert.a * cert.Y


def certified_edges(config: PointConfig, spec, max_n: int, queries=None, walk: Walk | None = None):
    """Union of the level-set matchings over certificates at the given queries
    (default: every point of the configuration), as (red, blue) index pairs.

    Returns (edges, certificates, conflicts) where conflicts counts points that
    received two different partners.
    """
    _need_line(config, two_colour=True)
    if walk is None:
        walk = build_walk(config)
    if queries is None:
        queries = walk.positions.tolist()
    reach = (2 * kappa(spec) + 1) * (3 * (2 * kappa(spec) + 1)) ** max_n
    lo, hi = walk.window
    partner: dict = {}
    conflicts = 0
    certs = []
    for q in queries:
        if q - reach < lo or q + reach > hi:
            continue
        cert = certify(walk, spec, q, max_n)
        if cert is None:
            continue
        certs.append(cert)
        for rp, bp in cert.h_edges:
            i = int(np.searchsorted(config.red, rp))
            j = int(np.searchsorted(config.blue, bp))
            if partner.get(("r", i), j) != j or partner.get(("b", j), i) != i:
                conflicts += 1
            partner[("r", i)] = j
            partner[("b", j)] = i
    edges = sorted({(i, j) for (c, i), j in partner.items() if c == "r"})
    return edges, certs, conflicts


# ------------------------------------------------------------ comparison


def compare_matchings(m1: WindowMatching, m2: WindowMatching) -> dict:
    """Connected components of the union of two window matchings.

    Components touching a boundary point of either matching are excluded and
    only counted.
    """
    if not (m1.config == m2.config):
        raise InvalidInput("matchings of different configurations")
    cfg = m1.config
    tag_b = "b" if cfg.two_colour else "r"
    nodes = [("r", i) for i in range(cfg.n_red)] + ([("b", j) for j in range(cfg.n_blue)] if cfg.two_colour else [])
    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for m in (m1, m2):
        for i, j in m.edges:
            a, b = find(("r", i)), find((tag_b, j))
            if a != b:
                parent[a] = b
    bad = set()
    for m in (m1, m2):
        bad.update(("r", i) for i in m.boundary_red)
        bad.update(("b", j) for j in m.boundary_blue)
    comps: dict = {}
    for v in nodes:
        comps.setdefault(find(v), []).append(v)
    sizes, excluded = [], 0
    for members in comps.values():
        if any(v in bad for v in members):
            excluded += 1
        else:
            sizes.append(len(members))
    return {"sizes": sorted(sizes), "excluded": excluded, "largest": max(sizes) if sizes else 0}


def to_matching(wm: WindowMatching) -> Matching:
    """Drop the boundary information (boundary points become unmatched)."""
    return Matching(
        wm.config.mode,
        wm.edges,
        tuple(sorted(set(wm.unmatched_red) | set(wm.boundary_red))),
        tuple(sorted(set(wm.unmatched_blue) | set(wm.boundary_blue))),
    )


__all__ = [
    "WindowMatching",
    "FinitaryCertificate",
    "alternating",
    "order_matching_k",
    "meshalkin",
    "level_matching",
    "one_swap_variant",
    "interval_selector",
    "kappa",
    "certify",
    "finitary_partner",
    "coding_radius",
    "certified_edges",
    "compare_matchings",
    "swap_colours",
    "to_matching",
    "ONE_COLOUR",
]
