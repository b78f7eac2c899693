"""Exact minimal matchings of finite configurations, plus an exhaustive oracle."""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import networkx as nx
import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .costs import (
    EQUAL,
    FINITE,
    LESS,
    NEG_INF,
    ONE_MINUS,
    ONE_PLUS,
    POS_INF,
    CostSpec,
    compare,
    cost_array,
    edge_intervals,
    score,
)
from .errors import DegenerateDistances, InvalidParameter, TooLarge
from .points import EPS_TIE, ONE_COLOUR, TWO_COLOUR, PointConfig

ORACLE_MAX = 12
DP_MAX = 16


@dataclass(frozen=True, eq=False)
class Matching:
    """Edges as (red, blue) index pairs, or (i, j) with i < j in one-colour mode.

    Equality and hashing ignore the tie flag.
    """

    mode: str
    edges: tuple
    unmatched_red: tuple = ()
    unmatched_blue: tuple = ()
    tie: bool = False

    @classmethod
    def from_edges(cls, config: PointConfig, edges, tie: bool = False) -> "Matching":
        if config.two_colour:
            es = tuple(sorted((int(i), int(j)) for i, j in edges))
            used_r = {i for i, _ in es}
            used_b = {j for _, j in es}
            ur = tuple(i for i in range(config.n_red) if i not in used_r)
            ub = tuple(j for j in range(config.n_blue) if j not in used_b)
            return cls(TWO_COLOUR, es, ur, ub, tie)
        es = tuple(sorted((min(int(i), int(j)), max(int(i), int(j))) for i, j in edges))
        used = {k for e in es for k in e}
        ur = tuple(i for i in range(config.n_red) if i not in used)
        return cls(ONE_COLOUR, es, ur, (), tie)

    @property
    def n_unmatched(self) -> int:
        return len(self.unmatched_red) + len(self.unmatched_blue)

    def _key(self):
        return (self.mode, self.edges, self.unmatched_red, self.unmatched_blue)

    def __eq__(self, other):
        if not isinstance(other, Matching):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def with_tie(self, tie: bool) -> "Matching":
        return Matching(self.mode, self.edges, self.unmatched_red, self.unmatched_blue, tie)


def _empty(config: PointConfig) -> Matching:
    return Matching.from_edges(config, [])


def _distance_matrix(config: PointConfig) -> np.ndarray:
    """Red x blue distances (two-colour) or point x point distances (one-colour)."""
    p = config.red.reshape(config.n_red, config.dim)
    q = config.blue.reshape(config.n_blue, config.dim) if config.two_colour else p
    if config.dim == 1:
        return np.abs(p[:, 0][:, None] - q[:, 0][None, :])
    return np.sqrt(((p[:, None, :] - q[None, :, :]) ** 2).sum(axis=2))


# ---------------------------------------------------------------- sum costs


def _sum_two_colour(config: PointConfig, gamma: float) -> list:
    D = _distance_matrix(config)
    C = cost_array(gamma, D)
    rows, cols = linear_sum_assignment(C)
    return list(zip(rows.tolist(), cols.tolist()))


def _dp_one_colour(C: np.ndarray) -> list:
    n = len(C)
    W = C.tolist()
    memo: dict[int, tuple[float, int]] = {0: (0.0, -1)}

    def best(mask: int) -> float:
        hit = memo.get(mask)
        if hit is not None:
            return hit[0]
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        bv, bj = math.inf, -1
        m = rest
        while m:
            low = m & -m
            j = low.bit_length() - 1
            m ^= low
            v = W[i][j] + best(rest & ~(1 << j))
            if v < bv:
                bv, bj = v, j
        memo[mask] = (bv, bj)
        return bv

    full = (1 << n) - 1
    if n % 2 == 0:
        start = full
    else:
        start = min((full & ~(1 << u) for u in range(n)), key=best)
    best(start)
    edges = []
    mask = start
    while mask:
        i = (mask & -mask).bit_length() - 1
        j = memo[mask][1]
        edges.append((i, j))
        mask &= ~((1 << i) | (1 << j))
    return edges


def _blossom_one_colour(C: np.ndarray) -> list:
    n = len(C)
    big = float(np.abs(C).max()) * 2 + 1.0
    G = nx.Graph()
    for i in range(n):
        for j in range(i + 1, n):
            G.add_edge(i, j, weight=big - C[i, j])
    return [tuple(sorted(e)) for e in nx.max_weight_matching(G, maxcardinality=True)]


def _sum_one_colour(config: PointConfig, gamma: float) -> list:
    n = config.n_red
    if n < 2:
        return []
    D = _distance_matrix(config)
    np.fill_diagonal(D, 1.0)
    C = cost_array(gamma, D)
    if n <= DP_MAX:
        return _dp_one_colour(C)
    return _blossom_one_colour(C)


# ------------------------------------------------------- lexicographic kinds


def _greedy_shortest(config: PointConfig) -> list:
    """Repeatedly match the closest remaining eligible pair."""
    if config.dim == 1:
        return _greedy_line(config)
    D = _distance_matrix(config)
    if config.two_colour:
        ii, jj = np.unravel_index(np.argsort(D, axis=None, kind="stable"), D.shape)
    else:
        iu, ju = np.triu_indices(config.n_red, 1)
        order = np.argsort(D[iu, ju], kind="stable")
        ii, jj = iu[order], ju[order]
    used_a: set[int] = set()
    used_b: set[int] = set()
    edges = []
    limit = min(config.n_red, config.n_blue) if config.two_colour else config.n_red // 2
    for i, j in zip(ii.tolist(), jj.tolist()):
        if len(edges) == limit:
            break
        if config.two_colour:
            if i in used_a or j in used_b:
                continue
            used_a.add(i)
            used_b.add(j)
        else:
            if i in used_a or j in used_a:
                continue
            used_a.update((i, j))
        edges.append((i, j))
    return edges


def _greedy_line(config: PointConfig) -> list:
    """d=1 greedy: the closest eligible pair is always adjacent among the remaining points."""
    pos = np.concatenate([config.red, config.blue])
    col = np.concatenate([np.zeros(config.n_red, dtype=int), np.ones(config.n_blue, dtype=int)])
    idx = np.concatenate([np.arange(config.n_red), np.arange(config.n_blue)])
    order = np.argsort(pos, kind="stable")
    pos, col, idx = pos[order].tolist(), col[order].tolist(), idx[order].tolist()
    n = len(pos)
    prev = list(range(-1, n - 1))
    nxt = list(range(1, n + 1))
    alive = [True] * n
    two = config.two_colour

    def eligible(i, j):
        return 0 <= i and j < n and (not two or col[i] != col[j])

    heap = [(pos[i + 1] - pos[i], i, i + 1) for i in range(n - 1) if eligible(i, i + 1)]
    heapq.heapify(heap)
    edges = []
    while heap:
        _, i, j = heapq.heappop(heap)
        if not (alive[i] and alive[j]) or nxt[i] != j:
            continue
        alive[i] = alive[j] = False
        p, q = prev[i], nxt[j]
        if p >= 0:
            nxt[p] = q
        if q < n:
            prev[q] = p
        if eligible(p, q):
            heapq.heappush(heap, (pos[q] - pos[p], p, q))
        if two:
            e = (idx[i], idx[j]) if col[i] == 0 else (idx[j], idx[i])
        else:
            e = (min(idx[i], idx[j]), max(idx[i], idx[j]))
        edges.append(e)
    return edges


def _max_matching_size(config: PointConfig, mask: np.ndarray) -> int:
    if config.two_colour:
        if not mask.any():
            return 0
        m = maximum_bipartite_matching(csr_matrix(mask.astype(np.int8)), perm_type="column")
        return int((m >= 0).sum())
    G = nx.Graph()
    ii, jj = np.nonzero(np.triu(mask, 1))
    G.add_edges_from(zip(ii.tolist(), jj.tolist()))
    return len(nx.max_weight_matching(G, maxcardinality=True))


def _bottleneck(config: PointConfig) -> list:
    """Lexicographically smallest descending length sequence among maximum matchings."""
    D = _distance_matrix(config)
    if not config.two_colour:
        np.fill_diagonal(D, np.inf)
    n_a = D.shape[0]
    n_b = D.shape[1]
    alive_a = np.ones(n_a, dtype=bool)
    alive_b = np.ones(n_b, dtype=bool)
    k = min(n_a, n_b) if config.two_colour else n_a // 2
    edges = []

    def live_matrix(t):
        mask = (D <= t) & alive_a[:, None] & alive_b[None, :]
        return mask

    while k > 0:
        sub = D[np.ix_(alive_a, alive_b)]
        values = np.unique(sub[np.isfinite(sub)])
        lo, hi = 0, len(values) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if _max_matching_size(config, live_matrix(values[mid])) >= k:
                hi = mid
            else:
                lo = mid + 1
        t = values[lo]
        cand = np.argwhere((D == t) & alive_a[:, None] & alive_b[None, :])
        if not config.two_colour:
            cand = cand[cand[:, 0] < cand[:, 1]]
        chosen = None
        for i, j in cand.tolist():
            alive_a[i] = alive_b[j] = False
            if not config.two_colour:
                alive_a[j] = alive_b[i] = False
            ok = k == 1 or _max_matching_size(config, live_matrix(t)) >= k - 1
            if ok:
                chosen = (i, j)
                break
            alive_a[i] = alive_b[j] = True
            if not config.two_colour:
                alive_a[j] = alive_b[i] = True
        if chosen is None:  # pragma: no cover - guarded by the binary search
            raise RuntimeError("bottleneck search lost feasibility")
        edges.append(chosen)
        k -= 1
    return edges


# ------------------------------------------------------------- 1± selection


def _find_violation(iv: np.ndarray, kind: str):
    """Indices of one forbidden pair among intervals, or None."""
    order = np.argsort(iv[:, 0], kind="stable")
    if kind == ONE_MINUS:
        stack: list[int] = []
        for k in order.tolist():
            lo, hi = iv[k]
            while stack and iv[stack[-1], 1] < lo:
                stack.pop()
            if stack and hi > iv[stack[-1], 1]:
                return stack[-1], k
            stack.append(k)
        return None
    best = -1
    for k in order.tolist():
        if best >= 0 and iv[k, 1] < iv[best, 1]:
            return best, k
        if best < 0 or iv[k, 1] > iv[best, 1]:
            best = k
    return None


def _resolve_one_pm(config: PointConfig, edges: list, kind: str) -> list:
    """Cost-neutral swaps at gamma=1 until no forbidden pair remains (d=1).

    An entwined-to-straddling swap strictly raises the sum of squared lengths
    and the reverse lowers it, so the loop terminates.
    """
    if config.dim != 1 or len(edges) < 2:
        return edges
    edges = list(edges)
    other = config.blue if config.two_colour else config.red
    for _ in range(10 * len(edges) ** 2 + 10):
        iv = edge_intervals(config, edges)
        hit = _find_violation(iv, kind)
        if hit is None:
            return edges
        e, f = hit
        (i1, j1), (i2, j2) = edges[e], edges[f]
        if config.two_colour:
            new1, new2 = (i1, j2), (i2, j1)
        else:
            pts = sorted([i1, j1, i2, j2], key=lambda t: config.red[t])
            if kind == ONE_MINUS:
                new1, new2 = (pts[0], pts[3]), (pts[1], pts[2])
            else:
                new1, new2 = (pts[0], pts[2]), (pts[1], pts[3])
        old_len = abs(config.red[i1] - other[j1]) + abs(config.red[i2] - other[j2])
        new_len = abs(config.red[new1[0]] - other[new1[1]]) + abs(config.red[new2[0]] - other[new2[1]])
        if abs(new_len - old_len) > 1e-9 * max(1.0, old_len):
            # not cost-neutral: the gamma=1 solution was not optimal in a way
            # a swap can repair, so leave the flag to report it
            return edges
        edges[e], edges[f] = new1, new2
    return edges


# ------------------------------------------------------------------- public


def solve_min(spec: CostSpec, config: PointConfig, check_ties: bool = True) -> Matching:
    """A minimal matching for ``spec``; ``tie`` is set on suspected ties among optima."""
    spec = CostSpec.parse(spec)
    if config.n_points == 0:
        return _empty(config)
    if spec.kind == NEG_INF:
        edges = _greedy_shortest(config)
    elif spec.kind == POS_INF:
        edges = _bottleneck(config)
    else:
        g = spec.sum_gamma
        edges = _sum_two_colour(config, g) if config.two_colour else _sum_one_colour(config, g)
        if spec.is_one_pm:
            edges = _resolve_one_pm(config, edges, spec.kind)
    m = Matching.from_edges(config, edges)
    if check_ties:
        tie = detect_tie(spec, config) if config.n_points <= ORACLE_MAX else _suspect_tie(spec, config, m)
        m = m.with_tie(tie)
    return m


def _suspect_tie(spec: CostSpec, config: PointConfig, m: Matching) -> bool:
    """Cheap tie screen above the oracle cap: equal-cost two-edge swaps or repeated distances."""
    if spec.kind in (NEG_INF, POS_INF):
        D = _distance_matrix(config)
        vals = D.ravel() if config.two_colour else D[np.triu_indices(config.n_red, 1)]
        if len(vals) > 2_000_000 or len(vals) < 2:
            return False
        vals = np.sort(vals)
        return bool(np.any(np.diff(vals) <= EPS_TIE * np.maximum(vals[1:], 1.0)))
    if spec.is_one_pm and config.dim == 1:
        return False
    e = np.asarray(m.edges, dtype=np.int64).reshape(-1, 2)
    if len(e) < 2 or len(e) > 400:
        return False
    g = spec.sum_gamma
    D = _distance_matrix(config)
    if not config.two_colour:
        np.fill_diagonal(D, 1.0)
    C = cost_array(g, D)
    a, b = e[:, 0], e[:, 1]
    cur = C[a, b]
    base = cur[:, None] + cur[None, :]
    alts = [C[a[:, None], b[None, :]] + C[a[None, :], b[:, None]]]
    if not config.two_colour:
        alts.append(C[a[:, None], a[None, :]] + C[b[:, None], b[None, :]])
    iu = np.triu_indices(len(e), 1)
    scale = np.maximum(1.0, np.abs(base[iu]))
    for alt in alts:
        if np.any(np.abs(alt[iu] - base[iu]) <= EPS_TIE * scale):
            return True
    return False


# ------------------------------------------------------------------- oracle


@lru_cache(maxsize=None)
def _injections(n_small: int, n_large: int) -> np.ndarray:
    rows = list(itertools.permutations(range(n_large), n_small))
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), n_small)


def _pairings(items: tuple) -> list:
    if len(items) < 2:
        return [[]]
    first, rest = items[0], items[1:]
    out = []
    for k, other in enumerate(rest):
        remaining = rest[:k] + rest[k + 1 :]
        for tail in _pairings(remaining):
            out.append([(first, other)] + tail)
    return out


@lru_cache(maxsize=None)
def _max_pairings(n: int) -> np.ndarray:
    """All maximum matchings of n labelled points as an (M, n//2, 2) array."""
    pts = tuple(range(n))
    if n % 2 == 0:
        rows = _pairings(pts)
    else:
        rows = []
        for u in pts:
            rows.extend(_pairings(tuple(p for p in pts if p != u)))
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), n // 2, 2)


def _enumerate(config: PointConfig) -> np.ndarray:
    """Every maximum-cardinality matching as an (M, k, 2) array of index pairs."""
    if config.two_colour:
        nr, nb = config.n_red, config.n_blue
        if nr <= nb:
            inj = _injections(nr, nb)
            reds = np.broadcast_to(np.arange(nr), inj.shape)
            return np.stack([reds, inj], axis=2)
        inj = _injections(nb, nr)
        blues = np.broadcast_to(np.arange(nb), inj.shape)
        return np.stack([inj, blues], axis=2)
    return _max_pairings(config.n_red)


def _scores(spec: CostSpec, config: PointConfig, E: np.ndarray):
    D = _distance_matrix(config)
    if E.shape[1] == 0:
        return np.zeros((len(E), 0))
    return D[E[:, :, 0], E[:, :, 1]]


def oracle_min(spec: CostSpec, config: PointConfig) -> frozenset:
    """All score-minimal matchings (within the tie tolerance), by exhaustive enumeration.

    Only matchings with the fewest unmatched points are enumerated; any matching
    with more unmatched points is worse by the lexicographic rule.
    """
    spec = CostSpec.parse(spec)
    if config.n_points > ORACLE_MAX:
        raise TooLarge(f"oracle limited to {ORACLE_MAX} points")
    if config.n_points == 0:
        return frozenset([_empty(config)])
    E = _enumerate(config)
    L = _scores(spec, config, E)
    if spec.kind in (NEG_INF, POS_INF):
        S = np.sort(L, axis=1)
        if spec.kind == POS_INF:
            S = S[:, ::-1]
        order = np.lexsort(S.T[::-1]) if S.shape[1] else np.arange(len(S))
        best = S[order[0]]
        close = np.all(np.abs(S - best) <= EPS_TIE * np.maximum(1.0, np.abs(best)), axis=1) if S.shape[1] else np.ones(len(S), bool)
        cand = np.nonzero(close)[0]
    else:
        C = cost_array(spec.sum_gamma, L).sum(axis=1)
        cmin = C.min()
        cand = np.nonzero(C <= cmin + 1e-9 * max(1.0, abs(cmin)))[0]
    matchings = [Matching.from_edges(config, E[k].tolist()) for k in cand]
    scored = [(m, score(spec, config, m, validate=False)) for m in matchings]
    best_s = scored[0][1]
    for _, s in scored[1:]:
        if compare(spec, s, best_s) == LESS:
            best_s = s
    return frozenset(m for m, s in scored if compare(spec, s, best_s) == EQUAL)


def detect_tie(spec: CostSpec, config: PointConfig) -> bool:
    """True iff two distinct matchings share the optimal score within the tie tolerance."""
    return len(oracle_min(spec, config)) > 1


def solve_stable(config: PointConfig, check: bool = True) -> Matching:
    """The stable matching: repeatedly match mutually nearest eligible points."""
    if config.n_points == 0:
        return _empty(config)
    if check:
        D = _distance_matrix(config)
        vals = D.ravel() if config.two_colour else D[np.triu_indices(config.n_red, 1)]
        vals = np.sort(vals)
        if len(vals) > 1 and np.any(np.diff(vals) <= EPS_TIE * np.maximum(vals[1:], 1.0)):
            raise DegenerateDistances("two eligible pairs have equal distance")
    return Matching.from_edges(config, _greedy_shortest(config))


def tile_match(spec: CostSpec, config: PointConfig, tile_size: float, offset=None) -> Matching:
    """Solve independently inside each cube of the grid of side tile_size shifted by offset."""
    if not tile_size > 0:
        raise InvalidParameter("tile_size must be positive")
    spec = CostSpec.parse(spec)
    off = np.zeros(config.dim) if offset is None else np.asarray(offset, dtype=float).reshape(config.dim)

    def cells(pts):
        pts = pts.reshape(len(pts), config.dim)
        return [tuple(c) for c in np.floor((pts - off) / tile_size).astype(np.int64).tolist()]

    groups: dict = {}
    for i, c in enumerate(cells(config.red)):
        groups.setdefault(c, ([], []))[0].append(i)
    if config.two_colour:
        for j, c in enumerate(cells(config.blue)):
            groups.setdefault(c, ([], []))[1].append(j)
    edges = []
    tie = False
    for c in sorted(groups):
        ri, bi = groups[c]
        sub = config.subset(ri, bi)
        m = solve_min(spec, sub)
        tie = tie or m.tie
        for i, j in m.edges:
            if config.two_colour:
                edges.append((ri[i], bi[j]))
            else:
                edges.append((ri[i], ri[j]))
    return Matching.from_edges(config, edges, tie)
