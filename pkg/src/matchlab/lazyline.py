"""Poisson points on a long interval of the line, sampled only where queried.

The interval [-half_width, half_width] is covered by blocks whose sizes
double away from the origin. Each block first receives Poisson counts of red
and blue points; a block is split in half (binomial thinning of its counts)
only when a query cannot be answered from the counts alone, and blocks with
few points get explicit uniform positions. Walk queries use the bound that
inside a block the walk stays within [w - #blue, w + #red] of its entry value
w, which lets them skip most of a long excursion.

The realized configuration is a function of the seed and of the sequence of
queries made; repeating the same queries reproduces it exactly.
"""
from __future__ import annotations

import bisect
import numpy as np

from .errors import InvalidParameter, WindowTooSmall
from .points import ONE_COLOUR, TWO_COLOUR, PointConfig, as_seed

LEAF = 24
_PALM_HI = 5e-324


class _Node:
    __slots__ = ("lo", "hi", "nr", "nb", "net", "kids", "pos", "step", "cum")

    def __init__(self, lo, hi, nr, nb):
        self.lo = lo
        self.hi = hi
        self.nr = nr
        self.nb = nb
        self.net = nr - nb
        self.kids = None
        self.pos = None
        self.step = None
        self.cum = None


class LazyLine:
    def __init__(self, half_width: float, seed, intensity: float = 1.0, mode: str = TWO_COLOUR,
                 palm: bool = False, first_block: float = 1.0):
        if not half_width > 0 or not intensity > 0 or not first_block > 0:
            raise InvalidParameter("half_width, intensity and first_block must be positive")
        self.half_width = float(half_width)
        self.mode = mode
        self.palm = palm
        self.rng = as_seed(seed).generator()
        edges = [0.0]
        size = float(first_block)
        while edges[-1] < self.half_width:
            edges.append(min(edges[-1] + size, self.half_width))
            size *= 2.0
        lengths = np.diff(edges)
        k = len(lengths)
        lam = intensity * np.concatenate([lengths[::-1], lengths])
        nr = self.rng.poisson(lam)
        nb = self.rng.poisson(lam) if mode == TWO_COLOUR else np.zeros(2 * k, dtype=np.int64)
        nodes = []
        for i in range(k):
            j = k - 1 - i
            nodes.append(_Node(-edges[j + 1], -edges[j], int(nr[i]), int(nb[i])))
        if palm:
            p = _Node(0.0, _PALM_HI, 1, 0)
            p.pos, p.step, p.cum = [0.0], [1], [0, 1]
            nodes.append(p)
        for i in range(k):
            nodes.append(_Node(edges[i], edges[i + 1], int(nr[k + i]), int(nb[k + i])))
        self._top = nodes
        self._starts = [n.lo for n in nodes]
        # anchor W(0-) = 0: the value before the leftmost block is minus the
        # net count of everything left of the origin
        w = -sum(n.net for n in nodes if n.hi <= 0.0)
        w_in = []
        for n in nodes:
            w_in.append(w)
            w += n.net
        self._w_in = w_in
        self.expansions = 0

    # ------------------------------------------------------------ internals

    def _expand(self, node: _Node) -> None:
        self.expansions += 1
        n = node.nr + node.nb
        rng = self.rng
        if n <= LEAF:
            pos = np.sort(rng.uniform(node.lo, node.hi, n))
            step = np.where(rng.permutation(n) < node.nr, 1, -1)
            node.pos = pos.tolist()
            node.step = step.tolist()
            cum = [0]
            c = 0
            for s in node.step:
                c += s
                cum.append(c)
            node.cum = cum
            return
        mid = 0.5 * (node.lo + node.hi)
        a = int(rng.binomial(node.nr, 0.5)) if node.nr else 0
        b = int(rng.binomial(node.nb, 0.5)) if node.nb else 0
        node.kids = (_Node(node.lo, mid, a, b), _Node(mid, node.hi, node.nr - a, node.nb - b))

    def _check(self, x: float) -> None:
        if not -self.half_width <= x <= self.half_width:
            raise WindowTooSmall(f"{x} outside [-{self.half_width}, {self.half_width}]")

    def _value(self, x: float, strict: bool) -> int:
        self._check(x)
        if strict:
            k = bisect.bisect_left(self._starts, x) - 1
        else:
            k = bisect.bisect_right(self._starts, x) - 1
        if k < 0:
            return self._w_in[0]
        node = self._top[k]
        w = self._w_in[k]
        while True:
            if node.kids is None and node.pos is None:
                if node.nr + node.nb == 0:
                    return w
                self._expand(node)
            if node.pos is not None:
                c = bisect.bisect_left(node.pos, x) if strict else bisect.bisect_right(node.pos, x)
                return w + node.cum[c]
            left, right = node.kids
            if x < right.lo:
                node = left
            else:
                w += left.net
                node = right

    def _scan(self, x0: float, x1: float, prune, reverse: bool = False):
        """Yield (position, step, value before) for points in [x0, x1], skipping pruned blocks."""
        starts = self._starts
        k0 = max(bisect.bisect_right(starts, x0) - 2, 0)
        k1 = min(bisect.bisect_right(starts, x1), len(starts))
        ks = range(k0, k1)
        if reverse:
            ks = reversed(ks)
        for k in ks:
            stack = [(self._top[k], self._w_in[k])]
            while stack:
                node, w = stack.pop()
                if node.hi <= x0 or node.lo > x1 or node.nr + node.nb == 0 or prune(w, node):
                    continue
                if node.kids is None and node.pos is None:
                    self._expand(node)
                if node.pos is not None:
                    pos, step, cum = node.pos, node.step, node.cum
                    rng_i = range(len(pos) - 1, -1, -1) if reverse else range(len(pos))
                    for i in rng_i:
                        p = pos[i]
                        if x0 <= p <= x1:
                            yield p, step[i], w + cum[i]
                    continue
                left, right = node.kids
                if reverse:
                    stack.append((left, w))
                    stack.append((right, w + left.net))
                else:
                    stack.append((right, w + left.net))
                    stack.append((left, w))

    # --------------------------------------------------------------- queries

    def covers(self, lo: float, hi: float) -> bool:
        return -self.half_width <= lo and hi <= self.half_width

    def value(self, x: float) -> int:
        """W(x), right-continuous."""
        return self._value(x, strict=False)

    def value_left(self, x: float) -> int:
        """W(x-)."""
        return self._value(x, strict=True)

    def positive_on(self, lo: float, hi: float, thresh: int = 0) -> bool:
        if self.value(lo) <= thresh:
            return False
        prune = lambda w, n: n.nb == 0 or w - n.nb > thresh
        for p, s, wb in self._scan(lo, hi, prune):
            if p > lo and wb + s <= thresh:
                return False
        return True

    def first_hit(self, target: int, after: float):
        self._check(after)
        prune = lambda w, n: not (w - n.nb <= target <= w + n.nr)
        for p, s, wb in self._scan(after, self.half_width, prune):
            if p > after and wb + s == target:
                return p
        return None

    def last_hit_before(self, target: int, before: float):
        """Largest point p < before with W(p) == target."""
        self._check(before)
        prune = lambda w, n: not (w - n.nb <= target <= w + n.nr)
        for p, s, wb in self._scan(-self.half_width, before, prune, reverse=True):
            if p < before and wb + s == target:
                return p
        return None

    def first_point_at_or_after(self, x: float):
        self._check(x)
        for p, s, _ in self._scan(x, self.half_width, lambda w, n: False):
            if p >= x:
                return p, s
        return None

    def last_point_before(self, x: float):
        self._check(x)
        for p, s, _ in self._scan(-self.half_width, x, lambda w, n: False, reverse=True):
            if p < x:
                return p, s
        return None

    def level_points(self, k: int, lo: float, hi: float):
        """(positions, colours) of level-k points strictly inside (lo, hi)."""
        prune = lambda w, n: w + n.nr < k + 1 or w - n.nb > k
        ps, cs = [], []
        for p, s, wb in self._scan(lo, hi, prune):
            if lo < p < hi and min(wb, wb + s) == k:
                ps.append(p)
                cs.append(s)
        return np.asarray(ps, dtype=float), np.asarray(cs, dtype=np.int64)

    def next_level_point(self, k: int, after: float, reverse: bool = False):
        """Nearest level-k point strictly after (or before, if reverse) a position."""
        prune = lambda w, n: w + n.nr < k + 1 or w - n.nb > k
        if reverse:
            it = self._scan(-self.half_width, after, prune, reverse=True)
        else:
            it = self._scan(after, self.half_width, prune)
        for p, s, wb in it:
            if (p < after if reverse else p > after) and min(wb, wb + s) == k:
                return p, s
        return None

    def points(self, lo: float, hi: float):
        """(positions, steps) of all points in [lo, hi]."""
        ps, ss = [], []
        for p, s, _ in self._scan(lo, hi, lambda w, n: False):
            ps.append(p)
            ss.append(s)
        return np.asarray(ps, dtype=float), np.asarray(ss, dtype=np.int64)

    def materialize(self, lo: float, hi: float) -> PointConfig:
        """The realized points in [lo, hi] as an explicit configuration."""
        self._check(lo)
        self._check(hi)
        ps, ss = self.points(lo, hi)
        red = ps[ss > 0]
        blue = ps[ss < 0]
        mode = ONE_COLOUR if self.mode == ONE_COLOUR else TWO_COLOUR
        return PointConfig(1, (lo, hi), red, blue, mode)

    def total_counts(self):
        return sum(n.nr for n in self._top), sum(n.nb for n in self._top)

