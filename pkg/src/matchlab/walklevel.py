"""The red-minus-blue counting walk on the line and its level decomposition."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, InvalidParameter, WindowTooSmall
from .points import PointConfig

RED, BLUE = 1, -1


@dataclass(frozen=True, eq=False)
class Walk:
    """Jump representation of W, normalized so that W(0-) = 0.

    ``values[i]`` is the value just after the jump at ``positions[i]``;
    ``base`` is the value left of the first jump. ``index[i]`` is the index
    of the jump point within its colour array.
    """

    positions: np.ndarray
    steps: np.ndarray
    values: np.ndarray
    base: int
    window: tuple
    index: np.ndarray

    @property
    def before(self) -> np.ndarray:
        if len(self.values) == 0:
            return self.values
        return np.concatenate([[self.base], self.values[:-1]])

    @property
    def levels(self) -> np.ndarray:
        return np.minimum(self.before, self.values)

    def value(self, x: float) -> int:
        i = int(np.searchsorted(self.positions, x, side="right"))
        return int(self.base if i == 0 else self.values[i - 1])

    def value_left(self, x: float) -> int:
        i = int(np.searchsorted(self.positions, x, side="left"))
        return int(self.base if i == 0 else self.values[i - 1])

    def covers(self, lo: float, hi: float) -> bool:
        return self.window[0] <= lo and hi <= self.window[1]

    def positive_on(self, lo: float, hi: float, thresh: int = 0) -> bool:
        """W(t) > thresh for every t in [lo, hi]."""
        if self.value(lo) <= thresh:
            return False
        i0 = np.searchsorted(self.positions, lo, side="right")
        i1 = np.searchsorted(self.positions, hi, side="right")
        return bool(np.all(self.values[i0:i1] > thresh))

    def first_hit(self, target: int, after: float):
        i0 = int(np.searchsorted(self.positions, after, side="right"))
        hits = np.flatnonzero(self.values[i0:] == target)
        if len(hits) == 0:
            return None
        return float(self.positions[i0 + hits[0]])

    def first_point_at_or_after(self, x: float):
        i = int(np.searchsorted(self.positions, x, side="left"))
        if i >= len(self.positions):
            return None
        return float(self.positions[i]), int(self.steps[i])

    def level_points(self, k: int, lo: float, hi: float):
        """(positions, colours) of level-k points strictly inside (lo, hi)."""
        i0 = np.searchsorted(self.positions, lo, side="right")
        i1 = np.searchsorted(self.positions, hi, side="left")
        sel = np.flatnonzero(self.levels[i0:i1] == k) + i0
        return self.positions[sel], self.steps[sel]

    def jump_index(self, x: float) -> int:
        """Index of the jump located exactly at x."""
        i = int(np.searchsorted(self.positions, x, side="left"))
        if i >= len(self.positions) or self.positions[i] != x:
            raise InvalidParameter(f"no point at {x}")
        return i

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["position", "value"])
        w.writerow([repr(float(self.window[0])), int(self.base)])
        for p, v in zip(self.positions.tolist(), self.values.tolist()):
            w.writerow([repr(float(p)), int(v)])
        return buf.getvalue()


@dataclass(frozen=True)
class LevelAssignment:
    red: np.ndarray
    blue: np.ndarray

    def level_of(self, colour: int, i: int) -> int:
        return int(self.red[i] if colour == RED else self.blue[i])


def build_walk(config: PointConfig) -> Walk:
    if config.dim != 1 or not config.two_colour:
        raise InvalidInput("the walk needs a one-dimensional two-colour configuration")
    pos = np.concatenate([config.red, config.blue])
    steps = np.concatenate([np.full(config.n_red, RED, dtype=np.int64), np.full(config.n_blue, BLUE, dtype=np.int64)])
    idx = np.concatenate([np.arange(config.n_red), np.arange(config.n_blue)])
    order = np.argsort(pos, kind="stable")
    pos, steps, idx = pos[order], steps[order], idx[order]
    base = -int(steps[pos < 0].sum())
    values = base + np.cumsum(steps)
    for arr in (pos, steps, values, idx):
        arr.setflags(write=False)
    return Walk(pos, steps, values, base, config.window[0], idx)


def assign_levels(walk: Walk, config: PointConfig) -> LevelAssignment:
    lv = walk.levels
    red = np.empty(config.n_red, dtype=np.int64)
    blue = np.empty(config.n_blue, dtype=np.int64)
    is_red = walk.steps == RED
    red[walk.index[is_red]] = lv[is_red]
    blue[walk.index[~is_red]] = lv[~is_red]
    return LevelAssignment(red, blue)


def first_hit(walk: Walk, target: int, start: float):
    """Least jump position > start where the walk takes the value ``target``."""
    return walk.first_hit(target, start)


def scale_grid(a: float, max_n: int) -> list[float]:
    return [(3.0 * a) ** n for n in range(max_n + 1)]


def find_scale(w, q: float, a: float, max_n: int, min_n: int = 0):
    """Smallest Y=(3a)^n, min_n <= n <= max_n, with W - W(q-) > 0 on [q-aY, q-Y] and [q+Y, q+aY].

    ``w`` is any walk-like object (explicit or lazily sampled).
    """
    if not a > 1:
        raise InvalidParameter("a must exceed 1")
    reach = a * (3.0 * a) ** max_n
    if not w.covers(q - reach, q + reach):
        raise WindowTooSmall(f"walk does not cover [{q - reach}, {q + reach}]")
    base = w.value_left(q)
    for y in scale_grid(a, max_n)[min_n:]:
        ends = (q - a * y, q - y, q + y, q + a * y)
        if any(w.value(t) <= base for t in ends):
            continue
        if w.positive_on(q - a * y, q - y, base) and w.positive_on(q + y, q + a * y, base):
            return y
    return None


def find_Y(walk: Walk, a: float, max_n: int):
    return find_scale(walk, 0.0, a, max_n)
