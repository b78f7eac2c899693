"""Colour-tagged point configurations on boxes, Poisson sampling and seeding."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInput, InvalidParameter, InvalidWindow, OriginOccupied

EPS_TIE = 1e-12
ONE_COLOUR = "one-colour"
TWO_COLOUR = "two-colour"
MODES = (ONE_COLOUR, TWO_COLOUR)

# rejection of near-equal distances is O(N^2 log N); above this many points
# it is skipped (coincidences then surface as solver tie flags instead)
DISTINCT_CHECK_MAX = 400
_MAX_RESAMPLE = 1000


@dataclass(frozen=True)
class Seed:
    """A 64-bit seed value plus a substream index.

    Generators are PCG64 seeded through ``SeedSequence(value, spawn_key=(stream,))``,
    whose output numpy keeps stable across releases.
    """

    value: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= int(self.value) < 2**64:
            raise InvalidParameter("seed value must be a 64-bit unsigned integer")
        if int(self.stream) < 0:
            raise InvalidParameter("stream must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.value), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, i: int) -> "Seed":
        return Seed(self.value, i)


def as_seed(seed) -> Seed:
    if isinstance(seed, Seed):
        return seed
    if isinstance(seed, (int, np.integer)):
        return Seed(int(seed), 0)
    raise InvalidParameter(f"cannot interpret {seed!r} as a seed")


def normalize_window(window, dim: int | None = None) -> tuple[tuple[float, float], ...]:
    """Return the window as a tuple of (lo, hi) pairs, one per axis."""
    arr = np.asarray(window, dtype=float)
    if arr.ndim == 1:
        if arr.shape != (2,):
            raise InvalidWindow(f"bad window {window!r}")
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidWindow(f"bad window {window!r}")
    if dim is not None and arr.shape[0] == 1 and dim > 1:
        arr = np.repeat(arr, dim, axis=0)
    if dim is not None and arr.shape[0] != dim:
        raise InvalidWindow("window dimension does not match dim")
    if not np.all(np.isfinite(arr)) or np.any(arr[:, 1] <= arr[:, 0]):
        raise InvalidWindow(f"degenerate window {window!r}")
    return tuple((float(lo), float(hi)) for lo, hi in arr)


def _as_points(pts, dim: int) -> np.ndarray:
    arr = np.asarray(pts, dtype=float)
    if dim == 1:
        arr = arr.reshape(-1)
    else:
        arr = arr.reshape(-1, dim)
    return arr


@dataclass(frozen=True, eq=False)
class PointConfig:
    """Red and blue points in an axis-aligned box.

    In d=1 the coordinate arrays are 1-d and strictly increasing; in d>=2
    they have shape (n, d) and are sorted lexicographically. One-colour
    configurations keep all points in ``red``.
    """

    dim: int
    window: tuple
    red: np.ndarray
    blue: np.ndarray
    mode: str = TWO_COLOUR

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInput("dim must be positive")
        if self.mode not in MODES:
            raise InvalidInput(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "window", normalize_window(self.window, self.dim))
        red = _as_points(self.red, self.dim)
        blue = _as_points(self.blue, self.dim)
        if self.mode == ONE_COLOUR and len(blue):
            raise InvalidInput("one-colour configuration with blue points")
        for arr, name in ((red, "red"), (blue, "blue")):
            if not np.all(np.isfinite(arr)):
                raise InvalidInput(f"non-finite {name} coordinate")
            coords = arr.reshape(len(arr), self.dim)
            lo = np.array([w[0] for w in self.window])
            hi = np.array([w[1] for w in self.window])
            if np.any(coords < lo) or np.any(coords > hi):
                raise InvalidInput(f"{name} point outside window")
            if self.dim == 1:
                if np.any(np.diff(arr) <= 0):
                    raise InvalidInput(f"{name} points not strictly sorted")
            elif len(arr) > 1:
                order = np.lexsort(arr.T[::-1])
                if np.any(order != np.arange(len(arr))):
                    raise InvalidInput(f"{name} points not sorted")
                if np.any(np.all(np.diff(arr, axis=0) == 0, axis=1)):
                    raise InvalidInput(f"repeated {name} point")
        if len(red) and len(blue):
            if self.dim == 1:
                if np.intersect1d(red, blue).size:
                    raise InvalidInput("a red point equals a blue point")
            else:
                both = np.vstack([red, blue])
                if len(np.unique(both, axis=0)) < len(both):
                    raise InvalidInput("a red point equals a blue point")
        red.setflags(write=False)
        blue.setflags(write=False)
        object.__setattr__(self, "red", red)
        object.__setattr__(self, "blue", blue)

    @property
    def n_red(self) -> int:
        return len(self.red)

    @property
    def n_blue(self) -> int:
        return len(self.blue)

    @property
    def n_points(self) -> int:
        return len(self.red) + len(self.blue)

    @property
    def two_colour(self) -> bool:
        return self.mode == TWO_COLOUR

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.window]))

    def __eq__(self, other):
        if not isinstance(other, PointConfig):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.mode == other.mode
            and self.window == other.window
            and np.array_equal(self.red, other.red)
            and np.array_equal(self.blue, other.blue)
        )

    def __hash__(self):
        return hash((self.dim, self.mode, self.window, self.red.tobytes(), self.blue.tobytes()))

    def all_points(self) -> np.ndarray:
        """Red points followed by blue points (the joint index order for 1-colour solvers)."""
        if self.dim == 1:
            return np.concatenate([self.red, self.blue])
        return np.vstack([self.red.reshape(-1, self.dim), self.blue.reshape(-1, self.dim)])

    def scaled(self, s: float) -> "PointConfig":
        if s <= 0:
            raise InvalidParameter("scale must be positive")
        win = tuple((lo * s, hi * s) for lo, hi in self.window)
        return PointConfig(self.dim, win, self.red * s, self.blue * s, self.mode)

    def subset(self, red_idx, blue_idx=(), window=None) -> "PointConfig":
        red_idx = np.sort(np.asarray(red_idx, dtype=int))
        blue_idx = np.sort(np.asarray(blue_idx, dtype=int))
        return PointConfig(
            self.dim,
            self.window if window is None else window,
            self.red[red_idx],
            self.blue[blue_idx],
            self.mode,
        )


def make_config(red, blue=(), window=None, mode=None, dim=None) -> PointConfig:
    """Convenience constructor: sorts the inputs and infers dim, mode and window."""
    red = np.asarray(red, dtype=float)
    blue = np.asarray(blue, dtype=float)
    if dim is None:
        dim = 1 if red.ndim <= 1 and blue.ndim <= 1 else (red.shape[1] if red.ndim == 2 else blue.shape[1])
    if mode is None:
        mode = TWO_COLOUR if blue.size else ONE_COLOUR
    red = _sort_points(_as_points(red, dim), dim)
    blue = _sort_points(_as_points(blue, dim), dim)
    if window is None:
        both = np.concatenate([red.reshape(-1, dim), blue.reshape(-1, dim)])
        if len(both):
            lo, hi = both.min(axis=0), both.max(axis=0)
        else:
            lo, hi = np.zeros(dim), np.zeros(dim)
        window = [(a - 1.0, b + 1.0) for a, b in zip(lo, hi)]
    return PointConfig(dim, window, red, blue, mode)


def _sort_points(arr: np.ndarray, dim: int) -> np.ndarray:
    if dim == 1:
        return np.sort(arr)
    if len(arr) == 0:
        return arr.reshape(0, dim)
    return arr[np.lexsort(arr.T[::-1])]


def has_distinct_distances(config: PointConfig, eps: float = EPS_TIE) -> bool:
    """True when no two pairwise distances agree within relative tolerance eps."""
    pts = config.all_points().reshape(config.n_points, config.dim)
    n = len(pts)
    if n < 3:
        return True
    iu = np.triu_indices(n, 1)
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))[iu]
    d.sort()
    gaps = np.diff(d)
    return bool(np.all(gaps > eps * np.maximum(d[1:], 1.0)))


def _uniform(rng, window, n):
    lo = np.array([w[0] for w in window])
    hi = np.array([w[1] for w in window])
    pts = rng.uniform(lo, hi, size=(n, len(window)))
    return pts[:, 0] if len(window) == 1 else pts


def _draw(window, counts, mode, rng, dim) -> PointConfig:
    for _ in range(_MAX_RESAMPLE):
        nr, nb = counts(rng)
        red = _sort_points(_uniform(rng, window, nr), dim)
        blue = _sort_points(_uniform(rng, window, nb), dim)
        try:
            cfg = PointConfig(dim, window, red, blue, mode)
        except InvalidInput:
            continue  # coincident coordinates; measure zero but possible in floats
        if cfg.n_points > DISTINCT_CHECK_MAX or has_distinct_distances(cfg):
            return cfg
    raise InvalidParameter("could not draw a configuration with distinct distances")


def sample_poisson(window, intensity: float = 1.0, mode: str = TWO_COLOUR, seed=0, dim: int | None = None) -> PointConfig:
    """Independent Poisson processes of the given intensity per colour on ``window``."""
    if dim is None:
        dim = len(normalize_window(window))
    win = normalize_window(window, dim)
    if not intensity > 0:
        raise InvalidParameter("intensity must be positive")
    if mode not in MODES:
        raise InvalidParameter(f"unknown mode {mode!r}")
    mean = intensity * float(np.prod([hi - lo for lo, hi in win]))
    rng = as_seed(seed).generator()

    def counts(g):
        nr = int(g.poisson(mean))
        nb = int(g.poisson(mean)) if mode == TWO_COLOUR else 0
        return nr, nb

    return _draw(win, counts, mode, rng, dim)


def equal_count_pair(window, n: int, seed=0, dim: int | None = None) -> PointConfig:
    """Exactly n red and n blue uniform points."""
    if n < 1:
        raise InvalidParameter("n must be at least 1")
    return fixed_count(window, n, n, seed, dim)


def fixed_count(window, n_red: int, n_blue: int, seed=0, dim: int | None = None, mode: str | None = None) -> PointConfig:
    """Given numbers of uniform red and blue points (blue must be 0 in one-colour mode)."""
    if dim is None:
        dim = len(normalize_window(window))
    win = normalize_window(window, dim)
    if n_red < 0 or n_blue < 0:
        raise InvalidParameter("counts must be non-negative")
    if mode is None:
        mode = TWO_COLOUR if n_blue else ONE_COLOUR
    if mode == ONE_COLOUR and n_blue:
        raise InvalidParameter("one-colour mode takes no blue points")
    rng = as_seed(seed).generator()
    return _draw(win, lambda g: (n_red, n_blue), mode, rng, dim)


def palm_augment(config: PointConfig) -> PointConfig:
    """Insert a red point at the origin."""
    origin = np.zeros(config.dim)
    for lo, hi in config.window:
        if not lo <= 0.0 <= hi:
            raise InvalidWindow("window does not contain the origin")
    for arr in (config.red, config.blue):
        coords = arr.reshape(-1, config.dim)
        if len(coords) and np.any(np.all(coords == origin, axis=1)):
            raise OriginOccupied("a point already sits at the origin")
    if config.dim == 1:
        red = np.sort(np.append(config.red, 0.0))
    else:
        red = _sort_points(np.vstack([config.red.reshape(-1, config.dim), origin]), config.dim)
    return PointConfig(config.dim, config.window, red, config.blue, config.mode)


def config_to_dict(config: PointConfig) -> dict:
    win = [list(w) for w in config.window]
    return {
        "dim": config.dim,
        "window": win[0] if config.dim == 1 else win,
        "mode": config.mode,
        "red": config.red.tolist(),
        "blue": config.blue.tolist(),
    }


def config_from_dict(d: dict) -> PointConfig:
    try:
        dim = int(d.get("dim", 1))
        mode = d.get("mode", TWO_COLOUR)
        red = np.asarray(d.get("red", []), dtype=float)
        blue = np.asarray(d.get("blue", []), dtype=float)
        window = d["window"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed point configuration: {exc}") from exc
    return PointConfig(dim, window, _sort_points(_as_points(red, dim), dim), _sort_points(_as_points(blue, dim), dim), mode)


def sorted_union(config: PointConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """d=1 merged order: positions, colour (+1 red / -1 blue) and per-colour index."""
    pos = np.concatenate([config.red, config.blue])
    col = np.concatenate([np.ones(config.n_red, dtype=np.int64), -np.ones(config.n_blue, dtype=np.int64)])
    idx = np.concatenate([np.arange(config.n_red), np.arange(config.n_blue)])
    order = np.argsort(pos, kind="stable")
    return pos[order], col[order], idx[order]


__all__: Sequence[str] = [
    "EPS_TIE",
    "ONE_COLOUR",
    "TWO_COLOUR",
    "Seed",
    "PointConfig",
    "as_seed",
    "make_config",
    "sample_poisson",
    "equal_count_pair",
    "fixed_count",
    "palm_augment",
    "has_distinct_distances",
    "config_to_dict",
    "config_from_dict",
    "sorted_union",
]
