"""Power-law edge costs, matching scores and the lexicographic order on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidLength, InvalidMatching, InvalidPair, InvalidParameter, WrongKind
from .points import EPS_TIE, PointConfig

FINITE = "finite"
NEG_INF = "-inf"
POS_INF = "+inf"
ONE_MINUS = "1-"
ONE_PLUS = "1+"
KINDS = (FINITE, NEG_INF, POS_INF, ONE_MINUS, ONE_PLUS)

LESS, EQUAL, GREATER = -1, 0, 1


@dataclass(frozen=True)
class CostSpec:
    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown cost kind {self.kind!r}")
        if self.kind == FINITE:
            if self.gamma is None or not math.isfinite(self.gamma):
                raise InvalidParameter("finite kind needs a finite gamma")
            object.__setattr__(self, "gamma", float(self.gamma))
        elif self.gamma is not None:
            raise InvalidParameter("only the finite kind carries gamma")

    @classmethod
    def finite(cls, gamma: float) -> "CostSpec":
        return cls(FINITE, gamma)

    @classmethod
    def parse(cls, value) -> "CostSpec":
        """Accepts a number or one of "-inf", "+inf", "inf", "1-", "1+"."""
        if isinstance(value, CostSpec):
            return value
        if isinstance(value, str):
            s = value.strip().lower()
            if s in ("-inf", "-infinity"):
                return cls(NEG_INF)
            if s in ("+inf", "inf", "infinity", "+infinity"):
                return cls(POS_INF)
            if s == "1-":
                return cls(ONE_MINUS)
            if s == "1+":
                return cls(ONE_PLUS)
            try:
                value = float(s)
            except ValueError as exc:
                raise InvalidParameter(f"cannot parse gamma {value!r}") from exc
        value = float(value)
        if value == math.inf:
            return cls(POS_INF)
        if value == -math.inf:
            return cls(NEG_INF)
        return cls(FINITE, value)

    @property
    def label(self):
        """JSON form: a number for finite kinds, else the symbolic string."""
        return self.gamma if self.kind == FINITE else self.kind

    @property
    def is_one_pm(self) -> bool:
        return self.kind in (ONE_MINUS, ONE_PLUS)

    @property
    def sum_gamma(self) -> float | None:
        """The exponent whose cost sum is minimized (1 for the 1± kinds)."""
        if self.kind == FINITE:
            return self.gamma
        if self.is_one_pm:
            return 1.0
        return None

    def __str__(self):
        return str(self.label)


def cost_fn(gamma: float):
    if gamma > 0:
        return lambda x: x**gamma
    if gamma == 0:
        return math.log
    return lambda x: -(x**gamma)


def edge_cost(spec: CostSpec, length: float) -> float:
    if spec.kind != FINITE:
        raise WrongKind("edge_cost needs a finite kind")
    if not length > 0:
        raise InvalidLength("edge length must be positive")
    return cost_fn(spec.gamma)(float(length))


def cost_array(gamma: float, lengths: np.ndarray) -> np.ndarray:
    lengths = np.asarray(lengths, dtype=float)
    if gamma > 0:
        return lengths**gamma
    if gamma == 0:
        return np.log(lengths)
    return -(lengths**gamma)


@dataclass(frozen=True)
class MatchScore:
    kind: str
    unmatched: int
    cost: float | None = None
    lengths: tuple | None = None
    violation: bool | None = None

    def to_dict(self) -> dict:
        d = {"unmatched": self.unmatched}
        if self.lengths is not None:
            d["cost"] = list(self.lengths)
        else:
            d["cost"] = self.cost
        if self.violation is not None:
            d["violation"] = self.violation
        return d


def _dist(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    if p.ndim == 1:
        return np.abs(p - q)
    return np.sqrt(((p - q) ** 2).sum(axis=-1))


def edge_lengths(config: PointConfig, edges) -> np.ndarray:
    """Lengths of edges given as index pairs (red, blue) or (point, point) in one-colour mode."""
    if len(edges) == 0:
        return np.zeros(0)
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if config.two_colour:
        return _dist(config.red[e[:, 0]], config.blue[e[:, 1]])
    return _dist(config.red[e[:, 0]], config.red[e[:, 1]])


def edge_intervals(config: PointConfig, edges) -> np.ndarray:
    """d=1 edges as sorted (left, right) endpoint pairs."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    other = config.blue if config.two_colour else config.red
    x = config.red[e[:, 0]]
    y = other[e[:, 1]]
    return np.stack([np.minimum(x, y), np.maximum(x, y)], axis=1)


def has_entwined(intervals: np.ndarray) -> bool:
    """Whether some two intervals overlap without nesting (endpoints assumed distinct)."""
    if len(intervals) < 2:
        return False
    iv = intervals[np.argsort(intervals[:, 0], kind="stable")]
    stack: list[float] = []
    for lo, hi in iv:
        while stack and stack[-1] < lo:
            stack.pop()
        if stack and hi > stack[-1]:
            return True
        stack.append(hi)
    return False


def has_straddle(intervals: np.ndarray) -> bool:
    """Whether some interval contains another."""
    if len(intervals) < 2:
        return False
    iv = intervals[np.argsort(intervals[:, 0], kind="stable")]
    running = np.maximum.accumulate(iv[:, 1])
    return bool(np.any(iv[1:, 1] < running[:-1]))


def check_matching(config: PointConfig, m) -> None:
    """Raise InvalidMatching unless m is a well-formed matching of config."""
    nr = config.n_red
    nb = config.n_blue if config.two_colour else nr
    seen_r: set[int] = set()
    seen_b: set[int] = set()
    for i, j in m.edges:
        if config.two_colour:
            if not (0 <= i < nr and 0 <= j < nb) or i in seen_r or j in seen_b:
                raise InvalidMatching(f"bad edge {(i, j)}")
            seen_r.add(i)
            seen_b.add(j)
        else:
            if not (0 <= i < nr and 0 <= j < nr) or i == j or i in seen_r or j in seen_r:
                raise InvalidMatching(f"bad edge {(i, j)}")
            seen_r.update((i, j))
    if config.two_colour:
        ur, ub = set(m.unmatched_red), set(m.unmatched_blue)
        if ur != set(range(nr)) - seen_r or ub != set(range(nb)) - seen_b:
            raise InvalidMatching("unmatched sets disagree with edges")
    else:
        if m.unmatched_blue or set(m.unmatched_red) != set(range(nr)) - seen_r:
            raise InvalidMatching("unmatched set disagrees with edges")


def score(spec: CostSpec, config: PointConfig, m, validate: bool = True) -> MatchScore:
    """Lexicographic score of a matching: unmatched count, then the kind's payload."""
    if validate:
        check_matching(config, m)
    unmatched = len(m.unmatched_red) + len(m.unmatched_blue)
    lengths = edge_lengths(config, list(m.edges))
    if np.any(lengths <= 0):
        raise InvalidMatching("zero-length edge")
    if spec.kind == NEG_INF:
        return MatchScore(spec.kind, unmatched, lengths=tuple(sorted(lengths.tolist())))
    if spec.kind == POS_INF:
        return MatchScore(spec.kind, unmatched, lengths=tuple(sorted(lengths.tolist(), reverse=True)))
    cost = math.fsum(cost_array(spec.sum_gamma, lengths).tolist())
    if spec.kind == FINITE:
        return MatchScore(spec.kind, unmatched, cost=cost)
    violation = False
    if config.dim == 1 and len(m.edges) > 1:
        iv = edge_intervals(config, list(m.edges))
        violation = has_entwined(iv) if spec.kind == ONE_MINUS else has_straddle(iv)
    return MatchScore(spec.kind, unmatched, cost=cost, violation=violation)


def _cmp_real(x: float, y: float, eps: float) -> int:
    if abs(x - y) <= eps * max(1.0, abs(x), abs(y)):
        return EQUAL
    return LESS if x < y else GREATER


def compare(spec: CostSpec, a: MatchScore, b: MatchScore, eps: float = EPS_TIE) -> int:
    """LESS when a is strictly better than b, EQUAL within eps, GREATER otherwise."""
    if a.kind != spec.kind or b.kind != spec.kind:
        raise WrongKind("scores of a different kind")
    if a.unmatched != b.unmatched:
        return LESS if a.unmatched < b.unmatched else GREATER
    if spec.kind in (NEG_INF, POS_INF):
        # shorter sequence is padded with -inf entries
        n = max(len(a.lengths), len(b.lengths))
        pa = (-math.inf,) * (n - len(a.lengths)) + tuple(a.lengths)
        pb = (-math.inf,) * (n - len(b.lengths)) + tuple(b.lengths)
        if spec.kind == POS_INF:
            pa = tuple(a.lengths) + (-math.inf,) * (n - len(a.lengths))
            pb = tuple(b.lengths) + (-math.inf,) * (n - len(b.lengths))
        for x, y in zip(pa, pb):
            if x == y:
                continue
            if math.isinf(x) or math.isinf(y):
                return LESS if x < y else GREATER
            c = _cmp_real(x, y, eps)
            if c != EQUAL:
                return c
        return EQUAL
    c = _cmp_real(a.cost, b.cost, eps)
    if c != EQUAL or spec.kind == FINITE:
        return c
    if a.violation == b.violation:
        return EQUAL
    return LESS if not a.violation else GREATER


@dataclass(frozen=True)
class Arrangement:
    kind: str  # "separate" | "entwined" | "straddling"
    outer: int | None = None  # for straddling: 0 if the first edge is outer, 1 otherwise

    def __str__(self):
        if self.kind == "straddling":
            return f"straddling(outer={'e' if self.outer == 0 else 'f'})"
        return self.kind


SEPARATE = Arrangement("separate")
ENTWINED = Arrangement("entwined")


def arrangement(e, f) -> Arrangement:
    e0, e1 = sorted(map(float, e))
    f0, f1 = sorted(map(float, f))
    if len({e0, e1, f0, f1}) < 4:
        raise InvalidPair("edges share an endpoint")
    if e1 < f0 or f1 < e0:
        return SEPARATE
    if e0 < f0 and f1 < e1:
        return Arrangement("straddling", 0)
    if f0 < e0 and e1 < f1:
        return Arrangement("straddling", 1)
    return ENTWINED


# pairings of four ordered points p0<p1<p2<p3 and resulting edge lengths in
# terms of the gaps a,b,c
_PAIRINGS = {
    "separate": ((0, 1), (2, 3)),
    "entwined": ((0, 2), (1, 3)),
    "straddling": ((0, 3), (1, 2)),
}


def _pair_lengths(kind: str, a: float, b: float, c: float) -> tuple[float, float]:
    if kind == "separate":
        return a, c
    if kind == "entwined":
        return a + b, b + c
    return a + b + c, b


def _pair_score(spec: CostSpec, kind: str, lengths) -> MatchScore:
    if spec.kind == NEG_INF:
        return MatchScore(spec.kind, 0, lengths=tuple(sorted(lengths)))
    if spec.kind == POS_INF:
        return MatchScore(spec.kind, 0, lengths=tuple(sorted(lengths, reverse=True)))
    f = cost_fn(spec.sum_gamma)
    cost = math.fsum(f(x) for x in lengths)
    if spec.kind == FINITE:
        return MatchScore(spec.kind, 0, cost=cost)
    forbidden = "entwined" if spec.kind == ONE_MINUS else "straddling"
    return MatchScore(spec.kind, 0, cost=cost, violation=(kind == forbidden))


def pair_legal(spec: CostSpec, colours: str, arr, lengths: Sequence[float]) -> bool:
    """Whether two edges in arrangement ``arr`` can both belong to a minimal matching.

    ``colours`` lists the colours of the four ordered points ("rrbb", "rbrb", ...;
    any string of four equal letters means one-colour) and ``lengths`` gives the
    gaps (a, b, c) between consecutive points. The pairing is legal iff its
    colours are compatible and no other compatible pairing of the four points
    scores strictly better.
    """
    kind = arr.kind if isinstance(arr, Arrangement) else str(arr)
    if kind.startswith("straddling"):
        kind = "straddling"
    if kind not in _PAIRINGS:
        raise InvalidParameter(f"unknown arrangement {arr!r}")
    if len(colours) != 4:
        raise InvalidParameter("colours must describe four points")
    a, b, c = (float(x) for x in lengths)
    if min(a, b, c) <= 0:
        raise InvalidLength("gaps must be positive")
    one_colour = len(set(colours)) == 1

    def compatible(k):
        if one_colour:
            return True
        return all(colours[i] != colours[j] for i, j in _PAIRINGS[k])

    if not compatible(kind):
        return False
    mine = _pair_score(spec, kind, _pair_lengths(kind, a, b, c))
    for other in _PAIRINGS:
        if other == kind or not compatible(other):
            continue
        theirs = _pair_score(spec, other, _pair_lengths(other, a, b, c))
        if compare(spec, theirs, mine) == LESS:
            return False
    return True
