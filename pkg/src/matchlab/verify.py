"""Stability, quasistability and local minimality checks for any matching."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .costs import GREATER, CostSpec, compare, score
from .errors import InvalidParameter
from .finite_match import ORACLE_MAX, Matching, oracle_min
from .points import PointConfig, as_seed


@dataclass
class Report:
    predicate: str
    result: bool
    witness: object = None
    checked: int = 0
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.result

    def to_dict(self) -> dict:
        return {
            "predicate": self.predicate,
            "result": self.result,
            "witness": self.witness,
            "subsets_checked": self.checked,
            **self.details,
        }


def _boundary(m, colour: str) -> set:
    return set(getattr(m, "boundary_red" if colour == "r" else "boundary_blue", ()))


def partner_distances(config: PointConfig, m):
    """Distance of every point to its partner (inf when unmatched, nan on the boundary)."""
    d = config.dim
    red = config.red.reshape(config.n_red, d)
    pr = np.full(config.n_red, np.inf)
    if config.two_colour:
        blue = config.blue.reshape(config.n_blue, d)
        pb = np.full(config.n_blue, np.inf)
        for i, j in m.edges:
            pr[i] = pb[j] = float(np.sqrt(((red[i] - blue[j]) ** 2).sum()))
        pb[list(_boundary(m, "b"))] = np.nan
    else:
        pb = np.zeros(0)
        for i, j in m.edges:
            pr[i] = pr[j] = float(np.sqrt(((red[i] - red[j]) ** 2).sum()))
    pr[list(_boundary(m, "r"))] = np.nan
    return pr, pb


def _stability(config: PointConfig, m, factor: float, name: str, pairs=None) -> Report:
    """Pairs (x, y) not matched together with |x-M(x)| ^ |y-M(y)| > factor |x-y| violate."""
    pr, pb = partner_distances(config, m)
    d = config.dim
    red = config.red.reshape(config.n_red, d)
    if config.two_colour:
        other, po = config.blue.reshape(config.n_blue, d), pb
        tag = "b"
    else:
        other, po = red, pr
        tag = "r"
    mates = set(m.edges)
    if pairs is None:
        if len(red) == 0 or len(other) == 0:
            return Report(name, True, checked=0)
        D = np.sqrt(((red[:, None, :] - other[None, :, :]) ** 2).sum(axis=2))
        M = np.minimum(pr[:, None], po[None, :])
        with np.errstate(invalid="ignore"):
            bad = M > factor * D
        bad &= ~np.isnan(M)
        if not config.two_colour:
            bad = np.triu(bad, 1)
        for i, j in mates:
            bad[i, j] = False
            if not config.two_colour:
                bad[j, i] = False
        hits = np.argwhere(bad)
        checked = int(bad.size)
        if len(hits):
            i, j = hits[0].tolist()
            return Report(name, False, [["r", i], [tag, j]], checked)
        return Report(name, True, None, checked)
    checked = 0
    for i, j in pairs:
        if (i, j) in mates or (not config.two_colour and (j, i) in mates) or (not config.two_colour and i == j):
            continue
        a, b = pr[i], po[j]
        if np.isnan(a) or np.isnan(b):
            continue
        checked += 1
        dist = float(np.sqrt(((red[i] - other[j]) ** 2).sum()))
        if min(a, b) > factor * dist:
            return Report(name, False, [["r", int(i)], [tag, int(j)]], checked)
    return Report(name, True, None, checked)


def is_stable(config: PointConfig, m, pairs=None) -> Report:
    return _stability(config, m, 1.0, "stable", pairs)


def is_quasistable(config: PointConfig, m, kappa: float, pairs=None) -> Report:
    if not kappa > 0:
        raise InvalidParameter("kappa must be positive")
    return _stability(config, m, float(kappa), "quasistable", pairs)


def _units(config: PointConfig, m):
    """Edges and unmatched points as closed units (boundary points excluded)."""
    units = [("e", i, j) for i, j in m.edges]
    units += [("ur", i) for i in m.unmatched_red]
    units += [("ub", j) for j in m.unmatched_blue]
    return units


def _restrict(config: PointConfig, units):
    reds, blues, edges = set(), set(), []
    for u in units:
        if u[0] == "e":
            reds.add(u[1])
            (blues if config.two_colour else reds).add(u[2])
            edges.append((u[1], u[2]))
        elif u[0] == "ur":
            reds.add(u[1])
        else:
            blues.add(u[1])
    ri, bi = sorted(reds), sorted(blues)
    sub = config.subset(ri, bi)
    rmap = {v: k for k, v in enumerate(ri)}
    bmap = {v: k for k, v in enumerate(bi)} if config.two_colour else rmap
    sub_edges = [(rmap[i], bmap[j]) for i, j in edges]
    return sub, Matching.from_edges(sub, sub_edges), ri, bi


def _subset_ok(spec, config, units):
    sub, restricted, ri, bi = _restrict(config, units)
    best = next(iter(oracle_min(spec, sub)))
    s_best = score(spec, sub, best, validate=False)
    s_mine = score(spec, sub, restricted, validate=False)
    return compare(spec, s_mine, s_best) != GREATER, ri, bi


def is_gamma_minimal_local(spec, config: PointConfig, m, subset_cap: int = 6, samples: int = 200,
                           seed=0, exhaustive: bool = False) -> Report:
    """Check that the restriction of m to compatible subsets is minimal.

    All pairs of units (an edge or an unmatched point) are checked; larger
    subsets of up to ``subset_cap`` points are sampled at random (or all of
    them when ``exhaustive``).
    """
    spec = CostSpec.parse(spec)
    if subset_cap > ORACLE_MAX:
        raise InvalidParameter(f"subset_cap must be at most {ORACLE_MAX}")
    units = _units(config, m)
    size = lambda u: 2 if u[0] == "e" else 1
    checked = 0

    def fail(ri, bi):
        return Report("gamma-minimal-local", False, {"red": ri, "blue": bi}, checked)

    for a, b in itertools.combinations(units, 2):
        if size(a) + size(b) > subset_cap:
            continue
        checked += 1
        ok, ri, bi = _subset_ok(spec, config, [a, b])
        if not ok:
            return fail(ri, bi)
    if exhaustive:
        for r in range(3, len(units) + 1):
            for combo in itertools.combinations(units, r):
                if sum(map(size, combo)) > subset_cap:
                    continue
                checked += 1
                ok, ri, bi = _subset_ok(spec, config, list(combo))
                if not ok:
                    return fail(ri, bi)
    elif len(units) >= 3 and subset_cap >= 3:
        rng = as_seed(seed).generator()
        for _ in range(samples):
            order = rng.permutation(len(units))
            chosen, total = [], 0
            for k in order.tolist():
                if total + size(units[k]) <= subset_cap:
                    chosen.append(units[k])
                    total += size(units[k])
            if len(chosen) < 3:
                continue
            checked += 1
            ok, ri, bi = _subset_ok(spec, config, chosen)
            if not ok:
                return fail(ri, bi)
    return Report("gamma-minimal-local", True, None, checked)
