"""Monte Carlo estimates of partner distance, coding radius and hitting-time tails.

Every sample i draws from its own substream ``Seed(seed, i)``, so results do
not depend on the order (or process) in which samples are evaluated.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .costs import CostSpec
from .finite_match import solve_stable
from .lazyline import LazyLine
from .line_constructions import MINUS, PLUS, alternating, certify, coding_radius, kappa
from .points import ONE_COLOUR, TWO_COLOUR, Seed, as_seed

SCHEMES = ("alternating-mixture", "meshalkin", "level-matching", "finitary", "stable-1colour")
DEFAULT_HALF_WIDTH = 1e4
CENSOR_BUDGET = 0.01
BOOTSTRAP = 200


@dataclass
class TailEstimate:
    stat: str
    samples: int
    censored: int
    values: np.ndarray  # uncensored sample values, in sample order
    thresholds: np.ndarray
    ccdf: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    slope: float
    slope_ci: tuple
    fit_range: tuple
    extra: dict = field(default_factory=dict)

    @property
    def censored_fraction(self) -> float:
        return self.censored / self.samples if self.samples else 0.0

    @property
    def unreliable(self) -> bool:
        return self.censored_fraction > CENSOR_BUDGET

    def summary(self) -> dict:
        return {
            "stat": self.stat,
            "samples": self.samples,
            "censored": self.censored,
            "censored_fraction": self.censored_fraction,
            "unreliable": self.unreliable,
            "slope": self.slope,
            "slope_ci": list(self.slope_ci),
            "fit_range": list(self.fit_range),
            **self.extra,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["threshold", "ccdf", "ci_lo", "ci_hi"])
        for row in zip(self.thresholds, self.ccdf, self.ci_lo, self.ci_hi):
            w.writerow([format(float(v), ".17g") for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, default=float)


# ------------------------------------------------------------ fitting


def empirical_ccdf(values, thresholds) -> np.ndarray:
    """P(V > t) over the given (uncensored) values."""
    v = np.sort(np.asarray(values, dtype=float))
    t = np.asarray(thresholds, dtype=float)
    if len(v) == 0:
        return np.full(len(t), np.nan)
    return (len(v) - np.searchsorted(v, t, side="right")) / len(v)


def _lsq_slope(logt, logc):
    ok = np.isfinite(logc)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(logt[ok], logc[ok], 1)[0])


def fit_tail(values, thresholds, fit_range, seed=0, n_boot: int = BOOTSTRAP):
    """CCDF with bootstrap bands and the log-log least-squares slope over fit_range.

    Bootstrap resamples are drawn as multinomial counts over the bins cut by
    the thresholds, which is exactly equivalent to resampling the values for
    any statistic of counts above thresholds.
    """
    v = np.asarray(values, dtype=float)
    t = np.asarray(thresholds, dtype=float)
    n = len(v)
    ccdf = empirical_ccdf(v, t)
    lo, hi = fit_range
    sel = (t >= lo) & (t <= hi)
    logt = np.log(t[sel])
    with np.errstate(divide="ignore"):
        slope = _lsq_slope(logt, np.log(ccdf[sel]))
    if n == 0:
        nan = np.full(len(t), np.nan)
        return ccdf, nan, nan, math.nan, (math.nan, math.nan)
    # bin b holds values in (t_{b-1}, t_b]; last bin is above every threshold
    edges = np.searchsorted(np.sort(v), t, side="right")
    counts = np.diff(np.concatenate([[0], edges, [n]]))
    rng = as_seed(seed).generator()
    boot = rng.multinomial(n, counts / n, size=n_boot)
    above = n - np.cumsum(boot, axis=1)[:, : len(t)]
    bc = above / n
    ci_lo = np.quantile(bc, 0.025, axis=0)
    ci_hi = np.quantile(bc, 0.975, axis=0)
    with np.errstate(divide="ignore"):
        lb = np.log(bc[:, sel])
    slopes = np.array([_lsq_slope(logt, row) for row in lb])
    slopes = slopes[np.isfinite(slopes)]
    sci = (float(np.quantile(slopes, 0.025)), float(np.quantile(slopes, 0.975))) if len(slopes) else (math.nan, math.nan)
    return ccdf, ci_lo, ci_hi, slope, sci


def log_thresholds(lo: float, hi: float, per_decade: int = 8) -> np.ndarray:
    n = int(round(per_decade * math.log10(hi / lo))) + 1
    return np.logspace(math.log10(lo), math.log10(hi), n)


def running_mean(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return np.cumsum(v) / np.arange(1, len(v) + 1)


def prefix_growth(values, n1: int, n2: int) -> float:
    """Ratio of the mean over the first n2 values to the mean over the first n1."""
    v = np.asarray(values, dtype=float)
    return float(v[:n2].mean() / v[:n1].mean())


# ------------------------------------------------------------ per-sample


def _sample_alternating(seed: Seed, hw: float, **_):
    line = LazyLine(hw, seed, mode=ONE_COLOUR, palm=True)
    phase = PLUS if line.rng.random() < 0.5 else MINUS
    h = 4.0
    while True:
        h = min(h, hw)
        cfg = line.materialize(-h, h)
        wm = alternating(cfg, phase)
        o = int(np.searchsorted(cfg.red, 0.0))
        if o not in wm.boundary_red:
            for i, j in wm.edges:
                if o in (i, j):
                    return {"x": float(abs(cfg.red[j if i == o else i]))}
        if h >= hw:
            return {"x": None}
        h *= 4.0


def _sample_meshalkin(seed: Seed, hw: float, **_):
    line = LazyLine(hw, seed, palm=True)
    p = line.first_hit(0, 0.0)
    return {"x": p}


def _sample_level(seed: Seed, hw: float, k=0, **_):
    line = LazyLine(hw, seed, palm=True)
    # the origin is red with W(0-)=0, so it lies in level 0
    hit = line.next_level_point(0, 0.0, reverse=not (0 >= k))
    return {"x": None if hit is None else abs(hit[0])}


def _sample_finitary(seed: Seed, hw: float, spec=None, max_n=3, **_):
    line = LazyLine(hw, seed, palm=True)
    cert = certify(line, spec, 0.0, max_n)
    if cert is None:
        return {"x": None, "L": None}
    return {"x": cert.distance, "L": coding_radius(cert), "n": int(round(math.log(cert.Y) / math.log(3 * cert.a)))}


def _sample_stable1(seed: Seed, hw: float, **_):
    """Stable one-colour partner of the origin, accepted once it is shielded by long gaps.

    Edges shorter than t never cross a gap of length >= t, so if the partner of
    the origin at distance t is enclosed on both sides by gaps >= t inside the
    window, the greedy run on the window agrees with the whole line.
    """
    line = LazyLine(hw, seed, mode=ONE_COLOUR, palm=True)
    h = 8.0
    while True:
        h = min(h, hw)
        cfg = line.materialize(-h, h)
        m = solve_stable(cfg, check=False)
        o = int(np.searchsorted(cfg.red, 0.0))
        part = None
        for i, j in m.edges:
            if o in (i, j):
                part = j if i == o else i
        if part is not None:
            t = abs(cfg.red[part])
            lo, hi = min(o, part), max(o, part)
            gaps = np.diff(cfg.red)
            if np.any(gaps[:lo] >= t) and np.any(gaps[hi:] >= t):
                return {"x": float(t)}
        if h >= hw:
            return {"x": None}
        h *= 4.0


def _sample_T(seed: Seed, hw: float, **_):
    line = LazyLine(hw, seed)
    return {"x": line.first_hit(1, 0.0)}


_SAMPLERS = {
    "alternating-mixture": _sample_alternating,
    "meshalkin": _sample_meshalkin,
    "level-matching": _sample_level,
    "finitary": _sample_finitary,
    "stable-1colour": _sample_stable1,
    "T": _sample_T,
}


def _run_chunk(args):
    name, seed_value, lo, hi, hw, kw = args
    fn = _SAMPLERS[name]
    return [fn(Seed(seed_value, i), hw, **kw) for i in range(lo, hi)]


def run_samples(name: str, n_samples: int, seed, hw: float, jobs: int = 1, **kw) -> list:
    """Per-sample records, ordered by sample index."""
    seed_value = as_seed(seed).value
    if jobs <= 1:
        return _run_chunk((name, seed_value, 0, n_samples, hw, kw))
    step = max(1, -(-n_samples // (jobs * 4)))
    chunks = [(name, seed_value, lo, min(lo + step, n_samples), hw, kw) for lo in range(0, n_samples, step)]
    out = []
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        for part in ex.map(_run_chunk, chunks):
            out.extend(part)
    return out


def _estimate(stat, values_all, thresholds, fit_range, seed, extra=None) -> TailEstimate:
    vals = np.array([v for v in values_all if v is not None], dtype=float)
    censored = sum(v is None for v in values_all)
    ccdf, lo, hi, slope, sci = fit_tail(vals, thresholds, fit_range, seed=seed)
    return TailEstimate(stat, len(values_all), censored, vals, np.asarray(thresholds, float), ccdf, lo, hi,
                        slope, sci, tuple(fit_range), extra or {})


def estimate_X(scheme: str, spec=None, window_half_width: float = DEFAULT_HALF_WIDTH, n_samples: int = 10_000,
               seed=0, fit_range=(10.0, 1e3), thresholds=None, max_n: int = 3, k=0, jobs: int = 1,
               records: list | None = None) -> TailEstimate:
    """Tail of the distance from the Palm origin to its partner under ``scheme``.

    Censored samples (partner undetermined within the window or certificate
    search) are excluded from the CCDF and counted separately.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    kw = {}
    if scheme == "finitary":
        kw = {"spec": CostSpec.parse(0.0 if spec is None else spec), "max_n": max_n}
    elif scheme == "level-matching":
        kw = {"k": k}
    if records is None:
        records = run_samples(scheme, n_samples, seed, window_half_width, jobs, **kw)
    if thresholds is None:
        thresholds = log_thresholds(0.1, max(fit_range[1], 10.0) * 10)
    return _estimate("X", [r["x"] for r in records], thresholds, fit_range, seed,
                     {"scheme": scheme, "window_half_width": window_half_width})


def estimate_L(spec=0.0, window_half_width: float | None = None, n_samples: int = 10_000, seed=0,
               max_n: int = 3, jobs: int = 1, records: list | None = None) -> TailEstimate:
    """Tail of the coding radius of finitary certificates at the Palm origin.

    Thresholds are the support points a(3a)^n; ``extra["x"]`` holds the
    matching distances of the same (uncensored) samples.
    """
    spec = CostSpec.parse(spec)
    a = 2 * kappa(spec) + 1
    if window_half_width is None:
        window_half_width = a * (3 * a) ** 6
    if records is None:
        records = run_samples("finitary", n_samples, seed, window_half_width, jobs, spec=spec, max_n=max_n)
    grid = [a * (3 * a) ** n for n in range(max_n + 1)]
    thresholds = grid[:-1] if max_n > 0 else grid
    est = _estimate("L", [r["L"] for r in records], thresholds, (grid[0], grid[-1]), seed,
                    {"a": a, "grid": grid, "max_n": max_n, "window_half_width": window_half_width})
    est.extra["x"] = [r["x"] for r in records if r["L"] is not None]
    return est


def estimate_T(window: float = DEFAULT_HALF_WIDTH, n_samples: int = 10_000, seed=0, fit_range=(10.0, 1e3),
               thresholds=None, jobs: int = 1) -> TailEstimate:
    """Tail of the first time the walk started at 0 reaches 1."""
    records = run_samples("T", n_samples, seed, window, jobs)
    if thresholds is None:
        thresholds = log_thresholds(0.01, max(fit_range[1], 10.0) * 10)
    return _estimate("T", [r["x"] for r in records], thresholds, fit_range, seed, {"window": window})


# ------------------------------------------------------ orientation check


def alternation_counts(config, edges, certified_red, certified_blue):
    """Consecutive nested certified edges of one level: (alternating, total).

    A pair (inner, outer) is counted only when every point of the level lying
    between the two edges is certified, so no unseen edge can nest between them.
    """
    from .walklevel import assign_levels, build_walk

    walk = build_walk(config)
    lv = assign_levels(walk, config)
    by_level: dict = {}
    for i, j in edges:
        by_level.setdefault(int(lv.red[i]), []).append((i, j))
    alt = total = 0
    for level, es in by_level.items():
        rsel = np.flatnonzero(lv.red == level)
        bsel = np.flatnonzero(lv.blue == level)
        pts = np.concatenate([config.red[rsel], config.blue[bsel]])
        cert = np.concatenate([certified_red[rsel], certified_blue[bsel]])
        order = np.argsort(pts)
        pts, cert = pts[order], cert[order]
        iv = []
        for i, j in es:
            r, b = config.red[i], config.blue[j]
            iv.append((min(r, b), max(r, b), r < b))
        iv.sort()
        stack: list = []
        for lo, hi, right in iv:
            while stack and stack[-1][1] < lo:
                stack.pop()
            if stack:
                plo, phi, pright = stack[-1]
                a0, a1 = np.searchsorted(pts, [plo, lo], side="right")
                b0, b1 = np.searchsorted(pts, [hi, phi], side="left")
                gap = np.concatenate([cert[a0 : a1 - 1], cert[b0 + 1 : b1]])
                if gap.all():
                    total += 1
                    alt += int(right != pright)
            stack.append((lo, hi, right))
    return alt, total


def orientation_alternation_rate(spec=0.0, windows: int = 3, seed=0, half_width: float = 4000.0, max_n: int = 2):
    """Fraction of consecutive nested certified edges (same level) with opposite orientations.

    Returns (rate or None when nothing was observed, pairs observed).
    """
    from .line_constructions import certified_edges
    from .points import sample_poisson

    spec = CostSpec.parse(spec)
    alt = total = 0
    base = as_seed(seed)
    for w in range(windows):
        cfg = sample_poisson((-half_width, half_width), 1.0, TWO_COLOUR, Seed(base.value, w))
        edges, certs, conflicts = certified_edges(cfg, spec, max_n)
        cr = np.zeros(cfg.n_red, dtype=bool)
        cb = np.zeros(cfg.n_blue, dtype=bool)
        for i, j in edges:
            cr[i] = cb[j] = True
        a, t = alternation_counts(cfg, edges, cr, cb)
        alt += a
        total += t
    return (alt / total if total else None), total
