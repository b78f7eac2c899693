"""Command line: sample, solve, build, verify, tails, render."""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import line_constructions as lc
from .costs import NEG_INF, CostSpec
from .errors import DegenerateDistances, MatchlabError
from .finite_match import oracle_min, solve_min, solve_stable, tile_match
from .points import Seed, config_from_dict, config_to_dict, equal_count_pair, palm_augment, sample_poisson
from .render import render_svg
from .serialize import dumps, matching_from_dict, matching_to_dict
from .walklevel import assign_levels, build_walk

CONSTRUCTIONS = ("alternating+", "alternating-", "order-k", "meshalkin", "meshalkin-swap", "level-k", "one-swap", "finitary")
EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _default_seed() -> int:
    env = os.environ.get("MATCHLAB_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError("MATCHLAB_SEED must be an integer") from exc


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _load_config(path: str):
    d = _read_json(path)
    if "config" in d and "red" not in d:
        d = d["config"]
    return config_from_dict(d)


# ------------------------------------------------------------ commands


def cmd_sample(args) -> int:
    seed = Seed(args.seed if args.seed is not None else _default_seed(), args.stream)
    window = args.window if args.dim == 1 else [args.window] * args.dim
    if args.equal_n is not None:
        cfg = equal_count_pair(window, args.equal_n, seed, dim=args.dim)
    else:
        cfg = sample_poisson(window, args.intensity, args.mode, seed, dim=args.dim)
    if args.palm:
        cfg = palm_augment(cfg)
    _write(dumps(config_to_dict(cfg)), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _load_config(args.input)
    spec = CostSpec.parse(args.gamma)
    if args.tile is not None:
        m = tile_match(spec, cfg, args.tile, args.offset)
    elif spec.kind == NEG_INF:
        try:
            m = solve_stable(cfg)
        except DegenerateDistances:
            m = solve_min(spec, cfg).with_tie(True)
    else:
        m = solve_min(spec, cfg)
    d = matching_to_dict(cfg, m, spec)
    code = EXIT_OK
    if args.oracle:
        agree = m in oracle_min(spec, cfg)
        d["oracle_agrees"] = agree
        code = EXIT_OK if agree else EXIT_VERIFY
    _write(dumps(d), args.out)
    return code


def _selector(text: str | None):
    if not text:
        return lambda g: False
    ivs = []
    for part in text.split(","):
        lo, _, hi = part.partition(":")
        ivs.append((float(lo), float(hi)))
    return lc.interval_selector(ivs)


def cmd_build(args) -> int:
    cfg = _load_config(args.input)
    c = args.construction
    if c == "finitary":
        spec = CostSpec.parse(args.gamma)
        cert = lc.finitary_partner(cfg, spec, args.query, args.max_n)
        d = {"construction": c, "gamma": spec.label, "certified": cert is not None}
        if cert is not None:
            d["certificate"] = cert.to_dict()
        d["config"] = config_to_dict(cfg)
        _write(dumps(d), args.out)
        return EXIT_OK
    if c in ("alternating+", "alternating-"):
        wm = lc.alternating(cfg, lc.PLUS if c.endswith("+") else lc.MINUS)
    elif c == "order-k":
        wm = lc.order_matching_k(cfg, args.k)
    elif c in ("meshalkin", "meshalkin-swap"):
        wm = lc.meshalkin(cfg, colour_swap=(c == "meshalkin-swap"))
    elif c == "level-k":
        k = float(args.k) if str(args.k) in ("inf", "+inf", "-inf") else int(args.k)
        wm = lc.level_matching(cfg, assign_levels(build_walk(cfg), cfg), k)
    else:
        wm = lc.one_swap_variant(lc.meshalkin(cfg), _selector(args.selector))
    d = {"construction": c, **matching_to_dict(cfg, wm)}
    _write(dumps(d), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verify as vf

    d = _read_json(args.input)
    cfg = _load_config(args.points) if args.points else None
    m, cfg = matching_from_dict(d, cfg)
    if args.predicate == "stable":
        rep = vf.is_stable(cfg, m)
    elif args.predicate == "quasistable":
        kap = args.kappa
        if kap is None:
            if args.gamma is None:
                raise UsageError("quasistable needs --kappa or --gamma")
            kap = lc.kappa(CostSpec.parse(args.gamma))
        rep = vf.is_quasistable(cfg, m, kap)
        rep.details["kappa"] = kap
    else:
        gamma = args.gamma if args.gamma is not None else d.get("gamma")
        if gamma is None:
            raise UsageError("local minimality needs --gamma")
        rep = vf.is_gamma_minimal_local(CostSpec.parse(gamma), cfg, m, args.cap, args.samples,
                                        Seed(args.seed if args.seed is not None else _default_seed()),
                                        args.exhaustive)
    _write(dumps(rep.to_dict()), args.out)
    return EXIT_OK if rep.result else EXIT_VERIFY


def cmd_tails(args) -> int:
    from . import stats

    seed = args.seed if args.seed is not None else _default_seed()
    fit = tuple(args.fit) if args.fit else (10.0, 1e3)
    if args.stat == "X":
        if not args.scheme:
            raise UsageError("--stat X needs --scheme")
        est = stats.estimate_X(args.scheme, args.gamma, args.window or stats.DEFAULT_HALF_WIDTH, args.samples, seed,
                               fit, max_n=args.max_n, k=args.k, jobs=args.jobs)
    elif args.stat == "L":
        est = stats.estimate_L(args.gamma if args.gamma is not None else 0.0, args.window, args.samples, seed,
                               args.max_n, jobs=args.jobs)
    elif args.stat == "T":
        est = stats.estimate_T(args.window or stats.DEFAULT_HALF_WIDTH, args.samples, seed, fit, jobs=args.jobs)
    else:
        rate, pairs = stats.orientation_alternation_rate(args.gamma if args.gamma is not None else 0.0,
                                                         args.windows, seed, max_n=min(args.max_n, 2))
        _write(dumps({"stat": "alternation", "rate": rate, "pairs": pairs}), args.out)
        return EXIT_OK
    if args.csv:
        _write(est.to_csv(), args.csv)
    summary = est.summary()
    summary["thresholds"] = est.thresholds.tolist()
    summary["ccdf"] = est.ccdf.tolist()
    _write(dumps(summary), args.out)
    return EXIT_OK


def cmd_render(args) -> int:
    d = _read_json(args.input)
    cfg = _load_config(args.points) if args.points else None
    if "edges" in d:
        m, cfg = matching_from_dict(d, cfg)
    else:
        cfg, m = config_from_dict(d), None
    if cfg.dim != 1:
        raise UsageError("render supports one-dimensional configurations only")
    _write(render_svg(cfg, m), args.out)
    return EXIT_OK


# ------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matchlab", description="Minimal matchings of Poisson points.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample a point configuration")
    s.add_argument("--dim", type=int, default=1)
    s.add_argument("--window", type=float, nargs=2, default=[-100.0, 100.0], metavar=("LO", "HI"))
    s.add_argument("--mode", choices=["one-colour", "two-colour"], default="two-colour")
    s.add_argument("--intensity", type=float, default=1.0)
    s.add_argument("--seed", type=int)
    s.add_argument("--stream", type=int, default=0)
    s.add_argument("--equal-n", type=int, dest="equal_n")
    s.add_argument("--palm", action="store_true", help="add a red point at the origin")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_sample)

    s = sub.add_parser("solve", help="minimal matching of a finite configuration")
    s.add_argument("--gamma", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--oracle", action="store_true", help="cross-check against exhaustive enumeration")
    s.add_argument("--tile", type=float)
    s.add_argument("--offset", type=float, nargs="+")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_solve)

    s = sub.add_parser("build", help="explicit matching of the line on a window")
    s.add_argument("--construction", choices=CONSTRUCTIONS, required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--k", default="0")
    s.add_argument("--gamma", default="0")
    s.add_argument("--query", type=float, default=0.0)
    s.add_argument("--max-n", type=int, default=2, dest="max_n")
    s.add_argument("--selector", help="gap intervals lo:hi,lo:hi for one-swap")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_build)

    s = sub.add_parser("verify", help="check a matching")
    s.add_argument("--predicate", choices=["stable", "quasistable", "local"], required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--points")
    s.add_argument("--kappa", type=float)
    s.add_argument("--gamma")
    s.add_argument("--cap", type=int, default=6)
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--exhaustive", action="store_true")
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("tails", help="Monte Carlo tail estimates")
    s.add_argument("--stat", choices=["X", "L", "T", "alternation"], required=True)
    s.add_argument("--scheme", choices=["alternating-mixture", "meshalkin", "level-matching", "finitary", "stable-1colour"])
    s.add_argument("--gamma")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--seed", type=int)
    s.add_argument("--window", type=float)
    s.add_argument("--max-n", type=int, default=3, dest="max_n")
    s.add_argument("--k", type=int, default=0)
    s.add_argument("--windows", type=int, default=2)
    s.add_argument("--fit", type=float, nargs=2)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--csv")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_tails)

    s = sub.add_parser("render", help="SVG arc diagram")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--points")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_render)
    return p


def _glue_negative_values(argv):
    """Let ``--gamma -inf`` / ``--window -100 100`` through argparse's option detection."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in ("--gamma", "--k") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.fn(args)
    except (UsageError, MatchlabError, ValueError) as exc:
        print(f"matchlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
