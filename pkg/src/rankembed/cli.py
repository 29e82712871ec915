"""Command-line front end: ``rankembed <roots|coxeter|symmetric|trees|building|all> ...``.

Exit codes: 0 every check passed, 1 a check failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import sys

from . import building, coxeter, suite, symmetric, trees
from .errors import (
    ConfigError, IllegalType, RadiusTooLarge, RankEmbedError, RankTooLarge, WrongCardinality,
)
from .reports import VerificationReport, dumps, emit
from .roots import CartanType, enumerate_positive_roots, is_sum_free_independent, select_strongly_commuting_roots

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
_USAGE_ERRORS = (ConfigError, IllegalType, RankTooLarge, RadiusTooLarge, WrongCardinality)


def _common(p: argparse.ArgumentParser, fmt: str = "text") -> None:
    p.add_argument("--seed", type=int, default=0, help="run seed (unsigned 64-bit)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.add_argument("--format", choices=suite.FORMATS, default=fmt)
    p.add_argument("--json", action="store_true", help="shorthand for --format json")


def _cartan(args) -> CartanType:
    if args.rank is None:
        return CartanType.parse(args.type)
    return CartanType.of(args.type, args.rank)


def _write(args, data: bytes) -> None:
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode())
        if data and not data.endswith(b"\n"):
            sys.stdout.write("\n")


def _fmt(args) -> str:
    return "json" if args.json else args.format


def _emit_doc(args, doc: dict, lines: list[str]) -> None:
    if _fmt(args) == "json":
        _write(args, (dumps(doc) + "\n").encode())
    else:
        _write(args, ("\n".join(lines) + "\n").encode())


# --------------------------------------------------------------------------
# subcommands


def cmd_roots(args) -> int:
    t = _cartan(args)
    R = enumerate_positive_roots(t)
    if args.action == "list":
        doc = {
            "type": t.name,
            "count": len(R.positive_roots),
            "positive_roots": [{"simple_coords": list(r.simple_coords), "ambient": list(r.ambient)}
                               for r in R.positive_roots],
        }
        _emit_doc(args, doc, [f"{t.name}: {len(R.positive_roots)} positive roots"]
                  + [" ".join(map(str, r.simple_coords)) for r in R.positive_roots])
        return EXIT_PASS
    sel = select_strongly_commuting_roots(R)
    ok = len(sel) == t.rank and is_sum_free_independent(sel, R)
    doc = {"type": t.name, "selected": [{"simple_coords": list(r.simple_coords)} for r in sel],
           "pairwise_sum_free": ok}
    _emit_doc(args, doc, [f"{t.name}: pairwise_sum_free={ok}"]
              + [" ".join(map(str, r.simple_coords)) for r in sel])
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_coxeter(args) -> int:
    R = enumerate_positive_roots(_cartan(args))
    W = coxeter.generate_weyl_group(R)
    cfg = coxeter.find_maximally_distributed(R, W)
    doc = cfg.to_dict()
    doc["sin2_theta"] = coxeter.theta_sin_squared(cfg)
    doc["weyl_order"] = W.order
    ok = coxeter.walls_meet_trivially(cfg.walls) and coxeter.pairwise_wall_intersections_ok(cfg)
    doc["walls_meet_trivially"] = ok
    lines = [f"{doc['type']}: |W| = {W.order}"]
    lines += [f"xi_{i + 1} = ({', '.join(map(str, v.direction))})" for i, v in enumerate(cfg.vertices)]
    lines += [f"theta_{i + 1} = {th:.12g}" for i, th in enumerate(doc["theta"])]
    _emit_doc(args, doc, lines)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_symmetric(args) -> int:
    E = symmetric.build_an_embedding(args.n)
    cfg = symmetric.SamplerConfig(seed=args.seed, N=args.samples, d_min=args.dmin, d_max=args.dmax,
                                  threads=args.threads, min_ratio_floor=args.min_ratio_floor)
    rep = symmetric.certify_qi(E, cfg)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin", "d_product", "d_spd", "ratio"])
            w.writerows((k, f"{a:.17g}", f"{b:.17g}", f"{r:.17g}") for k, a, b, r in symmetric.sample_pairs(E, cfg))
    wit = {w["kind"]: {k: v for k, v in w.items() if k != "kind"} for w in rep.witnesses}
    doc = {"n": args.n, "seed": args.seed, "pass": rep.passed, "bins": rep.constants["bins"],
           "lambda_hat": rep.constants["lambda_hat"], "c_hat": rep.constants["c_hat"],
           "proven_ratio_cap": rep.constants["proven_ratio_cap"],
           "witness_max": wit.get("max_ratio"), "witness_min": wit.get("min_ratio")}
    fmt = _fmt(args)
    if fmt == "json":
        _write(args, (dumps(doc) + "\n").encode())
    else:
        _write(args, emit([rep], fmt))
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _reports_out(args, reports: list[VerificationReport], **head) -> int:
    ok = all(r.passed for r in reports)
    if _fmt(args) == "json" and head:
        doc = {**head, "pass": ok, "reports": [r.to_dict() for r in reports]}
        _write(args, (dumps(doc) + "\n").encode())
    else:
        _write(args, emit(reports, _fmt(args)))
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_trees(args) -> int:
    q, n, r = args.q, args.n, args.radius
    if q < 2 or n < 1 or r < 0:
        raise ConfigError("trees: need q >= 2, n >= 1, radius >= 0")
    F = trees.standard_apartment(q, n)
    reports = [
        trees.projection_checks(q, n, r),
        trees.step1_constant_check(F, [1] * n, r),
        trees.branching_bound_check(q, n, [1] * n, r, args.samples, args.seed),
        trees.union_of_flats_check(q, n, r, samples=args.samples, seed=args.seed),
    ]
    return _reports_out(args, reports, q=q, n=n, radius=r)


def cmd_building(args) -> int:
    if args.action == "build":
        ball = building.x_delta_ball(args.p, args.radius, args.valbound)
        data = (dumps(ball.to_dict()) + "\n").encode()
        _write(args, data)
        return EXIT_PASS
    ball = building.x_delta_ball(args.p, args.radius, args.valbound)
    rep = building.certify_building_embedding(ball)
    return _reports_out(args, [rep])


def cmd_all(args) -> int:
    if args.config:
        cfg = suite.RunConfig.load(args.config)
        # explicit flags override the file
        for key in ("seed", "threads", "out"):
            v = getattr(args, key)
            if v is not None:
                setattr(cfg, key, v)
        if args.format is not None or args.json:
            cfg.format = _fmt(args)
    else:
        cfg = suite.RunConfig(seed=args.seed or 0, threads=args.threads or 1, out=args.out,
                              format=_fmt(args) if (args.format or args.json) else "json")
    cfg.validate()
    reports = suite.run_all(cfg)
    args.out = cfg.out
    _write(args, emit(reports, cfg.format))
    return suite.exit_code(reports)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rankembed", description="Verification lab for product embeddings.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roots", help="positive roots and strongly commuting selections")
    p.add_argument("action", choices=["list", "select"])
    p.add_argument("--type", required=True, help="family letter, or a full type such as A1xA1")
    p.add_argument("--rank", type=int, default=None)
    _common(p)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("coxeter", help="maximally distributed boundary vertices")
    p.add_argument("action", choices=["maxdist"])
    p.add_argument("--type", required=True)
    p.add_argument("--rank", type=int, default=None)
    _common(p)
    p.set_defaults(func=cmd_coxeter)

    p = sub.add_parser("symmetric", help="quasi-isometry certificate for the AN-map")
    p.add_argument("action", choices=["verify"])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--dmin", type=float, default=1.0)
    p.add_argument("--dmax", type=float, default=64.0)
    p.add_argument("--min-ratio-floor", type=float, default=None)
    p.add_argument("--csv", default=None, help="dump raw samples to this CSV file")
    _common(p, "json")
    p.set_defaults(func=cmd_symmetric)

    p = sub.add_parser("trees", help="projection, branching and path checks in products of trees")
    p.add_argument("action", choices=["verify"])
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--radius", type=int, default=5)
    p.add_argument("--samples", type=int, default=200)
    _common(p)
    p.set_defaults(func=cmd_trees)

    p = sub.add_parser("building", help="the SL3(Q_p) building ball and X_Delta")
    p.add_argument("action", choices=["build", "verify"])
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--valbound", type=int, default=None)
    _common(p, "json")
    p.set_defaults(func=cmd_building)

    p = sub.add_parser("all", help="run the full suite")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=suite.FORMATS, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("--config", default=None, help="JSON RunConfig file")
    p.set_defaults(func=cmd_all)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    if getattr(args, "valbound", 1) is None:
        args.valbound = args.radius
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print("rankembed: error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        print("rankembed: error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"rankembed: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RankEmbedError as exc:
        print(f"rankembed: check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, OSError) as exc:
        print(f"rankembed: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
