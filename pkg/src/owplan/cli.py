"""Command-line interface: ``owplan <subcommand> ...``.

Exit codes: 0 ok, 2 invalid input, 3 planner infeasibility, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from . import io
from .baselines import HexSearchConfig, hex_deploy, hexplus_deploy
from .bounds import lower_bound, verify_connectivity_certificate, verify_hidden_set
from .channel import ChannelParams, PowerScheme, empirical_cdf, simulate, worker_count
from .errors import DomainError, InternalInvariantError, PlannerError, ValidationError
from .geometry import DEFAULT_CFG, GeomConfig, Layout
from .layoutgen import LayoutGenConfig, gen_layout
from .partition import default_R, hyper_triangulate
from .planner_ctc import ctc, deploy_from_tree, verify_backhaul
from .planner_mcc import Deployment, coverage_union, mcc, place_aps, verify_coverage
from .pvgraph import build_pv_graph

log = logging.getLogger("owplan")

EXIT_INPUT, EXIT_INFEASIBLE, EXIT_INTERNAL = 2, 3, 4
PLAN_METHODS = ("mcc", "ctc", "hex", "hexplus")


# --------------------------------------------------------------------------
# library-level pipeline
# --------------------------------------------------------------------------


def plan_layout(L: Layout, r: float, method: str, R: float | None = None,
                cfg: GeomConfig = DEFAULT_CFG, hex_cfg: HexSearchConfig = HexSearchConfig(),
                cache: dict | None = None) -> Deployment:
    """Run one planner end to end and attach coverage (and backhaul for ctc)."""
    if not r > 0:
        raise ValidationError("range must be positive")
    if method not in PLAN_METHODS:
        raise ValidationError(f"unknown method {method!r}")
    cache = {} if cache is None else cache
    if method in ("hex", "hexplus"):
        if "hex" not in cache:
            cache["hex"] = hex_deploy(L, r, hex_cfg, cfg)
        if method == "hex":
            return cache["hex"][0]
        return hexplus_deploy(L, r, hex_cfg, cfg, base=cache["hex"])
    R = default_R(r) if R is None else R
    if not R > 0:
        raise ValidationError("--ht-R must be positive")
    if "graph" not in cache:
        cache["graph"] = build_pv_graph(hyper_triangulate(L, R), L, r, cfg)
    g = cache["graph"]
    if method == "mcc":
        cliques = mcc(g)
        d = place_aps(cliques, L, r)
        d.extra["cliques"] = [list(c.members) for c in cliques]
    else:
        tree = ctc(g)
        d = deploy_from_tree(tree, L, r, cfg)
        d.extra["backhaul"] = verify_backhaul(d, L).to_json()
    d.extra["ht_R"] = R
    d.extra["triangles"] = len(g)
    d.coverage = verify_coverage(d, L, r, cfg)
    return d


def _geom_cfg(args) -> GeomConfig:
    return GeomConfig(circle_segments=args.circle_segments)


def _emit(obj, out: str | None, manifest: io.RunManifest | None = None) -> None:
    if out:
        io.write_json(out, obj)
        if manifest is not None:
            manifest.write_beside(out)
    else:
        sys.stdout.write(io.dumps(obj))


def _channel_params(args, r: float) -> ChannelParams:
    base = {}
    if getattr(args, "params", None):
        base = io.read_json(args.params)
        if not isinstance(base, dict):
            raise ValidationError("--params must hold a JSON object")
    try:
        return ChannelParams(**{**base, "r": float(r)})
    except TypeError as exc:
        raise ValidationError(f"bad channel parameters: {exc}") from exc


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_plan(args) -> int:
    L = io.load_layout(args.layout)
    cfg = _geom_cfg(args)
    hex_cfg = HexSearchConfig(offset_steps=args.hex_steps)
    d = plan_layout(L, args.range, args.method, args.ht_R, cfg, hex_cfg)
    config = {"method": args.method, "range": args.range, "ht_R": args.ht_R, "hex_steps": args.hex_steps,
              "geom": asdict(cfg)}
    _emit(io.deployment_to_json(d), args.out, io.RunManifest.for_inputs("plan", {"layout": args.layout}, config))
    if args.svg:
        _render(args.svg, L, d, cfg, mesh_R=(args.ht_R or default_R(args.range)) if args.mesh else None)
    log.info("%s: %d APs, covered=%s", args.method, len(d), d.coverage.covered)
    return 0


def _render(path, L: Layout, d: Deployment | None, cfg: GeomConfig, mesh_R: float | None = None) -> None:
    from .geometry import Region
    from .plotting import render_deployment

    part = hyper_triangulate(L, mesh_R) if mesh_R else None
    cov = out = None
    links = None
    if d is not None and len(d):
        cov = coverage_union(d.aps, L, d.r, cfg)
        out = Region.from_layout(L).difference(cov, cfg.eps_area)
        links = [tuple(e) for e in d.extra.get("backhaul", {}).get("backhaul_edges", [])] or None
        if d.method == "ctc" and links is None:
            links = verify_backhaul(d, L).backhaul_edges
    render_deployment(path, L, d, part=part, coverage=cov, outage=out, backhaul=links)


def cmd_verify(args) -> int:
    L = io.load_layout(args.layout)
    d = io.load_deployment(args.deployment)
    r = d.r if args.range is None else args.range
    cfg = _geom_cfg(args)
    cov = verify_coverage(d, L, r, cfg)
    bh = verify_backhaul(d, L)
    res = {"r": r, "n_aps": len(d), "coverage": cov.to_json(), "backhaul": bh.to_json()}
    config = {"range": r, "geom": asdict(cfg)}
    _emit(res, args.out, io.RunManifest.for_inputs("verify", {"layout": args.layout, "deployment": args.deployment},
                                                   config))
    return 0


def cmd_bound(args) -> int:
    L = io.load_layout(args.layout)
    cfg = _geom_cfg(args)
    if args.certificate:
        data = io.read_json(args.certificate)
        if "b" in data:
            chk = verify_connectivity_certificate(io.connectivity_certificate_from_json(data), L, args.range, cfg)
            res = {"accepted": chk.accepted, "bound": chk.bound if chk.accepted else 0, "reason": chk.reason,
                   "witness": list(chk.witness) if chk.witness else None}
        else:
            cert = io.hidden_certificate_from_json(data)
            ok = verify_hidden_set(cert.points, L, args.range, cfg)
            res = {"accepted": ok, "bound": cert.s if ok else 0}
    else:
        if args.ht_R is not None and args.ht_R > 2 * args.range:
            raise ValidationError("--ht-R must not exceed twice the range")
        res = lower_bound(L, args.range, args.ht_R, cfg).to_json()
    config = {"range": args.range, "ht_R": args.ht_R, "geom": asdict(cfg)}
    inputs = {"layout": args.layout, "certificate": args.certificate}
    _emit(res, args.out, io.RunManifest.for_inputs("bound", inputs, config))
    return 0


def cmd_simulate(args) -> int:
    L = io.load_layout(args.layout)
    d = io.load_deployment(args.deployment)
    r = d.r
    if args.range is not None and abs(args.range - d.r) > 1e-12:
        log.warning("--range %g differs from the deployment's r=%g; using the deployment value", args.range, d.r)
    p = _channel_params(args, r)
    scheme = PowerScheme.parse(args.power)
    m = simulate(L, d, p, scheme, args.users, args.seed)
    res = {"metrics": m.to_json(), "power": str(scheme), "seed": args.seed, "params": asdict(p)}
    config = {"users": args.users, "power": str(scheme), "params": asdict(p)}
    inputs = {"layout": args.layout, "deployment": args.deployment, "params": args.params}
    manifest = io.RunManifest.for_inputs("simulate", inputs, config, [args.seed])
    _emit(res, args.out, manifest)
    if args.cdf_csv:
        rows = [("rate_Mbps", v, c) for v, c in empirical_cdf(m.rate_cdf)]
        rows += [("illuminance_lux", v, c) for v, c in empirical_cdf(m.illum_cdf)]
        io.write_csv(args.cdf_csv, ["quantity", "value", "cumulative_probability"], rows)
        manifest.write_beside(args.cdf_csv)
    if args.figure:
        from .plotting import render_cdfs

        base = Path(args.figure)
        render_cdfs(base.with_name(base.stem + "_rate" + base.suffix), {d.method: m.rate_cdf}, "data rate (Mbps)")
        render_cdfs(base.with_name(base.stem + "_lux" + base.suffix), {d.method: m.illum_cdf}, "illuminance (lux)")
    return 0


def _parse_seeds(text: str) -> list[int]:
    """``0:100`` (half-open range) or ``1,5,9``."""
    try:
        if ":" in text:
            a, b = text.split(":")
            return list(range(int(a), int(b)))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad seed list {text!r}") from exc


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad number list {text!r}") from exc


BATCH_FIELDS = ["seed", "layout", "r", "method", "ap_count", "covered", "outage_fraction", "connected",
                "R_min_Mbps", "R_mean_Mbps", "E_avg_lux", "U_E", "error"]


def _batch_one(seed: int, args, methods: list[str], ranges: list[float], cfg: GeomConfig) -> list[list]:
    gcfg = LayoutGenConfig(args.n, args.size, args.seed_points, seed)
    rows = []
    try:
        L = gen_layout(gcfg)
    except Exception as exc:  # recorded, batch continues
        return [[seed, "", r, m, "", "", "", "", "", "", "", "", f"{type(exc).__name__}: {exc}"]
                for r in ranges for m in methods]
    hex_cfg = HexSearchConfig(offset_steps=args.hex_steps)
    scheme = PowerScheme.parse(args.power)
    for r in ranges:
        cache: dict = {}
        for m in methods:
            row = [seed, L.name, r, m]
            try:
                d = plan_layout(L, r, m, None, cfg, hex_cfg, cache)
                connected = verify_backhaul(d, L).connected
                row += [len(d), d.coverage.covered, d.coverage.outage_fraction, connected]
                if args.users > 0:
                    met = simulate(L, d, _channel_params(args, r), scheme, args.users, seed, threads=1)
                    row += [met.R_min, met.R_mean, met.E_avg, met.U_E, ""]
                else:
                    row += ["", "", "", "", ""]
            except (PlannerError, InternalInvariantError, DomainError) as exc:
                log.warning("seed %d %s r=%g failed: %s", seed, m, r, exc)
                row += [""] * 8 + [f"{type(exc).__name__}: {exc}"]
            rows.append(row)
    return rows


def cmd_batch(args) -> int:
    seeds = _parse_seeds(args.seeds)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in PLAN_METHODS:
            raise ValidationError(f"unknown method {m!r}")
    ranges = _parse_floats(args.ranges)
    if not seeds or not methods or not ranges or min(ranges) <= 0:
        raise ValidationError("need at least one seed, method and positive range")
    PowerScheme.parse(args.power)
    cfg = _geom_cfg(args)
    threads = worker_count()
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            per_seed = list(ex.map(lambda s: _batch_one(s, args, methods, ranges, cfg), seeds))
    else:
        per_seed = [_batch_one(s, args, methods, ranges, cfg) for s in seeds]
    rows = [row for block in per_seed for row in block]
    config = {"n": args.n, "size": args.size, "seed_points": args.seed_points, "methods": methods,
              "ranges": ranges, "users": args.users, "power": args.power, "hex_steps": args.hex_steps,
              "geom": asdict(cfg)}
    manifest = io.RunManifest.for_inputs("batch", {}, config, seeds)
    io.write_csv(args.out, BATCH_FIELDS, rows)
    manifest.write_beside(args.out)
    counts = {}
    for row in rows:
        if row[4] != "":
            counts.setdefault((row[3], row[2]), []).append(row[4])
    if args.cdf_csv:
        cdf_rows = []
        for (m, r), vals in sorted(counts.items()):
            uniq, cnt = np.unique(np.asarray(vals, int), return_counts=True)
            for v, c in zip(uniq, np.cumsum(cnt) / len(vals)):
                cdf_rows.append([m, r, int(v), float(c)])
        io.write_csv(args.cdf_csv, ["method", "r", "ap_count", "cumulative_probability"], cdf_rows)
        manifest.write_beside(args.cdf_csv)
    if args.figure:
        from .plotting import render_cdfs

        series = {f"{m} r={r:g}": np.asarray(v, float) for (m, r), v in counts.items()}
        render_cdfs(args.figure, series, "number of APs", f"{len(seeds)} layouts")
    failed = sum(1 for row in rows if row[-1])
    log.info("batch: %d rows, %d failed", len(rows), failed)
    return 0


def cmd_gen_layout(args) -> int:
    L = gen_layout(LayoutGenConfig(args.n, args.size, args.seed_points, args.seed))
    config = {"n": args.n, "size": args.size, "seed_points": args.seed_points}
    _emit(io.layout_to_json(L), args.out, io.RunManifest.for_inputs("gen-layout", {}, config, [args.seed]))
    if args.figure:
        _render(args.figure, L, None, DEFAULT_CFG)
    return 0


def cmd_render(args) -> int:
    L = io.load_layout(args.layout)
    d = io.load_deployment(args.deployment) if args.deployment else None
    _render(args.out, L, d, _geom_cfg(args), mesh_R=args.mesh_R)
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="owplan", description="Line-of-sight optical wireless AP planning.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    ap.add_argument("--circle-segments", type=int, default=DEFAULT_CFG.circle_segments,
                    help="polygon segments used for range disks")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan an AP deployment")
    p.add_argument("--layout", required=True)
    p.add_argument("--range", type=_positive, required=True, help="cell range r (m)")
    p.add_argument("--method", choices=PLAN_METHODS, default="mcc")
    p.add_argument("--ht-R", type=_positive, default=None, help="hyper-triangulation edge bound (default r)")
    p.add_argument("--hex-steps", type=int, default=6, help="lattice offsets per axis for hex/hexplus")
    p.add_argument("--out")
    p.add_argument("--svg", help="figure path (.svg or .png)")
    p.add_argument("--mesh", action="store_true", help="draw the triangulation in the figure")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("verify", help="check coverage and backhaul of a deployment")
    p.add_argument("--layout", required=True)
    p.add_argument("--deployment", required=True)
    p.add_argument("--range", type=_positive, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bound", help="certified lower bound on the number of APs")
    p.add_argument("--layout", required=True)
    p.add_argument("--range", type=_positive, required=True)
    p.add_argument("--ht-R", type=_positive, default=None)
    p.add_argument("--certificate", help="check this certificate instead of searching")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("simulate", help="Monte Carlo rate and illuminance metrics")
    p.add_argument("--layout", required=True)
    p.add_argument("--deployment", required=True)
    p.add_argument("--range", type=_positive, default=None)
    p.add_argument("--users", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--power", default="per-led:40", help="per-led:<W> or total:<W>")
    p.add_argument("--params", help="JSON file overriding channel parameters")
    p.add_argument("--out")
    p.add_argument("--cdf-csv")
    p.add_argument("--figure", help="CDF figure path prefix (.svg or .png)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("batch", help="run planners over generated layouts")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--size", type=_positive, default=30.0)
    p.add_argument("--seed-points", type=int, default=None)
    p.add_argument("--seeds", default="0:100", help="a:b (half-open) or comma list")
    p.add_argument("--methods", default="mcc,hexplus")
    p.add_argument("--ranges", default="10")
    p.add_argument("--users", type=int, default=0, help="users per simulation (0 skips the channel)")
    p.add_argument("--power", default="per-led:40")
    p.add_argument("--params")
    p.add_argument("--hex-steps", type=int, default=6)
    p.add_argument("--out", required=True)
    p.add_argument("--cdf-csv")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("gen-layout", help="random layout by inward denting")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--size", type=_positive, default=30.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seed-points", type=int, default=None)
    p.add_argument("--out")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_gen_layout)

    p = sub.add_parser("render", help="draw a layout and optional deployment")
    p.add_argument("--layout", required=True)
    p.add_argument("--deployment")
    p.add_argument("--mesh-R", type=_positive, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, DomainError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except PlannerError as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    except InternalInvariantError as exc:
        log.error("internal invariant violated: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
