"""Command-line front end.

Every command writes a JSON report (and, where a table makes sense, a CSV
file plus a gnuplot script) into ``--out``. Each report embeds the full run
configuration. A ``--config`` JSON file overrides flags key by key.

Exit status: 0 on success, 1 when a computation fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _io
from .errors import QGError

EXIT_COMPUTE = 1
EXIT_USAGE = 2

KINDS = ("lattice", "fibonacci", "cut_project", "sturmian", "marked", "poisson")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict
    n: int = 512
    L: float = 16.0
    tol: float = 1e-6
    seed: int = 0
    out: str = "."

    def to_dict(self):
        return {
            "command": self.command,
            "params": self.params,
            "grid": {"n": self.n, "L": self.L},
            "tolerance": self.tol,
            "seed": self.seed,
            "out": self.out,
        }


# ---------------------------------------------------------------------------
# argument parsing


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qgabor", description="Gabor analysis over quasicrystals.")
    p.add_argument("--config", help="JSON file whose keys override the flags")
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=512, help="grid size, a power of two")
    p.add_argument("--L", type=float, default=16.0, help="grid period")
    p.add_argument("--tol", type=float, default=1e-6, help="invertibility tolerance for S")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a point set file")
    g.add_argument("kind", help=f"one of {', '.join(KINDS)}")
    g.add_argument("--side", type=float, default=20.0, help="side of the centred square region")
    g.add_argument("--center", type=_floats, default=[0.0, 0.0])
    g.add_argument("--matrix", type=_floats, default=[1.0, 0.0, 0.0, 1.0], help="a,b,c,d for the lattice basis")
    g.add_argument("--alpha", type=_floats, default=[math.sqrt(2) - 1, math.sqrt(3) - 1])
    g.add_argument("--beta", type=float, default=0.5)
    g.add_argument("--scale", type=float, default=1.0)
    g.add_argument("--rule", default="thue_morse_2d")
    g.add_argument("--intensity", type=float, default=1.0)
    g.add_argument("--file", default="pointset.json", help="output file name inside --out")

    a = sub.add_parser("analyze", help="hole, rel, density, patches, FLC")
    a.add_argument("input")
    a.add_argument("--hole", action="store_true")
    a.add_argument("--grid-step", type=float, default=0.01)
    a.add_argument("--rel", action="store_true")
    a.add_argument("--density", type=_floats, default=None, metavar="SIDES")
    a.add_argument("--patches", type=float, default=None, metavar="R")
    a.add_argument("--flc", type=float, default=None, metavar="R")
    a.add_argument("--sides", type=_floats, default=None, help="cube sides for --flc")

    h = sub.add_parser("holefill", help="fill holes with disjoint translates")
    h.add_argument("input")
    h.add_argument("--eps", type=float, required=True)
    h.add_argument("--max-iters", type=int, default=32)
    h.add_argument("--grid-step", type=float, default=None)

    f = sub.add_parser("frame", help="frame operator, bounds and dual window")
    f.add_argument("input")
    f.add_argument("--window", type=lambda s: s.split(","), default=["gaussian"])
    f.add_argument("--bounds", action="store_true")
    f.add_argument("--dual", action="store_true")
    f.add_argument("--fraction", type=float, default=0.5)
    f.add_argument("--dump-operator", action="store_true")

    t = sub.add_parser("trace", help="frame measure and Gabor idempotent traces")
    t.add_argument("input")
    t.add_argument("--window", type=lambda s: s.split(","), default=["gaussian"])
    t.add_argument("--idempotent", action="store_true")
    t.add_argument("--k-ladder", type=_floats, default=[8.0, 12.0])
    t.add_argument("--r-supp", type=_floats, default=None, help="one per k; default k/2")

    gl = sub.add_parser("gaplabel", help="gap-labelling generators")
    gl.add_argument("input")
    gl.add_argument("--theta", type=float, default=0.0)
    gl.add_argument("--radius", type=float, default=1.0)
    gl.add_argument("--side", type=float, default=None, help="counting square side")

    ac = sub.add_parser("acceptance", help="run the acceptance suite")
    ac.add_argument("--only", type=_floats, default=None, help="comma-separated criterion numbers")
    return p


def _apply_config(ns: argparse.Namespace, path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if attr in ("command", "config"):
            raise UsageError(f"config may not set {key!r}")
        if not hasattr(ns, attr):
            raise UsageError(f"unknown config key {key!r} for command {ns.command}")
        setattr(ns, attr, value)


def _run_config(ns) -> RunConfig:
    params = {k: v for k, v in sorted(vars(ns).items()) if k not in ("command", "config", "out", "seed", "n", "L", "tol")}
    return RunConfig(ns.command, params, int(ns.n), float(ns.L), float(ns.tol), int(ns.seed), str(ns.out))


# ---------------------------------------------------------------------------
# output helpers


def _emit(cfg: RunConfig, stem: str, report: dict):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    body = {"run_config": cfg.to_dict()}
    body.update(report)
    _io.write_json(out / f"{stem}.json", body)
    return body


def _plot(cfg: RunConfig, stem: str, header, rows, x, ys, title, logy=False):
    """CSV table plus a gnuplot script that plots columns ``ys`` against ``x``."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _io.write_csv(out / f"{stem}.csv", header, rows)
    cols = {h: i + 1 for i, h in enumerate(header)}
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        f"set xlabel '{x}'",
    ]
    if logy:
        lines.append("set logscale y")
    plots = ", ".join(f"'{stem}.csv' using {cols[x]}:{cols[y]} with linespoints title '{y}'" for y in ys)
    lines.append(f"plot {plots}")
    (out / f"{stem}.gp").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load(path):
    from .pointset import PointSet

    try:
        return PointSet.load(path)
    except FileNotFoundError as exc:
        raise UsageError(f"input file not found: {path}") from exc
    except (KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"input is not a point set file: {path}") from exc


def _grid(cfg: RunConfig):
    from .tfa import GridSpec

    return GridSpec(cfg.n, cfg.L)


def _box_covered(ps, grid) -> bool:
    """Whether the point-set region contains the whole Nyquist box of the grid."""
    (x0, x1), (w0, w1) = grid.box()
    (a0, a1), (b0, b1) = ps.region.bounds
    return a0 <= x0 and a1 >= x1 and b0 <= w0 and b1 >= w1


def _windows(names, grid):
    from .tfa import make_window

    try:
        return tuple(make_window(k, grid) for k in names)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# commands


def cmd_generate(ns, cfg: RunConfig):
    from . import pointset as P

    region = P.Cube(ns.side, tuple(ns.center))
    kind = ns.kind
    if kind == "lattice":
        if len(ns.matrix) != 4:
            raise UsageError("--matrix needs four entries a,b,c,d")
        ps = P.gen_lattice(np.asarray(ns.matrix, dtype=float).reshape(2, 2), region)
    elif kind in ("fibonacci", "cut_project"):
        if ns.scale <= 0:
            raise UsageError("--scale must be positive")
        pre = P.Cube(ns.side / ns.scale, tuple(np.asarray(ns.center) / ns.scale))
        ps = P.gen_cut_project(P.fibonacci_product_scheme(), pre)
        if ns.scale != 1.0:
            ps = ps.transform(ns.scale * np.eye(2))
    elif kind == "sturmian":
        ps = P.gen_sturmian(region, tuple(ns.alpha), ns.beta, ns.scale)
    elif kind == "marked":
        ps = P.gen_marked_lattice(ns.rule, region, tuple(ns.alpha), ns.beta)
    elif kind == "poisson":
        ps = P.poisson_points(region, ns.intensity, cfg.seed)
    else:
        raise UsageError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    ps.save(out / ns.file)
    return _emit(cfg, "generate", {"file": ns.file, "points": len(ps), "region": ps.region.to_dict(),
                                   "marks": ps.marks is not None, "provenance": ps.provenance})


def cmd_analyze(ns, cfg: RunConfig):
    from . import patch as Pt
    from . import pointset as P

    ps = _load(ns.input)
    rep = {"points": len(ps), "provenance": ps.provenance}
    if ns.hole:
        cert = P.hole_radius(ps, P.Cube(ps.region.side / 2, ps.region.center), ns.grid_step)
        rep["hole"] = cert.to_dict()
    if ns.rel:
        rep["rel"] = P.relative_separation(ps)
        if len(ps) > 1:
            rep["min_separation"] = P.min_separation(ps)
    if ns.density is not None:
        d = P.density(ps, ns.density)
        rep["density"] = d.to_dict()
        _plot(cfg, "density", ["side", "count", "density"], list(d.table), "side", ["density"], "density by counting")
    if ns.patches is not None:
        table = Pt.enumerate_patches(ps, ns.patches)
        rep["patches"] = table.to_dict()
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        (Path(cfg.out) / "patches.csv").write_text(table.to_csv(), encoding="utf-8")
    if ns.flc is not None:
        sides = ns.sides
        if sides is None:
            big = ps.region.side - 2 * ns.flc
            sides = [big / 4, big / 2, 3 * big / 4, big]
        fl = Pt.flc_report(ps, ns.flc, sides)
        rep["flc"] = fl.to_dict()
        _plot(cfg, "flc", ["side", "classes"], list(zip(fl.sides, fl.counts)), "side", ["classes"], "r-patch classes")
    return _emit(cfg, "analyze", rep)


def cmd_holefill(ns, cfg: RunConfig):
    from .holefill import fill_holes

    ps = _load(ns.input)
    res = fill_holes(ps, ns.eps, ns.max_iters, ns.grid_step)
    rows = [(i, c.lower, c.upper) for i, c in enumerate(res.hole_sequence)]
    _plot(cfg, "holefill", ["round", "lower", "upper"], rows, "round", ["lower", "upper"], "certified hole per round")
    return _emit(cfg, "holefill", {"result": res.to_dict(), "provenance": ps.provenance})


def cmd_frame(ns, cfg: RunConfig):
    from .tfa import GaborSystem, analyze, dual_window, frame_operator

    ps = _load(ns.input)
    grid = _grid(cfg)
    system = GaborSystem.from_pointset(ps, _windows(ns.window, grid))
    fa = analyze(system, ns.fraction) if ns.bounds else frame_operator(system)
    rep = {"frame": fa.report(), "windows": list(ns.window), "points_in_box": len(system),
           "box_covered": _box_covered(ps, grid), "provenance": ps.provenance}
    if ns.dual:
        duals = []
        for i in range(system.N):
            d = dual_window(system, fa, (0.0, 0.0), i, cfg.tol)
            duals.append(d)
            rep.setdefault("dual_norms", []).append(d.norm)
        rows = [(t,) + tuple(v for d in duals for v in (d.values[j].real, d.values[j].imag)) for j, t in enumerate(grid.t)]
        header = ["t"] + [f"{name}_{part}" for name in ns.window for part in ("re", "im")]
        _plot(cfg, "dual", header, rows, "t", [h for h in header[1:] if h.endswith("_re")], "canonical dual windows")
    if ns.dump_operator:
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        fa.dump(Path(cfg.out) / "frame_operator.bin")
        rep["operator_file"] = "frame_operator.bin"
    return _emit(cfg, "frame", rep)


def cmd_trace(ns, cfg: RunConfig):
    from . import algebra as Al
    from .pointset import density
    from .tfa import GaborSystem, frame_operator

    ps = _load(ns.input)
    grid = _grid(cfg)
    system = GaborSystem.from_pointset(ps, _windows(ns.window, grid))
    fa = frame_operator(system)
    ks = list(ns.k_ladder)
    table = Al.frame_measure(system, fa, ks, cfg.tol)
    dens = density(ps, [ps.region.side]).estimate
    rep = {"frame_measure": table.to_dict(), "counted_density": dens, "inverse_density": 1.0 / dens,
           "provenance": ps.provenance, "points_in_box": len(system), "box_covered": _box_covered(ps, grid)}
    rows = [(r.k, r.unnormalized, r.normalized, 1.0 / dens) for r in table.rows]
    _plot(cfg, "frame_measure", ["k", "unnormalized", "normalized", "inverse_density"], rows, "k",
          ["unnormalized", "inverse_density"], "frame measure along the k-ladder")
    if ns.idempotent:
        rs = ns.r_supp if ns.r_supp is not None else [k / 2 for k in ks]
        if len(rs) != len(ks):
            raise UsageError("--r-supp needs one value per k")
        out = []
        for k, r in zip(ks, rs):
            sample = Al.TransversalSample.from_system(system, k)
            P = Al.gabor_idempotent(system, fa, sample, r, cfg.tol)
            row = P.meta["report"].to_dict()
            row["trace_unnormalized"] = Al.idempotent_trace(P, "unnormalized")
            row["trace_normalized"] = Al.idempotent_trace(P, "normalized")
            row["n"], row["L"] = grid.n, grid.L
            out.append(row)
        rep["idempotent"] = out
    return _emit(cfg, "trace", rep)


def cmd_gaplabel(ns, cfg: RunConfig):
    from .gaplabel import gap_label_generators
    from .pointset import Cube

    ps = _load(ns.input)
    region = None if ns.side is None else Cube(ns.side, ps.region.center)
    rep = gap_label_generators(ps, ns.theta, ns.radius, region)
    return _emit(cfg, "gaplabel", {"report": rep.to_dict()})


def cmd_acceptance(ns, cfg: RunConfig):
    from . import acceptance

    nums = None if ns.only is None else [int(v) for v in ns.only]
    if nums is not None and any(k not in acceptance.CRITERIA for k in nums):
        raise UsageError(f"criteria are numbered 1..{len(acceptance.CRITERIA)}")
    results = []
    for k in nums or sorted(acceptance.CRITERIA):
        res = acceptance.run(k)
        print(res.line(), flush=True)
        results.append(res)
    body = _emit(cfg, "acceptance", {"results": [r.to_dict() for r in results],
                                      "passed": sum(r.passed for r in results), "total": len(results)})
    body["_all_passed"] = all(r.passed for r in results)
    return body


COMMANDS = {
    "generate": cmd_generate,
    "analyze": cmd_analyze,
    "holefill": cmd_holefill,
    "frame": cmd_frame,
    "trace": cmd_trace,
    "gaplabel": cmd_gaplabel,
    "acceptance": cmd_acceptance,
}


def _thread_limit():
    raw = os.environ.get("QG_THREADS")
    if raw is None or raw == "":
        return None
    try:
        val = int(raw)
    except ValueError as exc:
        raise UsageError(f"QG_THREADS must be a positive integer, got {raw!r}") from exc
    if val < 1:
        raise UsageError("QG_THREADS must be a positive integer")
    return val


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if ns.config:
            _apply_config(ns, ns.config)
        limit = _thread_limit()
        cfg = _run_config(ns)
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=limit):
            body = COMMANDS[ns.command](ns, cfg)
    except UsageError as exc:
        print(f"qgabor: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QGError, ValueError) as exc:
        print(f"qgabor: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    if ns.command == "acceptance":
        return 0 if body.get("_all_passed") else EXIT_COMPUTE
    summary = {k: v for k, v in body.items() if k != "run_config"}
    print(_io.dumps(summary)[:2000])
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
