"""Filling holes of a point set with finitely many disjoint translates.

Each round drops a new copy of the set so that one of its points lands on the
currently deepest hole. A round ends once the certified hole bound has gone
strictly down, so the recorded sequence is strictly decreasing by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import _io
from .errors import NoConvergence, OverlappingTranslate, PerturbationFailed
from .pointset import TOL, Cube, HoleCertificate, PointSet, difference_set_contains, hole_radius


def spiral_offsets(eps: float):
    """64 deterministic perturbations: radii eps/40*k for k=1..8, eight angles each."""
    out = []
    for k in range(1, 9):
        for j in range(8):
            a = 2 * math.pi * j / 8
            out.append(np.array([math.cos(a), math.sin(a)]) * eps / 40 * k)
    return out


def _disjoint(ps: PointSet, v, translates) -> bool:
    return not any(difference_set_contains(ps, np.asarray(v) - np.asarray(z)) for z in translates)


def union_translates(ps: PointSet, translates) -> PointSet:
    """``⋃ (ps + z_i)`` clipped to the original region, with disjointness enforced."""
    zs = [np.asarray(z, dtype=float) for z in translates]
    for i in range(len(zs)):
        for j in range(i):
            if difference_set_contains(ps, zs[i] - zs[j]):
                raise OverlappingTranslate(f"translates {j} and {i} differ by a vector of Λ-Λ")
    if len(zs) == 1 and np.all(zs[0] == 0):
        return ps
    pts = np.concatenate([ps.points + z for z in zs])
    src = np.repeat(np.arange(len(zs)), len(ps))
    keep = ps.region.contains(pts)
    pts, src = pts[keep], src[keep]
    if len(pts) > 1:
        dist, _ = cKDTree(pts).query(pts, k=2)
        if dist[:, 1].min() <= TOL:
            raise OverlappingTranslate("two translates share a point")
    desc = ",".join(f"({z[0]:.17g},{z[1]:.17g})" for z in zs)
    return PointSet(pts, ps.region, None, src, f"union[{desc}]({ps.provenance})")


@dataclass(frozen=True)
class HoleFillResult:
    eps: float
    translates: tuple
    hole_sequence: tuple  # HoleCertificate after each completed round
    region: Cube
    grid_step: float

    @property
    def iterations(self) -> int:
        return len(self.translates)

    @property
    def certificate(self) -> HoleCertificate:
        return self.hole_sequence[-1]

    def to_dict(self):
        return {
            "eps": self.eps,
            "translates": [list(z) for z in self.translates],
            "hole_sequence": [{"lower": c.lower, "upper": c.upper} for c in self.hole_sequence],
            "iterations": self.iterations,
            "grid_step": self.grid_step,
            "region": self.region.to_dict(),
        }


def fill_holes(ps: PointSet, eps: float, max_iters: int = 32, grid_step=None, region=None) -> HoleFillResult:
    """Translates ``z_1 = 0, z_2, ...`` whose union has certified hole below ``eps``.

    ``region`` is the interior where the hole is certified; by default the
    central half of the generation region, which leaves room for translates
    near the edge. ``max_iters`` bounds the total number of translates.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    step = eps / 20 if grid_step is None else float(grid_step)
    region = Cube(ps.region.side / 2, ps.region.center) if region is None else region
    translates = [np.zeros(2)]
    union = ps
    cert = hole_radius(union, region, step)
    seq = [cert]
    while cert.upper >= eps:
        start = cert.upper
        while cert.upper >= start:
            if len(translates) >= max_iters:
                raise NoConvergence(
                    f"{len(translates)} translates used, certified hole {cert.upper:.6g} >= eps {eps}"
                )
            c = np.asarray(cert.center)
            _, j = ps.tree.query(c)
            z = ps.points[j]
            v = c - z
            if not _disjoint(ps, v, translates):
                for off in spiral_offsets(eps):
                    if _disjoint(ps, v + off, translates):
                        v = v + off
                        break
                else:
                    raise PerturbationFailed(f"no admissible perturbation of hole centre {tuple(c)}")
            translates.append(v)
            union = union_translates(ps, translates)
            cert = hole_radius(union, region, step)
        seq.append(cert)
    return HoleFillResult(
        float(eps),
        tuple((float(z[0]), float(z[1])) for z in translates),
        tuple(seq),
        region,
        seq[-1].grid_step,
    )


def report_json(result: HoleFillResult, extra=None) -> str:
    d = result.to_dict()
    if extra:
        d.update(extra)
    return _io.dumps(d)


__all__ = ["fill_holes", "union_translates", "spiral_offsets", "HoleFillResult", "report_json"]
