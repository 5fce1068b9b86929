"""r-patches: extraction up to translation, class tables and frequencies."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _io
from .errors import BallExceedsRegion
from .pointset import TOL, Cube, PointSet, _check_sides, _spread

QUANTUM = 1e-9


@dataclass(frozen=True)
class Patch:
    """Translation class of ``(Lambda ∩ B_r(c)) - c`` in canonical sorted form.

    ``offsets`` are integer tuples: embedding coordinates when ``exact`` is
    true, otherwise float offsets quantized to a 1e-9 grid.
    """

    radius: float
    offsets: tuple
    marks: tuple | None = None
    exact: bool = True

    def __post_init__(self):
        zero = tuple(0 for _ in self.offsets[0]) if self.offsets else None
        if zero is None or zero not in self.offsets:
            raise ValueError("a patch must contain its centre")

    @property
    def size(self) -> int:
        return len(self.offsets)

    def offsets_json(self) -> str:
        d = {"offsets": [list(o) for o in self.offsets]}
        if self.marks is not None:
            d["marks"] = list(self.marks)
        if not self.exact:
            d["quantum"] = QUANTUM
        return json.dumps(d, separators=(",", ":"))


def _canonical(radius, offs, marks, exact):
    keys = [tuple(int(v) for v in o) for o in offs]
    if marks is None:
        return Patch(float(radius), tuple(sorted(keys)), None, exact)
    pairs = sorted(zip(keys, (int(m) for m in marks)))
    return Patch(float(radius), tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), exact)


def _check_ball(ps: PointSet, centers, r):
    rel = np.abs(np.atleast_2d(centers) - np.asarray(ps.region.center))
    if np.any(rel.max(axis=1) + r > ps.region.half + TOL):
        raise BallExceedsRegion(f"ball of radius {r} leaves the generation region")


def _patches(ps: PointSet, idx, r):
    idx = np.asarray(idx, dtype=np.intp)
    if idx.size == 0:
        return []
    _check_ball(ps, ps.points[idx], r)
    nbrs = ps.tree.query_ball_point(ps.points[idx], r + TOL)
    exact = ps.embedding is not None
    out = []
    for c, nb in zip(idx, nbrs):
        nb = np.asarray(nb, dtype=np.intp)
        d = ps.points[nb] - ps.points[c]
        nb = nb[np.einsum("ij,ij->i", d, d) <= (r + TOL) ** 2]
        if exact:
            offs = ps.embedding.int_coords[nb] - ps.embedding.int_coords[c]
        else:
            offs = np.rint((ps.points[nb] - ps.points[c]) / QUANTUM).astype(np.int64)
        marks = None if ps.marks is None else ps.marks[nb]
        out.append(_canonical(r, offs, marks, exact))
    return out


def extract_patch(ps: PointSet, center: int, r: float) -> Patch:
    return _patches(ps, [center], r)[0]


@dataclass(frozen=True)
class PatchEntry:
    patch: Patch
    count: int
    frequency: float


@dataclass(frozen=True)
class PatchTable:
    radius: float
    entries: tuple
    region: Cube
    total: int

    def __len__(self):
        return len(self.entries)

    @property
    def frequencies(self):
        return [e.frequency for e in self.entries]

    def csv_rows(self):
        return [(i, e.count, e.frequency, e.patch.offsets_json()) for i, e in enumerate(self.entries)]

    def to_csv(self) -> str:
        return _io.csv_text(["class_id", "count", "frequency", "offsets_json"], self.csv_rows())

    def to_dict(self):
        return {
            "radius": self.radius,
            "region": self.region.to_dict(),
            "total": self.total,
            "classes": len(self.entries),
            "entries": [
                {"class_id": i, "count": e.count, "frequency": e.frequency, "offsets": [list(o) for o in e.patch.offsets]}
                for i, e in enumerate(self.entries)
            ],
        }


def _centers(ps: PointSet, region: Cube):
    return np.flatnonzero(region.half_open(ps.points)) if len(ps) else np.zeros(0, dtype=np.intp)


def enumerate_patches(ps: PointSet, r: float, region: Cube | None = None) -> PatchTable:
    """Patch classes at centres in the half-open ``region``, in first-occurrence order."""
    region = ps.region.shrink(r) if region is None else region
    idx = _centers(ps, region)
    counts: dict[Patch, int] = {}
    for p in _patches(ps, idx, r):
        counts[p] = counts.get(p, 0) + 1
    area = region.area
    entries = tuple(PatchEntry(p, c, c / area) for p, c in counts.items())
    return PatchTable(float(r), entries, region, int(len(idx)))


@dataclass(frozen=True)
class FrequencyReport:
    table: tuple  # rows (side, count, count/area)
    estimate: float
    spread: float

    def to_dict(self):
        return {
            "table": [{"side": s, "count": c, "frequency": f} for s, c, f in self.table],
            "estimate": self.estimate,
            "spread": self.spread,
        }


def patch_frequency(ps: PointSet, patch: Patch, cube_sides) -> FrequencyReport:
    """Occurrences of ``patch`` per unit area on growing half-open centred cubes."""
    sides = _check_sides(ps, cube_sides, margin=patch.radius)
    big = Cube(sides[-1], ps.region.center)
    idx = _centers(ps, big)
    hits = np.array([p == patch for p in _patches(ps, idx, patch.radius)], dtype=bool)
    where = ps.points[idx[hits]] if hits.any() else np.zeros((0, 2))
    rows = []
    for s in sides:
        c = int(Cube(s, ps.region.center).half_open(where).sum()) if len(where) else 0
        rows.append((s, c, c / (s * s)))
    vals = [r[2] for r in rows]
    return FrequencyReport(tuple(rows), vals[-1], _spread(vals))


def cylinder_measure(patch_freq: float, v_volume: float) -> float:
    """Measure of the cylinder set of a patch over a small acceptance domain."""
    if patch_freq < 0 or v_volume < 0:
        raise ValueError("frequency and volume must be non-negative")
    return float(patch_freq) * float(v_volume)


@dataclass(frozen=True)
class FLCReport:
    radius: float
    sides: tuple
    counts: tuple

    @property
    def verdict(self) -> str:
        if len(self.counts) >= 2 and self.counts[-1] == self.counts[-2]:
            return "stabilized"
        return "not stabilized"

    def to_dict(self):
        return {"radius": self.radius, "sides": list(self.sides), "counts": list(self.counts), "verdict": self.verdict}


def flc_report(ps: PointSet, r: float, sides) -> FLCReport:
    """Number of r-patch classes seen in growing centred cubes."""
    sides = _check_sides(ps, sides, margin=r)
    counts = tuple(len(enumerate_patches(ps, r, Cube(s, ps.region.center))) for s in sides)
    return FLCReport(float(r), tuple(sides), counts)


def restrict(patch: Patch, r: float, basis=None) -> Patch:
    """The sub-patch of radius ``r <= patch.radius`` around the same centre.

    ``basis`` maps exact offsets to physical vectors; quantized offsets are
    converted back through the quantum.
    """
    if r > patch.radius + TOL:
        raise ValueError("can only restrict to a smaller radius")
    offs = np.asarray(patch.offsets, dtype=float)
    phys = offs @ np.asarray(basis, dtype=float).T if patch.exact else offs * QUANTUM
    keep = np.einsum("ij,ij->i", phys, phys) <= (r + TOL) ** 2
    kept = [o for o, k in zip(patch.offsets, keep) if k]
    marks = None if patch.marks is None else [m for m, k in zip(patch.marks, keep) if k]
    return _canonical(r, kept, marks, patch.exact)


__all__ = [
    "Patch",
    "PatchEntry",
    "PatchTable",
    "FrequencyReport",
    "FLCReport",
    "extract_patch",
    "enumerate_patches",
    "patch_frequency",
    "cylinder_measure",
    "flc_report",
    "restrict",
]
