"""Gap-labelling generators for subsets and colourings of Z^2.

The labels are the patch frequencies (measures of transversal clopen sets)
plus the twisted generator ``theta / Dens``. The frequency group is a direct
limit over patch radii, so a report at radius ``r`` is a finite approximation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _io
from .errors import NoMarks, NotLatticeSubset, SingularBasis
from .patch import enumerate_patches
from .pointset import Cube, PointSet, density

DISCLAIMER = (
    "finite r-approximation: generators come from patches of radius <= r only; "
    "the full frequency group is the union over all radii"
)


@dataclass(frozen=True)
class GapLabelReport:
    theta: float
    density: float
    patch_radius: float
    frequency_generators: tuple  # floats, sorted
    exact_generators: tuple | None  # Fractions when the counting area is an integer
    twisted_generator: float | None
    provenance: str
    region: Cube

    def to_dict(self):
        return {
            "theta": self.theta,
            "density": self.density,
            "patch_radius": self.patch_radius,
            "frequency_generators": list(self.frequency_generators),
            "exact_generators": None if self.exact_generators is None else [str(f) for f in self.exact_generators],
            "twisted_generator": self.twisted_generator,
            "provenance": self.provenance,
            "region": self.region.to_dict(),
            "disclaimer": DISCLAIMER,
        }

    def to_json(self) -> str:
        return _io.dumps(self.to_dict())


def _require_lattice_subset(ps: PointSet):
    pts = ps.points
    if len(pts) == 0:
        raise NotLatticeSubset("empty point set")
    if np.abs(pts - np.rint(pts)).max() > 1e-9:
        raise NotLatticeSubset("points are not all in Z^2")


def gap_label_generators(ps: PointSet, theta: float, r: float, region: Cube | None = None) -> GapLabelReport:
    """Distinct r-patch frequencies and ``theta / Dens`` (omitted when ``theta == 0``)."""
    _require_lattice_subset(ps)
    region = ps.region.shrink(r) if region is None else region
    table = enumerate_patches(ps, r, region)
    dens = table.total / region.area
    if dens <= 0:
        raise NotLatticeSubset("no points in the counting region")
    area = region.area
    exact = None
    if abs(area - round(area)) < 1e-12:
        a = int(round(area))
        exact = tuple(sorted({Fraction(e.count, a) for e in table.entries}))
        freqs = tuple(float(f) for f in exact)
    else:
        freqs = tuple(sorted({e.frequency for e in table.entries}))
    twisted = None if theta == 0 else float(theta) / dens
    return GapLabelReport(float(theta), float(dens), float(r), freqs, exact, twisted, ps.provenance, region)


def clopen_measure(ps: PointSet, submark: int, region: Cube | None = None) -> float:
    """Fraction of points carrying ``submark``."""
    if ps.marks is None:
        raise NoMarks("point set has no marks")
    marks = ps.marks
    if region is not None:
        marks = marks[region.half_open(ps.points)]
    if marks.size == 0:
        return 0.0
    return float(np.mean(marks == submark))


@dataclass(frozen=True)
class ScalingReport:
    det: float
    density: float
    image_density: float
    ratio: float
    relative_error: float
    side: float
    image_side: float

    @property
    def ok(self) -> bool:
        return self.relative_error <= 0.02

    def to_dict(self):
        return {
            "abs_det": self.det,
            "density": self.density,
            "image_density": self.image_density,
            "ratio": self.ratio,
            "relative_error": self.relative_error,
            "side": self.side,
            "image_side": self.image_side,
            "ok": self.ok,
        }


def density_scaling_check(ps: PointSet, A) -> ScalingReport:
    """Compare ``Dens(ps) / Dens(A ps)`` with ``|det A|``, both by counting.

    The image is counted on the largest centred cube inside the image of the
    generation region.
    """
    A = np.asarray(A, dtype=float).reshape(2, 2)
    det = abs(float(np.linalg.det(A)))
    if det < 1e-12:
        raise SingularBasis("scaling matrix is singular")
    d0 = density(ps, [ps.region.side]).estimate
    img = ps.transform(A)
    d1 = density(img, [img.region.side]).estimate
    ratio = d0 / d1 if d1 > 0 else float("inf")
    return ScalingReport(det, d0, d1, ratio, abs(ratio - det) / det, ps.region.side, img.region.side)


__all__ = [
    "GapLabelReport",
    "gap_label_generators",
    "clopen_measure",
    "ScalingReport",
    "density_scaling_check",
    "DISCLAIMER",
]
