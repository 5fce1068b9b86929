"""Point sets in the time-frequency plane: generators and geometric measurements.

Every point set is a finite window of a Delone set in R^2. Sets that come from
a lattice or a cut-and-project scheme carry their integer preimages so that
patch comparisons downstream are exact integer computations.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from . import _io, kernels
from .errors import (
    EmptyPointSet,
    EmptyWindowWarning,
    RegionTooSmall,
    SingularBasis,
    UnknownRule,
)

TOL = 1e-9
GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def _frozen(a, dtype=None):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Cube:
    """Closed axis-aligned square of the given side centred at ``center``."""

    side: float
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError("cube side must be positive")
        object.__setattr__(self, "side", float(self.side))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def half(self) -> float:
        return self.side / 2.0

    @property
    def bounds(self):
        cx, cy = self.center
        h = self.half
        return (cx - h, cx + h), (cy - h, cy + h)

    @property
    def area(self) -> float:
        return self.side * self.side

    def contains(self, pts, tol=TOL):
        pts = np.atleast_2d(pts)
        c = np.asarray(self.center)
        return np.all(np.abs(pts - c) <= self.half + tol, axis=1)

    def half_open(self, pts, tol=TOL):
        """Mask for ``[c - s/2, c + s/2)^2``; such cubes tile the plane without overlap."""
        pts = np.atleast_2d(pts)
        rel = pts - np.asarray(self.center)
        return np.all((rel >= -self.half - tol) & (rel < self.half - tol), axis=1)

    def shrink(self, margin: float) -> "Cube":
        side = self.side - 2.0 * margin
        if side <= 0:
            raise RegionTooSmall(f"cannot shrink cube of side {self.side} by {margin}")
        return Cube(side, self.center)

    def translate(self, z) -> "Cube":
        return Cube(self.side, (self.center[0] + z[0], self.center[1] + z[1]))

    def to_dict(self):
        return {"side": self.side, "center": list(self.center)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["side"], tuple(d.get("center", (0.0, 0.0))))


@dataclass(frozen=True, eq=False)
class Embedding:
    """Integer preimages of the points: ``point = basis @ int_coord + origin``."""

    basis: np.ndarray
    int_coords: np.ndarray
    internal_coords: np.ndarray | None = None
    origin: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        ints = np.asarray(self.int_coords, dtype=np.int64).reshape(-1, basis.shape[1])
        object.__setattr__(self, "basis", _frozen(basis))
        object.__setattr__(self, "int_coords", _frozen(ints))
        if self.internal_coords is not None:
            ic = np.asarray(self.internal_coords, dtype=float)
            if ic.ndim != 2:
                ic = ic.reshape(len(ints), -1)
            object.__setattr__(self, "internal_coords", _frozen(ic))
        object.__setattr__(self, "origin", _frozen(np.asarray(self.origin, dtype=float)))

    def physical(self):
        return self.int_coords @ self.basis.T + self.origin

    def take(self, idx) -> "Embedding":
        ic = None if self.internal_coords is None else self.internal_coords[idx]
        return Embedding(self.basis, self.int_coords[idx], ic, self.origin)


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray
    region: Cube
    embedding: Embedding | None = None
    marks: np.ndarray | None = None
    provenance: str = ""
    dim: int = 2

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", _frozen(pts))
        if self.marks is not None:
            marks = np.asarray(self.marks, dtype=np.int64)
            if marks.shape != (len(pts),):
                raise ValueError("marks must have exactly one entry per point")
            object.__setattr__(self, "marks", _frozen(marks))
        if self.embedding is not None:
            emb = self.embedding
            if len(emb.int_coords) != len(pts):
                raise ValueError("embedding size does not match point count")
            if len(pts):
                recon = emb.physical()
                scale = max(1.0, float(np.abs(pts).max()))
                if np.abs(recon - pts).max() > 1e-12 * scale:
                    raise ValueError("embedding does not reproduce the points")

    def __len__(self):
        return len(self.points)

    @cached_property
    def tree(self) -> cKDTree:
        return cKDTree(self.points)

    @property
    def is_exact(self) -> bool:
        return self.embedding is not None

    def subset(self, mask_or_idx, provenance=None) -> "PointSet":
        idx = np.asarray(mask_or_idx)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        emb = None if self.embedding is None else self.embedding.take(idx)
        marks = None if self.marks is None else self.marks[idx]
        return PointSet(self.points[idx], self.region, emb, marks, provenance or self.provenance)

    def translate(self, z) -> "PointSet":
        z = np.asarray(z, dtype=float)
        emb = None
        if self.embedding is not None:
            e = self.embedding
            emb = Embedding(e.basis, e.int_coords, e.internal_coords, e.origin + z)
        return PointSet(
            self.points + z,
            self.region.translate(z),
            emb,
            self.marks,
            f"{self.provenance}+translate({z[0]:.17g},{z[1]:.17g})",
        )

    def transform(self, A, region: Cube | None = None) -> "PointSet":
        """Image under the linear map ``A``; keeps only points inside ``region``.

        With no region given the new region is the largest centred square
        contained in the image of the old one.
        """
        A = np.asarray(A, dtype=float)
        if abs(np.linalg.det(A)) < 1e-12:
            raise SingularBasis("transform matrix is singular")
        pts = self.points @ A.T
        if region is None:
            inv_inf = np.abs(np.linalg.inv(A)).sum(axis=1).max()
            region = Cube(self.region.side / inv_inf, tuple(A @ np.asarray(self.region.center)))
        keep = region.contains(pts)
        emb = None
        if self.embedding is not None:
            e = self.embedding.take(np.flatnonzero(keep))
            emb = Embedding(A @ e.basis, e.int_coords, e.internal_coords, A @ e.origin)
        marks = None if self.marks is None else self.marks[keep]
        return PointSet(pts[keep], region, emb, marks, f"{self.provenance}|transform")

    # serialization -----------------------------------------------------

    def to_dict(self):
        emb = None
        if self.embedding is not None:
            e = self.embedding
            emb = {
                "basis": e.basis,
                "int_coords": e.int_coords,
                "internal_coords": e.internal_coords,
                "origin": e.origin,
            }
        return {
            "dim": 2,
            "points": self.points,
            "embedding": emb,
            "marks": self.marks,
            "region": self.region.to_dict(),
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return _io.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d) -> "PointSet":
        if d.get("dim", 2) != 2:
            raise ValueError("only dim=2 point sets are supported")
        pts = np.asarray(d["points"], dtype=float).reshape(-1, 2)
        emb = None
        if d.get("embedding"):
            e = d["embedding"]
            basis = np.asarray(e["basis"], dtype=float)
            ic = e.get("internal_coords")
            emb = Embedding(
                basis,
                np.asarray(e["int_coords"], dtype=np.int64).reshape(-1, basis.shape[1]),
                None if ic is None else np.asarray(ic, dtype=float),
                np.asarray(e.get("origin", (0.0, 0.0)), dtype=float),
            )
        marks = d.get("marks")
        return cls(pts, Cube.from_dict(d["region"]), emb, marks, d.get("provenance", ""))

    @classmethod
    def from_json(cls, text: str) -> "PointSet":
        return cls.from_dict(json.loads(text))

    def save(self, path):
        _io.write_json(path, self.to_dict())

    @classmethod
    def load(cls, path) -> "PointSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


# ---------------------------------------------------------------------------
# generators


def _as_region(region) -> Cube:
    if isinstance(region, Cube):
        return region
    return Cube(float(region))


def _lex_order(ints):
    if len(ints) == 0:
        return np.zeros(0, dtype=np.intp)
    return np.lexsort(ints.T[::-1])


def gen_lattice(A, region) -> PointSet:
    """``A Z^2`` intersected with the closed region, in lexicographic integer order."""
    A = np.asarray(A, dtype=float).reshape(2, 2)
    region = _as_region(region)
    if abs(np.linalg.det(A)) < 1e-12:
        raise SingularBasis(f"|det A| = {abs(np.linalg.det(A)):.3g} < 1e-12")
    Ainv = np.linalg.inv(A)
    (x0, x1), (y0, y1) = region.bounds
    corners = np.array([[x0, y0], [x0, y1], [x1, y0], [x1, y1]]) @ Ainv.T
    lo = np.floor(corners.min(axis=0) - 1).astype(np.int64)
    hi = np.ceil(corners.max(axis=0) + 1).astype(np.int64)
    m, n = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    ints = np.column_stack([m.ravel(), n.ravel()])
    pts = ints @ A.T
    keep = region.contains(pts)
    ints, pts = ints[keep], pts[keep]
    order = _lex_order(ints)
    emb = Embedding(A, ints[order])
    return PointSet(pts[order], region, emb, None, f"lattice(A={A.tolist()})")


@dataclass(frozen=True, eq=False)
class CutProjectScheme:
    """Lattice ``D = B Z^k`` in ``R^2 x R^(k-2)`` with a half-open box window.

    The first two rows of ``lattice_basis`` give the physical projection and
    the remaining rows the internal one. The window is
    ``prod [window_lo, window_hi)`` in internal space.
    """

    lattice_basis: np.ndarray
    window_lo: np.ndarray
    window_hi: np.ndarray
    provenance: str = ""
    physical_dim: int = 2

    def __post_init__(self):
        B = np.asarray(self.lattice_basis, dtype=float)
        k = B.shape[0]
        if B.shape != (k, k) or k < 3:
            raise ValueError("lattice basis must be a square matrix of size >= 3")
        if abs(np.linalg.det(B)) < 1e-12:
            raise SingularBasis("cut-and-project lattice basis is singular")
        object.__setattr__(self, "lattice_basis", _frozen(B))
        lo = np.asarray(self.window_lo, dtype=float).reshape(k - 2)
        hi = np.asarray(self.window_hi, dtype=float).reshape(k - 2)
        object.__setattr__(self, "window_lo", _frozen(lo))
        object.__setattr__(self, "window_hi", _frozen(hi))

    @property
    def total_dim(self) -> int:
        return self.lattice_basis.shape[0]

    @property
    def window_volume(self) -> float:
        return float(np.prod(np.clip(self.window_hi - self.window_lo, 0, None)))

    @property
    def density(self) -> float:
        """Asymptotic density vol(W)/covol(D) of the model set."""
        return self.window_volume / abs(np.linalg.det(self.lattice_basis))


def fibonacci_product_scheme() -> CutProjectScheme:
    """Product of two copies of the Fibonacci chain, tile lengths 1 and the golden ratio."""
    phi = GOLDEN
    # integer vector (m1, n1, m2, n2); physical x_i = m_i + phi n_i
    B = np.array(
        [
            [1.0, phi, 0.0, 0.0],
            [0.0, 0.0, 1.0, phi],
            [1.0, 1.0 - phi, 0.0, 0.0],
            [0.0, 0.0, 1.0, 1.0 - phi],
        ]
    )
    return CutProjectScheme(B, [0.0, 0.0], [phi, phi], "fibonacci_product")


def sturmian_scheme(alpha=(math.sqrt(2) - 1, math.sqrt(3) - 1), beta=0.5) -> CutProjectScheme:
    """Sturmian subset ``{(m,n) : frac(m a1 + n a2) < beta}`` as a model set.

    The third integer coordinate ``l`` absorbs the floor, so the internal
    coordinate ``m a1 + n a2 + l`` must land in ``[0, beta)``.
    """
    a1, a2 = alpha
    B = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [a1, a2, 1.0]])
    return CutProjectScheme(B, [0.0], [beta], f"sturmian(alpha=({a1:.17g},{a2:.17g}),beta={beta:.17g})")


def _enumerate_box(B, lo, hi):
    """All integer d with lo <= B d <= hi (rows of B), up to a 1e-9 slack.

    The first k-1 coordinates are enumerated over a bounding box; the last one
    is solved as an interval per row.
    """
    k = B.shape[0]
    Binv = np.linalg.inv(B)
    mid = (lo + hi) / 2.0
    rad = (hi - lo) / 2.0
    centre = Binv @ mid
    extent = np.abs(Binv) @ rad
    dlo = np.floor(centre - extent - 1).astype(np.int64)
    dhi = np.ceil(centre + extent + 1).astype(np.int64)
    ranges = [np.arange(dlo[i], dhi[i] + 1) for i in range(k - 1)]
    head = np.array(np.meshgrid(*ranges, indexing="ij")).reshape(k - 1, -1).T
    base = head @ B[:, : k - 1].T  # (P, k)
    col = B[:, k - 1]
    low = np.full(len(head), -np.inf)
    upp = np.full(len(head), np.inf)
    for r in range(k):
        c = col[r]
        a = lo[r] - TOL - base[:, r]
        b = hi[r] + TOL - base[:, r]
        if abs(c) < 1e-15:
            bad = (a > 0) | (b < 0)
            low[bad] = np.inf
            continue
        if c > 0:
            low = np.maximum(low, a / c)
            upp = np.minimum(upp, b / c)
        else:
            low = np.maximum(low, b / c)
            upp = np.minimum(upp, a / c)
    first = np.ceil(low - 1e-12)
    last = np.floor(upp + 1e-12)
    cnt = np.where(np.isfinite(first) & np.isfinite(last), last - first + 1, 0)
    cnt = np.clip(cnt, 0, None).astype(np.int64)
    rows = np.repeat(np.arange(len(head)), cnt)
    if rows.size == 0:
        return np.zeros((0, k), dtype=np.int64)
    start = np.repeat(np.where(cnt > 0, first, 0).astype(np.int64), cnt)
    offs = np.arange(rows.size) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    tail = start + offs
    return np.column_stack([head[rows], tail])


def gen_cut_project(scheme: CutProjectScheme, region) -> PointSet:
    """Model set points in the closed region, with integer and internal coordinates."""
    region = _as_region(region)
    B = scheme.lattice_basis
    k = scheme.total_dim
    if scheme.window_volume <= 0:
        warnings.warn("cut-and-project window has zero volume", EmptyWindowWarning, stacklevel=2)
        emb = Embedding(B[:2], np.zeros((0, k), dtype=np.int64), np.zeros((0, k - 2)))
        return PointSet(np.zeros((0, 2)), region, emb, None, f"cut_project({scheme.provenance})")
    (x0, x1), (y0, y1) = region.bounds
    lo = np.concatenate([[x0, y0], scheme.window_lo])
    hi = np.concatenate([[x1, y1], scheme.window_hi])
    ints = _enumerate_box(B, lo, hi)
    phys = ints @ B[:2].T
    internal = ints @ B[2:].T
    keep = region.contains(phys)
    keep &= np.all((internal >= scheme.window_lo) & (internal < scheme.window_hi), axis=1)
    ints, phys, internal = ints[keep], phys[keep], internal[keep]
    order = _lex_order(ints)
    emb = Embedding(B[:2], ints[order], internal[order])
    return PointSet(phys[order], region, emb, None, f"cut_project({scheme.provenance})")


def _sturmian_mask(ints, alpha, beta):
    frac = np.mod(ints[:, 0] * alpha[0] + ints[:, 1] * alpha[1], 1.0)
    return frac, frac < beta


def gen_sturmian(region, alpha=(math.sqrt(2) - 1, math.sqrt(3) - 1), beta=0.5, scale=1.0) -> PointSet:
    """Sturmian subset of ``scale * Z^2``.

    Generated through :func:`sturmian_scheme` and reduced to Z^2 coordinates,
    so patches compare exactly on the lattice.
    """
    region = _as_region(region)
    if scale <= 0:
        raise SingularBasis("scale must be positive")
    base_region = Cube(region.side / scale, (region.center[0] / scale, region.center[1] / scale))
    full = gen_cut_project(sturmian_scheme(alpha, beta), base_region)
    ints = full.embedding.int_coords[:, :2]
    internal = full.embedding.internal_coords
    A = np.eye(2) * scale
    emb = Embedding(A, ints, internal)
    prov = f"sturmian(alpha=({alpha[0]:.17g},{alpha[1]:.17g}),beta={beta:.17g},scale={scale:.17g})"
    return PointSet(ints @ A.T, region, emb, None, prov)


def thue_morse_bit(k):
    k = np.abs(np.asarray(k, dtype=np.int64))
    bits = np.zeros(k.shape, dtype=np.int64)
    while np.any(k):
        bits ^= k & 1
        k = k >> 1
    return bits


MARK_RULES = ("thue_morse_2d", "sturmian_mark")


def gen_marked_lattice(rule, region, alpha=(math.sqrt(2) - 1, math.sqrt(3) - 1), beta=0.5) -> PointSet:
    """``Z^2`` in the region with a colouring by ``rule``."""
    if rule not in MARK_RULES:
        raise UnknownRule(f"unknown colouring rule {rule!r}; expected one of {MARK_RULES}")
    lat = gen_lattice(np.eye(2), region)
    ints = lat.embedding.int_coords
    if rule == "thue_morse_2d":
        marks = thue_morse_bit(ints[:, 0]) ^ thue_morse_bit(ints[:, 1])
        prov = "marked_lattice(thue_morse_2d)"
    else:
        _, inside = _sturmian_mask(ints, alpha, beta)
        marks = inside.astype(np.int64)
        prov = f"marked_lattice(sturmian_mark,alpha=({alpha[0]:.17g},{alpha[1]:.17g}),beta={beta:.17g})"
    return PointSet(lat.points, lat.region, lat.embedding, marks, prov)


def poisson_points(region, intensity, seed) -> PointSet:
    """Uniform random points; a non-FLC test fixture."""
    region = _as_region(region)
    rng = np.random.default_rng(seed)
    count = rng.poisson(intensity * region.area)
    (x0, x1), (y0, y1) = region.bounds
    pts = np.column_stack([rng.uniform(x0, x1, count), rng.uniform(y0, y1, count)])
    return PointSet(pts, region, None, None, f"poisson(intensity={intensity},seed={seed})")


# ---------------------------------------------------------------------------
# measurements


@dataclass(frozen=True)
class HoleCertificate:
    """Two-sided bound on the covering radius over a region.

    ``grid_step`` is the spacing actually used by the scan, which is at most
    the requested one.
    """

    lower: float
    upper: float
    grid_step: float
    region: Cube
    center: tuple = (0.0, 0.0)

    def to_dict(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "grid_step": self.grid_step,
            "region": self.region.to_dict(),
            "center": list(self.center),
        }


def hole_radius(ps: PointSet, region=None, grid_step=1e-2) -> HoleCertificate:
    """Certified bracket for sup over the region of the distance to the set.

    The distance function is 1-Lipschitz, and every point of the region is
    within ``step * sqrt(2)/2`` of a scan node.
    """
    if len(ps) == 0:
        raise EmptyPointSet("hole radius of an empty point set")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    region = ps.region if region is None else _as_region(region)
    count = int(math.ceil(region.side / grid_step - 1e-12)) + 1
    step = region.side / (count - 1)
    (x0, x1), (y0, y1) = region.bounds
    xs = np.linspace(x0, x1, count)
    ys = np.linspace(y0, y1, count)
    tree = ps.tree
    best = -1.0
    best_at = (0.0, 0.0)
    chunk = max(1, 2_000_000 // count)
    for i in range(0, count, chunk):
        X, Y = np.meshgrid(xs[i : i + chunk], ys, indexing="ij")
        q = np.column_stack([X.ravel(), Y.ravel()])
        dist, _ = tree.query(q)
        j = int(np.argmax(dist))
        if dist[j] > best:
            best = float(dist[j])
            best_at = (float(q[j, 0]), float(q[j, 1]))
    return HoleCertificate(best, best + step * math.sqrt(2) / 2, step, region, best_at)


def relative_separation(ps: PointSet, side=1.0) -> int:
    """Maximum number of points in a closed axis-aligned cube of the given side."""
    if len(ps) == 0:
        return 0
    order = np.argsort(ps.points[:, 0], kind="stable")
    pts = ps.points[order]
    return int(kernels.max_cube_count(pts[:, 0], pts[:, 1], float(side), TOL))


def min_separation(ps: PointSet) -> float:
    if len(ps) < 2:
        raise EmptyPointSet("min_separation needs at least two points")
    dist, _ = ps.tree.query(ps.points, k=2)
    return float(dist[:, 1].min())


@dataclass(frozen=True)
class DensityReport:
    table: tuple  # rows (side, count, count/area)
    estimate: float
    spread: float

    def to_dict(self):
        return {
            "table": [{"side": s, "count": c, "density": d} for s, c, d in self.table],
            "estimate": self.estimate,
            "ucf_spread": self.spread,
        }


def _check_sides(ps, sides, margin=0.0):
    sides = [float(s) for s in sides]
    if not sides:
        raise ValueError("need at least one cube side")
    if any(b <= a for a, b in zip(sides, sides[1:])):
        raise ValueError("cube sides must be strictly increasing")
    if sides[-1] / 2 + margin > ps.region.half + TOL:
        raise RegionTooSmall(
            f"cube of side {sides[-1]} (margin {margin}) does not fit in region of side {ps.region.side}"
        )
    return sides


def _spread(values):
    tail = values[-3:]
    return float(max(tail) - min(tail)) if tail else 0.0


def density(ps: PointSet, cube_sides) -> DensityReport:
    """Counts per area on half-open centred cubes; the last cube gives the estimate."""
    sides = _check_sides(ps, cube_sides)
    rows = []
    for s in sides:
        c = int(Cube(s, ps.region.center).half_open(ps.points).sum()) if len(ps) else 0
        rows.append((s, c, c / (s * s)))
    vals = [r[2] for r in rows]
    return DensityReport(tuple(rows), vals[-1], _spread(vals))


@dataclass(frozen=True)
class HullReport:
    distance: float
    R: float
    translation: tuple
    r_max: float

    def to_dict(self):
        return {
            "distance": self.distance,
            "R": self.R,
            "translation": list(self.translation),
            "r_max": self.r_max,
            "note": "R taken over exact candidate translations; capped at r_max",
        }


def _unmatched(P, tree):
    if tree is None:
        return np.ones(len(P), dtype=bool)
    d, _ = tree.query(P, distance_upper_bound=TOL)
    return ~np.isfinite(d)


def _mismatch_radius(A, treeA, Bpts, treeB, r_max):
    """Norm of the closest point that lies in exactly one of the two sets."""
    worst = r_max
    for P, other in ((A, treeB), (Bpts, treeA)):
        if len(P):
            bad = _unmatched(P, other)
            if bad.any():
                worst = min(worst, float(np.linalg.norm(P[bad], axis=1).min()))
    return worst


def hull_metric_report(ps1: PointSet, ps2: PointSet, r_max=10.0) -> HullReport:
    """Local-matching distance ``min(1, 1/R)``.

    Agreement of ``ps1 - z`` and ``ps2`` on a ball forces ``z`` to map some
    point of ``ps1`` onto the point of ``ps2`` nearest the origin, so the
    candidate translations are exactly those differences (plus ``z = 0``).
    Translations with ``|z| > 1`` cannot give ``R > 1`` and are skipped.
    """
    r_max = float(r_max)
    reach = r_max + 1.0 + TOL
    B = ps2.points[np.linalg.norm(ps2.points, axis=1) <= r_max + TOL]
    treeB = cKDTree(B) if len(B) else None
    cands = [np.zeros(2)]
    if len(B):
        b0 = B[np.argmin(np.linalg.norm(B, axis=1))]
        near = ps1.points[np.linalg.norm(ps1.points - b0, axis=1) <= 1.0 + TOL]
        cands.extend(near - b0)
    local1 = ps1.points[np.linalg.norm(ps1.points, axis=1) <= reach]
    bestR, bestz = 0.0, (0.0, 0.0)
    for z in cands:
        nz = float(np.linalg.norm(z))
        cap = r_max if nz < 1.0 / r_max else 1.0 / nz
        if cap <= bestR:
            continue
        A = local1 - z
        A = A[np.linalg.norm(A, axis=1) <= r_max + TOL]
        treeA = cKDTree(A) if len(A) else None
        r_agree = _mismatch_radius(A, treeA, B, treeB, r_max)
        R = min(r_agree, cap)
        if R > bestR:
            bestR, bestz = R, (float(z[0]), float(z[1]))
    d = 1.0 if bestR <= 0 else min(1.0, 1.0 / bestR)
    return HullReport(d, bestR, bestz, r_max)


def hull_metric(ps1: PointSet, ps2: PointSet, r_max=10.0) -> float:
    return hull_metric_report(ps1, ps2, r_max).distance


def difference_set_contains(ps: PointSet, u, tol=TOL) -> bool:
    """Whether ``u`` is a difference of two points of the (finite) set."""
    u = np.asarray(u, dtype=float)
    d, _ = ps.tree.query(ps.points + u, distance_upper_bound=tol)
    return bool(np.isfinite(d).any())


def almost_periods(ps: PointSet, radius, count, search=None, exclude_zero=True):
    """Return vectors ``z`` in the set for which ``ps - z`` matches ``ps`` on a large ball.

    Candidates are points of the set ordered by how far the match extends,
    ties broken by norm. Used to pick shifts that approach the set in the
    hull metric.
    """
    search = ps.region.half / 2 if search is None else search
    cands = ps.points[np.linalg.norm(ps.points, axis=1) <= search]
    local = ps.points[np.linalg.norm(ps.points, axis=1) <= radius + TOL]
    tree = cKDTree(local)
    scored = []
    for z in cands:
        if exclude_zero and np.linalg.norm(z) < TOL:
            continue
        A = ps.points - z
        A = A[np.linalg.norm(A, axis=1) <= radius + TOL]
        r = _mismatch_radius(A, cKDTree(A), local, tree, radius)
        scored.append((-r, float(np.linalg.norm(z)), tuple(z)))
    scored.sort()
    return [np.array(s[2]) for s in scored[:count]]


def sturmian_almost_periods(count, alpha=(math.sqrt(2) - 1, math.sqrt(3) - 1), beta=0.5, bound=60, scale=1.0):
    """Shifts ``z = scale (m, n)`` in the Sturmian set with the smallest phase defect.

    ``ps - z`` differs from ``ps`` only at points whose phase lies within
    ``frac(m a1 + n a2)`` of the window edges, so a small defect means ``z``
    nearly preserves the set. Returned in order of decreasing defect, so the
    shifts approach the set along the orbit.
    """
    m, n = np.meshgrid(np.arange(-bound, bound + 1), np.arange(-bound, bound + 1), indexing="ij")
    ints = np.column_stack([m.ravel(), n.ravel()])
    ints = ints[np.any(ints != 0, axis=1)]
    frac, inside = _sturmian_mask(ints, alpha, beta)
    ints, frac = ints[inside], frac[inside]
    order = np.lexsort((np.abs(ints).sum(axis=1), frac))[:count]
    picked = ints[order][::-1]
    return [scale * p.astype(float) for p in picked], frac[order][::-1]


def sturmian_approach_shifts(defects, alpha=(math.sqrt(2) - 1, math.sqrt(3) - 1), beta=0.5, bound=60, scale=1.0):
    """For each target defect, the shortest shift in the set whose phase defect is at most it.

    Each pick must also have a strictly smaller defect than the previous one,
    so the shifts are distinct and approach the set monotonically.
    """
    m, n = np.meshgrid(np.arange(-bound, bound + 1), np.arange(-bound, bound + 1), indexing="ij")
    ints = np.column_stack([m.ravel(), n.ravel()])
    ints = ints[np.any(ints != 0, axis=1)]
    frac, inside = _sturmian_mask(ints, alpha, beta)
    ints, frac = ints[inside], frac[inside]
    norms = np.linalg.norm(ints, axis=1)
    out, got = [], []
    last = math.inf
    for d in defects:
        ok = np.flatnonzero((frac <= d) & (frac < last))
        if ok.size == 0:
            raise ValueError(f"no shift with defect <= {d} within bound {bound}")
        j = ok[np.lexsort((frac[ok], norms[ok]))[0]]
        out.append(scale * ints[j].astype(float))
        got.append(float(frac[j]))
        last = float(frac[j])
    return out, np.array(got)


__all__ = [
    "Cube",
    "Embedding",
    "PointSet",
    "CutProjectScheme",
    "fibonacci_product_scheme",
    "sturmian_scheme",
    "gen_lattice",
    "gen_cut_project",
    "gen_sturmian",
    "gen_marked_lattice",
    "poisson_points",
    "thue_morse_bit",
    "HoleCertificate",
    "hole_radius",
    "relative_separation",
    "min_separation",
    "DensityReport",
    "density",
    "HullReport",
    "hull_metric",
    "hull_metric_report",
    "difference_set_contains",
    "almost_periods",
    "sturmian_almost_periods",
    "sturmian_approach_shifts",
]
