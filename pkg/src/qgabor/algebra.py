"""Finite truncations of the twisted groupoid algebra of a point set.

A kernel ``f`` assigns a block ``f(T_w - z, T_w)`` to each sampled orbit point
``T_w = Lambda - w`` and each displacement ``z`` with ``w + z`` in Lambda. It
is stored as ``K[w][z]``. Coordinates are integer pairs on a phase-space
lattice with spacing ``scale``; with a ``modulus`` they live on the discrete
torus used by :mod:`qgabor.tfa`, on which the symplectic cocycle is exact.

Convolution, involution and trace follow the groupoid formulas:

* ``(f*g)[w][z] = sum_u F[w+u][z-u] G[w][u] sigma(z-u, u)``
* ``f^*[w][z] = conj(F[w+z][-z])^T exp(-2 pi i z_x z_omega)``
* ``Tr f = sum_w weight(w) tr F[w][0]``

with ``sigma(a, b) = exp(-2 pi i a_x b_omega)``. Terms whose displacement
falls outside the stencil are dropped and their norm is reported as loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import _io, kernels
from .errors import IncompatibleKernels, OffGrid
from .pointset import Cube
from .tfa import FrameAnalysis, GaborSystem, GridSpec, Window, tf_shifts, SOLVE_TOL


class Lattice2:
    """Integer phase-space coordinates: physical ``(p sx, q sw)``, optionally modulo ``n``."""

    def __init__(self, scale=(1.0, 1.0), modulus=None):
        self.scale = (float(scale[0]), float(scale[1]))
        self.modulus = None if modulus is None else int(modulus)

    def __eq__(self, other):
        return isinstance(other, Lattice2) and self.scale == other.scale and self.modulus == other.modulus

    def __hash__(self):
        return hash((self.scale, self.modulus))

    def wrap(self, ints):
        ints = np.asarray(ints, dtype=np.int64)
        if self.modulus is None:
            return ints
        n = self.modulus
        return (ints + n // 2) % n - n // 2

    def physical(self, ints):
        return np.asarray(ints, dtype=float) * np.asarray(self.scale)

    def sigma(self, a, b):
        """``exp(-2 pi i a_x b_omega)`` for integer arrays ``a``, ``b`` of shape (..., 2)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        prod = a[..., 0] * b[..., 1]
        if self.modulus is not None:
            # sx * sw = 1/n on the torus, so reduce exactly before the exponential
            return np.exp(-2j * np.pi * (prod % self.modulus) / self.modulus)
        return np.exp(-2j * np.pi * prod * self.scale[0] * self.scale[1])

    @classmethod
    def for_grid(cls, grid: GridSpec):
        return cls((grid.dt, 1.0 / grid.L), grid.n)

    def to_ints(self, pts, tol=1e-9):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        raw = pts / np.asarray(self.scale)
        ints = np.rint(raw)
        if np.abs(raw - ints).max(initial=0.0) > tol * max(1.0, np.abs(raw).max(initial=0.0)):
            raise OffGrid("points are not on the phase-space lattice")
        return self.wrap(ints.astype(np.int64))


class _Index:
    """Sorted-key lookup of integer pairs."""

    def __init__(self, ints):
        ints = np.asarray(ints, dtype=np.int64).reshape(-1, 2)
        self.off = int(np.abs(ints).max(initial=0)) + 1
        keys = self._key(ints)
        self.order = np.argsort(keys, kind="stable")
        self.sorted = keys[self.order]
        if np.any(np.diff(self.sorted) == 0):
            raise ValueError("duplicate coordinates")

    def _key(self, ints):
        span = 4 * self.off + 1
        return (ints[..., 0] + 2 * self.off) * span + (ints[..., 1] + 2 * self.off)

    def lookup(self, ints):
        ints = np.asarray(ints, dtype=np.int64)
        inside = np.all(np.abs(ints) < 2 * self.off, axis=-1)
        keys = self._key(np.where(inside[..., None], ints, 0))
        pos = np.clip(np.searchsorted(self.sorted, keys), 0, len(self.sorted) - 1)
        hit = inside & (self.sorted[pos] == keys) if len(self.sorted) else np.zeros(keys.shape, bool)
        return np.where(hit, self.order[pos] if len(self.sorted) else -1, -1)


@dataclass(frozen=True, eq=False)
class TransversalSample:
    """Orbit points ``T_w`` used as kernel bases, with Birkhoff weights."""

    bases: np.ndarray  # integer coordinates (m, 2)
    weights: np.ndarray
    lattice: Lattice2
    k: float = 0.0

    def __post_init__(self):
        b = np.asarray(self.bases, dtype=np.int64).reshape(-1, 2)
        w = np.asarray(self.weights, dtype=float).reshape(len(b))
        object.__setattr__(self, "bases", b)
        object.__setattr__(self, "weights", w)
        _Index(b)  # rejects duplicates

    def __len__(self):
        return len(self.bases)

    @property
    def physical(self):
        return self.lattice.physical(self.bases)

    @property
    def core(self):
        return np.flatnonzero(self.weights > 0)

    @classmethod
    def uniform(cls, bases, lattice: Lattice2):
        b = np.asarray(bases, dtype=np.int64).reshape(-1, 2)
        return cls(b, np.full(len(b), 1.0 / len(b)), lattice, 0.0)

    @classmethod
    def from_system(cls, system: GaborSystem, k: float):
        """All system points as bases; uniform weights on the half-open cube ``C_k``."""
        lat = Lattice2.for_grid(system.grid)
        ints = lat.to_ints(system.points)
        core = Cube(k).half_open(system.points)
        if not core.any():
            raise ValueError(f"no points of the system in C_{k}")
        w = np.where(core, 1.0 / core.sum(), 0.0)
        return cls(ints, w, lat, float(k))


@dataclass(eq=False)
class TwistedKernel:
    sample: TransversalSample
    stencil: np.ndarray  # (s, 2) integer displacements
    values: np.ndarray  # (m, s, N, M)
    present: np.ndarray  # (m, s) bool
    r_supp: float = math.inf
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.stencil = np.asarray(self.stencil, dtype=np.int64).reshape(-1, 2)
        self.values = np.asarray(self.values, dtype=np.complex128)
        self.present = np.asarray(self.present, dtype=bool)
        m, s = len(self.sample), len(self.stencil)
        if self.values.shape[:2] != (m, s) or self.present.shape != (m, s):
            raise ValueError("kernel arrays do not match sample and stencil")

    @property
    def lattice(self) -> Lattice2:
        return self.sample.lattice

    @property
    def N(self) -> int:
        return self.values.shape[2]

    @property
    def M(self) -> int:
        return self.values.shape[3]

    @property
    def zero_slot(self) -> int:
        hit = np.flatnonzero(np.all(self.stencil == 0, axis=1))
        if hit.size == 0:
            raise IncompatibleKernels("stencil lacks the zero displacement")
        return int(hit[0])

    def block(self, w_idx, z):
        j = _Index(self.stencil).lookup(np.asarray(z, dtype=np.int64))
        if j < 0 or not self.present[w_idx, j]:
            return np.zeros((self.N, self.M), dtype=np.complex128)
        return self.values[w_idx, j]

    def dense(self):
        """Values with absent entries zeroed."""
        return np.where(self.present[:, :, None, None], self.values, 0)

    def sup_norm(self, bases=None) -> float:
        v = self.dense() if bases is None else self.dense()[bases]
        return float(np.sqrt((np.abs(v) ** 2).sum(axis=(2, 3))).max(initial=0.0))

    def row_mass(self) -> float:
        """``max_w sum_z ||K[w][z]||``."""
        return float(np.sqrt((np.abs(self.dense()) ** 2).sum(axis=(2, 3))).sum(axis=1).max(initial=0.0))

    def with_values(self, values, present=None, meta=None) -> "TwistedKernel":
        return TwistedKernel(
            self.sample,
            self.stencil,
            values,
            self.present if present is None else present,
            self.r_supp,
            {} if meta is None else meta,
        )

    def __sub__(self, other):
        _check_compatible(self, other, same_shape=True)
        return self.with_values(self.dense() - other.dense(), self.present | other.present)

    def to_dict(self):
        entries = []
        for w, j in zip(*np.nonzero(self.present)):
            blk = self.values[w, j]
            entries.append(
                {
                    "w_idx": int(w),
                    "z": self.stencil[j].tolist(),
                    "block": np.column_stack([blk.real.ravel(), blk.imag.ravel()]),
                }
            )
        return {
            "N": self.N,
            "M": self.M,
            "r_supp": self.r_supp,
            "scale": list(self.lattice.scale),
            "modulus": self.lattice.modulus,
            "bases": self.sample.bases,
            "weights": self.sample.weights,
            "entries": entries,
        }

    def to_json(self) -> str:
        return _io.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        lat = Lattice2(tuple(d["scale"]), d.get("modulus"))
        sample = TransversalSample(np.asarray(d["bases"]), np.asarray(d["weights"]), lat)
        zs = sorted({tuple(e["z"]) for e in d["entries"]})
        stencil = np.array(zs, dtype=np.int64).reshape(-1, 2)
        idx = {z: i for i, z in enumerate(zs)}
        N, M = d["N"], d["M"]
        values = np.zeros((len(sample), len(zs), N, M), dtype=np.complex128)
        present = np.zeros((len(sample), len(zs)), dtype=bool)
        for e in d["entries"]:
            b = np.asarray(e["block"], dtype=float)
            j = idx[tuple(e["z"])]
            values[e["w_idx"], j] = (b[:, 0] + 1j * b[:, 1]).reshape(N, M)
            present[e["w_idx"], j] = True
        r = d.get("r_supp")
        return cls(sample, stencil, values, present, math.inf if r is None else r)


# ---------------------------------------------------------------------------
# construction helpers


def groupoid_support(sample: TransversalSample, stencil):
    """``present[w, z]`` iff ``w + z`` is again a base (the groupoid condition)."""
    stencil = np.asarray(stencil, dtype=np.int64)
    idx = _Index(sample.bases)
    tgt = sample.lattice.wrap(sample.bases[:, None, :] + stencil[None, :, :])
    nbr = idx.lookup(tgt)
    return nbr >= 0, nbr


def disc_stencil(lattice: Lattice2, r_supp, step_ints=(1, 1)):
    """Integer displacements ``(a sx_i, b sw_i)`` with physical norm at most ``r_supp``."""
    sx, sw = lattice.scale
    px, pq = step_ints
    ax = int(math.floor(r_supp / (sx * px) + 1e-9))
    aq = int(math.floor(r_supp / (sw * pq) + 1e-9))
    a, b = np.meshgrid(np.arange(-ax, ax + 1) * px, np.arange(-aq, aq + 1) * pq, indexing="ij")
    ints = np.column_stack([a.ravel(), b.ravel()])
    phys = lattice.physical(ints)
    keep = np.einsum("ij,ij->i", phys, phys) <= r_supp ** 2 + 1e-9
    ints = lattice.wrap(ints[keep])
    ints = np.unique(ints, axis=0)
    return ints


def identity_kernel(sample: TransversalSample, stencil, N=1) -> TwistedKernel:
    stencil = np.asarray(stencil, dtype=np.int64)
    m, s = len(sample), len(stencil)
    values = np.zeros((m, s, N, N), dtype=np.complex128)
    present = np.zeros((m, s), dtype=bool)
    z0 = np.flatnonzero(np.all(stencil == 0, axis=1))
    if z0.size == 0:
        raise IncompatibleKernels("stencil lacks the zero displacement")
    values[:, z0[0]] = np.eye(N)
    present[:, z0[0]] = True
    return TwistedKernel(sample, stencil, values, present)


def random_kernel(sample: TransversalSample, stencil, N=1, M=None, seed=0) -> TwistedKernel:
    rng = np.random.default_rng(seed)
    M = N if M is None else M
    present, _ = groupoid_support(sample, stencil)
    shape = (len(sample), len(stencil), N, M)
    values = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    values = np.where(present[:, :, None, None], values, 0)
    return TwistedKernel(sample, stencil, values, present)


# ---------------------------------------------------------------------------
# algebra operations


def _check_compatible(f: TwistedKernel, g: TwistedKernel, same_shape=False):
    if f.sample is not g.sample:
        if not (
            f.lattice == g.lattice
            and np.array_equal(f.sample.bases, g.sample.bases)
            and np.array_equal(f.sample.weights, g.sample.weights)
        ):
            raise IncompatibleKernels("kernels live on different transversal samples")
    if not np.array_equal(f.stencil, g.stencil):
        raise IncompatibleKernels("kernels use different stencils")
    if same_shape and f.values.shape[2:] != g.values.shape[2:]:
        raise IncompatibleKernels("block shapes differ")
    if not same_shape and f.M != g.N:
        raise IncompatibleKernels(f"block sizes do not chain: {f.N}x{f.M} times {g.N}x{g.M}")


def _tables(sample: TransversalSample, stencil):
    lat = sample.lattice
    _, nbr = groupoid_support(sample, stencil)
    sidx = _Index(stencil)
    sums = lat.wrap(stencil[:, None, :] + stencil[None, :, :])
    sumidx = sidx.lookup(sums)
    # phase[v, u] = sigma(stencil[v], stencil[u])
    phase = lat.sigma(stencil[:, None, :], stencil[None, :, :])
    return nbr, sumidx, phase


def extend_stencil(f: TwistedKernel, stencil) -> TwistedKernel:
    """Re-express ``f`` on a larger stencil, padding with absent entries."""
    stencil = np.asarray(stencil, dtype=np.int64)
    pos = _Index(stencil).lookup(f.stencil)
    if np.any(pos < 0):
        raise IncompatibleKernels("new stencil does not contain the old one")
    values = np.zeros((len(f.sample), len(stencil)) + f.values.shape[2:], dtype=np.complex128)
    present = np.zeros((len(f.sample), len(stencil)), dtype=bool)
    values[:, pos] = f.values
    present[:, pos] = f.present
    return TwistedKernel(f.sample, stencil, values, present, f.r_supp, dict(f.meta))


def full_stencil(stencil, lattice: Lattice2):
    stencil = np.asarray(stencil, dtype=np.int64)
    sums = lattice.wrap((stencil[:, None, :] + stencil[None, :, :]).reshape(-1, 2))
    return np.unique(sums, axis=0)


def twisted_convolve(f: TwistedKernel, g: TwistedKernel, support="same", out_bases=None) -> TwistedKernel:
    """Twisted convolution ``f * g``; block products in the order ``F G``.

    ``support="same"`` keeps the common stencil and reports the dropped mass
    in ``meta["loss"]`` (max over bases of the summed ``|F||G|`` of dropped
    terms). ``support="full"`` widens the stencil to all pairwise sums first,
    so nothing is dropped. ``out_bases`` restricts which bases are evaluated.
    """
    _check_compatible(f, g)
    if support == "full":
        st = full_stencil(f.stencil, f.lattice)
        f, g = extend_stencil(f, st), extend_stencil(g, st)
    elif support != "same":
        raise ValueError("support must be 'same' or 'full'")
    nbr, sumidx, phase = _tables(f.sample, f.stencil)
    m = len(f.sample)
    ob = np.arange(m) if out_bases is None else np.asarray(out_bases, dtype=np.intp)
    F = np.ascontiguousarray(f.dense())
    G = np.ascontiguousarray(g.dense())
    out, loss, missing = kernels.twisted_convolve_dense(
        F,
        f.present.astype(np.uint8),
        G,
        g.present.astype(np.uint8),
        nbr.astype(np.intp),
        sumidx.astype(np.intp),
        phase,
        ob,
    )
    values = np.zeros((m, len(f.stencil), f.N, g.M), dtype=np.complex128)
    values[ob] = out
    present = np.zeros((m, len(f.stencil)), dtype=bool)
    # an entry is present when some term could reach it
    reach = np.zeros((len(ob), len(f.stencil)), dtype=bool)
    for u in range(len(f.stencil)):
        b2 = nbr[ob, u]
        rows = np.flatnonzero(g.present[ob, u] & (b2 >= 0))
        if rows.size == 0:
            continue
        vs = np.flatnonzero(sumidx[:, u] >= 0)
        hit = f.present[b2[rows]][:, vs]
        reach[rows[:, None], sumidx[vs, u][None, :]] |= hit
    present[ob] = reach
    nF = np.sqrt((np.abs(F) ** 2).sum(axis=(2, 3)))
    nG = np.sqrt((np.abs(G) ** 2).sum(axis=(2, 3)))
    meta = {
        "loss": float(loss.max(initial=0.0)),
        "loss_per_base": loss,
        "missing": int(missing),
        "evaluated": ob,
        "mass": float(nF.sum(axis=1).max(initial=0.0) * nG.sum(axis=1).max(initial=0.0)),
        "support": support,
    }
    return TwistedKernel(f.sample, f.stencil, values, present, min(f.r_supp, g.r_supp), meta)


def rounding_allowance(k: TwistedKernel) -> float:
    """Floating-point slack to add to a truncation-loss bound."""
    return 1e-12 * max(1.0, k.meta.get("mass", 0.0))


def involution(f: TwistedKernel) -> TwistedKernel:
    """``f^*[w][z] = conj(F[w+z][-z])^T exp(-2 pi i z_x z_omega)``; dropped mass in ``meta["loss"]``."""
    lat = f.lattice
    _, nbr = groupoid_support(f.sample, f.stencil)
    neg = _Index(f.stencil).lookup(lat.wrap(-f.stencil))
    phase = lat.sigma(f.stencil, f.stencil)
    m, s = f.present.shape
    values = np.zeros((m, s, f.M, f.N), dtype=np.complex128)
    present = np.zeros((m, s), dtype=bool)
    D = f.dense()
    loss = 0.0
    for j in range(s):
        src = nbr[:, j]
        ok = src >= 0
        if neg[j] < 0:
            if ok.any():
                loss = max(loss, float(np.sqrt((np.abs(D[src[ok], :]) ** 2).sum(axis=(2, 3))).max(initial=0.0)))
            continue
        blocks = D[src[ok], neg[j]]
        values[ok, j] = np.conj(np.swapaxes(blocks, 1, 2)) * phase[j]
        present[ok, j] = f.present[src[ok], neg[j]]
    return TwistedKernel(f.sample, f.stencil, values, present, f.r_supp, {"loss": loss})


def trace_kernel(f: TwistedKernel) -> complex:
    """Birkhoff average of the block trace at displacement zero (not divided by N)."""
    z0 = f.zero_slot
    D = f.dense()[:, z0]
    tr = np.trace(D, axis1=1, axis2=2)
    return complex(np.sum(f.sample.weights * tr))


def trace_residual_bound(fg: TwistedKernel, gf: TwistedKernel) -> float:
    """Truncation allowance for ``|Tr(f*g) - Tr(g*f)|``."""
    return max(fg.meta.get("loss", 0.0), gf.meta.get("loss", 0.0)) + rounding_allowance(fg) + rounding_allowance(gf)


# ---------------------------------------------------------------------------
# Gabor idempotent and noncommutative analysis/synthesis


def _support_pairs(sample: TransversalSample, r_supp):
    """Stencil of torus displacements within ``r_supp`` actually joining two bases."""
    lat = sample.lattice
    phys = sample.physical
    period = None
    if lat.modulus is not None:
        period = np.asarray(lat.scale) * lat.modulus
    tree = cKDTree(np.mod(phys, period) if period is not None else phys, boxsize=period)
    pairs = tree.query_pairs(r_supp + 1e-9, output_type="ndarray")
    d = np.concatenate([sample.bases[pairs[:, 1]] - sample.bases[pairs[:, 0]],
                        sample.bases[pairs[:, 0]] - sample.bases[pairs[:, 1]],
                        np.zeros((1, 2), dtype=np.int64)])
    return np.unique(lat.wrap(d), axis=0)


@dataclass(frozen=True)
class IdempotentReport:
    idempotency: float
    self_adjointness: float
    loss: float
    r_supp: float
    k: float

    def to_dict(self):
        return {
            "idempotency_residual": self.idempotency,
            "self_adjointness_residual": self.self_adjointness,
            "truncation_loss": self.loss,
            "r_supp": self.r_supp,
            "k": self.k,
        }


def _duals(system: GaborSystem, fa: FrameAnalysis, tol):
    fa.require_invertible(tol)
    Hs = [tf_shifts(g, system.points, False) for g in system.windows]
    Ds = [fa.solve(H, tol) for H in Hs]
    return Hs, Ds


def gabor_idempotent(system: GaborSystem, fa: FrameAnalysis, sample: TransversalSample, r_supp, tol=SOLVE_TOL,
                     residuals=True):
    """The N x N kernel ``P[mu][d]_ij = e(-lambda_x d_omega) <pi(lambda) g_i, S^{-1} pi(mu) g_j>``, ``lambda = mu + d``.

    Only one inverse of ``S`` is needed: duals at shifted orbit points follow
    from the exact covariance of the discrete frame operator. Residuals are
    measured on the weighted core of the sample.
    """
    lat = sample.lattice
    pts_int = lat.to_ints(system.points)
    if not np.array_equal(pts_int, sample.bases):
        raise IncompatibleKernels("sample bases must be the system points in order")
    stencil = _support_pairs(sample, r_supp)
    present, nbr = groupoid_support(sample, stencil)
    Hs, Ds = _duals(system, fa, tol)
    dt = system.grid.dt
    m, s, N = len(sample), len(stencil), system.N
    values = np.zeros((m, s, N, N), dtype=np.complex128)
    lam = np.where(present, nbr, 0)
    # e(-lambda_x d_omega), with lambda the wrapped target base
    ph = lat.sigma(sample.bases[lam], np.broadcast_to(stencil, (m, s, 2)))
    for j in range(N):
        for i in range(N):
            X = dt * (Ds[j].conj().T @ Hs[i])  # X[mu, lambda] = <pi(lambda) g_i, dual_{j,mu}>
            values[:, :, i, j] = X[np.arange(m)[:, None], lam] * ph
    values = np.where(present[:, :, None, None], values, 0)
    P = TwistedKernel(sample, stencil, values, present, float(r_supp), {"k": sample.k})
    if residuals:
        P.meta["report"] = idempotent_residuals(P)
    return P


def idempotent_residuals(P: TwistedKernel) -> IdempotentReport:
    core = P.sample.core
    PP = twisted_convolve(P, P, out_bases=core)
    diff = PP.dense()[core] - P.dense()[core]
    idem = float(np.sqrt((np.abs(diff) ** 2).sum(axis=(2, 3))).max(initial=0.0))
    Ps = involution(P)
    sa = Ps.dense()[core] - P.dense()[core]
    selfadj = float(np.sqrt((np.abs(sa) ** 2).sum(axis=(2, 3))).max(initial=0.0))
    return IdempotentReport(idem, selfadj, PP.meta["loss"], P.r_supp, P.sample.k)


def idempotent_trace(P: TwistedKernel, mode="unnormalized") -> float:
    t = trace_kernel(P).real
    if mode == "unnormalized":
        return float(t)
    if mode == "normalized":
        return float(t / P.N)
    raise ValueError("mode must be 'unnormalized' or 'normalized'")


def lattice_trace_oracle(system: GaborSystem, fa: FrameAnalysis, tol=SOLVE_TOL) -> float:
    """``sum_i <g_i, S^{-1} g_i>``: the covariance collapses the orbit average to one term."""
    total = 0.0
    for g in system.windows:
        x = fa.solve(g.values, tol)
        total += float(np.real(system.grid.inner(g.values, x)))
    return total


@dataclass(frozen=True)
class FrameMeasureRow:
    k: float
    count: int
    density: float
    normalized: float
    unnormalized: float

    @property
    def inverse_density(self) -> float:
        return 1.0 / self.density


@dataclass(frozen=True)
class FrameMeasureTable:
    rows: tuple
    N: int

    def deviations(self, reference, mode="unnormalized"):
        return [abs(getattr(r, mode) - reference) for r in self.rows]

    def to_dict(self):
        return {
            "N": self.N,
            "rows": [
                {
                    "k": r.k,
                    "count": r.count,
                    "density": r.density,
                    "inverse_density": r.inverse_density,
                    "normalized": r.normalized,
                    "unnormalized": r.unnormalized,
                }
                for r in self.rows
            ],
        }


def frame_measure(system: GaborSystem, fa: FrameAnalysis, ks, tol=SOLVE_TOL) -> FrameMeasureTable:
    """Averages of ``<pi(z) g_i, S^{-1} pi(z) g_i>`` over ``z`` in ``C_k``, with and without ``1/N``."""
    Hs, Ds = _duals(system, fa, tol)
    dt = system.grid.dt
    diag = sum(dt * np.real(np.sum(H.conj() * D, axis=0)) for H, D in zip(Hs, Ds))
    rows = []
    for k in ks:
        core = Cube(k).half_open(system.points)
        c = int(core.sum())
        if c == 0:
            raise ValueError(f"no points in C_{k}")
        un = float(diag[core].mean())
        rows.append(FrameMeasureRow(float(k), c, c / (k * k), un / system.N, un))
    return FrameMeasureTable(tuple(rows), system.N)


@dataclass(frozen=True, eq=False)
class FunctionField:
    """One window per transversal base, a finite stand-in for a section over the transversal."""

    sample: TransversalSample
    values: np.ndarray  # (m, n)
    grid: GridSpec

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (len(self.sample), self.grid.n):
            raise ValueError("field values must have one window per base")
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, sample, g: Window):
        return cls(sample, np.broadcast_to(g.values, (len(sample), g.grid.n)).copy(), g.grid)

    def sup_norm(self) -> float:
        return float(np.sqrt(self.grid.dt * (np.abs(self.values) ** 2).sum(axis=1)).max(initial=0.0))


def nc_synthesis(coeffs: TwistedKernel, windows) -> FunctionField:
    """``Psi(T_w) = sum_i sum_z c_i(w; z) pi(z) g_i``."""
    windows = tuple(windows)
    grid = windows[0].grid
    if coeffs.N != len(windows):
        raise IncompatibleKernels("one coefficient row per window is required")
    m = len(coeffs.sample)
    out = np.zeros((m, grid.n), dtype=np.complex128)
    D = coeffs.dense()[:, :, :, 0]
    zs = coeffs.lattice.physical(coeffs.stencil)
    active = np.flatnonzero(coeffs.present.any(axis=0))
    if active.size:
        for i, g in enumerate(windows):
            out += D[:, active, i] @ tf_shifts(g, zs[active], False).T
    return FunctionField(coeffs.sample, out, grid)


def nc_analysis(fld: FunctionField, system: GaborSystem, fa: FrameAnalysis, r_supp, bases=None, tol=SOLVE_TOL):
    """``c_i(w; z) = e(w_x z_omega) <pi(w) Psi(T_w), S^{-1} pi(w + z) g_i>`` for ``|z| <= r_supp``.

    Returns the coefficient column and the norm of the coefficients beyond
    ``r_supp`` (the dropped tail) in ``meta["tail"]``.
    """
    sample = fld.sample
    lat = sample.lattice
    stencil = _support_pairs(sample, r_supp)
    present, nbr = groupoid_support(sample, stencil)
    Hs, Ds = _duals(system, fa, tol)
    m, s, N = len(sample), len(stencil), system.N
    rows = np.arange(m) if bases is None else np.asarray(bases, dtype=np.intp)
    values = np.zeros((m, s, N, 1), dtype=np.complex128)
    tail = 0.0
    Pw = tf_shifts_field(fld, sample)
    dt = fld.grid.dt
    for b in rows:
        ok = present[b]
        lam = nbr[b, ok]
        ph = np.conj(lat.sigma(sample.bases[b], stencil[ok]))
        for i in range(N):
            full = dt * (Ds[i].conj().T @ Pw[b])  # <pi(w) Psi, dual_{i, lambda}> for all lambda
            values[b, ok, i, 0] = full[lam] * ph
            mask = np.ones(len(full), dtype=bool)
            mask[lam] = False
            tail = max(tail, float(np.abs(full[mask]).sum()))
    pres = np.zeros_like(present)
    pres[rows] = present[rows]
    return TwistedKernel(sample, stencil, values, pres, float(r_supp), {"tail": tail})


def tf_shifts_field(fld: FunctionField, sample: TransversalSample):
    """``pi(w) Psi(T_w)`` for each base ``w``."""
    phys = sample.physical
    out = np.empty_like(fld.values)
    for b in range(len(sample)):
        out[b] = tf_shifts(Window(fld.grid, fld.values[b]), phys[b : b + 1], False)[:, 0]
    return out


__all__ = [
    "Lattice2",
    "TransversalSample",
    "TwistedKernel",
    "FunctionField",
    "groupoid_support",
    "disc_stencil",
    "identity_kernel",
    "random_kernel",
    "extend_stencil",
    "full_stencil",
    "twisted_convolve",
    "rounding_allowance",
    "involution",
    "trace_kernel",
    "trace_residual_bound",
    "gabor_idempotent",
    "idempotent_residuals",
    "IdempotentReport",
    "idempotent_trace",
    "lattice_trace_oracle",
    "frame_measure",
    "FrameMeasureTable",
    "FrameMeasureRow",
    "nc_synthesis",
    "nc_analysis",
]
