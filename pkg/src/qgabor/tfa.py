"""Discrete time-frequency analysis on a periodic grid.

Functions live on ``n`` samples ``t_j = -L/2 + j L/n`` of a circle of length
``L``. Translation is a spectral phase ramp, so every time-frequency shift is
exactly unitary. For points with ``x`` a multiple of ``L/n`` and ``omega`` a
multiple of ``1/L`` the shifts satisfy the Weyl relations exactly, which makes
covariance identities hold to rounding error; only truncation of the point set
then separates finite computations from the infinite ones.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache

import numpy as np
import scipy.linalg as sla

from . import _io
from .errors import DegenerateInterior, FrameOperatorSingular, NyquistViolation, OffGrid
from .pointset import Cube, PointSet, hole_radius

NYQ_TOL = 1e-9
SOLVE_TOL = 1e-6
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    n: int = 512
    L: float = 16.0

    def __post_init__(self):
        n = int(self.n)
        if n < 64 or n & (n - 1):
            raise ValueError("n must be a power of two and at least 64")
        if not self.L > 0:
            raise ValueError("period L must be positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", float(self.L))

    @property
    def dt(self) -> float:
        return self.L / self.n

    @property
    def dw(self) -> float:
        return 1.0 / self.L

    @cached_property
    def t(self):
        t = -self.L / 2 + self.dt * np.arange(self.n)
        t.setflags(write=False)
        return t

    @cached_property
    def nu(self):
        nu = np.fft.fftfreq(self.n, self.dt)
        nu.setflags(write=False)
        return nu

    @property
    def omega_max(self) -> float:
        """Largest admissible |omega|, one frequency step inside Nyquist."""
        return self.n / (2 * self.L) - 1 / self.L

    def in_nyquist(self, pts):
        pts = np.atleast_2d(pts)
        return np.abs(pts[:, 1]) <= self.omega_max + NYQ_TOL

    def check_nyquist(self, pts):
        ok = self.in_nyquist(pts)
        if not ok.all():
            bad = np.atleast_2d(pts)[~ok][0]
            raise NyquistViolation(f"frequency {bad[1]:.6g} exceeds margin {self.omega_max:.6g}")

    def on_grid(self, pts, tol=1e-9):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        p = pts[:, 0] / self.dt
        q = pts[:, 1] * self.L
        return (np.abs(p - np.rint(p)) <= tol) & (np.abs(q - np.rint(q)) <= tol)

    def check_on_grid(self, pts):
        ok = self.on_grid(pts)
        if not ok.all():
            raise OffGrid(f"point {tuple(np.atleast_2d(pts)[~ok][0])} is not on the phase-space grid")

    def box(self):
        """The full Nyquist box: x in [-L/2, L/2), |omega| <= omega_max."""
        return (-self.L / 2, self.L / 2), (-self.omega_max, self.omega_max)

    def in_box(self, pts):
        pts = np.atleast_2d(pts)
        (x0, x1), (w0, w1) = self.box()
        return (
            (pts[:, 0] >= x0 - NYQ_TOL)
            & (pts[:, 0] < x1 - NYQ_TOL)
            & (pts[:, 1] >= w0 - NYQ_TOL)
            & (pts[:, 1] <= w1 + NYQ_TOL)
        )

    def inner(self, f, g):
        return self.dt * np.vdot(g, f)

    def norm(self, f):
        return math.sqrt(self.dt * float(np.sum(np.abs(f) ** 2)))

    def to_dict(self):
        return {"n": self.n, "L": self.L}


@dataclass(frozen=True, eq=False)
class Window:
    grid: GridSpec
    values: np.ndarray
    kind: str = "custom"
    params: tuple = ()

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128, copy=True).reshape(self.grid.n)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def norm(self) -> float:
        return self.grid.norm(self.values)

    def normalized(self) -> "Window":
        return replace(self, values=self.values / self.norm)

    def __mul__(self, c):
        return replace(self, values=self.values * c, kind="scaled", params=(self.kind,))

    __rmul__ = __mul__

    def to_dict(self):
        return {
            "grid": self.grid.to_dict(),
            "values": np.column_stack([self.values.real, self.values.imag]),
            "kind": self.kind,
            "params": list(self.params),
        }

    @classmethod
    def from_dict(cls, d):
        grid = GridSpec(d["grid"]["n"], d["grid"]["L"])
        v = np.asarray(d["values"], dtype=float)
        return cls(grid, v[:, 0] + 1j * v[:, 1], d.get("kind", "custom"), tuple(d.get("params", ())))


def gaussian_window(grid: GridSpec) -> Window:
    v = 2 ** 0.25 * np.exp(-np.pi * grid.t ** 2)
    return Window(grid, v, "gaussian").normalized()


def hermite1_window(grid: GridSpec) -> Window:
    v = grid.t * np.exp(-np.pi * grid.t ** 2)
    return Window(grid, v, "hermite1").normalized()


def make_window(kind: str, grid: GridSpec) -> Window:
    if kind == "gaussian":
        return gaussian_window(grid)
    if kind == "hermite1":
        return hermite1_window(grid)
    raise ValueError(f"unknown window kind {kind!r}")


# ---------------------------------------------------------------------------
# time-frequency shifts


def _shift_columns(grid: GridSpec, V, pts):
    """``pi(z_k)`` applied to the columns of ``V`` (n x k) or to one vector for all points."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    spec = np.fft.fft(V, axis=0)
    if spec.ndim == 1:
        spec = spec[:, None]
    ramp = np.exp(-2j * np.pi * np.outer(grid.nu, pts[:, 0]))
    shifted = np.fft.ifft(spec * ramp, axis=0)
    return shifted * np.exp(2j * np.pi * np.outer(grid.t, pts[:, 1]))


def tf_shift(f: Window, z, check=True) -> Window:
    """``pi(z) f = M_omega T_x f``."""
    z = np.asarray(z, dtype=float).reshape(2)
    if check:
        f.grid.check_nyquist(z)
    v = _shift_columns(f.grid, f.values, z[None, :])[:, 0]
    return Window(f.grid, v, "translate", (f.kind, float(z[0]), float(z[1])))


def tf_shifts(g: Window, pts, check=True):
    """Matrix whose columns are ``pi(z_k) g``."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if check:
        g.grid.check_nyquist(pts)
    if len(pts) == 0:
        return np.zeros((g.grid.n, 0), dtype=np.complex128)
    return _shift_columns(g.grid, g.values, pts)


def tf_matrix(grid: GridSpec, z):
    """Dense matrix of ``pi(z)``."""
    z = np.asarray(z, dtype=float).reshape(1, 2)
    spec = np.fft.fft(np.eye(grid.n), axis=0)
    out = np.fft.ifft(spec * np.exp(-2j * np.pi * grid.nu * z[0, 0])[:, None], axis=0)
    return out * np.exp(2j * np.pi * grid.t * z[0, 1])[:, None]


def cocycle_phase(z, w):
    """Scalar ``c`` with ``pi(z) pi(w) = c pi(z + w)``, namely ``exp(-2 pi i x_z omega_w)``."""
    return np.exp(-2j * np.pi * z[0] * w[1])


def stft(f: Window, g: Window, points, check=True):
    """``V_g f(z) = <f, pi(z) g>`` at each point."""
    H = tf_shifts(g, points, check)
    return f.grid.dt * (H.conj().T @ f.values)


# ---------------------------------------------------------------------------
# Gabor systems and frame operators


@dataclass(frozen=True, eq=False)
class GaborSystem:
    """Multiwindow system over a finite point set on one grid.

    ``check`` disables the Nyquist test for displaced copies of a boxed set,
    which may leave the box but still act exactly on the periodic grid.
    """

    points: np.ndarray
    windows: tuple
    region: tuple | None = None
    provenance: str = ""
    check: bool = True

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        wins = tuple(self.windows)
        if not wins:
            raise ValueError("a Gabor system needs at least one window")
        grid = wins[0].grid
        if any(w.grid != grid for w in wins):
            raise ValueError("windows must share one grid")
        object.__setattr__(self, "windows", wins)
        if self.check:
            grid.check_nyquist(pts)

    @property
    def grid(self) -> GridSpec:
        return self.windows[0].grid

    @property
    def N(self) -> int:
        return len(self.windows)

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_pointset(cls, ps: PointSet, windows, grid: GridSpec | None = None) -> "GaborSystem":
        """Restrict ``ps`` to the Nyquist box of the grid."""
        windows = tuple(windows) if isinstance(windows, (list, tuple)) else (windows,)
        grid = windows[0].grid if grid is None else grid
        keep = grid.in_box(ps.points)
        return cls(ps.points[keep], windows, grid.box(), ps.provenance)

    def shifted(self, w) -> "GaborSystem":
        """Same truncation displaced by ``-w``: points ``(T ∩ box) - w``."""
        w = np.asarray(w, dtype=float)
        return GaborSystem(self.points - w, self.windows, self.region, f"{self.provenance}-{tuple(w)}", False)

    def synthesis(self, i=None):
        """Columns ``pi(z) g_i`` for all points (all windows stacked when ``i`` is None)."""
        if i is not None:
            return tf_shifts(self.windows[i], self.points, False)
        return np.concatenate([tf_shifts(g, self.points, False) for g in self.windows], axis=1)


@dataclass(frozen=True)
class FrameBounds:
    A: float
    B: float
    interior_fraction: float
    interior_dim: int

    def to_dict(self):
        return {"A": self.A, "B": self.B, "interior_fraction": self.interior_fraction, "interior_dim": self.interior_dim}


@dataclass(frozen=True, eq=False)
class FrameAnalysis:
    """Truncated frame operator with cached spectral data."""

    S: np.ndarray
    grid: GridSpec
    n_points: int = 0
    n_windows: int = 1
    bounds: FrameBounds | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        S = np.array(self.S, dtype=np.complex128, copy=True)
        S.setflags(write=False)
        object.__setattr__(self, "S", S)

    @cached_property
    def eigenvalues(self):
        return np.linalg.eigvalsh(self.S)

    @property
    def min_eig(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max_eig(self) -> float:
        return float(self.eigenvalues[-1])

    @cached_property
    def _cho(self):
        return sla.cho_factor(self.S, lower=False)

    def require_invertible(self, tol=SOLVE_TOL):
        if not self.min_eig > tol:
            raise FrameOperatorSingular(f"smallest eigenvalue {self.min_eig:.3g} <= tol {tol:.3g}")

    def solve(self, b, tol=SOLVE_TOL):
        """``S^{-1} b`` by Cholesky with one refinement step when needed."""
        self.require_invertible(tol)
        x = sla.cho_solve(self._cho, b)
        r = b - self.S @ x
        if np.linalg.norm(r) > RESIDUAL_TOL * max(np.linalg.norm(b), 1e-300):
            x = x + sla.cho_solve(self._cho, r)
        return x

    @cached_property
    def inverse(self):
        inv = self.solve(np.eye(self.grid.n, dtype=np.complex128))
        inv = (inv + inv.conj().T) / 2
        inv.setflags(write=False)
        return inv

    def with_bounds(self, bounds: FrameBounds) -> "FrameAnalysis":
        fa = FrameAnalysis(self.S, self.grid, self.n_points, self.n_windows, bounds, dict(self.meta))
        # spectral caches carry over
        for key in ("eigenvalues", "_cho", "inverse"):
            if key in self.__dict__:
                fa.__dict__[key] = self.__dict__[key]
        return fa

    def report(self):
        d = {
            "n": self.grid.n,
            "L": self.grid.L,
            "points": self.n_points,
            "windows": self.n_windows,
            "eigen_extremes": [self.min_eig, self.max_eig],
        }
        if self.bounds is not None:
            d.update({"A": self.bounds.A, "B": self.bounds.B, "interior_fraction": self.bounds.interior_fraction})
        d.update(self.meta)
        return d

    def dump(self, path):
        """Row-major complex doubles after the 8-byte magic ``QGSOP001``."""
        with open(path, "wb") as fh:
            fh.write(b"QGSOP001")
            fh.write(np.ascontiguousarray(self.S, dtype="<c16").tobytes())


def load_operator(path):
    with open(path, "rb") as fh:
        head = fh.read(8)
        if head != b"QGSOP001":
            raise ValueError("not a frame operator dump")
        data = np.frombuffer(fh.read(), dtype="<c16")
    n = int(round(math.sqrt(data.size)))
    if n * n != data.size:
        raise ValueError("truncated frame operator dump")
    return data.reshape(n, n).copy()


def frame_operator(system: GaborSystem) -> FrameAnalysis:
    """``S = sum_i sum_z <., pi(z) g_i> pi(z) g_i`` as an n x n Hermitian matrix."""
    grid = system.grid
    S = np.zeros((grid.n, grid.n), dtype=np.complex128)
    for g in system.windows:
        H = tf_shifts(g, system.points, False)
        S += grid.dt * (H @ H.conj().T)
    S = (S + S.conj().T) / 2
    return FrameAnalysis(S, grid, len(system), system.N, meta={"provenance": system.provenance})


@lru_cache(maxsize=8)
def interior_subspace(n: int, L: float, fraction: float):
    """Orthonormal basis of functions concentrated in the central time-frequency box.

    The box is the central ``fraction`` of both the time circle and the
    frequency band; the basis spans the eigenvectors of the time-band-time
    concentration operator with eigenvalue at least 1/2.
    """
    grid = GridSpec(n, L)
    mt = (np.abs(grid.t) <= fraction * L / 2 + 1e-12).astype(float)
    mn = (np.abs(grid.nu) <= fraction * n / (2 * L) + 1e-12).astype(float)
    F = np.fft.fft(np.eye(n), axis=0) / math.sqrt(n)
    band = F.conj().T @ (mn[:, None] * F)
    K = mt[:, None] * band * mt[None, :]
    K = (K + K.conj().T) / 2
    w, V = np.linalg.eigh(K)
    U = np.ascontiguousarray(V[:, w >= 0.5])
    U.setflags(write=False)
    return U


def frame_bounds(fa: FrameAnalysis, interior_fraction=0.5) -> FrameAnalysis:
    """Attach ``(A, B)``: A from the interior compression, B from the full operator."""
    if not 0 < interior_fraction <= 1:
        raise ValueError("interior_fraction must lie in (0, 1]")
    U = interior_subspace(fa.grid.n, fa.grid.L, float(interior_fraction))
    if U.shape[1] == 0:
        raise DegenerateInterior(f"no interior modes for fraction {interior_fraction}")
    C = U.conj().T @ fa.S @ U
    A = float(np.linalg.eigvalsh((C + C.conj().T) / 2)[0])
    return fa.with_bounds(FrameBounds(A, fa.max_eig, float(interior_fraction), int(U.shape[1])))


def analyze(system: GaborSystem, interior_fraction=0.5) -> FrameAnalysis:
    return frame_bounds(frame_operator(system), interior_fraction)


def dual_window(system: GaborSystem, fa: FrameAnalysis, z, i=0, tol=SOLVE_TOL) -> Window:
    """``S^{-1} pi(z) g_i``."""
    h = tf_shift(system.windows[i], z, check=False)
    x = fa.solve(h.values, tol)
    return Window(fa.grid, x, "dual", (i, float(np.asarray(z)[0]), float(np.asarray(z)[1])))


def solve_residual(fa: FrameAnalysis, x, b) -> float:
    return float(np.linalg.norm(fa.S @ x - b) / np.linalg.norm(b))


def reconstruct(f: Window, system: GaborSystem, fa: FrameAnalysis, tol=SOLVE_TOL, allow_singular=False):
    """Synthesize ``sum <f, S^{-1} pi(z) g_i> pi(z) g_i`` and return it with the relative residual.

    With ``allow_singular`` the inverse is replaced by a pseudo-inverse that
    discards eigenvalues below ``tol * max_eig``, so a system that is not a
    frame produces a visible residual instead of an error.
    """
    if allow_singular:
        Sinv = sla.pinvh(fa.S, rtol=tol)
        dual_f = Sinv @ f.values
    else:
        dual_f = fa.solve(f.values, tol)
    coeffs = []
    out = np.zeros(fa.grid.n, dtype=np.complex128)
    for g in system.windows:
        H = tf_shifts(g, system.points, False)
        c = fa.grid.dt * (H.conj().T @ dual_f)
        out += H @ c
        coeffs.append(c)
    rec = Window(fa.grid, out, "reconstruction")
    rel = fa.grid.norm(out - f.values) / max(fa.grid.norm(f.values), 1e-300)
    return rec, float(rel)


# ---------------------------------------------------------------------------
# norms and continuity


def stft_grid(f: Window, phi: Window | None = None):
    """``|V_phi f|`` on the full n x n grid of time steps dt and frequency steps 1/L."""
    grid = f.grid
    phi = gaussian_window(grid) if phi is None else phi
    n = grid.n
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    # row k holds f * conj(phi(t - k dt)); on-grid shifts are exact rolls
    rows = f.values[None, :] * np.conj(phi.values[idx])
    return grid.dt * np.abs(np.fft.fft(rows, axis=1))


def m1_norm_estimate(f: Window, phi: Window | None = None) -> float:
    """Riemann sum of ``|V_phi f|`` over the phase-space grid."""
    V = stft_grid(f, phi)
    return float(V.sum() * f.grid.dt * f.grid.dw)


def _interp(f: Window, ts):
    """Trigonometric interpolation of the samples at arbitrary times."""
    grid = f.grid
    spec = np.fft.fft(f.values) / grid.n
    ts = np.asarray(ts, dtype=float)
    E = np.exp(2j * np.pi * np.outer(ts - grid.t[0], grid.nu))
    return E @ spec


@dataclass(frozen=True)
class AmalgamReport:
    lhs: float
    rhs: float
    rel: int
    amalgam_norm: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12) + 1e-300

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "rel": self.rel, "amalgam_norm": self.amalgam_norm, "holds": self.holds}


def _section(T):
    if isinstance(T, PointSet):
        pts = T.points
        return np.sort(pts[np.abs(pts[:, 1]) <= 1e-9, 0])
    return np.sort(np.asarray(T, dtype=float).ravel())


def rel_1d(ts) -> int:
    """Maximum number of points in a closed unit interval."""
    ts = np.sort(np.asarray(ts, dtype=float))
    if ts.size == 0:
        return 0
    hi = np.searchsorted(ts, ts + 1 + 1e-9, side="right")
    return int((hi - np.arange(ts.size)).max())


def wiener_amalgam_check(f: Window, T, upsample=8) -> AmalgamReport:
    """Both sides of ``sum_t |f(t)| <= rel(T) ||f||_{W(L^inf, L^1)}``.

    The amalgam norm sums per-unit-cell maxima of ``|f|`` read off an
    ``upsample``-times zero-padded interpolation plus the values at ``T``,
    so each cell maximum dominates every sample of ``T`` in it.
    """
    grid = f.grid
    ts = _section(T)
    ts = ts[(ts >= -grid.L / 2) & (ts < grid.L / 2)]
    fT = np.abs(_interp(f, ts)) if ts.size else np.zeros(0)
    lhs = float(fT.sum())
    m = grid.n * upsample
    spec = np.fft.fft(f.values)
    pad = np.zeros(m, dtype=np.complex128)
    half = grid.n // 2
    pad[:half] = spec[:half]
    pad[-half:] = spec[-half:]
    fine = np.abs(np.fft.ifft(pad)) * upsample
    tf = grid.t[0] + (grid.L / m) * np.arange(m)
    cells = np.floor(np.concatenate([tf, ts])).astype(np.int64)
    vals = np.concatenate([fine, fT])
    ncell = np.unique(cells)
    sup = np.zeros(ncell.size)
    np.maximum.at(sup, np.searchsorted(ncell, cells), vals)
    amalgam = float(sup.sum())
    r = rel_1d(ts)
    return AmalgamReport(lhs, r * amalgam, r, amalgam)


def _pair_samples(delta, samples):
    zs = [np.array([a, b]) for a in (-delta, 0.0, delta) for b in (-delta, 0.0, delta)]
    us = []
    for k in range(1, samples + 1):
        r = delta * k / samples
        for j in range(2 * samples):
            a = math.pi * j / samples
            us.append(r * np.array([math.cos(a), math.sin(a)]))
    return zs, us


@dataclass(frozen=True)
class ModulusEstimate:
    delta: float
    lower: float
    upper: float
    samples: int

    def to_dict(self):
        return {"delta": self.delta, "lower": self.lower, "upper": self.upper, "samples": self.samples}


@lru_cache(maxsize=16)
def _lipschitz(key, values_bytes, n, L, h=1e-3):
    grid = GridSpec(n, L)
    g = Window(grid, np.frombuffer(values_bytes, dtype=np.complex128))
    best = 0.0
    for e in ((h, 0.0), (0.0, h)):
        d = tf_shift(g, e, check=False).values - g.values
        best = max(best, m1_norm_estimate(Window(grid, d)) / h)
    return best


def modulus_of_continuity(g: Window, delta: float, samples: int = 4) -> ModulusEstimate:
    """Sampled ``sup ||pi(z) g - pi(w) g||_{M^1}`` over ``|z - w| <= delta``.

    ``z`` runs over a 3 x 3 grid of ``[-delta, delta]^2`` and ``w - z`` over a
    polar grid of radius at most ``delta``. The upper value adds a Lipschitz
    slack proportional to the sample spacing; it is a heuristic, not a bound.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if delta == 0:
        return ModulusEstimate(0.0, 0.0, 0.0, samples)
    grid = g.grid
    zs, us = _pair_samples(delta, samples)
    Hz = tf_shifts(g, np.array(zs), False)
    best = 0.0
    for k, z in enumerate(zs):
        Hw = tf_shifts(g, np.array([z + u for u in us]), False)
        for j in range(Hw.shape[1]):
            best = max(best, m1_norm_estimate(Window(grid, Hz[:, k] - Hw[:, j])))
    lip = _lipschitz(g.kind, g.values.tobytes(), grid.n, grid.L)
    slack = 2 * lip * delta / samples
    return ModulusEstimate(float(delta), best, best + slack, samples)


def modulus_profile(g: Window, deltas, samples: int = 4):
    """Estimates over increasing deltas, made monotone by a running maximum."""
    out = []
    lo = hi = 0.0
    for d in sorted(float(x) for x in deltas):
        e = modulus_of_continuity(g, d, samples)
        lo, hi = max(lo, e.lower), max(hi, e.upper)
        out.append(ModulusEstimate(d, lo, hi, samples))
    return out


@dataclass(frozen=True)
class GOCRVerdict:
    verdict: str
    delta: float
    modulus: float
    hole_upper: float
    note: str = ""

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "delta": self.delta,
            "modulus_lower": self.modulus,
            "hole_upper": self.hole_upper,
            "note": self.note,
        }


def gocr_check(g: Window, ps: PointSet, region=None, deltas=None, grid_step=0.02, samples=3) -> GOCRVerdict:
    """Sufficient frame condition: hole below some delta with sampled modulus below 1.

    Only ``sufficient`` or ``inconclusive`` is ever returned, since both
    quantities are grid surrogates.
    """
    if len(ps) == 0:
        warnings.warn("empty point set: frame condition cannot hold", RuntimeWarning, stacklevel=2)
        return GOCRVerdict("inconclusive", 0.0, 0.0, math.inf, "empty point set")
    deltas = np.linspace(0.05, 1.0, 20) if deltas is None else deltas
    best_d, best_m = 0.0, 0.0
    for e in modulus_profile(g, deltas, samples):
        if e.lower >= 1:
            break
        best_d, best_m = e.delta, e.lower
    region = Cube(ps.region.side / 2, ps.region.center) if region is None else region
    cert = hole_radius(ps, region, grid_step)
    verdict = "sufficient" if best_d > 0 and cert.upper < best_d else "inconclusive"
    return GOCRVerdict(verdict, best_d, best_m, cert.upper)


# ---------------------------------------------------------------------------
# multiwindow systems and orbit checks


def multiwindow_from_translates(g: Window, translates, check=True):
    return [tf_shift(g, z, check) for z in translates]


def covariance_residual(system: GaborSystem, w) -> float:
    """``||S^T pi(w) - pi(w) S^{T-w}||_2`` with ``S^{T-w}`` built on ``(T ∩ box) - w``."""
    w = np.asarray(w, dtype=float)
    system.grid.check_nyquist(w)
    S1 = frame_operator(system).S
    S2 = frame_operator(system.shifted(w)).S
    P = tf_matrix(system.grid, w)
    return float(np.linalg.norm(S1 @ P - P @ S2, 2))


@dataclass(frozen=True)
class SpreadReport:
    shifts: tuple
    A: tuple
    B: tuple
    spread_A: float
    spread_B: float

    @property
    def spread(self) -> float:
        return max(self.spread_A, self.spread_B)

    def to_dict(self):
        return {
            "shifts": [list(z) for z in self.shifts],
            "A": list(self.A),
            "B": list(self.B),
            "spread_A": self.spread_A,
            "spread_B": self.spread_B,
        }


def transversal_bound_spread(ps: PointSet, windows, shifts, interior_fraction=0.5) -> SpreadReport:
    """Frame bounds of ``(ps - z) ∩ box`` against those of ``ps ∩ box``."""
    windows = tuple(windows) if isinstance(windows, (list, tuple)) else (windows,)
    ref = analyze(GaborSystem.from_pointset(ps, windows), interior_fraction).bounds
    As, Bs, zs = [], [], []
    for z in shifts:
        z = np.asarray(z, dtype=float)
        b = analyze(GaborSystem.from_pointset(ps.translate(-z), windows), interior_fraction).bounds
        As.append(b.A)
        Bs.append(b.B)
        zs.append((float(z[0]), float(z[1])))
    sA = max((abs(a - ref.A) / ref.A for a in As), default=0.0)
    sB = max((abs(b - ref.B) / ref.B for b in Bs), default=0.0)
    return SpreadReport(tuple(zs), tuple([ref.A] + As), tuple([ref.B] + Bs), float(sA), float(sB))


@dataclass(frozen=True)
class ContinuityProbe:
    shifts: tuple
    norms: tuple
    hull_distances: tuple
    note: str = "probe runs along the orbit only; limit points off the orbit are not reachable"

    def to_dict(self):
        return {
            "shifts": [list(z) for z in self.shifts],
            "norms": list(self.norms),
            "hull_distances": list(self.hull_distances),
            "note": self.note,
        }


def strong_continuity_probe(ps: PointSet, f: Window, shifts, windows=None, r_max=20.0) -> ContinuityProbe:
    """``||S^{ps - z_k} f - S^{ps} f||_2`` for each shift, beside the hull distance."""
    from .pointset import hull_metric

    windows = (gaussian_window(f.grid),) if windows is None else tuple(windows)
    S0 = frame_operator(GaborSystem.from_pointset(ps, windows)).S
    base = S0 @ f.values
    norms, dists, zs = [], [], []
    for z in shifts:
        z = np.asarray(z, dtype=float)
        moved = ps.translate(-z)
        Sz = frame_operator(GaborSystem.from_pointset(moved, windows)).S
        norms.append(f.grid.norm(Sz @ f.values - base))
        dists.append(hull_metric(moved, ps, r_max))
        zs.append((float(z[0]), float(z[1])))
    return ContinuityProbe(tuple(zs), tuple(norms), tuple(dists))


def window_json(w: Window) -> str:
    return _io.dumps(w.to_dict())


__all__ = [
    "GridSpec",
    "Window",
    "gaussian_window",
    "hermite1_window",
    "make_window",
    "tf_shift",
    "tf_shifts",
    "tf_matrix",
    "cocycle_phase",
    "stft",
    "stft_grid",
    "GaborSystem",
    "FrameBounds",
    "FrameAnalysis",
    "frame_operator",
    "frame_bounds",
    "analyze",
    "interior_subspace",
    "dual_window",
    "solve_residual",
    "reconstruct",
    "m1_norm_estimate",
    "wiener_amalgam_check",
    "rel_1d",
    "AmalgamReport",
    "modulus_of_continuity",
    "modulus_profile",
    "ModulusEstimate",
    "gocr_check",
    "GOCRVerdict",
    "multiwindow_from_translates",
    "covariance_residual",
    "transversal_bound_spread",
    "SpreadReport",
    "strong_continuity_probe",
    "ContinuityProbe",
    "load_operator",
    "window_json",
]
