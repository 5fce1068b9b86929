"""The acceptance suite as plain functions.

Each ``criterion_*`` function returns a :class:`CriterionResult`; the pytest
suite and the ``qgabor acceptance`` command both call them. Tolerances are
the stated ones and are not tuned per run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _oracles
from .algebra import (
    Lattice2,
    TransversalSample,
    frame_measure,
    gabor_idempotent,
    idempotent_trace,
    involution,
    lattice_trace_oracle,
    random_kernel,
    trace_kernel,
    trace_residual_bound,
    rounding_allowance,
    twisted_convolve,
)
from .gaplabel import gap_label_generators
from .holefill import fill_holes, union_translates
from .patch import enumerate_patches
from .pointset import (
    Cube,
    density,
    fibonacci_product_scheme,
    gen_cut_project,
    gen_lattice,
    gen_marked_lattice,
    gen_sturmian,
    min_separation,
    sturmian_approach_shifts,
)
from .tfa import (
    GaborSystem,
    GridSpec,
    Window,
    analyze,
    cocycle_phase,
    covariance_residual,
    frame_operator,
    gaussian_window,
    stft,
    tf_shift,
    transversal_bound_spread,
)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] criterion {self.number:2d}: {self.name} ({self.seconds:.1f}s)"

    def to_dict(self):
        return {
            "criterion": self.number,
            "name": self.name,
            "passed": self.passed,
            "seconds": self.seconds,
            "detail": self.detail,
        }


HALF = np.diag([0.5, 0.5])


def _half_lattice_system(n=512, L=16.0, windows=None):
    grid = GridSpec(n, L)
    ps = gen_lattice(HALF, Cube(2 * L + n / L + 4))
    wins = (gaussian_window(grid),) if windows is None else windows
    return GaborSystem.from_pointset(ps, wins), ps


def _sturmian_system(n=512, L=16.0, side=60.0):
    grid = GridSpec(n, L)
    ps = gen_sturmian(Cube(side), scale=0.5)
    return GaborSystem.from_pointset(ps, gaussian_window(grid)), ps


def _idempotent(system, fa, k, r_supp):
    sample = TransversalSample.from_system(system, k)
    return gabor_idempotent(system, fa, sample, r_supp)


def criterion_1() -> CriterionResult:
    t0 = time.perf_counter()
    system, _ = _half_lattice_system()
    fa = frame_operator(system)
    P = _idempotent(system, fa, 12, 6)
    tr = idempotent_trace(P, "unnormalized")
    oracle = lattice_trace_oracle(system, fa)
    secs = time.perf_counter() - t0
    ok = 0.245 <= tr <= 0.255 and abs(tr - oracle) <= 1e-6 and secs < 60
    d = {"trace": tr, "oracle": oracle, "target": 0.25, "runtime_s": secs, "n": 512, "L": 16.0, "k": 12, "r_supp": 6}
    return CriterionResult(1, "trace of the Gabor idempotent on (1/2)Z^2", ok, d)


def criterion_2() -> CriterionResult:
    system, _ = _sturmian_system()
    fa = frame_operator(system)
    table = frame_measure(system, fa, [8, 12])
    counted = density(gen_sturmian(Cube(110), scale=0.5), [100]).estimate
    ref = 1.0 / counted
    devs = table.deviations(ref)
    rel = devs[-1] / ref
    ok = rel <= 0.05 and devs[1] < devs[0]
    d = {
        "frame_measure": [r.unnormalized for r in table.rows],
        "k": [8, 12],
        "counted_density": counted,
        "inverse_density": ref,
        "deviations": devs,
        "relative_deviation": rel,
        "points": len(system),
    }
    return CriterionResult(2, "frame measure of the Sturmian system vs 1/Dens", ok, d)


def criterion_3() -> CriterionResult:
    system, _ = _half_lattice_system()
    fa = frame_operator(system)
    small = _idempotent(system, fa, 8, 4).meta["report"].idempotency
    big = _idempotent(system, fa, 12, 6).meta["report"].idempotency
    ok = big <= 1e-2 and big < small
    d = {"C8_r4": small, "C12_r6": big}
    return CriterionResult(3, "idempotency residual of P", ok, d)


def _shifts_in(system, count=10):
    pts = system.points
    order = np.lexsort((pts[:, 1], pts[:, 0], np.einsum("ij,ij->i", pts, pts)))
    return [pts[i] for i in order[1 : count + 1]]


def criterion_4() -> CriterionResult:
    out = {}
    ok = True
    for name, (system, _) in (("lattice", _half_lattice_system()), ("sturmian", _sturmian_system())):
        res = [covariance_residual(system, w) for w in _shifts_in(system)]
        out[name] = max(res)
        ok &= max(res) <= 1e-9
    return CriterionResult(4, "covariance of the frame operator along the orbit", ok, out)


def criterion_5() -> CriterionResult:
    lat = gen_lattice(2 * np.eye(2), Cube(24))
    a = fill_holes(lat, 0.8)
    ok_a = a.iterations <= 2 and a.certificate.upper < 0.8
    fib = gen_cut_project(fibonacci_product_scheme(), Cube(30)).transform(2 * np.eye(2))
    b = fill_holes(fib, 0.7)
    ups = [c.upper for c in b.hole_sequence]
    union = union_translates(fib, b.translates)  # raises on overlap
    ok_b = b.certificate.upper < 0.7 and all(y < x for x, y in zip(ups, ups[1:])) and min_separation(union) > 0
    d = {
        "lattice_translates": a.iterations,
        "lattice_hole_upper": a.certificate.upper,
        "lattice_sequence": [c.upper for c in a.hole_sequence],
        "lattice_ok": ok_a,
        "fibonacci_translates": b.iterations,
        "fibonacci_sequence": ups,
        "fibonacci_union_min_sep": min_separation(union),
        "fibonacci_ok": ok_b,
    }
    return CriterionResult(5, "hole filling by disjoint translates", ok_a and ok_b, d)


def criterion_6() -> CriterionResult:
    A_int = {}
    for n in (256, 512):
        grid = GridSpec(n, 16.0)
        ps = gen_lattice(np.eye(2), Cube(2 * 16 + n / 16 + 4))
        A_int[n] = analyze(GaborSystem.from_pointset(ps, gaussian_window(grid))).bounds.A
    A_half = {}
    for n in (256, 512, 1024):
        system, _ = _half_lattice_system(n)
        A_half[n] = analyze(system).bounds.A
    vals = list(A_half.values())
    spread = (max(vals) - min(vals)) / max(vals)
    ok = A_int[512] < 0.05 and A_int[512] < A_int[256] and min(vals) > 0.5 and spread <= 0.05
    d = {"Z2_A": {str(k): v for k, v in A_int.items()}, "half_Z2_A": {str(k): v for k, v in A_half.items()},
         "half_Z2_spread": spread}
    return CriterionResult(6, "lower frame bound at and above critical density", ok, d)


def criterion_7() -> CriterionResult:
    grid = GridSpec(512, 16.0)
    g = gaussian_window(grid)
    st = gen_sturmian(Cube(60), scale=0.5)
    shifts, defects = sturmian_approach_shifts([0.1, 0.03, 0.01, 0.003, 0.001], scale=0.5)
    s_st = transversal_bound_spread(st, g, shifts)
    lat = gen_lattice(HALF, Cube(60))
    s_lat = transversal_bound_spread(lat, g, [(0.5, 0.0), (1.0, 1.5), (-2.5, 0.5), (3.0, -2.0), (0.0, 4.0)])
    ok = s_st.spread <= 0.01 and s_lat.spread <= 1e-8
    d = {"sturmian": s_st.to_dict(), "sturmian_defects": defects, "lattice": s_lat.to_dict()}
    return CriterionResult(7, "frame bounds constant along the orbit", ok, d)


def criterion_8() -> CriterionResult:
    st = gen_sturmian(Cube(104))
    table = enumerate_patches(st, 1, Cube(100))
    dens = density(st, [100]).estimate
    total = sum(table.frequencies)
    z2 = enumerate_patches(gen_lattice(np.eye(2), Cube(24)), 1, Cube(20))
    ok = abs(total - dens) <= 0.01 * dens and len(z2) == 1 and abs(z2.frequencies[0] - 1) <= 1e-3
    d = {"sturmian_sum": total, "sturmian_density": dens, "sturmian_classes": len(table),
         "Z2_classes": len(z2), "Z2_frequency": z2.frequencies[0]}
    return CriterionResult(8, "patch frequencies", ok, d)


def criterion_9() -> CriterionResult:
    half = 32
    tm = gen_marked_lattice("thue_morse_2d", Cube(2 * half + 4))
    rep = gap_label_generators(tm, 0.0, 1, Cube(2 * half))
    oracle = sorted(set(_oracles.thue_morse_cross_frequencies(half).values()))
    exact_ok = rep.exact_generators is not None and list(rep.exact_generators) == oracle
    dyadic = all(f.denominator & (f.denominator - 1) == 0 for f in oracle)
    twisted = gap_label_generators(tm, 0.7, 1, Cube(2 * half)).twisted_generator
    st = gen_sturmian(Cube(104))
    tw_st = gap_label_generators(st, 0.7, 1, Cube(100)).twisted_generator
    ok = exact_ok and dyadic and abs(twisted - 0.7) <= 1e-12 and abs(tw_st - 1.4) <= 0.02 * 1.4
    d = {
        "frequencies": [str(f) for f in (rep.exact_generators or ())],
        "oracle": [str(f) for f in oracle],
        "thue_morse_twisted": twisted,
        "sturmian_twisted": tw_st,
    }
    return CriterionResult(9, "gap-labelling generators", ok, d)


def _max_block_diff(a: dict, b: dict):
    keys = set(a) | set(b)
    worst = 0.0
    for k in keys:
        x = a.get(k)
        y = b.get(k)
        if x is None:
            x = np.zeros_like(y)
        if y is None:
            y = np.zeros_like(x)
        worst = max(worst, float(np.abs(x - y).max()))
    return worst


def algebra_fixture(seed: int, N=2):
    """5 bases and the 3 x 3 stencil on a non-torus lattice with a genuine twist."""
    lat = Lattice2((0.5, 0.75))
    bases = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1)]
    sample = TransversalSample.uniform(bases, lat)
    a, b = np.meshgrid([-1, 0, 1], [-1, 0, 1], indexing="ij")
    stencil = np.column_stack([a.ravel(), b.ravel()])
    f = random_kernel(sample, stencil, N, seed=2 * seed)
    g = random_kernel(sample, stencil, N, seed=2 * seed + 1)
    return sample, stencil, f, g


def criterion_10() -> CriterionResult:
    worst_conv = 0.0
    anti_ok = trace_ok = True
    worst_anti = worst_trace = 0.0
    for seed in range(20):
        sample, stencil, f, g = algebra_fixture(seed)
        fg = twisted_convolve(f, g)
        brute = _oracles.brute_twisted_convolve(
            _oracles.kernel_to_dict(f), _oracles.kernel_to_dict(g), sample.bases.tolist(), stencil.tolist(), sample.lattice.scale
        )
        worst_conv = max(worst_conv, _max_block_diff(_oracles.kernel_to_dict(fg), brute))
        lhs = involution(fg)
        gs, fs = involution(g), involution(f)
        rhs = twisted_convolve(gs, fs)
        anti = (lhs - rhs).sup_norm()
        bound = fg.meta["loss"] + rhs.meta["loss"] + lhs.meta["loss"] + rounding_allowance(fg) + rounding_allowance(rhs)
        anti_ok &= anti <= bound
        worst_anti = max(worst_anti, anti)
        gf = twisted_convolve(g, f)
        tres = abs(trace_kernel(fg) - trace_kernel(gf))
        trace_ok &= tres <= trace_residual_bound(fg, gf)
        worst_trace = max(worst_trace, tres)
    ok = worst_conv <= 1e-12 and anti_ok and trace_ok
    d = {"convolution_vs_oracle": worst_conv, "anti_homomorphism": worst_anti, "trace_property": worst_trace,
         "anti_within_bound": anti_ok, "trace_within_bound": trace_ok}
    return CriterionResult(10, "twisted convolution algebra axioms", ok, d)


def tf_exactness_cases(count=100, seed=0, n=512, L=16.0):
    grid = GridSpec(n, L)
    rng = np.random.default_rng(seed)
    qmax = int(round(grid.omega_max * L))
    for _ in range(count):
        f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        p = rng.integers(-n // 2, n // 2, size=2)
        q = rng.integers(-qmax // 2, qmax // 2 + 1, size=2)
        z = np.array([p[0] * grid.dt, q[0] / L])
        w = np.array([p[1] * grid.dt, q[1] / L])
        yield grid, Window(grid, f), z, w


def criterion_11() -> CriterionResult:
    unit = comm = 0.0
    for grid, f, z, w in tf_exactness_cases():
        nf = grid.norm(f.values)
        unit = max(unit, abs(grid.norm(tf_shift(f, z).values) - nf) / nf)
        zw = tf_shift(tf_shift(f, w), z).values
        wz = tf_shift(tf_shift(f, z), w).values
        # pi(z) pi(w) = e^{2 pi i (x_w w_z - x_z w_w)} pi(w) pi(z)
        ph = cocycle_phase(z, w) / cocycle_phase(w, z)
        comm = max(comm, grid.norm(zw - ph * wz) / nf)
        zsum = tf_shift(f, z + w, check=False).values
        comm = max(comm, grid.norm(zw - cocycle_phase(z, w) * zsum) / nf)
    grid = GridSpec(1024, 32.0)
    g = gaussian_window(grid)
    rng = np.random.default_rng(11)
    pts = np.column_stack([rng.uniform(-3, 3, 12), rng.uniform(-3, 3, 12)])
    pts = np.vstack([[0.0, 0.0], pts])
    # the quadrature oracle lives off-grid; the FFT shift handles any x and omega
    V = stft(g, g, pts, check=True)
    quad = np.array([abs(_oracles.gaussian_stft_quad(x, om)) for x, om in pts])
    stft_err = float(np.abs(np.abs(V) - quad).max())
    closed = float(np.abs(quad - np.exp(-np.pi * (pts ** 2).sum(axis=1) / 2)).max())
    ok = unit <= 1e-12 and comm <= 1e-12 and stft_err <= 1e-6
    d = {"unitarity": unit, "commutation": comm, "stft_vs_quadrature": stft_err, "quadrature_vs_closed_form": closed}
    return CriterionResult(11, "time-frequency kernel exactness", ok, d)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
}


def run(number: int) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[number]()
    res.seconds = time.perf_counter() - t0
    return res


def run_all(numbers=None):
    return [run(k) for k in (sorted(CRITERIA) if numbers is None else numbers)]


__all__ = ["CriterionResult", "CRITERIA", "run", "run_all", "algebra_fixture", "tf_exactness_cases"]
