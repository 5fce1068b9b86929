import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgabor import errors
from qgabor.acceptance import algebra_fixture
from qgabor.algebra import (
    FunctionField,
    Lattice2,
    TransversalSample,
    TwistedKernel,
    disc_stencil,
    frame_measure,
    gabor_idempotent,
    identity_kernel,
    idempotent_trace,
    involution,
    lattice_trace_oracle,
    nc_analysis,
    nc_synthesis,
    random_kernel,
    rounding_allowance,
    trace_kernel,
    trace_residual_bound,
    twisted_convolve,
)
from qgabor.pointset import Cube, gen_lattice
from qgabor.tfa import GaborSystem, GridSpec, frame_operator, gaussian_window, hermite1_window

from oracles import brute_twisted_convolve, kernel_to_dict

G512 = GridSpec(512, 16.0)


def _max_diff(a, b):
    keys = set(a) | set(b)
    return max(float(np.abs(a.get(k, 0) - b.get(k, 0)).max()) for k in keys)


@pytest.fixture(scope="module")
def half_system():
    ps = gen_lattice(np.eye(2) / 2, Cube(68))
    system = GaborSystem.from_pointset(ps, gaussian_window(G512))
    return system, frame_operator(system)


# ---------------------------------------------------------------------------
# algebra on small random kernels


@given(st.integers(0, 10_000), st.integers(1, 3))
def test_convolution_matches_brute_force(seed, N):
    sample, stencil, f, g = algebra_fixture(seed, N)
    fg = twisted_convolve(f, g)
    ref = brute_twisted_convolve(kernel_to_dict(f), kernel_to_dict(g), sample.bases.tolist(), stencil.tolist(),
                                 sample.lattice.scale)
    assert _max_diff(kernel_to_dict(fg), ref) <= 1e-12
    assert fg.meta["missing"] == 0


@given(st.integers(0, 10_000))
def test_convolution_on_torus_matches_brute_force(seed):
    lat = Lattice2((0.25, 1 / 8.0), 32)
    rng = np.random.default_rng(seed)
    cand = np.array([(a, b) for a in range(-16, 16) for b in range(-16, 16)])
    bases = cand[rng.choice(len(cand), 12, replace=False)]
    sample = TransversalSample.uniform(bases, lat)
    stencil = disc_stencil(lat, 1.0)
    f = random_kernel(sample, stencil, 1, seed=seed)
    g = random_kernel(sample, stencil, 1, seed=seed + 1)
    ref = brute_twisted_convolve(kernel_to_dict(f), kernel_to_dict(g), bases.tolist(), stencil.tolist(),
                                 lat.scale, modulus=32)
    assert _max_diff(kernel_to_dict(twisted_convolve(f, g)), ref) <= 1e-12


@given(st.integers(0, 10_000))
def test_identity_is_unit(seed):
    sample, stencil, f, _ = algebra_fixture(seed)
    e = identity_kernel(sample, stencil, 2)
    assert (twisted_convolve(e, f) - f).sup_norm() == 0
    assert (twisted_convolve(f, e) - f).sup_norm() == 0


@given(st.integers(0, 10_000))
def test_involution_is_involutive(seed):
    _, _, f, _ = algebra_fixture(seed)
    assert (involution(involution(f)) - f).sup_norm() <= 1e-15


@given(st.integers(0, 10_000))
def test_anti_homomorphism_within_bound(seed):
    _, _, f, g = algebra_fixture(seed)
    fg = twisted_convolve(f, g)
    rhs = twisted_convolve(involution(g), involution(f))
    bound = fg.meta["loss"] + rhs.meta["loss"] + rounding_allowance(fg) + rounding_allowance(rhs)
    assert (involution(fg) - rhs).sup_norm() <= bound


@given(st.integers(0, 10_000))
def test_trace_property_within_bound(seed):
    _, _, f, g = algebra_fixture(seed)
    fg, gf = twisted_convolve(f, g), twisted_convolve(g, f)
    assert abs(trace_kernel(fg) - trace_kernel(gf)) <= trace_residual_bound(fg, gf)


@given(st.integers(0, 10_000))
def test_trace_positive(seed):
    _, _, f, _ = algebra_fixture(seed)
    assert trace_kernel(twisted_convolve(involution(f), f)).real > 0


@given(st.integers(0, 5_000))
def test_associativity_within_bound(seed):
    sample, stencil, f, g = algebra_fixture(seed)
    h = random_kernel(sample, stencil, 2, seed=10_000 + seed)
    left = twisted_convolve(twisted_convolve(f, g), h)
    fg = twisted_convolve(f, g)
    gh = twisted_convolve(g, h)
    right = twisted_convolve(f, gh)
    bound = fg.meta["loss"] * h.row_mass() + f.row_mass() * gh.meta["loss"]
    bound += left.meta["loss"] + right.meta["loss"] + rounding_allowance(left) + rounding_allowance(right)
    assert (left - right).sup_norm() <= bound


def test_full_support_drops_nothing():
    _, _, f, g = algebra_fixture(3)
    full = twisted_convolve(f, g, support="full")
    assert full.meta["loss"] == 0.0


def test_incompatible_kernels():
    sample, stencil, f, _ = algebra_fixture(0)
    other = random_kernel(sample, stencil[:5], 2)
    with pytest.raises(errors.IncompatibleKernels):
        twisted_convolve(f, other)
    g3 = random_kernel(sample, stencil, 3)
    with pytest.raises(errors.IncompatibleKernels):
        twisted_convolve(f, g3)


def test_kernel_json_roundtrip():
    _, _, f, _ = algebra_fixture(5)
    back = TwistedKernel.from_dict(json.loads(f.to_json()))
    assert (back - f).sup_norm() == 0


def test_off_grid_points_rejected():
    with pytest.raises(errors.OffGrid):
        Lattice2.for_grid(G512).to_ints([[0.01, 0.0]])


def test_sigma_exact_on_torus():
    lat = Lattice2.for_grid(G512)
    a = np.array([[5, 7]])
    b = np.array([[3, 512 + 9]])
    assert lat.sigma(a, b) == pytest.approx(lat.sigma(a, np.array([[3, 9]])), abs=1e-15)


# ---------------------------------------------------------------------------
# Gabor idempotent


def test_idempotent_lattice(half_system):
    system, fa = half_system
    sample = TransversalSample.from_system(system, 8)
    P = gabor_idempotent(system, fa, sample, 4)
    rep = P.meta["report"]
    assert rep.idempotency <= 1e-5
    assert rep.self_adjointness <= 1e-12
    assert idempotent_trace(P) == pytest.approx(0.25, abs=1e-9)
    assert idempotent_trace(P) == pytest.approx(lattice_trace_oracle(system, fa), abs=1e-9)


def test_frame_measure_lattice_constant(half_system):
    system, fa = half_system
    table = frame_measure(system, fa, [4, 8, 12])
    for r in table.rows:
        assert r.unnormalized == pytest.approx(0.25, abs=1e-12)
        assert r.density == 4.0


def test_two_window_measure():
    ps = gen_lattice(np.eye(2) / 2, Cube(68))
    system = GaborSystem.from_pointset(ps, (gaussian_window(G512), hermite1_window(G512)))
    fa = frame_operator(system)
    table = frame_measure(system, fa, [8])
    # sum over the windows, as for a single window, is 1/Dens
    assert table.rows[0].unnormalized == pytest.approx(0.25, abs=1e-9)
    assert table.rows[0].normalized == pytest.approx(0.125, abs=1e-9)
    assert lattice_trace_oracle(system, fa) == pytest.approx(0.25, abs=1e-9)


def test_analysis_synthesis_roundtrip(half_system):
    system, fa = half_system
    sample = TransversalSample.from_system(system, 4)
    g = gaussian_window(G512)
    fld = FunctionField.constant(sample, g)
    core = sample.core
    c = nc_analysis(fld, system, fa, 6, bases=core)
    back = nc_synthesis(c, system.windows)
    err = np.sqrt(G512.dt * (np.abs(back.values[core] - fld.values[core]) ** 2).sum(axis=1)).max()
    assert err < 1e-6


def test_zero_field_gives_zero_kernel(half_system):
    system, fa = half_system
    sample = TransversalSample.from_system(system, 2)
    fld = FunctionField(sample, np.zeros((len(sample), G512.n)), G512)
    c = nc_analysis(fld, system, fa, 2, bases=sample.core)
    assert c.sup_norm() == 0


def test_sample_requires_core():
    ps = gen_lattice(np.eye(2) / 2, Cube(68)).translate((0.25, 0.25))
    system = GaborSystem.from_pointset(ps, gaussian_window(G512))
    with pytest.raises(ValueError):
        TransversalSample.from_system(system, 0.1)
