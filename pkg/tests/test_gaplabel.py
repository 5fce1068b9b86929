from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgabor import errors
from qgabor.gaplabel import DISCLAIMER, clopen_measure, density_scaling_check, gap_label_generators
from qgabor.pointset import Cube, PointSet, gen_lattice, gen_marked_lattice, gen_sturmian

from oracles import thue_morse_cross_frequencies


@pytest.fixture(scope="module")
def tm():
    return gen_marked_lattice("thue_morse_2d", Cube(68))


@pytest.fixture(scope="module")
def sturmian():
    return gen_sturmian(Cube(104))


def test_plain_lattice():
    rep = gap_label_generators(gen_lattice(np.eye(2), Cube(20)), 0.0, 1, Cube(16))
    assert rep.frequency_generators == (1.0,)
    assert rep.twisted_generator is None


@pytest.mark.parametrize("half", [8, 16, 32])
def test_thue_morse_exact_against_substitution(tm, half):
    rep = gap_label_generators(tm, 0.0, 1, Cube(2 * half))
    oracle = sorted(set(thue_morse_cross_frequencies(half).values()))
    assert list(rep.exact_generators) == oracle
    for f in rep.exact_generators:
        assert isinstance(f, Fraction)
        assert f.denominator & (f.denominator - 1) == 0
    assert all(0 <= f <= 1 for f in rep.frequency_generators)


def test_marked_lattice_twisted_equals_theta(tm):
    rep = gap_label_generators(tm, 0.7, 1, Cube(64))
    assert rep.density == 1.0
    assert rep.twisted_generator == pytest.approx(0.7, abs=1e-12)


def test_sturmian_twisted(sturmian):
    rep = gap_label_generators(sturmian, 0.7, 1, Cube(100))
    assert rep.twisted_generator == pytest.approx(1.4, rel=0.02)
    assert rep.twisted_generator == pytest.approx(0.7 / rep.density, abs=1e-12)


@given(st.floats(-5, 5, allow_nan=False).filter(lambda t: t != 0))
def test_twisted_linear_in_theta(theta):
    ps = gen_sturmian(Cube(24))
    a = gap_label_generators(ps, theta, 1, Cube(20))
    b = gap_label_generators(ps, 2 * theta, 1, Cube(20))
    assert b.twisted_generator == 2 * a.twisted_generator
    assert a.frequency_generators == b.frequency_generators


def test_theta_zero_is_frequencies_only(sturmian):
    rep = gap_label_generators(sturmian, 0.0, 1, Cube(60))
    assert rep.twisted_generator is None
    assert DISCLAIMER in rep.to_json()


def test_frequencies_stable_under_enlarging(sturmian):
    a = gap_label_generators(sturmian, 0.0, 1, Cube(60)).frequency_generators
    b = gap_label_generators(sturmian, 0.0, 1, Cube(100)).frequency_generators
    assert len(a) == len(b)
    assert max(abs(x - y) for x, y in zip(a, b)) < 0.01


def test_not_lattice_subset():
    with pytest.raises(errors.NotLatticeSubset):
        gap_label_generators(gen_lattice(np.eye(2) / 2, Cube(10)), 0.0, 1, Cube(8))


def test_clopen_measure():
    sm = gen_marked_lattice("sturmian_mark", Cube(100))
    assert clopen_measure(sm, 1) == pytest.approx(0.5, rel=0.02)
    assert clopen_measure(sm, 0) + clopen_measure(sm, 1) == pytest.approx(1.0)
    tm = gen_marked_lattice("thue_morse_2d", Cube(20))
    assert sum(clopen_measure(tm, m) for m in np.unique(tm.marks)) == pytest.approx(1.0)
    with pytest.raises(errors.NoMarks):
        clopen_measure(gen_lattice(np.eye(2), Cube(4)), 1)


def test_all_one_marking():
    z = gen_lattice(np.eye(2), Cube(6))
    ones = PointSet(z.points, z.region, z.embedding, np.ones(len(z), dtype=int), "ones")
    assert clopen_measure(ones, 1) == 1.0


@pytest.mark.parametrize("A,ratio", [(np.eye(2), 1.0), (np.diag([2.0, 1.0]), 2.0), (np.eye(2) / 2, 0.25)])
def test_density_scaling(sturmian, A, ratio):
    rep = density_scaling_check(sturmian, A)
    assert rep.ok
    assert rep.ratio == pytest.approx(ratio, rel=0.02)


def test_density_scaling_singular(sturmian):
    with pytest.raises(errors.SingularBasis):
        density_scaling_check(sturmian, [[1, 1], [1, 1]])
