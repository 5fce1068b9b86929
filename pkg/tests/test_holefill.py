import math

import numpy as np
import pytest

from qgabor import errors
from qgabor.holefill import fill_holes, spiral_offsets, union_translates
from qgabor.pointset import (
    Cube,
    difference_set_contains,
    fibonacci_product_scheme,
    gen_cut_project,
    gen_lattice,
    hole_radius,
    min_separation,
)


@pytest.fixture(scope="module")
def lattice2():
    return gen_lattice(2 * np.eye(2), Cube(24))


def test_lattice_fill(lattice2):
    res = fill_holes(lattice2, 0.8)
    ups = [c.upper for c in res.hole_sequence]
    assert all(b < a for a, b in zip(ups, ups[1:]))
    assert res.certificate.upper < 0.8
    # [DERIVED] greedy deepest-hole rounds use four translates here
    assert res.iterations == 4
    zs = [np.asarray(z) for z in res.translates]
    for i in range(len(zs)):
        for j in range(i):
            assert not difference_set_contains(lattice2, zs[i] - zs[j])


def test_two_translates_cannot_reach_eps():
    """Any union of two translates of 2Z^2 has covering radius above 0.8.

    Two points per 2x2 cell give area 2 per point; the thinnest disc covering
    has density 2 pi / sqrt(27), so the radius is at least sqrt(2.418 / pi).
    """
    bound = math.sqrt(2 * 2 * math.pi / math.sqrt(27) / math.pi)
    assert bound > 0.8
    lat = gen_lattice(2 * np.eye(2), Cube(24))
    for v in [(1.0, 1.0), (1.0, 0.0), (0.7, 1.3)]:
        u = union_translates(lat, [(0.0, 0.0), v])
        assert hole_radius(u, Cube(12), 0.05).lower > 0.8


def test_fibonacci_fill():
    fib = gen_cut_project(fibonacci_product_scheme(), Cube(30)).transform(2 * np.eye(2))
    res = fill_holes(fib, 0.7)
    ups = [c.upper for c in res.hole_sequence]
    assert all(b < a for a, b in zip(ups, ups[1:]))
    assert res.certificate.upper < 0.7
    assert min_separation(union_translates(fib, res.translates)) > 0


def test_overlap_detected():
    z2 = gen_lattice(np.eye(2), Cube(10))
    with pytest.raises(errors.OverlappingTranslate):
        union_translates(z2, [(0.0, 0.0), (1.0, 0.0)])


def test_no_convergence(lattice2):
    with pytest.raises(errors.NoConvergence):
        fill_holes(lattice2, 0.3, max_iters=2)


def test_trivial_when_already_fine(lattice2):
    res = fill_holes(lattice2, 2.0)
    assert res.iterations == 1
    assert res.translates == ((0.0, 0.0),)


def test_spiral_offsets():
    offs = spiral_offsets(0.8)
    assert len(offs) == 64
    assert len({tuple(np.round(o, 12)) for o in offs}) == 64
    assert max(np.linalg.norm(o) for o in offs) == pytest.approx(0.8 / 40 * 8)


def test_union_marks_record_translate():
    z2 = gen_lattice(2 * np.eye(2), Cube(10))
    u = union_translates(z2, [(0.0, 0.0), (1.0, 1.0)])
    assert set(np.unique(u.marks)) == {0, 1}
