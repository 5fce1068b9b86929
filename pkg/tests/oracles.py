"""Brute-force references for the tests.

Everything here works from definitions with plain loops or dense distance
matrices: no KD-trees, no compiled kernels, no FFT shifts.
"""

import math

import numpy as np

from qgabor._oracles import (  # noqa: F401  re-exported for the tests
    brute_twisted_convolve,
    direct_tf_shift,
    gaussian_stft_quad,
    half_open_count,
    kernel_to_dict,
    thue_morse_cross_frequencies,
    thue_morse_word,
)

PHI = (1 + math.sqrt(5)) / 2


def brute_hole(points, lo, hi, step):
    """Max over a closed grid of the distance to the nearest point, by dense distances."""
    xs = np.arange(lo[0], hi[0] + step / 2, step)
    ys = np.arange(lo[1], hi[1] + step / 2, step)
    best = 0.0
    for x in xs:
        d2 = (points[:, 0][None, :] - x) ** 2 + (points[:, 1][None, :] - ys[:, None]) ** 2
        best = max(best, float(np.sqrt(d2.min(axis=1)).max()))
    return best


def brute_rel(points, side=1.0, tol=1e-9):
    """Max count in a closed cube of the given side.

    Some optimal cube has its left edge on a point's x and bottom edge on a
    point's y, so those corners are all that need checking.
    """
    best = 0
    for x in points[:, 0]:
        inx = points[(points[:, 0] >= x - tol) & (points[:, 0] <= x + side + tol)]
        for y in points[:, 1]:
            c = int(((inx[:, 1] >= y - tol) & (inx[:, 1] <= y + side + tol)).sum())
            best = max(best, c)
    return best


def brute_patch_counts(points, centers_mask, r, quantum=1e-6):
    """Patch classes by rounding offsets; dict frozenset -> count."""
    out = {}
    for i in np.flatnonzero(centers_mask):
        d = points - points[i]
        keep = np.einsum("ij,ij->i", d, d) <= (r + 1e-9) ** 2
        key = frozenset(tuple(np.rint(v / quantum).astype(int)) for v in d[keep])
        out[key] = out.get(key, 0) + 1
    return out


def fibonacci_chain(lo, hi):
    """Points m + n phi with m + n (1 - phi) in [0, phi), by looping over (m, n)."""
    pts = []
    nmax = int(abs(hi) + abs(lo)) + 5
    for n in range(-nmax, nmax + 1):
        for m in range(-3 * nmax, 3 * nmax + 1):
            x = m + n * PHI
            y = m + n * (1 - PHI)
            if lo - 1e-9 <= x <= hi + 1e-9 and 0 <= y < PHI:
                pts.append(x)
    return sorted(pts)


def sturmian_points(side, alpha, beta):
    """Integer points of [-side/2, side/2]^2 with frac(m a1 + n a2) < beta, by a double loop."""
    h = int(math.floor(side / 2 + 1e-9))
    pts = []
    for m in range(-h, h + 1):
        for n in range(-h, h + 1):
            if (m * alpha[0] + n * alpha[1]) % 1.0 < beta:
                pts.append((m, n))
    return pts
