"""Slow reference computations used to cross-check the fast code paths.

None of these touch the compiled kernels, cKDTree or the FFT shift routines:
they are written from the defining formulas with dicts, loops and quadrature.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np
from scipy import integrate


def kernel_to_dict(k):
    """``{(base, z): block}`` for the present entries of a TwistedKernel."""
    out = {}
    bases = [tuple(int(v) for v in b) for b in k.sample.bases]
    for w, j in zip(*np.nonzero(k.present)):
        out[(bases[w], tuple(int(v) for v in k.stencil[j]))] = np.array(k.values[w, j])
    return out


def brute_twisted_convolve(F, G, bases, stencil, scale, modulus=None):
    """Twisted convolution from the defining sum, one term at a time.

    ``(f*g)(w, z) = sum_u f(w+u, z-u) g(w, u) exp(-2 pi i (z-u)_x u_omega)``
    with the product ``(z-u)_x u_omega`` taken in physical units.
    """

    def wrap(p):
        if modulus is None:
            return p
        h = modulus // 2
        return tuple((c + h) % modulus - h for c in p)

    base_set = {tuple(b) for b in bases}
    sten = [tuple(z) for z in stencil]
    sten_set = set(sten)
    out = {}
    for w in base_set:
        for z in sten:
            acc = None
            for u in sten:
                if (w, u) not in G:
                    continue
                v = wrap((z[0] - u[0], z[1] - u[1]))
                wu = wrap((w[0] + u[0], w[1] + u[1]))
                if v not in sten_set or (wu, v) not in F:
                    continue
                if modulus is None:
                    ph = cmath.exp(-2j * math.pi * v[0] * u[1] * scale[0] * scale[1])
                else:
                    ph = cmath.exp(-2j * math.pi * ((v[0] * u[1]) % modulus) / modulus)
                term = (F[(wu, v)] @ G[(w, u)]) * ph
                acc = term if acc is None else acc + term
            if acc is not None:
                out[(w, z)] = acc
    return out


def thue_morse_word(m: int):
    """First ``2**m`` Thue-Morse letters from the substitution 0 -> 01, 1 -> 10."""
    w = np.zeros(1, dtype=np.int64)
    for _ in range(m):
        nxt = np.empty(2 * len(w), dtype=np.int64)
        nxt[0::2] = w
        nxt[1::2] = 1 - w
        w = nxt
    return w


def thue_morse_cross_frequencies(half: int):
    """Exact frequencies of radius-1 patches of the 2D Thue-Morse colouring.

    Centres run over the half-open square ``[-half, half)^2`` with ``half`` a
    power of two, so the area is ``4 half^2`` and every frequency is dyadic.
    A radius-1 patch of ``Z^2`` is the centre and its four neighbours; the
    class is the 5-tuple of marks. Counting is done by array slicing.
    """
    m = int(math.log2(half)) + 2
    word = thue_morse_word(m)
    idx = np.arange(-half - 1, half + 1)
    t = word[np.abs(idx)]
    marks = t[:, None] ^ t[None, :]
    c = marks[1:-1, 1:-1]
    e, wst = marks[2:, 1:-1], marks[:-2, 1:-1]
    nth, sth = marks[1:-1, 2:], marks[1:-1, :-2]
    code = c * 16 + e * 8 + wst * 4 + nth * 2 + sth
    counts = np.bincount(code.ravel(), minlength=32)
    area = (2 * half) ** 2
    return {k: Fraction(int(v), area) for k, v in enumerate(counts) if v}


def gaussian_stft_quad(x: float, w: float) -> complex:
    """``int g(t) g(t - x) e^{-2 pi i w t} dt`` for ``g = 2^{1/4} e^{-pi t^2}``, by adaptive quadrature."""
    c = math.sqrt(2.0)

    def amp(t):
        return c * math.exp(-math.pi * (t * t + (t - x) ** 2))

    lo, hi = x / 2 - 8.0, x / 2 + 8.0
    re = integrate.quad(lambda t: amp(t) * math.cos(2 * math.pi * w * t), lo, hi, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    im = integrate.quad(lambda t: -amp(t) * math.sin(2 * math.pi * w * t), lo, hi, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    return complex(re, im)


def half_open_count(points, side, center=(0.0, 0.0)) -> int:
    """Points in ``[c - s/2, c + s/2)^2`` by a plain Python loop."""
    lo0, lo1 = center[0] - side / 2, center[1] - side / 2
    hi0, hi1 = center[0] + side / 2, center[1] + side / 2
    n = 0
    for x, y in points:
        if lo0 - 1e-9 <= x < hi0 - 1e-9 and lo1 - 1e-9 <= y < hi1 - 1e-9:
            n += 1
    return n


def direct_tf_shift(f, t, L, x, w):
    """``M_w T_x f`` by evaluating the trigonometric interpolant of ``f`` directly."""
    n = len(f)
    dt = L / n
    nu = np.fft.fftfreq(n, dt)
    # periodic interpolant: f(s) = (1/n) sum_k F_k e^{2 pi i nu_k (s - t_0)}
    Fk = np.array([sum(f[j] * cmath.exp(-2j * math.pi * k * j / n) for j in range(n)) for k in range(n)])
    out = np.empty(n, dtype=np.complex128)
    for j in range(n):
        s = t[j] - x
        val = sum(Fk[k] * cmath.exp(2j * math.pi * nu[k] * (s - t[0])) for k in range(n)) / n
        out[j] = val * cmath.exp(2j * math.pi * w * t[j])
    return out
