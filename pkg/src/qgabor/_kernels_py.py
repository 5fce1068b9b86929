"""Pure numpy implementations of the hot loops.

Signatures mirror the compiled ``_ckernels`` module exactly so the two are
interchangeable; see :mod:`qgabor.kernels`.
"""

import numpy as np


def max_cube_count(xs, ys, side, tol):
    """Largest number of points in a closed axis-aligned square of given side.

    ``xs`` must be sorted ascending and ``ys`` aligned with it. The optimal
    square can always be slid until its left and bottom edges touch points,
    so only those anchors are tried.
    """
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    n = xs.shape[0]
    if n == 0:
        return 0
    lo_idx = np.searchsorted(xs, xs - tol, side="left")
    hi_idx = np.searchsorted(xs, xs + side + tol, side="right")
    best = 0
    last = None
    for i in range(n):
        lo, hi = lo_idx[i], hi_idx[i]
        if hi - lo <= best:
            continue
        if last == (lo, hi):
            continue
        last = (lo, hi)
        strip = np.sort(ys[lo:hi])
        counts = np.searchsorted(strip, strip + side + tol, side="right") - np.arange(strip.size)
        best = max(best, int(counts.max()))
    return best


def twisted_convolve_dense(F, presF, G, presG, nbr, sumidx, phase, out_bases):
    """Twisted convolution on a shared displacement stencil.

    Parameters
    ----------
    F, G : complex arrays (m, s, N, K) and (m, s, K, M)
        Kernel blocks indexed by (base, stencil slot).
    presF, presG : uint8 arrays (m, s)
        Support masks.
    nbr : intp array (m, s)
        Base index of ``base + displacement`` or -1 when outside the sample.
    sumidx : intp array (s, s)
        ``sumidx[v, u]`` is the slot of displacement ``v + u`` or -1.
    phase : complex array (s, s)
        Cocycle value for the pair (v, u).
    out_bases : intp array
        Bases at which the product is evaluated.

    Returns
    -------
    out : complex array (len(out_bases), s, N, M)
    loss : float array (len(out_bases),)
        Sum of ``|F| |G|`` over terms whose target displacement is off-stencil.
    missing : int
        Number of terms whose intermediate base lies outside the sample.
    """
    m, s, N, K = F.shape
    M = G.shape[3]
    nF = np.sqrt(np.sum(np.abs(F) ** 2, axis=(2, 3)))
    nG = np.sqrt(np.sum(np.abs(G) ** 2, axis=(2, 3)))
    presF = presF.astype(bool)
    presG = presG.astype(bool)
    out = np.zeros((len(out_bases), s, N, M), dtype=np.complex128)
    loss = np.zeros(len(out_bases))
    missing = 0
    for ob, b in enumerate(out_bases):
        acc = out[ob]
        for su in np.flatnonzero(presG[b]):
            b2 = nbr[b, su]
            if b2 < 0:
                missing += 1
                continue
            sv = np.flatnonzero(presF[b2])
            if sv.size == 0:
                continue
            tgt = sumidx[sv, su]
            ok = tgt >= 0
            if not ok.all():
                loss[ob] += nG[b, su] * nF[b2, sv[~ok]].sum()
            sv = sv[ok]
            terms = np.matmul(F[b2, sv], G[b, su]) * phase[sv, su][:, None, None]
            # v -> v + u is injective, so no index repeats within one update
            acc[tgt[ok]] += terms
    return out, loss, missing
