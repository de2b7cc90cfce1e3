"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` one for one and are used when the compiled
extension is unavailable.  Orbit sums are vectorised over a block of points
and reduced over the element axis with a compensated pairwise cascade, so
results depend only on the inputs, never on ``nthreads`` or block size.
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# entries of one (points x elements) block
_BLOCK = 1 << 21


def _cascade_sum(t):
    """Compensated pairwise sum along axis 1."""
    s = t
    comp = np.zeros(t.shape[0])
    while s.shape[1] > 1:
        if s.shape[1] % 2:
            s = np.concatenate([s, np.zeros((s.shape[0], 1))], axis=1)
        a = s[:, 0::2]
        b = s[:, 1::2]
        x = a + b
        bb = x - a
        comp += ((a - (x - bb)) + (b - bb)).sum(axis=1)
        s = x
    return s[:, 0] + comp


def _blocks(n, m):
    step = max(1, _BLOCK // max(m, 1))
    return [(i, min(n, i + step)) for i in range(0, n, step)]


def _run(blocks, fn, nthreads):
    if nthreads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            list(pool.map(fn, blocks))
    else:
        for blk in blocks:
            fn(blk)


def _busemann_block(x, y, eta_re, eta_im, c):
    logp = np.log(1.0 - (x * x + y * y))
    dx = x[:, None] - eta_re[None, :]
    dy = y[:, None] - eta_im[None, :]
    return c[None, :] + logp[:, None] - np.log(dx * dx + dy * dy)


def wave_sum(x, y, eta_re, eta_im, c, lam, want_imag, nthreads=1):
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    n, m = x.shape[0], c.shape[0]
    re = np.empty(n)
    im = np.empty(n) if want_imag else None
    mag = np.empty(n)

    def work(blk):
        lo, hi = blk
        b = _busemann_block(x[lo:hi], y[lo:hi], eta_re, eta_im, c)
        w = np.exp(0.5 * b)
        ph = lam * b
        re[lo:hi] = _cascade_sum(w * np.cos(ph))
        if want_imag:
            im[lo:hi] = _cascade_sum(w * np.sin(ph))
        mag[lo:hi] = _cascade_sum(w)

    _run(_blocks(n, m), work, nthreads)
    return re, im, mag


def e1_sum(x, y, eta_re, eta_im, c, nthreads=1):
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    n, m = x.shape[0], c.shape[0]
    out = np.empty(n)

    def work(blk):
        lo, hi = blk
        out[lo:hi] = _cascade_sum(np.exp(_busemann_block(x[lo:hi], y[lo:hi], eta_re, eta_im, c)))

    _run(_blocks(n, m), work, nthreads)
    return out


def holo_sum(x, y, eta_re, eta_im, cprime, lam, nthreads=1):
    """Scaled holomorphic orbit sum; the value is ``(re + i im) * exp(scale)``."""
    z = np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)
    eta = eta_re + 1j * eta_im
    n, m = z.shape[0], cprime.shape[0]
    re = np.empty(n)
    im = np.empty(n)
    scale = np.empty(n)

    def work(blk):
        lo, hi = blk
        zz = z[lo:hi, None]
        w0 = 1.0 - zz * zz
        w1 = 1.0 - zz * np.conj(eta)[None, :]
        w2 = 1.0 - zz * eta[None, :]
        lr = 0.5 * (np.log(w0.real**2 + w0.imag**2) - np.log(w1.real**2 + w1.imag**2)
                    - np.log(w2.real**2 + w2.imag**2))
        li = (np.arctan2(w0.imag, w0.real) - np.arctan2(w1.imag, w1.real)
              - np.arctan2(w2.imag, w2.real))
        s = lam * np.abs(li).max(axis=1)
        amp = np.exp(0.5 * (cprime[None, :] + lr))
        ca, sa = np.cos(0.5 * li), np.sin(0.5 * li)
        a = lam * (cprime[None, :] + lr)
        v = lam * li
        ep = np.exp(v - s[:, None])
        em = np.exp(-v - s[:, None])
        ch = 0.5 * (ep + em)
        sh = 0.5 * (ep - em)
        cr = np.cos(a) * ch
        ci = -np.sin(a) * sh
        re[lo:hi] = _cascade_sum(amp * (ca * cr - sa * ci))
        im[lo:hi] = _cascade_sum(amp * (ca * ci + sa * cr))
        scale[lo:hi] = s

    _run(_blocks(n, m), work, nthreads)
    return re, im, scale


def label_components(sign, mask):
    """4-connected components of equal ``sign`` restricted to ``mask``.

    Labels are numbered by first appearance in row-major order; unmasked
    nodes get -1.
    """
    sign = np.asarray(sign)
    mask = np.asarray(mask, dtype=bool)
    nx, ny = mask.shape
    n = nx * ny
    parent = np.arange(n, dtype=np.int64)
    idx = parent.reshape(nx, ny)
    edges_u, edges_v = [], []
    h = mask[:, :-1] & mask[:, 1:] & (sign[:, :-1] == sign[:, 1:])
    edges_u.append(idx[:, :-1][h])
    edges_v.append(idx[:, 1:][h])
    v = mask[:-1, :] & mask[1:, :] & (sign[:-1, :] == sign[1:, :])
    edges_u.append(idx[:-1, :][v])
    edges_v.append(idx[1:, :][v])
    u = np.concatenate(edges_u)
    w = np.concatenate(edges_v)
    while u.size:
        ru, rw = parent[u], parent[w]
        lo = np.minimum(ru, rw)
        hi = np.maximum(ru, rw)
        live = lo != hi
        if not live.any():
            break
        np.minimum.at(parent, hi[live], lo[live])
        while True:
            p2 = parent[parent]
            if np.array_equal(p2, parent):
                break
            parent = p2
        u, w = u[live], w[live]
    flat_mask = mask.ravel()
    roots = parent[flat_mask]
    uniq = np.unique(roots)
    labels = np.full(n, -1, dtype=np.int64)
    labels[flat_mask] = np.searchsorted(uniq, roots)
    return labels.reshape(nx, ny), int(uniq.size)
