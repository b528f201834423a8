"""Pure-Python/NumPy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures, same arithmetic order, same consumption of random numbers.
``sample_pivots`` and ``errw_walks`` are vectorised over draws; the VRJP
loops are plain Python and only practical for small workloads.
"""

import math

import numpy as np


def _gig_half(a, b, z, u):
    y = z * z
    out = np.empty_like(y)
    zero = b <= 0.0
    out[zero] = y[zero] / a[zero]
    pos = ~zero
    if np.any(pos):
        a_p = a[pos]
        mu = np.sqrt(a_p / b[pos])
        r = mu * y[pos] / a_p
        s = 1.0 + 0.5 * r + 0.5 * np.sqrt(r) * np.sqrt(r + 4.0)
        accept = u[pos] * (mu + mu / s) <= mu
        out[pos] = np.where(accept, s / mu, 1.0 / (mu * s))
    return out


def sample_pivots(w, theta, normals, uniforms):
    w = np.asarray(w, dtype=float)
    theta = np.asarray(theta, dtype=float)
    ndraw, n = normals.shape
    # per-draw views: (ndraw or 1, n, n) broadcast along draws
    wd = w if w.shape[0] > 1 else np.broadcast_to(w, (ndraw, n, n))
    td = theta if theta.shape[0] > 1 else np.broadcast_to(theta, (ndraw, n))
    sq = np.sqrt(td)
    x = np.empty((ndraw, n))
    beta = np.empty((ndraw, n))
    h = np.zeros((n, n, ndraw))
    for m in range(n):
        bm = np.zeros(ndraw)
        for k in range(m):
            bm = bm + h[k, m] * h[k, m] / x[:, k]
        r = np.zeros(ndraw)
        for j in range(m + 1, n):
            acc = wd[:, m, j].copy()
            for k in range(m):
                acc = acc + h[k, m] * h[k, j] / x[:, k]
            h[m, j] = acc
            r = r + acc * sq[:, j]
        x[:, m] = _gig_half(td[:, m], r * r, normals[:, m], uniforms[:, m])
        beta[:, m] = 0.5 * x[:, m] + 0.5 * bm
    return x, beta


def errw_walks(indptr, nbr, eid, a, i0, uniforms):
    nwalk, depth = uniforms.shape
    z = np.tile(np.asarray(a, dtype=float), (nwalk, 1))
    paths = np.empty((nwalk, depth + 1), dtype=np.int64)
    paths[:, 0] = i0
    rows = np.arange(nwalk)
    maxdeg = int(np.max(np.diff(indptr)))
    for t in range(depth):
        cur = paths[:, t]
        start, stop = indptr[cur], indptr[cur + 1]
        total = np.zeros(nwalk)
        for q in range(maxdeg):
            live = start + q < stop
            p = np.where(live, start + q, 0)
            total = total + np.where(live, z[rows, eid[p]], 0.0)
        target = uniforms[:, t] * total
        cum = np.zeros(nwalk)
        choice = stop - 1
        found = np.zeros(nwalk, dtype=bool)
        for q in range(maxdeg):
            live = start + q < stop
            p = np.where(live, start + q, 0)
            cum = cum + np.where(live, z[rows, eid[p]], 0.0)
            hit = live & ~found & (cum > target)
            choice = np.where(hit, p, choice)
            found |= hit
        z[rows, eid[choice]] += 1.0
        paths[:, t + 1] = nbr[choice]
    return paths


def vrjp_jumps(indptr, nbr, wts, phi, i0, uniforms):
    ntraj, njump, _ = uniforms.shape
    verts = np.empty((ntraj, njump + 1), dtype=np.int64)
    times = np.empty((ntraj, njump))
    for s in range(ntraj):
        loc = [float(v) for v in phi]
        cur = int(i0)
        clock = 0.0
        verts[s, 0] = cur
        for t in range(njump):
            lo, hi = indptr[cur], indptr[cur + 1]
            rate = 0.0
            for p in range(lo, hi):
                rate = rate + wts[p] * loc[nbr[p]]
            hold = -math.log(1.0 - uniforms[s, t, 0]) / rate
            loc[cur] += hold
            clock += hold
            target = uniforms[s, t, 1] * rate
            cum = 0.0
            choice = hi - 1
            for p in range(lo, hi):
                cum = cum + wts[p] * loc[nbr[p]]
                if cum > target:
                    choice = p
                    break
            cur = int(nbr[choice])
            times[s, t] = clock
            verts[s, t + 1] = cur
    return verts, times


def vrjp_advance(indptr, nbr, wts, phi, loc, current, ztime, njumps, t_target, generators):
    """Advance each trajectory until its Z-clock reaches ``t_target``."""
    for s in range(loc.shape[0]):
        rng = generators[s]
        row = loc[s]
        cur = int(current[s])
        zt = float(ztime[s])
        while zt < t_target:
            lo, hi = indptr[cur], indptr[cur + 1]
            rate = 0.0
            for p in range(lo, hi):
                rate = rate + wts[p] * row[nbr[p]]
            hold = -math.log(1.0 - rng.random()) / rate
            lc = row[cur]
            dz = hold * (2.0 * lc + hold)
            if zt + dz >= t_target:
                row[cur] = math.sqrt(t_target - zt + lc * lc)
                zt = t_target
                break
            row[cur] = lc + hold
            zt = zt + dz
            target = rng.random() * rate
            cum = 0.0
            choice = hi - 1
            for p in range(lo, hi):
                cum = cum + wts[p] * row[nbr[p]]
                if cum > target:
                    choice = p
                    break
            cur = int(nbr[choice])
            njumps[s] += 1
        current[s] = cur
        ztime[s] = zt
