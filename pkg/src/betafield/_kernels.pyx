# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Every kernel mirrors a function of the same name in ``_pykernels`` and
consumes randomness in the same order, so both backends return identical
results for identical inputs.
"""

import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport sqrt, log
from numpy.random cimport bitgen_t

cnp.import_array()


cdef inline double gig_half(double a, double b, double z, double u) noexcept nogil:
    # density ~ x^{-1/2} exp(-(a x + b / x) / 2), via the reciprocal of IG(sqrt(a/b), a)
    cdef double y = z * z
    cdef double mu, r, s
    if b <= 0.0:
        return y / a
    mu = sqrt(a / b)
    r = mu * y / a
    s = 1.0 + 0.5 * r + 0.5 * sqrt(r) * sqrt(r + 4.0)
    if u * (mu + mu / s) <= mu:
        return s / mu
    return 1.0 / (mu * s)


def sample_pivots(const double[:, :, ::1] w, const double[:, ::1] theta,
                  const double[:, ::1] normals, const double[:, ::1] uniforms):
    cdef Py_ssize_t ndraw = normals.shape[0], n = normals.shape[1]
    cdef Py_ssize_t kw = w.shape[0], kt = theta.shape[0]
    cdef Py_ssize_t d, m, j, k, dw, dt
    cdef double acc, r, bm
    x_arr = np.empty((ndraw, n))
    beta_arr = np.empty((ndraw, n))
    h_arr = np.zeros((n, n))
    cdef double[:, ::1] x = x_arr
    cdef double[:, ::1] beta = beta_arr
    cdef double[:, ::1] h = h_arr
    with nogil:
        for d in range(ndraw):
            dw = d if kw > 1 else 0
            dt = d if kt > 1 else 0
            for m in range(n):
                bm = 0.0
                for k in range(m):
                    bm = bm + h[k, m] * h[k, m] / x[d, k]
                r = 0.0
                for j in range(m + 1, n):
                    acc = w[dw, m, j]
                    for k in range(m):
                        acc = acc + h[k, m] * h[k, j] / x[d, k]
                    h[m, j] = acc
                    r = r + acc * sqrt(theta[dt, j])
                x[d, m] = gig_half(theta[dt, m], r * r, normals[d, m], uniforms[d, m])
                beta[d, m] = 0.5 * x[d, m] + 0.5 * bm
    return x_arr, beta_arr


def errw_walks(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] nbr,
               const cnp.int64_t[::1] eid, const double[::1] a, Py_ssize_t i0,
               const double[:, ::1] uniforms):
    cdef Py_ssize_t nwalk = uniforms.shape[0], depth = uniforms.shape[1]
    cdef Py_ssize_t ne = a.shape[0]
    cdef Py_ssize_t s, t, p, cur, choice, e
    cdef double total, target, cum
    paths_arr = np.empty((nwalk, depth + 1), dtype=np.int64)
    z_arr = np.empty(ne)
    cdef cnp.int64_t[:, ::1] paths = paths_arr
    cdef double[::1] z = z_arr
    with nogil:
        for s in range(nwalk):
            for e in range(ne):
                z[e] = a[e]
            cur = i0
            paths[s, 0] = cur
            for t in range(depth):
                total = 0.0
                for p in range(indptr[cur], indptr[cur + 1]):
                    total = total + z[eid[p]]
                target = uniforms[s, t] * total
                cum = 0.0
                choice = indptr[cur + 1] - 1
                for p in range(indptr[cur], indptr[cur + 1]):
                    cum = cum + z[eid[p]]
                    if cum > target:
                        choice = p
                        break
                z[eid[choice]] += 1.0
                cur = nbr[choice]
                paths[s, t + 1] = cur
    return paths_arr


def vrjp_jumps(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] nbr,
               const double[::1] wts, const double[::1] phi, Py_ssize_t i0,
               const double[:, :, ::1] uniforms):
    cdef Py_ssize_t ntraj = uniforms.shape[0], njump = uniforms.shape[1]
    cdef Py_ssize_t n = phi.shape[0]
    cdef Py_ssize_t s, t, p, cur, choice, v
    cdef double rate, hold, target, cum, clock
    verts_arr = np.empty((ntraj, njump + 1), dtype=np.int64)
    times_arr = np.empty((ntraj, njump))
    loc_arr = np.empty(n)
    cdef cnp.int64_t[:, ::1] verts = verts_arr
    cdef double[:, ::1] times = times_arr
    cdef double[::1] loc = loc_arr
    with nogil:
        for s in range(ntraj):
            for v in range(n):
                loc[v] = phi[v]
            cur = i0
            clock = 0.0
            verts[s, 0] = cur
            for t in range(njump):
                rate = 0.0
                for p in range(indptr[cur], indptr[cur + 1]):
                    rate = rate + wts[p] * loc[nbr[p]]
                hold = -log(1.0 - uniforms[s, t, 0]) / rate
                loc[cur] += hold
                clock += hold
                target = uniforms[s, t, 1] * rate
                cum = 0.0
                choice = indptr[cur + 1] - 1
                for p in range(indptr[cur], indptr[cur + 1]):
                    cum = cum + wts[p] * loc[nbr[p]]
                    if cum > target:
                        choice = p
                        break
                cur = nbr[choice]
                times[s, t] = clock
                verts[s, t + 1] = cur
    return verts_arr, times_arr


cdef inline double next_double(bitgen_t *rng) noexcept nogil:
    return rng.next_double(rng.state)


def vrjp_advance(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] nbr,
                 const double[::1] wts, const double[::1] phi,
                 double[:, ::1] loc, cnp.int64_t[::1] current, double[::1] ztime,
                 cnp.int64_t[::1] njumps, double t_target, list generators):
    """Advance each trajectory until its Z-clock reaches ``t_target``."""
    cdef Py_ssize_t ntraj = loc.shape[0]
    cdef Py_ssize_t s, p, cur, choice
    cdef double rate, hold, target, cum, lc, dz, zt
    cdef bitgen_t *rng
    cdef const char *capsule_name = "BitGenerator"
    for s in range(ntraj):
        bit_gen = generators[s].bit_generator
        capsule = bit_gen.capsule
        if not PyCapsule_IsValid(capsule, capsule_name):
            raise ValueError("invalid bit generator capsule")
        rng = <bitgen_t *> PyCapsule_GetPointer(capsule, capsule_name)
        with bit_gen.lock, nogil:
            cur = current[s]
            zt = ztime[s]
            while zt < t_target:
                rate = 0.0
                for p in range(indptr[cur], indptr[cur + 1]):
                    rate = rate + wts[p] * loc[s, nbr[p]]
                hold = -log(1.0 - next_double(rng)) / rate
                lc = loc[s, cur]
                dz = hold * (2.0 * lc + hold)
                if zt + dz >= t_target:
                    loc[s, cur] = sqrt(t_target - zt + lc * lc)
                    zt = t_target
                    break
                loc[s, cur] = lc + hold
                zt = zt + dz
                target = next_double(rng) * rate
                cum = 0.0
                choice = indptr[cur + 1] - 1
                for p in range(indptr[cur], indptr[cur + 1]):
                    cum = cum + wts[p] * loc[s, nbr[p]]
                    if cum > target:
                        choice = p
                        break
                cur = nbr[choice]
                njumps[s] += 1
            current[s] = cur
            ztime[s] = zt
