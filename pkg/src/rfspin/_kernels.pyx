# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: Boltzmann weights of enumerated configurations and
single-site Metropolis sweeps.  ``_kernels_py`` holds the numpy twins."""

from libc.math cimport exp, log

import numpy as np

DEF ISING = 0
DEF SPHERE = 1
DEF QUARTIC = 2
DEF GAUSS = 3


def boltzmann_weights(const double[:, ::1] spins, const double[::1] base,
                      const double[:, ::1] fields, double scale,
                      double[:, ::1] out):
    """Normalized weights ``out[m, c] ~ exp(base[c] + scale * spins[c] . fields[m])``.

    Returns ``log Z`` per row of ``fields``.
    """
    cdef Py_ssize_t M = fields.shape[0], C = spins.shape[0], D = spins.shape[1]
    cdef Py_ssize_t m, c, k
    cdef double a, amax, total
    logz = np.empty(M)
    cdef double[::1] lz = logz
    with nogil:
        for m in range(M):
            amax = -1e308
            for c in range(C):
                a = 0.0
                for k in range(D):
                    a = a + spins[c, k] * fields[m, k]
                a = base[c] + scale * a
                out[m, c] = a
                if a > amax:
                    amax = a
            total = 0.0
            for c in range(C):
                a = exp(out[m, c] - amax)
                out[m, c] = a
                total = total + a
            for c in range(C):
                out[m, c] = out[m, c] / total
            lz[m] = amax + log(total)
    return logz


cdef inline double self_action(const double* v, Py_ssize_t N, int measure, double param) noexcept nogil:
    cdef double r2 = 0.0, t
    cdef Py_ssize_t n
    if measure == QUARTIC or measure == GAUSS:
        for n in range(N):
            r2 = r2 + v[n] * v[n]
        if measure == QUARTIC:
            t = r2 - 1.0
            return param * t * t
        return 0.5 * param * r2
    return 0.0


def metropolis_sweeps(double[:, :, ::1] phi, const int[:, ::1] nbr,
                      const double[:, :, ::1] field, double coupling,
                      int measure, double param, double step,
                      const double[:, :, :, ::1] proposals,
                      const double[:, :, ::1] log_u, int overrelax):
    """Run ``log_u.shape[0]`` sequential sweeps in place; returns accepted moves.

    ``phi`` is ``(chains, V, N)``; ``field`` holds ``beta h g`` per chain.
    ``proposals`` are unit vectors (spherical), normals scaled by ``step``
    (quartic, gaussian) or ignored (Ising).
    """
    cdef Py_ssize_t S = log_u.shape[0], R = phi.shape[0], V = phi.shape[1], N = phi.shape[2]
    cdef Py_ssize_t Z = nbr.shape[1]
    cdef Py_ssize_t s, r, x, j, n
    cdef long accepted = 0
    cdef double dot, hh, proj, ds
    cdef double hloc[64]
    cdef double new[64]
    if N > 64:
        raise ValueError("at most 64 spin components are supported")
    with nogil:
        for s in range(S):
            for r in range(R):
                for x in range(V):
                    for n in range(N):
                        hloc[n] = phi[r, nbr[x, 0], n]
                    for j in range(1, Z):
                        for n in range(N):
                            hloc[n] = hloc[n] + phi[r, nbr[x, j], n]
                    for n in range(N):
                        hloc[n] = coupling * hloc[n] + field[r, x, n]
                    for n in range(N):
                        if measure == ISING:
                            new[n] = -phi[r, x, n]
                        elif measure == SPHERE:
                            new[n] = proposals[s, r, x, n]
                        else:
                            new[n] = phi[r, x, n] + step * proposals[s, r, x, n]
                    dot = 0.0
                    for n in range(N):
                        dot = dot + (new[n] - phi[r, x, n]) * hloc[n]
                    ds = self_action(new, N, measure, param) - self_action(&phi[r, x, 0], N, measure, param) - dot
                    if log_u[s, r, x] < -ds:
                        for n in range(N):
                            phi[r, x, n] = new[n]
                        accepted += 1
            if overrelax and measure == SPHERE and N > 1:
                for r in range(R):
                    for x in range(V):
                        for n in range(N):
                            hloc[n] = phi[r, nbr[x, 0], n]
                        for j in range(1, Z):
                            for n in range(N):
                                hloc[n] = hloc[n] + phi[r, nbr[x, j], n]
                        for n in range(N):
                            hloc[n] = coupling * hloc[n] + field[r, x, n]
                        hh = 0.0
                        proj = 0.0
                        for n in range(N):
                            hh = hh + hloc[n] * hloc[n]
                            proj = proj + phi[r, x, n] * hloc[n]
                        if hh > 0.0:
                            for n in range(N):
                                phi[r, x, n] = 2.0 * proj / hh * hloc[n] - phi[r, x, n]
    return accepted
