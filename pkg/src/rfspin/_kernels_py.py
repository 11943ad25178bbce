"""Pure numpy versions of the compiled kernels (same signatures, same
arithmetic order, vectorized over chains)."""

from __future__ import annotations

import numpy as np

ISING, SPHERE, QUARTIC, GAUSS = 0, 1, 2, 3


def boltzmann_weights(spins, base, fields, scale, out):
    a = base[None, :] + scale * (fields @ spins.T)
    amax = a.max(axis=1, keepdims=True)
    np.exp(a - amax, out=out)
    total = out.sum(axis=1, keepdims=True)
    out /= total
    return amax[:, 0] + np.log(total[:, 0])


def _self_action(v, measure, param):
    if measure not in (QUARTIC, GAUSS):
        return 0.0
    r2 = v[:, 0] * v[:, 0]
    for n in range(1, v.shape[1]):
        r2 = r2 + v[:, n] * v[:, n]
    if measure == QUARTIC:
        t = r2 - 1.0
        return param * t * t
    return 0.5 * param * r2


def _local_field(phi, nbr, field, coupling, x):
    h = phi[:, nbr[x, 0], :].copy()
    for j in range(1, nbr.shape[1]):
        h = h + phi[:, nbr[x, j], :]
    return coupling * h + field[:, x, :]


def metropolis_sweeps(phi, nbr, field, coupling, measure, param, step, proposals, log_u, overrelax):
    S = log_u.shape[0]
    V, N = phi.shape[1], phi.shape[2]
    accepted = 0
    for s in range(S):
        for x in range(V):
            hloc = _local_field(phi, nbr, field, coupling, x)
            old = phi[:, x, :]
            if measure == ISING:
                new = -old
            elif measure == SPHERE:
                new = proposals[s, :, x, :]
            else:
                new = old + step * proposals[s, :, x, :]
            dot = (new[:, 0] - old[:, 0]) * hloc[:, 0]
            for n in range(1, N):
                dot = dot + (new[:, n] - old[:, n]) * hloc[:, n]
            ds = _self_action(new, measure, param) - _self_action(old, measure, param) - dot
            acc = log_u[s, :, x] < -ds
            phi[acc, x, :] = new[acc]
            accepted += int(acc.sum())
        if overrelax and measure == SPHERE and N > 1:
            for x in range(V):
                hloc = _local_field(phi, nbr, field, coupling, x)
                hh = hloc[:, 0] * hloc[:, 0]
                proj = phi[:, x, 0] * hloc[:, 0]
                for n in range(1, N):
                    hh = hh + hloc[:, n] * hloc[:, n]
                    proj = proj + phi[:, x, n] * hloc[:, n]
                ok = hh > 0.0
                ratio = np.where(ok, 2.0 * proj / np.where(ok, hh, 1.0), 0.0)
                refl = ratio[:, None] * hloc - phi[:, x, :]
                phi[ok, x, :] = refl[ok]
    return accepted
