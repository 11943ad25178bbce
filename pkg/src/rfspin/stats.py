"""Error analysis and Gaussian cubature helpers."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np


def jackknife(func, *samples, n_blocks=None):
    """Blocked jackknife of a (vector) function of sample means.

    ``samples`` are arrays sharing a leading sample axis of length ``n``.
    ``func`` receives the means with an extra leading replica axis and must
    return an array whose leading axis is that replica axis.

    Returns ``(estimate, stderr)`` where ``estimate`` is bias-corrected.
    ``n_blocks=None`` means delete-one.
    """
    n = samples[0].shape[0]
    if n < 2:
        raise ValueError("jackknife needs at least two samples")
    nb = n if n_blocks is None else max(2, min(int(n_blocks), n))
    edges = (np.arange(nb + 1) * n) // nb
    counts = np.diff(edges)
    full, loo = [], []
    for s in samples:
        s = np.asarray(s)
        block = np.add.reduceat(s, edges[:-1], axis=0)
        total = s.sum(axis=0)
        shape = (nb,) + (1,) * (s.ndim - 1)
        full.append((total / n)[None])
        loo.append((total[None] - block) / (n - counts).reshape(shape))
    theta = np.asarray(func(*full))[0]
    reps = np.asarray(func(*loo))
    mean_rep = reps.mean(axis=0)
    estimate = nb * theta - (nb - 1) * mean_rep
    dev = reps - mean_rep
    if np.iscomplexobj(dev):
        dev = np.abs(dev)
    stderr = np.sqrt((nb - 1) / nb * np.sum(dev * dev, axis=0))
    return estimate, stderr


def jackknife_replicas(reps: np.ndarray, axis: int = 0) -> np.ndarray:
    """Standard error from leave-one-out replica values along ``axis``."""
    reps = np.moveaxis(np.asarray(reps), axis, 0)
    nb = reps.shape[0]
    dev = reps - reps.mean(axis=0)
    if np.iscomplexobj(dev):
        dev = np.abs(dev)
    return np.sqrt((nb - 1) / nb * np.sum(dev * dev, axis=0))


def autocorrelation(x: np.ndarray) -> np.ndarray:
    """Normalized autocorrelation along the last axis, averaged over leading axes.

    Leading axes are independent chains of one target, so deviations are
    taken from the pooled mean: per-chain means would bias every lag by
    about ``-2 tau / n`` and the windowed sum by ``-2 tau W / n``.
    """
    x = np.asarray(x, dtype=float)
    x = x.reshape(-1, x.shape[-1])
    n = x.shape[-1]
    dx = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(dx, n=size, axis=-1)
    acov = np.fft.irfft(f * np.conj(f), n=size, axis=-1)[:, :n].mean(axis=0)
    if acov[0] <= 0:
        out = np.zeros(n)
        out[0] = 1.0
        return out
    return acov / acov[0]


def integrated_autocorrelation_time(x: np.ndarray, c: float = 6.0) -> float:
    """Madras-Sokal estimate with automatic window ``W >= c * tau(W)``.

    ``x`` is ``(chains, samples)`` or ``(samples,)``; ``tau = 1/2`` for
    uncorrelated data.
    """
    rho = autocorrelation(x)
    tau = 0.5
    for w in range(1, len(rho)):
        tau += rho[w]
        if w >= c * tau:
            break
    return max(float(tau), 0.5)


@lru_cache(maxsize=16)
def gauss_hermite(nodes_per_dim: int, dim: int):
    """Tensor-product Gauss-Hermite rule for ``E f(g)``, ``g ~ N(0, I_dim)``.

    Returns ``(points (M, dim), weights (M,))`` with weights summing to 1.
    """
    x, w = np.polynomial.hermite_e.hermegauss(nodes_per_dim)
    w = w / np.sqrt(2.0 * np.pi)
    pts = np.array(list(itertools.product(x, repeat=dim)))
    wts = np.prod(np.array(list(itertools.product(w, repeat=dim))), axis=1)
    return pts, wts


@lru_cache(maxsize=16)
def sigma_points(dim: int):
    """Symmetric degree-3 rule, nodes ``+-sqrt(dim) e_i`` with weight ``1/(2 dim)``.

    Exact for every polynomial of degree <= 3 in a standard normal vector,
    in particular for any statistic quadratic in the disorder.
    """
    r = np.sqrt(dim)
    eye = np.eye(dim) * r
    pts = np.concatenate([eye, -eye])
    wts = np.full(2 * dim, 1.0 / (2 * dim))
    return pts, wts
