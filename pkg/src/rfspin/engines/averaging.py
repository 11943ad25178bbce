"""Quenched averages over the Gaussian disorder.

Three modes produce disorder points and weights:

* :class:`MonteCarlo` draws sample ``i`` from the stream ``(base_seed, i)``
  and reports jackknife errors;
* :class:`GaussHermite` is a deterministic tensor-product rule (``V N <= 8``);
* :class:`SigmaPoint` is a deterministic degree-3 rule, exact whenever the
  statistic is quadratic in ``g`` (every statistic of the Gaussian engine).

Chunks have a fixed size independent of the worker count, so per-sample
values, and therefore all reductions, are identical for any ``workers``.
"""

from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..model import disorder_batch
from ..stats import gauss_hermite, jackknife, sigma_points

MAX_GH_DIM = 8
CHUNK = 256


@dataclass(frozen=True)
class MonteCarlo:
    n_samples: int
    base_seed: int = 0

    stochastic = True

    def chunks(self, V, N):
        for start in range(0, self.n_samples, CHUNK):
            ids = np.arange(start, min(start + CHUNK, self.n_samples))
            yield ids, None

    def materialize(self, ids, V, N):
        return disorder_batch(V, N, self.base_seed, ids), np.full(len(ids), 1.0 / self.n_samples)


@dataclass(frozen=True)
class GaussHermite:
    nodes_per_dim: int = 20

    stochastic = False

    def rule(self, V, N):
        if V * N > MAX_GH_DIM:
            raise ValueError(f"Gauss-Hermite averaging limited to V*N <= {MAX_GH_DIM}, got {V * N}")
        return gauss_hermite(self.nodes_per_dim, V * N)

    def chunks(self, V, N):
        pts, _ = self.rule(V, N)
        for start in range(0, len(pts), CHUNK):
            yield np.arange(start, min(start + CHUNK, len(pts))), None

    def materialize(self, ids, V, N):
        pts, wts = self.rule(V, N)
        return pts[ids].reshape(len(ids), V, N), wts[ids]


@dataclass(frozen=True)
class SigmaPoint:
    stochastic = False

    def chunks(self, V, N):
        n = 2 * V * N
        for start in range(0, n, CHUNK):
            yield np.arange(start, min(start + CHUNK, n)), None

    def materialize(self, ids, V, N):
        pts, wts = sigma_points(V * N)
        return pts[ids].reshape(len(ids), V, N), wts[ids]


# fork-inherited task for worker processes (closures are not picklable)
_TASK = None


def _run_chunk(ids):
    return _TASK(ids)


def parallel_map(fn, items, workers: int = 1):
    """Ordered map; ``workers > 1`` forks a process pool that inherits ``fn``."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    global _TASK
    _TASK = fn
    try:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            return list(pool.map(_run_chunk, items))
    finally:
        _TASK = None


@dataclass
class Collected:
    """Per-sample statistics and their quadrature (or Monte Carlo) weights."""

    values: list  # arrays with leading sample axis
    weights: np.ndarray
    stochastic: bool
    ids: np.ndarray

    def estimate(self, func, n_blocks=None):
        """``func`` of the weighted means, with jackknife error in Monte Carlo mode.

        ``func`` receives means carrying a leading replica axis.
        """
        if self.stochastic:
            return jackknife(func, *self.values, n_blocks=n_blocks)
        means = [np.tensordot(self.weights, v, axes=(0, 0))[None] for v in self.values]
        value = np.asarray(func(*means))[0]
        return value, np.zeros(np.shape(value))


def collect(engine, averager, statistic, workers: int = 1) -> Collected:
    """Evaluate ``statistic(state)`` on every disorder point.

    ``statistic`` receives the engine's Gibbs state for a chunk of disorder
    fields and returns one array (or a tuple of arrays) with a leading
    sample axis.
    """
    V, N = engine.lattice.volume, engine.N

    def task(ids):
        fields, wts = averager.materialize(ids, V, N)
        state = engine.gibbs(fields, ids=ids)
        out = statistic(state)
        out = out if isinstance(out, tuple) else (out,)
        return tuple(np.asarray(o) for o in out), wts

    chunks = [ids for ids, _ in averager.chunks(V, N)]
    results = parallel_map(task, chunks, workers)
    if not results:
        return Collected([], np.zeros(0), averager.stochastic, np.zeros(0, dtype=int))
    k = len(results[0][0])
    values = [np.concatenate([r[0][i] for r in results]) for i in range(k)]
    weights = np.concatenate([r[1] for r in results])
    return Collected(values, weights, averager.stochastic, np.concatenate(chunks))


def disorder_average(engine, averager, statistic, workers: int = 1):
    """``(mean, stderr)`` of a per-sample statistic over the disorder.

    Deterministic quadrature modes report ``stderr = 0``.
    """
    col = collect(engine, averager, statistic, workers)
    return col.estimate(lambda m: m)
