"""Square-root interpolation between two disorder realizations.

``G(t) = sqrt(t) g + sqrt(1 - t) g'`` and

    gamma(t) = E | E' <f_1; ...; f_k>_{G(t)} |^2

with ``E`` over ``g`` (outer) and ``E'`` over ``g'`` (inner).  Its derivatives
are sums of squared inner-averaged higher cumulants,

    gamma^(l)(t) = (beta h)^{2l} sum_{p_1..p_l, n_1..n_l} E | E' W_{p, f, G(t)} |^2,

evaluated here in position space (the unitary transform preserves the sum).
All values on a path share the same outer samples, so differences in ``t``
have small, correlated errors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from . import streams
from .correlators import MAX_ORDER, as_slot, position_spins
from .engines.averaging import GaussHermite, SigmaPoint, collect
from .inequalities import InequalityReport, judge
from .stats import sigma_points

MAX_DERIVATIVE = 3
INNER_BATCH = 1 << 16


@dataclass(frozen=True)
class InnerMonteCarlo:
    """Inner average from ``n_inner`` draws on streams ``(base_seed, outer_i, inner_j)``.

    The squared inner mean is estimated from two independent halves,
    ``Re(u_A conj(u_B))``, which removes the upward bias of ``|u|^2``.
    """

    n_inner: int = 256
    base_seed: int = 0

    def __post_init__(self):
        if self.n_inner < 2 or self.n_inner % 2:
            raise ValueError("n_inner must be an even number >= 2")


def interpolated_disorder(g, gprime, t: float):
    """``sqrt(t) g + sqrt(1 - t) g'``; accepts arrays or :class:`DisorderSample`."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    a = g.g if hasattr(g, "g") else np.asarray(g, dtype=float)
    b = gprime.g if hasattr(gprime, "g") else np.asarray(gprime, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    out = np.sqrt(t) * a + np.sqrt(1.0 - t) * b
    if hasattr(g, "g"):
        from .model import DisorderSample

        return DisorderSample(out)
    return out


def _inner_points(inner, V, N, outer_id):
    if isinstance(inner, GaussHermite):
        pts, wts = inner.rule(V, N)
        return pts.reshape(-1, V, N), wts, False
    if isinstance(inner, SigmaPoint):
        pts, wts = sigma_points(V * N)
        return pts.reshape(-1, V, N), wts, False
    if isinstance(inner, InnerMonteCarlo):
        pts = np.stack([
            streams.normals(inner.base_seed, (streams.INNER, int(outer_id), j), (V, N)) for j in range(inner.n_inner)
        ])
        return pts, np.full(inner.n_inner, 1.0 / inner.n_inner), True
    raise TypeError(f"unsupported inner expectation {inner!r}")


def _abs2(u, split):
    """``|E' X|^2`` from inner values ``(n_inner, ...)`` already weighted."""
    if not split:
        s = u.sum(axis=0)
        return np.abs(s) ** 2
    h = u.shape[0] // 2
    a = 2.0 * u[:h].sum(axis=0)
    b = 2.0 * u[h:].sum(axis=0)
    return np.real(a * np.conj(b))


def _profile(engine, ts, f_specs, inner, outer, orders, workers):
    """Per-outer-sample integrands: ``gamma`` and ``gamma^(l)`` for ``l in orders`` at each ``t``.

    Returns a :class:`Collected` whose values are, in order, one ``(n, T)``
    array per requested order, then the naive (unsplit) gamma integrand.
    """
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0) or np.any(ts > 1):
        raise ValueError("t values must lie in [0, 1]")
    lat, N = engine.lattice, engine.N
    V = lat.volume
    fs = [as_slot(f, lat, N) for f in f_specs]
    k = len(fs)
    for l in orders:
        if l > MAX_DERIVATIVE:
            raise ValueError(f"derivatives beyond order {MAX_DERIVATIVE} are not available")
        if l + k > MAX_ORDER:
            raise ValueError(f"l + k must be <= {MAX_ORDER}")
    spin = position_spins(lat, N)
    bh2 = engine.params.field_scale ** 2
    shared = None if isinstance(inner, InnerMonteCarlo) else _inner_points(inner, V, N, 0)

    def per_outer(g_out, outer_ids):
        n = g_out.shape[0]
        res = {l: np.empty((n, len(ts))) for l in orders}
        naive = np.empty((n, len(ts)))
        for a in range(n):
            pts, wts, split = shared if shared is not None else _inner_points(inner, V, N, outer_ids[a])
            for it, t in enumerate(ts):
                G = np.sqrt(t) * g_out[a][None] + np.sqrt(1.0 - t) * pts
                acc = {l: [] for l in orders}
                for s in range(0, len(G), INNER_BATCH):
                    part = G[s:s + INNER_BATCH]
                    state = engine.gibbs(part, ids=np.full(len(part), outer_ids[a]))
                    w = wts[s:s + INNER_BATCH, None]
                    for l in orders:
                        acc[l].append(state.cumulant([spin] * l + fs)[0].reshape(state.n, -1) * w)
                for l in orders:
                    W = np.concatenate(acc[l])
                    val = _abs2(W, split)
                    res[l][a, it] = bh2**l * np.sum(val) if l else float(val[0])
                    if l == 0:
                        naive[a, it] = float(np.abs(W.sum(axis=0)[0]) ** 2)
        return tuple(res[l] for l in orders) + (naive,)

    def statistic(state):
        return per_outer(state.fields, state.ids)

    return collect(_OuterEngine(engine), outer, statistic, workers)


class _OuterEngine:
    """Adapter: the outer average only needs the fields, not a Gibbs state."""

    def __init__(self, engine):
        self.engine = engine
        self.lattice = engine.lattice
        self.N = engine.N
        self.params = engine.params
        self.variant = engine.variant

    def gibbs(self, fields, ids=None):
        return _Fields(fields, ids)


@dataclass
class _Fields:
    fields: np.ndarray
    ids: np.ndarray

    @property
    def n(self):
        return self.fields.shape[0]


def _orders_with_zero(orders):
    orders = sorted(set(orders) | {0})
    return tuple(orders)


def gamma_value(engine, t: float, f_specs, inner, outer, workers: int = 1):
    """``(gamma(t), stderr)``."""
    col = _profile(engine, [t], f_specs, inner, outer, (0,), workers)
    est, err = col.estimate(lambda g, naive: g)
    return float(est[0]), float(err[0])


def gamma_derivative(engine, t: float, l: int, f_specs, inner, outer, workers: int = 1):
    """``(gamma^(l)(t), stderr)`` from the cumulant representation."""
    if l < 1:
        raise ValueError("derivative order must be >= 1; use gamma_value for l = 0")
    col = _profile(engine, [t], f_specs, inner, outer, (0, l), workers)
    est, err = col.estimate(lambda g, d, naive: d)
    return float(est[0]), float(err[0])


@dataclass
class GammaPath:
    t: np.ndarray
    gamma: np.ndarray
    stderr: np.ndarray
    dgamma: np.ndarray  # first derivative from the cumulant representation
    dstderr: np.ndarray
    bias: np.ndarray  # naive minus split-half gamma (zero for exact inner rules)
    increments: np.ndarray  # gamma(t_{i+1}) - gamma(t_i)
    increments_stderr: np.ndarray
    curvature: np.ndarray  # divided second differences
    curvature_stderr: np.ndarray
    fd_t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    fd_diff: np.ndarray = field(default_factory=lambda: np.zeros(0))  # cumulant derivative minus central difference
    fd_stderr: np.ndarray = field(default_factory=lambda: np.zeros(0))
    fd_step: float = 0.0

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "gamma", "stderr", "dgamma_lemma1", "stderr"])
            for row in zip(self.t, self.gamma, self.stderr, self.dgamma, self.dstderr):
                w.writerow([repr(float(x)) for x in row])

    def monotone_margins(self):
        return _margins(self.increments, self.increments_stderr)

    def convex_margins(self):
        return _margins(self.curvature, self.curvature_stderr)

    def fd_margins(self):
        return _margins(self.fd_diff, self.fd_stderr)


def _margins(v, e):
    return np.where(e > 0, v / np.where(e > 0, e, 1.0), np.where(v >= 0, np.inf, -np.inf))


def gamma_path(engine, ts, f_specs, inner, outer, workers: int = 1, fd_step: float = None) -> GammaPath:
    """``gamma`` and its first derivative along ``ts`` on common outer samples.

    With ``fd_step`` the derivative from the cumulant representation is
    compared with the central difference ``(gamma(t+h) - gamma(t-h)) / 2h``
    at every interior grid point.
    """
    ts = np.asarray(ts, dtype=float)
    T = len(ts)
    grid = list(ts)
    fd_t = np.zeros(0)
    if fd_step:
        fd_t = np.array([t for t in ts if t - fd_step >= 0 and t + fd_step <= 1])
        grid += list(fd_t - fd_step) + list(fd_t + fd_step)
    F = len(fd_t)
    col = _profile(engine, grid, f_specs, inner, outer, (0, 1), workers)

    def main(g, d, naive):
        return np.concatenate([g[:, :T], d[:, :T], naive[:, :T] - g[:, :T]], axis=1)

    est, err = col.estimate(main)
    gam, dg, bias = est[:T], est[T:2 * T], est[2 * T:]
    gerr, derr = err[:T], err[T:2 * T]

    def diffs(g, d, naive):
        inc = g[:, 1:T] - g[:, : max(T - 1, 0)]
        if T >= 3:
            t0, t1, t2 = ts[:-2], ts[1:-1], ts[2:]
            s1 = (g[:, 2:T] - g[:, 1 : T - 1]) / (t2 - t1)
            s0 = (g[:, 1 : T - 1] - g[:, : T - 2]) / (t1 - t0)
            curv = 2.0 * (s1 - s0) / (t2 - t0)
        else:
            curv = np.zeros((g.shape[0], 0))
        parts = [inc, curv]
        if F:
            lo = g[:, T : T + F]
            hi = g[:, T + F : T + 2 * F]
            idx = [int(np.argmin(np.abs(ts - t))) for t in fd_t]
            parts.append(d[:, idx] - (hi - lo) / (2.0 * fd_step))
        return np.concatenate(parts, axis=1)

    dest, derr2 = col.estimate(diffs)
    n_inc = max(T - 1, 0)
    n_curv = max(T - 2, 0)
    return GammaPath(
        t=ts, gamma=gam, stderr=gerr, dgamma=dg, dstderr=derr, bias=bias,
        increments=dest[:n_inc], increments_stderr=derr2[:n_inc],
        curvature=dest[n_inc : n_inc + n_curv], curvature_stderr=derr2[n_inc : n_inc + n_curv],
        fd_t=fd_t, fd_diff=dest[n_inc + n_curv :], fd_stderr=derr2[n_inc + n_curv :], fd_step=float(fd_step or 0.0),
    )


def check_lemma2(engine, t1: float, t2: float, j: int, l: int, f_specs, inner, outer, workers: int = 1) -> InequalityReport:
    """``(t2 - t1)^l gamma^(j+l)(t1) <= l! gamma^(j)(t2)`` on common outer samples.

    The report's ``mid`` equals ``rhs``; the single margin is for ``rhs - lhs``.
    """
    if not 0.0 <= t1 < t2 <= 1.0:
        raise ValueError("need 0 <= t1 < t2 <= 1")
    if j < 0 or l < 0:
        raise ValueError("j and l must be non-negative")
    orders = _orders_with_zero((j, j + l))
    col = _profile(engine, [t1, t2], f_specs, inner, outer, orders, workers)
    pos = {o: i for i, o in enumerate(orders)}
    c = (t2 - t1) ** l
    lf = factorial(l)

    def func(*vals):
        lhs = c * vals[pos[j + l]][:, 0]
        rhs = lf * vals[pos[j]][:, 1]
        return np.stack([lhs, rhs, rhs - lhs], axis=1)

    est, err = col.estimate(func)
    lhs, rhs, diff = (float(v) for v in est)
    margins, verdict = judge([diff], [err[2]], col.stochastic, max(abs(lhs), abs(rhs)))
    meta = {"t1": t1, "t2": t2, "j": j, "l": l, "engine": engine.variant}
    return InequalityReport(lhs, rhs, rhs, [float(err[0]), float(err[1]), float(err[1])], [0.0, float(err[2])],
                            [None] + margins, verdict, meta)
