"""Disorder-averaged correlation inequalities with statistical verdicts.

Momentum sums of squared correlators are evaluated in position space:
the unitary Fourier transform preserves ``sum_p |W_p|^2`` slot by slot, and
it also preserves ``sum_p |E W_p|^2`` because ``E`` is linear.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import factorial

import numpy as np

from .correlators import MAX_ORDER, MomentumSpin, Slot, as_slot, momentum_spins, position_spins
from .engines.averaging import collect

HOLDS = "HOLDS"
VIOLATED = "VIOLATED"
INCONCLUSIVE = "INCONCLUSIVE"

SIGMA = 3.0
EXACT_RTOL = 1e-10


@dataclass
class InequalityReport:
    """``lhs <= mid <= rhs`` with errors; ``diff_stderr`` are errors of ``mid-lhs`` and ``rhs-mid``."""

    lhs: float
    mid: float
    rhs: float
    stderr: list
    diff_stderr: list
    margins_sigma: list
    verdict: str
    metadata: dict = field(default_factory=dict)

    @property
    def chain(self):
        return [self.lhs, self.mid, self.rhs]

    def to_dict(self) -> dict:
        return asdict(self)


def judge(diffs, errs, stochastic: bool, scale: float):
    """Margins in sigma units and the verdict for a list of differences that should be >= 0.

    A zero error (deterministic rule or degenerate statistic) is judged
    against a relative rounding tolerance instead; its margin is ``None``.
    """
    margins = []
    verdict = HOLDS
    tol = EXACT_RTOL * max(scale, 1e-300)
    for d, e in zip(diffs, errs):
        d, e = float(d), float(e)
        if stochastic and e > 0:
            m = d / e
            margins.append(m)
            if m < -SIGMA:
                verdict = VIOLATED
            elif m < 0 and verdict == HOLDS:
                verdict = INCONCLUSIVE
        else:
            margins.append(None)
            if d < -tol:
                verdict = VIOLATED
    return margins, verdict


def _report(est, err, stochastic, meta) -> InequalityReport:
    lhs, mid, rhs, d1, d2 = (float(np.real(v)) for v in est)
    scale = max(abs(lhs), abs(mid), abs(rhs))
    margins, verdict = judge([d1, d2], [err[3], err[4]], stochastic, scale)
    return InequalityReport(
        lhs, mid, rhs,
        [float(err[0]), float(err[1]), float(err[2])],
        [float(err[3]), float(err[4])],
        margins, verdict, meta,
    )


def _flat(v, M):
    return np.asarray(v).reshape(M, -1)


def _spin_slot(lattice, N, basis):
    if basis == "position":
        return position_spins(lattice, N)
    if basis == "momentum":
        return momentum_spins(lattice, N)
    raise ValueError(f"unknown basis {basis!r}")


def _meta(engine, averager, **extra):
    meta = {
        "engine": engine.variant,
        "averager": type(averager).__name__,
        "samples": getattr(averager, "n_samples", None),
        "base_seed": getattr(averager, "base_seed", None),
    }
    meta.update(extra)
    return meta


def _describe(f):
    if isinstance(f, MomentumSpin):
        return {"momentum": list(f.k), "component": f.n}
    return {"observable": getattr(f, "name", getattr(f, "label", repr(f)))}


def check_theorem_chain(engine, averager, k: int, l: int, f_specs, workers: int = 1, basis: str = "position",
                        n_blocks=None) -> InequalityReport:
    """The variance sandwich for ``Var <f_1; ...; f_k>``.

    lhs = (beta h)^{2l} / l! sum_{p, n} |E W_{p_1..p_l, f}|^2
    mid = E |<f>|^2 - |E <f>|^2
    rhs = (beta h)^2 sum_{p, n} E |W_{p, f}|^2

    All three are estimated on the same disorder samples; margins use the
    jackknife error of each difference.
    """
    if l < 1:
        raise ValueError("l = 0 is not covered: the lower bound is only established for positive l")
    if k < 1:
        raise ValueError("k must be >= 1")
    f_specs = list(f_specs)
    if len(f_specs) != k:
        raise ValueError(f"expected {k} observables, got {len(f_specs)}")
    if k + l > MAX_ORDER:
        raise ValueError(f"k + l must be <= {MAX_ORDER}")
    lat, N = engine.lattice, engine.N
    fs = [as_slot(f, lat, N) for f in f_specs]
    spin = _spin_slot(lat, N, basis)
    bh2 = engine.params.field_scale ** 2

    def statistic(state):
        M = state.n
        F = _flat(state.cumulant(fs)[0], M)[:, 0]
        Wl = _flat(state.cumulant([spin] * l + fs)[0], M)
        W1 = Wl if l == 1 else _flat(state.cumulant([spin] + fs)[0], M)
        return F, np.abs(F) ** 2, Wl, np.sum(np.abs(W1) ** 2, axis=1)

    col = collect(engine, averager, statistic, workers)

    def func(F, F2, Wl, S1):
        lhs = bh2**l / factorial(l) * np.sum(np.abs(Wl) ** 2, axis=1)
        mid = F2 - np.abs(F) ** 2
        rhs = bh2 * S1
        return np.stack([lhs, mid, rhs, mid - lhs, rhs - mid], axis=1)

    est, err = col.estimate(func, n_blocks=n_blocks)
    return _report(est, err, col.stochastic, _meta(engine, averager, k=k, l=l, f=[_describe(f) for f in f_specs]))


def _component_positions(lattice, N, m) -> Slot:
    V = lattice.volume
    c = np.zeros((V, N, V))
    c[np.arange(V), m, np.arange(V)] = 1.0
    return Slot(V, coeffs=c, label=f"phi_x^{m}")


def _all_components(lattice, N, q) -> Slot:
    V = lattice.volume
    c = np.zeros((V, N, N), dtype=complex)
    ph = lattice.phases(q) / np.sqrt(V)
    for n in range(N):
        c[:, n, n] = ph
    return Slot(N, coeffs=c, label=f"phi~{tuple(q)}^n")


def check_schwartz_soffer(engine, averager, q, m: int = 0, n: int = 0, workers: int = 1,
                          n_blocks=None) -> InequalityReport:
    """Two-link chain

    (E <phi~_q^m; phi~_{-q}^n>)^2 <= (beta h)^{-2} E |<phi~_q^m>|^2
                                 <= sum_{p, n'} E |<phi~_q^{n'}; phi~_p^m>|^2

    ``metadata["note_bound"]`` additionally carries
    ``sum_{p, n'} |E <phi~_q^m; phi~_p^{n'}>|^2`` which bounds the left member.
    """
    bh = engine.params.field_scale
    if bh == 0.0:
        raise ValueError("the middle member needs beta*h != 0")
    lat, N = engine.lattice, engine.N
    q = tuple(int(c) for c in q)
    A = as_slot(MomentumSpin(q, m), lat, N)
    B = as_slot(MomentumSpin(lat.negate(q), n), lat, N)
    all_n_q = _all_components(lat, N, q)
    pos_m = _component_positions(lat, N, m)
    spin = position_spins(lat, N)

    def statistic(state):
        M = state.n
        chi = _flat(state.cumulant([A, B])[0], M)[:, 0]
        a = _flat(state.cumulant([A])[0], M)[:, 0]
        R = np.sum(np.abs(_flat(state.cumulant([all_n_q, pos_m])[0], M)) ** 2, axis=1)
        row = _flat(state.cumulant([A, spin])[0], M)
        return chi, np.abs(a) ** 2, R, row

    col = collect(engine, averager, statistic, workers)

    def func(chi, a2, R, row):
        lhs = np.abs(chi) ** 2
        mid = a2 / bh**2
        rhs = R
        return np.stack([lhs, mid, rhs, mid - lhs, rhs - mid], axis=1)

    est, err = col.estimate(func, n_blocks=n_blocks)
    note, note_err = col.estimate(lambda chi, a2, R, row: np.sum(np.abs(row) ** 2, axis=1)[:, None], n_blocks=n_blocks)
    meta = _meta(engine, averager, q=list(q), m=m, n=n, note_bound=float(note[0]), note_bound_stderr=float(note_err[0]))
    return _report(est, err, col.stochastic, meta)


def variance_of_correlator(engine, averager, f_specs, workers: int = 1, n_blocks=None):
    """``Var <f_1; ...; f_k>_g = E|.|^2 - |E .|^2`` with its jackknife error."""
    lat, N = engine.lattice, engine.N
    fs = [as_slot(f, lat, N) for f in f_specs]

    def statistic(state):
        F = _flat(state.cumulant(fs)[0], state.n)[:, 0]
        return F, np.abs(F) ** 2

    col = collect(engine, averager, statistic, workers)
    est, err = col.estimate(lambda F, F2: (F2 - np.abs(F) ** 2)[:, None], n_blocks=n_blocks)
    return float(est[0]), float(err[0])
