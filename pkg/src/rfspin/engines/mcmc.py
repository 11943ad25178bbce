"""Single-site Metropolis sampler for every measure.

Each (disorder sample, chain) pair owns two Philox streams, one for
proposals and one for acceptance uniforms, so results do not depend on the
sweep block size or on how samples are distributed over workers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .. import kernels, streams
from ..correlators import as_slot
from ..lattice import Lattice
from ..model import GaussianMass, ModelParams, Quartic, Spherical
from ..stats import integrated_autocorrelation_time
from .base import SampledState

log = logging.getLogger(__name__)

BLOCK = 64
DIVERGENCE = 1e6
MIN_TAU_LENGTHS = 50  # windowed tau_int is biased low on shorter chains


@dataclass(frozen=True)
class Schedule:
    thermalization: int = 500
    measurements: int = 2000
    stride: int = 1
    chains: int = 16
    step: float = 0.5  # Gaussian proposal width for quartic / gaussian measures
    overrelax: bool = True

    def __post_init__(self):
        if self.chains < 2:
            raise ValueError("need at least two chains for error estimates")
        if self.measurements < 1 or self.stride < 1 or self.thermalization < 0:
            raise ValueError("invalid sweep schedule")


class Mcmc:
    variant = "mcmc"

    def __init__(self, params: ModelParams, lattice: Lattice, schedule: Schedule = Schedule(), seed: int = 0):
        self.params = params
        self.lattice = lattice
        self.schedule = schedule
        self.seed = seed
        m = params.measure
        if isinstance(m, Spherical):
            self.code, self.param = (kernels.ISING if params.N == 1 else kernels.SPHERE), 0.0
        elif isinstance(m, Quartic):
            self.code, self.param = kernels.QUARTIC, m.u
        elif isinstance(m, GaussianMass):
            self.code, self.param = kernels.GAUSS, m.mu
        else:
            raise ValueError(f"unsupported measure {m!r}")

    @property
    def N(self) -> int:
        return self.params.N

    def _init(self, ids, B):
        V, N = self.lattice.volume, self.N
        phi = np.empty((len(ids) * B, V, N))
        for a, i in enumerate(ids):
            for c in range(B):
                rng = streams.stream(self.seed, streams.INIT, int(i), c)
                if self.code == kernels.ISING:
                    phi[a * B + c] = rng.choice([-1.0, 1.0], size=(V, 1))
                else:
                    v = rng.standard_normal((V, N))
                    if self.code == kernels.SPHERE:
                        v /= np.linalg.norm(v, axis=1, keepdims=True)
                    phi[a * B + c] = v
        return phi

    def _randoms(self, gens, nsweeps):
        V, N = self.lattice.volume, self.N
        props = np.zeros((nsweeps, len(gens), V, N))
        logu = np.empty((nsweeps, len(gens), V))
        for r, (gp, gu) in enumerate(gens):
            if self.code != kernels.ISING:
                p = gp.standard_normal((nsweeps, V, N))
                if self.code == kernels.SPHERE:
                    p /= np.linalg.norm(p, axis=2, keepdims=True)
                props[:, r] = p
            logu[:, r] = np.log1p(-gu.random((nsweeps, V)))
        return props, logu

    def _run(self, phi, field, buf, nsweeps):
        sched = self.schedule
        accepted = 0
        while nsweeps > 0:
            if buf["pos"] == buf["logu"].shape[0]:
                buf["props"], buf["logu"] = self._randoms(buf["gens"], BLOCK)
                buf["pos"] = 0
            a = buf["pos"]
            s = min(nsweeps, BLOCK - a)
            accepted += kernels.metropolis_sweeps(
                phi, self.lattice.neighbors, field, self.params.coupling, self.code, self.param, sched.step,
                np.ascontiguousarray(buf["props"][a:a + s]), np.ascontiguousarray(buf["logu"][a:a + s]),
                int(sched.overrelax),
            )
            buf["pos"] = a + s
            nsweeps -= s
        if not np.all(np.isfinite(phi)) or np.max(np.abs(phi)) > DIVERGENCE:
            raise FloatingPointError("Markov chain diverged; reduce the proposal step or check the measure")
        return accepted

    def gibbs(self, fields: np.ndarray, ids=None) -> SampledState:
        fields = np.asarray(fields, dtype=float)
        if fields.ndim == 2:
            fields = fields[None]
        M = fields.shape[0]
        ids = np.arange(M) if ids is None else np.asarray(ids)
        sched = self.schedule
        B = sched.chains
        V, N = self.lattice.volume, self.N
        phi = self._init(ids, B)
        field = np.ascontiguousarray(np.repeat(self.params.field_scale * fields, B, axis=0))
        gens = [
            (streams.stream(self.seed, streams.MCMC, int(i), c, 0), streams.stream(self.seed, streams.MCMC, int(i), c, 1))
            for i in ids
            for c in range(B)
        ]
        buf = {"gens": gens, "pos": 0, "logu": np.empty((0,)), "props": None}
        self._run(phi, field, buf, sched.thermalization)
        out = np.empty((sched.measurements, M * B, V, N))
        accepted = 0
        for t in range(sched.measurements):
            accepted += self._run(phi, field, buf, sched.stride)
            out[t] = phi
        rate = accepted / (sched.measurements * sched.stride * M * B * V)
        if rate < 0.01:
            log.warning("Metropolis acceptance rate %.4f is below 1%%", rate)
        samples = out.reshape(sched.measurements, M, B, V, N).transpose(1, 2, 0, 3, 4)
        return SampledState(self.lattice, N, fields, np.ascontiguousarray(samples), acceptance=rate)


@dataclass
class McmcEstimate:
    values: np.ndarray
    stderr: np.ndarray
    tau_int: np.ndarray
    acceptance: float


def mcmc_estimate(engine: Mcmc, disorder, observables, schedule: Schedule = None, seed: int = None) -> McmcEstimate:
    """Means of ``observables`` under one disorder sample.

    Errors are ``sqrt(2 tau_int var / n)`` with ``tau_int`` from the pooled
    chain histories (automatic windowing).
    """
    if schedule is not None or seed is not None:
        engine = Mcmc(engine.params, engine.lattice, schedule or engine.schedule, engine.seed if seed is None else seed)
    g = disorder.g if hasattr(disorder, "g") else np.asarray(disorder, dtype=float)
    state = engine.gibbs(g.reshape(1, engine.lattice.volume, engine.N))
    vals, errs, taus = [], [], []
    for obs in observables:
        series = as_slot(obs, engine.lattice, engine.N).evaluate(state.samples[0])[..., 0]  # (B, S)
        tau = integrated_autocorrelation_time(series.real)
        if tau * MIN_TAU_LENGTHS > series.shape[-1]:
            log.warning("tau_int %.1f exceeds 1/%d of the %d measurements per chain; error bars may be too small",
                        tau, MIN_TAU_LENGTHS, series.shape[-1])
        n = series.size
        var = np.var(series.real) + (np.var(series.imag) if np.iscomplexobj(series) else 0.0)
        vals.append(series.mean())
        errs.append(np.sqrt(2.0 * tau * var / n))
        taus.append(tau)
    return McmcEstimate(np.array(vals), np.array(errs), np.array(taus), state.acceptance)
