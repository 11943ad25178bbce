"""Exact enumeration of the ``N = 1`` spherical (Ising) model."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..correlators import as_slot
from ..lattice import Lattice
from ..model import ModelParams, Spherical, exchange_sum
from .base import EnsembleState

MAX_VOLUME = 24


class ExactEnum:
    """Sum over all ``2^V`` Ising configurations, log-sum-exp stabilized."""

    variant = "exact"

    def __init__(self, params: ModelParams, lattice: Lattice):
        if params.N != 1 or not isinstance(params.measure, Spherical):
            raise ValueError("exact enumeration needs N=1 with the spherical (Ising) measure")
        if lattice.volume > MAX_VOLUME:
            raise ValueError(f"exact enumeration limited to V <= {MAX_VOLUME}, got V={lattice.volume}")
        self.params = params
        self.lattice = lattice
        V = lattice.volume
        bits = (np.arange(2**V)[:, None] >> np.arange(V)[None, :]) & 1
        self.spins = np.ascontiguousarray(1.0 - 2.0 * bits)  # (C, V)
        self.configs = self.spins[:, :, None]
        self.base = np.ascontiguousarray(params.beta * params.J * exchange_sum(self.configs, lattice))

    @property
    def N(self) -> int:
        return 1

    def gibbs(self, fields: np.ndarray, ids=None) -> EnsembleState:
        fields = np.asarray(fields, dtype=float)
        if fields.ndim == 2:
            fields = fields[None]
        M = fields.shape[0]
        flat = np.ascontiguousarray(fields.reshape(M, -1))
        if flat.shape[1] != self.lattice.volume:
            raise ValueError(f"fields have {flat.shape[1]} entries, expected {self.lattice.volume}")
        weights = np.empty((M, self.spins.shape[0]))
        logz = np.asarray(kernels.boltzmann_weights(self.spins, self.base, flat, self.params.field_scale, weights))
        return EnsembleState(self.lattice, 1, fields, self.configs, weights, logz)

    def log_partition(self, fields) -> np.ndarray:
        return self.gibbs(fields).logz


@dataclass
class ExactMoments:
    moments: dict  # sorted index tuple -> complex
    log_z: float
    psi: float


def exact_gibbs_moments(engine: ExactEnum, disorder, observables, max_order: int) -> ExactMoments:
    """All joint moments of ``observables`` up to ``max_order`` for one disorder sample."""
    g = disorder.g if hasattr(disorder, "g") else np.asarray(disorder, dtype=float)
    state = engine.gibbs(g.reshape(1, -1, 1))
    vals = [as_slot(o, engine.lattice, 1).evaluate(engine.configs)[:, 0] for o in observables]
    p = state.weights[0]
    out = {}
    for order in range(1, max_order + 1):
        for idx in itertools.combinations_with_replacement(range(len(vals)), order):
            prod = np.ones(p.shape[0], dtype=complex)
            for i in idx:
                prod = prod * vals[i]
            out[idx] = complex(p @ prod)
    log_z = float(state.logz[0])
    return ExactMoments(out, log_z, log_z / engine.lattice.volume)
