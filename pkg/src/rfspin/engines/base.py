"""Gibbs states returned by the engines.

A state holds the Gibbs measure for a batch of ``M`` disorder fields and
answers cumulant queries.  Values come back with shape ``(M, K_1, ..., K_j)``
where ``K_i`` is the batch size of slot ``i``.
"""

from __future__ import annotations

import numpy as np

from ..correlators import MAX_ORDER, as_slot, connected_from_moments
from ..stats import jackknife_replicas


def _placed(vals: np.ndarray, lead: int, i: int, j: int) -> np.ndarray:
    """Reshape ``(*ensemble, K)`` so that ``K`` sits on output axis ``i`` of ``j``."""
    ens = vals.shape[:lead]
    K = vals.shape[lead]
    return vals.reshape(ens + (1,) * i + (K,) + (1,) * (j - i - 1))


class GibbsState:
    def __init__(self, lattice, N: int, fields: np.ndarray):
        self.lattice = lattice
        self.N = N
        self.fields = fields

    @property
    def n(self) -> int:
        return self.fields.shape[0]

    def _slots(self, observables):
        slots = [as_slot(o, self.lattice, self.N) for o in observables]
        if not 1 <= len(slots) <= MAX_ORDER:
            raise ValueError(f"cumulant order must be in [1, {MAX_ORDER}], got {len(slots)}")
        return slots

    def _full_shape(self, slots):
        return (self.n,) + tuple(s.K for s in slots)

    def cumulant(self, observables):
        raise NotImplementedError

    def mean(self, observable):
        """``<A>`` per sample; a batched slot keeps its batch axis."""
        value, err = self.cumulant([observable])
        if value.shape[1] == 1:
            return value[:, 0], (None if err is None else err[:, 0])
        return value, err


class EnsembleState(GibbsState):
    """Exact weights over an enumerated configuration set shared by all samples."""

    def __init__(self, lattice, N, fields, configs, weights, logz):
        super().__init__(lattice, N, fields)
        self.configs = configs  # (C, V, N)
        self.weights = weights  # (M, C)
        self.logz = logz  # (M,)

    def cumulant(self, observables):
        slots = self._slots(observables)
        j = len(slots)
        placed = [_placed(s.evaluate(self.configs), 1, i, j) for i, s in enumerate(slots)]

        def moment(block):
            prod = placed[block[0]]
            for i in block[1:]:
                prod = prod * placed[i]
            return np.tensordot(self.weights, prod, axes=(1, 0))

        value = connected_from_moments(moment, j)
        return np.broadcast_to(value, self._full_shape(slots)).copy(), None


class SampledState(GibbsState):
    """Markov-chain samples ``(M, chains, measurements, V, N)``.

    Errors come from a jackknife over independent chains, which absorbs
    autocorrelation within each chain.
    """

    def __init__(self, lattice, N, fields, samples, acceptance=None):
        super().__init__(lattice, N, fields)
        self.samples = samples
        self.acceptance = acceptance

    @property
    def chains(self) -> int:
        return self.samples.shape[1]

    def cumulant(self, observables):
        slots = self._slots(observables)
        j = len(slots)
        B = self.chains
        placed = [_placed(s.evaluate(self.samples), 3, i, j) for i, s in enumerate(slots)]

        def moment(block):
            prod = placed[block[0]]
            for i in block[1:]:
                prod = prod * placed[i]
            per_chain = prod.mean(axis=2)  # (M, B, ...)
            total = per_chain.sum(axis=1, keepdims=True)
            loo = (total - per_chain) / (B - 1)
            return np.concatenate([total / B, loo], axis=1)

        reps = connected_from_moments(moment, j)
        shape = self._full_shape(slots)
        reps = np.broadcast_to(reps, (shape[0], B + 1) + shape[1:])
        value = reps[:, 0].copy()
        err = jackknife_replicas(reps[:, 1:], axis=1)
        return value, err

    def moment(self, observables):
        """Joint moment ``<prod A_i>`` with chain-jackknife error."""
        slots = self._slots(observables)
        prod = 1.0
        for i, s in enumerate(slots):
            prod = prod * _placed(s.evaluate(self.samples), 3, i, len(slots))
        per_chain = prod.mean(axis=2)
        B = self.chains
        total = per_chain.sum(axis=1, keepdims=True)
        loo = (total - per_chain) / (B - 1)
        return per_chain.mean(axis=1), jackknife_replicas(loo, axis=1)
