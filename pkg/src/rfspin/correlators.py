"""Observables, cumulants and the W-correlators built on engine states.

A cumulant ``<A_1; ...; A_j>`` is assembled from joint moments through the
set-partition (Moebius) formula.  Each argument position is a *slot* that may
hold a batch of ``K`` observables, so a whole momentum or position sum is
computed in one broadcasted pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .lattice import Lattice

MAX_ORDER = 6


@dataclass(frozen=True)
class MomentumSpin:
    """``phi~_q^n`` with unitary normalization; ``k`` is the integer momentum index."""

    k: tuple
    n: int = 0


@dataclass(frozen=True)
class PositionSpin:
    x: int
    n: int = 0


@dataclass(frozen=True)
class FunctionObservable:
    """Bounded, possibly complex, function of the whole configuration.

    ``fn`` maps ``phi`` of shape ``(..., V, N)`` to shape ``(...)``.
    """

    fn: Callable
    name: str = "f"


@dataclass(eq=False)
class Slot:
    """``K`` observables occupying one cumulant argument."""

    K: int
    coeffs: Optional[np.ndarray] = None  # (V, N, K), linear observables
    fn: Optional[Callable] = None  # phi (..., V, N) -> (..., K)
    label: str = ""

    @property
    def linear(self) -> bool:
        return self.coeffs is not None

    def evaluate(self, phi: np.ndarray) -> np.ndarray:
        if self.coeffs is not None:
            return np.tensordot(phi, self.coeffs, axes=([-2, -1], [0, 1]))
        return self.fn(phi)


def momentum_coeffs(lattice: Lattice, N: int, k, n: int) -> np.ndarray:
    c = np.zeros((lattice.volume, N), dtype=complex)
    c[:, n] = lattice.phases(k) / np.sqrt(lattice.volume)
    return c


def as_slot(obs, lattice: Lattice, N: int) -> Slot:
    if isinstance(obs, Slot):
        return obs
    if isinstance(obs, MomentumSpin):
        if not 0 <= obs.n < N:
            raise ValueError(f"component {obs.n} out of range for N={N}")
        c = momentum_coeffs(lattice, N, obs.k, obs.n)
        return Slot(1, coeffs=c[..., None], label=f"phi~{tuple(obs.k)}^{obs.n}")
    if isinstance(obs, PositionSpin):
        if not 0 <= obs.n < N:
            raise ValueError(f"component {obs.n} out of range for N={N}")
        c = np.zeros((lattice.volume, N, 1))
        c[obs.x, obs.n, 0] = 1.0
        return Slot(1, coeffs=c, label=f"phi_{obs.x}^{obs.n}")
    if isinstance(obs, FunctionObservable):
        fn = obs.fn
        return Slot(1, fn=lambda phi: np.asarray(fn(phi))[..., None], label=obs.name)
    raise TypeError(f"not an observable: {obs!r}")


def position_spins(lattice: Lattice, N: int) -> Slot:
    """All ``phi_x^n`` as one slot, batch index ``x * N + n``."""
    D = lattice.volume * N
    return Slot(D, coeffs=np.eye(D).reshape(lattice.volume, N, D), label="phi_x")


def momentum_spins(lattice: Lattice, N: int) -> Slot:
    """All ``phi~_p^n`` as one slot, batch index ``p * N + n`` (grid order)."""
    V = lattice.volume
    U = lattice.fourier_matrix  # (p, x)
    c = np.zeros((V, N, V, N), dtype=complex)
    for n in range(N):
        c[:, n, :, n] = U.T
    return Slot(V * N, coeffs=c.reshape(V, N, V * N), label="phi~_p")


@lru_cache(maxsize=None)
def set_partitions(j: int) -> tuple:
    """All set partitions of ``range(j)`` as tuples of blocks."""
    if j == 0:
        return ((),)
    out = []
    for part in set_partitions(j - 1):
        out.append(part + ((j - 1,),))
        for i in range(len(part)):
            out.append(part[:i] + (part[i] + (j - 1,),) + part[i + 1:])
    return tuple(out)


def connected_from_moments(moments, j: int):
    """Joint cumulant of ``A_1 ... A_j`` from their mixed moments.

    ``moments`` maps a block (sorted tuple of argument positions) to
    ``<prod_{i in block} A_i>``, either as a mapping or a callable.  Values
    may be arrays; they are combined with broadcasting.
    """
    if not 1 <= j <= MAX_ORDER:
        raise ValueError(f"cumulant order must be in [1, {MAX_ORDER}], got {j}")
    get = moments.__getitem__ if isinstance(moments, Mapping) else moments
    cache = {}

    def m(block):
        if block not in cache:
            cache[block] = get(block)
        return cache[block]

    total = 0
    for part in set_partitions(j):
        b = len(part)
        term = (-1) ** (b - 1) * factorial(b - 1)
        for block in part:
            term = term * m(tuple(sorted(block)))
        total = total + term
    return total


@dataclass
class WCorrelator:
    momenta: list
    components: list
    tail: list
    value: np.ndarray
    stderr: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.stderr is None:
            self.stderr = np.zeros(np.shape(self.value))


def _state(engine, disorder):
    if hasattr(disorder, "g"):
        return engine.gibbs(disorder.g[None])
    fields = np.asarray(disorder, dtype=float)
    if fields.ndim == 2:
        fields = fields[None]
    return engine.gibbs(fields)


def w_correlator(engine, disorder, momenta: Sequence, components: Sequence[int], tail: Sequence) -> WCorrelator:
    """``<phi~_{p_1}^{n_1}; ...; phi~_{p_l}^{n_l}; f_1; ...; f_k>`` for one disorder realization.

    ``disorder`` is a :class:`DisorderSample` or a field array ``(V, N)``
    (or a batch ``(M, V, N)``, in which case values are per sample).
    """
    momenta = list(momenta)
    components = list(components)
    if len(momenta) != len(components):
        raise ValueError("need one component per momentum")
    if len(momenta) + len(tail) > MAX_ORDER:
        raise ValueError(f"l + k must be <= {MAX_ORDER}")
    if len(momenta) + len(tail) == 0:
        raise ValueError("empty correlator")
    state = _state(engine, disorder)
    obs = [MomentumSpin(tuple(p), n) for p, n in zip(momenta, components)] + list(tail)
    value, err = state.cumulant(obs)
    value = value.reshape(value.shape[0])
    err = None if err is None else err.reshape(err.shape[0])
    if value.shape[0] == 1:
        value = value[0]
        err = None if err is None else err[0]
    return WCorrelator(momenta, components, list(tail), value, err)


def susceptibility(engine, disorder, q, m: int = 0, n: int = 0):
    """``chi~^{m,n}(q, g) = <phi~_q^m; phi~_{-q}^n>_g``."""
    lattice = engine.lattice
    return w_correlator(engine, disorder, [tuple(q)], [m], [MomentumSpin(lattice.negate(q), n)]).value
