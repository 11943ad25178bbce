"""Periodic hypercubic lattice, momentum grid and discrete Fourier transforms.

Sites are enumerated in C order over ``[0, L)^d``.  Momenta are stored as
integer index vectors ``k`` with ``q = 2 pi k / L``; all negation and
matching is done on the integers, modulo ``L``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

UNITARY = "unitary"
UNNORMALIZED = "unnormalized"
_NORMS = (UNITARY, UNNORMALIZED)


@dataclass(frozen=True)
class Lattice:
    """``d``-dimensional periodic lattice of linear size ``L``."""

    d: int
    L: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got d={self.d}")
        if self.L < 2:
            raise ValueError(f"linear size must be >= 2, got L={self.L}")
        if self.L == 2:
            # each pair would be doubly adjacent under periodic wrapping
            raise ValueError("L=2 is not supported: periodic neighbours are doubly adjacent")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.L,) * self.d

    @property
    def volume(self) -> int:
        return self.L**self.d

    @cached_property
    def coords(self) -> np.ndarray:
        """Integer site coordinates, shape ``(V, d)``."""
        grids = np.indices(self.shape).reshape(self.d, -1)
        return np.ascontiguousarray(grids.T)

    def site_index(self, x: Iterable[int]) -> int:
        return int(np.ravel_multi_index(tuple(int(c) % self.L for c in x), self.shape))

    @cached_property
    def neighbors(self) -> np.ndarray:
        """Neighbour table, shape ``(V, 2d)``; columns are ``+e_mu`` then ``-e_mu``."""
        c = self.coords
        cols = []
        for sign in (1, -1):
            for mu in range(self.d):
                shifted = c.copy()
                shifted[:, mu] = (shifted[:, mu] + sign) % self.L
                cols.append(np.ravel_multi_index(shifted.T, self.shape))
        return np.ascontiguousarray(np.stack(cols, axis=1).astype(np.int32))

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Dense 0/1 matrix with ``A[x, y] = 1`` iff ``|x - y| = 1``."""
        V = self.volume
        A = np.zeros((V, V))
        rows = np.repeat(np.arange(V), 2 * self.d)
        A[rows, self.neighbors.ravel()] = 1.0
        return A

    @cached_property
    def momentum_indices(self) -> np.ndarray:
        """Integer momentum vectors ``k``, shape ``(V, d)``, same ordering as sites."""
        return self.coords

    def momentum(self, k) -> np.ndarray:
        """Physical momentum ``2 pi k / L`` reduced to ``[0, 2 pi)``."""
        k = np.asarray(k) % self.L
        return 2.0 * np.pi * k / self.L

    def momentum_index(self, k: Iterable[int]) -> int:
        """Flat position of the integer momentum ``k`` in the grid ordering."""
        return self.site_index(k)

    def negate(self, k: Iterable[int]) -> tuple[int, ...]:
        return tuple(int(-c) % self.L for c in k)

    @cached_property
    def negation_map(self) -> np.ndarray:
        """``neg[i]`` is the flat index of ``-k_i``."""
        neg = (-self.momentum_indices) % self.L
        return np.ravel_multi_index(neg.T, self.shape)

    def phases(self, k, x=None) -> np.ndarray:
        """``exp(-i q.x)`` for one momentum ``k`` over all sites (or the sites ``x``)."""
        coords = self.coords if x is None else np.atleast_2d(x)
        k = np.asarray(k) % self.L
        return np.exp(-2j * np.pi * (coords @ k) / self.L)

    @cached_property
    def fourier_matrix(self) -> np.ndarray:
        """Unitary DFT matrix ``U[p, x] = exp(-i q_p . x) / sqrt(V)``."""
        ang = 2.0 * np.pi * (self.momentum_indices @ self.coords.T) / self.L
        return np.exp(-1j * ang) / np.sqrt(self.volume)


def build_momentum_grid(lattice: Lattice) -> np.ndarray:
    """All ``V`` momenta ``2 pi k / L`` as rows of a ``(V, d)`` array.

    The zero momentum is the first row; ``2 pi`` and ``0`` are identified.
    """
    return lattice.momentum(lattice.momentum_indices)


@dataclass
class MomentumField:
    """Complex field indexed by momentum (flat grid order) and component."""

    values: np.ndarray  # (..., V, N)
    lattice: Lattice
    normalization: str = UNITARY
    meta: dict = field(default_factory=dict)

    def at(self, k, n: int = 0):
        return self.values[..., self.lattice.momentum_index(k), n]


def _norm_factor(lattice: Lattice, normalization: str) -> float:
    if normalization not in _NORMS:
        raise ValueError(f"unknown normalization {normalization!r}; expected one of {_NORMS}")
    return 1.0 / np.sqrt(lattice.volume) if normalization == UNITARY else 1.0


def _check_field(values: np.ndarray, lattice: Lattice) -> np.ndarray:
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[-2] != lattice.volume:
        raise ValueError(f"field has {values.shape[-2]} sites, lattice has {lattice.volume}")
    return values


def fourier_forward(values, lattice: Lattice, normalization: str = UNITARY) -> MomentumField:
    """``phi~_q = c * sum_x exp(-i q.x) phi_x`` along the site axis (``-2``).

    ``values`` has shape ``(..., V, N)`` (or ``(V,)`` for one component);
    ``c`` is ``1/sqrt(V)`` for ``"unitary"`` and ``1`` for ``"unnormalized"``.
    """
    values = _check_field(values, lattice)
    c = _norm_factor(lattice, normalization)
    lead = values.shape[:-2]
    N = values.shape[-1]
    grid = values.reshape(lead + lattice.shape + (N,))
    axes = tuple(range(len(lead), len(lead) + lattice.d))
    out = np.fft.fftn(grid, axes=axes).reshape(lead + (lattice.volume, N))
    return MomentumField(out * c, lattice, normalization)


def fourier_inverse(mfield: MomentumField) -> np.ndarray:
    """Inverse of :func:`fourier_forward`; returns a complex ``(..., V, N)`` array."""
    lattice = mfield.lattice
    values = _check_field(mfield.values, lattice)
    c = _norm_factor(lattice, mfield.normalization)
    lead = values.shape[:-2]
    N = values.shape[-1]
    grid = values.reshape(lead + lattice.shape + (N,))
    axes = tuple(range(len(lead), len(lead) + lattice.d))
    # ifftn carries 1/V; undo the forward prefactor on top of it
    out = np.fft.ifftn(grid, axes=axes).reshape(lead + (lattice.volume, N))
    return out / c


def laplacian_symbol(q) -> np.ndarray | float:
    """Lattice Laplacian in momentum space, ``2 sum_mu (cos q_mu - 1)``.

    ``q`` may be a single momentum ``(d,)`` or an array ``(..., d)``.
    """
    q = np.asarray(q, dtype=float)
    out = 2.0 * np.sum(np.cos(q) - 1.0, axis=-1)
    return float(out) if out.ndim == 0 else out
