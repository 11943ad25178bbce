"""Model parameters, single-site measures, disorder samples and the Hamiltonian.

The exchange term is the ordered double sum over neighbour pairs, so each
bond is counted twice::

    H(phi, g) = -J sum_{x, y: |x-y|=1} phi_x . phi_y - h sum_x g_x . phi_x
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import streams
from .lattice import Lattice, MomentumField, fourier_forward


@dataclass(frozen=True)
class Quartic:
    """Soft-spin weight ``exp(-u (|phi|^2 - 1)^2)`` per site."""

    u: float

    name = "quartic"

    def __post_init__(self):
        if not self.u > 0:
            raise ValueError(f"quartic measure needs u > 0, got {self.u}")


@dataclass(frozen=True)
class Spherical:
    """Unit-length spins, ``delta(|phi|^2 - 1)``; at ``N = 1`` this is the Ising model."""

    name = "spherical"


@dataclass(frozen=True)
class GaussianMass:
    """Gaussian weight ``exp(-mu |phi|^2 / 2)`` per site."""

    mu: float

    name = "gaussian"

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"gaussian measure needs mu > 0, got {self.mu}")


Measure = Union[Quartic, Spherical, GaussianMass]


def measure_from_dict(spec: dict) -> Measure:
    kind = spec.get("measure", "spherical")
    if kind == "spherical":
        return Spherical()
    if kind == "quartic":
        return Quartic(float(spec["u"]))
    if kind == "gaussian":
        return GaussianMass(float(spec["mu"]))
    raise ValueError(f"unknown measure {kind!r}; expected spherical, quartic or gaussian")


@dataclass(frozen=True)
class ModelParams:
    beta: float
    h: float
    J: float = 1.0
    N: int = 1
    measure: Measure = field(default_factory=Spherical)

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")

    @property
    def field_scale(self) -> float:
        """Coefficient of ``g . phi`` in ``-beta H``."""
        return self.beta * self.h

    @property
    def coupling(self) -> float:
        """Coefficient of ``phi_x . sum_{y~x} phi_y`` in a single-site ``-beta H``.

        Both orderings of a bond touch site ``x``, hence the factor 2.
        """
        return 2.0 * self.beta * self.J


@dataclass
class DisorderSample:
    """One realization of the i.i.d. standard normal fields ``g_x^n``."""

    g: np.ndarray  # (V, N)
    seed: Optional[int] = None
    stream: Optional[int] = None

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)
        if self.g.ndim == 1:
            self.g = self.g[:, None]
        self._ft = None

    @property
    def V(self) -> int:
        return self.g.shape[0]

    @property
    def N(self) -> int:
        return self.g.shape[1]

    def fourier(self, lattice: Lattice) -> MomentumField:
        if self._ft is None:
            self._ft = fourier_forward(self.g, lattice)
        return self._ft

    def save(self, path) -> tuple[Path, Path]:
        """Write ``<path>.npy`` and a JSON sidecar ``<path>.json``."""
        path = Path(path)
        arr = path.with_suffix(".npy")
        side = path.with_suffix(".json")
        np.save(arr, self.g, allow_pickle=False)
        meta = {"seed": self.seed, "stream": self.stream, "V": self.V, "N": self.N}
        side.write_text(json.dumps(meta, sort_keys=True) + "\n")
        return arr, side

    @classmethod
    def load(cls, path) -> "DisorderSample":
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        g = np.load(path.with_suffix(".npy"), allow_pickle=False)
        if g.shape != (meta["V"], meta["N"]):
            raise ValueError(f"array shape {g.shape} does not match sidecar V={meta['V']}, N={meta['N']}")
        return cls(g, seed=meta["seed"], stream=meta["stream"])


def draw_disorder(lattice: Lattice, N: int, base_seed: int, index: int) -> DisorderSample:
    """Disorder sample ``index`` of the ensemble rooted at ``base_seed``."""
    g = streams.normals(base_seed, (streams.DISORDER, index), (lattice.volume, N))
    return DisorderSample(g, seed=base_seed, stream=index)


def disorder_batch(V: int, N: int, base_seed: int, indices) -> np.ndarray:
    """Stack of disorder fields for the given sample indices, shape ``(n, V, N)``."""
    return np.stack([streams.normals(base_seed, (streams.DISORDER, int(i)), (V, N)) for i in indices])


@dataclass
class SpinConfig:
    phi: np.ndarray  # (V, N)

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        if self.phi.ndim == 1:
            self.phi = self.phi[:, None]


def exchange_sum(phi: np.ndarray, lattice: Lattice) -> np.ndarray:
    """``sum_{x,y: |x-y|=1} phi_x . phi_y`` over ordered pairs; ``phi`` is ``(..., V, N)``."""
    nb = phi[..., lattice.neighbors, :]  # (..., V, 2d, N)
    return np.einsum("...xn,...xjn->...", phi, nb)


def hamiltonian(config: SpinConfig, disorder: DisorderSample, params: ModelParams, lattice: Lattice) -> float:
    phi = config.phi
    g = disorder.g
    if phi.shape != (lattice.volume, params.N) or g.shape != phi.shape:
        raise ValueError(f"shape mismatch: phi {phi.shape}, g {g.shape}, expected {(lattice.volume, params.N)}")
    exchange = -params.J * exchange_sum(phi, lattice)
    zeeman = -params.h * np.sum(g * phi)
    return float(exchange + zeeman)


def disorder_strength_map(beta: float, h: float) -> float:
    """Disorder strength of the replica description, ``beta * Delta_G = beta^2 h^2``."""
    return beta * beta * h * h
