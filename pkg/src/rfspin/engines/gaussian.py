"""Closed-form Gibbs measure for the Gaussian single-site weight.

With ``exp(-mu |phi_x|^2 / 2)`` per site the Gibbs measure is Gaussian with
precision ``K = mu - 2 beta J A`` (``A`` the adjacency matrix), mean
``beta h K^{-1} g`` and covariance ``K^{-1}`` independent of ``g``.  In
momentum space ``K(q) = mu - 4 beta J sum_mu cos q_mu``.
"""

from __future__ import annotations

import numpy as np

from ..lattice import Lattice, fourier_forward
from ..model import GaussianMass, ModelParams
from .base import GibbsState


class GaussianAnalytic:
    variant = "gaussian"

    def __init__(self, params: ModelParams, lattice: Lattice):
        if not isinstance(params.measure, GaussianMass):
            raise ValueError("the analytic engine needs the gaussian measure")
        mu = params.measure.mu
        if not mu > 4.0 * params.beta * abs(params.J) * lattice.d:
            raise ValueError(
                f"precision operator not positive definite: need mu > 4 beta |J| d = "
                f"{4.0 * params.beta * abs(params.J) * lattice.d}, got mu={mu}"
            )
        self.params = params
        self.lattice = lattice
        q = lattice.momentum(lattice.momentum_indices)
        self.symbol = mu - 4.0 * params.beta * params.J * np.cos(q).sum(axis=1)  # (V,)

    @property
    def N(self) -> int:
        return self.params.N

    def precision_symbol(self, k) -> float:
        return float(self.symbol[self.lattice.momentum_index(k)])

    def apply_inverse(self, v: np.ndarray) -> np.ndarray:
        """``K^{-1} v`` along the site axis ``-3`` of ``(..., V, N, K)``."""
        lat = self.lattice
        lead = v.shape[:-3]
        tail = v.shape[-2:]
        grid = v.reshape(lead + lat.shape + tail)
        axes = tuple(range(len(lead), len(lead) + lat.d))
        f = np.fft.fftn(grid, axes=axes)
        f = f / self.symbol.reshape(lat.shape + (1, 1))
        out = np.fft.ifftn(f, axes=axes).reshape(v.shape)
        return out.real if not np.iscomplexobj(v) else out

    def precision_matrix(self) -> np.ndarray:
        mu = self.params.measure.mu
        return mu * np.eye(self.lattice.volume) - 2.0 * self.params.beta * self.params.J * self.lattice.adjacency

    def gibbs(self, fields: np.ndarray, ids=None) -> "GaussianState":
        fields = np.asarray(fields, dtype=float)
        if fields.ndim == 2:
            fields = fields[None]
        mean = self.params.field_scale * self.apply_inverse(fields[..., None])[..., 0]
        return GaussianState(self, fields, mean)


class GaussianState(GibbsState):
    def __init__(self, engine: GaussianAnalytic, fields, mean):
        super().__init__(engine.lattice, engine.N, fields)
        self.engine = engine
        self.phi_mean = mean  # (M, V, N)

    def cumulant(self, observables):
        slots = self._slots(observables)
        for s in slots:
            if not s.linear:
                raise ValueError("the analytic Gaussian engine only supports observables linear in phi")
        j = len(slots)
        shape = self._full_shape(slots)
        if j == 1:
            value = np.tensordot(self.phi_mean, slots[0].coeffs, axes=([1, 2], [0, 1]))
        elif j == 2:
            cov_b = self.engine.apply_inverse(slots[1].coeffs)  # (V, N, K2)
            value = np.tensordot(slots[0].coeffs, cov_b, axes=([0, 1], [0, 1]))[None]
        else:
            value = np.zeros(shape)
        return np.broadcast_to(value, shape).copy(), None


def gaussian_closed_form(engine: GaussianAnalytic, disorder, request: str = "mean", basis: str = "position"):
    """Exact first or second cumulants.

    ``request`` is ``"mean"`` (``<phi>``, shape ``(V, N)``) or
    ``"covariance"`` (connected two-point, ``(V, V)`` per component).  In the
    momentum basis the covariance is ``C[p, p'] = <phi~_p; phi~_p'>``.
    """
    lat = engine.lattice
    if request == "mean":
        g = disorder.g if hasattr(disorder, "g") else np.asarray(disorder, dtype=float)
        mean = engine.gibbs(g.reshape(1, lat.volume, -1)).phi_mean[0]
        return fourier_forward(mean, lat).values if basis == "momentum" else mean
    if request == "covariance":
        cov = np.linalg.inv(engine.precision_matrix())
        if basis == "momentum":
            U = lat.fourier_matrix
            return U @ cov @ U.T
        return cov
    raise ValueError(f"unknown request {request!r}; expected 'mean' or 'covariance'")
