"""Random-field O(N) lattice spin models: engines, correlation inequalities,
Gaussian interpolation and large-N asymptotics."""

from .lattice import Lattice, build_momentum_grid, fourier_forward, fourier_inverse, laplacian_symbol
from .model import DisorderSample, GaussianMass, ModelParams, Quartic, Spherical, SpinConfig, hamiltonian

__version__ = "0.1.0"
