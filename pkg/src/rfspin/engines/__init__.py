"""Gibbs-expectation backends and disorder averaging."""

from .averaging import GaussHermite, MonteCarlo, SigmaPoint, collect, disorder_average, parallel_map
from .base import EnsembleState, GibbsState, SampledState
from .exact import ExactEnum, ExactMoments, exact_gibbs_moments
from .gaussian import GaussianAnalytic, GaussianState, gaussian_closed_form
from .mcmc import Mcmc, McmcEstimate, Schedule, mcmc_estimate

__all__ = [
    "EnsembleState", "ExactEnum", "ExactMoments", "GaussHermite", "GaussianAnalytic", "GaussianState",
    "GibbsState", "Mcmc", "McmcEstimate", "MonteCarlo", "SampledState", "Schedule", "SigmaPoint",
    "collect", "disorder_average", "exact_gibbs_moments", "gaussian_closed_form", "mcmc_estimate",
    "parallel_map",
]
