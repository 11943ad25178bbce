"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``RFSPIN_PURE_PYTHON=1`` to force the numpy path.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
boltzmann_weights = _kernels_py.boltzmann_weights
metropolis_sweeps = _kernels_py.metropolis_sweeps

if os.environ.get("RFSPIN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        BACKEND = "compiled"
        boltzmann_weights = _compiled.boltzmann_weights
        metropolis_sweeps = _compiled.metropolis_sweeps

ISING, SPHERE, QUARTIC, GAUSS = _kernels_py.ISING, _kernels_py.SPHERE, _kernels_py.QUARTIC, _kernels_py.GAUSS
