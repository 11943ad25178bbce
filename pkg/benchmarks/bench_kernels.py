"""Compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends get identical inputs; outputs are compared before timing.
"""

import argparse
import itertools
import time

import numpy as np

from rfspin import Lattice, ModelParams, _kernels_py
from rfspin.engines.exact import ExactEnum

try:
    from rfspin import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def weights_case(V=12, M=512):
    eng = ExactEnum(ModelParams(0.7, 1.0), Lattice(1, V))
    fields = np.random.default_rng(0).standard_normal((M, V))

    def run(mod):
        out = np.empty((M, eng.spins.shape[0]))
        mod.boltzmann_weights(eng.spins, eng.base, fields, 1.0, out)
        return out

    return f"boltzmann_weights V={V} M={M}", run


def sweeps_case(code, N, V=16, chains=32, S=50):
    lat = Lattice(1, V)
    rng = np.random.default_rng(1)
    phi0 = rng.choice([-1.0, 1.0], size=(chains, V, 1)) if code == _kernels_py.ISING else rng.standard_normal((chains, V, N))
    if code == _kernels_py.SPHERE:
        phi0 /= np.linalg.norm(phi0, axis=2, keepdims=True)
    field = rng.standard_normal((chains, V, N))
    props = rng.standard_normal((S, chains, V, N))
    if code == _kernels_py.SPHERE:
        props /= np.linalg.norm(props, axis=3, keepdims=True)
    logu = np.log(rng.random((S, chains, V)))
    param = {_kernels_py.QUARTIC: 0.5, _kernels_py.GAUSS: 4.0}.get(code, 0.0)

    def run(mod):
        phi = phi0.copy()
        mod.metropolis_sweeps(phi, lat.neighbors, field, 1.4, code, param, 0.5, props, logu, 1)
        return phi

    names = {_kernels_py.ISING: "ising", _kernels_py.SPHERE: "sphere", _kernels_py.QUARTIC: "quartic",
             _kernels_py.GAUSS: "gauss"}
    return f"metropolis_sweeps {names[code]} N={N} V={V} chains={chains} sweeps={S}", run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return
    cases = [weights_case()] + [sweeps_case(c, n) for c, n in itertools.product(
        (_kernels_py.ISING, _kernels_py.SPHERE, _kernels_py.QUARTIC, _kernels_py.GAUSS), (1, 3)
    ) if not (c == _kernels_py.ISING and n != 1)]
    print(f"{'case':58s} {'numpy [ms]':>11s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, run in cases:
        assert np.allclose(run(_kernels_py), run(compiled), rtol=1e-12, atol=1e-12), name
        tp = best_of(lambda: run(_kernels_py), args.repeat)
        tc = best_of(lambda: run(compiled), args.repeat)
        print(f"{name:58s} {1e3 * tp:11.2f} {1e3 * tc:14.3f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
