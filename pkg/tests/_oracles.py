"""Independent high-precision references used by several test modules."""

import itertools

import mpmath
import numpy as np

from rfspin.model import exchange_sum


def log_z_generator(lattice, params, g, observables, dps=60):
    """``b -> log sum_phi exp(-beta H(phi) + sum_i b_i A_i(phi))`` in mpmath.

    ``observables`` are real functions of the Ising configuration (array of +-1).
    """
    mpmath.mp.dps = dps
    V = lattice.volume
    confs = [np.array(s) for s in itertools.product([-1.0, 1.0], repeat=V)]
    logw = [mpmath.mpf(params.beta * params.J * float(exchange_sum(s[:, None], lattice)))
            + mpmath.mpf(params.field_scale) * mpmath.fsum(mpmath.mpf(float(a)) * mpmath.mpf(float(b))
                                                         for a, b in zip(g, s))
            for s in confs]
    vals = [[mpmath.mpf(float(A(s))) for A in observables] for s in confs]

    def log_z(b):
        return mpmath.log(mpmath.fsum(mpmath.exp(lw + mpmath.fsum(bi * v for bi, v in zip(b, vs)))
                                      for lw, vs in zip(logw, vals)))

    return log_z


def mixed_derivative(f, j, step="1e-8"):
    """Central-difference ``d^j f / db_1 ... db_j`` at ``b = 0``.

    Truncation error is ``O(step^2)``; rounding error is about ``10^-dps / step^j``,
    so the working precision must comfortably exceed ``8 j`` digits.
    """
    h = mpmath.mpf(step)
    total = mpmath.mpf(0)
    for signs in itertools.product([-1, 1], repeat=j):
        total += mpmath.mpf(int(np.prod(signs))) * f([s * h for s in signs])
    return total / (2 * h) ** j


def mp_coefficients(d, bd, dps=50):
    """The printed Gamma-function expressions, unreduced, at high precision."""
    mpmath.mp.dps = dps
    d = mpmath.mpf(d)
    G = mpmath.gamma
    pre = (4 * mpmath.pi) ** (d / 2)
    c1 = G((6 - d) / 2) / (pre * G(d - 4)) * (2 * G((d - 2) / 2) ** 2 - G((d - 4) / 2) ** 2 / 2)
    c2 = 2 * bd * G((6 - d) / 2) * G((d - 2) / 2) * G((d - 4) / 2) / (pre * G(d - 3))
    c3 = bd**2 * G((8 - d) / 2) * G((d - 4) / 2) ** 2 / (pre * G(d - 4))
    return c1, c2, c3
