"""Leading-order large-N replica analysis of the random field O(N) model.

Everything here is evaluated at ``J = 1``.  Lattice sums use the
unnormalized momentum convention, ``(1/V) sum_k`` over the full Brillouin
zone grid.  ``beta_delta`` is the disorder strength ``beta * Delta_G``.

The replica-symmetric propagator is ``G^{ab} = G^c delta_ab + beta_delta G^d``
with ``G^c = 1/(-lap + m^2)`` and ``G^d = (G^c)^2``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, optimize, special

from .lattice import Lattice, build_momentum_grid, laplacian_symbol

EDGE = 1e-9
DIRECT_MAX_VOLUME = 4096
SADDLE_TOL = 1e-10


class NoSolution(ValueError):
    """The saddle-point equation has no root with ``m^2 > 0``."""


def _check_dimension(d):
    if not 4.0 + EDGE < d < 6.0 - EDGE:
        raise ValueError(f"continuum formulas need 4 < d < 6 (away from the edges), got d={d}")


def _check_strength(beta_delta, allow_zero=False):
    if beta_delta < 0 or (beta_delta == 0 and not allow_zero):
        raise ValueError(f"disorder strength must be positive, got {beta_delta}")


@dataclass(frozen=True)
class LargeNInput:
    d: float
    N: int
    beta_delta: float
    beta: float | None = None
    lattice: Lattice | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        _check_strength(self.beta_delta)
        if self.lattice is None:
            _check_dimension(self.d)
        elif self.lattice.d != self.d:
            raise ValueError("lattice dimension does not match d")

    def to_dict(self):
        out = {"d": self.d, "N": self.N, "betaDeltaG": self.beta_delta}
        if self.beta is not None:
            out["beta"] = self.beta
        if self.lattice is not None:
            out["lattice"] = {"d": self.lattice.d, "L": self.lattice.L}
        return out


# ---------------------------------------------------------------- propagators


def minus_laplacian(q, continuum: bool = False):
    """``-lap_q``: ``q^2`` in the continuum, ``2 sum (1 - cos q_mu)`` on the lattice."""
    q = np.asarray(q, dtype=float)
    if continuum:
        out = np.sum(q * q, axis=-1)
        return float(out) if out.ndim == 0 else out
    return -laplacian_symbol(q)


@dataclass
class BarePropagators:
    gc: np.ndarray
    gd: np.ndarray
    beta_delta: float

    @property
    def diagonal(self):
        """``G^{aa}``."""
        return self.gc + self.beta_delta * self.gd

    @property
    def off_diagonal(self):
        """``G^{ab}``, ``a != b``."""
        return self.beta_delta * self.gd


def bare_propagators(q, m2: float, beta_delta: float, continuum: bool = False) -> BarePropagators:
    """Connected and disconnected bare propagators at momenta ``q`` (shape ``(..., d)``)."""
    if m2 < 0:
        raise ValueError(f"m^2 must be >= 0, got {m2}")
    _check_strength(beta_delta, allow_zero=True)
    den = np.asarray(minus_laplacian(q, continuum)) + m2
    if np.any(den <= 0):
        raise ValueError("massless zero mode: q = 0 with m^2 = 0")
    gc = 1.0 / den
    return BarePropagators(gc, gc * gc, beta_delta)


# ---------------------------------------------------------------- saddle point


def _lattice_symbol(lattice: Lattice):
    return -laplacian_symbol(build_momentum_grid(lattice))


def saddle_rhs(m2: float, beta_delta: float, lattice: Lattice, exclude_zero_mode: bool = False) -> float:
    """``(1/V) sum_k [G^c_k + beta_delta G^d_k]``; ``inf`` at ``m^2 = 0`` with the zero mode."""
    lam = _lattice_symbol(lattice)
    if exclude_zero_mode:
        lam = lam[1:]
    den = lam + m2
    if np.any(den <= 0):
        return np.inf
    gc = 1.0 / den
    return float(np.sum(gc + beta_delta * gc * gc) / lattice.volume)


@dataclass
class SaddleSolution:
    m2: float
    residual: float
    beta: float
    beta_delta: float


def solve_saddle(beta: float, beta_delta: float, lattice: Lattice, exclude_zero_mode: bool = False) -> SaddleSolution:
    """Root ``m^2 > 0`` of ``beta = saddle_rhs(m^2)`` by bisection.

    The right-hand side decreases strictly from ``saddle_rhs(0+)`` to 0.  With
    the zero mode included ``saddle_rhs(0+) = inf`` on any finite lattice, so
    every ``beta > 0`` has a root; without it the finite limit is the
    critical value and larger ``beta`` raises :class:`NoSolution`.
    """
    _check_strength(beta_delta, allow_zero=True)
    if beta <= 0:
        raise NoSolution(f"beta must be positive, got {beta}")
    crit = saddle_rhs(0.0, beta_delta, lattice, exclude_zero_mode)
    if beta >= crit:
        raise NoSolution(f"beta={beta} is at or beyond the critical value {crit} on this lattice (massless phase)")

    def f(m2):
        return saddle_rhs(m2, beta_delta, lattice, exclude_zero_mode) - beta

    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
    lo = hi / 2.0
    while lo > 0 and f(lo) < 0:
        lo /= 2.0
    m2 = optimize.bisect(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)
    res = f(m2)
    if abs(res) > SADDLE_TOL * max(1.0, beta):
        raise NoSolution(f"bisection did not converge (residual {res:.3e})")
    return SaddleSolution(float(m2), float(res), float(beta), float(beta_delta))


# ---------------------------------------------------------------- polarization


@dataclass
class Polarization:
    AA: np.ndarray
    AB: np.ndarray
    BA: np.ndarray
    BB: np.ndarray

    @property
    def diagonal(self):
        """Coefficient of ``delta_ab``."""
        return self.AA + self.AB + self.BA

    @property
    def total_diagonal(self):
        return self.diagonal + self.BB


def _convolve_direct(a, b, lattice, ks):
    L, idx = lattice.L, lattice.momentum_indices
    out = np.empty(len(ks))
    for i, k in enumerate(ks):
        kq = np.ravel_multi_index(((k[None] - idx) % L).T, lattice.shape)
        out[i] = np.dot(a[kq], b)
    return out / lattice.volume


def _convolve_fft(a, b, lattice, ks):
    shp = lattice.shape
    c = np.fft.ifftn(np.fft.fftn(a.reshape(shp)) * np.fft.fftn(b.reshape(shp))).real.reshape(-1)
    flat = np.ravel_multi_index((np.asarray(ks) % lattice.L).T, shp)
    return c[flat] / lattice.volume


def polarization(k, lattice: Lattice, m2: float, beta_delta: float, exclude_zero_mode: bool = False,
                 method: str = "auto") -> Polarization:
    """The four convolution pieces at integer momenta ``k`` (one ``(d,)`` vector or ``(n, d)``).

    ``k=None`` evaluates every momentum of the grid.  ``method`` is
    ``"direct"``, ``"fft"`` or ``"auto"`` (direct up to 4096 sites).
    """
    _check_strength(beta_delta, allow_zero=True)
    if m2 < 0:
        raise ValueError("m^2 must be >= 0")
    lam = _lattice_symbol(lattice)
    den = lam + m2
    if m2 == 0:
        if not exclude_zero_mode:
            raise ValueError("m^2 = 0 hits the zero mode; pass exclude_zero_mode=True")
        den[0] = np.inf
    elif exclude_zero_mode:
        den[0] = np.inf
    A = 1.0 / den
    B = A * A
    single = k is not None and np.ndim(k) == 1
    ks = lattice.momentum_indices if k is None else np.atleast_2d(np.asarray(k, dtype=int))
    if method == "auto":
        method = "direct" if lattice.volume <= DIRECT_MAX_VOLUME else "fft"
    conv = {"direct": _convolve_direct, "fft": _convolve_fft}.get(method)
    if conv is None:
        raise ValueError(f"unknown method {method!r}")
    AA = conv(A, A, lattice, ks)
    if beta_delta == 0:
        z = np.zeros_like(AA)
        pieces = (AA, z, z.copy(), z.copy())
    else:
        pieces = (AA, beta_delta * conv(A, B, lattice, ks), beta_delta * conv(B, A, lattice, ks),
                  beta_delta**2 * conv(B, B, lattice, ks))
    if single:
        pieces = tuple(float(p[0]) for p in pieces)
    return Polarization(*pieces)


# ---------------------------------------------------------------- continuum


@dataclass(frozen=True)
class AsymptoticCoefficients:
    c0: float
    c1: float
    c2: float
    c3: float

    def pi(self, k, d: float):
        """``(diagonal, off)`` low-momentum polarization ``(c0 + c1 k^{d-4} + c2 k^{d-6}, c3 k^{d-8})``."""
        k = np.asarray(k, dtype=float)
        return _out(self.c0 + self.c1 * k ** (d - 4) + self.c2 * k ** (d - 6)), _out(self.c3 * k ** (d - 8))

    def to_dict(self):
        return asdict(self)


def _gamma_ratio(d, num, den):
    """``prod Gamma(num) / prod Gamma(den) / (4 pi)^{d/2}`` in log space (all arguments positive)."""
    lg = sum(special.gammaln(a) for a in num) - sum(special.gammaln(b) for b in den)
    return np.exp(lg - 0.5 * d * np.log(4.0 * np.pi))


def c0_integral(d: float, tol: float = 1e-10) -> float:
    """``int_{[-pi,pi]^d} d^dq / (2 pi)^d  1/q^4`` for ``d > 4``.

    Writing ``1/q^4 = int_0^inf s exp(-s q^2) ds`` factorizes the cube
    integral; each factor is ``erf(pi sqrt(s)) / (2 sqrt(pi s))``.
    """
    if d <= 4:
        raise ValueError("the integral diverges for d <= 4")

    def integrand(s):
        if s == 0.0:
            return 0.0
        rs = np.sqrt(s)
        return s * (special.erf(np.pi * rs) / (2.0 * np.sqrt(np.pi) * rs)) ** d

    a, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=tol, limit=200)
    b, _ = integrate.quad(integrand, 1.0, np.inf, epsabs=0.0, epsrel=tol, limit=200)
    return float(a + b)


def continuum_coefficients(d: float, beta_delta: float, with_c0: bool = True) -> AsymptoticCoefficients:
    """Low-momentum polarization coefficients at ``m^2 = 0``.

    ``c1`` uses ``Gamma((d-2)/2) = ((d-4)/2) Gamma((d-4)/2)`` so the bracket
    becomes ``Gamma((d-4)/2)^2 ((d-4)^2 - 1) / 2`` and vanishes exactly at
    ``d = 5``.
    """
    _check_dimension(d)
    _check_strength(beta_delta)
    e = d - 4.0
    c1 = _gamma_ratio(d, [(6 - d) / 2, e / 2, e / 2], [e]) * (e * e - 1.0) / 2.0
    c2 = 2.0 * beta_delta * _gamma_ratio(d, [(6 - d) / 2, (d - 2) / 2, e / 2], [d - 3])
    c3 = beta_delta**2 * _gamma_ratio(d, [(8 - d) / 2, e / 2, e / 2], [e])
    c0 = c0_integral(d) if with_c0 else float("nan")
    return AsymptoticCoefficients(c0, float(c1), float(c2), float(c3))


def epsilon_propagator(k, d: float, N: int, beta_delta: float):
    """Low-momentum auxiliary-field propagator ``(diagonal, off)`` structure values.

    ``(2 / (N c2)) * (k^{6-d}, -beta_delta (6-d)/2 k^{4-d})``
    """
    _check_dimension(d)
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise ValueError("k must be positive")
    c2 = continuum_coefficients(d, beta_delta, with_c0=False).c2
    pre = 2.0 / (N * c2)
    diag = pre * k ** (6.0 - d)
    off = -pre * beta_delta * (6.0 - d) / 2.0 * k ** (4.0 - d)
    if diag.ndim == 0:
        return float(diag), float(off)
    return diag, off


# ---------------------------------------------------------------- asymptotics


def _check_q(q):
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0) or np.any(q >= 1):
        raise ValueError("asymptotic forms need 0 < q < 1")
    return q


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def asymptotic_correlators(q, d: float, N: int, beta_delta: float) -> dict:
    """Leading large-N correlation functions at small ``q``.

    Keys: ``connected_2pt`` (coefficient of ``delta_mn``),
    ``disconnected_2pt``, ``disconnected_4pt_sum``
    (``sum_p E|<phi_q; phi_p>|^2``), ``connected_4pt_sum`` (squared connected
    4-point sum per replica-diagonal structure) and
    ``susceptibility_variance``.
    """
    _check_dimension(d)
    _check_strength(beta_delta)
    q = _check_q(q)
    eta = (d - 4.0) / N
    lg = np.log(q)
    corr = 1.0 + eta * lg
    q4 = q**4
    return {
        "connected_2pt": _out(corr / q**2),
        "disconnected_2pt": _out(beta_delta * corr / q4),
        "disconnected_4pt_sum": _out(corr / q4),
        "connected_4pt_sum": _out((4.0 - d) / (4.0 * beta_delta**2 * N**2) * lg / q4),
        "susceptibility_variance": _out(-eta * lg / q4),
        "metadata": {
            "connected_2pt": "coefficient of delta_{m,n} delta_{a1,a2}",
            "disconnected_2pt": "coefficient of delta_{m,n}, every replica pair",
            "disconnected_4pt_sum": "coefficient of delta_{m,n} delta_{a1,a2} delta_{a3,a4}",
            "connected_4pt_sum": "coefficient of delta_{a1,a2} delta_{a1,a3} delta_{a3,a4}",
            "susceptibility_variance": "coefficient of delta_{m,n}; (eta' - 2 eta) log q / q^4",
        },
    }


@dataclass(frozen=True)
class ExponentSet:
    eta: float
    eta_bar: float
    eta_prime: float

    def to_dict(self):
        return {"eta": self.eta, "etaBar": self.eta_bar, "etaPrime": self.eta_prime}


def exponents(d: float, N: int) -> ExponentSet:
    if N < 1:
        raise ValueError("N must be >= 1")
    e = (d - 4.0) / N
    return ExponentSet(e, e, e)


@dataclass
class LargeNReport:
    input: dict
    coefficients: dict
    exponents: ExponentSet
    checks: list = field(default_factory=list)

    @property
    def all_pass(self):
        return all(c["pass"] for c in self.checks if c["role"] == "check")

    def to_dict(self):
        return {"input": self.input, "coefficients": self.coefficients, "exponents": self.exponents.to_dict(),
                "checks": self.checks}


def _check(name, lhs, rhs, q=None, breakdown=False, role="check"):
    out = {"name": name, "lhs": float(lhs), "rhs": float(rhs), "pass": bool(not breakdown and lhs <= rhs), "role": role}
    if q is not None:
        out["q"] = float(q)
    if breakdown:
        out["breakdown"] = True
    return out


def connected_4pt_bound(q, d: float, N: int, beta_delta: float):
    """Both sides of the ``k=1, l=3`` bound in leading large-N form.

    LHS ``(4-d)/(4 beta_delta^2 N) log q / q^4``, RHS
    ``3!/beta_delta^2 (1 + eta log q) / q^4``.  Returns ``(lhs, rhs, breakdown)``
    where ``breakdown`` marks ``1 + eta log q <= 0``.
    """
    q = _check_q(q)
    eta = (d - 4.0) / N
    lg = np.log(q)
    corr = 1.0 + eta * lg
    lhs = (4.0 - d) / (4.0 * beta_delta**2 * N) * lg / q**4
    rhs = 6.0 / beta_delta**2 * corr / q**4
    return _out(lhs), _out(rhs), (corr <= 0) if np.ndim(corr) else bool(corr <= 0)


def susceptibility_sandwich(q, d: float, N: int, beta_delta: float):
    """``(lower, Var chi, upper, breakdown)`` for the susceptibility variance bounds."""
    q = _check_q(q)
    eta = (d - 4.0) / N
    lg = np.log(q)
    corr = 1.0 + eta * lg
    lower = (4.0 - d) / (8.0 * N) * lg / q**4
    var = -eta * lg / q**4
    upper = beta_delta * corr / q**4
    return _out(lower), _out(var), _out(upper), (corr <= 0) if np.ndim(corr) else bool(corr <= 0)


def exponents_and_checks(d: float, N: int, beta_delta: float, q_grid=None) -> LargeNReport:
    """Exponents, the exponent inequality and the asymptotic bounds over ``q_grid``.

    Grid points where ``1 + eta log q <= 0`` lie outside the validity of the
    expansion; they are reported with ``breakdown: true`` and ``pass: false``.

    Entries with ``role: "check"`` are asserted bounds.  The susceptibility
    variance sandwich carries ``role: "report"``: in leading-log form its
    upper side reads ``1 + 2 eta log q >= 0`` and fails for
    ``q < exp(-N / (2 (d - 4)))`` even where the expansion itself is valid.
    """
    inp = LargeNInput(d, N, beta_delta)
    if q_grid is None:
        q_grid = np.geomspace(1e-3, 1e-1, 20)
    ex = exponents(d, N)
    coef = continuum_coefficients(d, beta_delta)
    checks = [
        _check("schwartz_soffer_exponents", ex.eta_bar, 2.0 * ex.eta),
        _check("dimensional_reduction", abs(ex.eta - ex.eta_bar), 0.0),
    ]
    for q in np.asarray(q_grid, dtype=float):
        lhs, rhs, brk = connected_4pt_bound(q, d, N, beta_delta)
        checks.append(_check("connected_4pt_bound", lhs, rhs, q, brk))
        lo, var, up, brk2 = susceptibility_sandwich(q, d, N, beta_delta)
        checks.append(_check("susceptibility_variance_lower", lo, var, q, role="report"))
        checks.append(_check("susceptibility_variance_upper", var, up, q, brk2, role="report"))
    return LargeNReport(inp.to_dict(), coef.to_dict(), ex, checks)
