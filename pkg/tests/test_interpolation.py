import csv

import numpy as np
import pytest

from rfspin import Lattice, ModelParams
from rfspin.correlators import MomentumSpin
from rfspin.engines import ExactEnum, GaussHermite, GaussianAnalytic, MonteCarlo, SigmaPoint
from rfspin.inequalities import HOLDS, check_theorem_chain
from rfspin.interpolation import (
    InnerMonteCarlo,
    check_lemma2,
    gamma_derivative,
    gamma_path,
    gamma_value,
    interpolated_disorder,
)
from rfspin.model import DisorderSample, GaussianMass


@pytest.fixture
def gauss1d():
    return GaussianAnalytic(ModelParams(0.4, 0.9, measure=GaussianMass(3.0)), Lattice(1, 4))


@pytest.fixture
def chain3():
    return ExactEnum(ModelParams(0.6, 1.0), Lattice(1, 3))


F = [MomentumSpin((1,))]


def test_interpolated_disorder_endpoints(rng):
    g, gp = rng.standard_normal((5, 2)), rng.standard_normal((5, 2))
    assert np.array_equal(interpolated_disorder(g, gp, 1.0), g)
    assert np.array_equal(interpolated_disorder(g, gp, 0.0), gp)
    out = interpolated_disorder(DisorderSample(g), DisorderSample(gp), 0.3)
    assert isinstance(out, DisorderSample)
    with pytest.raises(ValueError):
        interpolated_disorder(g, gp, 1.5)
    with pytest.raises(ValueError):
        interpolated_disorder(g, gp[:4], 0.5)


def test_interpolated_disorder_variance(rng):
    G = interpolated_disorder(rng.standard_normal((20000, 3)), rng.standard_normal((20000, 3)), 0.5)
    v = G.var(axis=0)
    se = np.sqrt(2.0 / G.shape[0])
    assert np.all(np.abs(v - 1.0) < 3 * se)


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0])
def test_gaussian_gamma_linear(gauss1d, t):
    q = (1,)
    target = t * gauss1d.params.field_scale ** 2 / gauss1d.precision_symbol(q) ** 2
    val, err = gamma_value(gauss1d, t, F, SigmaPoint(), SigmaPoint())
    assert abs(val - target) <= 1e-10 * max(target, 1e-300) + 1e-15 and err == 0


def test_gaussian_derivatives(gauss1d):
    k2 = gauss1d.params.field_scale ** 2 / gauss1d.precision_symbol((1,)) ** 2
    for t in (0.1, 0.9):
        assert np.isclose(gamma_derivative(gauss1d, t, 1, F, SigmaPoint(), SigmaPoint())[0], k2, rtol=1e-10)
    assert abs(gamma_derivative(gauss1d, 0.5, 2, F, SigmaPoint(), SigmaPoint())[0]) < 1e-20
    with pytest.raises(ValueError):
        gamma_derivative(gauss1d, 0.5, 0, F, SigmaPoint(), SigmaPoint())
    with pytest.raises(ValueError):
        gamma_derivative(gauss1d, 0.5, 4, F, SigmaPoint(), SigmaPoint())


def test_gaussian_fd_identity(gauss1d):
    path = gamma_path(gauss1d, np.linspace(0, 1, 5), F, SigmaPoint(), SigmaPoint(), fd_step=1e-3)
    assert np.all(np.abs(path.fd_diff) < 1e-8 * np.max(path.dgamma))


def test_gamma_at_zero_is_squared_mean(chain3):
    g0, _ = gamma_value(chain3, 0.0, F, GaussHermite(10), MonteCarlo(20, 1))
    # G(0) = g' is fully integrated, so the outer average is trivial
    x, w = GaussHermite(10).rule(3, 1)
    st = chain3.gibbs(x.reshape(-1, 3, 1))
    mean = np.sum(w * st.cumulant([MomentumSpin((1,))])[0].reshape(-1))
    assert np.isclose(g0, abs(mean) ** 2, atol=1e-15)


def test_zero_field_constant():
    eng = ExactEnum(ModelParams(0.6, 0.0), Lattice(1, 3))
    path = gamma_path(eng, [0.0, 0.5, 1.0], [MomentumSpin((1,)), MomentumSpin((2,))], GaussHermite(4), MonteCarlo(10, 0))
    assert np.allclose(path.gamma, path.gamma[0], rtol=1e-12)


def test_exact_fd_identity_deterministic(chain3):
    # Hermite rules inside and outside: cumulant derivative equals the central difference
    path = gamma_path(chain3, [0.5], F, GaussHermite(12), GaussHermite(12), fd_step=1e-3)
    assert abs(path.fd_diff[0]) < 1e-5 * path.dgamma[0]


def test_exact_fd_identity_sampled(chain3):
    path = gamma_path(chain3, [0.25, 0.5, 0.75], F, GaussHermite(8), MonteCarlo(400, 3), fd_step=5e-3)
    assert np.all(np.abs(path.fd_diff) <= 3 * path.fd_stderr)


def test_monotone_convex(chain3):
    path = gamma_path(chain3, np.linspace(0, 1, 6), F, GaussHermite(8), MonteCarlo(300, 4))
    assert np.all(path.monotone_margins() >= -3)
    assert np.all(path.convex_margins() >= -3)
    assert np.all(path.gamma >= 0)


def test_endpoint_difference_is_variance(chain3):
    outer = MonteCarlo(600, 9)
    path = gamma_path(chain3, [0.0, 1.0], F, GaussHermite(10), outer)
    rep = check_theorem_chain(chain3, outer, 1, 1, F)
    diff = path.increments[0] - rep.mid
    assert abs(diff) <= 3 * np.hypot(path.increments_stderr[0], rep.stderr[1])


def test_inner_monte_carlo_split_half(chain3):
    with pytest.raises(ValueError):
        InnerMonteCarlo(7)
    ref, ref_err = gamma_value(chain3, 0.5, F, GaussHermite(10), MonteCarlo(200, 2))
    path = gamma_path(chain3, [0.5], F, InnerMonteCarlo(64, 5), MonteCarlo(200, 2))
    assert abs(path.gamma[0] - ref) <= 3 * np.hypot(path.stderr[0], ref_err)
    # the naive squared mean is biased upward
    assert path.bias[0] > 0


def test_taylor_bound_gaussian(gauss1d):
    k2 = gauss1d.params.field_scale ** 2 / gauss1d.precision_symbol((1,)) ** 2
    rep = check_lemma2(gauss1d, 0.0, 1.0, 0, 1, F, SigmaPoint(), SigmaPoint())
    assert np.isclose(rep.lhs, k2, rtol=1e-12) and np.isclose(rep.rhs, k2, rtol=1e-12)
    assert rep.verdict == HOLDS
    rep2 = check_lemma2(gauss1d, 0.2, 0.7, 0, 2, F, SigmaPoint(), SigmaPoint())
    assert abs(rep2.lhs) < 1e-20 and rep2.verdict == HOLDS


def test_taylor_bound_exact(chain3):
    rep = check_lemma2(chain3, 0.25, 0.75, 1, 1, F, GaussHermite(8), MonteCarlo(300, 6))
    assert rep.verdict == HOLDS
    with pytest.raises(ValueError):
        check_lemma2(chain3, 0.7, 0.2, 1, 1, F, GaussHermite(4), MonteCarlo(10))


def test_csv_header(gauss1d, tmp_path):
    path = gamma_path(gauss1d, [0.0, 0.5, 1.0], F, SigmaPoint(), SigmaPoint())
    out = tmp_path / "g.csv"
    path.to_csv(out)
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t", "gamma", "stderr", "dgamma_lemma1", "stderr"]
    assert len(rows) == 4
