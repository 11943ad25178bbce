import numpy as np
import pytest
import sympy

from rfspin import Lattice, ModelParams
from rfspin.correlators import (
    FunctionObservable,
    MomentumSpin,
    PositionSpin,
    Slot,
    as_slot,
    connected_from_moments,
    momentum_spins,
    position_spins,
    set_partitions,
    susceptibility,
    w_correlator,
)
from rfspin.engines import ExactEnum, GaussianAnalytic, MonteCarlo, SigmaPoint, collect
from rfspin.model import DisorderSample, GaussianMass

from _oracles import log_z_generator, mixed_derivative


def test_bell_numbers():
    assert [len(set_partitions(j)) for j in range(1, 7)] == [1, 2, 5, 15, 52, 203]


def test_order_guard():
    with pytest.raises(ValueError):
        connected_from_moments({}, 7)
    with pytest.raises(ValueError):
        connected_from_moments({}, 0)


def test_first_and_second_cumulant():
    m = {(0,): 0.3, (1,): -0.2, (0, 1): 0.5}
    assert connected_from_moments(m, 1) == 0.3
    assert np.isclose(connected_from_moments(m, 2), 0.5 - 0.3 * -0.2)


def test_third_cumulant_symbolic():
    # third derivative of log M(b) where M is a formal moment series
    b, m1, m2, m3 = sympy.symbols("b m1 m2 m3")
    M = 1 + m1 * b + m2 * b**2 / 2 + m3 * b**3 / 6
    k3 = sympy.diff(sympy.log(M), b, 3).subs(b, 0)
    assert sympy.simplify(k3 - (m3 - 3 * m2 * m1 + 2 * m1**3)) == 0
    vals = {m1: 0.4, m2: 1.1, m3: 0.7}

    def mom(block):
        return {1: vals[m1], 2: vals[m2], 3: vals[m3]}[len(block)]

    assert np.isclose(connected_from_moments(mom, 3), float(k3.subs(vals)))


def test_cumulants_of_independent_blocks_vanish(rng):
    # A_1, A_2 independent: every mixed cumulant is zero
    a, b = rng.standard_normal(200), rng.standard_normal(300)
    A = [a, a, b, b]
    owner = [0, 0, 1, 1]

    def mom(block):
        out = 1.0
        for o in (0, 1):
            idx = [i for i in block if owner[i] == o]
            if idx:
                out *= np.mean(np.prod([A[i] for i in idx], axis=0))
        return out

    assert abs(connected_from_moments(mom, 4)) < 1e-12


@pytest.mark.parametrize("seed", range(6))
def test_cumulants_vs_log_z_derivatives(seed):
    rng = np.random.default_rng(seed)
    lat = Lattice(1, int(rng.integers(3, 6)))
    p = ModelParams(float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.3, 1.2)))
    g = rng.standard_normal(lat.volume)
    j = 1 + seed % 4
    xs = [int(x) for x in rng.integers(0, lat.volume, size=j)]
    log_z = log_z_generator(lat, p, g, [lambda s, x=x: s[x] for x in xs])
    ref = float(mixed_derivative(log_z, j))
    st = ExactEnum(p, lat).gibbs(g[None, :, None])
    val = st.cumulant([PositionSpin(x) for x in xs])[0].reshape(-1)[0].real
    assert abs(val - ref) <= 1e-6 * abs(ref)


def test_gaussian_w_correlators(gaussian_2d, rng):
    eng = gaussian_2d
    g = DisorderSample(rng.standard_normal((eng.lattice.volume, 2)))
    q = (1, 2)
    w = w_correlator(eng, g, [eng.lattice.negate(q)], [0], [MomentumSpin(q, 0)])
    assert np.isclose(w.value, 1.0 / eng.precision_symbol(q))
    assert w.stderr == 0
    w0 = w_correlator(eng, g, [(1, 0)], [0], [MomentumSpin(q, 0)])
    assert abs(w0.value) < 1e-12
    w2 = w_correlator(eng, g, [(1, 0), (0, 1)], [0, 1], [MomentumSpin(q, 0)])
    assert w2.value == 0
    mean = w_correlator(eng, g, [], [], [MomentumSpin(q, 1)])
    assert np.isclose(mean.value, eng.gibbs(g.g[None]).mean(MomentumSpin(q, 1))[0][0])


def test_w_correlator_order_guard(gaussian_2d):
    with pytest.raises(ValueError):
        w_correlator(gaussian_2d, np.zeros((16, 2)), [(0, 0)] * 4, [0] * 4, [MomentumSpin((0, 0))] * 3)


def test_slot_symmetry(ising_chain, rng):
    g = rng.standard_normal((2, 4, 1))
    st = ising_chain.gibbs(g)
    obs = [MomentumSpin((1,)), PositionSpin(2), FunctionObservable(lambda phi: phi[..., 0, 0] * phi[..., 1, 0], "pair")]
    a = st.cumulant(obs)[0]
    b = st.cumulant([obs[2], obs[0], obs[1]])[0]
    assert np.allclose(a, b)


def test_conjugation_symmetry(ising_chain, rng):
    st = ising_chain.gibbs(rng.standard_normal((1, 4, 1)))
    a = st.cumulant([MomentumSpin((1,)), MomentumSpin((2,)), MomentumSpin((2,))])[0]
    b = st.cumulant([MomentumSpin((3,)), MomentumSpin((2,)), MomentumSpin((2,))])[0]
    assert np.allclose(b, np.conj(a))


def test_batched_slots_match_single(ising_chain, rng):
    st = ising_chain.gibbs(rng.standard_normal((3, 4, 1)))
    full = st.cumulant([momentum_spins(ising_chain.lattice, 1), position_spins(ising_chain.lattice, 1)])[0]
    single = st.cumulant([MomentumSpin((3,)), PositionSpin(1)])[0]
    assert np.allclose(full[:, 3, 1], single[:, 0, 0])


def test_susceptibility_examples(rng):
    eng = GaussianAnalytic(ModelParams(0.4, 1.0, N=2, measure=GaussianMass(5.0)), Lattice(1, 5))
    g = rng.standard_normal((5, 2))
    assert np.isclose(susceptibility(eng, g, (2,), 0, 0), 1.0 / eng.precision_symbol((2,)))
    assert abs(susceptibility(eng, g, (2,), 0, 1)) < 1e-14
    ex = ExactEnum(ModelParams(0.0, 0.7), Lattice(1, 4))
    assert np.isclose(susceptibility(ex, rng.standard_normal((4, 1)) * 0, (1,)), 1.0)


def test_susceptibility_variance_zero_without_field():
    eng = ExactEnum(ModelParams(0.6, 0.0), Lattice(1, 4))
    col = collect(eng, MonteCarlo(100, 0), lambda st: st.cumulant([MomentumSpin((1,)), MomentumSpin((3,))])[0][:, 0, 0])
    v = col.values[0]
    assert np.allclose(v, v[0], rtol=1e-13)


def test_averaged_two_point_translation_invariant():
    eng = ExactEnum(ModelParams(0.5, 1.0), Lattice(1, 4))
    s = momentum_spins(eng.lattice, 1)
    col = collect(eng, MonteCarlo(3000, 4), lambda st: st.cumulant([MomentumSpin((1,)), s])[0][:, 0])
    est, err = col.estimate(lambda m: m)
    for p in range(4):
        if p != 3:
            assert abs(est[p]) <= 3 * max(err[p], 1e-15)
    assert abs(est[3]) > 3 * err[3]


def test_averaged_mean_vanishes():
    eng = ExactEnum(ModelParams(0.5, 1.0), Lattice(1, 4))
    col = collect(eng, MonteCarlo(3000, 8), lambda st: st.mean(MomentumSpin((1,)))[0])
    est, err = col.estimate(lambda m: m)
    assert abs(est) <= 3 * err


def test_function_observable_and_slot_shapes(ising_chain):
    s = as_slot(FunctionObservable(lambda phi: np.sum(phi[..., 0], axis=-1), "M"), ising_chain.lattice, 1)
    assert isinstance(s, Slot) and s.K == 1
    vals = s.evaluate(ising_chain.configs)
    assert vals.shape == (16, 1)
    with pytest.raises(Exception):
        as_slot(object(), ising_chain.lattice, 1)
