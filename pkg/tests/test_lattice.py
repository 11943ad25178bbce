import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfspin.lattice import (
    UNNORMALIZED,
    Lattice,
    build_momentum_grid,
    fourier_forward,
    fourier_inverse,
    laplacian_symbol,
)


def test_grid_d1_l3():
    q = build_momentum_grid(Lattice(1, 3))[:, 0]
    assert np.allclose(sorted(q), [0.0, 2 * np.pi / 3, 4 * np.pi / 3])


def test_grid_d2_l3_closed_under_negation():
    lat = Lattice(2, 3)
    ks = {tuple(k) for k in lat.momentum_indices}
    assert len(ks) == 9
    assert all(lat.negate(k) in ks for k in ks)


def test_grid_d1_l4_pi_self_conjugate():
    lat = Lattice(1, 4)
    q = build_momentum_grid(lat)[:, 0]
    assert np.any(np.isclose(q, np.pi))
    assert lat.negate((2,)) == (2,)


@pytest.mark.parametrize("d,L", [(0, 4), (1, 1), (2, 2)])
def test_rejects_bad_geometry(d, L):
    with pytest.raises(ValueError):
        Lattice(d, L)


def test_grid_size_and_zero_mode():
    lat = Lattice(3, 4)
    grid = build_momentum_grid(lat)
    assert grid.shape == (64, 3)
    assert np.all(grid[0] == 0)
    assert len({tuple(k) for k in lat.momentum_indices}) == lat.volume


def test_site_enumeration_bijection():
    lat = Lattice(2, 5)
    idx = [lat.site_index(x) for x in lat.coords]
    assert idx == list(range(lat.volume))


def test_neighbors_periodic():
    lat = Lattice(1, 3)
    assert sorted(lat.neighbors[0]) == [1, 2]
    lat2 = Lattice(2, 3)
    assert lat2.neighbors.shape == (9, 4)
    assert np.all(np.sort(lat2.adjacency.sum(axis=1)) == 4)


def test_constant_field():
    lat = Lattice(2, 4)
    ft = fourier_forward(np.full((lat.volume, 1), 1.5), lat)
    assert np.isclose(ft.values[0, 0], np.sqrt(lat.volume) * 1.5)
    assert np.allclose(ft.values[1:], 0, atol=1e-12)


def test_point_source():
    lat = Lattice(2, 3)
    x0 = 5
    f = np.zeros((lat.volume, 1))
    f[x0] = 1.0
    ft = fourier_forward(f, lat)
    for i, k in enumerate(lat.momentum_indices):
        assert np.isclose(ft.values[i, 0], lat.phases(k, lat.coords[x0])[0] / np.sqrt(lat.volume))


def test_unnormalized_convention():
    lat = Lattice(1, 5)
    f = np.arange(5.0)[:, None]
    a = fourier_forward(f, lat).values
    b = fourier_forward(f, lat, normalization=UNNORMALIZED).values
    assert np.allclose(b, np.sqrt(5) * a)


def test_conjugate_symmetry_and_parseval(rng):
    lat = Lattice(3, 3)
    f = rng.standard_normal((lat.volume, 2))
    ft = fourier_forward(f, lat).values
    assert np.allclose(ft[lat.negation_map], np.conj(ft), atol=1e-12)
    assert np.isclose(np.sum(np.abs(ft) ** 2), np.sum(f**2))


@settings(max_examples=30, deadline=None)
@given(d=st.integers(1, 3), L=st.integers(3, 6), N=st.integers(1, 3), seed=st.integers(0, 2**32 - 1),
       norm=st.sampled_from(["unitary", "unnormalized"]))
def test_roundtrip(d, L, N, seed, norm):
    lat = Lattice(d, L)
    f = np.random.default_rng(seed).standard_normal((lat.volume, N))
    back = fourier_inverse(fourier_forward(f, lat, normalization=norm))
    assert np.max(np.abs(back - f)) <= 1e-10 * np.max(np.abs(f))


def test_matrix_matches_fft(rng):
    lat = Lattice(2, 3)
    f = rng.standard_normal((lat.volume, 1))
    assert np.allclose(lat.fourier_matrix @ f[:, 0], fourier_forward(f, lat).values[:, 0])


def test_laplacian_examples():
    assert laplacian_symbol([0.0]) == 0.0
    assert np.isclose(laplacian_symbol([np.pi]), -4.0)
    assert np.isclose(laplacian_symbol([np.pi / 2, np.pi / 2]), -4.0)


@pytest.mark.parametrize("d,L", [(1, 3), (2, 4), (3, 5)])
def test_laplacian_symmetry_and_trace(d, L):
    lat = Lattice(d, L)
    lam = laplacian_symbol(build_momentum_grid(lat))
    assert np.allclose(lam, lam[lat.negation_map], atol=1e-12)
    assert np.isclose(lam.sum(), -2 * d * lat.volume)
    assert np.all(lam <= 1e-12) and np.all(lam >= -4 * d - 1e-12)
