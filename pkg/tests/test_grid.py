import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosonclt.errors import InputShapeError
from bosonclt.grid import Grid, PairPotential, WaveFunction, conjugate_J, convolve, laplacian_apply, make_potential

from conftest import random_complex


def test_constant_in_kernel(grid16):
    out = laplacian_apply(grid16, np.ones(grid16.M, dtype=complex))
    assert np.abs(out).max() < 1e-12


def test_plane_wave_eigenvalue():
    g = Grid(32, 5.0)
    f = g.plane_wave(1)
    assert np.allclose(laplacian_apply(g, f), -(2 * np.pi / g.L) ** 2 * f, atol=1e-12)


def test_laplacian_symmetric_and_negative(grid16, rng):
    f, h = random_complex(rng, grid16.M), random_complex(rng, grid16.M)
    lhs = grid16.inner(f, laplacian_apply(grid16, h))
    rhs = grid16.inner(laplacian_apply(grid16, f), h)
    assert abs(lhs - rhs) < 1e-12 * max(1, abs(lhs))
    q = grid16.inner(f, -laplacian_apply(grid16, f))
    assert abs(q.imag) < 1e-12 * abs(q) and q.real >= 0


def test_laplacian_matrix_matches_apply(grid16, rng):
    f = random_complex(rng, grid16.M)
    assert np.allclose(grid16.laplacian_matrix() @ f, laplacian_apply(grid16, f), atol=1e-10)


def test_two_dimensional_grid():
    g = Grid(8, 4.0, d=2)
    assert g.M == 64
    f = g.plane_wave([1, 2])
    assert np.allclose(laplacian_apply(g, f), -(2 * np.pi / g.L) ** 2 * 5 * f, atol=1e-10)


def test_length_mismatch():
    g = Grid(8, 1.0)
    with pytest.raises(InputShapeError):
        laplacian_apply(g, np.ones(7))
    V = make_potential(g, "zero")
    with pytest.raises(InputShapeError):
        convolve(g, V, np.ones(9))


def test_delta_kernel_is_identity(grid16, rng):
    v = np.zeros(grid16.M)
    v[0] = 1 / grid16.cell
    V = PairPotential(grid16, v)
    rho = random_complex(rng, grid16.M)
    assert np.allclose(convolve(grid16, V, rho), rho, atol=1e-12)
    assert np.abs(convolve(grid16, V, np.zeros(grid16.M))).max() == 0


def test_convolution_matches_double_loop(grid16, rng):
    V = make_potential(grid16, "gaussian", strength=1.3, width=0.7)
    rho = random_complex(rng, grid16.M)
    n = grid16.M
    direct = np.array([grid16.cell * sum(V.values[(i - j) % n] * rho[j] for j in range(n)) for i in range(n)])
    assert np.allclose(convolve(grid16, V, rho), direct, atol=1e-10)
    assert np.allclose(V.kernel() @ rho * grid16.cell, direct, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(shift=st.integers(0, 15), seed=st.integers(0, 2 ** 16))
def test_convolution_translation_covariant(shift, seed):
    g = Grid(16, 8.0)
    rng = np.random.default_rng(seed)
    V = make_potential(g, "soft-coulomb", softening=0.5)
    rho = random_complex(rng, g.M)
    assert np.allclose(convolve(g, V, np.roll(rho, shift)), np.roll(convolve(g, V, rho), shift), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 16))
def test_parseval(seed):
    g = Grid(32, 3.0)
    f = random_complex(np.random.default_rng(seed), g.M)
    spectral = np.sqrt(g.cell / g.M) * np.linalg.norm(g.fft(f))
    assert abs(spectral - g.norm(f)) < 1e-12 * g.norm(f)


def test_conjugation(rng):
    f = random_complex(rng, 10)
    r = rng.normal(size=10)
    assert np.array_equal(conjugate_J(r), r)
    assert np.allclose(conjugate_J(1j * f), -1j * np.conj(f))
    assert np.array_equal(conjugate_J(conjugate_J(f)), f)


def test_potential_validation(grid16):
    with pytest.raises(ValueError):
        PairPotential(grid16, np.arange(grid16.M, dtype=float))  # not even
    with pytest.raises(ValueError):
        PairPotential(grid16, np.full(grid16.M, np.inf))
    V = make_potential(grid16, "box", strength=-2.0, width=1.0)
    assert V.sup == 2.0
    with pytest.raises(ValueError):
        make_potential(grid16, "yukawa")


@pytest.mark.parametrize("kind,params", [("gaussian", {"width": 0.5}), ("soft-coulomb", {"softening": 0.2}),
                                         ("soft-power", {"softening": 0.1, "power": 0.5}), ("box", {"width": 2.0})])
def test_potentials_even_and_bounded(grid16, kind, params):
    V = make_potential(grid16, kind, **params)
    assert np.isfinite(V.sup)
    K = V.kernel()
    assert np.allclose(K, K.T)


def test_wavefunction_flag(grid16):
    WaveFunction(grid16, grid16.gaussian(1.0))
    with pytest.raises(ValueError):
        WaveFunction(grid16, 2 * grid16.gaussian(1.0))
    WaveFunction(grid16, 2 * grid16.gaussian(1.0), normalized=False)
