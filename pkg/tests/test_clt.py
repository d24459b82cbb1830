from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosonclt.clt import (
    MomentReport,
    clt_run,
    exact_moments,
    expectation,
    fluctuation_observable,
    gaussian_moment,
    lln_bound,
    lln_terms,
    make_observable,
    prepare_scenario,
    reduced_density,
    run_point,
    single_particle_variance,
    trace_norm_gap,
)
from bosonclt.config import RunConfig
from bosonclt.errors import DomainError, InputShapeError, NumericError
from bosonclt.fock import build_sector_basis, product_state
from bosonclt.fock.states import mode_amplitudes
from bosonclt.grid import Grid


def binomial_central_moments(N, p, k_max):
    """Moments of (X - N p) / sqrt(N) for X ~ Binomial(N, p), by direct summation."""
    ks = np.arange(N + 1)
    w = np.array([comb(N, int(k)) * p ** k * (1 - p) ** (N - k) for k in ks])
    z = (ks - N * p) / np.sqrt(N)
    return np.array([np.sum(w * z ** k) for k in range(1, k_max + 1)])


@pytest.fixture
def product_setup():
    g = Grid(3, 3.0)
    phi = g.gaussian(0.8, 0.2, 0.4)
    obs = make_observable(g, "site", site=1)
    return g, phi, obs


@pytest.mark.parametrize("N", [1, 3, 6])
def test_product_state_moments_are_binomial(product_setup, N):
    g, phi, obs = product_setup
    basis = build_sector_basis(3, N)
    psi = product_state(phi, basis, g)
    p = abs(mode_amplitudes(g, phi)[1]) ** 2
    m = exact_moments(psi, fluctuation_observable(obs.O, phi, basis, g), 6)
    assert np.allclose(m, binomial_central_moments(N, p, 6), atol=1e-12)


def test_closed_form_fourth_moment(product_setup):
    g, phi, obs = product_setup
    N = 5
    basis = build_sector_basis(3, N)
    p = abs(mode_amplitudes(g, phi)[1]) ** 2
    q = p * (1 - p)
    m = exact_moments(product_state(phi, basis, g), fluctuation_observable(obs.O, phi, basis, g), 4)
    assert m[1] == pytest.approx(q)
    assert m[2] == pytest.approx(q * (1 - 2 * p) / np.sqrt(N))
    assert m[3] == pytest.approx(3 * q ** 2 + q * (1 - 6 * q) / N)


def test_gaussian_moments():
    assert [gaussian_moment(2.0, k) for k in range(7)] == [1.0, 0.0, 2.0, 0.0, 12.0, 0.0, 120.0]
    with pytest.raises(DomainError):
        gaussian_moment(-1.0, 2)
    with pytest.raises(DomainError):
        gaussian_moment(1.0, -1)


@settings(max_examples=20, deadline=None)
@given(s2=st.floats(0.0, 10.0), m=st.integers(1, 4))
def test_gaussian_moment_recursion(s2, m):
    # E[Z^(2m)] = (2m - 1) s2 E[Z^(2m-2)]
    assert gaussian_moment(s2, 2 * m) == pytest.approx((2 * m - 1) * s2 * gaussian_moment(s2, 2 * m - 2))


def test_moment_guards(product_setup):
    g, phi, obs = product_setup
    basis = build_sector_basis(3, 2)
    psi = product_state(phi, basis, g)
    A = fluctuation_observable(obs.O, phi, basis, g)
    with pytest.raises(DomainError):
        exact_moments(psi, A, 9)
    skew = 1j * np.triu(np.ones((basis.dim, basis.dim)))
    with pytest.raises(NumericError):
        exact_moments(np.ones(basis.dim) / np.sqrt(basis.dim), skew + skew.T, 1)
    with pytest.raises(DomainError):
        fluctuation_observable(obs.O, phi, build_sector_basis(3, 0), g)
    with pytest.raises(InputShapeError):
        fluctuation_observable(np.triu(np.ones((3, 3))), phi, basis, g)


def test_reduced_density_of_product_state(product_setup):
    g, phi, obs = product_setup
    basis = build_sector_basis(3, 4)
    gamma = reduced_density(product_state(phi, basis, g), basis)
    p = mode_amplitudes(g, phi)
    assert np.allclose(gamma, np.outer(p, p.conj()), atol=1e-12)
    assert trace_norm_gap(gamma, phi, g) < 1e-10
    assert np.trace(obs.O @ gamma).real == pytest.approx(expectation(g, obs.O, phi))


def test_reduced_density_trace_check(product_setup):
    g, phi, obs = product_setup
    basis = build_sector_basis(3, 2)
    with pytest.raises(NumericError):
        reduced_density(2 * product_state(phi, basis, g), basis)


def test_trace_norm_of_orthogonal_states():
    gamma = np.diag([0.0, 1.0])
    assert trace_norm_gap(gamma, np.array([1.0, 0.0])) == pytest.approx(2.0)


def test_lln_on_product_state(product_setup):
    g, phi, obs = product_setup
    basis = build_sector_basis(3, 5)
    psi = product_state(phi, basis, g)
    var = single_particle_variance(g, obs.O, phi)
    pair, single = lln_terms(psi, obs.O, phi, basis, g)
    assert abs(pair) < 1e-12
    assert single == pytest.approx(var)
    assert lln_bound(psi, obs.O, phi, 0.5, basis, g) == pytest.approx(var / (5 * 0.25))
    assert lln_bound(psi, obs.O, phi, np.inf, basis, g) == 0.0
    with pytest.raises(DomainError):
        lln_bound(psi, obs.O, phi, 0.0, basis, g)


def test_lln_terms_reassemble_second_moment():
    g = Grid(3, 3.0)
    cfg = RunConfig(grid_n=3, grid_L=3.0, T=0.3, N_sweep=[4], observable={"kind": "cosine", "mode": 1})
    sc = prepare_scenario(cfg)
    from bosonclt.fock import build_hamiltonian
    from bosonclt.fock.evolution import evolve_exact
    basis = build_sector_basis(3, 4)
    H = build_hamiltonian(sc.grid, sc.potential, sc.kappa, basis)
    psi = evolve_exact(product_state(sc.phi0, basis, sc.grid), H, sc.T)
    phi_T = sc.trajectory.states[-1]
    pair, single = lln_terms(psi, sc.observable.O, phi_T, basis, sc.grid)
    m2 = exact_moments(psi, fluctuation_observable(sc.observable.O, phi_T, basis, sc.grid), 2)[1]
    assert (1 - 1 / 4) * pair + single / 4 == pytest.approx(m2 / 4, rel=1e-10)


def test_observables():
    g = Grid(4, 2 * np.pi)
    assert np.allclose(np.diag(make_observable(g, "cosine", mode=1).O).real, np.cos(g.coords[:, 0]))
    assert np.allclose(np.diag(make_observable(g, "sine", mode=2).O).real, np.sin(2 * g.coords[:, 0]))
    assert np.allclose(np.diag(make_observable(g, "custom-diagonal", values=[1, 2, 3, 4]).O).real, [1, 2, 3, 4])
    with pytest.raises(ValueError):
        make_observable(g, "momentum")


def test_time_zero_variance_is_single_particle():
    cfg = RunConfig(T=0.0, N_sweep=[2])
    sc = prepare_scenario(cfg)
    assert sc.sigma2 == pytest.approx(single_particle_variance(sc.grid, sc.observable.O, sc.phi0), rel=1e-12)
    rep = run_point(sc, 6, 4)
    p = abs(mode_amplitudes(sc.grid, sc.phi0)[0]) ** 2
    assert np.allclose(rep.exact(), binomial_central_moments(6, p, 4), atol=1e-12)


@pytest.fixture(scope="module")
def small_run():
    cfg = RunConfig(grid_n=3, grid_L=3.0, T=0.2, N_sweep=[2, 4], k_max=4)
    return cfg, prepare_scenario(cfg)


def test_scenario_diagnostics(small_run):
    cfg, sc = small_run
    d = sc.diagnostics
    assert d["mass_drift"] < 1e-12
    assert d["energy_drift"] < 1e-6
    assert d["defect_normalization"] < 1e-8 and d["defect_pairing"] < 1e-8
    assert d["ttph"] < 1e-6 and d["im_identity"] < 1e-8


def test_clt_run_reports(small_run):
    cfg, sc = small_run
    reports = clt_run(cfg, sc)
    assert [r.N for r in reports] == [2, 4]
    for r in reports:
        assert isinstance(r, MomentReport)
        assert len(list(r.rows())) == 4
        assert r.provenance["config_sha256"] == cfg.digest()
        assert r.diagnostics["norm_drift"] < 1e-10
        assert r.to_dict()["records"][1]["k"] == 2
        assert abs(r.exact()[0]) < 1.0


def test_gamma_centering_removes_first_moment(small_run):
    cfg, sc = small_run
    rep = run_point(sc, 4, 2, centering="gamma")
    assert abs(rep.exact()[0]) < 1e-12
    ref = run_point(sc, 4, 2, centering="phi")
    assert ref.exact()[0] == pytest.approx(ref.diagnostics["centering_shift"], abs=1e-12)


@pytest.mark.parametrize("s2", [0.05557, 1.0, 3.7])
def test_gaussian_moment_against_quadrature(s2):
    x, w = np.polynomial.hermite_e.hermegauss(20)  # weight exp(-x^2 / 2)
    w = w / w.sum()
    for k in range(9):
        assert gaussian_moment(s2, k) == pytest.approx(np.sum(w * (np.sqrt(s2) * x) ** k), rel=1e-12, abs=1e-13 * max(1.0, s2) ** (k / 2))
