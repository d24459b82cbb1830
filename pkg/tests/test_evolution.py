import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp

from bosonclt.errors import ToleranceError
from bosonclt.fock import build_fock_basis, build_hamiltonian, build_sector_basis
from bosonclt.fock.evolution import evolve_exact, evolve_time_dependent, expm_dense, expm_krylov
from bosonclt.fock.operators import number_operator
from bosonclt.grid import Grid, make_potential


@pytest.fixture(scope="module")
def ham():
    g = Grid(4, 2 * np.pi)
    V = make_potential(g, "gaussian", strength=1.0, width=1.0)
    s = build_sector_basis(4, 6)
    return build_hamiltonian(g, V, 1.0, s)


def test_dense_matches_scipy(ham):
    rng = np.random.default_rng(0)
    v = rng.normal(size=ham.shape[0]) + 0j
    ref = sla.expm(-1j * 0.3 * ham.dense()) @ v
    assert np.allclose(expm_dense(ham, v, 0.3), ref, atol=1e-10)


@pytest.mark.parametrize("t", [0.05, 1.0, -0.7])
def test_krylov_matches_dense(ham, t):
    rng = np.random.default_rng(1)
    v = rng.normal(size=ham.shape[0]) + 1j * rng.normal(size=ham.shape[0])
    v /= np.linalg.norm(v)
    assert np.linalg.norm(expm_krylov(ham, v, t) - expm_dense(ham, v, t)) < 1e-9


def test_krylov_small_space_breakdown():
    H = sp.diags([1.0, 2.0, 3.0]).tocsr()
    v = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
    out = expm_krylov(H, v, 2.0)
    assert np.allclose(out, np.exp(-1j * np.array([1.0, 2.0, 3.0]) * 2.0) * v, atol=1e-12)
    assert np.array_equal(expm_krylov(H, np.zeros(3), 1.0), np.zeros(3))


def test_krylov_substep_budget(ham):
    v = np.ones(ham.shape[0]) / np.sqrt(ham.shape[0])
    with pytest.raises(ToleranceError) as exc:
        expm_krylov(ham, v, 50.0, m=2, max_substeps=3)
    assert "substeps" in exc.value.diagnostics


def test_evolve_exact_modes(ham):
    v = np.zeros(ham.shape[0], dtype=complex)
    v[0] = 1
    a = evolve_exact(v, ham, 0.4, method="dense")
    b = evolve_exact(v, ham, 0.4, method="krylov")
    assert np.linalg.norm(a - b) < 1e-9
    with pytest.raises(ValueError):
        evolve_exact(v, ham, 0.4, method="rk4")


def test_number_conserved_on_fock_space():
    g = Grid(3, 3.0)
    V = make_potential(g, "gaussian", strength=2.0)
    space = build_fock_basis(3, 4)
    H = build_hamiltonian(g, V, 1.0, space, N=4)
    rng = np.random.default_rng(4)
    v = rng.normal(size=space.dim) + 0j
    v /= np.linalg.norm(v)
    out = evolve_exact(v, H, 0.8)
    Nop = number_operator(space).matrix
    assert np.vdot(out, Nop @ out).real == pytest.approx(np.vdot(v, Nop @ v).real, abs=1e-10)


def test_magnus_constant_generator(ham):
    v = np.zeros(ham.shape[0], dtype=complex)
    v[3] = 1
    out = evolve_time_dependent(lambda t: ham, v, 0.0, 0.5, 0.1)
    assert np.linalg.norm(out - expm_dense(ham, v, 0.5)) < 1e-10


def test_magnus_fourth_order():
    # two-level system with a rotating field, reference from a fine step
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    gen = lambda t: sz + 2.0 * np.cos(3.0 * t) * sx
    v = np.array([1.0, 0.0], dtype=complex)
    ref = evolve_time_dependent(gen, v, 0.0, 1.0, 1e-3)
    errs = [np.linalg.norm(evolve_time_dependent(gen, v, 0.0, 1.0, h) - ref) for h in (0.1, 0.05)]
    assert np.log2(errs[0] / errs[1]) == pytest.approx(4.0, abs=0.3)
