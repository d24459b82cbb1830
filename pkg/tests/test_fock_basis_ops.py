from math import comb

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from bosonclt import _kernels_py, kernels
from bosonclt.errors import AssemblyError, CapacityError
from bosonclt.fock import annihilate_matrix, build_fock_basis, build_sector_basis, create_matrix
from bosonclt.fock.basis import sector_dimension
from bosonclt.fock.operators import (
    SectorOperator,
    annihilation_field,
    build_hamiltonian,
    commutator_norm,
    creation_field,
    interaction_diagonal,
    lowering_matrices,
    number_operator,
    pair_creation,
    quadratic_generator_matrix,
    second_quantize,
)
from bosonclt.fock.selftest import bound_violation, ccr_defect
from bosonclt.grid import Grid, PairPotential, make_potential


@pytest.mark.parametrize("M,N", [(1, 5), (2, 3), (3, 4), (4, 6), (5, 2)])
def test_sector_dimension_and_order(M, N):
    s = build_sector_basis(M, N)
    assert s.dim == comb(N + M - 1, M - 1) == sector_dimension(M, N)
    occ = s.occupations
    assert np.all(occ.sum(axis=1) == N) and np.all(occ >= 0)
    assert len(set(s.tuples())) == s.dim
    assert s.tuples() == sorted(s.tuples(), reverse=True)
    assert np.array_equal(s.index(occ), np.arange(s.dim))


def test_two_site_basis_explicit():
    assert build_sector_basis(2, 2).tuples() == [(2, 0), (1, 1), (0, 2)]


def test_fock_basis_sectors():
    f = build_fock_basis(3, 4)
    assert f.dim == comb(7, 3)
    assert [s.N for s in f.sectors] == list(range(5))
    assert np.array_equal(f.number_diagonal, f.occupations.sum(axis=1))


def test_capacity_budget():
    with pytest.raises(CapacityError):
        build_sector_basis(10, 10, max_dim=1000)
    with pytest.raises(CapacityError):
        build_fock_basis(6, 12, max_dim=1000)
    with pytest.raises(ValueError):
        build_sector_basis(0, 3)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled backend not built")
@settings(max_examples=30, deadline=None)
@given(M=st.integers(1, 5), N=st.integers(0, 6))
def test_backends_agree(M, N):
    from bosonclt import _kernels
    assert np.array_equal(_kernels.composition_table(M, N), _kernels_py.composition_table(M, N))
    occ_c = np.asarray(_kernels.enumerate_sector(M, N))
    occ_p = np.asarray(_kernels_py.enumerate_sector(M, N))
    assert np.array_equal(occ_c, occ_p)
    assert np.array_equal(_kernels.rank_states(occ_c, N), _kernels_py.rank_states(occ_p, N))
    for fn in ("hop_structure", "raise_structure"):
        a, b = getattr(_kernels, fn)(occ_c, N), getattr(_kernels_py, fn)(occ_p, N)
        for x, y in zip(a, b):
            assert np.allclose(x, y, rtol=0, atol=1e-14)


def test_create_annihilate_action():
    f = build_fock_basis(2, 3)
    s2 = f.sector_slice(2)
    v = np.zeros(f.dim)
    v[f.sector_slice(1).start] = 1.0  # |1,0>
    w = create_matrix(0, f) @ v
    assert w[s2.start] == pytest.approx(np.sqrt(2))  # |2,0>
    assert np.count_nonzero(w) == 1
    assert np.allclose((annihilate_matrix(0, f) @ w)[f.sector_slice(1)], [2.0, 0.0])


def test_ccr_and_bound():
    space = build_fock_basis(3, 5)
    assert ccr_defect(space) < 1e-12
    assert bound_violation(space, np.random.default_rng(0), trials=50) <= 1e-12


def test_top_sector_dropped():
    space = build_fock_basis(2, 2)
    top = space.sector_slice(2)
    a = create_matrix(1, space)
    assert abs(a[:, top]).sum() == 0


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 16))
def test_second_quantize_is_representation(seed):
    rng = np.random.default_rng(seed)
    s = build_sector_basis(3, 3)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    dA, dB = second_quantize(A, s).matrix, second_quantize(B, s).matrix
    comm = (dA @ dB - dB @ dA).toarray()
    assert np.allclose(comm, second_quantize(A @ B - B @ A, s).dense(), atol=1e-10)
    assert np.allclose(second_quantize(np.eye(3), s).dense(), 3 * np.eye(s.dim))


def test_one_body_on_product_states():
    # dGamma(O) on the one-particle sector is O itself
    s = build_sector_basis(4, 1)
    O = np.arange(16.0).reshape(4, 4)
    order = [int(np.argmax(r)) for r in s.occupations]
    assert np.allclose(second_quantize(O, s).dense(), O[np.ix_(order, order)])


def test_field_operators_adjoint_and_linear():
    space = build_fock_basis(2, 4)
    f = np.array([0.3 + 0.1j, -0.7j])
    a, ad = annihilation_field(f, space), creation_field(f, space)
    assert abs(a - ad.conj().T).max() < 1e-15
    expected = f[0] * create_matrix(0, space) + f[1] * create_matrix(1, space)
    assert abs(ad - expected).max() < 1e-15


def test_lowering_matrices_match_fock_blocks():
    sec = build_sector_basis(3, 3)
    low = lowering_matrices(sec)
    space = build_fock_basis(3, 3)
    for i, L in enumerate(low):
        block = annihilate_matrix(i, space)[space.sector_slice(2), space.sector_slice(3)]
        assert abs(L - block).max() < 1e-15
    with pytest.raises(ValueError):
        lowering_matrices(build_sector_basis(3, 0))


def test_on_site_interaction_hand_computed():
    # M = 2, N = 2, V = delta-like on-site only: V(0) = u, V(h) = 0
    g = Grid(2, 2.0)
    u = 3.0
    V = PairPotential(g, np.array([u, 0.0]))
    s = build_sector_basis(2, 2)
    diag = interaction_diagonal(V.kernel(), s, N=2, kappa=1.0)
    # states |2,0>, |1,1>, |0,2>: (1/2N) sum_x V(0) n_x(n_x - 1)
    assert np.allclose(diag, [u / 2, 0.0, u / 2])
    H = build_hamiltonian(g, V, 1.0, s).dense()
    # two-site hopping: -Lap = (2/h^2) [[1,-1],[-1,1]] with h = 1, period 2 doubles the off-diagonal
    lap = -g.laplacian_matrix()
    t_hop = lap[0, 1]
    e = lap[0, 0]
    expected = np.array([[2 * e + u / 2, np.sqrt(2) * t_hop, 0],
                         [np.sqrt(2) * t_hop, 2 * e, np.sqrt(2) * t_hop],
                         [0, np.sqrt(2) * t_hop, 2 * e + u / 2]])
    assert np.allclose(H, expected)


def test_hamiltonian_conserves_number_on_fock_space():
    g = Grid(3, 3.0)
    V = make_potential(g, "gaussian")
    space = build_fock_basis(3, 4)
    H = build_hamiltonian(g, V, 1.0, space, N=4)
    assert commutator_norm(H, number_operator(space)) < 1e-12
    with pytest.raises(ValueError):
        build_hamiltonian(g, V, 1.0, space)
    with pytest.raises(ValueError):
        build_hamiltonian(Grid(4, 1.0), V, 1.0, space, N=4)


def test_hermitian_flag_checked():
    s = build_sector_basis(2, 1)
    with pytest.raises(AssemblyError):
        SectorOperator(sp.csr_matrix(np.array([[0, 1.0], [0, 0]])), s, hermitian=True)


def test_pair_creation_and_quadratic_generator():
    space = build_fock_basis(2, 4)
    K = np.array([[1.0, 0.5j], [0.5j, -2.0]])
    P = pair_creation(K, space)
    vac = np.zeros(space.dim, dtype=complex)
    vac[0] = 1
    out = P @ vac
    two = out[space.sector_slice(2)]  # |2,0>, |1,1>, |0,2>
    assert np.allclose(two, [np.sqrt(2) * 1.0, 2 * 0.5j, np.sqrt(2) * -2.0])
    Q = quadratic_generator_matrix(np.diag([1.0, 2.0]), K, space)
    assert Q.hermitian
    with pytest.raises(AssemblyError):
        quadratic_generator_matrix(np.eye(2), np.array([[0, 1.0], [0, 0]]), space)


def test_pure_backend_selected_by_environment():
    import os
    import subprocess
    import sys
    env = dict(os.environ, BOSONCLT_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from bosonclt.kernels import BACKEND; print(BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
