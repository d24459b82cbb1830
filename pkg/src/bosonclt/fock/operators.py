"""Second-quantized operators on occupation bases.

Modes are the lattice sites and ``b_x = h^{d/2} a_x`` are the orthonormal
mode operators, ``[b_x, b*_y] = delta_xy``. A one-body matrix ``O`` acting on
lattice values is lifted as ``dGamma(O) = sum_xy O_xy b*_x b_y``; field
operators take mode amplitudes ``f_x`` (``a*(f) = sum_x f_x b*_x``), which are
the lattice values times ``h^{d/2}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Union

import numpy as np
import scipy.sparse as sp

from .. import kernels
from ..errors import AssemblyError
from .basis import FockBasis, SectorBasis

Space = Union[SectorBasis, FockBasis]


@dataclass
class SectorOperator:
    matrix: sp.csr_matrix
    basis: Space
    hermitian: bool = False
    tol: float = 1e-10

    def __post_init__(self):
        self.matrix = sp.csr_matrix(self.matrix, dtype=complex)
        if self.hermitian:
            err = hermiticity_error(self.matrix)
            scale = max(1.0, abs(self.matrix).max() if self.matrix.nnz else 0.0)
            if err > self.tol * scale:
                raise AssemblyError(f"operator flagged Hermitian has |H - H^*| = {err:.3e}")

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, v):
        return self.matrix @ v

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __add__(self, other):
        return SectorOperator(self.matrix + other.matrix, self.basis, self.hermitian and other.hermitian)

    def scaled(self, c):
        return SectorOperator(c * self.matrix, self.basis, self.hermitian and np.isreal(c))


def hermiticity_error(A) -> float:
    d = A - A.conj().T
    if sp.issparse(d):
        return float(abs(d).max()) if d.nnz else 0.0
    return float(np.abs(d).max())


_struct_cache = {}


def _cached(key, fn):
    if key not in _struct_cache:
        if len(_struct_cache) > 256:
            _struct_cache.clear()
        _struct_cache[key] = fn()
    return _struct_cache[key]


def _hop(sector: SectorBasis):
    return _cached(("hop", sector.M, sector.N),
                   lambda: kernels.hop_structure(np.ascontiguousarray(sector.occupations), sector.N))


def _raise(sector: SectorBasis):
    return _cached(("raise", sector.M, sector.N),
                   lambda: kernels.raise_structure(np.ascontiguousarray(sector.occupations), sector.N))


def _assemble(space: Space, blocks):
    """``blocks``: iterable of ``(n_to, n_from, coo_matrix)`` sector blocks."""
    dim = space.dim
    rows, cols, vals = [], [], []
    for n_to, n_from, blk in blocks:
        so, si = space.sector_slice(n_to), space.sector_slice(n_from)
        if so is None or si is None:
            continue
        blk = blk.tocoo()
        rows.append(blk.row + so.start)
        cols.append(blk.col + si.start)
        vals.append(blk.data)
    if not rows:
        return sp.csr_matrix((dim, dim), dtype=complex)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(dim, dim), dtype=complex)


def _one_body_block(O, sector: SectorBasis):
    rows, cols, pair, amp = _hop(sector)
    M = sector.M
    vals = np.asarray(O).reshape(M * M)[pair] * amp
    return sp.coo_matrix((vals, (rows, cols)), shape=(sector.dim, sector.dim))


def second_quantize(O, basis: Space, hermitian=None) -> SectorOperator:
    """``sum_ij O_ij b*_i b_j`` (particle-number conserving)."""
    O = np.asarray(O, dtype=complex)
    if O.shape != (basis.M, basis.M):
        raise ValueError(f"one-body matrix must be {basis.M}x{basis.M}")
    if hermitian is None:
        hermitian = bool(np.abs(O - O.conj().T).max() <= 1e-12 * max(1.0, np.abs(O).max()))
    mat = _assemble(basis, ((s.N, s.N, _one_body_block(O, s)) for s in basis.sectors))
    return SectorOperator(mat, basis, hermitian)


def number_operator(basis: Space) -> SectorOperator:
    return SectorOperator(sp.diags(basis.number_diagonal).astype(complex), basis, True)


def _raise_block(sector: SectorBasis, coeffs):
    """``sum_i coeffs_i b*_i`` from ``sector`` into the sector above."""
    rows, cols, mode, amp = _raise(sector)
    vals = np.asarray(coeffs)[mode] * amp
    dim_up = comb(sector.N + 1 + sector.M - 1, sector.M - 1)
    return sp.coo_matrix((vals, (rows, cols)), shape=(dim_up, sector.dim))


def creation_field(f, space: Space) -> sp.csr_matrix:
    """Matrix of ``a*(f) = sum_i f_i b*_i``; components leaving the top sector are dropped."""
    f = np.asarray(f, dtype=complex)
    return _assemble(space, ((s.N + 1, s.N, _raise_block(s, f)) for s in space.sectors))


def annihilation_field(f, space: Space) -> sp.csr_matrix:
    """Matrix of ``a(f) = sum_i conj(f_i) b_i``."""
    return creation_field(f, space).conj().T.tocsr()


def create_matrix(i, space: Space) -> sp.csr_matrix:
    e = np.zeros(space.M)
    e[i] = 1.0
    return creation_field(e, space)


def annihilate_matrix(i, space: Space) -> sp.csr_matrix:
    return create_matrix(i, space).T.tocsr()


def lowering_matrices(sector: SectorBasis, lower: SectorBasis = None):
    """Matrices of ``b_i`` from ``sector`` into the sector with one particle less."""
    if sector.N == 0:
        raise ValueError("the vacuum sector has no lower neighbour")
    if lower is None:
        from .basis import build_sector_basis
        lower = build_sector_basis(sector.M, sector.N - 1)
    out = []
    for i in range(sector.M):
        e = np.zeros(sector.M)
        e[i] = 1.0
        out.append(_raise_block(lower, e).tocsr().conj().T.tocsr())
    return out


def pair_creation(K, space: Space) -> sp.csr_matrix:
    """``sum_ij K_ij b*_i b*_j`` built from products of single raisings."""
    K = np.asarray(K, dtype=complex)
    M = space.M
    raises = [create_matrix(i, space) for i in range(M)]
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for i in range(M):
        row = sum((K[i, j] * raises[j] for j in range(M) if K[i, j] != 0), sp.csr_matrix((space.dim, space.dim)))
        if row.nnz:
            out = out + raises[i] @ row
    return out.tocsr()


def interaction_diagonal(V_kernel, space: Space, N, kappa=1.0) -> np.ndarray:
    """Diagonal of ``(kappa / 2N) sum_xy V(x-y) b*_x b*_y b_y b_x``.

    In the position mode basis ``b*_x b*_y b_y b_x = n_x n_y - delta_xy n_x``.
    """
    occ = space.occupations.astype(float)
    V_kernel = np.asarray(V_kernel, dtype=float)
    pairs = np.einsum("si,ij,sj->s", occ, V_kernel, occ) - occ @ np.diag(V_kernel)
    return kappa / (2.0 * N) * pairs


def build_hamiltonian(grid, V, kappa, basis: Space, N=None) -> SectorOperator:
    """``dGamma(-Lap) + (kappa / 2N) sum_xy V(x-y) b*_x b*_y b_y b_x``.

    ``N`` fixes the mean-field scaling and defaults to the sector particle number.
    """
    if basis.M != grid.M:
        raise ValueError("basis modes must be the grid sites")
    if N is None:
        if not isinstance(basis, SectorBasis):
            raise ValueError("N must be given for a truncated Fock space")
        N = basis.N
    kin = second_quantize(-grid.laplacian_matrix(), basis, hermitian=True).matrix
    if N > 0:
        diag = interaction_diagonal(V.kernel(), basis, N, kappa)
    else:
        diag = np.zeros(basis.dim)
    H = kin + sp.diags(diag)
    return SectorOperator(H, basis, hermitian=True)


def quadratic_generator_matrix(D, B, space: Space) -> SectorOperator:
    """``dGamma(D) + (1/2) sum_ij (conj(B)_ij b*_i b*_j + B_ij b_i b_j)``."""
    B = np.asarray(B, dtype=complex)
    if np.abs(B - B.T).max() > 1e-10 * max(1.0, np.abs(B).max()):
        raise AssemblyError("pairing matrix must be symmetric")
    one = second_quantize(D, space, hermitian=True).matrix
    P = pair_creation(np.conj(B), space)
    return SectorOperator(one + 0.5 * (P + P.conj().T), space, hermitian=True)


def commutator_norm(A, B) -> float:
    A = A.matrix if isinstance(A, SectorOperator) else A
    B = B.matrix if isinstance(B, SectorOperator) else B
    C = A @ B - B @ A
    if sp.issparse(C):
        return float(abs(C).max()) if C.nnz else 0.0
    return float(np.abs(C).max())
