"""Occupation-number bases: fixed-N sectors and the truncated Fock space."""
from __future__ import annotations

from functools import cached_property
from math import comb

import numpy as np

from .. import kernels
from ..errors import CapacityError

DEFAULT_MAX_DIM = 2_000_000


class SectorBasis:
    """All occupations ``(n_1, ..., n_M)`` with ``sum n_i = N``, descending lexicographic order."""

    def __init__(self, M: int, N: int, occupations: np.ndarray):
        self.M = M
        self.N = N
        self.occupations = occupations
        self.occupations.setflags(write=False)

    def __len__(self):
        return self.occupations.shape[0]

    @property
    def dim(self) -> int:
        return len(self)

    def __repr__(self):
        return f"SectorBasis(M={self.M}, N={self.N}, dim={self.dim})"

    def index(self, occ) -> np.ndarray:
        occ = np.atleast_2d(np.asarray(occ, dtype=np.int64))
        return kernels.rank_states(np.ascontiguousarray(occ), self.N)

    def tuples(self):
        return [tuple(int(x) for x in row) for row in self.occupations]

    # uniform interface with FockBasis
    @property
    def sectors(self):
        return [self]

    @property
    def offsets(self):
        return [0]

    @property
    def N_max(self):
        return self.N

    @property
    def N_min(self):
        return self.N

    @cached_property
    def number_diagonal(self) -> np.ndarray:
        return np.full(self.dim, float(self.N))

    def sector_slice(self, n):
        if n != self.N:
            return None
        return slice(0, self.dim)


class FockBasis:
    """Truncated bosonic Fock space ``sum_i n_i <= N_max`` as a direct sum of sectors."""

    def __init__(self, M: int, N_max: int, sectors):
        self.M = M
        self.N_max = N_max
        self.sectors = list(sectors)
        self.offsets = [0]
        for s in self.sectors[:-1]:
            self.offsets.append(self.offsets[-1] + s.dim)

    @property
    def N_min(self):
        return 0

    @property
    def dim(self) -> int:
        return self.offsets[-1] + self.sectors[-1].dim

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"FockBasis(M={self.M}, N_max={self.N_max}, dim={self.dim})"

    def sector_slice(self, n):
        if not 0 <= n <= self.N_max:
            return None
        return slice(self.offsets[n], self.offsets[n] + self.sectors[n].dim)

    @cached_property
    def number_diagonal(self) -> np.ndarray:
        return np.concatenate([np.full(s.dim, float(s.N)) for s in self.sectors])

    @cached_property
    def occupations(self) -> np.ndarray:
        return np.concatenate([s.occupations for s in self.sectors], axis=0)


def sector_dimension(M: int, N: int) -> int:
    return comb(N + M - 1, M - 1)


def build_sector_basis(M: int, N: int, max_dim: int = DEFAULT_MAX_DIM) -> SectorBasis:
    if M < 1 or N < 0:
        raise ValueError("need M >= 1 and N >= 0")
    dim = sector_dimension(M, N)
    if dim > max_dim:
        raise CapacityError(f"sector M={M}, N={N} has dimension {dim} > budget {max_dim}")
    return SectorBasis(M, N, kernels.enumerate_sector(M, N))


def build_fock_basis(M: int, N_max: int, max_dim: int = DEFAULT_MAX_DIM) -> FockBasis:
    if M < 1 or N_max < 0:
        raise ValueError("need M >= 1 and N_max >= 0")
    total = comb(N_max + M, M)
    if total > max_dim:
        raise CapacityError(f"truncated Fock space M={M}, N_max={N_max} has dimension {total} > budget {max_dim}")
    return FockBasis(M, N_max, [build_sector_basis(M, n, max_dim) for n in range(N_max + 1)])
