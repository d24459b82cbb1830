"""Periodic lattice discretization shared by the Hartree, Bogoliubov and Fock modules.

Functions on the lattice are stored as flat complex arrays of length
``M = n**d`` in C order. The inner product carries the cell volume
``h**d``, so continuum formulas carry over without rescaling.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InputShapeError


@dataclass(frozen=True)
class Grid:
    """Periodic box ``[-L/2, L/2)^d`` with ``n`` points per axis."""

    n: int
    L: float
    d: int = 1

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        if not self.L > 0:
            raise ValueError("box length must be positive")

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def M(self) -> int:
        return self.n ** self.d

    @property
    def cell(self) -> float:
        """Cell volume ``h**d``."""
        return self.h ** self.d

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.L / 2 + self.h * np.arange(self.n)

    @cached_property
    def coords(self) -> np.ndarray:
        """Array of shape ``(M, d)`` with the lattice points."""
        mesh = np.meshgrid(*([self.axis] * self.d), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @cached_property
    def separations(self) -> np.ndarray:
        """Minimum-image displacement of each site from the origin site, shape ``(M, d)``.

        Index 0 of every axis is the zero displacement, matching the FFT
        convention used by :func:`convolve`.
        """
        k = np.arange(self.n)
        k = np.where(k <= self.n // 2, k, k - self.n) * self.h
        mesh = np.meshgrid(*([k] * self.d), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @cached_property
    def k_squared(self) -> np.ndarray:
        """Squared periodic wavenumbers ``|k|^2`` in FFT order, flattened."""
        kk = 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)
        mesh = np.meshgrid(*([kk] * self.d), indexing="ij")
        return sum(m.ravel() ** 2 for m in mesh)

    def inner(self, f, g) -> complex:
        """Weighted inner product, antilinear in ``f``."""
        return self.cell * np.vdot(f, g)

    def norm(self, f) -> float:
        return float(np.sqrt(self.cell) * np.linalg.norm(f))

    def normalize(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=complex)
        return f / self.norm(f)

    def fft(self, f):
        return np.fft.fftn(np.reshape(self._check(f), self.shape)).ravel()

    def ifft(self, fk):
        return np.fft.ifftn(np.reshape(fk, self.shape)).ravel()

    def _check(self, f):
        f = np.asarray(f)
        if f.shape != (self.M,):
            raise InputShapeError(f"expected vector of length {self.M}, got shape {f.shape}")
        return f

    def laplacian_matrix(self) -> np.ndarray:
        """Dense matrix of the spectral Laplacian (real symmetric)."""
        return self._laplacian.copy()

    @cached_property
    def _laplacian(self) -> np.ndarray:
        eye = np.eye(self.M)
        cols = [laplacian_apply(self, eye[:, j]) for j in range(self.M)]
        lap = np.stack(cols, axis=1)
        # the multiplier is even in k, so the matrix is real up to roundoff
        return 0.5 * (lap.real + lap.real.T)

    def plane_wave(self, mode) -> np.ndarray:
        """Normalized plane wave ``exp(i 2 pi m.x / L)`` for integer vector ``mode``."""
        mode = np.broadcast_to(np.asarray(mode, dtype=float), (self.d,))
        phase = self.coords @ (2 * np.pi * mode / self.L)
        return np.exp(1j * phase) / np.sqrt(self.L ** self.d)

    def gaussian(self, width=1.0, center=0.0, momentum=0.0) -> np.ndarray:
        """Normalized Gaussian wave packet, periodized by minimum image."""
        c = np.broadcast_to(np.asarray(center, dtype=float), (self.d,))
        p = np.broadcast_to(np.asarray(momentum, dtype=float), (self.d,))
        dx = self.coords - c
        dx = dx - self.L * np.round(dx / self.L)
        f = np.exp(-np.sum(dx ** 2, axis=1) / (2 * width ** 2) + 1j * (self.coords @ p))
        return self.normalize(f)


@dataclass(frozen=True)
class WaveFunction:
    grid: Grid
    values: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.M,):
            raise InputShapeError(f"expected {self.grid.M} values, got {v.shape}")
        object.__setattr__(self, "values", v)
        if self.normalized and abs(self.grid.norm(v) - 1) > 1e-8:
            raise ValueError(f"wave function flagged normalized has norm {self.grid.norm(v)!r}")

    @property
    def norm(self) -> float:
        return self.grid.norm(self.values)


@dataclass(frozen=True)
class PairPotential:
    """Even, bounded pair potential sampled at the minimum-image separations."""

    grid: Grid
    values: np.ndarray
    sup: float = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.M,):
            raise InputShapeError(f"expected {self.grid.M} values, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("potential must be finite")
        refl = v.reshape(self.grid.shape)
        for ax in range(self.grid.d):
            refl = np.roll(np.flip(refl, axis=ax), 1, axis=ax)
        if not np.allclose(refl.ravel(), v, rtol=0, atol=1e-12 * max(1.0, np.abs(v).max())):
            raise ValueError("potential must be even under lattice reflection")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "sup", float(np.abs(v).max()))

    @cached_property
    def spectrum(self) -> np.ndarray:
        return self.grid.fft(self.values.astype(complex))

    def kernel(self) -> np.ndarray:
        """Matrix ``V(x_i - x_j)`` over lattice sites."""
        return self._kernel.copy()

    @cached_property
    def _kernel(self) -> np.ndarray:
        g = self.grid
        sites = np.stack(np.unravel_index(np.arange(g.M), g.shape), axis=1)
        diff = np.mod(sites[:, None, :] - sites[None, :, :], g.n)
        return self.values[np.ravel_multi_index(np.moveaxis(diff, -1, 0), g.shape)]


def laplacian_apply(grid: Grid, f) -> np.ndarray:
    """Spectral Laplacian with periodic wavenumbers."""
    f = grid._check(f)
    return grid.ifft(-grid.k_squared * grid.fft(f))


def convolve(grid: Grid, V: PairPotential, rho) -> np.ndarray:
    """Periodic convolution ``h^d sum_y V(x-y) rho(y)`` via FFT."""
    rho = grid._check(rho)
    if V.grid != grid:
        raise InputShapeError("potential lives on a different grid")
    return grid.cell * grid.ifft(V.spectrum * grid.fft(rho))


def conjugate_J(f) -> np.ndarray:
    """The antilinear conjugation ``Jf = conj(f)`` in the position basis."""
    return np.conj(np.asarray(f))


def make_potential(grid: Grid, kind: str, **params) -> PairPotential:
    """Build a named potential profile.

    ``gaussian``: ``g exp(-r^2 / (2 w^2))``; ``soft-coulomb``: ``g / sqrt(r^2 + a^2)``;
    ``soft-power``: ``g (r^2 + a^2)^(-p/2)``; ``box``: ``g`` for ``r <= w``;
    ``custom-table``: ``values`` given in minimum-image site order.
    """
    r2 = np.sum(grid.separations ** 2, axis=1)
    g = float(params.get("strength", 1.0))
    if kind == "gaussian":
        w = float(params.get("width", 1.0))
        v = g * np.exp(-r2 / (2 * w ** 2))
    elif kind == "soft-coulomb":
        a = float(params.get("softening", 1.0))
        v = g / np.sqrt(r2 + a ** 2)
    elif kind == "soft-power":
        a = float(params.get("softening", 1.0))
        p = float(params.get("power", 1.0))
        v = g * (r2 + a ** 2) ** (-p / 2)
    elif kind == "box":
        w = float(params.get("width", 1.0))
        v = np.where(np.sqrt(r2) <= w + 1e-12, g, 0.0)
    elif kind == "custom-table":
        v = np.asarray(params["values"], dtype=float)
    elif kind == "zero":
        v = np.zeros(grid.M)
    else:
        raise ValueError(f"unknown potential kind {kind!r}")
    return PairPotential(grid, v)
