"""Strang split-step integration of the Hartree equation

    i d/dt phi = -Lap phi + kappa (V * |phi|^2) phi

and of its variant with the clipped potential.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericOverflowError
from .grid import Grid, PairPotential, WaveFunction, convolve, laplacian_apply


@dataclass(frozen=True)
class HartreeTrajectory:
    grid: Grid
    times: np.ndarray
    states: np.ndarray  # shape (len(times), M)
    kappa: float
    potential: PairPotential

    def __len__(self):
        return len(self.times)

    def wave(self, i) -> WaveFunction:
        return WaveFunction(self.grid, self.states[i], normalized=False)

    def at(self, t) -> np.ndarray:
        """Linear interpolation of ``phi_t`` between stored samples."""
        times = self.times
        if t <= times[0]:
            return self.states[0].copy()
        if t >= times[-1]:
            if t - times[-1] > 1e-12 * max(1.0, abs(times[-1])):
                raise ValueError(f"t={t} beyond trajectory end {times[-1]}")
            return self.states[-1].copy()
        j = int(np.searchsorted(times, t, side="right")) - 1
        t0, t1 = times[j], times[j + 1]
        w = (t - t0) / (t1 - t0)
        if w < 1e-12:
            return self.states[j].copy()
        if w > 1 - 1e-12:
            return self.states[j + 1].copy()
        return (1 - w) * self.states[j] + w * self.states[j + 1]

    def norms(self) -> np.ndarray:
        return np.sqrt(self.grid.cell) * np.linalg.norm(self.states, axis=1)

    def energies(self) -> np.ndarray:
        return np.array([hartree_energy(s, self.potential, self.kappa, grid=self.grid) for s in self.states])


def _values(phi):
    return phi.values if isinstance(phi, WaveFunction) else np.asarray(phi, dtype=complex)


def mean_field(grid: Grid, V: PairPotential, phi, kappa=1.0) -> np.ndarray:
    """Real Hartree potential ``kappa V * |phi|^2``."""
    return kappa * convolve(grid, V, np.abs(phi) ** 2).real


def hartree_step(phi, dt, V: PairPotential, kappa=1.0, *, kinetic=None) -> np.ndarray:
    """One Strang step: potential half-phase, exact kinetic flow, potential half-phase.

    ``kinetic`` may carry the precomputed multiplier ``exp(-i |k|^2 dt)``.
    Returns the raw values; norm is preserved up to roundoff.
    """
    grid = V.grid
    psi = _values(phi)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if kinetic is None:
        kinetic = np.exp(-1j * grid.k_squared * dt)
    psi = psi * np.exp(-0.5j * dt * mean_field(grid, V, psi, kappa))
    psi = grid.ifft(kinetic * grid.fft(psi))
    psi = psi * np.exp(-0.5j * dt * mean_field(grid, V, psi, kappa))
    if not np.all(np.isfinite(psi)):
        raise NumericOverflowError("non-finite values in Hartree step")
    return psi


def hartree_evolve(phi0, T, dt, V: PairPotential, kappa=1.0, sample_stride=1) -> HartreeTrajectory:
    """Integrate up to ``T`` with step close to ``dt``; ``T`` is always hit exactly.

    The actual step is ``T / ceil(T / dt)``. Samples are kept every
    ``sample_stride`` steps, plus the final state.
    """
    grid = V.grid
    psi = _values(phi0).copy()
    if T < 0 or not dt > 0:
        raise ValueError("need T >= 0 and dt > 0")
    if T == 0:
        return HartreeTrajectory(grid, np.array([0.0]), psi[None, :], kappa, V)
    nsteps = int(np.ceil(T / dt - 1e-9))
    step = T / nsteps
    kinetic = np.exp(-1j * grid.k_squared * step)
    times, states = [0.0], [psi.copy()]
    for n in range(1, nsteps + 1):
        psi = hartree_step(psi, step, V, kappa, kinetic=kinetic)
        if n % sample_stride == 0 or n == nsteps:
            times.append(n * step)
            states.append(psi.copy())
    return HartreeTrajectory(grid, np.array(times), np.array(states), kappa, V)


def hartree_energy(phi, V: PairPotential, kappa=1.0, *, grid=None) -> float:
    grid = grid or V.grid
    psi = _values(phi)
    kin = grid.inner(psi, -laplacian_apply(grid, psi))
    rho = np.abs(psi) ** 2
    pot = 0.5 * kappa * grid.inner(rho, convolve(grid, V, rho))
    e = kin + pot
    scale = max(1.0, abs(e))
    assert abs(e.imag) <= 1e-12 * scale, f"energy has imaginary part {e.imag}"
    return float(e.real)


def h1_norm(grid: Grid, phi) -> float:
    """Discrete ``<phi, (1 - Lap) phi>^(1/2)``."""
    psi = _values(phi)
    return float(np.sqrt(grid.inner(psi, psi - laplacian_apply(grid, psi)).real))


def regularize_potential(V: PairPotential, alpha) -> PairPotential:
    """Clip ``|V|`` at ``1/alpha`` keeping the sign."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    v = np.sign(V.values) * np.minimum(np.abs(V.values), 1.0 / alpha)
    return PairPotential(V.grid, v)


def regularization_gap(phi0, T, dt, V: PairPotential, kappa, alpha) -> float:
    """``||phi_T - phi~_T||`` between the flows with ``V`` and with its clipped version."""
    if T == 0:
        return 0.0
    Vt = regularize_potential(V, alpha)
    a = hartree_evolve(phi0, T, dt, V, kappa, sample_stride=10 ** 9)
    b = hartree_evolve(phi0, T, dt, Vt, kappa, sample_stride=10 ** 9)
    return V.grid.norm(a.states[-1] - b.states[-1])
