"""Bogoliubov transformation of the limiting fluctuation dynamics.

In the lattice position basis the conjugation ``J`` is entrywise complex
conjugation, so ``J X J`` is the matrix ``conj(X)`` and the transformation

    Theta = [[U, J V J], [V, J U J]] = [[U, conj(V)], [V, conj(U)]]

is an ordinary complex-linear 2M x 2M matrix. It is propagated from
``Theta(s;s) = 1`` by

    i d/dt Theta(t;s) = -Theta(t;s) A(t),    A = [[D, -conj(B)], [B, -conj(D)]].

The minus sign is the one compatible with ``Theta(t;s)(phi_t, conj phi_t) =
(phi_s, conj phi_s)`` and with the free flow ``U(t;s) = exp(i D (t-s))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AssemblyError, InputShapeError, PropagationDivergedError
from .grid import Grid, PairPotential, WaveFunction, convolve, laplacian_apply
from .hartree import HartreeTrajectory


@dataclass(frozen=True)
class QuadraticGenerator:
    D: np.ndarray
    B: np.ndarray
    t: float = 0.0

    def block(self) -> np.ndarray:
        return np.block([[self.D, -np.conj(self.B)], [self.B, -np.conj(self.D)]])


@dataclass
class BogoliubovPair:
    grid: Grid
    U: np.ndarray
    V: np.ndarray
    t: float = 0.0
    s: float = 0.0
    defects: dict = field(default_factory=dict)

    @classmethod
    def identity(cls, grid: Grid, t=0.0):
        M = grid.M
        return cls(grid, np.eye(M, dtype=complex), np.zeros((M, M), dtype=complex), t, t)

    @classmethod
    def from_theta(cls, grid: Grid, theta, t=0.0, s=0.0):
        M = grid.M
        pair = cls(grid, theta[:M, :M].copy(), theta[M:, :M].copy(), t, s)
        pair.defects = symplectic_defects(pair)
        pair.defects["block_structure"] = float(
            max(np.linalg.norm(theta[:M, M:] - np.conj(theta[M:, :M]), 2),
                np.linalg.norm(theta[M:, M:] - np.conj(theta[:M, :M]), 2)))
        return pair

    def theta(self) -> np.ndarray:
        return np.block([[self.U, np.conj(self.V)], [self.V, np.conj(self.U)]])


def symplectic_defects(pair: BogoliubovPair) -> dict:
    U, V = pair.U, pair.V
    eye = np.eye(U.shape[0])
    return {
        "normalization": float(np.linalg.norm(U.conj().T @ U - V.conj().T @ V - eye, 2)),
        "pairing": float(np.linalg.norm(U.conj().T @ np.conj(V) - V.conj().T @ np.conj(U), 2)),
    }


def build_generator(phi, V: PairPotential, kappa=1.0, *, t=0.0, tol=1e-10) -> QuadraticGenerator:
    """Assemble ``D_t`` and ``B_t`` as matrices acting on lattice values.

    ``D = -Lap + kappa diag(V * |phi|^2) + kappa h^d V(x-y) phi(x) conj(phi(y))`` and
    ``B = kappa h^d V(x-y) conj(phi(x)) conj(phi(y))``.
    """
    grid = V.grid
    phi = phi.values if isinstance(phi, WaveFunction) else np.asarray(phi, dtype=complex)
    if phi.shape != (grid.M,):
        raise InputShapeError("phi has wrong length")
    lap = grid.laplacian_matrix()
    kern = kappa * grid.cell * V.kernel()
    direct = kappa * convolve(grid, V, np.abs(phi) ** 2).real
    D = -lap + np.diag(direct) + kern * np.outer(phi, np.conj(phi))
    B = kern * np.outer(np.conj(phi), np.conj(phi))
    scale = max(1.0, np.abs(D).max())
    if np.abs(D - D.conj().T).max() > tol * scale:
        raise AssemblyError("D_t is not Hermitian")
    if np.abs(B - B.T).max() > tol * scale:
        raise AssemblyError("B_t is not symmetric")
    return QuadraticGenerator(D, B, t)


def _block_generator(traj: HartreeTrajectory, t):
    gen = build_generator(traj.at(t), traj.potential, traj.kappa, t=t)
    return gen.block()


def propagate_theta(traj: HartreeTrajectory, dt, *, t_start=0.0, t_end=None,
                    defect_ceiling=1e-3, check_every=50) -> BogoliubovPair:
    """RK4 integration of ``d/dt Theta = i Theta A(t)`` from ``Theta(t_start) = 1``.

    ``A(t)`` is built from ``traj.at(t)``; choose the trajectory sampling at
    ``dt/2`` so that every RK4 stage lands on a stored sample.
    """
    grid = traj.grid
    t_end = traj.times[-1] if t_end is None else t_end
    span = t_end - t_start
    M = grid.M
    theta = np.eye(2 * M, dtype=complex)
    if span <= 0:
        return BogoliubovPair.from_theta(grid, theta, t_start, t_start)
    nsteps = int(np.ceil(span / dt - 1e-9))
    h = span / nsteps
    cache = {}

    def A(t):
        key = round(t, 12)
        if key not in cache:
            if len(cache) > 4:
                cache.clear()
            cache[key] = _block_generator(traj, t)
        return cache[key]

    t = t_start
    for n in range(nsteps):
        a0, a1, a2 = A(t), A(t + h / 2), A(t + h)
        k1 = 1j * theta @ a0
        k2 = 1j * (theta + 0.5 * h * k1) @ a1
        k3 = 1j * (theta + 0.5 * h * k2) @ a1
        k4 = 1j * (theta + h * k3) @ a2
        theta = theta + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t_start + (n + 1) * h
        if (n + 1) % check_every == 0 or n + 1 == nsteps:
            pair = BogoliubovPair(grid, theta[:M, :M], theta[M:, :M])
            worst = max(symplectic_defects(pair).values())
            if not np.isfinite(worst) or worst > defect_ceiling:
                raise PropagationDivergedError(f"symplectic defect {worst:.3e} at t={t:.6g}")
    return BogoliubovPair.from_theta(grid, theta, t_end, t_start)


def generator_residual(traj: HartreeTrajectory, dt, t, eps) -> float:
    """Central-difference residual ``||(Theta(t+eps) - Theta(t-eps))/(2 eps) - i Theta(t) A(t)||``."""
    grid = traj.grid
    th = lambda T: propagate_theta(traj, dt, t_end=T).theta()
    lhs = (th(t + eps) - th(t - eps)) / (2 * eps)
    rhs = 1j * th(t) @ _block_generator(traj, t)
    return float(np.linalg.norm(lhs - rhs, 2))


def theta_apply(pair: BogoliubovPair, f, g):
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    return (pair.U @ f + np.conj(pair.V @ np.conj(g)),
            pair.V @ f + np.conj(pair.U @ np.conj(g)))


def compose(first: BogoliubovPair, second: BogoliubovPair) -> BogoliubovPair:
    """``Theta(t;s) = Theta(r;s) Theta(t;r)`` for ``first = Theta(r;s)``, ``second = Theta(t;r)``."""
    return BogoliubovPair.from_theta(first.grid, first.theta() @ second.theta(), second.t, first.s)


def s_pairing(grid: Grid, x, y) -> complex:
    """``<x, S y>`` on ``L^2 + L^2`` with ``S = diag(1, -1)``."""
    return grid.inner(x[0], y[0]) - grid.inner(x[1], y[1])


def check_ttph(pair: BogoliubovPair, phi_t, phi0) -> float:
    """Residual of ``Theta(t;0)(phi_t, conj phi_t) = (phi_0, conj phi_0)``."""
    grid = pair.grid
    phi_t = np.asarray(getattr(phi_t, "values", phi_t), dtype=complex)
    phi0 = np.asarray(getattr(phi0, "values", phi0), dtype=complex)
    a, b = theta_apply(pair, phi_t, np.conj(phi_t))
    return float(np.hypot(grid.norm(a - phi0), grid.norm(b - np.conj(phi0))))


def _check_hermitian(O, tol=1e-10):
    O = np.asarray(O, dtype=complex)
    if O.ndim != 2 or O.shape[0] != O.shape[1]:
        raise InputShapeError("observable must be a square matrix")
    if np.abs(O - O.conj().T).max() > tol * max(1.0, np.abs(O).max()):
        raise InputShapeError("observable is not Hermitian")
    return O


def fluctuation_vector(pair: BogoliubovPair, O, phi_t) -> np.ndarray:
    """``w = U O phi_t + J V O phi_t``."""
    h = _check_hermitian(O) @ np.asarray(getattr(phi_t, "values", phi_t), dtype=complex)
    return pair.U @ h + np.conj(pair.V @ h)


def variance(pair: BogoliubovPair, O, phi_t, phi0) -> float:
    """Limiting variance ``||w||^2 - |<phi_0, w>|^2``."""
    grid = pair.grid
    phi0 = np.asarray(getattr(phi0, "values", phi0), dtype=complex)
    w = fluctuation_vector(pair, O, phi_t)
    s2 = grid.inner(w, w).real - abs(grid.inner(phi0, w)) ** 2
    if s2 < -1e-10:
        raise AssertionError(f"negative variance {s2}")
    return max(float(s2), 0.0)


def variance_pairing_form(pair: BogoliubovPair, O, phi_t, phi0) -> float:
    """Same variance written through the doubled vector ``Theta(O phi_t, J O phi_t)``."""
    grid = pair.grid
    phi0 = np.asarray(getattr(phi0, "values", phi0), dtype=complex)
    h = _check_hermitian(O) @ np.asarray(getattr(phi_t, "values", phi_t), dtype=complex)
    x = theta_apply(pair, h, np.conj(h))
    xx = grid.inner(x[0], x[0]) + grid.inner(x[1], x[1])
    xp = (grid.inner(x[0], phi0) + grid.inner(x[1], np.conj(phi0))) / np.sqrt(2)
    return float(0.5 * (xx.real - abs(xp) ** 2))


def im_identity(pair: BogoliubovPair, O, phi_t, phi0) -> float:
    """``2 Im <phi_0, U O_c phi_t + J V O_c phi_t>`` for the centered observable; zero in exact arithmetic."""
    grid = pair.grid
    phi_t = np.asarray(getattr(phi_t, "values", phi_t), dtype=complex)
    phi0 = np.asarray(getattr(phi0, "values", phi0), dtype=complex)
    O = _check_hermitian(O)
    Oc = O - grid.inner(phi_t, O @ phi_t).real * np.eye(O.shape[0])
    w = fluctuation_vector(pair, Oc, phi_t)
    return float(2 * grid.inner(phi0, w).imag)


def free_propagator(grid: Grid, t) -> np.ndarray:
    """``exp(i (-Lap) t)`` as a dense matrix; the ``U`` block when ``V = 0``."""
    w, Q = np.linalg.eigh(-grid.laplacian_matrix())
    return (Q * np.exp(1j * w * t)) @ Q.conj().T
