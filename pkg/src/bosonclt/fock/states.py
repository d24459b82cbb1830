"""Fock vectors: product states, Weyl/coherent states, the xi_N vector and the fluctuation dynamics."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma

import numpy as np
import scipy.sparse as sp

from ..errors import TruncationRiskError
from .basis import FockBasis, SectorBasis, build_fock_basis
from .evolution import evolve_exact
from .operators import Space, annihilate_matrix, annihilation_field, create_matrix, creation_field


@dataclass
class FockVector:
    basis: Space
    coeffs: np.ndarray
    leaked: float = 0.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.basis.dim,):
            raise ValueError("coefficient vector does not match the basis")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def sector(self, n) -> np.ndarray:
        sl = self.basis.sector_slice(n)
        return np.zeros(0, dtype=complex) if sl is None else self.coeffs[sl]

    def sector_weights(self) -> np.ndarray:
        return np.array([np.sum(np.abs(self.sector(s.N)) ** 2) for s in self.basis.sectors])


def vacuum(space: FockBasis) -> FockVector:
    c = np.zeros(space.dim, dtype=complex)
    c[0] = 1.0
    return FockVector(space, c)


def apply_create(i, v: FockVector) -> FockVector:
    """``b*_i v``; the weight that would leave the top sector is added to ``leaked``."""
    out = create_matrix(i, v.basis) @ v.coeffs
    top = v.sector(v.basis.N_max)
    n_i = v.basis.sectors[-1].occupations[:, i]
    lost = float(np.sum((n_i + 1) * np.abs(top) ** 2))
    return FockVector(v.basis, out, leaked=v.leaked + lost)


def apply_annihilate(i, v: FockVector) -> FockVector:
    return FockVector(v.basis, annihilate_matrix(i, v.basis) @ v.coeffs, leaked=v.leaked)


def mode_amplitudes(grid, phi) -> np.ndarray:
    """Lattice values to orthonormal mode amplitudes (multiply by ``sqrt(h^d)``)."""
    return np.sqrt(grid.cell) * np.asarray(getattr(phi, "values", phi), dtype=complex)


def product_coefficients(c, sector: SectorBasis) -> np.ndarray:
    """Coefficients of ``a*(c)^N / sqrt(N!) Omega`` on ``sector`` for mode amplitudes ``c``."""
    occ = sector.occupations
    N = sector.N
    lognorm = 0.5 * (lgamma(N + 1) - np.array([sum(lgamma(k + 1) for k in row) for row in occ.tolist()]))
    c = np.asarray(c, dtype=complex)
    mono = np.prod(np.where(occ > 0, c[None, :] ** occ, 1.0), axis=1)
    return np.exp(lognorm) * mono


def product_state(phi, basis: Space, grid=None, N=None) -> np.ndarray:
    """``phi^{tensor N}`` in the occupation basis.

    ``phi`` are lattice values when ``grid`` is given, else mode amplitudes.
    On a truncated Fock space the state is embedded in sector ``N``.
    """
    c = mode_amplitudes(grid, phi) if grid is not None else np.asarray(phi, dtype=complex)
    if isinstance(basis, SectorBasis):
        return product_coefficients(c, basis)
    if N is None:
        raise ValueError("N is required on a truncated Fock space")
    out = np.zeros(basis.dim, dtype=complex)
    out[basis.sector_slice(N)] = product_coefficients(c, basis.sectors[N])
    return out


def _series(op, v, sign=1.0, max_terms=None):
    """``exp(sign * op) v`` as a terminating power series (``op`` nilpotent on the truncated space)."""
    term = v.copy()
    out = v.copy()
    k = 0
    max_terms = max_terms or v.shape[0] + 1
    while True:
        k += 1
        term = (sign / k) * (op @ term)
        if not np.any(term) or k > max_terms:
            break
        out += term
        if np.linalg.norm(term) < 1e-17 * np.linalg.norm(out):
            break
    return out


def weyl_projected(f, psi: np.ndarray, space: FockBasis) -> np.ndarray:
    """Exact projection of ``W(f) psi`` onto the truncated space.

    Uses ``W(f) = exp(-|f|^2/2) exp(a*(f)) exp(-a(f))``: the right factor only
    lowers particle number and is exact, and the left factor feeds each sector
    from below, so every kept component is exact and the lost norm is the
    true leakage past ``N_max``.
    """
    f = np.asarray(f, dtype=complex)
    n2 = float(np.vdot(f, f).real)
    ad = creation_field(f, space)
    a = annihilation_field(f, space)
    out = _series(a, psi, -1.0)
    out = _series(ad, out, +1.0)
    return np.exp(-0.5 * n2) * out


def weyl_expm(f, psi: np.ndarray, space: FockBasis) -> np.ndarray:
    """``exp(a*(f) - a(f))`` with the generator truncated to the space (exactly unitary there)."""
    f = np.asarray(f, dtype=complex)
    G = creation_field(f, space) - annihilation_field(f, space)
    # exp(G) = exp(-i H t) with H = i G, t = 1
    return evolve_exact(psi, 1j * G, 1.0)


def weyl_apply(f, psi: FockVector, method="expm", check=True) -> FockVector:
    """Apply the Weyl operator ``W(f)`` to a vector on a truncated Fock space.

    ``f`` are mode amplitudes; requires ``|f|^2 <= N_max / 4``.

    ``method="expm"`` exponentiates the truncated generator (exactly unitary;
    ``leaked`` is the weight that reaches the top sector). ``"projected"``
    uses the normal-ordered factorization, whose kept components are exact
    and whose norm loss is the true leakage; it is reliable for vacuum-like
    inputs but cancels badly for large ``|f|`` on populated states.
    """
    space = psi.basis
    if not isinstance(space, FockBasis):
        raise TypeError("Weyl operators act on a truncated Fock space")
    f = np.asarray(f, dtype=complex)
    n2 = float(np.vdot(f, f).real)
    if check and n2 > space.N_max / 4 * (1 + 1e-12):
        raise TruncationRiskError(f"|f|^2 = {n2:.3g} exceeds N_max/4 = {space.N_max / 4:.3g}")
    if method == "projected":
        out = weyl_projected(f, psi.coeffs, space)
        leak = max(psi.norm ** 2 - float(np.vdot(out, out).real), 0.0)
    elif method == "expm":
        out = weyl_expm(f, psi.coeffs, space)
        leak = float(np.sum(np.abs(out[space.sector_slice(space.N_max)]) ** 2))
    else:
        raise ValueError(f"unknown method {method!r}")
    return FockVector(space, out, leaked=psi.leaked + leak)


def coherent_state(f, N_max, method="projected") -> FockVector:
    """``W(f) Omega``; the projected route gives the exact coefficients below ``N_max``."""
    f = np.asarray(f, dtype=complex)
    space = build_fock_basis(len(f), N_max)
    return weyl_apply(f, vacuum(space), method=method)


def coherent_number_stats(f, N_max=30):
    """Mean and variance of the particle number in ``W(f) Omega``."""
    psi = coherent_state(f, N_max)
    p = psi.sector_weights()
    n = np.arange(len(p))
    mean = float(np.sum(n * p))
    var = float(np.sum(n ** 2 * p) - mean ** 2)
    return mean, var


def xi_normalization(N) -> float:
    """``d_N = sqrt(N!) e^{N/2} N^{-N/2}`` via log-gamma."""
    if N == 0:
        return 1.0
    return float(np.exp(0.5 * lgamma(N + 1) + 0.5 * N - 0.5 * N * np.log(N)))


def xi_state(phi, N, N_max=None, margin=None) -> FockVector:
    """``xi_N = d_N W*(sqrt(N) phi) a*(phi)^N / sqrt(N!) Omega`` for unit mode amplitudes ``phi``.

    Components below ``N_max`` are exact; ``N_max`` defaults to ``N + margin``
    with ``margin = 2N``.
    """
    phi = np.asarray(phi, dtype=complex)
    if abs(np.linalg.norm(phi) - 1) > 1e-10:
        raise ValueError("phi must be normalized")
    margin = 2 * N if margin is None else margin
    N_max = N + margin if N_max is None else N_max
    if N_max < N:
        raise TruncationRiskError(f"N_max = {N_max} < N = {N}")
    space = build_fock_basis(len(phi), N_max)
    psi = product_state(phi, space, N=N)
    out = xi_normalization(N) * weyl_projected(-np.sqrt(N) * phi, psi, space)
    return FockVector(space, out, info={"N": N})


def xi_components(xi: FockVector, phi) -> np.ndarray:
    """Scalars ``c_l`` with ``xi|_l = c_l a*(phi)^l Omega``; also records the orthogonal residual."""
    phi = np.asarray(phi, dtype=complex)
    space = xi.basis
    out = np.zeros(len(space.sectors))
    resid = 0.0
    for s in space.sectors:
        unit = product_coefficients(phi, s)  # a*(phi)^l Omega / sqrt(l!)
        comp = xi.sector(s.N)
        c = np.vdot(unit, comp)
        resid = max(resid, float(np.linalg.norm(comp - c * unit)))
        out[s.N] = (c / np.exp(0.5 * lgamma(s.N + 1))).real
    xi.info["orthogonal_residual"] = resid
    return out


def hartree_phase(traj, t, N) -> float:
    """``omega(t;0) = (N/2) int_0^t dtau kappa <|phi|^2, V * |phi|^2>`` by trapezoid over the samples."""
    from ..grid import convolve

    grid, V = traj.grid, traj.potential
    sel = traj.times <= t + 1e-12
    times = traj.times[sel]
    vals = []
    for s in traj.states[sel]:
        rho = np.abs(s) ** 2
        vals.append(traj.kappa * grid.inner(rho, convolve(grid, V, rho)).real)
    if len(times) < 2:
        return 0.0
    return 0.5 * N * float(np.trapezoid(vals, times))


def fluctuation_evolve(phi0, traj, H, t, N, space: FockBasis = None) -> FockVector:
    """``U(t;0) Omega = e^{-i omega} W*(sqrt(N) phi_t) e^{-i H t} W(sqrt(N) phi_0) Omega``.

    ``phi0`` and the trajectory hold lattice values; ``H`` is the many-body
    Hamiltonian on the truncated Fock space. ``leaked`` adds the coherent
    tail cut at ``N_max`` and the top-sector weight after the back shift.
    """
    grid = traj.grid
    space = space or H.basis
    f0 = np.sqrt(N) * mode_amplitudes(grid, phi0)
    ft = np.sqrt(N) * mode_amplitudes(grid, traj.at(t))
    coh = weyl_apply(f0, vacuum(space), method="projected")
    evolved = FockVector(space, evolve_exact(coh.coeffs, H, t), leaked=coh.leaked)
    back = weyl_apply(-ft, evolved, method="expm")
    phase = np.exp(-1j * hartree_phase(traj, t, N))
    return FockVector(space, phase * back.coeffs, leaked=back.leaked, info={"initial_leak": coh.leaked})


def vacuum_two_point(psi: FockVector) -> np.ndarray:
    """``G_xy = <psi, b*_x b_y psi>`` in mode coordinates."""
    space = psi.basis
    M = space.M
    G = np.zeros((M, M), dtype=complex)
    e = np.eye(M)
    lowered = [annihilation_field(e[x], space) @ psi.coeffs for x in range(M)]
    for x in range(M):
        for y in range(M):
            G[x, y] = np.vdot(lowered[x], lowered[y])
    return G


def field_pair(f, g, space, grid=None) -> "sp.csr_matrix":
    """Matrix of ``A(f, g) = a(f) + a*(conj g)``; ``f, g`` are lattice values when ``grid`` is given."""
    if grid is not None:
        f, g = mode_amplitudes(grid, f), mode_amplitudes(grid, g)
    return (annihilation_field(f, space) + creation_field(np.conj(g), space)).tocsr()


def limiting_evolution(traj, t, space: FockBasis, dt, psi0=None) -> FockVector:
    """``U_inf(t;0) psi0`` under the quadratic generator built along the trajectory (Magnus steps)."""
    from ..bogoliubov import build_generator
    from .evolution import evolve_time_dependent
    from .operators import quadratic_generator_matrix

    def generator(s):
        gen = build_generator(traj.at(s), traj.potential, traj.kappa, t=s)
        return quadratic_generator_matrix(gen.D, gen.B, space)

    v = vacuum(space).coeffs if psi0 is None else np.asarray(psi0, dtype=complex)
    out = evolve_time_dependent(generator, v, 0.0, t, dt)
    top = float(np.sum(np.abs(out[space.sector_slice(space.N_max)]) ** 2))
    return FockVector(space, out, leaked=top)
