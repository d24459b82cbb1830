"""Exact moments of the fluctuation observable and the Gaussian comparison.

For a one-body observable ``O`` the fluctuation observable on the N-particle
sector is ``O_t = N^{-1/2} (dGamma(O) - N <phi_t, O phi_t>)``; its moments
in the exactly evolved product state are compared with the central Gaussian
moments of variance ``sigma_t^2`` obtained from the Bogoliubov pair.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .bogoliubov import _check_hermitian, check_ttph, im_identity, propagate_theta, symplectic_defects, variance
from .errors import BosonCLTError, DomainError, NumericError
from .fock.basis import SectorBasis, build_sector_basis
from .fock.evolution import evolve_exact
from .fock.operators import SectorOperator, build_hamiltonian, lowering_matrices, second_quantize
from .fock.states import mode_amplitudes, product_state
from .grid import Grid, WaveFunction
from .hartree import hartree_evolve


@dataclass(frozen=True)
class ObservableSpec:
    name: str
    O: np.ndarray
    centered: bool = True

    def __post_init__(self):
        object.__setattr__(self, "O", _check_hermitian(self.O))


def make_observable(grid: Grid, kind: str, **params) -> ObservableSpec:
    """``site``: projector on one lattice site; ``cosine``/``sine``: multiplication by
    ``cos``/``sin(2 pi m x / L)``; ``custom-diagonal``: given real diagonal."""
    x = grid.coords[:, 0]
    if kind == "site":
        d = np.zeros(grid.M)
        d[int(params.get("site", 0))] = 1.0
    elif kind == "cosine":
        d = np.cos(2 * np.pi * float(params.get("mode", 1)) * x / grid.L)
    elif kind == "sine":
        d = np.sin(2 * np.pi * float(params.get("mode", 1)) * x / grid.L)
    elif kind == "custom-diagonal":
        d = np.asarray(params["values"], dtype=float)
    else:
        raise ValueError(f"unknown observable kind {kind!r}")
    return ObservableSpec(kind, np.diag(d).astype(complex))


def _vals(phi):
    return phi.values if isinstance(phi, WaveFunction) else np.asarray(phi, dtype=complex)


def expectation(grid: Grid, O, phi) -> float:
    phi = _vals(phi)
    return float(grid.inner(phi, np.asarray(O) @ phi).real)


def fluctuation_observable(O, phi_t, basis: SectorBasis, grid: Grid, center=None) -> SectorOperator:
    """``N^{-1/2} (dGamma(O) - N c)`` with ``c = <phi_t, O phi_t>`` unless ``center`` is given."""
    O = _check_hermitian(O)
    N = basis.N
    if N < 1:
        raise DomainError("fluctuation observable needs N >= 1")
    c = expectation(grid, O, phi_t) if center is None else float(center)
    dG = second_quantize(O, basis, hermitian=True).matrix
    mat = (dG - N * c * sp.identity(basis.dim, dtype=complex, format="csr")) / np.sqrt(N)
    return SectorOperator(mat, basis, hermitian=True)


def exact_moments(psi, obs, k_max, imag_tol=1e-10) -> np.ndarray:
    """``<psi, O^k psi>`` for ``k = 1..k_max`` by repeated application."""
    if not 1 <= k_max <= 8:
        raise DomainError("k_max must lie in 1..8")
    A = obs.matrix if isinstance(obs, SectorOperator) else obs
    psi = np.asarray(psi, dtype=complex)
    out = np.empty(k_max)
    v = psi
    scale = max(1.0, np.vdot(psi, psi).real)
    for k in range(1, k_max + 1):
        v = A @ v
        m = np.vdot(psi, v)
        if abs(m.imag) > imag_tol * max(scale, abs(m.real)):
            raise NumericError(f"moment k={k} has imaginary part {m.imag:.3e}")
        out[k - 1] = m.real
    return out


def gaussian_moment(sigma2, k) -> float:
    """Central Gaussian moment: ``(k-1)!! sigma^k`` for even ``k``, 0 for odd ``k``."""
    if sigma2 < 0:
        raise DomainError("variance must be nonnegative")
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k % 2:
        return 0.0
    dfact = 1
    for j in range(k - 1, 0, -2):
        dfact *= j
    return float(dfact * sigma2 ** (k // 2))


def reduced_density(psi, basis: SectorBasis, lowering=None, tol=1e-8) -> np.ndarray:
    """One-particle density matrix in mode coordinates, ``gamma_ij = <psi, b*_j b_i psi> / N``."""
    N = basis.N
    psi = np.asarray(psi, dtype=complex)
    lowering = lowering or lowering_matrices(basis)
    low = np.stack([b @ psi for b in lowering], axis=0)  # row i: b_i psi
    gamma = (low @ low.conj().T) / N  # gamma_ij = <b_j psi, b_i psi>
    tr = np.trace(gamma).real
    if abs(tr - 1) > tol:
        raise NumericError(f"reduced density has trace {tr!r}")
    gamma = 0.5 * (gamma + gamma.conj().T)
    w = np.linalg.eigvalsh(gamma)
    if w.min() < -1e-10:
        raise NumericError(f"reduced density has eigenvalue {w.min():.3e}")
    return gamma


def trace_norm_gap(gamma, phi_t, grid: Grid = None) -> float:
    """``Tr |gamma - |phi_t><phi_t||``; ``phi_t`` are lattice values when ``grid`` is given."""
    p = mode_amplitudes(grid, phi_t) if grid is not None else _vals(phi_t)
    diff = np.asarray(gamma) - np.outer(p, p.conj())
    return float(np.sum(np.linalg.svd(diff, compute_uv=False)))


def lln_bound(psi, O, phi_t, eps, basis: SectorBasis, grid: Grid) -> float:
    """Markov bound ``P(|N^{-1} sum_j (O^(j) - <O>)| >= eps) <= E[O_t^2] / (N eps^2)``."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    if np.isinf(eps):
        return 0.0
    obs = fluctuation_observable(O, phi_t, basis, grid)
    m2 = exact_moments(psi, obs, 2)[1]
    return float(m2 / (basis.N * eps ** 2))


def lln_terms(psi, O, phi_t, basis: SectorBasis, grid: Grid):
    """Two-body and one-body parts of ``E[(N^{-1} sum_j Otilde^(j))^2]``.

    Returns ``(pair, single)`` with ``pair = Tr gamma^(2) (Otilde x Otilde)`` and
    ``single = Tr gamma^(1) Otilde^2``; the second moment is
    ``(1 - 1/N) pair + single / N``.
    """
    N = basis.N
    O = _check_hermitian(O)
    Ot = O - expectation(grid, O, phi_t) * np.eye(O.shape[0])
    psi = np.asarray(psi, dtype=complex)
    gamma = reduced_density(psi, basis)
    single = float(np.trace(Ot @ Ot @ gamma).real)
    dG = second_quantize(Ot, basis, hermitian=True).matrix
    dG2 = second_quantize(Ot @ Ot, basis, hermitian=True).matrix
    v = dG @ psi
    two = np.vdot(v, v).real - np.vdot(psi, dG2 @ psi).real
    pair = float(two / (N * (N - 1))) if N > 1 else 0.0
    return pair, single


@dataclass
class MomentReport:
    N: int
    t: float
    records: list  # dicts with k, exact, gaussian, abs_error
    sigma2: float
    trace_gap: float
    diagnostics: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def errors(self) -> np.ndarray:
        return np.array([r["abs_error"] for r in self.records])

    def exact(self) -> np.ndarray:
        return np.array([r["exact"] for r in self.records])

    def rows(self):
        for r in self.records:
            yield (self.N, self.t, r["k"], r["exact"], r["gaussian"], r["abs_error"], self.sigma2, self.trace_gap)

    def to_dict(self) -> dict:
        return {"N": self.N, "t": self.t, "sigma2": self.sigma2, "trace_gap": self.trace_gap,
                "records": self.records, "diagnostics": self.diagnostics, "provenance": self.provenance}


@dataclass
class Scenario:
    """Everything in a run that does not depend on N."""

    grid: Grid
    potential: object
    kappa: float
    phi0: np.ndarray
    observable: ObservableSpec
    T: float
    dt: float
    trajectory: object = None
    pair: object = None
    sigma2: float = None
    diagnostics: dict = field(default_factory=dict)


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except BosonCLTError as exc:
        exc.stage = name
        raise


def prepare_scenario(cfg) -> Scenario:
    """Hartree trajectory, Bogoliubov pair and ``sigma_T^2`` for a configuration."""
    from .config import build_grid, build_initial, build_observable, build_potential

    grid = build_grid(cfg)
    V = build_potential(cfg, grid)
    phi0 = build_initial(cfg, grid)
    obs = build_observable(cfg, grid)
    sc = Scenario(grid, V, float(cfg.kappa), phi0, obs, float(cfg.T), float(cfg.dt))
    # the Bogoliubov RK4 stages sit on the half steps of the trajectory
    traj = _stage("hartree", hartree_evolve, phi0, sc.T, sc.dt / 2, V, sc.kappa)
    sc.trajectory = traj
    norms = traj.norms()
    energies = traj.energies()
    sc.diagnostics["mass_drift"] = float(np.max(np.abs(norms - 1)))
    sc.diagnostics["energy_drift"] = float(np.max(np.abs(energies - energies[0])) / max(1e-300, abs(energies[0])))
    pair = _stage("bogoliubov", propagate_theta, traj, sc.dt, defect_ceiling=cfg.defect_ceiling)
    sc.pair = pair
    phi_T = traj.states[-1]
    sc.sigma2 = _stage("bogoliubov", variance, pair, obs.O, phi_T, phi0)
    sc.diagnostics.update({f"defect_{k}": v for k, v in symplectic_defects(pair).items()})
    sc.diagnostics["ttph"] = check_ttph(pair, phi_T, phi0)
    sc.diagnostics["im_identity"] = abs(im_identity(pair, obs.O, phi_T, phi0))
    return sc


def run_point(sc: Scenario, N: int, k_max: int, centering="phi", max_dim=2_000_000, imag_tol=1e-10) -> MomentReport:
    """Exact N-particle evolution and moment comparison at the final time."""
    grid = sc.grid
    started = time.time()
    basis = _stage("fock", build_sector_basis, grid.M, N, max_dim)
    psi0 = product_state(sc.phi0, basis, grid)
    if sc.T > 0:
        H = _stage("fock", build_hamiltonian, grid, sc.potential, sc.kappa, basis)
        psi = _stage("fock", evolve_exact, psi0, H, sc.T)
    else:
        psi = psi0
    phi_T = sc.trajectory.states[-1]
    gamma = _stage("clt", reduced_density, psi, basis)
    center = None
    if centering == "gamma":
        # Tr(O gamma); O has the same matrix in mode coordinates
        center = float(np.trace(sc.observable.O @ gamma).real)
    obs = _stage("clt", fluctuation_observable, sc.observable.O, phi_T, basis, grid, center)
    moments = _stage("clt", exact_moments, psi, obs, k_max, imag_tol)
    records = []
    for k in range(1, k_max + 1):
        g = gaussian_moment(sc.sigma2, k)
        records.append({"k": k, "exact": float(moments[k - 1]), "gaussian": g,
                        "abs_error": float(abs(moments[k - 1] - g))})
    shift = np.sqrt(N) * (float(np.trace(sc.observable.O @ gamma).real) - expectation(grid, sc.observable.O, phi_T))
    diag = {"sector_dim": basis.dim, "norm_drift": float(abs(np.linalg.norm(psi) - 1)), "leaked": 0.0,
            "centering": centering, "centering_shift": float(shift)}
    prov = {"started": started, "finished": time.time()}
    return MomentReport(N, sc.T, records, sc.sigma2, trace_norm_gap(gamma, phi_T, grid), diag, prov)


def clt_run(cfg, scenario: Scenario = None) -> list:
    """Full sweep over ``cfg.N_sweep``; reports are ordered by N."""
    from . import __version__
    from .kernels import BACKEND

    sc = scenario or prepare_scenario(cfg)
    reports = []
    for N in sorted(int(n) for n in cfg.N_sweep):
        rep = run_point(sc, N, cfg.k_max, cfg.centering, cfg.max_dim, cfg.moment_imag)
        rep.diagnostics.update({k: v for k, v in sc.diagnostics.items()})
        rep.provenance.update({"config_sha256": cfg.digest(), "version": __version__, "backend": BACKEND})
        reports.append(rep)
    return reports


def single_particle_variance(grid: Grid, O, phi) -> float:
    """``||O phi||^2 - <phi, O phi>^2``."""
    phi = _vals(phi)
    h = np.asarray(O) @ phi
    return float(grid.inner(h, h).real - grid.inner(phi, h).real ** 2)


__all__ = [
    "ObservableSpec", "make_observable", "fluctuation_observable", "exact_moments", "gaussian_moment",
    "reduced_density", "trace_norm_gap", "lln_bound", "lln_terms", "MomentReport", "Scenario",
    "prepare_scenario", "run_point", "clt_run", "single_particle_variance",
]
