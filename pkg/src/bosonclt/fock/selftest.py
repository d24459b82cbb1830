"""Operator-algebra checks on small truncated Fock spaces."""
from __future__ import annotations

from math import lgamma

import numpy as np

from ..grid import Grid, make_potential
from .basis import build_fock_basis, build_sector_basis
from .evolution import evolve_exact, expm_dense, expm_krylov
from .operators import (
    annihilate_matrix,
    annihilation_field,
    build_hamiltonian,
    commutator_norm,
    create_matrix,
    number_operator,
)
from .states import FockVector, coherent_number_stats, coherent_state, weyl_apply


def ccr_defect(space) -> float:
    """``max |[b_i, b*_j] - delta_ij|`` on the states with ``n <= N_max - 1``."""
    guard = np.flatnonzero(space.number_diagonal <= space.N_max - 1)
    worst = 0.0
    for i in range(space.M):
        a = annihilate_matrix(i, space)
        for j in range(space.M):
            ad = create_matrix(j, space)
            c = (a @ ad - ad @ a).toarray()[np.ix_(guard, guard)]
            if i == j:
                c -= np.eye(len(guard))
            worst = max(worst, float(np.abs(c).max()))
    return worst


def random_state(space, rng, n_below=None) -> np.ndarray:
    v = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    if n_below is not None:
        v[space.number_diagonal > n_below] = 0
    return v / np.linalg.norm(v)


def weyl_shift_residual(f, g, psi, space) -> float:
    """``||W*(f) a(g) W(f) psi - (a(g) psi + <g, f> psi)||``."""
    Wpsi = weyl_apply(f, FockVector(space, psi), check=False)
    ag = annihilation_field(g, space)
    back = weyl_apply(-np.asarray(f), FockVector(space, ag @ Wpsi.coeffs), check=False)
    target = ag @ psi + np.vdot(g, f) * psi
    return float(np.linalg.norm(back.coeffs - target))


def bound_violation(space, rng, trials=200) -> float:
    """Largest ``||a(f) psi|| - ||f|| ||N^{1/2} psi||`` over random pairs; nonpositive when the bound holds."""
    sqrtN = np.sqrt(space.number_diagonal)
    worst = -np.inf
    for _ in range(trials):
        f = rng.normal(size=space.M) + 1j * rng.normal(size=space.M)
        psi = random_state(space, rng)
        lhs = np.linalg.norm(annihilation_field(f, space) @ psi)
        rhs = np.linalg.norm(f) * np.linalg.norm(sqrtN * psi)
        worst = max(worst, lhs - rhs)
    return float(worst)


def selftest(seed=0) -> list:
    rng = np.random.default_rng(seed)
    rows = []
    space = build_fock_basis(3, 6)
    err = ccr_defect(space)
    rows.append(("CCR on guarded subspace", err, 1e-12, err <= 1e-12))

    viol = bound_violation(space, rng)
    rows.append(("a(f) bounded by N^1/2", max(viol, 0.0), 1e-12, viol <= 1e-12))

    big = build_fock_basis(2, 30)
    f = np.array([0.5, -0.3 + 0.2j])
    g = np.array([0.1 + 0.7j, 0.4])
    res = max(weyl_shift_residual(f, g, random_state(big, rng, n_below=4), big) for _ in range(5))
    rows.append(("Weyl shift relation", res, 1e-6, res <= 1e-6))

    f1 = np.array([0.6, 0.8j])
    mean, var = coherent_number_stats(f1, 30)
    err = max(abs(mean - 1), abs(var - 1))
    rows.append(("coherent state Poisson statistics", err, 1e-8, err <= 1e-8))

    psi = coherent_state(f1, 30)
    p = psi.sector_weights()
    n = np.arange(len(p))
    lam = float(np.vdot(f1, f1).real)
    poisson = np.exp(-lam + n * np.log(lam) - np.array([lgamma(k + 1) for k in n]))
    err = float(np.abs(p - poisson).max())
    rows.append(("coherent sector probabilities", err, 1e-12, err <= 1e-12))

    grid = Grid(4, 2 * np.pi)
    V = make_potential(grid, "gaussian", strength=1.0, width=1.0)
    sector = build_sector_basis(4, 5)
    H = build_hamiltonian(grid, V, 1.0, sector)
    v = random_state(sector, rng)
    err = float(np.linalg.norm(expm_krylov(H.matrix, v, 0.7) - expm_dense(H.matrix, v, 0.7)))
    rows.append(("Krylov vs dense exponential", err, 1e-9, err <= 1e-9))

    err = float(np.linalg.norm(evolve_exact(evolve_exact(v, H, 0.7), H, -0.7) - v))
    rows.append(("evolution reversibility", err, 1e-9, err <= 1e-9))

    fock = build_fock_basis(4, 4)
    Hf = build_hamiltonian(grid, V, 1.0, fock, N=4)
    err = commutator_norm(Hf, number_operator(fock))
    rows.append(("[H, N] = 0", err, 1e-12, err <= 1e-12))
    return rows
