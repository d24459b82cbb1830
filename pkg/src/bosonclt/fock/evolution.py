"""Exact Schroedinger propagation on occupation bases."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..errors import ToleranceError
from .operators import SectorOperator

DENSE_LIMIT = 2000


def _matrix(H):
    return H.matrix if isinstance(H, SectorOperator) else H


def expm_dense(H, v, t):
    """``exp(-i H t) v`` by Hermitian eigendecomposition."""
    A = _matrix(H)
    A = A.toarray() if sp.issparse(A) else np.asarray(A)
    w, Q = np.linalg.eigh(0.5 * (A + A.conj().T))
    return Q @ (np.exp(-1j * w * t) * (Q.conj().T @ v))


def expm_krylov(H, v, t, *, m=30, tol=1e-12, max_substeps=100000):
    """``exp(-i H t) v`` by Lanczos with adaptive substepping.

    Each substep builds an ``m``-dimensional Krylov space with full
    reorthogonalization and accepts the step when the a posteriori error
    ``beta_m |e_m^T exp(-i tau T) e_1|`` is below ``tol * tau / |t|``.
    """
    A = _matrix(H)
    v = np.asarray(v, dtype=complex)
    nv = np.linalg.norm(v)
    if t == 0 or nv == 0:
        return v.copy()
    dim = v.shape[0]
    m = min(m, dim)
    sign = np.sign(t)
    remaining = abs(t)
    # initial step from a crude norm bound
    anorm = float(abs(A).sum(axis=1).max()) if sp.issparse(A) else float(np.abs(A).sum(axis=1).max())
    tau = min(remaining, 10.0 / max(anorm, 1e-300))
    w = v.copy()
    steps = 0
    errs = []
    while remaining > 0:
        steps += 1
        if steps > max_substeps:
            raise ToleranceError("Krylov propagation did not converge",
                                 {"substeps": steps, "remaining_time": remaining, "last_errors": errs[-5:]})
        beta0 = np.linalg.norm(w)
        Q = np.zeros((dim, m + 1), dtype=complex)
        T = np.zeros((m + 1, m + 1))
        Q[:, 0] = w / beta0
        k_used = m
        breakdown = False
        for j in range(m):
            u = A @ Q[:, j]
            alpha = np.vdot(Q[:, j], u).real
            for _ in range(2):
                u = u - Q[:, : j + 1] @ (Q[:, : j + 1].conj().T @ u)
            T[j, j] = alpha
            beta = np.linalg.norm(u)
            T[j + 1, j] = T[j, j + 1] = beta
            if beta < 1e-13 * max(1.0, abs(alpha)):
                k_used = j + 1
                breakdown = True
                break
            Q[:, j + 1] = u / beta
        tau = min(tau, remaining)
        while True:
            if breakdown:
                Tk = T[:k_used, :k_used]
                y = sla.expm(-1j * sign * tau * Tk)[:, 0]
                err = 0.0
            else:
                Tk = T[:m, :m]
                y = sla.expm(-1j * sign * tau * Tk)[:, 0]
                err = beta0 * T[m, m - 1] * abs(y[-1])
            if err <= tol * (tau / abs(t)) * nv or tau < 1e-14 * abs(t):
                break
            tau *= 0.5
        errs.append(err)
        w = beta0 * (Q[:, : len(y)] @ y)
        remaining -= tau
        if remaining <= 1e-15 * abs(t):
            break
        if err < 0.01 * tol * tau / abs(t) * nv:
            tau *= 2.0
    return w


def evolve_exact(psi0, H, t, method="auto", **kw):
    """``exp(-i H t) psi0``; dense eigendecomposition up to ``DENSE_LIMIT``, Krylov above."""
    A = _matrix(H)
    psi0 = np.asarray(psi0, dtype=complex)
    if method == "auto":
        method = "dense" if A.shape[0] <= DENSE_LIMIT else "krylov"
    if method == "dense":
        out = expm_dense(A, psi0, t)
    elif method == "krylov":
        out = expm_krylov(A, psi0, t, **kw)
    else:
        raise ValueError(f"unknown method {method!r}")
    drift = abs(np.linalg.norm(out) - np.linalg.norm(psi0))
    if drift > 1e-10 * max(1.0, np.linalg.norm(psi0)):
        raise ToleranceError(f"propagation not unitary: norm drift {drift:.3e}", {"method": method})
    return out


def evolve_time_dependent(generator, psi0, t0, t1, dt, method="auto"):
    """Fourth-order Magnus propagation of ``i d/dt psi = H(t) psi``.

    ``generator(t)`` returns the Hermitian operator at time ``t``. Each step
    uses the two Gauss points and the commutator correction.
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    span = t1 - t0
    if span == 0:
        return psi
    n = int(np.ceil(abs(span) / dt - 1e-9))
    h = span / n
    c1, c2 = 0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6
    for k in range(n):
        ta = t0 + k * h
        H1 = _matrix(generator(ta + c1 * h))
        H2 = _matrix(generator(ta + c2 * h))
        heff = 0.5 * (H1 + H2) - 1j * (np.sqrt(3) * h / 12) * (H2 @ H1 - H1 @ H2)
        psi = evolve_exact(psi, heff, h, method=method)
    return psi
