"""Orbital optimization: analytic gradient/Hessian from measured RDMs and a
level-shifted, step-capped Newton-Raphson update.

The energy as a function of the packed rotation parameters kappa (strict
lower triangle of the antisymmetric generator K, p > q row-major) is
E(kappa) = <Psi| exp(-K) H exp(K) |Psi> with the state held fixed; gradients
and Hessians are therefore derivatives of the integral transformation alone,
contracted with the state's spinless RDMs measured at kappa = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .integrals import (KappaMatrix, MolecularSystem, build_seniority_zero,
                        exp_antisymmetric, kappa_pairs, n_kappa,
                        rotate_integrals)


@dataclass
class OrbitalOptConfig:
    level_shift: float = 1e-4   # hartree; floor on the shifted Hessian spectrum
    kappa_cap: float = 0.25     # rad; infinity-norm step cap


@dataclass
class OrbitalStepReport:
    omega: np.ndarray
    q_mat: np.ndarray
    kappa: KappaMatrix
    level_shift: float
    predicted_de: float


def _apply_generator_2(t, p, q):
    """Derivative of C^T t C along the generator E_pq - E_qp, at C = I."""
    out = np.zeros_like(t)
    out[q, :] += t[p, :]
    out[p, :] -= t[q, :]
    out[:, q] += t[:, p]
    out[:, p] -= t[:, q]
    return out


def _apply_generator_4(t, p, q):
    """Same derivative for the four-index transform of (pq|rs)."""
    out = np.zeros_like(t)
    out[q, :, :, :] += t[p, :, :, :]
    out[p, :, :, :] -= t[q, :, :, :]
    out[:, q, :, :] += t[:, p, :, :]
    out[:, p, :, :] -= t[:, q, :, :]
    out[:, :, q, :] += t[:, :, p, :]
    out[:, :, p, :] -= t[:, :, q, :]
    out[:, :, :, q] += t[:, :, :, p]
    out[:, :, :, p] -= t[:, :, :, q]
    return out


def _effective_gamma2(rdms):
    """Fold the g-matrix one-electron correction into the 2-RDM tensor.

    With gamma2eff[p, q, r, s] = gamma2[p, q, r, s] - delta_qr gamma1_ps / 2
    the energy is e_const + <h, gamma1> + <eri, gamma2eff>, which makes the
    whole kappa dependence live in the integral transforms.
    """
    n = rdms.n_orb
    g2 = rdms.gamma2.copy()
    corr = -0.5 * np.einsum("qr,ps->pqrs", np.eye(n), rdms.gamma1)
    return g2 + corr


def orbital_gradient(rdms, sys):
    """Packed orbital gradient (hartree/rad) at the kappa = 0 expansion point.

    Implements the permutation-antisymmetrized contraction of g with the
    1-RDM plus the four two-electron contractions of (pq|rs) with the
    product-form 2-RDM.
    """
    n = sys.n_orb
    if rdms.n_orb != n:
        raise ValueError("RDM / system dimension mismatch")
    g = sys.h - 0.5 * np.einsum("prrq->pq", sys.eri)
    gam1, g2 = rdms.gamma1, rdms.gamma2
    eri = sys.eri

    # the four two-electron contractions pair one integral index with the
    # matching RDM slot; the free index q replaces p (slot-ordered reading,
    # pinned by the finite-difference oracle)
    w = np.einsum("up,uq->pq", g, gam1)
    w -= np.einsum("qu,pu->pq", g, gam1)
    w += np.einsum("uvtp,uvtq->pq", eri, g2, optimize=True)
    w += np.einsum("uptv,uqtv->pq", eri, g2, optimize=True)
    w -= np.einsum("uvqt,uvpt->pq", eri, g2, optimize=True)
    w -= np.einsum("qvtu,pvtu->pq", eri, g2, optimize=True)
    w = w - w.T
    return np.array([w[p, q] for p, q in kappa_pairs(n)])


def _derivative_rows(rdms, sys):
    """First-derivative tensors of (h, eri) along every packed generator."""
    n = sys.n_orb
    pairs = kappa_pairs(n)
    g2eff = _effective_gamma2(rdms)
    h_rows = np.stack([_apply_generator_2(sys.h, p, q).ravel() for p, q in pairs]) \
        if pairs else np.zeros((0, n * n))
    e_rows = np.stack([_apply_generator_4(sys.eri, p, q).ravel() for p, q in pairs]) \
        if pairs else np.zeros((0, n ** 4))
    g1_rows = np.stack([_apply_generator_2(rdms.gamma1, p, q).ravel() for p, q in pairs]) \
        if pairs else np.zeros((0, n * n))
    g2_rows = np.stack([_apply_generator_4(g2eff, p, q).ravel() for p, q in pairs]) \
        if pairs else np.zeros((0, n ** 4))
    return h_rows, e_rows, g1_rows, g2_rows, g2eff


def orbital_gradient_transform(rdms, sys):
    """Gradient via the derivative-of-transform route (cross-check path)."""
    h_rows, e_rows, _, _, g2eff = _derivative_rows(rdms, sys)
    return h_rows @ rdms.gamma1.ravel() + e_rows @ g2eff.ravel()


def orbital_hessian(rdms, sys):
    """Packed d x d orbital Hessian at kappa = 0.

    Computed as the exact second derivative of the integral similarity
    transform contracted with the fixed RDMs; symmetric by construction and
    certified against finite differences of the gradient.
    """
    n = sys.n_orb
    if rdms.n_orb != n:
        raise ValueError("RDM / system dimension mismatch")
    h_rows, e_rows, g1_rows, g2_rows, _ = _derivative_rows(rdms, sys)
    q = h_rows @ g1_rows.T + e_rows @ g2_rows.T
    return -0.5 * (q + q.T)


def newton_step(omega, q_mat, cfg):
    """Level-shifted Newton step: solve (Q + lam I) kappa = -omega, cap it.

    lam = max(0, level_shift - lambda_min(Q)) keeps the shifted Hessian
    positive definite, guaranteeing a descent direction; on a (near-)singular
    solve the shift escalates tenfold up to three times.
    """
    omega = np.asarray(omega, dtype=float)
    d = len(omega)
    n_orb = int(round((1 + np.sqrt(1 + 8 * d)) / 2))
    if n_kappa(n_orb) != d:
        raise ValueError(f"gradient length {d} is not a triangular number")
    if d == 0:
        return KappaMatrix(np.zeros((n_orb, n_orb))), 0.0
    q_mat = np.asarray(q_mat, dtype=float)
    if np.max(np.abs(q_mat - q_mat.T)) > 1e-8:
        raise ValueError("Hessian must be symmetric")
    q_sym = 0.5 * (q_mat + q_mat.T)

    lam_min = float(scipy.linalg.eigvalsh(q_sym)[0])
    lam = max(0.0, cfg.level_shift - lam_min)
    for attempt in range(4):
        try:
            kappa = scipy.linalg.solve(q_sym + lam * np.eye(d), -omega,
                                       assume_a="sym")
        except scipy.linalg.LinAlgError:
            kappa = None
        if kappa is not None and np.all(np.isfinite(kappa)):
            break
        if attempt == 3:
            raise RuntimeError("Newton solve failed after level-shift escalation")
        lam = max(lam, cfg.level_shift) * 10.0

    step_norm = np.max(np.abs(kappa)) if d else 0.0
    if step_norm > cfg.kappa_cap:
        kappa = kappa * (cfg.kappa_cap / step_norm)
    return KappaMatrix.from_vector(kappa, n_orb), lam


def step_candidates(omega, q_mat, cfg, neg_tol=1e-8):
    """Candidate orbital steps: the Newton step, plus +-cap moves along the
    most negative Hessian eigenvector when Q is indefinite.

    At symmetry-adapted orbitals the gradient along symmetry-breaking
    (orbital-localizing) directions vanishes identically, so bare NR sits on
    a saddle; eigenvector following is what lets the optimizer reach the
    lower, localized solutions at stretched geometries. Callers evaluate the
    trial energies and keep the best candidate.
    """
    omega = np.asarray(omega, dtype=float)
    d = len(omega)
    n_orb = int(round((1 + np.sqrt(1 + 8 * d)) / 2))
    kappa, lam = newton_step(omega, q_mat, cfg)
    candidates = [kappa]
    if d:
        q_sym = 0.5 * (np.asarray(q_mat) + np.asarray(q_mat).T)
        evals, evecs = scipy.linalg.eigh(q_sym)
        if evals[0] < -neg_tol:
            v = evecs[:, 0] * cfg.kappa_cap
            candidates.append(KappaMatrix.from_vector(v, n_orb))
            candidates.append(KappaMatrix.from_vector(-v, n_orb))
    return candidates


def min_hessian_eigenvalue(q_mat):
    q_mat = np.asarray(q_mat, dtype=float)
    if q_mat.size == 0:
        return 0.0
    return float(scipy.linalg.eigvalsh(0.5 * (q_mat + q_mat.T))[0])


def oo_iteration(sys, rdms, cfg=None):
    """One measure-rotate-reset orbital step.

    Returns the system with integrals rotated by exp(K) and a report; the
    rotation parameters are absorbed into the integrals, so kappa never
    enters any circuit.
    """
    cfg = cfg or OrbitalOptConfig()
    omega = orbital_gradient(rdms, sys)
    q_mat = orbital_hessian(rdms, sys)
    kappa, lam = newton_step(omega, q_mat, cfg)
    kv = kappa.to_vector()
    predicted = float(omega @ kv + 0.5 * kv @ q_mat @ kv)
    rotated = rotate_integrals(sys, exp_antisymmetric(kappa))
    report = OrbitalStepReport(omega=omega, q_mat=q_mat, kappa=kappa,
                               level_shift=lam, predicted_de=predicted)
    return rotated, report
