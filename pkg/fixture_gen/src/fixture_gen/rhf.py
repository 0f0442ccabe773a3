"""Restricted Hartree-Fock in the AO basis with DIIS, plus the MO transform.

Orbital phases follow a deterministic convention: the largest-magnitude
coefficient of each canonical MO is made positive (ties broken by the lowest
AO index, which is what argmax returns).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .mdintegrals import ContractedGaussian, eri, kinetic, nuclear, overlap
from .sto3g import ATOMIC_NUMBER, basis_functions

BOHR_PER_ANGSTROM = 1.0 / 0.529177210903


@dataclass
class RhfResult:
    e_total: float
    e_nuc: float
    mo_energies: np.ndarray
    mo_coeff: np.ndarray      # AO x MO
    h_mo: np.ndarray
    eri_mo: np.ndarray        # chemist (pq|rs)
    n_elec: int
    ao_labels: list
    converged: bool


def build_ao_integrals(atoms):
    """atoms: list of (symbol, xyz in angstrom). Returns S, Hcore, ERI, E_nuc."""
    centers = [(sym, np.asarray(xyz, dtype=float) * BOHR_PER_ANGSTROM)
               for sym, xyz in atoms]
    basis = []
    labels = []
    for sym, r in centers:
        funcs = basis_functions(sym, r)
        for lmn, ctr, exps, coefs in funcs:
            basis.append(ContractedGaussian(lmn, ctr, exps, coefs))
            labels.append((sym, lmn))
    n = len(basis)

    s_mat = np.zeros((n, n))
    t_mat = np.zeros((n, n))
    v_mat = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s_mat[i, j] = s_mat[j, i] = overlap(basis[i], basis[j])
            t_mat[i, j] = t_mat[j, i] = kinetic(basis[i], basis[j])
            v = 0.0
            for sym, r in centers:
                v -= ATOMIC_NUMBER[sym] * nuclear(basis[i], basis[j], r)
            v_mat[i, j] = v_mat[j, i] = v

    eri_mat = np.zeros((n, n, n, n))
    # unique (ij) >= (kl) with i >= j, k >= l, expanded by 8-fold symmetry
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if ij < kl:
                        continue
                    val = eri(basis[i], basis[j], basis[k], basis[l])
                    for a, b, c, d in ((i, j, k, l), (j, i, k, l), (i, j, l, k),
                                       (j, i, l, k), (k, l, i, j), (l, k, i, j),
                                       (k, l, j, i), (l, k, j, i)):
                        eri_mat[a, b, c, d] = val

    e_nuc = 0.0
    for a, (sa, ra) in enumerate(centers):
        for sb, rb in centers[a + 1:]:
            e_nuc += ATOMIC_NUMBER[sa] * ATOMIC_NUMBER[sb] / np.linalg.norm(ra - rb)
    return s_mat, t_mat + v_mat, eri_mat, e_nuc, labels


def _fock(hcore, eri_ao, dens):
    j = np.einsum("pqrs,rs->pq", eri_ao, dens, optimize=True)
    k = np.einsum("prqs,rs->pq", eri_ao, dens, optimize=True)
    return hcore + j - 0.5 * k


def _scf_loop(s_mat, hcore, eri_ao, x, nocc, max_cycles, e_tol, grad_tol,
              level_shift=0.0, damping=0.0):
    n = hcore.shape[0]

    def density(fock, c_prev=None):
        f_ortho = x.T @ fock @ x
        if level_shift and c_prev is not None:
            c_occ_ortho = scipy.linalg.solve(x, c_prev[:, :nocc])
            p_virt = np.eye(n) - c_occ_ortho @ c_occ_ortho.T
            f_ortho = f_ortho + level_shift * p_virt
        eps, c_ortho = scipy.linalg.eigh(f_ortho)
        c = x @ c_ortho
        return eps, c, 2.0 * c[:, :nocc] @ c[:, :nocc].T

    eps, c, dens = density(hcore)
    e_old = None
    diis_f, diis_e = [], []
    for cycle in range(max_cycles):
        fock = _fock(hcore, eri_ao, dens)
        grad = fock @ dens @ s_mat - s_mat @ dens @ fock

        diis_f.append(fock.copy())
        diis_e.append((x.T @ grad @ x).ravel())
        if len(diis_f) > 8:
            diis_f.pop(0)
            diis_e.pop(0)
        if len(diis_f) > 1 and not level_shift:
            m = len(diis_f)
            b = -np.ones((m + 1, m + 1))
            b[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    b[i, j] = diis_e[i] @ diis_e[j]
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            coef = scipy.linalg.lstsq(b, rhs, lapack_driver="gelsd")[0][:m]
            if np.all(np.isfinite(coef)):
                fock = sum(ci * fi for ci, fi in zip(coef, diis_f))

        eps, c, dens_new = density(fock, c_prev=c)
        mix = damping if cycle >= 2 else max(damping, 0.5)
        dens = (1.0 - mix) * dens_new + mix * dens

        fock_cur = _fock(hcore, eri_ao, dens)
        e_elec = 0.5 * np.einsum("pq,pq", dens, hcore + fock_cur)
        # the unshifted orbital gradient is the real convergence measure
        grad_true = fock_cur @ dens @ s_mat - s_mat @ dens @ fock_cur
        if (e_old is not None and abs(e_elec - e_old) < e_tol
                and np.max(np.abs(grad_true)) < grad_tol):
            return e_elec, dens, True
        e_old = e_elec
    return e_old, dens, False


def run_rhf(atoms, n_elec, max_cycles=300, e_tol=1e-12, grad_tol=1e-9):
    """Closed-shell SCF; deterministic (core guess, DIIS, shifted fallbacks)."""
    if n_elec % 2:
        raise ValueError("closed-shell RHF needs an even electron count")
    s_mat, hcore, eri_ao, e_nuc, labels = build_ao_integrals(atoms)
    n = s_mat.shape[0]
    nocc = n_elec // 2

    svals, svecs = scipy.linalg.eigh(s_mat)
    x = svecs @ np.diag(svals ** -0.5) @ svecs.T

    converged = False
    for level_shift, damping, cycles in ((0.0, 0.0, max_cycles),
                                         (0.3, 0.3, 600),
                                         (1.0, 0.6, 1500)):
        e_old, dens, converged = _scf_loop(s_mat, hcore, eri_ao, x, nocc, cycles,
                                           e_tol, grad_tol, level_shift, damping)
        if converged:
            break
    if not converged:
        raise RuntimeError(f"SCF failed to converge (all fallbacks exhausted)")

    def density(fock):
        f_ortho = x.T @ fock @ x
        eps, c_ortho = scipy.linalg.eigh(f_ortho)
        c = x @ c_ortho
        return eps, c, 2.0 * c[:, :nocc] @ c[:, :nocc].T

    # final canonical orbitals from the converged Fock matrix
    fock = _fock(hcore, eri_ao, dens)
    eps, c, _ = density(fock)
    for col in range(n):
        lead = np.argmax(np.abs(c[:, col]))
        if c[lead, col] < 0:
            c[:, col] = -c[:, col]

    h_mo = c.T @ hcore @ c
    eri_mo = np.einsum("up,uqrs->pqrs", c, eri_ao, optimize=True)
    eri_mo = np.einsum("vq,pvrs->pqrs", c, eri_mo, optimize=True)
    eri_mo = np.einsum("xr,pqxs->pqrs", c, eri_mo, optimize=True)
    eri_mo = np.einsum("ys,pqry->pqrs", c, eri_mo, optimize=True)

    e_total = float(e_old + e_nuc)
    return RhfResult(e_total=e_total, e_nuc=float(e_nuc), mo_energies=eps,
                     mo_coeff=c, h_mo=h_mo, eri_mo=eri_mo, n_elec=n_elec,
                     ao_labels=labels, converged=True)
