"""Brute-force references: dense DOCI, small FCI, direct fermionic RDMs, and
finite-difference derivative checks.

Everything here is deliberately independent of the measurement/estimator
code paths: pair-space Hamiltonians are built from occupation-number
formulas on bitstrings, FCI uses Slater-Condon rules over determinants, and
the RDM oracle applies second-quantized operators in the full spin-orbital
Fock space with explicit fermionic signs.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np
import scipy.linalg

from .estimator import RdmSet, SpinlessRdms, assemble_spinless_rdms
from .integrals import (MolecularSystem, build_seniority_zero,
                        exp_antisymmetric, KappaMatrix, kappa_pairs,
                        rotate_integrals)
from .orbital_opt import (OrbitalOptConfig, min_hessian_eigenvalue,
                          newton_step, orbital_gradient, orbital_hessian,
                          step_candidates)

DEFAULT_PAIR_BASIS_LIMIT = 10_000
DEFAULT_FCI_LIMIT = 100_000


# ---------------------------------------------------------------------------
# Pair (seniority-zero) sector
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairBasis:
    """All n_orb-bit occupation strings with fixed pair count, as integers."""

    n_orb: int
    n_pairs: int

    @property
    def states(self):
        if not hasattr(self, "_states"):
            states = sorted(sum(1 << p for p in occ)
                            for occ in combinations(range(self.n_orb), self.n_pairs))
            object.__setattr__(self, "_states", tuple(states))
            object.__setattr__(self, "_index", {b: i for i, b in enumerate(states)})
        return self._states

    @property
    def size(self):
        return comb(self.n_orb, self.n_pairs)

    def index_of(self, bits):
        self.states
        return self._index[bits]


def pair_hamiltonian_dense(hsz, n_pairs, limit=DEFAULT_PAIR_BASIS_LIMIT):
    """Dense pair-space Hamiltonian (includes e_const on the diagonal).

    Diagonal from the occupation-number form of the pair-conserving H,
    off-diagonal pair hops from w_mat. This is a second, independent coding
    of the same physics as the three-basis estimator.
    """
    n = hsz.n_orb
    basis = PairBasis(n, n_pairs)
    if basis.size > limit:
        raise ValueError(f"pair basis too large: {basis.size} > {limit}")
    states = basis.states
    g_diag = np.diag(hsz.g)
    occ_of = {b: [p for p in range(n) if (b >> p) & 1] for b in states}

    ham = np.zeros((basis.size, basis.size))
    for i, b in enumerate(states):
        occ = occ_of[b]
        e = hsz.e_const + 2.0 * sum(g_diag[p] for p in occ)
        for p in occ:
            for q in occ:
                e += 2.0 * hsz.j_mat[p, q]
            for q in range(n):
                if q != p and not (b >> q) & 1:
                    e += hsz.k_mat[p, q]
        ham[i, i] = e
        for q in occ:
            for p in range(n):
                if (b >> p) & 1:
                    continue
                b2 = (b & ~(1 << q)) | (1 << p)
                ham[basis.index_of(b2), i] = hsz.w_mat[p, q]
    return ham, basis


def doci_ground_state(hsz, n_pairs, limit=DEFAULT_PAIR_BASIS_LIMIT):
    """Lowest eigenpair of the pair-space Hamiltonian."""
    ham, basis = pair_hamiltonian_dense(hsz, n_pairs, limit=limit)
    vals, vecs = scipy.linalg.eigh(ham)
    return float(vals[0]), vecs[:, 0], basis


def statevector_pair_component(state, n_pairs=None, tol=1e-8):
    """Project a qubit statevector onto the fixed-pair-count sector.

    Returns (coefficient vector over PairBasis, basis). Raises if more than
    `tol` of the amplitude norm lies outside the sector.
    """
    n = state.n_qubits
    amps = state.amplitudes
    weights = np.array([bin(i).count("1") for i in range(len(amps))])
    if n_pairs is None:
        probs = np.abs(amps) ** 2
        n_pairs = int(np.argmax(np.bincount(weights, weights=probs, minlength=n + 1)))
    basis = PairBasis(n, n_pairs)
    vec = np.array([amps[b] for b in basis.states])
    outside = np.sqrt(max(0.0, 1.0 - float(np.sum(np.abs(vec) ** 2))))
    if outside > tol:
        raise ValueError(f"state leaves the pair sector (residual {outside:.2e})")
    return vec, basis


def pair_space_energy(hsz, state, n_pairs=None):
    """<state|H|state> by dense pair-space matrix (the estimator's oracle)."""
    vec, basis = statevector_pair_component(state, n_pairs)
    ham, _ = pair_hamiltonian_dense(hsz, basis.n_pairs)
    return float(np.real(np.vdot(vec, ham @ vec)))


def pair_vector_rdms(vec, basis):
    """RdmSet of a pair-basis coefficient vector (zero statistical error)."""
    n = basis.n_orb
    states = basis.states
    prob = np.abs(np.asarray(vec)) ** 2
    bits = np.array([[(b >> p) & 1 for p in range(n)] for b in states], dtype=float)

    z = 2.0 * prob @ bits
    p11 = (bits * prob[:, None]).T @ bits
    gam = 2.0 * p11
    delta = p11.copy()
    np.fill_diagonal(gam, z)
    np.fill_diagonal(delta, 0.5 * z)

    phop = np.zeros((n, n))
    for i, b in enumerate(states):
        for q in range(n):
            if not (b >> q) & 1:
                continue
            for p in range(n):
                if (b >> p) & 1:
                    continue
                b2 = (b & ~(1 << q)) | (1 << p)
                phop[p, q] += np.real(np.conj(vec[basis.index_of(b2)]) * vec[i])
    phop = 0.5 * (phop + phop.T)
    return RdmSet(z=z, gam=gam, delta=delta, phop=phop)


# ---------------------------------------------------------------------------
# Full Fock-space brute force (spin orbitals 0..n-1 alpha, n..2n-1 beta)
# ---------------------------------------------------------------------------

def _popcount_below(idx, s):
    mask = (1 << s) - 1
    return np.bitwise_count(np.asarray(idx, dtype=np.uint64) & mask).astype(np.int64)


def apply_annihilation(vec, s):
    """a_s on a dense Fock vector with |occ> ordered ascending in creation."""
    dim = len(vec)
    idx = np.arange(dim, dtype=np.int64)
    src = idx[((idx >> s) & 1) == 1]
    out = np.zeros_like(vec)
    if len(src):
        sign = 1.0 - 2.0 * (_popcount_below(src, s) % 2)
        out[src & ~(1 << s)] = sign * vec[src]
    return out


def apply_creation(vec, s):
    """a+_s on a dense Fock vector."""
    dim = len(vec)
    idx = np.arange(dim, dtype=np.int64)
    src = idx[((idx >> s) & 1) == 0]
    out = np.zeros_like(vec)
    if len(src):
        sign = 1.0 - 2.0 * (_popcount_below(src, s) % 2)
        out[src | (1 << s)] = sign * vec[src]
    return out


def fock_hamiltonian(sys):
    """Dense second-quantized H over the full 4^n_orb Fock space (tiny n only)."""
    n = sys.n_orb
    if n > 5:
        raise ValueError("full Fock-space construction limited to n_orb <= 5")
    dim = 4 ** n
    ham = np.zeros((dim, dim))

    def spin_orbs(p):
        return (p, n + p)

    for col in range(dim):
        vec = np.zeros(dim)
        vec[col] = 1.0
        acc = np.zeros(dim)
        for p in range(n):
            for q in range(n):
                if sys.h[p, q] == 0.0:
                    continue
                for sp, sq in zip(spin_orbs(p), spin_orbs(q)):
                    acc += sys.h[p, q] * apply_creation(apply_annihilation(vec, sq), sp)
        for p in range(n):
            for q in range(n):
                for r in range(n):
                    for s_ in range(n):
                        coef = sys.eri[p, q, r, s_]
                        if coef == 0.0:
                            continue
                        for (sp, sq), (sr, ss) in (
                            ((p, q), (r, s_)),
                            ((p, q), (n + r, n + s_)),
                            ((n + p, n + q), (r, s_)),
                            ((n + p, n + q), (n + r, n + s_)),
                        ):
                            # (1/2) a+_p a+_r a_s a_q summed over both spins
                            t = apply_annihilation(vec, sq)
                            t = apply_annihilation(t, ss)
                            t = apply_creation(t, sr)
                            t = apply_creation(t, sp)
                            acc += 0.5 * coef * t
        ham[:, col] = acc
    return ham + sys.e_const * np.eye(dim)


def fock_sector_indices(n_orb, n_alpha, n_beta, frozen=()):
    """Fock-space indices with the given particle numbers (frozen forced occupied)."""
    dim = 4 ** n_orb
    idx = np.arange(dim, dtype=np.int64)
    amask = (1 << n_orb) - 1
    a_cnt = np.bitwise_count((idx & amask).astype(np.uint64)).astype(int)
    b_cnt = np.bitwise_count((idx >> n_orb).astype(np.uint64)).astype(int)
    keep = (a_cnt == n_alpha) & (b_cnt == n_beta)
    for f in frozen:
        keep &= ((idx >> f) & 1).astype(bool) & ((idx >> (n_orb + f)) & 1).astype(bool)
    return idx[keep]


def fock_ground_state(sys, n_alpha, n_beta, frozen=()):
    """Exact ground energy by diagonalizing H in one particle-number sector."""
    ham = fock_hamiltonian(sys)
    sector = fock_sector_indices(sys.n_orb, n_alpha, n_beta, frozen)
    sub = ham[np.ix_(sector, sector)]
    return float(scipy.linalg.eigvalsh(sub)[0])


def _pair_state_to_fock(bits, n_orb):
    """(index, sign) of prod_p d+_p |vac> for an ascending pair bitstring."""
    idx = 0
    sign = 1.0
    for p in range(n_orb):
        if not (bits >> p) & 1:
            continue
        for s in (n_orb + p, p):  # d+_p = a+_pa a+_pb, rightmost first
            below = bin(idx & ((1 << s) - 1)).count("1")
            sign *= -1.0 if below % 2 else 1.0
            idx |= 1 << s
    return idx, sign


def rdm_oracle(state, n_orb=None):
    """Spinless 1-/2-RDMs by direct fermionic operator application.

    The qubit statevector is lifted to the spin-orbital Fock space (qubit p
    occupied -> both spin orbitals of p occupied) and every RDM element is
    evaluated from its second-quantized definition. Independent of the
    measurement-based assembly; used to certify it.
    """
    n = n_orb if n_orb is not None else state.n_qubits
    if n != state.n_qubits:
        raise ValueError("n_orb must match the register size")
    if n > 7:
        raise ValueError("rdm_oracle limited to n_orb <= 7")
    statevector_pair_component(state)  # raises if outside the pair sector

    dim = 4 ** n
    psi = np.zeros(dim, dtype=complex)
    for b, amp in enumerate(state.amplitudes):
        if amp == 0.0:
            continue
        idx, sign = _pair_state_to_fock(b, n)
        psi[idx] = sign * amp

    def one_body(sp, sq, vec):
        return apply_creation(apply_annihilation(vec, sq), sp)

    gamma1 = np.zeros((n, n))
    for p in range(n):
        for q in range(n):
            val = 0.0
            for off in (0, n):
                val += np.vdot(psi, one_body(off + p, off + q, psi)).real
            gamma1[p, q] = val

    gamma2 = np.zeros((n, n, n, n))
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s_ in range(n):
                    val = 0.0
                    # (1/2)(aa + bb) + ab, as products of one-body operators
                    for w, (o1, o2) in ((0.5, (0, 0)), (0.5, (n, n)), (1.0, (0, n))):
                        t = one_body(o2 + r, o2 + s_, psi)
                        t = one_body(o1 + p, o1 + q, t)
                        val += w * np.vdot(psi, t).real
                    gamma2[p, q, r, s_] = val
    return SpinlessRdms(gamma1=gamma1, gamma2=gamma2)


# ---------------------------------------------------------------------------
# FCI by Slater-Condon rules
# ---------------------------------------------------------------------------

def _excitation_sign(string, i, a):
    """Sign of a+_a a_i acting on an occupation string (i occupied, a empty)."""
    lo, hi = (i, a) if i < a else (a, i)
    mask = ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
    return -1.0 if bin(string & mask).count("1") % 2 else 1.0


def _single_element(sys, occ_same, occ_other, i, a):
    val = sys.h[i, a]
    for k in occ_same:
        val += sys.eri[i, a, k, k] - sys.eri[i, k, k, a]
    for k in occ_other:
        val += sys.eri[i, a, k, k]
    return val


def _diag_element(sys, occ_a, occ_b):
    e = 0.0
    for i in occ_a:
        e += sys.h[i, i]
    for i in occ_b:
        e += sys.h[i, i]
    for occ in (occ_a, occ_b):
        for i in occ:
            for j in occ:
                e += 0.5 * (sys.eri[i, i, j, j] - sys.eri[i, j, j, i])
    for i in occ_a:
        for j in occ_b:
            e += sys.eri[i, i, j, j]
    return e


def fci_ground_state(sys, n_alpha=None, n_beta=None, frozen_cis=(),
                     max_dim=DEFAULT_FCI_LIMIT):
    """Dense FCI ground energy (includes e_const).

    Determinants are alpha/beta occupation-string pairs; matrix elements
    follow the Slater-Condon rules. `frozen_cis` restricts both strings to
    contain the listed orbitals (constrained CI used by the frozen-core
    exactness checks). Refuses spaces larger than max_dim.
    """
    n = sys.n_orb
    if n_alpha is None:
        n_alpha = sys.n_elec // 2
    if n_beta is None:
        n_beta = sys.n_elec - n_alpha

    frozen_mask = sum(1 << f for f in frozen_cis)

    def strings(k):
        out = []
        for occ in combinations(range(n), k):
            st = sum(1 << p for p in occ)
            if st & frozen_mask == frozen_mask:
                out.append(st)
        return out

    sa, sb = strings(n_alpha), strings(n_beta)
    dim = len(sa) * len(sb)
    if dim == 0:
        raise ValueError("empty determinant space")
    if dim > max_dim:
        raise ValueError(f"FCI space too large: {dim} > {max_dim}")

    occ_lists = {st: [p for p in range(n) if (st >> p) & 1] for st in set(sa) | set(sb)}

    # single and double excitation tables within one spin channel
    def excitations(strs):
        singles = {}   # (I, J) -> (i, a, sign)
        doubles = {}   # (I, J) -> value-ready ((i, j), (a, b), sign)
        index = {st: k for k, st in enumerate(strs)}
        for st in strs:
            occ = occ_lists[st]
            empty = [p for p in range(n) if not (st >> p) & 1]
            for i in occ:
                for a in empty:
                    st2 = (st & ~(1 << i)) | (1 << a)
                    if st2 in index:
                        singles[(index[st], index[st2])] = (i, a, _excitation_sign(st, i, a))
            for ii, i in enumerate(occ):
                for j in occ[ii + 1:]:
                    for ai, a in enumerate(empty):
                        for b in empty[ai + 1:]:
                            st2 = (st & ~(1 << i) & ~(1 << j)) | (1 << a) | (1 << b)
                            if st2 not in index:
                                continue
                            # i->a then j->b on the intermediate string
                            s1 = _excitation_sign(st, i, a)
                            mid = (st & ~(1 << i)) | (1 << a)
                            s2 = _excitation_sign(mid, j, b)
                            doubles[(index[st], index[st2])] = (i, j, a, b, s1 * s2)
        return index, singles, doubles

    _, singles_a, doubles_a = excitations(sa)
    _, singles_b, doubles_b = excitations(sb)
    na, nb = len(sa), len(sb)

    ham = np.zeros((dim, dim))
    for ia, sta in enumerate(sa):
        for ib, stb in enumerate(sb):
            ham[ia * nb + ib, ia * nb + ib] = _diag_element(sys, occ_lists[sta], occ_lists[stb])

    for (ia, ja), (i, a, sgn) in singles_a.items():
        for ib, stb in enumerate(sb):
            v = sgn * _single_element(sys, occ_lists[sa[ia]], occ_lists[stb], i, a)
            ham[ia * nb + ib, ja * nb + ib] += v
    for (ib, jb), (i, a, sgn) in singles_b.items():
        for ia, sta in enumerate(sa):
            v = sgn * _single_element(sys, occ_lists[sb[ib]], occ_lists[sta], i, a)
            ham[ia * nb + ib, ia * nb + jb] += v

    for (ia, ja), (i, j, a, b, sgn) in doubles_a.items():
        v = sgn * (sys.eri[i, a, j, b] - sys.eri[i, b, j, a])
        for ib in range(nb):
            ham[ia * nb + ib, ja * nb + ib] += v
    for (ib, jb), (i, j, a, b, sgn) in doubles_b.items():
        v = sgn * (sys.eri[i, a, j, b] - sys.eri[i, b, j, a])
        for ia in range(na):
            ham[ia * nb + ib, ia * nb + jb] += v

    for (ia, ja), (i, a, sa_) in singles_a.items():
        for (ib, jb), (j, b, sb_) in singles_b.items():
            ham[ia * nb + ib, ja * nb + jb] += sa_ * sb_ * sys.eri[i, a, j, b]

    return float(scipy.linalg.eigvalsh(ham)[0]) + sys.e_const


def hf_determinant_energy(sys):
    """Closed-shell determinant energy of the first n_elec/2 orbitals."""
    nocc = sys.n_elec // 2
    e = sys.e_const + 2.0 * np.trace(sys.h[:nocc, :nocc])
    for i in range(nocc):
        for j in range(nocc):
            e += 2.0 * sys.eri[i, i, j, j] - sys.eri[i, j, j, i]
    return float(e)


# ---------------------------------------------------------------------------
# Finite-difference derivative checks and oo-DOCI
# ---------------------------------------------------------------------------

@dataclass
class FdReport:
    analytic: np.ndarray
    fd: np.ndarray
    max_rel_err: float


def _rel_err(a, b):
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-30)
    return float(np.max(np.abs(a - b)) / scale)


def _fixed_state_energy(sys, rdms):
    """E of a fixed state from its RDMs contracted with sys's integrals."""
    g = sys.h - 0.5 * np.einsum("prrq->pq", sys.eri)
    return float(sys.e_const + np.sum(g * rdms.gamma1)
                 + np.einsum("pqrs,pqrs", sys.eri, rdms.gamma2))


def fd_gradient_check(sys, state, h_step=1e-4, rdms=None):
    """Central-difference certification of the analytic orbital gradient.

    The state is held fixed; E(kappa_x +- h) is evaluated through
    rotate_integrals along each packed direction.
    """
    if rdms is None:
        from .estimator import exact_rdms
        rdms = assemble_spinless_rdms(exact_rdms(state))
    n = sys.n_orb
    pairs = kappa_pairs(n)
    analytic = orbital_gradient(rdms, sys)
    fd = np.zeros(len(pairs))
    for xi, (p, q) in enumerate(pairs):
        k = np.zeros((n, n))
        k[p, q], k[q, p] = h_step, -h_step
        e_plus = _fixed_state_energy(rotate_integrals(sys, exp_antisymmetric(k)), rdms)
        e_minus = _fixed_state_energy(rotate_integrals(sys, exp_antisymmetric(-k)), rdms)
        fd[xi] = (e_plus - e_minus) / (2.0 * h_step)
    return FdReport(analytic=analytic, fd=fd, max_rel_err=_rel_err(analytic, fd))


def fd_hessian_check(sys, state, h_step=1e-4, rdms=None):
    """Symmetrized central difference of the analytic gradient vs the Hessian.

    The raw one-sided difference of the gradient in the rotated frame picks
    up an antisymmetric commutator term away from stationarity; the
    symmetrized difference is the true second derivative.
    """
    if rdms is None:
        from .estimator import exact_rdms
        rdms = assemble_spinless_rdms(exact_rdms(state))
    n = sys.n_orb
    pairs = kappa_pairs(n)
    d = len(pairs)
    analytic = orbital_hessian(rdms, sys)
    fd = np.zeros((d, d))
    for xi, (p, q) in enumerate(pairs):
        k = np.zeros((n, n))
        k[p, q], k[q, p] = h_step, -h_step
        w_plus = orbital_gradient(rdms, rotate_integrals(sys, exp_antisymmetric(k)))
        w_minus = orbital_gradient(rdms, rotate_integrals(sys, exp_antisymmetric(-k)))
        fd[xi, :] = (w_plus - w_minus) / (2.0 * h_step)
    fd = 0.5 * (fd + fd.T)
    return FdReport(analytic=analytic, fd=fd, max_rel_err=_rel_err(analytic, fd))


def oo_doci(sys, n_pairs=None, cfg=None, grad_tol=1e-6, max_iter=200,
            return_system=False):
    """DOCI with the same Newton-Raphson orbital loop as the VQE driver.

    Alternates exact pair-space diagonalization with one orbital step until
    the gradient vanishes at a point where the Hessian is positive
    semidefinite (a true local minimum): indefinite points with zero
    gradient are escaped along the most negative Hessian eigenvector, and an
    energy increase halves the step cap for the offending step.
    """
    cfg = cfg or OrbitalOptConfig()
    if n_pairs is None:
        n_pairs = sys.n_elec // 2
    cur = sys
    e_cur, vec, basis = doci_ground_state(build_seniority_zero(cur), n_pairs)
    for _ in range(max_iter):
        rdms = assemble_spinless_rdms(pair_vector_rdms(vec, basis))
        omega = orbital_gradient(rdms, cur)
        if len(omega) == 0:
            break
        q_mat = orbital_hessian(rdms, cur)
        if np.max(np.abs(omega)) < grad_tol and min_hessian_eigenvalue(q_mat) > -grad_tol:
            break

        cap = cfg.kappa_cap
        moved = False
        for _ in range(20):
            step_cfg = OrbitalOptConfig(level_shift=cfg.level_shift, kappa_cap=cap)
            best = None
            for kappa in step_candidates(omega, q_mat, step_cfg):
                trial = rotate_integrals(cur, exp_antisymmetric(kappa))
                e_new, vec_new, basis = doci_ground_state(build_seniority_zero(trial),
                                                          n_pairs)
                if best is None or e_new < best[0]:
                    best = (e_new, trial, vec_new)
            if best[0] <= e_cur + 1e-12:
                e_cur, cur, vec = best
                moved = True
                break
            cap *= 0.5
        if not moved:
            break
    if return_system:
        return e_cur, cur
    return e_cur
