"""Energy and RDM estimation from the three measurement bases.

Every quantity the outer loops need -- the energy, the occupation moments
z_p = <n_pa + n_pb>, Gamma_pq = <n_pa n_qa + n_pb n_qb>, Delta_pq =
<n_pa n_qb>, and the pair-hop terms P_pq = Re<d+_p d_q> -- is read from
exactly three computational-basis measurements of the same state: the bare
circuit (Z), the circuit with H appended on every qubit (X), and with
S+ then H appended (Y). A shot-free path evaluates the same quantities
exactly from the statevector.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .simulator import Circuit, StateVector, expectation_pauli, h, sdg


@dataclass
class RdmSet:
    """Measured seniority-zero moments with per-entry standard errors.

    `delta` holds the Delta_pq matrix (the field the algebra calls
    "del" is renamed; del is a Python keyword).
    """

    z: np.ndarray
    gam: np.ndarray
    delta: np.ndarray
    phop: np.ndarray
    z_err: np.ndarray = None
    gam_err: np.ndarray = None
    delta_err: np.ndarray = None
    phop_err: np.ndarray = None

    def __post_init__(self):
        n = len(self.z)
        for name in ("z_err", "gam_err", "delta_err", "phop_err"):
            if getattr(self, name) is None:
                ref = self.z if name == "z_err" else self.gam
                setattr(self, name, np.zeros_like(np.asarray(ref, dtype=float)))
        if np.any(np.asarray(self.z) < -1e-9) or np.any(np.asarray(self.z) > 2 + 1e-9):
            raise ValueError("z entries must lie in [0, 2]")
        if np.max(np.abs(np.diag(self.gam) - self.z)) > 1e-9:
            raise ValueError("Gamma_pp must equal z_p")
        if np.max(np.abs(np.diag(self.delta) - 0.5 * np.asarray(self.z))) > 1e-9:
            raise ValueError("Delta_pp must equal z_p / 2")
        if np.max(np.abs(self.phop)) > 1 + 1e-9:
            raise ValueError("|P_pq| must not exceed 1")
        if self.phop.shape != (n, n):
            raise ValueError("phop has the wrong shape")

    @property
    def n_orb(self):
        return len(self.z)


@dataclass
class SpinlessRdms:
    """Spinless 1-RDM (diagonal for pair states) and the product-form 2-RDM.

    gamma2[p, q, r, s] pairs with the chemist integral (pq|rs): the energy's
    two-electron part is sum_pqrs (pq|rs) gamma2[p, q, r, s]. Only three
    element classes are nonzero for seniority-zero states: density-density
    (q == p, s == r), exchange (q == r, s == p), and pair-hop (r == p,
    s == q).
    """

    gamma1: np.ndarray
    gamma2: np.ndarray

    @property
    def n_orb(self):
        return self.gamma1.shape[0]


def measurement_circuits(base):
    """The three measurement circuits (Z, X, Y) for one prepared state."""
    n = base.n_qubits
    circ_z = Circuit(n, list(base.gates))
    circ_x = Circuit(n, list(base.gates))
    circ_y = Circuit(n, list(base.gates))
    for q in range(n):
        circ_x.add(h(q))
    for q in range(n):
        circ_y.add(sdg(q))
        circ_y.add(h(q))
    return circ_z, circ_x, circ_y


def _occupation_moments(counts):
    """First and second moments of the bit values from one ShotCounts."""
    n = counts.n_qubits
    ints, cnt = counts.bit_arrays()
    if cnt.sum() == 0:
        raise ValueError("empty shot counts")
    bits = (ints[:, None] >> np.arange(n)[None, :]) & 1  # (outcomes, qubit)
    w = cnt / cnt.sum()
    p1 = w @ bits
    p11 = (bits * w[:, None]).T @ bits
    return p1, p11


def _pair_correlators(counts):
    """<S_p S_q> with S = 1 - 2b (eigenvalues +-1) from one ShotCounts."""
    n = counts.n_qubits
    ints, cnt = counts.bit_arrays()
    if cnt.sum() == 0:
        raise ValueError("empty shot counts")
    signs = 1.0 - 2.0 * ((ints[:, None] >> np.arange(n)[None, :]) & 1)
    w = cnt / cnt.sum()
    return (signs * w[:, None]).T @ signs


def estimate_from_counts(counts_z, counts_x, counts_y):
    """Estimate the full RdmSet from the three measurement outcomes."""
    n = counts_z.n_qubits
    if counts_x.n_qubits != n or counts_y.n_qubits != n:
        raise ValueError("shot counts cover different registers")

    p1, p11 = _occupation_moments(counts_z)
    nz = counts_z.total
    z = 2.0 * p1
    gam = 2.0 * p11
    delta = p11.copy()
    np.fill_diagonal(gam, z)
    np.fill_diagonal(delta, 0.5 * z)

    z_err = 2.0 * np.sqrt(np.clip(p1 * (1 - p1), 0, None) / nz)
    p11_err = np.sqrt(np.clip(p11 * (1 - p11), 0, None) / nz)
    gam_err = 2.0 * p11_err
    delta_err = p11_err.copy()
    np.fill_diagonal(gam_err, z_err)
    np.fill_diagonal(delta_err, 0.5 * z_err)

    mxx = _pair_correlators(counts_x)
    myy = _pair_correlators(counts_y)
    vxx = np.clip(1.0 - mxx ** 2, 0, None) / counts_x.total
    vyy = np.clip(1.0 - myy ** 2, 0, None) / counts_y.total
    phop = 0.25 * (mxx + myy)
    phop_err = 0.25 * np.sqrt(vxx + vyy)
    np.fill_diagonal(phop, 0.0)
    np.fill_diagonal(phop_err, 0.0)

    return RdmSet(z=z, gam=gam, delta=delta, phop=phop,
                  z_err=z_err, gam_err=gam_err, delta_err=delta_err,
                  phop_err=phop_err)


def exact_rdms(state):
    """Shots-to-infinity limit of estimate_from_counts (stderr = 0)."""
    n = state.n_qubits

    def pauli(chars):
        label = ["I"] * n
        for q, c in chars:
            label[q] = c
        return expectation_pauli(state, "".join(label))

    ez = np.array([pauli([(p, "Z")]) for p in range(n)])
    z = 1.0 - ez
    gam = np.zeros((n, n))
    delta = np.zeros((n, n))
    phop = np.zeros((n, n))
    for p in range(n):
        for q in range(p + 1, n):
            ezz = pauli([(p, "Z"), (q, "Z")])
            p11 = 0.25 * (1.0 - ez[p] - ez[q] + ezz)
            gam[p, q] = gam[q, p] = 2.0 * p11
            delta[p, q] = delta[q, p] = p11
            exxyy = pauli([(p, "X"), (q, "X")]) + pauli([(p, "Y"), (q, "Y")])
            phop[p, q] = phop[q, p] = 0.25 * exxyy
    np.fill_diagonal(gam, z)
    np.fill_diagonal(delta, 0.5 * z)
    return RdmSet(z=z, gam=np.clip(gam, -2, 2), delta=delta, phop=np.clip(phop, -1, 1))


def energy_from_rdms(rdms, hsz):
    """Energy and its propagated standard error from measured moments.

    E = e_const + sum_p g_pp z_p
      + sum_pq (pp|qq) (Gamma_pq / 2 + Delta_pq)
      + (1/2) sum_{p != q} (pq|qp) (z_p - Gamma_pq)
      + sum_{p != q} (pq|pq) P_pq

    The error assumes independent estimators (covariances between moments
    sharing shots are ignored; this affects error bars only).
    """
    n = rdms.n_orb
    if hsz.n_orb != n:
        raise ValueError("RdmSet / Hamiltonian dimension mismatch")
    g_diag = np.diag(hsz.g)
    j, k, w = hsz.j_mat, hsz.k_mat, hsz.w_mat
    off = ~np.eye(n, dtype=bool)

    e = hsz.e_const
    e += float(g_diag @ rdms.z)
    e += float(np.sum(j * (0.5 * rdms.gam + rdms.delta)))
    e += 0.5 * float(np.sum((k * off) * (rdms.z[:, None] - rdms.gam)))
    e += float(np.sum((w * off) * rdms.phop))

    # linear propagation; each symmetric off-diagonal pair is one estimator
    c_z = g_diag + np.diag(j) + 0.5 * np.sum(k * off, axis=1)
    var = float(np.sum((c_z * rdms.z_err) ** 2))
    iu = np.triu_indices(n, k=1)
    c_gam = (j - k)[iu]          # (1/2+1/2) J - (1/2+1/2) K per unordered pair
    c_delta = 2.0 * j[iu]
    c_phop = 2.0 * w[iu]
    var += float(np.sum((c_gam * rdms.gam_err[iu]) ** 2))
    var += float(np.sum((c_delta * rdms.delta_err[iu]) ** 2))
    var += float(np.sum((c_phop * rdms.phop_err[iu]) ** 2))
    return float(e), float(np.sqrt(var))


def assemble_spinless_rdms(rdms):
    """Map the measured moments onto the spinless 1-/2-RDM tensors."""
    n = rdms.n_orb
    gamma1 = np.diag(rdms.z).astype(float)
    g2 = np.zeros((n, n, n, n))
    for p in range(n):
        g2[p, p, p, p] = rdms.z[p]
        for r in range(n):
            if r == p:
                continue
            g2[p, p, r, r] = 0.5 * rdms.gam[p, r] + rdms.delta[p, r]
            g2[p, r, r, p] = 0.5 * (rdms.z[p] - rdms.gam[p, r])
            g2[p, r, p, r] = rdms.phop[p, r]
    return SpinlessRdms(gamma1=gamma1, gamma2=g2)


def exact_energy(state, hsz):
    """Convenience: exact three-basis energy of a prepared state."""
    e, _ = energy_from_rdms(exact_rdms(state), hsz)
    return e
