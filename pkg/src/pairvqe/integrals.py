"""Molecular integrals: FCIDUMP ingestion, active-space handling, seniority-zero
coefficients, and orbital-rotation transforms.

All energies are in hartree. Two-electron integrals are stored as a dense
(pq|rs) tensor in chemist notation, fully symmetry expanded.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

SYMMETRY_TOL = 1e-10


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MolecularSystem:
    """Active-space electronic-structure problem: h, (pq|rs), core energy."""

    n_orb: int
    n_elec: int
    e_const: float
    h: np.ndarray
    eri: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", _readonly(self.h))
        object.__setattr__(self, "eri", _readonly(self.eri))
        n = self.n_orb
        if self.h.shape != (n, n):
            raise ValueError(f"h must be {n}x{n}, got {self.h.shape}")
        if self.eri.shape != (n, n, n, n):
            raise ValueError(f"eri must be {n}^4, got {self.eri.shape}")
        if self.n_elec % 2 != 0 or not (0 < self.n_elec <= 2 * n):
            raise ValueError(f"n_elec={self.n_elec} must be even and in (0, {2*n}]")
        if np.max(np.abs(self.h - self.h.T)) > SYMMETRY_TOL:
            raise ValueError("h is not symmetric")
        for perm in [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]:
            if np.max(np.abs(self.eri - self.eri.transpose(perm))) > SYMMETRY_TOL:
                raise ValueError(f"eri violates permutation symmetry {perm}")

    @property
    def n_pairs(self):
        return self.n_elec // 2


@dataclass(frozen=True)
class SzHamiltonian:
    """Seniority-zero Hamiltonian coefficients.

    g is the modified one-electron matrix g_pq = h_pq - 1/2 sum_r (pr|rq);
    j_mat = (pp|qq), k_mat = (pq|qp), w_mat = (pq|pq) (pair-hop amplitudes).
    """

    e_const: float
    g: np.ndarray
    j_mat: np.ndarray
    k_mat: np.ndarray
    w_mat: np.ndarray

    def __post_init__(self):
        for name in ("g", "j_mat", "k_mat", "w_mat"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        for name in ("j_mat", "k_mat", "w_mat"):
            m = getattr(self, name)
            if np.max(np.abs(m - m.T)) > SYMMETRY_TOL:
                raise ValueError(f"{name} is not symmetric")
        dj = np.diag(self.j_mat)
        for name in ("k_mat", "w_mat"):
            if np.max(np.abs(np.diag(getattr(self, name)) - dj)) > SYMMETRY_TOL:
                raise ValueError(f"diag({name}) must equal diag(j_mat)")

    @property
    def n_orb(self):
        return self.g.shape[0]


def n_kappa(n_orb):
    """Number of independent orbital-rotation parameters d = n(n-1)/2."""
    return n_orb * (n_orb - 1) // 2


def kappa_pairs(n_orb):
    """Packing order of the strict lower triangle: (p, q) with p > q, row-major."""
    return [(p, q) for p in range(n_orb) for q in range(p)]


@dataclass(frozen=True)
class KappaMatrix:
    """Real antisymmetric orbital-rotation generator."""

    k: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k", _readonly(self.k))
        if np.max(np.abs(self.k + self.k.T)) > SYMMETRY_TOL:
            raise ValueError("kappa matrix must be antisymmetric")

    @property
    def n_orb(self):
        return self.k.shape[0]

    @classmethod
    def from_vector(cls, kappa, n_orb):
        kappa = np.asarray(kappa, dtype=float)
        if kappa.shape != (n_kappa(n_orb),):
            raise ValueError(f"kappa vector must have length {n_kappa(n_orb)}")
        k = np.zeros((n_orb, n_orb))
        for x, (p, q) in enumerate(kappa_pairs(n_orb)):
            k[p, q] = kappa[x]
            k[q, p] = -kappa[x]
        return cls(k)

    def to_vector(self):
        return np.array([self.k[p, q] for p, q in kappa_pairs(self.n_orb)])


# ---------------------------------------------------------------------------
# FCIDUMP
# ---------------------------------------------------------------------------

_NAMELIST_KV = re.compile(r"([A-Za-z0-9_]+)\s*=\s*([^=,]+?)(?=\s*(?:,|$|[A-Za-z0-9_]+\s*=))")


def parse_fcidump(text):
    """Parse FCIDUMP contents (a string) into a MolecularSystem.

    One-electron entries are `value i j 0 0`, the core energy is
    `value 0 0 0 0`, everything else is a chemist-notation (ij|kl) entry;
    indices are 1-based and symmetry-compressed files are expanded on load.
    """
    lines = text.splitlines()
    header_lines = []
    body_start = None
    for ln, line in enumerate(lines):
        header_lines.append(line)
        stripped = line.strip().upper().rstrip(",")
        if stripped.endswith("&END") or stripped.endswith("$END") or stripped == "/":
            body_start = ln + 1
            break
    if body_start is None:
        raise ValueError("FCIDUMP header not terminated by &END, $END or /")

    header = " ".join(header_lines)
    fields = {}
    for key, val in _NAMELIST_KV.findall(header):
        fields[key.upper()] = val.strip()
    if "NORB" not in fields or "NELEC" not in fields:
        raise ValueError("FCIDUMP header is missing NORB or NELEC")
    n_orb = int(fields["NORB"])
    n_elec = int(fields["NELEC"])
    ms2 = int(fields.get("MS2", "0"))
    if ms2 != 0:
        raise ValueError(f"only closed-shell systems supported (MS2={ms2})")
    if n_orb <= 0:
        raise ValueError(f"bad NORB={n_orb}")

    h = np.zeros((n_orb, n_orb))
    eri = np.zeros((n_orb, n_orb, n_orb, n_orb))
    e_const = 0.0

    for raw in lines[body_start:]:
        parts = raw.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise ValueError(f"malformed FCIDUMP line: {raw!r}")
        val = float(parts[0])
        i, j, k, l = (int(x) for x in parts[1:])
        for idx in (i, j, k, l):
            if idx < 0 or idx > n_orb:
                raise ValueError(f"orbital index {idx} out of range [0, {n_orb}]")
        if i == j == k == l == 0:
            e_const = val
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise ValueError(f"malformed one-electron line: {raw!r}")
            h[i - 1, j - 1] = val
            h[j - 1, i - 1] = val
        else:
            if 0 in (i, j, k, l):
                raise ValueError(f"malformed two-electron line: {raw!r}")
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in (
                (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
            ):
                eri[a, b, c, d] = val

    return MolecularSystem(n_orb=n_orb, n_elec=n_elec, e_const=e_const, h=h, eri=eri)


def load_fcidump(path):
    with open(path) as f:
        return parse_fcidump(f.read())


# ---------------------------------------------------------------------------
# Active-space manipulation
# ---------------------------------------------------------------------------

def fold_frozen_core(sys, frozen):
    """Fold doubly-occupied frozen orbitals into e_const and h.

    Standard closed-shell folding:
      e_const += sum_i 2 h_ii + sum_ij (2 (ii|jj) - (ij|ji))
      h'_pq    = h_pq + sum_i (2 (pq|ii) - (pi|iq))
    with i, j running over the frozen set; the remaining orbitals are
    re-indexed in ascending order.
    """
    frozen = list(frozen)
    if not frozen:
        return sys
    if len(set(frozen)) != len(frozen):
        raise ValueError("frozen indices must be distinct")
    if any(i < 0 or i >= sys.n_orb for i in frozen):
        raise ValueError("frozen index out of range")
    if 2 * len(frozen) >= sys.n_elec:
        raise ValueError("cannot freeze all (or more) electron pairs")

    frozen = sorted(frozen)
    active = [p for p in range(sys.n_orb) if p not in frozen]
    h, eri = sys.h, sys.eri

    e_core = 2.0 * sum(h[i, i] for i in frozen)
    for i in frozen:
        for j in frozen:
            e_core += 2.0 * eri[i, i, j, j] - eri[i, j, j, i]

    h_eff = h.copy()
    for i in frozen:
        h_eff += 2.0 * eri[:, :, i, i] - eri[:, i, i, :]

    ix = np.ix_(active, active)
    ix4 = np.ix_(active, active, active, active)
    return MolecularSystem(
        n_orb=len(active),
        n_elec=sys.n_elec - 2 * len(frozen),
        e_const=sys.e_const + e_core,
        h=h_eff[ix],
        eri=eri[ix4],
    )


def select_active(sys, keep):
    """Discard unoccupied orbitals, keeping `keep` (ascending re-index).

    The HF-occupied orbitals (the first n_elec/2 in the canonical ordering)
    must all be kept; dropped orbitals are simply removed, so e_const is
    unchanged.
    """
    keep = sorted(keep)
    if len(set(keep)) != len(keep):
        raise ValueError("keep indices must be distinct")
    if any(p < 0 or p >= sys.n_orb for p in keep):
        raise ValueError("keep index out of range")
    required = set(range(sys.n_elec // 2))
    if not required.issubset(keep):
        raise ValueError("keep must contain every occupied orbital "
                         f"{sorted(required)} needed for n_elec={sys.n_elec}")
    if keep == list(range(sys.n_orb)):
        return sys
    ix = np.ix_(keep, keep)
    ix4 = np.ix_(keep, keep, keep, keep)
    return MolecularSystem(
        n_orb=len(keep), n_elec=sys.n_elec, e_const=sys.e_const,
        h=sys.h[ix], eri=sys.eri[ix4],
    )


def build_seniority_zero(sys):
    """Extract the coefficients of the pair-conserving part of H."""
    eri = sys.eri
    g = sys.h - 0.5 * np.einsum("prrq->pq", eri)
    j_mat = np.einsum("ppqq->pq", eri)
    k_mat = np.einsum("pqqp->pq", eri)
    w_mat = np.einsum("pqpq->pq", eri)
    return SzHamiltonian(e_const=sys.e_const, g=g, j_mat=j_mat, k_mat=k_mat, w_mat=w_mat)


def exp_antisymmetric(kappa):
    """Orthogonal matrix exp(K) of an antisymmetric K (det +1)."""
    if isinstance(kappa, KappaMatrix):
        k = kappa.k
    else:
        k = np.asarray(kappa, dtype=float)
        if np.max(np.abs(k + k.T)) > SYMMETRY_TOL:
            raise ValueError("kappa matrix must be antisymmetric")
    c = expm(k)
    n = k.shape[0]
    resid = np.max(np.abs(c.T @ c - np.eye(n)))
    if resid > 1e-12:
        # re-orthogonalize via polar projection; expm of antisymmetric input
        # is orthogonal up to roundoff, so this is a no-op in practice
        u, _, vt = np.linalg.svd(c)
        c = u @ vt
    return c


def rotate_integrals(sys, c):
    """Transform integrals to the orbital basis defined by columns of c.

    h' = c^T h c and (pq|rs)' through four sequential one-index transforms.
    """
    c = np.asarray(c, dtype=float)
    n = sys.n_orb
    if c.shape != (n, n):
        raise ValueError(f"rotation matrix must be {n}x{n}")
    if np.max(np.abs(c.T @ c - np.eye(n))) > 1e-8:
        raise ValueError("rotation matrix is not orthogonal")
    h_new = c.T @ sys.h @ c
    eri = np.einsum("up,uqrs->pqrs", c, sys.eri, optimize=True)
    eri = np.einsum("vq,pvrs->pqrs", c, eri, optimize=True)
    eri = np.einsum("xr,pqxs->pqrs", c, eri, optimize=True)
    eri = np.einsum("ys,pqry->pqrs", c, eri, optimize=True)
    # enforce exact permutation symmetry against roundoff drift
    eri = 0.25 * (eri + eri.transpose(1, 0, 2, 3) + eri.transpose(0, 1, 3, 2)
                  + eri.transpose(1, 0, 3, 2))
    eri = 0.5 * (eri + eri.transpose(2, 3, 0, 1))
    h_new = 0.5 * (h_new + h_new.T)
    return MolecularSystem(n_orb=n, n_elec=sys.n_elec, e_const=sys.e_const,
                           h=h_new, eri=eri)
