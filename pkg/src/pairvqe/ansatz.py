"""Pair-excitation circuits: HF reference, Givens blocks, and the full ansatz.

A block givens_block(theta, q_i, q_a) realizes, on the (q_a, q_i) two-qubit
subspace ordered with q_a as the high bit, the rotation

    |00>, |11> fixed;  |01> -> cos(theta/2)|01> + sin(theta/2)|10>,
                       |10> -> cos(theta/2)|10> - sin(theta/2)|01>,

i.e. a pair transfer from orbital i toward orbital a. Two constructions are
provided: the magic-basis form (2 CX gates) and the Ising form (2 XX gates);
they agree up to global phase.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .simulator import Circuit, cx, h, ry, s, sdg, x, xx


@dataclass
class PairAnsatz:
    """Excitation list (i in occ) x (a in virt) with one angle per entry.

    The excitation ordering (i ascending outer, a ascending inner) is part of
    the ansatz definition: Givens blocks do not all commute.
    """

    n_orb: int
    occ: tuple
    virt: tuple
    excitations: tuple
    t: np.ndarray
    active_mask: np.ndarray

    def __post_init__(self):
        occ, virt = set(self.occ), set(self.virt)
        if occ & virt:
            raise ValueError("occ and virt overlap")
        if occ | virt != set(range(self.n_orb)):
            raise ValueError("occ + virt must cover all orbitals")
        expect = tuple((i, a) for i in sorted(occ) for a in sorted(virt))
        if tuple(self.excitations) != expect:
            raise ValueError("excitations must enumerate occ x virt in canonical order")
        self.t = np.asarray(self.t, dtype=float)
        self.active_mask = np.asarray(self.active_mask, dtype=bool)
        if self.t.shape != (len(self.excitations),):
            raise ValueError("t must have one angle per excitation")
        if self.active_mask.shape != (len(self.excitations),):
            raise ValueError("active_mask must have one flag per excitation")

    @classmethod
    def from_system(cls, sys):
        n_occ = sys.n_elec // 2
        occ = tuple(range(n_occ))
        virt = tuple(range(n_occ, sys.n_orb))
        exc = tuple((i, a) for i in occ for a in virt)
        return cls(n_orb=sys.n_orb, occ=occ, virt=virt, excitations=exc,
                   t=np.zeros(len(exc)), active_mask=np.ones(len(exc), dtype=bool))

    @property
    def n_active(self):
        return int(np.sum(self.active_mask))

    def with_params(self, t):
        return replace(self, t=np.asarray(t, dtype=float))

    def with_mask(self, mask):
        return replace(self, active_mask=np.asarray(mask, dtype=bool))

    def expand_active(self, t_active):
        """Full-length parameter vector from the active subvector."""
        t = np.zeros(len(self.excitations))
        t[self.active_mask] = t_active
        return t

    def active_values(self, t=None):
        t = self.t if t is None else np.asarray(t, dtype=float)
        return t[self.active_mask]


def reference_circuit(ansatz):
    """X on each occupied qubit: prepares the HF pair-occupation bitstring."""
    circ = Circuit(ansatz.n_orb)
    for q in ansatz.occ:
        circ.add(x(q))
    return circ


def givens_block(theta, q_i, q_a):
    """Magic-basis pair-rotation block: 2 CX gates, 8 single-qubit gates."""
    if q_i == q_a:
        raise ValueError("block qubits must differ")
    circ = Circuit(max(q_i, q_a) + 1)
    circ.add(s(q_a))
    circ.add(s(q_i))
    circ.add(h(q_i))
    circ.add(cx(q_i, q_a))
    circ.add(ry(theta / 2, q_a))
    circ.add(ry(theta / 2, q_i))
    circ.add(cx(q_i, q_a))
    circ.add(h(q_i))
    circ.add(sdg(q_a))
    circ.add(sdg(q_i))
    return circ


def givens_block_xx(theta, q_i, q_a):
    """Ising-form pair-rotation block: 2 XX gates (native entangler shape)."""
    if q_i == q_a:
        raise ValueError("block qubits must differ")
    circ = Circuit(max(q_i, q_a) + 1)
    circ.add(sdg(q_a))
    circ.add(xx(theta / 4, q_a, q_i))
    circ.add(s(q_a))
    circ.add(sdg(q_i))
    circ.add(xx(-theta / 4, q_a, q_i))
    circ.add(s(q_i))
    return circ


def build_upccd_circuit(ansatz, t=None, decomposition="magic"):
    """Reference circuit followed by one Givens block per active excitation."""
    t = ansatz.t if t is None else np.asarray(t, dtype=float)
    if t.shape != (len(ansatz.excitations),):
        raise ValueError("parameter vector length mismatch")
    block = {"magic": givens_block, "xx": givens_block_xx}[decomposition]
    circ = reference_circuit(ansatz)
    for k, (i, a) in enumerate(ansatz.excitations):
        if not ansatz.active_mask[k]:
            continue
        circ.extend(block(t[k], i, a))
    return circ


def screen_redundant(sys, ansatz, cfg=None, threshold=None):
    """Mark excitations whose amplitude effectively stays at zero as inactive.

    Runs one zero-initialized, noise-free (exact backend) optimization of the
    circuit parameters at the fixed reference orbitals with every parameter
    active, recording the |t| history; an excitation is inactive iff its
    converged amplitude stays below the threshold (default 0.07 rad).

    Every pair amplitude has a strictly nonzero gradient 2(ia|ia) at t = 0,
    so no amplitude is ever exactly zero at convergence; "redundant" means
    "settles well below the scale of the contributing amplitudes", and the
    default threshold sits in the magnitude gap that separates the two
    populations on the reference systems.
    """
    import warnings

    from .vqe_driver import SpsaConfig, VqeConfig, run_vqe

    cfg = cfg or VqeConfig()
    if threshold is None:
        threshold = cfg.redundancy_threshold
    run_cfg = replace(cfg, shots=0, record_history=True, orbital_optimize=False,
                      macro_max=3, spsa=SpsaConfig(max_iter=0), exact_polish=True)
    full = ansatz.with_mask(np.ones(len(ansatz.excitations), dtype=bool))
    full = full.with_params(np.zeros(len(ansatz.excitations)))
    result = run_vqe(sys, full, run_cfg)
    if not result.converged:
        warnings.warn("redundancy screening optimization did not converge; "
                      "mask computed from the final iterate", RuntimeWarning)
    return np.abs(result.t_final) >= threshold
