"""Parametric noise models applied at CX sites via stochastic trajectories.

Coherent noise perturbs the entangler decomposition of every CX by a shared
Gaussian miscalibration angle (redrawn every `resample_every` shots);
incoherent noise is a global depolarizing channel realized per CX as a
probabilistic reset to a uniformly random computational basis state, which
reproduces (1 - r) rho + r I / 2^N exactly in expectation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulator import (Circuit, StateVector, apply_gate, counts_from_ints,
                        rng_from_seed, run_circuit, rx, ry, sample, xx, zx)


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "none"              # none | coherent | depolarizing
    r: float = 0.0
    resample_every: int = 10        # shots per coherent-delta redraw
    shared_delta: bool = True       # one delta for all CX sites per window

    def __post_init__(self):
        if self.kind not in ("none", "coherent", "depolarizing"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.r < 0:
            raise ValueError("error rate must be >= 0")
        if self.kind == "depolarizing" and self.r > 1:
            raise ValueError("depolarizing rate must lie in [0, 1]")
        if self.resample_every < 1:
            raise ValueError("resample_every must be >= 1")

    @classmethod
    def none(cls):
        return cls()

    @classmethod
    def coherent(cls, r, resample_every=10, shared_delta=True):
        return cls(kind="coherent", r=r, resample_every=resample_every,
                   shared_delta=shared_delta)

    @classmethod
    def depolarizing(cls, r):
        return cls(kind="depolarizing", r=r)


def noisy_cx(r, delta, control=0, target=1):
    """Entangler-level CX with a coherent over-rotation of magnitude r*delta.

    Ry(pi/2)_c, ZX(r d), XX(pi/4 + r d), ZX(-r d), Rx(-pi/2) on both,
    Ry(-pi/2)_c; at r*delta = 0 this equals CX up to global phase.
    """
    eps = r * delta
    circ = Circuit(max(control, target) + 1)
    circ.add(ry(np.pi / 2, control))
    circ.add(zx(eps, control, target))
    circ.add(xx(np.pi / 4 + eps, control, target))
    circ.add(zx(-eps, control, target))
    circ.add(rx(-np.pi / 2, control))
    circ.add(rx(-np.pi / 2, target))
    circ.add(ry(-np.pi / 2, control))
    return circ


def _substitute_cx(circuit, r, deltas):
    """Replace each CX with its noisy decomposition; deltas indexed by site."""
    out = Circuit(circuit.n_qubits)
    site = 0
    for gate in circuit.gates:
        if gate.kind == "CX":
            out.extend(noisy_cx(r, deltas[site], control=gate.qubits[0],
                                target=gate.qubits[1]))
            site += 1
        else:
            out.add(gate)
    return out


def _check_two_qubit_gates(circuit):
    for gate in circuit.gates:
        if len(gate.qubits) == 2 and gate.kind != "CX":
            raise ValueError(f"noise models require CX-only entanglers, found {gate.kind}")


def run_noisy(circuit, model, shots, seed, basis="Z"):
    """Sample a circuit under the given noise model.

    `seed` is an integer or a numpy Generator; all randomness (noise draws
    and measurement sampling) comes from this single stream, so results are
    reproducible.
    """
    rng = seed if isinstance(seed, np.random.Generator) else rng_from_seed(seed)
    if model.kind == "none":
        state = run_circuit(StateVector.zero_state(circuit.n_qubits), circuit)
        return sample(state, shots, rng, basis=basis)

    _check_two_qubit_gates(circuit)
    n = circuit.n_qubits
    n_sites = circuit.count_cx()

    if model.kind == "coherent":
        ints = []
        done = 0
        while done < shots:
            take = min(model.resample_every, shots - done)
            if model.shared_delta:
                deltas = [float(rng.standard_normal())] * n_sites
            else:
                deltas = [float(d) for d in rng.standard_normal(n_sites)]
            noisy = _substitute_cx(circuit, model.r, deltas)
            state = run_circuit(StateVector.zero_state(n), noisy)
            if abs(state.norm() - 1.0) > 1e-10:
                raise RuntimeError("trajectory lost normalization")
            probs = state.probabilities()
            ints.extend(rng.choice(len(probs), size=take, p=probs))
            done += take
        return counts_from_ints(n, ints, basis=basis)

    # depolarizing: per-shot trajectory with probabilistic uniform reset
    dim = 2 ** n
    ints = np.empty(shots, dtype=np.int64)
    for shot in range(shots):
        state = StateVector.zero_state(n)
        for gate in circuit.gates:
            if gate.kind == "CX" and rng.random() < model.r:
                state = StateVector.basis_state(n, int(rng.integers(dim)))
            else:
                apply_gate(state, gate)
        probs = state.probabilities()
        ints[shot] = rng.choice(dim, p=probs)
    return counts_from_ints(n, ints.tolist(), basis=basis)
