"""Dense statevector simulation of the qubit register.

Little-endian ordering throughout: qubit 0 is the least-significant bit of a
basis-state index, and qubit p represents spatial orbital p. Bitstring keys in
ShotCounts render the register MSB-first, i.e. key[-1] is qubit 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SQ2 = 1.0 / np.sqrt(2.0)

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULI_MATRICES = {"I": _I2, "X": _X, "Y": _Y, "Z": _Z}

_XX = np.kron(_X, _X)
_ZX = np.kron(_Z, _X)

ONE_QUBIT_KINDS = frozenset({"X", "H", "S", "Sdg", "Ry", "Rx", "Rz"})
TWO_QUBIT_KINDS = frozenset({"CX", "XX", "ZX"})


def rng_from_seed(seed, *stream):
    """Counter-based Philox generator; extra integers select a substream."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Gate:
    """A named gate acting on 1 or 2 qubits.

    Two-qubit matrices are written in the |q_first q_second> basis with the
    first listed qubit as the left (most significant) bit. Rotation
    conventions: Ry(t) = exp(-i t Y / 2) (Rx, Rz alike), S = diag(1, i),
    XX(t) = exp(-i t X@X), ZX(t) = exp(-i t Z@X) with Z on the first qubit.
    """

    kind: str
    qubits: tuple
    theta: float = None

    def __post_init__(self):
        if self.kind not in ONE_QUBIT_KINDS and self.kind not in TWO_QUBIT_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        n_target = 1 if self.kind in ONE_QUBIT_KINDS else 2
        if len(self.qubits) != n_target:
            raise ValueError(f"{self.kind} acts on {n_target} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("gate qubits must be distinct")
        if self.kind in ("Ry", "Rx", "Rz", "XX", "ZX") and self.theta is None:
            raise ValueError(f"{self.kind} requires an angle")

    def matrix(self):
        t = self.theta
        if self.kind == "X":
            return _X.copy()
        if self.kind == "H":
            return _SQ2 * np.array([[1, 1], [1, -1]], dtype=complex)
        if self.kind == "S":
            return np.diag([1, 1j]).astype(complex)
        if self.kind == "Sdg":
            return np.diag([1, -1j]).astype(complex)
        if self.kind == "Ry":
            c, s = np.cos(t / 2), np.sin(t / 2)
            return np.array([[c, -s], [s, c]], dtype=complex)
        if self.kind == "Rx":
            c, s = np.cos(t / 2), np.sin(t / 2)
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
        if self.kind == "Rz":
            return np.diag([np.exp(-1j * t / 2), np.exp(1j * t / 2)])
        if self.kind == "CX":
            return np.array([[1, 0, 0, 0], [0, 1, 0, 0],
                             [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
        if self.kind == "XX":
            return np.cos(t) * np.eye(4) - 1j * np.sin(t) * _XX
        if self.kind == "ZX":
            return np.cos(t) * np.eye(4) - 1j * np.sin(t) * _ZX
        raise AssertionError(self.kind)

    def dagger(self):
        if self.kind == "S":
            return Gate("Sdg", self.qubits)
        if self.kind == "Sdg":
            return Gate("S", self.qubits)
        if self.theta is not None:
            return Gate(self.kind, self.qubits, -self.theta)
        return self


def x(q):
    return Gate("X", (q,))


def h(q):
    return Gate("H", (q,))


def s(q):
    return Gate("S", (q,))


def sdg(q):
    return Gate("Sdg", (q,))


def ry(theta, q):
    return Gate("Ry", (q,), theta)


def rx(theta, q):
    return Gate("Rx", (q,), theta)


def rz(theta, q):
    return Gate("Rz", (q,), theta)


def cx(control, target):
    return Gate("CX", (control, target))


def xx(theta, qa, qb):
    return Gate("XX", (qa, qb), theta)


def zx(theta, qz, qx):
    return Gate("ZX", (qz, qx), theta)


@dataclass
class Circuit:
    n_qubits: int
    gates: list = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            self._check(g)

    def _check(self, gate):
        if any(q < 0 or q >= self.n_qubits for q in gate.qubits):
            raise ValueError(f"gate {gate} out of range for {self.n_qubits} qubits")

    def add(self, gate):
        self._check(gate)
        self.gates.append(gate)
        return self

    def extend(self, other):
        for g in other.gates:
            self.add(g)
        return self

    def dagger(self):
        return Circuit(self.n_qubits, [g.dagger() for g in reversed(self.gates)])

    def count_two_qubit(self):
        return sum(1 for g in self.gates if g.kind in TWO_QUBIT_KINDS)

    def count_cx(self):
        return sum(1 for g in self.gates if g.kind == "CX")


@dataclass
class StateVector:
    """2^N complex amplitudes; single-writer, normalized."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2 ** self.n_qubits,):
            raise ValueError("amplitude vector has the wrong length")
        norm = np.sum(np.abs(self.amplitudes) ** 2)
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"state not normalized: |psi|^2 = {norm}")

    @classmethod
    def zero_state(cls, n_qubits):
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis_state(cls, n_qubits, bits):
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[bits] = 1.0
        return cls(n_qubits, amps)

    def copy(self):
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def probabilities(self):
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


def _apply_unitary(amps, u, qubits, n_qubits):
    k = len(qubits)
    axes = [n_qubits - 1 - q for q in qubits]
    psi = amps.reshape((2,) * n_qubits)
    u_t = np.asarray(u, dtype=complex).reshape((2,) * (2 * k))
    psi = np.tensordot(u_t, psi, axes=(list(range(k, 2 * k)), axes))
    psi = np.moveaxis(psi, list(range(k)), axes)
    return np.ascontiguousarray(psi).reshape(-1)


def apply_gate(state, gate):
    """Apply a gate in place and return the state."""
    if any(q < 0 or q >= state.n_qubits for q in gate.qubits):
        raise ValueError(f"gate {gate} out of range")
    state.amplitudes = _apply_unitary(state.amplitudes, gate.matrix(),
                                      gate.qubits, state.n_qubits)
    return state


def run_circuit(initial, circuit):
    """Apply the circuit's gates in order to a copy of the initial state."""
    if initial.n_qubits != circuit.n_qubits:
        raise ValueError("state/circuit qubit count mismatch")
    state = initial.copy()
    for gate in circuit.gates:
        apply_gate(state, gate)
    return state


@dataclass
class ShotCounts:
    """Counts keyed by MSB-first bitstrings, with the measurement basis tag."""

    n_qubits: int
    counts: dict
    total: int
    basis: str = "Z"

    def __post_init__(self):
        if self.basis not in ("Z", "X", "Y"):
            raise ValueError(f"basis must be Z, X, or Y, not {self.basis!r}")
        if sum(self.counts.values()) != self.total:
            raise ValueError("counts do not sum to total")

    def items_int(self):
        """Iterate (basis-state integer, count)."""
        for key, c in self.counts.items():
            yield int(key, 2), c

    def bit_arrays(self):
        """Vectorized view: (ints, counts) arrays over observed outcomes."""
        if not self.counts:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        ints = np.array([int(k, 2) for k in self.counts], dtype=np.int64)
        cnt = np.array(list(self.counts.values()), dtype=np.int64)
        return ints, cnt


def counts_from_ints(n_qubits, ints, basis="Z"):
    """Build ShotCounts from an array of sampled basis-state integers."""
    vals, cnt = np.unique(np.asarray(ints, dtype=np.int64), return_counts=True)
    counts = {format(int(v), f"0{n_qubits}b"): int(c) for v, c in zip(vals, cnt)}
    return ShotCounts(n_qubits=n_qubits, counts=counts, total=int(cnt.sum()), basis=basis)


def sample(state, shots, seed, basis="Z"):
    """Draw computational-basis samples from |a_i|^2 with a Philox stream.

    `seed` may be an integer or a prepared numpy Generator.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else rng_from_seed(seed)
    p = state.probabilities()
    hist = rng.multinomial(shots, p)
    nz = np.nonzero(hist)[0]
    counts = {format(int(i), f"0{state.n_qubits}b"): int(hist[i]) for i in nz}
    return ShotCounts(n_qubits=state.n_qubits, counts=counts, total=shots, basis=basis)


def expectation_pauli(state, pauli):
    """<state|P|state> for a Pauli string, pauli[p] acting on qubit p."""
    if len(pauli) != state.n_qubits:
        raise ValueError("pauli string length must equal the qubit count")
    phi = state.amplitudes
    for q, ch in enumerate(pauli):
        if ch == "I":
            continue
        if ch not in PAULI_MATRICES:
            raise ValueError(f"invalid Pauli character {ch!r}")
        phi = _apply_unitary(phi, PAULI_MATRICES[ch], (q,), state.n_qubits)
    val = np.vdot(state.amplitudes, phi)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {val.imag}")
    return float(val.real)


def circuit_unitary(circuit):
    """Dense unitary of a small circuit (testing aid, N <= 10)."""
    dim = 2 ** circuit.n_qubits
    u = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        state = StateVector.basis_state(circuit.n_qubits, j)
        u[:, j] = run_circuit(state, circuit).amplitudes
    return u


def global_phase_aligned(u, ref):
    """Rescale u by a unit phase so it best matches ref (for comparisons)."""
    tr = np.trace(ref.conj().T @ u)
    if abs(tr) < 1e-12:
        # fall back to the largest element
        idx = np.unravel_index(np.argmax(np.abs(u)), u.shape)
        tr = u[idx] * np.conj(ref[idx])
    return u * (np.conj(tr) / abs(tr))
