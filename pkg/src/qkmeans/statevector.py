"""Dense statevector simulation for small circuits.

Conventions: qubit 0 is the least-significant bit of a basis index, and
bitstrings are written most-significant qubit first, so on two qubits the
string ``"01"`` means qubit 0 is set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidArgumentError

MAX_QUBITS = 12

GATE_ARITY = {
    "H": 1,
    "X": 1,
    "RX": 1,
    "RY": 1,
    "RZ": 1,
    "P": 1,
    "CX": 2,
    "CP": 2,
}
PARAMETRIC = frozenset({"RX", "RY", "RZ", "P", "CP"})
SELF_INVERSE = frozenset({"H", "X", "CX"})

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise InvalidArgumentError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        if len(targets) != GATE_ARITY[self.kind]:
            raise InvalidArgumentError(
                f"{self.kind} takes {GATE_ARITY[self.kind]} qubit(s), got {targets}"
            )
        if len(set(targets)) != len(targets):
            raise InvalidArgumentError(f"repeated target in {targets}")
        if any(t < 0 for t in targets):
            raise InvalidArgumentError(f"negative qubit index in {targets}")
        if self.kind in PARAMETRIC:
            if self.angle is None:
                raise InvalidArgumentError(f"{self.kind} needs an angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise InvalidArgumentError(f"{self.kind} takes no angle")

    def inverse(self) -> Gate:
        if self.kind in SELF_INVERSE:
            return self
        return Gate(self.kind, self.targets, -self.angle)


def h(q):
    return Gate("H", (q,))


def x(q):
    return Gate("X", (q,))


def rx(q, angle):
    return Gate("RX", (q,), angle)


def ry(q, angle):
    return Gate("RY", (q,), angle)


def rz(q, angle):
    return Gate("RZ", (q,), angle)


def phase(q, angle):
    return Gate("P", (q,), angle)


def cx(control, target):
    return Gate("CX", (control, target))


def cphase(control, target, angle):
    return Gate("CP", (control, target), angle)


@dataclass(frozen=True)
class CircuitSpec:
    """Gates applied in list order to ``|0...0>``."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    def inverse(self) -> CircuitSpec:
        return CircuitSpec(self.n_qubits, tuple(g.inverse() for g in reversed(self.gates)))

    def then(self, other: CircuitSpec) -> CircuitSpec:
        if other.n_qubits != self.n_qubits:
            raise InvalidArgumentError("cannot compose circuits of different width")
        return CircuitSpec(self.n_qubits, self.gates + other.gates)

    def skeleton(self):
        """Gate kinds and targets with the angles stripped."""
        return tuple((g.kind, g.targets) for g in self.gates)

    def angles(self) -> np.ndarray:
        return np.array(
            [0.0 if g.angle is None else g.angle for g in self.gates], dtype=float
        )

    def __len__(self):
        return len(self.gates)


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.shape[0] != 1 << self.n_qubits:
            raise InvalidArgumentError(
                f"{self.n_qubits} qubits need {1 << self.n_qubits} amplitudes, "
                f"got shape {amps.shape}"
            )
        if not np.all(np.isfinite(amps)):
            raise InvalidArgumentError("amplitudes contain NaN or Inf")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _check_width(n_qubits):
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise InvalidArgumentError(
            f"n_qubits must be an integer in [1, {MAX_QUBITS}], got {n_qubits!r}"
        )


def _check_targets(gate, n_qubits):
    if max(gate.targets) >= n_qubits:
        raise InvalidArgumentError(
            f"{gate.kind} on qubits {gate.targets} out of range for {n_qubits} qubits"
        )


def zero_state(n_qubits: int) -> StateVector:
    _check_width(n_qubits)
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(int(n_qubits), amps)


def gate_matrices(kind, angles):
    """Stack of 2x2 unitaries, one per entry of ``angles``."""
    angles = np.asarray(angles, dtype=float)
    out = np.zeros((angles.shape[0], 2, 2), dtype=complex)
    if kind == "H":
        out[:] = _H
    elif kind == "X":
        out[:] = _X
    elif kind == "RX":
        c, s = np.cos(angles / 2), np.sin(angles / 2)
        out[:, 0, 0] = c
        out[:, 0, 1] = -1j * s
        out[:, 1, 0] = -1j * s
        out[:, 1, 1] = c
    elif kind == "RY":
        c, s = np.cos(angles / 2), np.sin(angles / 2)
        out[:, 0, 0] = c
        out[:, 0, 1] = -s
        out[:, 1, 0] = s
        out[:, 1, 1] = c
    elif kind == "RZ":
        out[:, 0, 0] = np.exp(-0.5j * angles)
        out[:, 1, 1] = np.exp(0.5j * angles)
    elif kind == "P":
        out[:, 0, 0] = 1.0
        out[:, 1, 1] = np.exp(1j * angles)
    else:
        raise InvalidArgumentError(f"{kind} is not a single-qubit gate")
    return out


def evolve(states, skeleton, angles):
    """Apply ``skeleton`` in place to every row of ``states``.

    ``states`` is a C-contiguous complex ``(B, 2**n)`` array and ``angles``
    a ``(B, len(skeleton))`` array with one row of gate angles per state;
    columns of unparameterised gates are ignored.
    """
    kern = _kernels.get_backend()
    for col, (kind, targets) in enumerate(skeleton):
        if kind == "CX":
            kern.apply_cx(states, targets[0], targets[1])
        elif kind == "CP":
            phases = np.ascontiguousarray(np.exp(1j * angles[:, col]))
            kern.apply_cphase(states, targets[0], targets[1], phases)
        else:
            mats = np.ascontiguousarray(gate_matrices(kind, angles[:, col]))
            kern.apply_1q(states, targets[0], mats)
    return states


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    _check_targets(gate, state.n_qubits)
    states = np.array(state.amplitudes, dtype=complex).reshape(1, -1)
    angle = 0.0 if gate.angle is None else gate.angle
    evolve(states, ((gate.kind, gate.targets),), np.array([[angle]]))
    return StateVector(state.n_qubits, states[0])


def _validate(circuit):
    _check_width(circuit.n_qubits)
    for g in circuit.gates:
        _check_targets(g, circuit.n_qubits)


def run_circuit(circuit: CircuitSpec) -> StateVector:
    return StateVector(circuit.n_qubits, run_batch([circuit])[0])


def run_batch(circuits) -> np.ndarray:
    """Simulate many circuits from ``|0...0>``; returns a ``(len, 2**n)`` array.

    Circuits sharing one gate skeleton (same kinds and targets, different
    angles) are evolved together, which is the common case for a feature
    map applied to many data points.
    """
    circuits = list(circuits)
    if not circuits:
        raise InvalidArgumentError("run_batch needs at least one circuit")
    n = circuits[0].n_qubits
    for c in circuits:
        if c.n_qubits != n:
            raise InvalidArgumentError("all circuits in a batch must share a width")

    groups = {}
    for i, c in enumerate(circuits):
        groups.setdefault(c.skeleton(), []).append(i)

    out = np.zeros((len(circuits), 1 << n), dtype=complex)
    for skeleton, idx in groups.items():
        _validate(circuits[idx[0]])
        states = np.zeros((len(idx), 1 << n), dtype=complex)
        states[:, 0] = 1.0
        angles = np.array([circuits[i].angles() for i in idx]).reshape(len(idx), -1)
        evolve(states, skeleton, angles)
        out[idx] = states
    return out


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugating the left argument."""
    if a.n_qubits != b.n_qubits:
        raise InvalidArgumentError(
            f"cannot take inner product of {a.n_qubits}- and {b.n_qubits}-qubit states"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def bitstring(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b")


def sample_bitstrings(state: StateVector, shots: int, seed: int) -> dict[str, int]:
    """Measure every qubit ``shots`` times; returns nonzero counts by bitstring."""
    if shots < 1:
        raise InvalidArgumentError(f"shots must be >= 1, got {shots}")
    probs = state.probabilities
    probs = probs / probs.sum()
    counts = np.random.default_rng(seed).multinomial(shots, probs)
    return {
        bitstring(i, state.n_qubits): int(c) for i, c in enumerate(counts) if c
    }
