"""Data-encoding circuits.

Every builder is a pure function of its inputs and returns a
:class:`~qkmeans.statevector.CircuitSpec` on ``config.n_qubits`` qubits.
Feature vectors are expected to be scaled already.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .statevector import CircuitSpec, cx, h, phase, rx, ry, rz

MAP_KINDS = ("zz", "z", "efficient_su2", "dense_angle", "angle", "phase", "pauli")
ENTANGLEMENTS = ("linear", "circular", "full")


def entanglement_pairs(kind: str, n_qubits: int) -> list[tuple[int, int]]:
    return entanglement_groups(kind, n_qubits, 2)


def entanglement_groups(kind: str, n_qubits: int, size: int) -> list[tuple[int, ...]]:
    """Qubit subsets of ``size`` that an interaction term acts on."""
    if kind not in ENTANGLEMENTS:
        raise InvalidArgumentError(f"unknown entanglement {kind!r}")
    if size == 1:
        return [(q,) for q in range(n_qubits)]
    if size > n_qubits:
        return []
    if kind == "full":
        return list(itertools.combinations(range(n_qubits), size))
    groups = [tuple(range(i, i + size)) for i in range(n_qubits - size + 1)]
    if kind == "circular" and n_qubits > size:
        # wrap-around windows; on n == size they would repeat the linear one
        for start in range(n_qubits - size + 1, n_qubits):
            groups.append(tuple((start + m) % n_qubits for m in range(size)))
    return groups


@dataclass(frozen=True)
class FeatureMapConfig:
    map_kind: str
    n_qubits: int
    reps: int = 1
    entanglement: str = "linear"
    pauli_strings: tuple[str, ...] = ()
    theta_seed: int = 0

    def __post_init__(self):
        if self.map_kind not in MAP_KINDS:
            raise InvalidArgumentError(
                f"unknown feature map {self.map_kind!r}; expected one of {MAP_KINDS}"
            )
        if not 1 <= self.n_qubits <= 12:
            raise InvalidArgumentError(f"n_qubits out of range: {self.n_qubits}")
        if self.reps < 1:
            raise InvalidArgumentError(f"reps must be >= 1, got {self.reps}")
        if self.entanglement not in ENTANGLEMENTS:
            raise InvalidArgumentError(f"unknown entanglement {self.entanglement!r}")
        words = tuple(self.pauli_strings or ())
        object.__setattr__(self, "pauli_strings", words)
        if self.map_kind == "pauli":
            if not words:
                raise InvalidArgumentError("pauli map needs at least one Pauli word")
            for w in words:
                if not w or set(w) - set("XYZ") or len(w) > self.n_qubits:
                    raise InvalidArgumentError(f"invalid Pauli word {w!r}")
        if self.map_kind == "zz" and self.n_qubits < 2:
            raise InvalidArgumentError("zz map needs at least 2 qubits")

    @property
    def su2_slots(self) -> int:
        return 2 * self.n_qubits * (self.reps + 1)

    def check_dimension(self, d: int) -> None:
        """Raise if a ``d``-feature vector cannot drive this map."""
        n = self.n_qubits
        if self.map_kind == "dense_angle":
            if d != 2 * n:
                raise InvalidArgumentError(
                    f"dense_angle on {n} qubits needs {2 * n} features, got {d}"
                )
        elif self.map_kind == "efficient_su2":
            if not 1 <= d <= self.su2_slots:
                raise InvalidArgumentError(
                    f"efficient_su2 on {n} qubits has {self.su2_slots} slots, got {d} features"
                )
        elif d != n:
            raise InvalidArgumentError(
                f"{self.map_kind} map on {n} qubits needs {n} features, got {d}"
            )

    def theta_count(self, d: int) -> int:
        """Number of fixed parameters filling the slots not taken by data."""
        if self.map_kind != "efficient_su2":
            return 0
        self.check_dimension(d)
        return self.su2_slots - d

    def to_dict(self) -> dict:
        return {
            "map": self.map_kind,
            "qubits": self.n_qubits,
            "reps": self.reps,
            "entanglement": self.entanglement,
            "pauli_strings": list(self.pauli_strings),
            "theta_seed": self.theta_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> FeatureMapConfig:
        return cls(
            map_kind=d["map"],
            n_qubits=int(d["qubits"]),
            reps=int(d.get("reps", 1)),
            entanglement=d.get("entanglement", "linear"),
            pauli_strings=tuple(d.get("pauli_strings") or ()),
            theta_seed=int(d.get("theta_seed", 0)),
        )


@dataclass(frozen=True, eq=False)
class ThetaParameters:
    values: np.ndarray = field(repr=False)
    seed: int = 0
    layer_count: int = 1

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)


def generate_theta(seed: int, count: int, layer_count: int = 1) -> ThetaParameters:
    """Frozen rotation angles drawn uniformly from ``[0, 2*pi)``."""
    if count < 0:
        raise InvalidArgumentError(f"count must be >= 0, got {count}")
    values = np.random.default_rng(seed).uniform(0.0, 2 * np.pi, size=count)
    return ThetaParameters(values, seed=seed, layer_count=layer_count)


def theta_for(config: FeatureMapConfig, d: int) -> ThetaParameters:
    """The theta vector a ``d``-feature dataset uses under ``config``."""
    return generate_theta(config.theta_seed, config.theta_count(d), config.reps + 1)


def _as_vector(x, config):
    x = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("feature vector contains NaN or Inf")
    config.check_dimension(len(x))
    return x


def _interaction_block(qubits, angle):
    """CX ladder onto the last qubit, phase there, then undo the ladder."""
    ladder = [cx(a, b) for a, b in zip(qubits[:-1], qubits[1:])]
    return ladder + [phase(qubits[-1], angle)] + ladder[::-1]


def build_z_map(x, config: FeatureMapConfig) -> CircuitSpec:
    x = _as_vector(x, config)
    n = config.n_qubits
    gates = []
    for _ in range(config.reps):
        gates += [h(q) for q in range(n)]
        gates += [phase(q, 2.0 * x[q]) for q in range(n)]
    return CircuitSpec(n, gates)


def build_zz_map(x, config: FeatureMapConfig) -> CircuitSpec:
    x = _as_vector(x, config)
    n = config.n_qubits
    if n < 2:
        raise InvalidArgumentError("zz map needs at least 2 qubits")
    pairs = entanglement_pairs(config.entanglement, n)
    gates = []
    for _ in range(config.reps):
        gates += [h(q) for q in range(n)]
        gates += [phase(q, 2.0 * x[q]) for q in range(n)]
        for i, j in pairs:
            gates += _interaction_block((i, j), 2.0 * (np.pi - x[i]) * (np.pi - x[j]))
    return CircuitSpec(n, gates)


def build_efficient_su2(x, theta: ThetaParameters, config: FeatureMapConfig) -> CircuitSpec:
    """RY/RZ rotation layers separated by CX layers.

    Slots are filled in circuit order (each layer's RY gates, then its RZ
    gates), data first and theta after.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    n = config.n_qubits
    slots = config.su2_slots
    if len(x) + len(theta) != slots:
        raise InvalidArgumentError(
            f"efficient_su2 on {n} qubits x {config.reps} reps has {slots} slots; "
            f"got {len(x)} features + {len(theta)} theta values"
        )
    values = np.concatenate([x, theta.values])
    pairs = entanglement_pairs(config.entanglement, n)
    gates = []
    k = 0
    for layer in range(config.reps + 1):
        if layer:
            gates += [cx(i, j) for i, j in pairs]
        for rot in (ry, rz):
            for q in range(n):
                gates.append(rot(q, values[k]))
                k += 1
    return CircuitSpec(n, gates)


def build_angle_encoding(x, config: FeatureMapConfig) -> CircuitSpec:
    x = _as_vector(x, config)
    return CircuitSpec(config.n_qubits, [ry(q, x[q]) for q in range(config.n_qubits)])


def build_dense_angle(x, config: FeatureMapConfig) -> CircuitSpec:
    x = np.asarray(x, dtype=float).reshape(-1)
    if len(x) % 2:
        raise InvalidArgumentError(f"dense_angle needs an even feature count, got {len(x)}")
    x = _as_vector(x, config)
    gates = []
    for q in range(config.n_qubits):
        gates += [ry(q, x[2 * q]), phase(q, x[2 * q + 1])]
    return CircuitSpec(config.n_qubits, gates)


def build_phase_encoding(x, config: FeatureMapConfig) -> CircuitSpec:
    x = _as_vector(x, config)
    n = config.n_qubits
    return CircuitSpec(n, [h(q) for q in range(n)] + [phase(q, x[q]) for q in range(n)])


_BASIS_IN = {"X": lambda q: [h(q)], "Y": lambda q: [rx(q, np.pi / 2)], "Z": lambda q: []}
_BASIS_OUT = {"X": lambda q: [h(q)], "Y": lambda q: [rx(q, -np.pi / 2)], "Z": lambda q: []}


def build_pauli_map(x, config: FeatureMapConfig) -> CircuitSpec:
    x = _as_vector(x, config)
    n = config.n_qubits
    gates = []
    for _ in range(config.reps):
        gates += [h(q) for q in range(n)]
        for word in config.pauli_strings:
            for qubits in entanglement_groups(config.entanglement, n, len(word)):
                if len(qubits) == 1:
                    angle = 2.0 * x[qubits[0]]
                else:
                    angle = 2.0 * math.prod(np.pi - x[q] for q in qubits)
                for p, q in zip(word, qubits):
                    gates += _BASIS_IN[p](q)
                gates += _interaction_block(qubits, angle)
                for p, q in zip(word, qubits):
                    gates += _BASIS_OUT[p](q)
    return CircuitSpec(n, gates)


def build_circuit(x, config: FeatureMapConfig, theta: ThetaParameters | None = None) -> CircuitSpec:
    """Dispatch on ``config.map_kind``."""
    kind = config.map_kind
    if kind == "efficient_su2":
        if theta is None:
            theta = theta_for(config, len(np.asarray(x).reshape(-1)))
        return build_efficient_su2(x, theta, config)
    builders = {
        "z": build_z_map,
        "zz": build_zz_map,
        "angle": build_angle_encoding,
        "dense_angle": build_dense_angle,
        "phase": build_phase_encoding,
        "pauli": build_pauli_map,
    }
    return builders[kind](x, config)
