"""Fidelity kernels between encoded data points, and the kernel cache file."""

from __future__ import annotations

import hashlib
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import InvalidArgumentError, StaleCacheError
from .feature_maps import FeatureMapConfig, ThetaParameters, build_circuit, theta_for
from .statevector import evolve, run_batch, run_circuit, sample_bitstrings

log = logging.getLogger(__name__)

DEFAULT_SHOTS = 4096
# complex amplitudes held at once when batching inversion circuits
_BATCH_AMPLITUDES = 1 << 22


@dataclass(frozen=True)
class ShotMode:
    shots: int = DEFAULT_SHOTS
    seed: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise InvalidArgumentError(f"shots must be >= 1, got {self.shots}")


EXACT = "exact"


def mode_label(mode) -> str:
    if mode == EXACT:
        return "exact"
    return f"shots({mode.shots},{mode.seed})"


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    values: np.ndarray = field(repr=False)
    map_config: FeatureMapConfig
    mode: object = EXACT
    dataset_fingerprint: str = ""

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    values: np.ndarray = field(repr=False)


def _theta(config, d, theta):
    return theta if theta is not None else theta_for(config, d)


def encode_states(data, config: FeatureMapConfig, theta: ThetaParameters | None = None) -> np.ndarray:
    """Statevectors of every row of ``data``, shape ``(n, 2**qubits)``."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    theta = _theta(config, data.shape[1], theta)
    return run_batch([build_circuit(row, config, theta) for row in data])


def fidelity_exact(x, y, config: FeatureMapConfig, theta: ThetaParameters | None = None) -> float:
    theta = _theta(config, len(np.reshape(x, -1)), theta)
    a = run_circuit(build_circuit(x, config, theta)).amplitudes
    b = run_circuit(build_circuit(y, config, theta)).amplitudes
    return float(abs(np.vdot(a, b)) ** 2)


def inversion_circuit(x, y, config: FeatureMapConfig, theta: ThetaParameters | None = None):
    """``U(y)^dagger U(x)``: the all-zeros probability is the fidelity."""
    theta = _theta(config, len(np.reshape(x, -1)), theta)
    return build_circuit(x, config, theta).then(build_circuit(y, config, theta).inverse())


def fidelity_inversion_test(x, y, config: FeatureMapConfig, theta: ThetaParameters | None = None,
                            shots: int = DEFAULT_SHOTS, seed: int = 0) -> float:
    """Shot estimate of the fidelity from the inversion circuit."""
    if shots < 1:
        raise InvalidArgumentError(f"shots must be >= 1, got {shots}")
    circuit = inversion_circuit(x, y, config, theta)
    counts = sample_bitstrings(run_circuit(circuit), shots, seed)
    return counts.get("0" * config.n_qubits, 0) / shots


def pair_seed(seed: int, i: int, j: int) -> int:
    """Per-pair sampling seed, independent of evaluation order."""
    digest = hashlib.blake2b(f"{i},{j}".encode(), digest_size=8).digest()
    return (int(seed) ^ int.from_bytes(digest, "little")) & ((1 << 64) - 1)


def inversion_probabilities(left, right, config: FeatureMapConfig, theta: ThetaParameters | None = None):
    """Full outcome distributions of ``U(right_k)^dagger U(left_k)`` for each k.

    Each distinct row is encoded once; the adjoint circuits all share one
    skeleton, so pairs are evolved in batches with per-row angles.
    """
    left = np.atleast_2d(np.asarray(left, dtype=float))
    right = np.atleast_2d(np.asarray(right, dtype=float))
    if left.shape != right.shape:
        raise InvalidArgumentError(f"pair arrays differ in shape: {left.shape} vs {right.shape}")
    theta = _theta(config, left.shape[1], theta)
    uniq_l, inv_l = np.unique(left, axis=0, return_inverse=True)
    uniq_r, inv_r = np.unique(right, axis=0, return_inverse=True)
    inv_l, inv_r = inv_l.reshape(-1), inv_r.reshape(-1)
    left_states = encode_states(uniq_l, config, theta)
    circuits = [build_circuit(row, config, theta) for row in uniq_r]
    skeleton = circuits[0].skeleton()
    if any(c.skeleton() != skeleton for c in circuits):
        raise InvalidArgumentError("feature map circuits do not share a gate skeleton")
    adjoint = circuits[0].inverse().skeleton()
    # the adjoint reverses the gate list and negates every angle
    adjoint_angles = -np.array([c.angles()[::-1] for c in circuits]).reshape(len(circuits), -1)

    dim = 1 << config.n_qubits
    chunk = max(1, _BATCH_AMPLITUDES // dim)
    out = np.empty((len(left), dim))
    for start in range(0, len(left), chunk):
        stop = min(start + chunk, len(left))
        states = np.ascontiguousarray(left_states[inv_l[start:stop]])
        evolve(states, adjoint, adjoint_angles[inv_r[start:stop]])
        out[start:stop] = np.abs(states) ** 2
    return out


def _sample_zero_fraction(probs, shots, seed):
    probs = probs / probs.sum()
    return np.random.default_rng(seed).multinomial(shots, probs)[0] / shots


def kernel_matrix(data, config: FeatureMapConfig, theta: ThetaParameters | None = None,
                  mode=EXACT, fingerprint: str = "") -> KernelMatrix:
    """Pairwise fidelity matrix over the rows of ``data``.

    Only the upper triangle is evaluated; it is mirrored and the diagonal
    is set to 1.
    """
    data = np.atleast_2d(np.asarray(data, dtype=float))
    n = data.shape[0]
    try:
        config.check_dimension(data.shape[1])
    except InvalidArgumentError as exc:
        raise InvalidArgumentError(f"kernel_matrix: {exc}") from exc
    theta = _theta(config, data.shape[1], theta)
    iu, ju = np.triu_indices(n, k=1)

    if mode == EXACT:
        states = np.ascontiguousarray(encode_states(data, config, theta))
        gram = np.empty((n, n))
        _kernels.get_backend().abs2_overlaps(states, states, gram)
        upper = gram[iu, ju]
    elif isinstance(mode, ShotMode):
        upper = np.empty(len(iu))
        try:
            probs = inversion_probabilities(data[iu], data[ju], config, theta)
        except InvalidArgumentError as exc:
            raise InvalidArgumentError(f"kernel_matrix: {exc}") from exc
        for k, (i, j) in enumerate(zip(iu, ju)):
            upper[k] = _sample_zero_fraction(probs[k], mode.shots, pair_seed(mode.seed, i, j))
    else:
        raise InvalidArgumentError(f"unknown kernel mode {mode!r}")

    values = np.zeros((n, n))
    values[iu, ju] = upper
    values[ju, iu] = upper
    np.fill_diagonal(values, 1.0)
    return KernelMatrix(values, config, mode, fingerprint)


def to_distance(k: KernelMatrix) -> DistanceMatrix:
    return DistanceMatrix(1.0 - np.asarray(k.values))


# -- cache file ---------------------------------------------------------------
#
# header: magic(8) version(u16) n(u32) mode(u8) shots(u32) seed(u64)
#         config_digest(32) fingerprint(32) meta_len(u32) meta(json)
# body:   n*n little-endian float64, row-major

MAGIC = b"QKMKRNL\x00"
VERSION = 1
_HEADER = struct.Struct("<8sHIBIQ32s32sI")


def config_digest(config: FeatureMapConfig) -> bytes:
    blob = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).digest()


def _fingerprint_bytes(fp: str) -> bytes:
    try:
        raw = bytes.fromhex(fp) if fp else b""
    except ValueError:
        raw = hashlib.sha256(fp.encode()).digest()
    return raw.ljust(32, b"\x00")[:32]


def save_kernel(path, k: KernelMatrix) -> None:
    path = Path(path)
    if k.mode == EXACT:
        mode_code, shots, seed = 0, 0, 0
    else:
        mode_code, shots, seed = 1, k.mode.shots, k.mode.seed & ((1 << 64) - 1)
    meta = json.dumps(
        {"map_config": k.map_config.to_dict(), "fingerprint": k.dataset_fingerprint},
        sort_keys=True,
    ).encode()
    header = _HEADER.pack(
        MAGIC, VERSION, k.n, mode_code, shots, seed,
        config_digest(k.map_config), _fingerprint_bytes(k.dataset_fingerprint), len(meta),
    )
    body = np.ascontiguousarray(k.values, dtype="<f8").tobytes()
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(header + meta + body)
    tmp.replace(path)


def load_kernel(path, fingerprint: str | None = None, config: FeatureMapConfig | None = None,
                mode=None) -> KernelMatrix:
    """Read a cached kernel, checking it against what the caller needs.

    Raises ``FileNotFoundError`` for a missing file and
    :class:`StaleCacheError` for a corrupt file or any metadata mismatch.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no kernel cache at {path}")
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise StaleCacheError(f"{path}: truncated header")
    magic, version, n, mode_code, shots, seed, digest, fp, meta_len = _HEADER.unpack_from(raw)
    if magic != MAGIC or version != VERSION:
        raise StaleCacheError(f"{path}: not a kernel cache (version {version})")
    body_start = _HEADER.size + meta_len
    if len(raw) != body_start + 8 * n * n:
        raise StaleCacheError(f"{path}: size does not match a {n}x{n} kernel")
    try:
        meta = json.loads(raw[_HEADER.size:body_start])
        stored_config = FeatureMapConfig.from_dict(meta["map_config"])
    except (ValueError, KeyError, InvalidArgumentError) as exc:
        raise StaleCacheError(f"{path}: unreadable metadata ({exc})") from exc
    if config_digest(stored_config) != digest:
        raise StaleCacheError(f"{path}: metadata checksum mismatch")
    if fp != _fingerprint_bytes(meta.get("fingerprint", "")):
        raise StaleCacheError(f"{path}: fingerprint checksum mismatch")
    if fingerprint is not None and fp != _fingerprint_bytes(fingerprint):
        raise StaleCacheError(f"{path}: cached for a different dataset")
    if config is not None and config_digest(config) != digest:
        raise StaleCacheError(f"{path}: cached for a different feature map")
    stored_mode = EXACT if mode_code == 0 else ShotMode(shots, seed)
    if mode is not None and mode_label(mode) != mode_label(stored_mode):
        raise StaleCacheError(
            f"{path}: cached in mode {mode_label(stored_mode)}, wanted {mode_label(mode)}"
        )
    values = np.frombuffer(raw, dtype="<f8", count=n * n, offset=body_start).reshape(n, n).copy()
    return KernelMatrix(values, stored_config, stored_mode, meta.get("fingerprint", ""))
