"""
Dense state-vector simulation for the conference channels.

Qubit 0 is the leftmost ket position (most significant bit of the amplitude
index).  Pauli symbols act as X = bit flip, Z = phase flip and
iY = [[0, 1], [-1, 0]] = Z·X, so words carry no complex phase bookkeeping.

Decoy qubits never join the entangled register; they are tracked as
(basis, bit) pairs because they are product states by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import BasisDegeneracyError, InvalidOperandError, SpanError
from .pauli import PauliWord

MAX_QUBITS = 12
NORM_TOL = 1e-9
ORTHO_TOL = 1e-9
SPAN_TOL = 1e-9

_H = 1 / math.sqrt(2)

PRESETS = {
    "bell": np.array([_H, 0, 0, _H], dtype=complex),
    "ghz3": np.array([_H, 0, 0, 0, 0, 0, 0, _H], dtype=complex),
    "cluster4": np.array(
        [0.5, 0, 0, 0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0.5, 0, 0, -0.5], dtype=complex
    ),
}

StateDescriptor = Union[str, Sequence]


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``qubit_count`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        size = amps.size
        if size < 2 or size & (size - 1):
            raise InvalidOperandError(f"amplitude count {size} is not a power of 2 (>= 2)")
        if size.bit_length() - 1 > MAX_QUBITS:
            raise InvalidOperandError(f"more than {MAX_QUBITS} qubits")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidOperandError(f"state is not normalized (|psi|^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def qubit_count(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def equals_up_to_phase(self, other: "StateVector", tol: float = ORTHO_TOL) -> bool:
        return abs(abs(self.inner(other)) - 1.0) < tol

    def __repr__(self) -> str:
        return f"StateVector(n={self.qubit_count}, amplitudes={np.round(self.amplitudes, 6).tolist()})"


def _parse_amplitude(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InvalidOperandError(f"complex amplitude must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def prepare_state(spec: StateDescriptor) -> StateVector:
    """Build a channel state from a preset name or an explicit amplitude list.

    Custom amplitudes are checked for normalization (tolerance 1e-9), never
    renormalized.  Complex entries may be given as ``[re, im]`` pairs.
    """
    if isinstance(spec, str):
        try:
            return StateVector(PRESETS[spec].copy())
        except KeyError:
            raise InvalidOperandError(
                f"unknown state {spec!r}; presets are {sorted(PRESETS)}"
            ) from None
    if isinstance(spec, StateVector):
        return spec
    amps = np.array([_parse_amplitude(a) for a in spec], dtype=complex)
    return StateVector(amps)


def describe_state(spec: StateDescriptor):
    """JSON-friendly form of a state descriptor."""
    if isinstance(spec, str):
        return spec
    amps = prepare_state(spec).amplitudes
    return [[float(a.real), float(a.imag)] for a in amps]


def _check_targets(state: StateVector, targets: Sequence[int]) -> None:
    n = state.qubit_count
    if len(set(targets)) != len(targets):
        raise InvalidOperandError(f"repeated target qubits {list(targets)}")
    for t in targets:
        if not 0 <= t < n:
            raise InvalidOperandError(f"qubit index {t} out of range for {n} qubits")


def apply_word(state: StateVector, word: PauliWord, targets: Sequence[int]) -> StateVector:
    """Apply ``word`` with symbol j acting on qubit ``targets[j]``."""
    targets = list(targets)
    if word.length != len(targets):
        raise InvalidOperandError(
            f"word {word} has {word.length} symbols but {len(targets)} targets"
        )
    _check_targets(state, targets)
    n = state.qubit_count
    psi = state.amplitudes.reshape((2,) * n).copy()
    for j, t in enumerate(targets):
        bx, bz = word.bits(j)
        if bx:
            psi = np.flip(psi, axis=t)
        if bz:
            index = [slice(None)] * n
            index[t] = 1
            psi[tuple(index)] *= -1
    return StateVector(np.ascontiguousarray(psi).reshape(-1))


def measure_qubit(state: StateVector, qubit: int, basis: str, rng) -> tuple[int, StateVector]:
    """Projective measurement of one qubit in the Z or X basis.

    Returns the outcome bit (0 for |0>/|+>) and the collapsed register, whose
    measured qubit is left in the corresponding eigenstate.
    """
    _check_targets(state, [qubit])
    if basis not in ("Z", "X"):
        raise InvalidOperandError(f"basis must be 'Z' or 'X', got {basis!r}")
    n = state.qubit_count
    psi = np.moveaxis(state.amplitudes.reshape((2,) * n), qubit, 0)
    a0, a1 = psi[0], psi[1]
    if basis == "X":
        a0, a1 = (a0 + a1) * _H, (a0 - a1) * _H
    p0 = float(np.vdot(a0, a0).real)
    bit = 0 if rng.random() < p0 else 1
    kept = a0 if bit == 0 else a1
    kept = kept / math.sqrt(p0 if bit == 0 else 1.0 - p0)
    if basis == "Z":
        out = np.zeros_like(psi)
        out[bit] = kept
    else:
        sign = 1 if bit == 0 else -1
        out = np.stack([kept * _H, sign * kept * _H])
    out = np.moveaxis(out, 0, qubit)
    return bit, StateVector(np.ascontiguousarray(out).reshape(-1))


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Orthonormal states W|seed> labelled by the generating words."""

    matrix: np.ndarray
    labels: tuple

    @property
    def states(self) -> list[StateVector]:
        return [StateVector(row) for row in self.matrix]

    def index(self, label: PauliWord) -> int:
        return self.labels.index(label)

    def __len__(self) -> int:
        return len(self.labels)


def generate_basis(
    seed: StateVector, travel: Sequence[int], words: Sequence[PauliWord]
) -> MeasurementBasis:
    """States ``w|seed>`` (w acting on the travel qubits) for every word.

    Raises :class:`BasisDegeneracyError` naming the first colliding labels if
    two generated states are not orthogonal.
    """
    words = list(words)
    if not words:
        raise InvalidOperandError("no words to generate a basis from")
    if len(words) > seed.amplitudes.size:
        raise InvalidOperandError(
            f"{len(words)} words exceed the dimension {seed.amplitudes.size}"
        )
    rows = np.array([apply_word(seed, w, travel).amplitudes for w in words])
    gram = rows.conj() @ rows.T
    off = np.abs(gram - np.eye(len(words)))
    bad = np.argwhere(off > ORTHO_TOL)
    if bad.size:
        i, j = bad[0]
        raise BasisDegeneracyError(
            f"states for {words[i]} and {words[j]} overlap (|<a|b>| = {abs(gram[i, j]):.3g})",
            labels=(words[i], words[j]),
        )
    rows.setflags(write=False)
    return MeasurementBasis(rows, tuple(words))


def measure_in_basis(state: StateVector, basis: MeasurementBasis, rng) -> tuple[PauliWord, StateVector]:
    """Sample a basis outcome with Born probabilities.

    Raises :class:`SpanError` when the state has weight outside the basis span
    (residual norm above 1e-9), which signals a corrupted channel.
    """
    if basis.matrix.shape[1] != state.amplitudes.size:
        raise InvalidOperandError("basis and state dimensions differ")
    overlaps = basis.matrix.conj() @ state.amplitudes
    probs = np.abs(overlaps) ** 2
    residual = 1.0 - float(probs.sum())
    if residual > SPAN_TOL:
        raise SpanError(f"state has weight {residual:.3g} outside the measurement basis")
    cumulative = np.cumsum(probs / probs.sum())
    k = int(np.searchsorted(cumulative, rng.random(), side="right"))
    k = min(k, len(basis) - 1)
    return basis.labels[k], StateVector(basis.matrix[k].copy())


@dataclass(frozen=True)
class DecoyQubit:
    """One of |0>, |1> (basis Z) or |+>, |-> (basis X); bit 1 is |1> or |->."""

    basis: str
    bit: int

    def __post_init__(self):
        if self.basis not in ("Z", "X") or self.bit not in (0, 1):
            raise InvalidOperandError(f"invalid decoy ({self.basis!r}, {self.bit!r})")

    def ket(self) -> str:
        return {("Z", 0): "|0>", ("Z", 1): "|1>", ("X", 0): "|+>", ("X", 1): "|->"}[
            (self.basis, self.bit)
        ]


def random_decoy(rng) -> DecoyQubit:
    """Each of the four BB84 states with probability 1/4."""
    basis = "ZX"[int(rng.integers(2))]
    return DecoyQubit(basis, int(rng.integers(2)))


def measure_decoy(decoy: DecoyQubit, meas_basis: str, rng) -> int:
    if meas_basis not in ("Z", "X"):
        raise InvalidOperandError(f"basis must be 'Z' or 'X', got {meas_basis!r}")
    if meas_basis == decoy.basis:
        return decoy.bit
    return int(rng.integers(2))
