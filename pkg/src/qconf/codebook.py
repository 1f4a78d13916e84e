"""
Encoding codebooks for the two conference protocols.

A codebook lists, for every encoding party, an ordered operator list whose
entry ``x`` encodes the k-bit value ``x`` (entry 0 is always the identity).
The receiver (the party that prepares and measures the channel) is the last
party.  In protocol 1 it does not encode and carries the trivial list ``[I]``;
in protocol 2 its list is derived so that every column product is the
identity.

Decoding never tracks global phases: words are compared through the basis
state they produce on the channel, i.e. modulo the channel's stabilizer.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BasisDegeneracyError, CodebookError, IntegrityError, InvalidOperandError
from .pauli import (
    PauliWord,
    are_disjoint,
    derive_receiver_ops,
    is_subgroup,
    mul,
    product,
    span,
    validate_ordering,
    word,
)
from .states import (
    ORTHO_TOL,
    MeasurementBasis,
    StateDescriptor,
    StateVector,
    apply_word,
    describe_state,
    generate_basis,
    prepare_state,
)


def to_bits(value: int, k: int) -> str:
    return format(value, f"0{k}b") if k else ""


def from_bits(bits: str | int) -> int:
    if isinstance(bits, int):
        return bits
    if bits == "":
        return 0
    if set(bits) - {"0", "1"}:
        raise InvalidOperandError(f"not a bit-string: {bits!r}")
    return int(bits, 2)


@dataclass(frozen=True)
class Party:
    id: str
    ops: tuple

    @property
    def bits(self) -> int:
        return len(self.ops).bit_length() - 1

    def op_for(self, message: int | str) -> PauliWord:
        value = from_bits(message)
        if not 0 <= value < len(self.ops):
            raise InvalidOperandError(f"message {message!r} out of range for party {self.id}")
        return self.ops[value]


@dataclass
class OrthogonalityReport:
    """Outcome of the exhaustive encoding check; failures are listed, not raised."""

    protocol: int
    tuples_checked: int
    distinct_states: int
    expected_states: int
    collisions: list = field(default_factory=list)
    outside_basis: list = field(default_factory=list)
    ambiguous: list = field(default_factory=list)
    structural: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not (self.collisions or self.outside_basis or self.ambiguous or self.structural)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"{status}: protocol {self.protocol}, {self.tuples_checked} tuples -> "
            f"{self.distinct_states} distinct states (expected {self.expected_states})"
        ]
        for msg in self.structural:
            lines.append(f"  structural: {msg}")
        for a, b, ov in self.collisions[:20]:
            lines.append(f"  collision: {a} vs {b} (|<a|b>| = {ov:.3g})")
        for t in self.outside_basis[:20]:
            lines.append(f"  outside basis: {t}")
        for party, own, label, count in self.ambiguous[:20]:
            lines.append(f"  ambiguous: party {party}, own {own}, label {label}: {count} tuples")
        return "\n".join(lines)


@dataclass(frozen=True, eq=False)
class Codebook:
    """Structurally checked assignment of operator lists to parties.

    Use :func:`build_codebook` to construct one; it also runs the exhaustive
    orthogonality check and refuses codebooks that fail it.
    """

    protocol: int
    senders: tuple
    receiver: Party
    travel: tuple
    state: StateDescriptor
    name: str | None = None

    @property
    def parties(self) -> tuple:
        return self.senders + (self.receiver,)

    @property
    def party_ids(self) -> tuple:
        return tuple(p.id for p in self.parties)

    @property
    def bits_per_party(self) -> tuple:
        return tuple(p.bits for p in self.parties)

    @property
    def word_length(self) -> int:
        return len(self.travel)

    def party_index(self, party: str | int) -> int:
        if isinstance(party, int):
            if not 0 <= party < len(self.parties):
                raise InvalidOperandError(f"no party at index {party}")
            return party
        try:
            return self.party_ids.index(party)
        except ValueError:
            raise InvalidOperandError(f"unknown party {party!r}") from None

    @cached_property
    def seed(self) -> StateVector:
        return prepare_state(self.state)

    def composite(self, messages: Sequence[int]) -> PauliWord:
        """Product of the operators chosen by ``messages`` (one per party, or senders only)."""
        parties = self.parties[: len(messages)]
        if len(messages) not in (len(self.senders), len(self.parties)):
            raise InvalidOperandError("need one message per sender or per party")
        return product((p.op_for(m) for p, m in zip(parties, messages)), self.word_length)

    def sender_tuples(self) -> Iterable[tuple]:
        return itertools.product(*(range(len(p.ops)) for p in self.senders))

    def full_tuples(self) -> Iterable[tuple]:
        return itertools.product(*(range(len(p.ops)) for p in self.parties))

    @cached_property
    def basis_words(self) -> tuple:
        words = {self.composite(t) for t in self.sender_tuples()}
        return tuple(sorted(words, key=lambda w: w.code))

    @cached_property
    def basis(self) -> MeasurementBasis:
        return generate_basis(self.seed, self.travel, self.basis_words)

    @cached_property
    def _class_table(self) -> dict:
        gens = [w for p in self.parties for w in p.ops]
        words = sorted(span(gens, self.word_length), key=lambda w: w.code)
        matrix = self.basis.matrix.conj()
        table = {}
        for w in words:
            ov = np.abs(matrix @ apply_word(self.seed, w, self.travel).amplitudes)
            k = int(np.argmax(ov))
            if abs(ov[k] - 1.0) < ORTHO_TOL:
                table[w] = self.basis.labels[k]
        return table

    def class_of(self, w: PauliWord) -> PauliWord:
        """Basis label of the state ``w|seed>``."""
        try:
            return self._class_table[w]
        except KeyError:
            raise IntegrityError(f"{w} does not map the seed onto a basis state") from None

    def final_label(self, messages: Sequence[int], initial: PauliWord | None = None) -> PauliWord:
        """Basis label measured after every party in ``messages`` has encoded."""
        w = self.composite(messages)
        if initial is not None:
            w = mul(w, initial)
        return self.class_of(w)

    @cached_property
    def _p1_table(self) -> dict:
        return {self.class_of(self.composite(t)): t for t in self.sender_tuples()}

    @cached_property
    def _p2_table(self) -> dict:
        table = {}
        for t in self.full_tuples():
            label = self._class_table.get(self.composite(t))
            if label is None:
                continue
            for i, own in enumerate(t):
                table.setdefault((i, own, label), []).append(t)
        return table

    def to_dict(self) -> dict:
        out = {
            "protocol": self.protocol,
            "parties": [{"id": p.id, "ops": [str(w) for w in p.ops]} for p in self.senders],
            "receiver": {"id": self.receiver.id, "ops": [str(w) for w in self.receiver.ops]},
            "travel": list(self.travel),
            "state": describe_state(self.state),
        }
        if self.name:
            out["name"] = self.name
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


PRESETS = {
    "table2-3p-1b": {
        "parties": [("P1", ["I", "X"]), ("P2", ["I", "iY"]), ("P3", ["I", "Z"])],
        "state": "bell",
        "travel": [0],
    },
    "table2-3p-2b-cluster": {
        "parties": [
            ("P1", ["I.I", "I.X", "X.I", "X.X"]),
            ("P2", ["I.I", "I.iY", "iY.I", "iY.iY"]),
            ("P3", ["I.I", "I.Z", "Z.I", "Z.Z"]),
        ],
        "state": "cluster4",
        "travel": [0, 2],
    },
    "table2-4p-1b-ghz": {
        "parties": [
            ("P1", ["I.I", "X.I"]),
            ("P2", ["I.I", "X.X"]),
            ("P3", ["I.I", "iY.X"]),
            ("P4", ["I.I", "iY.I"]),
        ],
        "state": "ghz3",
        "travel": [0, 1],
    },
    "table2-4p-1b-cluster": {
        "parties": [
            ("P1", ["I.I", "X.iY"]),
            ("P2", ["I.I", "X.Z"]),
            ("P3", ["I.I", "iY.Z"]),
            ("P4", ["I.I", "iY.iY"]),
        ],
        "state": "cluster4",
        "travel": [0, 2],
    },
}


def preset_descriptor(name: str, protocol: int = 2) -> dict:
    """Descriptor for a preset; its last listed party is the receiver."""
    try:
        spec = PRESETS[name]
    except KeyError:
        raise CodebookError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
    *senders, (rid, rops) = spec["parties"]
    receiver = {"id": rid}
    if protocol == 2:
        receiver["ops"] = list(rops)
    return {
        "name": name,
        "protocol": protocol,
        "parties": [{"id": pid, "ops": list(ops)} for pid, ops in senders],
        "receiver": receiver,
        "travel": list(spec["travel"]),
        "state": spec["state"],
    }


def _parse_ops(ops) -> tuple:
    return tuple(w if isinstance(w, PauliWord) else word(w) for w in ops)


def _parse_party(entry, default_id: str) -> tuple[str, tuple | None]:
    if isinstance(entry, str):
        return entry, None
    if isinstance(entry, Mapping):
        ops = entry.get("ops")
        return str(entry.get("id", default_id)), None if ops is None else _parse_ops(ops)
    pid, ops = entry
    return str(pid), _parse_ops(ops)


def _structural_checks(cb: Codebook) -> None:
    n = cb.word_length
    if n == 0:
        raise CodebookError("no travel qubits")
    seed = prepare_state(cb.state)
    if len(set(cb.travel)) != n or not all(0 <= t < seed.qubit_count for t in cb.travel):
        raise CodebookError(f"travel qubits {list(cb.travel)} invalid for a {seed.qubit_count}-qubit state")
    if len(set(cb.party_ids)) != len(cb.parties):
        raise CodebookError(f"duplicate party ids {list(cb.party_ids)}")
    for p in cb.parties:
        for w in p.ops:
            if w.length != n:
                raise CodebookError(
                    f"party {p.id}: operator {w} has length {w.length}, travel qubits {n}"
                )
        size = len(p.ops)
        if size & (size - 1):
            raise CodebookError(f"party {p.id}: {size} operators is not a power of 2")
        if not p.ops[0].is_identity:
            raise CodebookError(f"party {p.id}: first operator must be the identity")
        if len(set(p.ops)) != size or not is_subgroup(p.ops):
            raise CodebookError(f"party {p.id}: operators {[str(w) for w in p.ops]} are not a subgroup")
    for a, b in itertools.combinations(cb.senders, 2):
        if not are_disjoint(a.ops, b.ops):
            raise CodebookError(f"subgroups of {a.id} and {b.id} are not disjoint")
    encoding = [p.ops for p in cb.parties if p.bits > 0]
    if encoding and not validate_ordering(encoding):
        raise CodebookError("operator lists do not share a common index ordering")


def build_codebook(desc: Mapping | str, *, check_states: bool = True) -> Codebook:
    """Build and validate a codebook.

    ``desc`` is a preset name or a mapping with keys ``protocol`` (1 or 2),
    ``parties`` (senders, each ``{"id", "ops"}``), ``receiver`` (id or
    ``{"id", "ops"}``), ``travel`` and ``state``; alternatively ``preset``
    plus ``protocol``.  For protocol 2 the receiver list is derived from the
    senders (a supplied list must agree with it).
    """
    if isinstance(desc, str):
        desc = preset_descriptor(desc)
    elif "preset" in desc:
        base = preset_descriptor(desc["preset"], int(desc.get("protocol", 2)))
        desc = {**base, **{k: v for k, v in desc.items() if k != "preset"}}

    protocol = int(desc.get("protocol", 2))
    if protocol not in (1, 2):
        raise CodebookError(f"protocol must be 1 or 2, got {protocol}")
    try:
        travel = tuple(int(t) for t in desc["travel"])
        state = desc["state"]
        raw_senders = desc["parties"]
    except KeyError as exc:
        raise CodebookError(f"codebook descriptor lacks {exc.args[0]!r}") from None
    if not isinstance(state, str):
        state = tuple(state)
    if not raw_senders:
        raise CodebookError("at least one sender is required")

    try:
        senders = []
        for i, entry in enumerate(raw_senders):
            pid, ops = _parse_party(entry, f"P{i + 1}")
            if ops is None:
                raise CodebookError(f"sender {pid} has no operators")
            senders.append(Party(pid, ops))
        rid, rops = _parse_party(desc.get("receiver", "N"), "N")
    except InvalidOperandError as exc:
        raise CodebookError(str(exc)) from exc

    if protocol == 1:
        receiver = Party(rid, (PauliWord.identity(len(travel)),))
    else:
        if len({len(p.ops) for p in senders}) != 1:
            raise CodebookError("protocol 2 needs every sender to encode the same number of bits")
        for p in senders:
            if any(w.length != len(travel) for w in p.ops):
                raise CodebookError(f"party {p.id}: operator length differs from travel qubit count")
        try:
            derived = derive_receiver_ops([p.ops for p in senders])
        except InvalidOperandError as exc:
            raise CodebookError(str(exc)) from exc
        if rops is not None and tuple(rops) != derived:
            raise CodebookError(
                f"receiver list {[str(w) for w in rops]} differs from derived {[str(w) for w in derived]}"
            )
        receiver = Party(rid, derived)

    cb = Codebook(protocol, tuple(senders), receiver, travel, state, desc.get("name"))
    try:
        _structural_checks(cb)
    except InvalidOperandError as exc:
        raise CodebookError(str(exc)) from exc
    if check_states:
        report = validate_orthogonality(cb)
        if not report.passed:
            raise CodebookError("codebook fails the orthogonality check\n" + report.summary(), report)
    return cb


def load_codebook(path: str | Path, *, check_states: bool = True) -> Codebook:
    with open(path) as fh:
        return build_codebook(json.load(fh), check_states=check_states)


def validate_orthogonality(cb: Codebook) -> OrthogonalityReport:
    """Exhaustively check that every encoding can be decoded.

    All sender tuples are applied to the seed state and must give pairwise
    orthogonal states.  For protocol 2, every full tuple (receiver included)
    must also land on a basis state, and each party's own operator together
    with the final label must pin down the whole tuple.
    """
    sender_tuples = list(cb.sender_tuples())
    expected = 2 ** sum(p.bits for p in cb.senders)
    rows = np.array(
        [apply_word(cb.seed, cb.composite(t), cb.travel).amplitudes for t in sender_tuples]
    )
    overlaps = np.abs(rows.conj() @ rows.T)
    collisions = [
        (sender_tuples[i], sender_tuples[j], float(overlaps[i, j]))
        for i, j in itertools.combinations(range(len(sender_tuples)), 2)
        if overlaps[i, j] > ORTHO_TOL
    ]
    report = OrthogonalityReport(cb.protocol, len(sender_tuples), 0, expected, collisions)
    if collisions:
        report.distinct_states = _count_distinct(rows)
        return report
    try:
        cb.basis
    except BasisDegeneracyError as exc:  # pragma: no cover - collisions caught above
        report.structural.append(str(exc))
        return report

    if cb.protocol == 1:
        report.distinct_states = len(sender_tuples)
        return report

    full = list(cb.full_tuples())
    report.tuples_checked = len(full)
    labels = set()
    for t in full:
        label = cb._class_table.get(cb.composite(t))
        if label is None:
            report.outside_basis.append(t)
        else:
            labels.add(label)
    report.distinct_states = len(labels)
    for (i, own, label), matches in sorted(cb._p2_table.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].code)):
        if len(matches) > 1:
            report.ambiguous.append((cb.parties[i].id, own, str(label), len(matches)))
    return report


def _count_distinct(rows: np.ndarray) -> int:
    reps = []
    for r in rows:
        if not any(abs(abs(np.vdot(q, r)) - 1.0) < ORTHO_TOL for q in reps):
            reps.append(r)
    return len(reps)


def decode_p1(cb: Codebook, final_label: PauliWord, initial_label: PauliWord | None = None) -> tuple:
    """Sender messages recovered by the receiver from its measurement.

    ``initial_label`` is the receiver's private choice of initial basis state
    (identity when omitted).
    """
    composite = final_label if initial_label is None else mul(final_label, initial_label)
    key = cb.class_of(composite)
    try:
        return cb._p1_table[key]
    except KeyError:  # pragma: no cover - every basis label comes from a sender tuple
        raise IntegrityError(f"label {final_label} matches no sender tuple") from None


def decode_p2(
    cb: Codebook,
    party: str | int,
    own_msg: str | int,
    initial_label: PauliWord,
    final_label: PauliWord,
) -> tuple:
    """Full message tuple as reconstructed by ``party`` from the announcement."""
    if cb.protocol != 2:
        raise InvalidOperandError("decode_p2 needs a protocol-2 codebook")
    i = cb.party_index(party)
    own = from_bits(own_msg)
    cb.parties[i].op_for(own)
    label = cb.class_of(mul(final_label, initial_label))
    matches = cb._p2_table.get((i, own, label), [])
    if len(matches) != 1:
        raise IntegrityError(
            f"announcement ({initial_label} -> {final_label}) is consistent with "
            f"{len(matches)} tuples for party {cb.parties[i].id} with message {own}"
        )
    return matches[0]
