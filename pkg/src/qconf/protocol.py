"""
End-to-end conference runs.

The receiver (last party of the codebook, circle position 0) prepares the
channel, the travel qubits visit every sender in order and come back.  Every
hop is protected by a decoy check: decoys drawn uniformly from |0>, |1>, |+>,
|-> are interleaved at random positions, the receiver acknowledges receipt,
the positions are disclosed, and the receiver measures each decoy in a random
basis.  The hop aborts when the matched-basis error rate exceeds the
threshold.  A check with no matched-basis decoy is inconclusive and the hop
is re-sent with fresh decoys, at most ``MAX_RETRIES`` times.

Protocol 1 ends with the receiver's private measurement and decode.
Protocol 2 lets the receiver encode last, announce the initial and final
labels, and every party decodes.

A run is a pure function of its config (seed included); the transcript is a
list of events serialised one JSON object per line.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import math
import secrets
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .adversary import DishonestAnnouncer, InterceptorSpec, check_partition, make_interceptor
from .channel import HopStream, TravelSlot
from .codebook import Codebook, build_codebook, decode_p1, decode_p2, from_bits, to_bits
from .errors import CodebookError, ConfigError, IntegrityError, InvalidOperandError, SpanError
from .pauli import PauliWord, mul
from .rng import CountingRng
from .states import (
    StateVector,
    apply_word,
    describe_state,
    measure_decoy,
    measure_in_basis,
    random_decoy,
)

DEFAULT_THRESHOLD = 0.17
MAX_RETRIES = 3
SALT_BYTES = 16


# -- commitments -------------------------------------------------------------


@dataclass(frozen=True)
class CommitmentToken:
    """SHA-256 commitment; ``digest`` is published, ``salt`` only at reveal time."""

    party: str
    digest: str
    salt: bytes = field(repr=False)


def _commit_digest(party: str, message: str, salt: bytes) -> str:
    return hashlib.sha256(salt + party.encode() + b"\x00" + message.encode()).hexdigest()


def commit_message(party: str, message: str, salt: bytes | None = None) -> CommitmentToken:
    if salt is None:
        salt = secrets.token_bytes(SALT_BYTES)
    return CommitmentToken(party, _commit_digest(party, message, salt), salt)


def verify_commitment(token: CommitmentToken, message: str) -> bool:
    return hmac.compare_digest(token.digest, _commit_digest(token.party, message, token.salt))


# -- sub-circles -------------------------------------------------------------


def partition_subcircles(hops: int | Sequence[int], l: int) -> list[list[int]]:
    """Split the circular hop sequence into ``l`` contiguous segments.

    Segments are produced by repeatedly halving the longest one (earliest on
    ties, larger half first), so the partition for ``l + 1`` refines the one
    for ``l``.  With 6 hops: l=2 gives 3+3, l=3 gives 2+1+3.
    """
    hops = list(range(hops)) if isinstance(hops, int) else list(hops)
    if not 1 <= l <= len(hops):
        raise InvalidOperandError(f"cannot split {len(hops)} hops into {l} sub-circles")
    segments = [hops]
    while len(segments) < l:
        i = max(range(len(segments)), key=lambda j: (len(segments[j]), -j))
        seg = segments[i]
        cut = math.ceil(len(seg) / 2)
        segments[i : i + 1] = [seg[:cut], seg[cut:]]
    return segments


# -- configuration -----------------------------------------------------------


@dataclass
class ConferenceConfig:
    """Everything that determines a run.

    ``messages`` maps party id to a bit-string of that party's length (the
    protocol-1 receiver encodes nothing and may be omitted).  ``subcircles``
    is a sub-circle count or an explicit list of hop segments.
    ``decoys_per_hop`` defaults to the number of travel qubits.
    """

    codebook: Codebook
    messages: Mapping[str, str] | Sequence[str]
    decoys_per_hop: int | None = None
    abort_threshold: float = DEFAULT_THRESHOLD
    commitment_enabled: bool = False
    subcircles: int | list | None = None
    seed: int = 0
    random_initial: bool = False

    def __post_init__(self):
        cb = self.codebook
        msgs = self.messages
        if not isinstance(msgs, Mapping):
            msgs = list(msgs)
            ids = cb.party_ids if len(msgs) == len(cb.parties) else cb.party_ids[:-1]
            if len(msgs) != len(ids):
                raise ConfigError(f"expected {len(cb.parties)} messages, got {len(msgs)}")
            msgs = dict(zip(ids, msgs))
        msgs = {str(k): str(v) for k, v in msgs.items()}
        unknown = set(msgs) - set(cb.party_ids)
        if unknown:
            raise ConfigError(f"messages for unknown parties {sorted(unknown)}")
        for p in cb.parties:
            bits = msgs.setdefault(p.id, "" if p.bits == 0 else None)
            if bits is None:
                raise ConfigError(f"no message for party {p.id}")
            if len(bits) != p.bits or set(bits) - {"0", "1"}:
                raise ConfigError(f"party {p.id} needs a {p.bits}-bit message, got {bits!r}")
        self.messages = msgs
        if self.decoys_per_hop is not None and int(self.decoys_per_hop) < 1:
            raise ConfigError("decoys_per_hop must be at least 1")
        if not 0.0 <= float(self.abort_threshold) <= 1.0:
            raise ConfigError("abort_threshold must lie in [0, 1]")
        if self.commitment_enabled and cb.protocol != 2:
            raise ConfigError("commitment is only defined for protocol 2")
        try:
            self.segments
        except InvalidOperandError as exc:
            raise ConfigError(str(exc)) from exc
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def decoys(self) -> int:
        return int(self.decoys_per_hop) if self.decoys_per_hop else len(self.codebook.travel)

    @property
    def segments(self) -> list[list[int]]:
        n = len(self.codebook.parties)
        if self.subcircles is None:
            return [list(range(n))]
        if isinstance(self.subcircles, int):
            return partition_subcircles(n, self.subcircles)
        segs = [list(s) for s in self.subcircles]
        check_partition(n, segs)
        return segs

    def message_tuple(self) -> tuple:
        return tuple(from_bits(self.messages[p.id]) for p in self.codebook.parties)


CONFIG_KEYS = {
    "protocol", "preset", "codebook", "messages", "decoys_per_hop", "abort_threshold",
    "commitment", "subcircles", "seed", "random_initial", "adversary", "dishonest_initiator",
}


@dataclass
class RunSpec:
    config: ConferenceConfig
    adversary: InterceptorSpec | None = None
    insider: DishonestAnnouncer | None = None


def config_from_dict(data: Mapping, seed: int | None = None) -> RunSpec:
    """Parse a run config; ``seed`` overrides the file's seed."""
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    protocol = int(data.get("protocol", 2))
    try:
        if "codebook" in data:
            desc = dict(data["codebook"])
            desc.setdefault("protocol", protocol)
        elif "preset" in data:
            desc = {"preset": data["preset"], "protocol": protocol}
        else:
            raise ConfigError("config needs either 'preset' or 'codebook'")
        cb = build_codebook(desc)
    except CodebookError as exc:
        raise ConfigError(f"invalid codebook: {exc}") from exc
    adversary = insider = None
    try:
        if data.get("adversary"):
            adversary = InterceptorSpec.from_dict(data["adversary"])
        if data.get("dishonest_initiator") is not None:
            raw = data["dishonest_initiator"]
            insider = DishonestAnnouncer(**raw) if isinstance(raw, Mapping) else DishonestAnnouncer()
        cfg = ConferenceConfig(
            codebook=cb,
            messages=data.get("messages", {}),
            decoys_per_hop=data.get("decoys_per_hop"),
            abort_threshold=float(data.get("abort_threshold", DEFAULT_THRESHOLD)),
            commitment_enabled=bool(data.get("commitment", False)),
            subcircles=data.get("subcircles"),
            seed=int(seed if seed is not None else data.get("seed", 0)),
            random_initial=bool(data.get("random_initial", False)),
        )
    except (InvalidOperandError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunSpec(cfg, adversary, insider)


def load_config(path: str | Path, seed: int | None = None) -> RunSpec:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, Mapping):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(data, seed)


# -- transcript --------------------------------------------------------------


@dataclass
class Event:
    seq: int
    event_type: str
    step_ref: str
    actor: str
    payload: dict
    rng_draws: int

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "event_type": self.event_type,
            "step_ref": self.step_ref,
            "actor": self.actor,
            "payload": self.payload,
            "rng_draws": self.rng_draws,
        }


@dataclass
class Transcript:
    events: list = field(default_factory=list)

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(e.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
            for e in self.events
        )

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        return cls([Event(**json.loads(line)) for line in text.splitlines() if line.strip()])

    def of_type(self, event_type: str) -> list[Event]:
        return [e for e in self.events if e.event_type == event_type]

    @property
    def aborted(self) -> bool:
        return bool(self.of_type("abort"))

    @property
    def integrity_failures(self) -> list[Event]:
        return self.of_type("integrity")

    @property
    def decoded(self) -> dict:
        """Party id -> recovered messages (party id -> bit-string)."""
        return {e.actor: e.payload["messages"] for e in self.of_type("decode")}

    @property
    def announcement(self) -> Event | None:
        ann = self.of_type("announce")
        return ann[0] if ann else None

    @property
    def cheaters(self) -> list[str]:
        return [e.payload["party"] for e in self.of_type("cheater_identified")]

    def encode_counts(self) -> dict:
        counts: dict = {}
        for e in self.of_type("encode"):
            counts[e.actor] = counts.get(e.actor, 0) + 1
        return counts

    def ack_precedes_disclosure(self) -> bool:
        """Every decoy-position disclosure follows the acknowledgment of its transmission."""
        pending = set()
        for e in self.events:
            key = (e.payload.get("hop"), e.payload.get("attempt"), e.payload.get("segment"))
            if e.event_type in ("hop_send", "segment_send"):
                pending.add(key)
            elif e.event_type == "hop_ack":
                if key not in pending:
                    return False
                pending.discard(key)
                pending.add(("acked",) + key)
            elif e.event_type == "decoy_disclose":
                if ("acked",) + key not in pending:
                    return False
        return True


# -- decoy-protected transport -----------------------------------------------


@dataclass
class DecoyCheck:
    positions: list
    decoys: int
    matched: int
    errors: int
    outcome: str  # "pass", "abort" or "inconclusive"

    @property
    def error_rate(self) -> float | None:
        return self.errors / self.matched if self.matched else None


@dataclass
class HopResult:
    state: StateVector
    checks: list
    slots: int

    @property
    def aborted(self) -> bool:
        return self.checks[-1].outcome != "pass"

    @property
    def error_rate(self) -> float | None:
        return self.checks[-1].error_rate


def _measure_decoys(sent, received, threshold, rng) -> tuple[int, int, str]:
    matched = errors = 0
    for original, qubit in zip(sent, received):
        basis = "ZX"[int(rng.integers(2))]
        bit = measure_decoy(qubit, basis, rng)
        if basis == original.basis:
            matched += 1
            errors += bit != original.bit
    if matched == 0:
        return matched, errors, "inconclusive"
    return matched, errors, "abort" if errors / matched > threshold else "pass"


def bb84_hop(
    state: StateVector,
    travel: Sequence[int],
    d: int,
    threshold: float,
    rng,
    adversary=None,
    max_retries: int = MAX_RETRIES,
) -> HopResult:
    """Transport the travel qubits of ``state`` through one decoy-checked hop.

    The travel qubits themselves are never measured by the legitimate parties.
    An inconclusive check (no matched-basis decoy) re-sends with fresh decoys;
    after ``max_retries`` re-sends it counts as an abort.
    """
    if d < 1:
        raise InvalidOperandError("at least one decoy per hop is required")
    m = len(travel)
    checks = []
    for _attempt in range(max_retries + 1):
        total = m + d
        positions = sorted(int(p) for p in rng.choice(total, size=d, replace=False))
        decoys = [random_decoy(rng) for _ in range(d)]
        slots = []
        it_decoy, it_travel = iter(decoys), iter(travel)
        for i in range(total):
            slots.append(next(it_decoy) if i in positions else TravelSlot(next(it_travel)))
        stream = HopStream(slots, state)
        if adversary is not None:
            stream = adversary(stream)
        state = stream.state
        received = [stream.slots[p] for p in positions]
        matched, errors, outcome = _measure_decoys(decoys, received, threshold, rng)
        checks.append(DecoyCheck(positions, d, matched, errors, outcome))
        if outcome != "inconclusive":
            break
    if checks[-1].outcome == "inconclusive":
        checks[-1].outcome = "abort"
    return HopResult(state, checks, m + d)


def _segment_check(hops: Sequence[int], d: int, threshold: float, rng, adversary) -> list[DecoyCheck]:
    """Fresh decoys carried across a whole sub-circle and checked at its end."""
    checks = []
    for _attempt in range(MAX_RETRIES + 1):
        decoys = [random_decoy(rng) for _ in range(d)]
        stream = HopStream(list(decoys))
        if adversary is not None:
            for _ in hops:
                stream = adversary(stream)
        matched, errors, outcome = _measure_decoys(decoys, stream.slots, threshold, rng)
        checks.append(DecoyCheck(list(range(d)), d, matched, errors, outcome))
        if outcome != "inconclusive":
            break
    if checks[-1].outcome == "inconclusive":
        checks[-1].outcome = "abort"
    return checks


# -- the run -----------------------------------------------------------------


def _hop_step(protocol: int, hop: int) -> str:
    return f"{protocol}.{min(3 + hop, 5)}"


def run_conference(
    cfg: ConferenceConfig,
    adversary: InterceptorSpec | object | None = None,
    insider: DishonestAnnouncer | None = None,
) -> Transcript:
    """Simulate one full circular pass and return its transcript.

    ``adversary`` is an :class:`InterceptorSpec` or any callable taking and
    returning a :class:`HopStream`; ``insider`` scripts a dishonest initiator
    (protocol 2 only).
    """
    cb = cfg.codebook
    proto = cb.protocol
    rng = CountingRng(int(cfg.seed))
    hook = make_interceptor(adversary, int(cfg.seed)) if isinstance(adversary, InterceptorSpec) else adversary
    if insider is not None and proto != 2:
        raise ConfigError("a dishonest announcer needs protocol 2")
    transcript = Transcript()

    def emit(event_type, step, actor, **payload):
        transcript.events.append(
            Event(len(transcript.events), event_type, step, actor, payload, rng.draws)
        )

    receiver = cb.receiver
    circle = (receiver,) + cb.senders
    n_hops = len(circle)
    travel = list(cb.travel)
    d = cfg.decoys
    segments = cfg.segments
    segment_end = {seg[-1]: k for k, seg in enumerate(segments)} if len(segments) > 1 else {}

    emit(
        "setup", f"{proto}.1", receiver.id,
        protocol=proto,
        codebook=cb.name or "custom",
        parties=[p.id for p in circle],
        bits={p.id: p.bits for p in cb.parties},
        travel=travel,
        decoys_per_hop=d,
        abort_threshold=cfg.abort_threshold,
        subcircles=segments,
        adversary=adversary.to_dict() if isinstance(adversary, InterceptorSpec) else None,
    )

    own_message = cfg.messages[receiver.id]
    token = None
    if cfg.commitment_enabled:
        token = commit_message(receiver.id, own_message, rng.bytes(SALT_BYTES))
        emit("commit", "2.2", receiver.id, digest=token.digest)

    initial = PauliWord.identity(len(travel))
    if cfg.random_initial:
        initial = cb.basis_words[int(rng.integers(len(cb.basis_words)))]
    state = apply_word(cb.seed, initial, travel)
    emit(
        "prepare", f"{proto}.2", receiver.id,
        state=describe_state(cb.state),
        initial_label=str(initial),
        initial_public=not cfg.random_initial,
    )

    for h in range(n_hops):
        src, dst = circle[h], circle[(h + 1) % n_hops]
        step = _hop_step(proto, h)
        result = bb84_hop(state, travel, d, cfg.abort_threshold, rng, hook)
        for attempt, check in enumerate(result.checks):
            emit("hop_send", step, src.id, hop=h, attempt=attempt, receiver=dst.id,
                 payload_qubits=len(travel), decoys=d)
            emit("hop_ack", step, dst.id, hop=h, attempt=attempt, sender=src.id)
            emit("decoy_disclose", step, src.id, hop=h, attempt=attempt, positions=check.positions)
            kind = "decoy_inconclusive" if check.matched == 0 else "decoy_check"
            emit(kind, step, dst.id, hop=h, attempt=attempt, matched=check.matched,
                 errors=check.errors, error_rate=check.error_rate, outcome=check.outcome)
        if result.aborted:
            emit("abort", step, dst.id, hop=h, error_rate=result.error_rate,
                 reason="eavesdropping suspected" if result.error_rate is not None else "inconclusive decoy check")
            return transcript
        state = result.state

        if h in segment_end:
            k = segment_end[h]
            seg = segments[k]
            for attempt, check in enumerate(_segment_check(seg, d, cfg.abort_threshold, rng, hook)):
                emit("segment_send", step, circle[seg[0]].id, segment=k, attempt=attempt,
                     hops=seg, decoys=d)
                emit("hop_ack", step, dst.id, segment=k, attempt=attempt, sender=circle[seg[0]].id)
                emit("decoy_disclose", step, circle[seg[0]].id, segment=k, attempt=attempt,
                     positions=check.positions)
                emit("segment_check", step, dst.id, segment=k, attempt=attempt, matched=check.matched,
                     errors=check.errors, error_rate=check.error_rate, outcome=check.outcome)
                if check.outcome == "abort":
                    emit("abort", step, dst.id, hop=h, segment=k, error_rate=check.error_rate,
                         reason="sub-circle verification failed")
                    return transcript

        if dst is not receiver:
            op = dst.op_for(cfg.messages[dst.id])
            state = apply_word(state, op, travel)
            emit("encode", step, dst.id, operator=str(op))

    if proto == 2:
        op = receiver.op_for(own_message)
        state = apply_word(state, op, travel)
        emit("encode", "2.6", receiver.id, operator=str(op))

    final_step = "1.6" if proto == 1 else "2.7"
    try:
        label, _ = measure_in_basis(state, cb.basis, rng)
    except SpanError as exc:
        emit("integrity", final_step, receiver.id, reason=str(exc))
        return transcript
    emit("measure", final_step, receiver.id, label=str(label))

    def bits_of(t):
        return {p.id: to_bits(v, p.bits) for p, v in zip(cb.parties, t) if p.bits or proto == 2}

    if proto == 1:
        try:
            t = decode_p1(cb, label, initial)
        except IntegrityError as exc:
            emit("integrity", final_step, receiver.id, reason=str(exc))
            return transcript
        emit("decode", final_step, receiver.id, messages=bits_of(t))
        return transcript

    announced, claimed = label, own_message
    revealed = own_message
    if insider is not None:
        claimed = insider.forged(own_message)
        shift = mul(receiver.op_for(own_message), receiver.op_for(claimed))
        announced = cb.class_of(mul(label, shift))
        revealed = claimed if insider.reveal == "fake" else own_message
    emit("announce", final_step, receiver.id, initial_label=str(initial), final_label=str(announced))

    decoded = {}
    for p in cb.parties:
        own = claimed if p is receiver else cfg.messages[p.id]
        try:
            t = decode_p2(cb, p.id, own, initial, announced)
        except IntegrityError as exc:
            emit("integrity", final_step, p.id, reason=str(exc))
            continue
        decoded[p.id] = bits_of(t)
        emit("decode", final_step, p.id, messages=decoded[p.id])

    if token is not None:
        emit("reveal", final_step, receiver.id, message=revealed, salt=token.salt.hex())
        opened = CommitmentToken(receiver.id, token.digest, token.salt)
        flagged_by = []
        for p in cb.senders:
            hash_ok = verify_commitment(opened, revealed)
            consistent = p.id in decoded and decoded[p.id][receiver.id] == revealed
            emit("commitment_verify", final_step, p.id, hash_ok=hash_ok, consistent=consistent)
            if not (hash_ok and consistent):
                flagged_by.append(p.id)
        if flagged_by:
            emit("cheater_identified", final_step, flagged_by[0], party=receiver.id, flagged_by=flagged_by)
    return transcript


def decodes_correct(cfg: ConferenceConfig, transcript: Transcript) -> bool:
    """True iff every decode record equals the configured messages."""
    decoded = transcript.decoded
    if not decoded:
        return False
    expected = {p.id: cfg.messages[p.id] for p in cfg.codebook.parties if p.bits or cfg.codebook.protocol == 2}
    return all(msgs == expected for msgs in decoded.values())
