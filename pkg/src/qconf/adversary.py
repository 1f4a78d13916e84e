"""
Eavesdroppers, leakage and collusion analysis.

Outsider models act on every qubit in flight:

* intercept-and-resend: with probability ``fraction`` a qubit is measured in a
  random Z/X basis and replaced by a fresh qubit in the observed state;
* entangle-and-measure: a CNOT from Eve's ancilla ``a|0> + b|1>`` onto the
  qubit, after which Eve reads her ancilla in the Z basis.  Sampling that
  ancilla outcome first is exact: with probability ``beta_sq`` the qubit
  receives an X, otherwise it is untouched.  |+>/|-> decoys are X
  eigenstates and so never change.

The analytic side gives the decoy error rate ``f/4``, Eve's information
``f/2``, the legitimate information ``1 - H(f/4)`` and the crossing point of
the two, plus the leakage of the public announcement and a combinatorial
collusion model.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .channel import HopStream
from .codebook import Codebook
from .errors import InvalidOperandError
from .metrics import binary_entropy
from .pauli import PauliWord, mul
from .rng import CountingRng
from .states import DecoyQubit, apply_word, measure_decoy, measure_qubit, random_decoy

INTERCEPT_RESEND = "intercept_resend"
ENTANGLE_MEASURE = "entangle_measure"
PUBLIC_FIXED_INITIAL = "public_fixed_initial"
SECRET_RANDOM_INITIAL = "secret_random_initial"


@dataclass(frozen=True)
class InterceptorSpec:
    kind: str
    fraction: float | None = None
    beta_sq: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind == INTERCEPT_RESEND:
            if self.fraction is None or self.beta_sq is not None:
                raise InvalidOperandError("intercept_resend takes exactly a fraction")
            if not 0.0 <= self.fraction <= 1.0:
                raise InvalidOperandError(f"fraction {self.fraction} outside [0, 1]")
        elif self.kind == ENTANGLE_MEASURE:
            if self.beta_sq is None or self.fraction is not None:
                raise InvalidOperandError("entangle_measure takes exactly beta_sq")
            if not 0.0 <= self.beta_sq <= 1.0:
                raise InvalidOperandError(f"beta_sq {self.beta_sq} outside [0, 1]")
        else:
            raise InvalidOperandError(f"unknown interceptor kind {self.kind!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "InterceptorSpec":
        data = dict(data)
        if "f" in data:
            data["fraction"] = data.pop("f")
        return cls(
            kind=data["kind"],
            fraction=None if data.get("fraction") is None else float(data["fraction"]),
            beta_sq=None if data.get("beta_sq") is None else float(data["beta_sq"]),
            seed=data.get("seed"),
        )

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


class InterceptResend:
    """Measure-and-resend on a random fraction of the qubits in flight."""

    def __init__(self, fraction: float, rng):
        self.fraction = fraction
        self.rng = rng
        self.decoys_attacked = 0
        self.travel_attacked = 0

    def __call__(self, stream: HopStream) -> HopStream:
        for i, slot in enumerate(stream.slots):
            if self.rng.random() >= self.fraction:
                continue
            basis = "ZX"[int(self.rng.integers(2))]
            if isinstance(slot, DecoyQubit):
                stream.slots[i] = DecoyQubit(basis, measure_decoy(slot, basis, self.rng))
                self.decoys_attacked += 1
            else:
                _, stream.state = measure_qubit(stream.state, slot.qubit, basis, self.rng)
                self.travel_attacked += 1
        return stream


class EntangleMeasure:
    """CNOT from a Z-measured ancilla onto each qubit in flight."""

    def __init__(self, beta_sq: float, rng):
        self.beta_sq = beta_sq
        self.rng = rng
        self.decoys_attacked = 0
        self.travel_attacked = 0
        self.ancilla_ones = 0

    def __call__(self, stream: HopStream) -> HopStream:
        for i, slot in enumerate(stream.slots):
            if isinstance(slot, DecoyQubit):
                self.decoys_attacked += 1
            else:
                self.travel_attacked += 1
            if self.rng.random() >= self.beta_sq:
                continue
            self.ancilla_ones += 1
            if isinstance(slot, DecoyQubit):
                if slot.basis == "Z":
                    stream.slots[i] = DecoyQubit("Z", 1 - slot.bit)
            else:
                flip = PauliWord.parse("X")
                stream.state = apply_word(stream.state, flip, [slot.qubit])
        return stream


def make_interceptor(spec: InterceptorSpec, fallback_seed: int = 0):
    """Instantiate the hook for ``spec`` with its own generator.

    Without an explicit seed the generator is derived from ``fallback_seed``
    (the run seed), so a run stays determined by its config and seed.
    """
    seed = spec.seed if spec.seed is not None else CountingRng.derive(fallback_seed, 0xE5E)
    rng = CountingRng(seed)
    if spec.kind == INTERCEPT_RESEND:
        return InterceptResend(spec.fraction, rng)
    return EntangleMeasure(spec.beta_sq, rng)


@dataclass
class AttackReport:
    """Analytic and/or observed figures for one attack setting.

    Fields that do not apply to a given computation stay ``None``.
    """

    kind: str
    parameter: float
    decoys_attacked: int | None = None
    comparisons: int | None = None
    errors: int | None = None
    observed_error_rate: float | None = None
    analytic_error_rate: float | None = None
    i_ae: float | None = None
    i_ab: float | None = None
    detection_probability: float | None = None
    escape_probability: float | None = None

    @property
    def secure(self) -> bool | None:
        if self.i_ab is None or self.i_ae is None:
            return None
        return self.i_ab >= self.i_ae

    @property
    def sigma(self) -> float | None:
        """Binomial standard deviation of the observed rate around the analytic one."""
        if not self.comparisons or self.analytic_error_rate is None:
            return None
        p = self.analytic_error_rate
        return math.sqrt(p * (1 - p) / self.comparisons)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["secure"] = self.secure
        return out


def information_eve(f: float) -> float:
    return f / 2


def information_bob(f: float) -> float:
    return 1.0 - binary_entropy(f / 4)


def intercept_resend_analytics(f: float, decoys: int | None = None) -> AttackReport:
    """Closed-form figures for intercept-and-resend on a fraction ``f``."""
    if not 0.0 <= f <= 1.0:
        raise InvalidOperandError(f"fraction {f} outside [0, 1]")
    return AttackReport(
        kind=INTERCEPT_RESEND,
        parameter=f,
        analytic_error_rate=f / 4,
        i_ae=information_eve(f),
        i_ab=information_bob(f),
        detection_probability=f / 4,
        escape_probability=None if decoys is None else escape_probability(decoys),
    )


def entangle_measure_analytics(beta_sq: float) -> AttackReport:
    """Detection probability beta^2/2 over uniformly prepared decoys."""
    if not 0.0 <= beta_sq <= 1.0:
        raise InvalidOperandError(f"beta_sq {beta_sq} outside [0, 1]")
    return AttackReport(
        kind=ENTANGLE_MEASURE,
        parameter=beta_sq,
        analytic_error_rate=beta_sq / 2,
        detection_probability=beta_sq / 2,
    )


def solve_threshold(tol: float = 1e-6) -> float:
    """Fraction f* in (0, 1) where 1 - H(f/4) = f/2, by bisection."""
    lo, hi = 0.0, 1.0
    gap = lambda f: information_bob(f) - information_eve(f)
    # gap(0) = 1 > 0 and gap(1) = 1 - H(1/4) - 1/2 < 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def escape_probability(decoys_attacked: int) -> float:
    """Chance that ``decoys_attacked`` checked decoys all survive intercept-resend."""
    if decoys_attacked < 0:
        raise InvalidOperandError("decoy count must be non-negative")
    return 0.75**decoys_attacked


def simulate_decoy_attack(
    spec: InterceptorSpec, n_decoys: int, seed: int = 0, batch: int = 256
) -> AttackReport:
    """Monte-Carlo decoy check against the interceptor hook.

    ``n_decoys`` random decoys pass through the hook in streams of ``batch``;
    the receiver measures each in a random basis and errors are counted over
    matched-basis decoys.
    """
    hook = make_interceptor(spec, seed)
    rng = CountingRng(CountingRng.derive(seed, 1))
    comparisons = errors = 0
    remaining = n_decoys
    while remaining > 0:
        sent = [random_decoy(rng) for _ in range(min(batch, remaining))]
        remaining -= len(sent)
        stream = hook(HopStream(list(sent)))
        for original, received in zip(sent, stream.slots):
            basis = "ZX"[int(rng.integers(2))]
            bit = measure_decoy(received, basis, rng)
            if basis == original.basis:
                comparisons += 1
                errors += bit != original.bit
    if spec.kind == INTERCEPT_RESEND:
        report = intercept_resend_analytics(spec.fraction)
    else:
        report = entangle_measure_analytics(spec.beta_sq)
    report.decoys_attacked = hook.decoys_attacked
    report.comparisons = comparisons
    report.errors = errors
    report.observed_error_rate = errors / comparisons if comparisons else None
    return report


def simulate_escape(m: int, trials: int, seed: int = 0, fraction: float = 1.0, chunk: int = 200_000) -> float:
    """Fraction of trials in which ``m`` checked decoys all pass under intercept-resend.

    Vectorized sampling of the same per-decoy physics as :class:`InterceptResend`
    (Eve's basis, her outcome, the resent state and the receiver's matched-basis
    measurement).
    """
    gen = np.random.default_rng(seed)
    passed = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        shape = (size, m)
        prep_basis = gen.integers(2, size=shape)
        prep_bit = gen.integers(2, size=shape)
        attacked = gen.random(shape) < fraction
        eve_basis = gen.integers(2, size=shape)
        eve_bit = np.where(eve_basis == prep_basis, prep_bit, gen.integers(2, size=shape))
        # receiver measures in the preparation basis
        resent_ok = eve_basis == prep_basis
        bob_bit = np.where(resent_ok, eve_bit, gen.integers(2, size=shape))
        bob_bit = np.where(attacked, bob_bit, prep_bit)
        passed += int(np.all(bob_bit == prep_bit, axis=1).sum())
        done += size
    return passed / trials


def _entropy(counts: Iterable[int]) -> float:
    counts = list(counts)
    total = sum(counts)
    return -sum(c / total * math.log2(c / total) for c in counts if c)


def compute_leakage(cb: Codebook, announcement_model: str = PUBLIC_FIXED_INITIAL) -> float:
    """Eve's average information gain from the public announcement, in bits.

    H_apriori is the total encoded information (uniform messages);
    H_aposteriori averages the entropy of the message tuple over announcements.
    Under ``public_fixed_initial`` Eve knows the initial state is the identity
    label; under ``secret_random_initial`` it is uniform over the basis and
    hidden from her.  A protocol-1 codebook announces nothing and leaks 0.
    """
    if announcement_model not in (PUBLIC_FIXED_INITIAL, SECRET_RANDOM_INITIAL):
        raise InvalidOperandError(f"unknown announcement model {announcement_model!r}")
    if cb.protocol == 1:
        return 0.0
    tuples = list(cb.full_tuples())
    h_apriori = float(sum(cb.bits_per_party))
    if announcement_model == PUBLIC_FIXED_INITIAL:
        initials = [PauliWord.identity(cb.word_length)]
    else:
        initials = list(cb.basis_words)
    by_announcement: dict[PauliWord, Counter] = {}
    for t in tuples:
        composite = cb.composite(t)
        for w0 in initials:
            r = cb.class_of(mul(composite, w0))
            by_announcement.setdefault(r, Counter())[t] += 1
    total = len(tuples) * len(initials)
    h_post = sum(
        sum(c.values()) / total * _entropy(c.values()) for c in by_announcement.values()
    )
    return max(0.0, h_apriori - h_post)


def check_partition(N: int, segments: Sequence[Sequence[int]]) -> None:
    flat = [h for seg in segments for h in seg]
    if sorted(flat) != list(range(N)):
        raise InvalidOperandError(f"sub-circles {segments} do not cover hops 0..{N - 1} once")
    for seg in segments:
        if not seg:
            raise InvalidOperandError("empty sub-circle")
        for a, b in zip(seg, seg[1:]):
            if b != (a + 1) % N:
                raise InvalidOperandError(f"sub-circle {list(seg)} is not contiguous")


def collusion_exposure(
    N: int, colluders: Iterable[int], subcircles: Sequence[Sequence[int]] | None = None
) -> set[int]:
    """Parties whose encodings colluders can read by circulating fake qubits.

    Positions 0..N-1 sit on the circle; hop h carries the qubits from
    position h to h+1 (mod N).  Within one sub-circle, every party strictly
    between two colluder-controlled positions is exposed.  A single sub-circle
    spanning the whole pass is a closed cycle, so two colluders expose both
    arcs between them; shorter sub-circles are open segments whose boundary
    parties re-verify the channel.
    """
    colluders = set(colluders)
    if N < 1 or any(not 0 <= c < N for c in colluders):
        raise InvalidOperandError(f"colluder positions {sorted(colluders)} invalid for N = {N}")
    segments = [list(range(N))] if subcircles is None else [list(s) for s in subcircles]
    check_partition(N, segments)

    if len(segments) == 1:
        if len(colluders) < 2:
            return set()
        return set(range(N)) - colluders

    exposed = set()
    for seg in segments:
        parties = [seg[0]] + [(h + 1) % N for h in seg]
        hits = [i for i, p in enumerate(parties) if p in colluders]
        if len(hits) >= 2:
            exposed |= {p for p in parties[hits[0] + 1 : hits[-1]] if p not in colluders}
    return exposed


@dataclass(frozen=True)
class DishonestAnnouncer:
    """Scripted insider: the initiator announces a result matching a changed message.

    ``fake_message`` defaults to the bitwise complement of the true message;
    ``reveal`` chooses which message the initiator opens at the end
    (``"fake"`` keeps the announcement self-consistent, ``"true"`` keeps the
    commitment consistent).
    """

    fake_message: str | None = None
    reveal: str = "fake"

    def __post_init__(self):
        if self.reveal not in ("fake", "true"):
            raise InvalidOperandError(f"reveal must be 'fake' or 'true', got {self.reveal!r}")

    def forged(self, true_message: str) -> str:
        if self.fake_message is not None:
            if len(self.fake_message) != len(true_message):
                raise InvalidOperandError("fake message length differs from the true message")
            return self.fake_message
        return "".join("1" if c == "0" else "0" for c in true_message)
