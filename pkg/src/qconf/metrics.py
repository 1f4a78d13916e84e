"""
Closed-form information and efficiency quantities.

Qubit efficiency is ``eta = c / (q + b)`` for c transmitted classical bits,
q qubits and b auxiliary classical bits.  With N parties each sending k bits
over an n-qubit channel and m decoys per hop (equal to the number of travel
qubits):

    protocol 1:  c = Nk, q = (n + mN) N, b = 0   ->  eta = k / (mN + n)
    protocol 2:  c = Nk, q = n + Nm,     b = n   ->  eta = k / (m + 2n/N)

Efficiencies are returned as exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidOperandError


def binary_entropy(u: float) -> float:
    """Shannon binary entropy H(u) in bits, with 0 log 0 = 0."""
    if not 0.0 <= u <= 1.0:
        raise InvalidOperandError(f"binary entropy needs 0 <= u <= 1, got {u!r}")
    if u in (0.0, 1.0):
        return 0.0
    return -u * math.log2(u) - (1.0 - u) * math.log2(1.0 - u)


@dataclass(frozen=True)
class EfficiencyInput:
    """Protocol dimensions.

    Attributes
    ----------
    N : int
        Number of parties.
    k : int
        Bits encoded by each party.
    n : int
        Qubits in the entangled channel state.
    m : int
        Travel qubits per hop, which is also the decoy count per hop.
    """

    N: int
    k: int
    n: int
    m: int

    def __post_init__(self):
        for name in ("N", "k", "n", "m"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise InvalidOperandError(f"{name} must be a positive integer, got {value!r}")
        if self.m > self.n:
            raise InvalidOperandError(f"m = {self.m} travel qubits exceed n = {self.n}")


def efficiency_p1(inp: EfficiencyInput) -> Fraction:
    return Fraction(inp.k, inp.m * inp.N + inp.n)


def efficiency_p2(inp: EfficiencyInput) -> Fraction:
    return Fraction(inp.k) / (inp.m + Fraction(2 * inp.n, inp.N))


def as_percent(eta: Fraction | float) -> str:
    """Whole-percent display, e.g. ``Fraction(2, 3) -> '67%'``."""
    return f"{round(float(eta) * 100)}%"
