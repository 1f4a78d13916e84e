"""Qubit stream carried by one hop: travel qubits interleaved with decoys."""

from __future__ import annotations

from dataclasses import dataclass

from .states import DecoyQubit, StateVector


@dataclass(frozen=True)
class TravelSlot:
    """Position in the stream holding register qubit ``qubit``."""

    qubit: int


@dataclass
class HopStream:
    """What an interceptor sees in flight.

    ``slots`` mixes :class:`TravelSlot` and :class:`DecoyQubit` entries;
    ``state`` is the joint register the travel slots belong to.  Interceptors
    may replace decoys and update ``state``, but not reorder slots.
    """

    slots: list
    state: StateVector | None = None

    def decoy_positions(self) -> list[int]:
        return [i for i, s in enumerate(self.slots) if isinstance(s, DecoyQubit)]
