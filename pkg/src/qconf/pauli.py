"""
Modified Pauli group algebra.

Elements of G_n = {I, X, iY, Z}^{⊗n} are multiplied modulo global phase, which
turns the group into the elementary abelian group (Z_2 × Z_2)^n.  Each symbol
is stored as a pair of bits (x, z):

    I = (0, 0)   X = (1, 0)   Z = (0, 1)   iY = (1, 1)

so the modified product is a bitwise XOR.  A word of length n keeps its x bits
and z bits in two integers, symbol j living in bit j.

Text form joins symbols with "." (``"iY.X"`` is iY⊗X).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import InvalidOperandError

SYMBOLS = ("I", "X", "Z", "iY")
_SYMBOL_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "iY": (1, 1)}
_BITS_SYMBOL = {bits: name for name, bits in _SYMBOL_BITS.items()}


@dataclass(frozen=True)
class PauliWord:
    """An element of G_n, phase dropped.

    Attributes
    ----------
    x, z : int
        Bit masks; bit j holds the x (resp. z) component of symbol j.
    length : int
        Number of symbols (tensor factors).
    """

    x: int
    z: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise InvalidOperandError("a Pauli word needs at least one symbol")
        limit = 1 << self.length
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise InvalidOperandError("bit masks exceed the word length")

    @classmethod
    def parse(cls, text: str) -> "PauliWord":
        parts = text.strip().split(".")
        x = z = 0
        for j, part in enumerate(parts):
            try:
                bx, bz = _SYMBOL_BITS[part.strip()]
            except KeyError:
                raise InvalidOperandError(f"unknown Pauli symbol {part!r} in {text!r}") from None
            x |= bx << j
            z |= bz << j
        return cls(x, z, len(parts))

    @classmethod
    def from_symbols(cls, symbols: Iterable[str]) -> "PauliWord":
        return cls.parse(".".join(symbols))

    @classmethod
    def identity(cls, length: int) -> "PauliWord":
        return cls(0, 0, length)

    @classmethod
    def from_code(cls, code: int, length: int) -> "PauliWord":
        """Inverse of :attr:`code`."""
        x = z = 0
        for j in range(length):
            pair = (code >> (2 * (length - 1 - j))) & 0b11
            x |= (pair & 1) << j
            z |= (pair >> 1) << j
        return cls(x, z, length)

    def symbol(self, j: int) -> str:
        return _BITS_SYMBOL[((self.x >> j) & 1, (self.z >> j) & 1)]

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(self.symbol(j) for j in range(self.length))

    def bits(self, j: int) -> tuple[int, int]:
        return (self.x >> j) & 1, (self.z >> j) & 1

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def code(self) -> int:
        # 2n-bit encoding, symbol 0 most significant; per symbol x is the low bit
        value = 0
        for j in range(self.length):
            bx, bz = self.bits(j)
            value = (value << 2) | (bz << 1) | bx
        return value

    def __mul__(self, other: "PauliWord") -> "PauliWord":
        return mul(self, other)

    def __lt__(self, other: "PauliWord") -> bool:
        return (self.length, self.code) < (other.length, other.code)

    def __str__(self) -> str:
        return ".".join(self.symbols)

    def __repr__(self) -> str:
        return f"PauliWord({str(self)!r})"


def word(text: str) -> PauliWord:
    """Shorthand for :meth:`PauliWord.parse`."""
    return PauliWord.parse(text)


def mul(a: PauliWord, b: PauliWord) -> PauliWord:
    """Modified product of two words of equal length."""
    if a.length != b.length:
        raise InvalidOperandError(f"length mismatch: {a} vs {b}")
    return PauliWord(a.x ^ b.x, a.z ^ b.z, a.length)


def product(words: Iterable[PauliWord], length: int | None = None) -> PauliWord:
    """Product of a sequence of words; the empty product needs ``length``."""
    acc = None if length is None else PauliWord.identity(length)
    for w in words:
        acc = w if acc is None else mul(acc, w)
    if acc is None:
        raise InvalidOperandError("empty product without a word length")
    return acc


def all_words(length: int) -> Iterator[PauliWord]:
    """Every element of G_length, in canonical (code) order."""
    for code in range(4**length):
        yield PauliWord.from_code(code, length)


def _uniform_length(words: Iterable[PauliWord]) -> int:
    lengths = {w.length for w in words}
    if not lengths:
        raise InvalidOperandError("empty set of words")
    if len(lengths) != 1:
        raise InvalidOperandError(f"words of mixed length {sorted(lengths)}")
    return lengths.pop()


def is_subgroup(words: Iterable[PauliWord]) -> bool:
    """True iff ``words`` contains the identity and is product-closed."""
    s = frozenset(words)
    n = _uniform_length(s)
    if PauliWord.identity(n) not in s:
        return False
    return all(mul(a, b) in s for a, b in itertools.combinations(s, 2))


def span(generators: Iterable[PauliWord], length: int | None = None) -> frozenset[PauliWord]:
    """Smallest subgroup containing ``generators``."""
    gens = list(generators)
    n = _uniform_length(gens) if length is None else length
    elems = {PauliWord.identity(n)}
    for g in gens:
        if g not in elems:
            elems |= {mul(g, e) for e in elems}
    return frozenset(elems)


@dataclass(frozen=True)
class Subgroup:
    """A subgroup of G_n, given by its full element set."""

    elements: frozenset

    def __post_init__(self):
        object.__setattr__(self, "elements", frozenset(self.elements))
        if not is_subgroup(self.elements):
            raise InvalidOperandError("elements do not form a subgroup")

    @classmethod
    def of(cls, *texts: str) -> "Subgroup":
        return cls(frozenset(word(t) for t in texts))

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def word_length(self) -> int:
        return next(iter(self.elements)).length

    def sorted_elements(self) -> list[PauliWord]:
        return sorted(self.elements, key=lambda w: w.code)

    def sort_key(self) -> tuple[int, ...]:
        return tuple(w.code for w in self.sorted_elements())

    def __contains__(self, item) -> bool:
        return item in self.elements

    def __iter__(self):
        return iter(self.sorted_elements())

    def __len__(self) -> int:
        return len(self.elements)

    def __str__(self) -> str:
        return "{" + ", ".join(str(w) for w in self.sorted_elements()) + "}"


def are_disjoint(g1: Subgroup | Iterable[PauliWord], g2: Subgroup | Iterable[PauliWord]) -> bool:
    """True iff the two subgroups share nothing but the identity."""
    e1 = g1.elements if isinstance(g1, Subgroup) else frozenset(g1)
    e2 = g2.elements if isinstance(g2, Subgroup) else frozenset(g2)
    n = _uniform_length(e1 | e2)
    return e1 & e2 == {PauliWord.identity(n)}


def _rref_bases(dim: int, rank: int) -> Iterator[list[int]]:
    """Row-reduced echelon bases of every rank-``rank`` subspace of GF(2)^dim.

    Column c is bit ``dim - 1 - c`` of the vector.  Each subspace has exactly
    one RREF basis, so every subspace is produced once.
    """
    for pivots in itertools.combinations(range(dim), rank):
        pivot_set = set(pivots)
        free_slots = [
            (i, c)
            for i, p in enumerate(pivots)
            for c in range(p + 1, dim)
            if c not in pivot_set
        ]
        for fill in itertools.product((0, 1), repeat=len(free_slots)):
            rows = [1 << (dim - 1 - p) for p in pivots]
            for (i, c), bit in zip(free_slots, fill):
                if bit:
                    rows[i] |= 1 << (dim - 1 - c)
            yield rows


def enumerate_subgroups(word_length: int, order: int) -> list[Subgroup]:
    """All subgroups of G_word_length of the given order, canonically sorted.

    Elements are ordered by their 2n-bit code and subgroups lexicographically
    by their sorted code tuples, so the output is reproducible across runs.
    """
    if word_length < 1:
        raise InvalidOperandError("word length must be positive")
    if order < 1 or order & (order - 1):
        raise InvalidOperandError(f"order {order} is not a power of 2")
    rank = order.bit_length() - 1
    dim = 2 * word_length
    if rank > dim:
        raise InvalidOperandError(f"order {order} exceeds |G_{word_length}| = {4**word_length}")

    found = []
    for rows in _rref_bases(dim, rank):
        codes = {0}
        for r in rows:
            codes |= {r ^ c for c in codes}
        found.append(tuple(sorted(codes)))
    found.sort()
    return [
        Subgroup(frozenset(PauliWord.from_code(c, word_length) for c in codes))
        for codes in found
    ]


def _check_lists(lists: Sequence[Sequence[PauliWord]], same_size: bool) -> int:
    if not lists:
        raise InvalidOperandError("no operator lists given")
    sizes = {len(ops) for ops in lists}
    if same_size and len(sizes) != 1:
        raise InvalidOperandError(f"ragged operator lists, sizes {sorted(sizes)}")
    if any(s == 0 or s & (s - 1) for s in sizes):
        raise InvalidOperandError("operator list sizes must be powers of 2")
    n = _uniform_length([w for ops in lists for w in ops])
    for ops in lists:
        if not ops[0].is_identity:
            raise InvalidOperandError(f"list {[str(w) for w in ops]} does not start with identity")
    return n


def derive_receiver_ops(sender_ops: Sequence[Sequence[PauliWord]]) -> tuple[PauliWord, ...]:
    """Receiver list making every column product the identity.

    Entry i is the product of all senders' i-th operators; since every word is
    its own inverse this is the unique N_i with A_i B_i ... D_i N_i = I.
    """
    n = _check_lists(sender_ops, same_size=True)
    return tuple(product((ops[i] for ops in sender_ops), n) for i in range(len(sender_ops[0])))


def index_map(ops: Sequence[PauliWord]) -> dict[tuple[int, int], int] | None:
    """Map (i, j) -> k with ops[i]·ops[j] = ops[k]; None if the list is not closed."""
    position = {w: k for k, w in enumerate(ops)}
    if len(position) != len(ops):
        return None
    table = {}
    for i, a in enumerate(ops):
        for j, b in enumerate(ops):
            k = position.get(mul(a, b))
            if k is None:
                return None
            table[i, j] = k
    return table


def validate_ordering(party_ops: Sequence[Sequence[PauliWord]]) -> bool:
    """True iff all lists realise one common index map (i, j) -> k.

    Lists of different sizes are compared on the indices they share.
    """
    _check_lists(party_ops, same_size=False)
    maps = []
    for ops in party_ops:
        table = index_map(ops)
        if table is None:
            return False
        maps.append(table)
    for a, b in itertools.combinations(maps, 2):
        for key, k in a.items():
            if key in b and b[key] != k:
                return False
    return True
