import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_subgroups, oracle_mul, same_up_to_phase, word_matrix
from qconf.errors import InvalidOperandError
from qconf.pauli import (
    PauliWord,
    Subgroup,
    all_words,
    are_disjoint,
    derive_receiver_ops,
    enumerate_subgroups,
    index_map,
    is_subgroup,
    mul,
    product,
    span,
    validate_ordering,
    word,
)


def words_of(length):
    return st.builds(
        PauliWord,
        st.integers(0, 2**length - 1),
        st.integers(0, 2**length - 1),
        st.just(length),
    )


same_length_triples = st.integers(1, 6).flatmap(
    lambda n: st.tuples(words_of(n), words_of(n), words_of(n))
)


def ops(*texts):
    return [word(t) for t in texts]


class TestParsing:
    def test_round_trip_text(self):
        for w in all_words(2):
            assert word(str(w)) == w

    def test_code_round_trip(self):
        for n in (1, 2, 3):
            for code in range(4**n):
                assert PauliWord.from_code(code, n).code == code

    def test_code_layout(self):
        assert [str(PauliWord.from_code(c, 1)) for c in range(4)] == ["I", "X", "Z", "iY"]
        assert word("X.I").code == 0b0100

    @pytest.mark.parametrize("bad", ["", "Y", "X..Z", "iy"])
    def test_rejects_unknown_symbols(self, bad):
        with pytest.raises(InvalidOperandError):
            word(bad)


class TestMul:
    def test_examples(self):
        assert mul(word("X"), word("X")) == word("I")
        assert mul(word("X"), word("iY")) == word("Z")
        assert product(ops("iY.X", "X.X", "X.I")) == word("iY.I")

    def test_length_mismatch(self):
        with pytest.raises(InvalidOperandError):
            mul(word("X"), word("X.X"))

    def test_empty_product(self):
        assert product([], 2) == word("I.I")
        with pytest.raises(InvalidOperandError):
            product([])

    @pytest.mark.parametrize("n", [1, 2])
    def test_matches_matrix_oracle_exhaustively(self, n):
        for a, b in itertools.product(all_words(n), repeat=2):
            assert mul(a, b).symbols == oracle_mul(a.symbols, b.symbols)
            target = word_matrix(a.symbols) @ word_matrix(b.symbols)
            assert same_up_to_phase(word_matrix(mul(a, b).symbols), target)

    @given(same_length_triples)
    def test_group_axioms(self, abc):
        a, b, c = abc
        assert mul(a, b) == mul(b, a)
        assert mul(mul(a, b), c) == mul(a, mul(b, c))
        assert mul(a, a).is_identity
        assert mul(a, PauliWord.identity(a.length)) == a

    @pytest.mark.parametrize("n", [1, 2])
    def test_elementary_abelian(self, n):
        g = list(all_words(n))
        assert len(g) == 4**n
        assert is_subgroup(g)
        assert all(mul(a, a).is_identity for a in g)


class TestSubgroups:
    def test_is_subgroup_examples(self):
        assert is_subgroup(ops("I", "X"))
        assert not is_subgroup(ops("X", "Z"))
        assert is_subgroup(ops("I.I", "X.I", "I.X", "X.X"))
        assert not is_subgroup(ops("I", "X", "Z"))

    def test_is_subgroup_empty(self):
        with pytest.raises(InvalidOperandError):
            is_subgroup([])

    def test_disjointness(self):
        assert are_disjoint(Subgroup.of("I", "X"), Subgroup.of("I", "iY"))
        assert not are_disjoint(Subgroup.of("I", "X"), Subgroup.of("I", "X"))
        assert are_disjoint(Subgroup.of("I.I", "X.iY"), Subgroup.of("I.I", "X.Z"))

    def test_single_qubit_order_two(self):
        found = enumerate_subgroups(1, 2)
        assert [str(g) for g in found] == ["{I, X}", "{I, Z}", "{I, iY}"]
        for g, h in itertools.combinations(found, 2):
            assert are_disjoint(g, h)

    def test_trivial(self):
        assert [str(g) for g in enumerate_subgroups(1, 1)] == ["{I}"]

    @pytest.mark.parametrize("n,order", [(1, 2), (1, 4), (2, 2), (2, 4), (2, 8)])
    def test_counts_match_brute_force(self, n, order):
        ours = {g.elements for g in enumerate_subgroups(n, order)}
        brute = {frozenset(PauliWord.from_symbols(w) for w in grp) for grp in brute_subgroups(n, order)}
        assert ours == brute

    def test_frozen_counts(self):
        assert len(enumerate_subgroups(2, 4)) == 35
        assert len(enumerate_subgroups(2, 8)) == 15
        assert len(enumerate_subgroups(3, 2)) == 63

    def test_deterministic_order(self):
        first = [g.sort_key() for g in enumerate_subgroups(2, 4)]
        assert first == sorted(first)
        assert first == [g.sort_key() for g in enumerate_subgroups(2, 4)]

    @pytest.mark.parametrize("order", [3, 6, 0])
    def test_order_not_power_of_two(self, order):
        with pytest.raises(InvalidOperandError):
            enumerate_subgroups(2, order)

    def test_order_too_large(self):
        with pytest.raises(InvalidOperandError):
            enumerate_subgroups(1, 8)

    def test_span(self):
        assert span(ops("X.I", "I.X")) == frozenset(ops("I.I", "X.I", "I.X", "X.X"))


class TestReceiverOps:
    def test_two_sender_example(self):
        assert derive_receiver_ops([ops("I", "X"), ops("I", "iY")]) == tuple(ops("I", "Z"))

    def test_ghz_row(self):
        senders = [ops("I.I", "X.I"), ops("I.I", "X.X"), ops("I.I", "iY.X")]
        assert derive_receiver_ops(senders) == tuple(ops("I.I", "iY.I"))

    def test_two_party_limit(self):
        alice = ops("I", "X", "iY", "Z")
        assert derive_receiver_ops([alice]) == tuple(alice)

    def test_all_identity(self):
        assert derive_receiver_ops([ops("I.I", "I.I")] * 3) == tuple(ops("I.I", "I.I"))

    def test_ragged(self):
        with pytest.raises(InvalidOperandError):
            derive_receiver_ops([ops("I", "X"), ops("I", "X", "iY", "Z")])

    @given(st.integers(1, 3).flatmap(lambda k: st.lists(
        st.sampled_from(enumerate_subgroups(2, 2**k)), min_size=1, max_size=4)))
    def test_columns_multiply_to_identity(self, groups):
        lists = [g.sorted_elements() for g in groups]
        derived = derive_receiver_ops(lists)
        assert is_subgroup(derived)
        for i in range(len(derived)):
            assert product([l[i] for l in lists] + [derived[i]]).is_identity


class TestOrdering:
    def test_three_party_example(self):
        assert validate_ordering([ops("I", "X"), ops("I", "iY"), ops("I", "Z")])

    def test_single_party(self):
        assert validate_ordering([ops("I.I", "X.I", "Z.Z", "iY.Z")])

    def test_order_four_lists_always_agree(self):
        # with the identity first, an order-4 list has only the XOR index map
        p1 = ops("I.I", "X.I", "I.X", "X.X")
        p2 = ops("I.I", "I.iY", "iY.I", "iY.iY")
        assert validate_ordering([p1, p2])
        assert validate_ordering([[p1[0], p1[2], p1[1], p1[3]], p2])

    def test_swapped_entries_in_order_eight(self):
        xs = sorted(span(ops("X.I.I", "I.X.I", "I.I.X")), key=lambda w: w.code)
        zs = sorted(span(ops("Z.I.I", "I.Z.I", "I.I.Z")), key=lambda w: w.code)
        assert validate_ordering([xs, zs])
        swapped = list(xs)
        swapped[3], swapped[4] = swapped[4], swapped[3]
        assert not validate_ordering([swapped, zs])

    def test_non_closed_list(self):
        assert index_map(ops("I", "X")) is not None
        assert not validate_ordering([ops("I.I", "X.I"), ops("I.I", "X.I", "Z.I", "X.Z")])

    def test_identity_must_come_first(self):
        with pytest.raises(InvalidOperandError):
            validate_ordering([ops("X", "I")])
