"""Tests for coherent/proper sequence checking, hats, and covers."""
import pytest
from hypothesis import given, settings, strategies as st

from talab.coherent import (
    CAP_BELOW,
    SUBSET_BELOW,
    BranchBaseSequence,
    CoherenceWitness,
    ListSequence,
    PeriodicBits,
    check_coherent,
    check_proper,
    coherence_report,
    find_witness,
    hat,
    is_cover,
    proper_certificate,
)
from talab.omega_sets import CylinderSet, LazySet, node_index
from talab.ordinals import Ordinal


def _progression(start: int, step: int, name: str) -> LazySet:
    def stream(start=start, step=step):
        def gen():
            k = start
            while True:
                yield k
                k += step
        return gen()
    return LazySet.from_predicate(
        lambda k, s=start, d=step: k >= s and (k - s) % d == 0,
        name=name, inf_witness=stream)


def _residue_classes() -> ListSequence:
    return ListSequence([_progression(i, 4, f"4k+{i}") for i in range(3)])


def _is_prime(k: int) -> bool:
    if k < 2:
        return False
    d = 2
    while d * d <= k:
        if k % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# PeriodicBits


class TestPeriodicBits:
    def test_canonical_forms(self):
        assert PeriodicBits.parse("0(0)*") == PeriodicBits.zeros()
        assert PeriodicBits.parse("(0101)*") == PeriodicBits.parse("(01)*")
        assert PeriodicBits.parse("11(01)*") == PeriodicBits.parse("1(10)*")
        assert str(PeriodicBits.zeros()) == "(0)*"
        assert str(PeriodicBits("0011", "1")) == "00(1)*"

    def test_equality_and_hash(self):
        a = PeriodicBits("01", "10")
        b = PeriodicBits.parse("01(10)*")
        assert a == b and hash(a) == hash(b)
        assert a != PeriodicBits("01", "01")

    def test_bits_and_prefix(self):
        x = PeriodicBits("01", "10")
        assert [x.bit(i) for i in range(7)] == [0, 1, 1, 0, 1, 0, 1]
        assert x.prefix(5) == "01101"
        assert x.prefix(0) == ""

    def test_flip(self):
        x = PeriodicBits.zeros().flip(2)
        assert x == PeriodicBits.parse("001(0)*")
        assert [x.bit(i) for i in range(5)] == [0, 0, 1, 0, 0]
        # flipping back restores the original
        assert x.flip(2) == PeriodicBits.zeros()

    def test_deviation(self):
        x = PeriodicBits.zeros()
        assert x.deviation(x.flip(5)) == 5
        assert PeriodicBits.parse("01(10)*").deviation(
            PeriodicBits.parse("0111(10)*")) == 3
        assert x.deviation(x) is None

    def test_zeros_then_ones(self):
        x = PeriodicBits.zeros_then_ones(3)
        assert [x.bit(i) for i in range(6)] == [0, 0, 0, 1, 1, 1]
        assert not x.eventually_zero
        assert PeriodicBits.zeros().eventually_zero
        assert x.first_one_at_or_after(0) == 3
        assert x.first_one_at_or_after(4) == 4
        assert PeriodicBits.zeros().first_one_at_or_after(0) is None

    def test_rejects_junk(self):
        with pytest.raises(ValueError):
            PeriodicBits("012", "0")
        with pytest.raises(ValueError):
            PeriodicBits("01", "")
        with pytest.raises(ValueError):
            PeriodicBits.parse("01(10")
        with pytest.raises(ValueError):
            PeriodicBits.parse("0x1")

    def test_parse_bare_string_pads_zeros(self):
        assert PeriodicBits.parse("01") == PeriodicBits("01", "0")

    @given(st.text(alphabet="01", max_size=5),
           st.text(alphabet="01", min_size=1, max_size=4))
    def test_parse_str_round_trip(self, head, cycle):
        x = PeriodicBits(head, cycle)
        y = PeriodicBits.parse(str(x))
        assert x == y
        reference = head + cycle * 20
        assert all(x.bit(i) == int(reference[i]) for i in range(len(reference)))

    @given(st.text(alphabet="01", max_size=4),
           st.text(alphabet="01", min_size=1, max_size=3),
           st.integers(min_value=0, max_value=12))
    def test_flip_changes_exactly_one_bit(self, head, cycle, pos):
        x = PeriodicBits(head, cycle)
        y = x.flip(pos)
        for i in range(20):
            if i == pos:
                assert y.bit(i) == 1 - x.bit(i)
            else:
                assert y.bit(i) == x.bit(i)
        assert x.deviation(y) == pos


# ---------------------------------------------------------------------------
# branch-generated base sequence


class TestBranchBaseSequence:
    def test_entries_all_zero_branch(self):
        seq = BranchBaseSequence(PeriodicBits.zeros())
        for n in range(6):
            assert seq.entry(n) == CylinderSet.cyl("0" * n + "1")

    def test_entries_all_one_branch(self):
        seq = BranchBaseSequence(PeriodicBits.ones())
        a0 = seq.entry(0)
        assert not a0.is_finite
        assert 0 in a0 and 1 in a0 and 2 not in a0
        assert a0 == CylinderSet.cyl("1").complement()

    def test_reflexive_witness(self):
        seq = BranchBaseSequence(PeriodicBits.ones())
        w = seq.witness(3, 3)
        assert w.kind == SUBSET_BELOW and w.F == frozenset()

    @given(st.text(alphabet="01", max_size=4),
           st.text(alphabet="01", min_size=1, max_size=3),
           st.integers(min_value=0, max_value=9),
           st.integers(min_value=0, max_value=9))
    @settings(max_examples=60, deadline=None)
    def test_witness_bit_rule_is_exact(self, head, cycle, i, j):
        x = PeriodicBits(head, cycle)
        alpha, beta = min(i, j), max(i, j) + 1
        seq = BranchBaseSequence(x)
        w = seq.witness(alpha, beta)
        assert w.F == frozenset()
        assert w.kind == (SUBSET_BELOW if x.bit(beta) == 1 else CAP_BELOW)
        v = w.verify(seq, Ordinal.nat(alpha), Ordinal.nat(beta), horizon=512)
        assert v.is_verified and v.exact

    def test_blocks_zero_branch_closed_form(self):
        seq = BranchBaseSequence(PeriodicBits.zeros())
        for n in range(10):
            assert seq.block(n) == CylinderSet.cyl("0" * n + "1")

    def test_block_spine_one_branch(self):
        seq = BranchBaseSequence(PeriodicBits.ones())
        assert seq.block(0) == CylinderSet.make(positive=["0"], plus=[0])
        assert seq.block(0) == seq.entry(0)
        assert seq.block(1) == CylinderSet.make(
            positive=["10"], plus=[node_index("1")])

    @given(st.text(alphabet="01", max_size=4),
           st.text(alphabet="01", min_size=1, max_size=3))
    @settings(max_examples=40, deadline=None)
    def test_blocks_disjointify_entries(self, head, cycle):
        x = PeriodicBits(head, cycle)
        seq = BranchBaseSequence(x)
        blocks = [seq.block(n) for n in range(7)]
        for i in range(7):
            for j in range(i + 1, 7):
                assert blocks[i].intersection(blocks[j]).is_empty
        acc = CylinderSet.empty()
        entries = CylinderSet.empty()
        for n in range(7):
            acc = acc.union(blocks[n])
            entries = entries.union(seq.entry(n))
            assert acc == entries
            # prefix union law: each entry sits inside the first n+1 blocks
            assert seq.entry(n).difference(acc).is_empty


# ---------------------------------------------------------------------------
# check_coherent


class TestCheckCoherent:
    def test_residue_classes_verified(self):
        seq = _residue_classes()
        v = check_coherent(seq, 3)
        assert v.is_verified
        assert not v.exact  # lazy tier holds only to the horizon

    def test_nested_pair_refuted(self):
        evens = _progression(0, 2, "evens")
        fours = _progression(0, 4, "4k")
        seq = ListSequence([evens, fours])
        v = check_coherent(seq, 2)
        assert v.is_refuted
        assert v.counterexample == ("0", "1")

    def test_single_entry_verified(self):
        seq = ListSequence([_progression(0, 2, "evens")])
        assert check_coherent(seq, 1).is_verified

    def test_branch_sequence_exact(self):
        seq = BranchBaseSequence(PeriodicBits.parse("01(10)*"))
        seq.materialize(8)
        v = check_coherent(seq, 8, horizon=512)
        assert v.is_verified and v.exact

    def test_stored_witness_is_used(self):
        evens = _progression(0, 2, "evens")
        odds = _progression(1, 2, "odds")
        stored = {(Ordinal.nat(0), Ordinal.nat(1)):
                  CoherenceWitness(CAP_BELOW, frozenset(), "disjoint")}
        seq = ListSequence([evens, odds], witnesses=stored)
        assert check_coherent(seq, 2).is_verified

    def test_restriction_stays_coherent(self):
        seq = _residue_classes().restrict(2)
        assert seq.length == Ordinal.nat(2)
        assert check_coherent(seq, 2).is_verified


# ---------------------------------------------------------------------------
# check_proper


class TestCheckProper:
    def test_residue_classes_proper(self):
        v = check_proper(_residue_classes(), 3)
        assert v.is_verified

    def test_swallowed_entry_refuted(self):
        seq = ListSequence([
            _progression(0, 2, "evens"),
            _progression(1, 2, "odds"),
            LazySet.from_predicate(_is_prime, name="primes"),
        ])
        v = check_proper(seq, 3)
        assert v.is_refuted
        assert v.counterexample == "2"
        assert v.horizon is not None

    def test_singleton_proper(self):
        seq = ListSequence([_progression(0, 2, "evens")])
        assert check_proper(seq, 1).is_verified

    def test_branch_sequence_proper_exact(self):
        seq = BranchBaseSequence(PeriodicBits.zeros())
        seq.materialize(8)
        v = check_proper(seq, 8)
        assert v.is_verified and v.exact

    def test_certificate_matches_block(self):
        seq = BranchBaseSequence(PeriodicBits.ones())
        seq.materialize(5)
        res = proper_certificate(seq, 3, range(3))
        assert not res.is_finite
        assert res == seq.block(3)


# ---------------------------------------------------------------------------
# hats


class TestHat:
    def test_disjoint_classes_hat_is_singleton(self):
        seq = _residue_classes()
        h = hat(seq, 1)
        assert h.member(1) is True
        assert h.member(0) is False
        assert h.member(2) is False  # above beta
        assert h.materialize() == [Ordinal.nat(1)]

    def test_level_zero_hat(self):
        h = hat(_residue_classes(), 0)
        assert h.materialize() == [Ordinal.nat(0)]

    def test_branch_zero_hat_singleton(self):
        seq = BranchBaseSequence(PeriodicBits.zeros())
        seq.materialize(6)
        assert hat(seq, 2).materialize() == [Ordinal.nat(2)]

    def test_branch_one_hat_is_initial_interval(self):
        seq = BranchBaseSequence(PeriodicBits.ones())
        seq.materialize(6)
        assert hat(seq, 3).materialize() == [Ordinal.nat(n) for n in range(4)]

    def test_member_blocked_is_none(self):
        far = LazySet.from_predicate(
            lambda k: k % 2 == 1 and k >= 10 ** 9, name="far odds")
        seq = ListSequence([far, _progression(0, 2, "evens")], horizon=256)
        assert hat(seq, 1, horizon=256).member(0) is None

    def test_out_of_domain_rejected(self):
        with pytest.raises(ValueError):
            hat(_residue_classes(), 3)

    def test_json_shape(self):
        out = hat(_residue_classes(), 1).to_json()
        assert out == {"beta": "1", "members": ["1"]}


# ---------------------------------------------------------------------------
# covers


class TestIsCover:
    def test_finite_domain_top_uncovered(self):
        seq = _residue_classes()
        v = is_cover(seq, S={0, 1, 2})
        assert v.is_refuted
        assert v.counterexample == "3"

    def test_finite_domain_without_top(self):
        v = is_cover(_residue_classes(), S={0, 1, 2}, include_top=False)
        assert v.is_verified

    def test_branch_prefix_cover(self):
        seq = BranchBaseSequence(PeriodicBits.zeros())
        seq.materialize(5)
        v = is_cover(seq, S={4}, F={0, 1, 2, 3})
        assert v.is_verified

    def test_missing_hat_uncovers_point(self):
        seq = BranchBaseSequence(PeriodicBits.zeros())
        seq.materialize(5)
        v = is_cover(seq, S={4}, F={0, 1, 2})
        assert v.is_refuted
        assert v.counterexample == "3"

    def test_rejects_index_outside_domain(self):
        with pytest.raises(ValueError):
            is_cover(_residue_classes(), S={5})


# ---------------------------------------------------------------------------
# search and report helpers


def test_find_witness_prefers_small_f():
    seq = _residue_classes()
    w = find_witness(seq, Ordinal.nat(0), Ordinal.nat(1))
    assert w is not None and w.kind == CAP_BELOW and w.F == frozenset()


def test_find_witness_uses_earlier_entries():
    evens = _progression(0, 2, "evens")
    odds = _progression(1, 2, "odds")
    all_k = LazySet.from_predicate(lambda k: True, name="omega")
    seq = ListSequence([evens, odds, all_k])
    # omega ⊆ odds ∪ evens, so the pair (2, 2) needs F = {0} or {1}... the
    # interesting pair is (0, 2): evens ⊆ omega needs no F at all
    w = find_witness(seq, Ordinal.nat(0), Ordinal.nat(2))
    assert w is not None
    v = w.verify(seq, Ordinal.nat(0), Ordinal.nat(2))
    assert v.is_verified


def test_witness_rejects_bad_f_index():
    seq = _residue_classes()
    w = CoherenceWitness(SUBSET_BELOW, frozenset({Ordinal.nat(2)}))
    v = w.verify(seq, Ordinal.nat(1), Ordinal.nat(2))
    assert v.is_refuted and v.exact


def test_witness_kind_validated():
    with pytest.raises(ValueError):
        CoherenceWitness("Sideways")


def test_coherence_report_shape():
    seq = _residue_classes()
    rep = coherence_report(seq, 3)
    assert set(rep) >= {"pairs", "proper", "hats"}
    assert rep["proper"]["status"] == "verified"
