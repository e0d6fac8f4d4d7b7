"""Constructor tests: stage-0 algebras, permutation-transport extensions,
pipelines, and splitter-driven extensions."""
import pytest

from talab.coherent import (
    CAP_BELOW,
    SUBSET_BELOW,
    PeriodicBits,
    check_coherent,
    check_proper,
)
from talab.construct import (
    SplitterContext,
    base_algebra,
    blocks,
    extend,
    splitting_extend,
    staged_pipeline,
)
from talab.omega_sets import (
    CylinderSet,
    DigitSet,
    LazySet,
    enumerate_node,
    node_index,
)
from talab.ordinals import Ordinal
from talab.talgebra import (
    Branch,
    BranchSequence,
    Node,
    TTree,
    hats_disjoint,
    ultrafilter_decide,
    validate,
)

ZEROS = PeriodicBits.zeros()
ONES = PeriodicBits.ones()


def zeros_branch() -> Branch:
    return Branch.from_segments([ZEROS])


def ones_branch() -> Branch:
    return Branch.from_segments([ONES])


class Swap:
    """Involution exchanging two indices; its own inverse."""

    def __init__(self, a: int, b: int):
        self.a, self.b = a, b

    def __call__(self, k: int) -> int:
        if k == self.a:
            return self.b
        if k == self.b:
            return self.a
        return k

    inverse = __call__


def first_one_position(m: int):
    bits = enumerate_node(m)
    pos = bits.find("1")
    return pos if pos >= 0 else None


class TestBaseAlgebra:
    def test_default_matches_plain_base(self):
        tree = base_algebra()
        assert tree.a(Node((), "")) == CylinderSet.empty()
        assert tree.a(Node((), "0")) == CylinderSet.cyl("1")
        assert tree.a(Node((), "1")) == CylinderSet.cyl("1").complement()
        assert tree.stages[0].kind == "base"
        base = TTree.base()
        for tail in ("01", "010", "11"):
            assert tree.a(Node((), tail)) == base.a(Node((), tail))

    def test_unrestricted_index_set_ignores_permutation(self):
        swap = Swap(2, 5)
        tree = base_algebra(swap)
        assert tree.a(Node((), "0")) == CylinderSet.cyl("1")
        assert tree.stages[0].permutation is swap
        assert tree.stages[0].kind == "base"

    def test_restricted_index_set_traces(self):
        tree = base_algebra(None, DigitSet(0))
        a0 = tree.a(Node((), "0"))
        a1 = tree.a(Node((), "1"))
        assert not isinstance(a0, CylinderSet)
        for m in range(256):
            expected = m % 2 == 0 and enumerate_node(m).startswith("1")
            assert (m in a0) == expected
            assert (m in a1) == (not expected)
        assert tree.stages[0].kind == "twisted"

    def test_restricted_index_set_with_permutation(self):
        swap = Swap(2, 4)
        tree = base_algebra(swap, DigitSet(0))
        a0 = tree.a(Node((), "0"))
        # trace membership: preimage under the swap must be even
        for m in range(64):
            expected = swap(m) % 2 == 0 and \
                enumerate_node(m).startswith("1")
            assert (m in a0) == expected

    def test_restricted_locator_scans(self):
        tree = base_algebra(None, DigitSet(0))
        table = blocks(tree, ones_branch())
        assert table.locator(5) == 0
        assert table.locator(2) == 1
        assert table.locator(30) == 4

    def test_finite_trace_rejected(self):
        with pytest.raises(ValueError, match="hitting"):
            base_algebra(None, CylinderSet.finite([0, 1]))

    def test_callable_without_inverse_rejected(self):
        with pytest.raises(ValueError, match="inverse"):
            base_algebra(lambda k: k, DigitSet(0))

    def test_unknown_hitting_needs_override(self):
        empty = LazySet.from_predicate(lambda k: False, name="void")
        with pytest.raises(ValueError, match="unresolved"):
            base_algebra(None, empty)
        tree = base_algebra(None, empty, override_unknown=True)
        a0 = tree.a(Node((), "0"))
        assert all(m not in a0 for m in range(64))


class TestBlocks:
    def test_zero_branch_blocks_symbolic(self):
        tree = TTree.base()
        table = blocks(tree, zeros_branch())
        assert table.block(0) == CylinderSet.cyl("1")
        assert table.block(1) == CylinderSet.cyl("01")
        assert table.block(2) == CylinderSet.cyl("001")
        assert all(table.L_member(n) for n in range(16))
        assert table.locator(node_index("001")) == 2


class TestExtend:
    def _extended(self):
        tree = TTree.base()
        return tree, extend(tree, None, [zeros_branch()])

    def test_rejects_unregistered_branch(self):
        tree = TTree.base()
        foreign = Branch.from_segments([ZEROS, ZEROS])
        with pytest.raises(ValueError, match="not a branch"):
            extend(tree, None, [foreign])

    def test_rejects_short_and_repeated_grafts(self):
        _, ext = self._extended()
        with pytest.raises(ValueError, match="full-length"):
            extend(ext, None, [ones_branch()])
        with pytest.raises(ValueError, match="already grafted"):
            extend(TTree.base(), None, [zeros_branch(), zeros_branch()])

    def test_union_of_blocks_matches_cylinder_oracle(self):
        _, ext = self._extended()
        a0 = ext.a(Node((zeros_branch(),), "0"))
        oracle = CylinderSet.empty()
        for k in (2, 5, 6, 11):
            oracle = oracle.union(CylinderSet.cyl("0" * k + "1"))
        for m in range(4096):
            assert (m in a0) == oracle.contains(m)

    def test_membership_through_locator(self):
        _, ext = self._extended()
        graft = zeros_branch()
        a0 = ext.a(Node((graft,), "0"))
        a1 = ext.a(Node((graft,), "1"))
        assert node_index("001") in a0
        for spine in (0, 1, 3, 7, 15):
            assert spine not in a0
            assert spine in a1

    def test_limit_node_empty_exact(self):
        _, ext = self._extended()
        top = ext.a(Node((zeros_branch(),), ""))
        assert isinstance(top, CylinderSet) and top.is_empty

    def test_stage_records(self):
        tree, ext = self._extended()
        assert ext.stage_count == 2
        assert ext.stages[1].kind == "transport"
        assert ext.stages[1].Y == (zeros_branch(),)
        assert ext.stages[0] == tree.stages[0]

    def test_complement_law_sampled(self):
        _, ext = self._extended()
        graft = zeros_branch()
        for tail in ("0", "00", "01", "010"):
            node = Node((graft,), tail)
            a = ext.a(node)
            twin = ext.a(node.dagger())
            for m in range(512):
                assert (m in a) != (m in twin)

    def test_new_branch_coherent_to_depth_24(self):
        _, ext = self._extended()
        x2 = Branch.from_segments([ZEROS, ZEROS])
        seq = BranchSequence(ext, x2)
        seq.materialize(24)
        coh = check_coherent(seq, seq.length, 2048)
        assert coh.is_verified, coh.reason

    def test_new_branch_proper_on_first_levels(self):
        # residue members of block-union entries grow doubly exponentially
        # with the level, so the bounded scan only reaches the first few
        _, ext = self._extended()
        x2 = Branch.from_segments([ZEROS, ZEROS])
        seq = BranchSequence(ext, x2)
        seq.materialize(5)
        prop = check_proper(seq, seq.length, 2048)
        assert prop.is_verified, prop.reason

    def test_mixed_witness_frozen(self):
        _, ext = self._extended()
        x2 = Branch.from_segments([ZEROS, ZEROS])
        w = ext.branch_witness(x2, Ordinal.nat(2), Ordinal(1, 0))
        assert w.kind == SUBSET_BELOW
        assert w.F == frozenset({Ordinal.nat(0), Ordinal.nat(1)})
        w2 = ext.branch_witness(x2, Ordinal.nat(2), Ordinal(1, 1))
        assert w2.kind == CAP_BELOW
        assert w2.F == frozenset()
        seq = BranchSequence(ext, x2)
        seq.materialize(12)
        assert w.verify(seq, Ordinal.nat(2), Ordinal(1, 0), 2048).is_verified
        assert w2.verify(seq, Ordinal.nat(2), Ordinal(1, 1), 2048).is_verified

    def test_new_level_pairs_use_bit_rule(self):
        _, ext = self._extended()
        x2 = Branch.from_segments([ZEROS, ZEROS])
        w = ext.branch_witness(x2, Ordinal(1, 0), Ordinal(1, 5))
        assert w.kind == CAP_BELOW and w.F == frozenset()
        x2_ones = Branch((zeros_branch(),), ONES)
        w = ext.branch_witness(x2_ones, Ordinal(1, 0), Ordinal(1, 3))
        assert w.kind == SUBSET_BELOW and w.F == frozenset()

    def test_old_pairs_delegate(self):
        _, ext = self._extended()
        x2 = Branch.from_segments([ZEROS, ZEROS])
        w = ext.branch_witness(x2, Ordinal.nat(0), Ordinal.nat(3))
        assert w.kind == CAP_BELOW
        assert w.note == "branch bit rule"

    def test_transported_locator_sound(self):
        _, ext = self._extended()
        x2 = Branch.from_segments([ZEROS, ZEROS])
        table = blocks(ext, x2)
        for m in range(200):
            k = table.locator(m)
            if k is None:
                assert all(m not in table.block(n) for n in range(16))
            else:
                assert m in table.block(k)
                assert all(m not in table.block(n) for n in range(k))

    def test_locator_uncovered_spine(self):
        _, ext = self._extended()
        table = blocks(ext, Branch.from_segments([ZEROS, ZEROS]))
        for spine in (0, 1, 3, 7):
            assert table.locator(spine) is None

    def test_block_partition_prefix_union(self):
        _, ext = self._extended()
        table = blocks(ext, Branch.from_segments([ZEROS, ZEROS]))
        union_members = {m for m in range(256) if m in table.prefix_union(6)}
        cell_members = set()
        for n in range(6):
            blk = table.block(n)
            got = {m for m in range(256) if m in blk}
            assert not (got & cell_members)
            cell_members |= got
        assert union_members == cell_members

    def test_hats_disjoint_at_new_level(self):
        _, ext = self._extended()
        x2 = Branch.from_segments([ZEROS, ZEROS])
        verdict = hats_disjoint(ext, x2, Ordinal(1, 0))
        assert not verdict.is_refuted

    def test_ultrafilter_decisions_on_extension(self):
        _, ext = self._extended()
        x2 = Branch.from_segments([ZEROS, ZEROS])
        graft = zeros_branch()
        on_branch = ultrafilter_decide(ext, x2, Node((graft,), "0"))
        assert on_branch.answer == "out"
        twin = ultrafilter_decide(ext, x2, Node((graft,), "1"))
        assert twin.answer == "in"
        diverged = ultrafilter_decide(ext, x2, Node((graft,), "01"))
        assert diverged.answer == "in"

    def test_unknown_hitting_needs_override(self):
        tree = TTree.base()
        collapse = lambda k: 0
        with pytest.raises(ValueError, match="unresolved"):
            extend(tree, collapse, [zeros_branch()])
        ext = extend(tree, collapse, [zeros_branch()],
                     override_unknown=True)
        a0 = ext.a(Node((zeros_branch(),), "0"))
        a1 = ext.a(Node((zeros_branch(),), "1"))
        assert all(m not in a0 for m in range(64))
        assert all(m in a1 for m in range(64))


class TestPipeline:
    def test_empty_script(self):
        tree = staged_pipeline([])
        assert tree.stage_count == 1
        assert tree.a(Node((), "0")) == CylinderSet.cyl("1")

    def test_one_stage(self):
        tree = staged_pipeline([{"branches": [["(0)*"]]}])
        assert tree.stage_count == 2
        x2 = Branch.from_segments([ZEROS, ZEROS])
        assert tree.contains_branch(x2)
        assert x2.length == Ordinal(2, 0)

    def test_two_stages(self):
        # second-stage cells that meet deep cylinders have first members
        # past any scanning horizon, so the hitting check comes back
        # unknown and the stage needs the explicit override
        tree = staged_pipeline([
            {"branches": [["(0)*"]]},
            {"branches": [["(0)*", "(0)*"]], "override_unknown": True},
        ])
        assert tree.stage_count == 3
        x3 = Branch.from_segments([ZEROS, ZEROS, ZEROS])
        assert tree.contains_branch(x3)
        assert x3.length == Ordinal(3, 0)
        a0 = tree.a(x3.node_at(Ordinal(2, 1)))
        assert isinstance(a0, LazySet)

    def test_two_stages_without_override_blocked(self):
        script = [
            {"branches": [["(0)*"]]},
            {"branches": [["(0)*", "(0)*"]]},
        ]
        with pytest.raises(ValueError, match="stage 1.*override"):
            staged_pipeline(script)

    def test_branch_shorthand(self):
        tree = staged_pipeline([{"branches": ["(0)*"]}])
        assert tree.stage_count == 2

    def test_stage_error_names_stage(self):
        script = [
            {"branches": [["(0)*"]]},
            {"branches": [["(1)*", "(0)*"]]},
        ]
        with pytest.raises(ValueError, match="stage 1"):
            staged_pipeline(script)


class TestSplittingExtend:
    def _context(self):
        return SplitterContext([{"ones": CylinderSet.cyl("1")}],
                               lambda xi: DigitSet(xi))

    def test_even_indexed_blocks(self):
        tree, report = splitting_extend(
            TTree.base(), self._context(), {zeros_branch(): {}})
        a0 = tree.a(Node((zeros_branch(),), "0"))
        a1 = tree.a(Node((zeros_branch(),), "1"))
        for m in range(4096):
            pos = first_one_position(m)
            expected = pos is not None and pos % 2 == 0
            assert (m in a0) == expected
        for m in range(512):
            assert (m in a0) != (m in a1)
        assert tree.stage_count == 2
        assert tree.stages[1].kind == "splitter"
        assert report.verdict.is_verified

    def test_certificates_and_kernel(self):
        tree, report = splitting_extend(
            TTree.base(), self._context(), {zeros_branch(): {}})
        cert = report.certificates[0]["ones"]
        assert cert.is_verified and cert.exact
        ins, outs = cert.witnesses
        assert len(ins) >= 20 and len(outs) >= 20
        entry = report.kernel[str(zeros_branch())]
        assert entry["xi"] == 0
        assert entry["level"] == str(Ordinal(1, 0))
        assert entry["splits"]["ones"].is_verified
        js = report.to_json()
        assert js["verdict"]["status"] == "verified"
        assert js["certificates"]["0"]["ones"]["status"] == "verified"

    def test_assigned_stage_overrides_default(self):
        tree, report = splitting_extend(
            TTree.base(), self._context(), {zeros_branch(): {"": 3}})
        a0 = tree.a(Node((zeros_branch(),), "0"))
        for m in range(512):
            pos = first_one_position(m)
            expected = pos is not None and (pos >> 3) & 1 == 0
            assert (m in a0) == expected
        assert 3 in report.certificates

    def test_failed_split_named_not_raised(self):
        ctx = SplitterContext([{"sub": CylinderSet.cyl("11")}],
                              lambda xi: CylinderSet.cyl("1"))
        tree, report = splitting_extend(
            TTree.base(), ctx, {zeros_branch(): {}})
        assert isinstance(tree, TTree)
        verdict = report.verdict
        assert verdict.is_refuted
        assert verdict.counterexample == "sub"
        assert "sub" in verdict.reason

    def test_empty_stage_listing_accepted(self):
        ctx = SplitterContext([], lambda xi: DigitSet(xi))
        _, report = splitting_extend(
            TTree.base(), ctx, {zeros_branch(): {}})
        assert report.verdict.is_verified

    def test_shared_stage_witnesses(self):
        _, _ = self._context(), None
        ctx = self._context()
        tree, _ = splitting_extend(
            TTree.base(), ctx, {zeros_branch(): {"": 2, "0": 2}})
        x2 = Branch.from_segments([ZEROS, ZEROS])
        w = tree.branch_witness(x2, Ordinal(1, 0), Ordinal(1, 1))
        assert w.kind == SUBSET_BELOW and w.F == frozenset()
        w2 = tree.branch_witness(x2, Ordinal(1, 1), Ordinal(1, 2))
        assert w2.kind == CAP_BELOW
        assert "unwitnessed" in w2.note

    def test_mixed_witness_on_splitter_stage(self):
        ctx = self._context()
        tree, _ = splitting_extend(
            TTree.base(), ctx, {zeros_branch(): {}})
        x2 = Branch.from_segments([ZEROS, ZEROS])
        w = tree.branch_witness(x2, Ordinal.nat(2), Ordinal(1, 0))
        assert w.kind == SUBSET_BELOW
        assert w.F == frozenset({Ordinal.nat(1)})
        seq = BranchSequence(tree, x2)
        seq.materialize(8)
        assert w.verify(seq, Ordinal.nat(2), Ordinal(1, 0), 2048).is_verified

    def test_validate_axioms_on_splitter_tree(self):
        tree, _ = splitting_extend(
            TTree.base(), self._context(), {zeros_branch(): {}})
        report = validate(tree, 3)
        assert report.axioms["complement"].is_verified
        assert report.axioms["empty_levels"].is_verified
