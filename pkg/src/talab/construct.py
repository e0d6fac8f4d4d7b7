"""Stage constructors for twinned-tree algebras.

Four ways to build or grow a tree: the stage-0 algebra over a permuted
index set, the permutation-transport extension that grafts new copies of
2^{<omega} above chosen branches, a declarative pipeline folding such
extensions, and a splitter-driven extension whose new generators pick
blocks through a family of splitting sets.

Every constructor keeps the twin-complement law by construction and
emits coherence witnesses for the branch sequences of the tree it
returns.  Preconditions are checked up front: a refuted check rejects
the construction, an unresolved one rejects it unless explicitly
overridden.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence

from .coherent import (
    CAP_BELOW,
    SUBSET_BELOW,
    CoherenceWitness,
    PeriodicBits,
    check_coherent,
)
from .omega_sets import (
    CylinderSet,
    DEFAULT_BUDGET,
    DEFAULT_HORIZON,
    DEFAULT_WITNESSES,
    EvaluableSet,
    LazySet,
    Verdict,
    certified_infinite,
    enumerate_node,
    is_cylinder,
    node_extends,
    node_index,
    set_contains,
    splits,
)
from .ordinals import Ordinal
from .talgebra import (
    BlockTable,
    Branch,
    BranchSequence,
    Node,
    StageRecord,
    TTree,
    first_entry_level,
    validate,
)

__all__ = [
    "ConstructionRefuted",
    "ConstructionBlocked",
    "base_algebra",
    "blocks",
    "extend",
    "staged_pipeline",
    "SplitterContext",
    "SplitReport",
    "splitting_extend",
]


class ConstructionRefuted(ValueError):
    """A construction gate came back refuted; the step is rejected."""


class ConstructionBlocked(ValueError):
    """A construction gate came back unknown and no override was given."""


def _apply(pi: Optional[Callable[[int], int]], k: int) -> int:
    return k if pi is None else pi(k)


def _all_tails(depth: int) -> Iterator[str]:
    yield ""
    layer = [""]
    for _ in range(depth):
        layer = [t + b for t in layer for b in "01"]
        yield from layer


def _twin_cylinder_generator(tree: TTree, node: Node) -> CylinderSet:
    if not node.tail:
        return CylinderSet.empty()
    on = CylinderSet.cyl(node.tail[:-1] + "1")
    return on if node.tail[-1] == "0" else on.complement()


def _bit_rule_witness(tree: TTree, x: Branch, alpha: Ordinal,
                      beta: Ordinal) -> CoherenceWitness:
    kind = SUBSET_BELOW if x.bit(beta) == 1 else CAP_BELOW
    return CoherenceWitness(kind, frozenset(), "branch bit rule")


# ---------------------------------------------------------------------------
# stage 0


def base_algebra(pi: Optional[Callable[[int], int]] = None,
                 L: Optional[EvaluableSet] = None, *,
                 depth: int = 4, search_bound: int = 512,
                 override_unknown: bool = False,
                 name: str = "base") -> TTree:
    """The stage-0 tree: child 0 of rho carries the trace of the cylinder
    above rho's on-sibling on the permuted index set, child 1 the
    complement, limit nodes the empty set.

    With an unrestricted index set the image of the permutation is all of
    omega and the generators are exact cylinders; the permutation is still
    recorded on the stage.  A restricted index set needs the permutation's
    inverse for pointwise queries, and the sets drop to the lazy tier.

    The hitting precondition (every cylinder meets the permuted index
    trace) holds structurally in the unrestricted case.  Otherwise it is
    checked to `depth`: exact refutation when the index set is finite on
    the exact tier, else a bounded index scan whose silence is Unknown and
    rejects the construction unless `override_unknown` is set.
    """
    if L is None:
        note = "twin cylinders over the identity enumeration"
        if pi is not None:
            note = "twin cylinders; permutation recorded"
        return TTree([StageRecord(0, (), pi, note, "base")],
                     _twin_cylinder_generator, _bit_rule_witness, name)

    inverse = (lambda k: k) if pi is None else getattr(pi, "inverse", None)
    exact_finite = is_cylinder(L) and L.is_finite
    if inverse is None and not exact_finite:
        raise ValueError("permutation must expose an inverse when the "
                         "index set is restricted")

    verdict = _base_hitting(pi, L, inverse, depth, search_bound)
    if verdict.is_refuted:
        raise ConstructionRefuted(
            f"hitting condition fails: {verdict.reason}")
    if verdict.is_unknown and not override_unknown:
        raise ConstructionBlocked(
            f"hitting condition unresolved ({verdict.reason}); "
            "pass override_unknown=True to proceed")

    if exact_finite and inverse is None:
        image = frozenset(_apply(pi, j) for j in L.finite_members())
        in_image = image.__contains__
    else:
        def in_image(k: int) -> bool:
            return set_contains(L, inverse(k))

    def gen(t: TTree, node: Node) -> EvaluableSet:
        if not node.tail:
            return CylinderSet.empty()
        target = node.tail[:-1] + "1"
        flip = node.tail[-1] == "1"

        def member(k: int, gas) -> bool:
            gas.tick()
            ins = in_image(k) and node_extends(enumerate_node(k), target)
            return (not ins) if flip else ins

        return LazySet(member, f"a{node.label()}", DEFAULT_BUDGET)

    record = StageRecord(0, (), pi, "cylinder trace on a permuted index set",
                         "twisted")
    return TTree([record], gen, _bit_rule_witness, name)


def _base_hitting(pi, L, inverse, depth: int, search_bound: int) -> Verdict:
    if is_cylinder(L) and L.is_finite:
        image = sorted(_apply(pi, j) for j in L.finite_members())
        nodes = [enumerate_node(k) for k in image]
        for tail in _all_tails(depth):
            if not any(node_extends(bits, tail) for bits in nodes):
                return Verdict.refuted(
                    f"no index of the finite trace reaches cylinder <{tail}>",
                    counterexample=tail, exact=True)
        return Verdict.verified(
            f"finite trace meets all cylinders to depth {depth}", exact=True)
    for tail in _all_tails(depth):
        hit = None
        for k in range(search_bound):
            if node_extends(enumerate_node(k), tail) and \
                    set_contains(L, inverse(k)):
                hit = k
                break
        if hit is None:
            return Verdict.unknown(
                f"no index below {search_bound} meets cylinder <{tail}>",
                horizon=search_bound)
    return Verdict.verified(
        f"all cylinders to depth {depth} met below index {search_bound}")


# ---------------------------------------------------------------------------
# block tables with transported locator views


def blocks(tree: TTree, x: Branch, scan_limit: int = 256) -> BlockTable:
    """The block table of a registered branch, with per-stage locator
    views when every stage along the branch supports the transport
    formula (pure stage 0, permutation-transport stages above).  Branches
    through a twisted or splitter stage fall back to the bounded scan.
    """
    stage0_pure = tree.stages[0].kind == "base"
    tables: list[BlockTable] = []
    for j, br in enumerate(x.chain):
        transported = (j >= 1 and stage0_pure and
                       all(tree.stages[i].kind == "transport"
                           for i in range(1, j + 1)))
        views = _transport_views(tree, br, tuple(tables)) if transported \
            else None
        tables.append(BlockTable(tree, br, scan_limit, views))
    return tables[-1]


def _transport_views(tree: TTree, branch: Branch,
                     lower: tuple) -> Callable[[int], list]:
    """First-entry levels of one index in every segment view.

    Segment 0 reads the index's own node bits against the pattern.  Each
    later segment first locates the index's cell in the previous stage's
    table; the cell index, pushed through that stage's permutation, plays
    the role the node bits played at stage 0.  Uncovered indices sit in
    every 1-child, so their first entry is the segment's first 1-bit.
    """
    segs = branch.segments

    def views(m: int) -> list:
        out = [first_entry_level(enumerate_node(m), segs[0])]
        for i in range(1, len(segs)):
            k = lower[i - 1].locator(m)
            if k is None:
                out.append(segs[i].first_one_at_or_after(0))
            else:
                pi = tree.stages[i].permutation
                out.append(first_entry_level(
                    enumerate_node(_apply(pi, k)), segs[i]))
        return out

    return views


# ---------------------------------------------------------------------------
# coherence witnesses for mixed old/new level pairs


def _check_grafts(tree: TTree, Y: tuple, s: int) -> None:
    seen = set()
    for y in Y:
        if not tree.contains_branch(y):
            raise ValueError(f"graft {y} is not a branch of the tree")
        if len(y.segments) != s:
            raise ValueError(f"graft {y} is not a full-length branch "
                             f"(want {s} segments)")
        if y in seen:
            raise ValueError(f"branch {y} is already grafted")
        seen.add(y)


def _mixed_witness(old_tree: TTree, y: Branch, table: BlockTable,
                   alpha: Ordinal,
                   in_union: Callable[[int], bool]) -> CoherenceWitness:
    """Witness for an old level alpha against a new-stage entry that is a
    union of the grafted branch's cells.

    The old entry is covered by the cells with enumeration index at most
    n = e^{-1}(alpha).  Scanning those cells in order, the first one whose
    old witness against alpha absorbs the entry (or the cell of alpha
    itself) is the pivot; every other cell's trace of the old entry is
    absorbed strictly below alpha, by the level itself when it enumerates
    below alpha, by the old cap witness when above, and by the pivot's
    absorption levels past the pivot.  The pivot cell's side of the new
    entry decides the witness kind, and the absorbed levels on the other
    side make up F.
    """
    e = table.enumeration
    n = e.inverse(alpha)
    pivot = n
    f_star: frozenset = frozenset()
    g: dict[int, frozenset] = {}
    for k in range(n):
        ek = e(k)
        if ek < alpha:
            g[k] = frozenset([ek])
            continue
        w = old_tree.branch_witness(y, alpha, ek)
        if w.kind == SUBSET_BELOW:
            pivot, f_star = k, w.F
            break
        g[k] = w.F
    for k in range(pivot + 1, n + 1):
        g[k] = f_star
    pivot_in = in_union(pivot)
    F: frozenset = frozenset()
    for k in range(n + 1):
        if k != pivot and in_union(k) != pivot_in:
            F |= g[k]
    kind = SUBSET_BELOW if pivot_in else CAP_BELOW
    return CoherenceWitness(kind, F, "block decomposition at the pivot cell")


# ---------------------------------------------------------------------------
# permutation-transport extension


def extend(tree: TTree, pi: Optional[Callable[[int], int]],
           Y: Iterable[Branch], *,
           depth: int = 4, search_bound: int = 512,
           override_unknown: bool = False,
           name: Optional[str] = None) -> TTree:
    """Graft a fresh copy of 2^{<omega} above each branch in Y.

    Above a graft y, child 0 of rho collects the cells of y's block table
    whose index, pushed through the permutation, has node bits extending
    rho's on-sibling; child 1 is the complement, the new limit node is
    empty.  Old nodes keep their old generators.

    Precondition per graft: every cylinder is hit by the permuted image
    of some nonempty cell, checked to `depth` over a bounded cell scan.
    A silent scan is Unknown and rejects the construction unless
    `override_unknown` is set.
    """
    Y = tuple(Y)
    s = tree.stage_count
    _check_grafts(tree, Y, s)
    tables = {y: blocks(tree, y) for y in Y}

    for y in Y:
        verdict = _extend_hitting(tables[y], pi, depth, search_bound)
        if verdict.is_refuted:
            raise ConstructionRefuted(
                f"hitting condition fails above {y}: {verdict.reason}")
        if verdict.is_unknown and not override_unknown:
            raise ConstructionBlocked(
                f"hitting condition above {y} unresolved "
                f"({verdict.reason}); pass override_unknown=True to proceed")

    limit = Ordinal(s, 0)

    def gen(t: TTree, node: Node) -> EvaluableSet:
        if len(node.grafts) < s:
            return tree.a(node)
        if not node.tail:
            return CylinderSet.empty()
        table = tables[node.grafts[-1]]
        target = node.tail[:-1] + "1"
        flip = node.tail[-1] == "1"

        def member(m: int, gas) -> bool:
            gas.tick()
            k = table.locator(m)
            ins = k is not None and node_extends(
                enumerate_node(_apply(pi, k)), target)
            return (not ins) if flip else ins

        return LazySet(member, f"a{node.label()}", DEFAULT_BUDGET)

    def provider(t: TTree, x: Branch, alpha: Ordinal,
                 beta: Ordinal) -> CoherenceWitness:
        if len(x.segments) <= s:
            return tree.branch_witness(x, alpha, beta)
        if beta < limit:
            return tree.branch_witness(x.grafts[-1], alpha, beta)
        if not alpha < limit:
            return _bit_rule_witness(t, x, alpha, beta)
        y = x.grafts[-1]
        table = tables.get(y)
        if table is None:
            return CoherenceWitness(CAP_BELOW, frozenset(), "unwitnessed")
        pattern = x.tail_pattern
        r = beta.finite_part
        target = pattern.prefix(r) + "1"
        flip = pattern.bit(r) == 1

        def in_union(k: int) -> bool:
            ins = node_extends(enumerate_node(_apply(pi, k)), target)
            return (not ins) if flip else ins

        return _mixed_witness(tree, y, table, alpha, in_union)

    stages = tree.stages + (StageRecord(
        s, Y, pi, "blocks transported through the permutation", "transport"),)
    return TTree(stages, gen, provider, name or f"{tree.name}+stage{s}")


def _extend_hitting(table: BlockTable, pi, depth: int,
                    search_bound: int) -> Verdict:
    exact = True
    for tail in _all_tails(depth):
        hit = None
        for k in range(search_bound):
            if not node_extends(enumerate_node(_apply(pi, k)), tail):
                continue
            occupied = table.L_member(k)
            if occupied:
                hit = k
                exact = exact and is_cylinder(table.block(k))
                break
        if hit is None:
            return Verdict.unknown(
                f"no nonempty cell below {search_bound} lands in cylinder "
                f"<{tail}>", horizon=search_bound)
    return Verdict.verified(
        f"all cylinders to depth {depth} hit by nonempty cells",
        exact=exact)


# ---------------------------------------------------------------------------
# declarative pipeline


def _parse_branch(spec) -> Branch:
    if isinstance(spec, Branch):
        return spec
    if isinstance(spec, (str, PeriodicBits)):
        spec = [spec]
    patterns = [p if isinstance(p, PeriodicBits) else PeriodicBits.parse(p)
                for p in spec]
    return Branch.from_segments(patterns)


def staged_pipeline(script: Sequence[Mapping], *, name: str = "pipeline",
                    depth: int = 4, validate_depth: int = 4,
                    horizon: int = DEFAULT_HORIZON) -> TTree:
    """Fold extensions over a declarative stage list.

    Each stage is a mapping with "branches" (a list of branches, each a
    branch object, one pattern string, or a list of per-segment pattern
    strings) and optionally "permutation" (a callable) and
    "override_unknown".  After every stage the grown tree's axioms are
    validated to `validate_depth` and the canonical completion of each new
    graft is checked coherent; a refuted stage aborts with its index.
    Properness is not gated here: the residues of block-union limit
    entries start doubly exponentially deep, beyond any bounded scan.
    """
    tree = base_algebra(name=name)
    for idx, stage in enumerate(script):
        Y = [_parse_branch(b) for b in stage.get("branches", [])]
        try:
            tree = extend(tree, stage.get("permutation"), Y,
                          depth=depth,
                          override_unknown=bool(stage.get("override_unknown")),
                          name=name)
        except ValueError as err:
            raise type(err)(f"stage {idx}: {err}") from err
        verdict = validate(tree, validate_depth, (), horizon).verdict
        if verdict.is_refuted:
            raise ConstructionRefuted(
                f"stage {idx} validation failed: {verdict.reason}")
        for y in Y:
            seq = BranchSequence(tree, Branch(y.chain, PeriodicBits.zeros()))
            seq.materialize(2 * tree.stage_count)
            coh = check_coherent(seq, seq.length, horizon)
            if coh.is_refuted:
                raise ConstructionRefuted(
                    f"stage {idx} left an incoherent branch above {y}: "
                    f"{coh.reason}")
    return tree


# ---------------------------------------------------------------------------
# splitter-driven extension


class SplitterContext:
    """Finite stages of named test sets plus an indexed splitter family.

    Stage xi lists the sets the xi-th splitter is responsible for
    splitting; the splitter family itself is total in xi.
    """

    def __init__(self, stages: Iterable[Mapping[str, EvaluableSet]],
                 splitter: Callable[[int], EvaluableSet]):
        self.stages = tuple(dict(st) for st in stages)
        self._splitter = splitter

    def splitter(self, xi: int) -> EvaluableSet:
        return self._splitter(xi)

    def listed(self, xi: int):
        if 0 <= xi < len(self.stages):
            return tuple(self.stages[xi].items())
        return ()


@dataclass
class SplitReport:
    """Certificates of a splitter extension: per consulted splitter stage
    the split verdicts against its listed sets, and per graft the
    no-convergence kernel at the grafting level."""

    certificates: dict
    kernel: dict

    @property
    def verdict(self) -> Verdict:
        for per in self.certificates.values():
            for v in per.values():
                if v.is_refuted:
                    return v
        for per in self.certificates.values():
            for v in per.values():
                if v.is_unknown:
                    return v
        count = sum(len(per) for per in self.certificates.values())
        return Verdict.verified(f"{count} split certificates hold")

    def to_json(self) -> dict:
        return {
            "certificates": {
                str(xi): {name: v.to_json() for name, v in per.items()}
                for xi, per in self.certificates.items()},
            "kernel": {
                key: {"level": entry["level"], "stage": entry["xi"],
                      "splits": {name: v.to_json()
                                 for name, v in entry["splits"].items()}}
                for key, entry in self.kernel.items()},
            "verdict": self.verdict.to_json(),
        }


def splitting_extend(tree: TTree, ctx: SplitterContext,
                     sigma_assignments: Mapping[Branch, Mapping[str, int]], *,
                     horizon: int = 2 ** 16,
                     witnesses: int = DEFAULT_WITNESSES,
                     name: Optional[str] = None) -> tuple[TTree, SplitReport]:
    """Graft above each assigned branch, choosing each new 0-child as the
    union of the cells whose index lies in a splitter set.

    The splitter stage for a new node comes from the per-branch
    assignment of its parent tail, defaulting to the tail's node index.
    The report certifies, for every consulted stage, that its splitter
    splits every certified-infinite listed set, and records per graft the
    kernel at the grafting level; a failed certificate turns the report
    verdict refuted with the set's name but still returns the tree.
    """
    Y = tuple(sigma_assignments)
    s = tree.stage_count
    _check_grafts(tree, Y, s)
    assignments = {y: dict(sigma_assignments[y] or {}) for y in Y}
    tables = {y: blocks(tree, y) for y in Y}

    def xi_of(y: Branch, tail: str) -> int:
        return assignments[y].get(tail, node_index(tail))

    limit = Ordinal(s, 0)

    def gen(t: TTree, node: Node) -> EvaluableSet:
        if len(node.grafts) < s:
            return tree.a(node)
        if not node.tail:
            return CylinderSet.empty()
        y = node.grafts[-1]
        table = tables[y]
        chosen = ctx.splitter(xi_of(y, node.tail[:-1]))
        flip = node.tail[-1] == "1"

        def member(m: int, gas) -> bool:
            gas.tick()
            k = table.locator(m)
            ins = k is not None and set_contains(chosen, k)
            return (not ins) if flip else ins

        return LazySet(member, f"a{node.label()}", DEFAULT_BUDGET)

    def provider(t: TTree, x: Branch, alpha: Ordinal,
                 beta: Ordinal) -> CoherenceWitness:
        if len(x.segments) <= s:
            return tree.branch_witness(x, alpha, beta)
        if beta < limit:
            return tree.branch_witness(x.grafts[-1], alpha, beta)
        y = x.grafts[-1]
        if y not in tables:
            return CoherenceWitness(CAP_BELOW, frozenset(), "unwitnessed")
        pattern = x.tail_pattern
        r = beta.finite_part
        if not alpha < limit:
            q = alpha.finite_part
            if xi_of(y, pattern.prefix(q)) == xi_of(y, pattern.prefix(r)):
                kind = SUBSET_BELOW if pattern.bit(q) == pattern.bit(r) \
                    else CAP_BELOW
                return CoherenceWitness(kind, frozenset(),
                                        "shared splitter stage")
            return CoherenceWitness(CAP_BELOW, frozenset(),
                                    "unwitnessed across splitter stages")
        chosen = ctx.splitter(xi_of(y, pattern.prefix(r)))
        flip = pattern.bit(r) == 1

        def in_union(k: int) -> bool:
            ins = set_contains(chosen, k)
            return (not ins) if flip else ins

        return _mixed_witness(tree, y, tables[y], alpha, in_union)

    stages = tree.stages + (StageRecord(
        s, Y, None, "splitter-chosen cells", "splitter"),)
    new_tree = TTree(stages, gen, provider, name or f"{tree.name}+split")

    used = sorted({xi_of(y, "") for y in Y} |
                  {xi for m in assignments.values() for xi in m.values()})
    certificates: dict[int, dict[str, Verdict]] = {}
    for xi in used:
        per: dict[str, Verdict] = {}
        for sname, S in ctx.listed(xi):
            if not certified_infinite(S):
                per[sname] = Verdict.unknown(
                    f"test set {sname} not certified infinite")
                continue
            v = splits(ctx.splitter(xi), S, horizon, witnesses)
            if v.is_refuted:
                v = Verdict.refuted(
                    f"splitter stage {xi} fails to split {sname}: {v.reason}",
                    counterexample=sname, witnesses=v.witnesses,
                    exact=v.exact)
            per[sname] = v
        certificates[xi] = per

    kernel = {}
    for y in Y:
        xi = xi_of(y, "")
        kernel[str(y)] = {"level": str(limit), "xi": xi,
                          "splits": certificates.get(xi, {})}

    return new_tree, SplitReport(certificates, kernel)
