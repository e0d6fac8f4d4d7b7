"""Staged twinned trees and the set algebras their generators induce.

A tree here is the index structure 2^{<omega} extended through finitely
many grafting stages: above a registered branch of the previous stage a
fresh copy of 2^{<omega} is attached, so nodes are a chain of grafted
branches followed by a finite bit tail, and levels are ordinals below
omega*(stages).  Each node sigma carries a generator set a_sigma over
omega; twin children are complementary, non-successor levels carry the
empty set, and the sequence read along any branch is proper coherent.

This module owns the node/branch combinatorics, the axiom checker, the
branch/ultrafilter duality, the divergence ordinal phi, the hat
disjointness kernel, and the per-branch block tables.  Constructors that
build new stages live in the construct module.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Union

from .coherent import (
    CAP_BELOW,
    SUBSET_BELOW,
    CoherenceWitness,
    CoherentSequence,
    PeriodicBits,
    check_coherent,
    check_proper,
    hat,
)
from .omega_sets import (
    BudgetExceeded,
    CylinderSet,
    DEFAULT_BUDGET,
    DEFAULT_HORIZON,
    EvaluableSet,
    Verdict,
    complement,
    difference,
    enumerate_node,
    intersection,
    is_cylinder,
    is_empty_verdict,
    iter_members,
    union,
)
from .ordinals import Ordinal, canonical_enumeration


def _coerce(o: Union[Ordinal, int]) -> Ordinal:
    return Ordinal.nat(o) if isinstance(o, int) else o


# ---------------------------------------------------------------------------
# branches and nodes


@dataclass(frozen=True)
class Branch:
    """A full branch: a chain of grafted branches plus the eventually
    periodic bit pattern of its top omega-block.

    The grafts nest: grafts[i] is the branch of stage i that this branch
    passes through, so grafts[i].grafts == grafts[:i].  The branch domain
    is omega*(len(grafts)+1).
    """

    grafts: tuple = ()
    tail_pattern: PeriodicBits = PeriodicBits.zeros()

    def __post_init__(self):
        for i, g in enumerate(self.grafts):
            if not isinstance(g, Branch) or g.grafts != self.grafts[:i]:
                raise ValueError("grafts must form a nested branch chain")

    @staticmethod
    def from_segments(patterns: Iterable[PeriodicBits]) -> "Branch":
        chain: list[Branch] = []
        branch = None
        for p in patterns:
            branch = Branch(tuple(chain), p)
            chain.append(branch)
        if branch is None:
            raise ValueError("a branch needs at least one segment")
        return branch

    @property
    def segments(self) -> tuple:
        return tuple(g.tail_pattern for g in self.grafts) + (self.tail_pattern,)

    @property
    def length(self) -> Ordinal:
        """lambda_x = omega * (number of omega-blocks)."""
        return Ordinal(len(self.grafts) + 1, 0)

    @property
    def chain(self) -> tuple:
        return self.grafts + (self,)

    def bit(self, level: Union[Ordinal, int]) -> int:
        level = _coerce(level)
        if not level < self.length:
            raise ValueError(f"level {level} outside branch domain {self.length}")
        return self.segments[level.limit_part].bit(level.finite_part)

    def node_at(self, level: Union[Ordinal, int]) -> "Node":
        """The restriction of the branch to the given level."""
        level = _coerce(level)
        j, r = level.limit_part, level.finite_part
        segs = self.segments
        if j < len(segs):
            return Node(self.chain[:j], segs[j].prefix(r))
        if j == len(segs) and r == 0:
            return Node(self.chain, "")
        raise ValueError(f"level {level} outside branch domain {self.length}")

    def flip(self, level: Union[Ordinal, int]) -> "Branch":
        level = _coerce(level)
        segs = list(self.segments)
        segs[level.limit_part] = segs[level.limit_part].flip(level.finite_part)
        return Branch.from_segments(segs)

    def __str__(self) -> str:
        return "|".join(str(s) for s in self.segments)


@dataclass(frozen=True)
class Node:
    """A tree node: grafted branch chain plus a finite bit tail.

    level = omega*|grafts| + |tail|.  The dagger flips the final tail bit
    and is the identity at non-successor levels (empty tail).
    """

    grafts: tuple = ()
    tail: str = ""

    def __post_init__(self):
        if self.tail.strip("01"):
            raise ValueError("tail must be a binary string")
        for i, g in enumerate(self.grafts):
            if not isinstance(g, Branch) or g.grafts != self.grafts[:i]:
                raise ValueError("grafts must form a nested branch chain")

    @property
    def level(self) -> Ordinal:
        return Ordinal(len(self.grafts), len(self.tail))

    def dagger(self) -> "Node":
        if not self.tail:
            return self
        last = "1" if self.tail[-1] == "0" else "0"
        return Node(self.grafts, self.tail[:-1] + last)

    def parent(self) -> "Node":
        if not self.tail:
            raise ValueError("node at a limit level has no immediate parent")
        return Node(self.grafts, self.tail[:-1])

    def child(self, bit: str) -> "Node":
        return Node(self.grafts, self.tail + bit)

    def bit(self, level: Union[Ordinal, int]) -> int:
        """The node's own bit at a strictly smaller level."""
        level = _coerce(level)
        j, r = level.limit_part, level.finite_part
        if j < len(self.grafts):
            return self.grafts[j].tail_pattern.bit(r)
        if j == len(self.grafts) and r < len(self.tail):
            return int(self.tail[r])
        raise ValueError(f"level {level} not below node level {self.level}")

    def label(self) -> str:
        prefix = "".join(f"[{g.tail_pattern}]" for g in self.grafts)
        return prefix + "<" + self.tail + ">"

    def __str__(self) -> str:
        return self.label()


def divergence(sigma: Node, y: Branch) -> Optional[Ordinal]:
    """First level where sigma's bits leave the branch, None if sigma runs
    along y over their shared domain."""
    ysegs = y.segments
    for j, g in enumerate(sigma.grafts):
        if j >= len(ysegs):
            return None
        dev = g.tail_pattern.deviation(ysegs[j])
        if dev is not None:
            return Ordinal(j, dev)
    j = len(sigma.grafts)
    if j >= len(ysegs):
        return None
    for r, ch in enumerate(sigma.tail):
        if int(ch) != ysegs[j].bit(r):
            return Ordinal(j, r)
    return None


# ---------------------------------------------------------------------------
# trees


@dataclass(frozen=True)
class StageRecord:
    """One construction stage: the branches grafted, the permutation
    driving the new generators (None for the base stage), and the kind of
    generator rule the stage uses ("base", "transport" or "splitter")."""

    index: int
    Y: tuple = ()
    permutation: object = None
    note: str = ""
    kind: str = "base"

    def to_json(self) -> dict:
        return {"index": self.index,
                "kind": self.kind,
                "grafted": [str(y) for y in self.Y],
                "permutation": getattr(self.permutation, "describe",
                                       lambda: str(self.permutation))()
                if self.permutation is not None else None,
                **({"note": self.note} if self.note else {})}


class TTree:
    """Stage records plus the generator sigma -> a_sigma with its
    coherence-witness side table.  Immutable once built; the generator
    cache is lock-protected so queries may run concurrently.
    """

    def __init__(self, stages: Iterable[StageRecord],
                 generator: Callable[["TTree", Node], EvaluableSet],
                 witness_provider: Optional[Callable] = None,
                 name: str = "tree"):
        self.stages = tuple(stages)
        self.name = name
        self._generator = generator
        self._witness_provider = witness_provider
        self._cache: dict[Node, EvaluableSet] = {}
        self._lock = threading.Lock()

    @staticmethod
    def base(name: str = "base") -> "TTree":
        """Stage 0 over the identity enumeration: a at child 0 of rho is
        the cylinder of indices whose node extends rho followed by 1, and
        the twin child carries the complement."""
        return TTree([StageRecord(0, (), None,
                                  "twin cylinders over the identity "
                                  "enumeration")],
                     _base_generator, _base_witness, name)

    @property
    def stage_count(self) -> int:
        return len(self.stages)

    def contains_node(self, node: Node) -> bool:
        if len(node.grafts) >= self.stage_count:
            return False
        return all(node.grafts[i] in self.stages[i + 1].Y
                   for i in range(len(node.grafts)))

    def contains_branch(self, x: Branch) -> bool:
        if len(x.grafts) >= self.stage_count:
            return False
        return all(x.grafts[i] in self.stages[i + 1].Y
                   for i in range(len(x.grafts)))

    def a(self, node: Node) -> EvaluableSet:
        if not self.contains_node(node):
            raise ValueError(f"node {node} is not in the tree")
        with self._lock:
            if node not in self._cache:
                self._cache[node] = self._generator(self, node)
            return self._cache[node]

    def branch_witness(self, x: Branch, alpha: Ordinal,
                       beta: Ordinal) -> CoherenceWitness:
        alpha, beta = _coerce(alpha), _coerce(beta)
        if alpha == beta:
            return CoherenceWitness(SUBSET_BELOW, frozenset(), "reflexive pair")
        if self._witness_provider is not None:
            return self._witness_provider(self, x, alpha, beta)
        return CoherenceWitness(CAP_BELOW, frozenset(), "unwitnessed")

    def to_json(self) -> dict:
        return {"name": self.name,
                "stages": [s.to_json() for s in self.stages]}


def _base_generator(tree: TTree, node: Node) -> CylinderSet:
    if not node.tail:
        return CylinderSet.empty()
    on_child = CylinderSet.cyl(node.tail[:-1] + "1")
    return on_child if node.tail[-1] == "0" else on_child.complement()


def _base_witness(tree: TTree, x: Branch, alpha: Ordinal,
                  beta: Ordinal) -> CoherenceWitness:
    kind = SUBSET_BELOW if x.bit(beta) == 1 else CAP_BELOW
    return CoherenceWitness(kind, frozenset(), "branch bit rule")


class BranchSequence(CoherentSequence):
    """The coherent sequence read along one branch: level gamma holds the
    generator at the branch's restriction to gamma + 1, witnesses come
    from the tree's side table."""

    def __init__(self, tree: TTree, x: Branch,
                 horizon: int = DEFAULT_HORIZON):
        if not tree.contains_branch(x):
            raise ValueError(f"branch {x} is not registered in the tree")
        super().__init__(x.length)
        self.tree = tree
        self.x = x
        self.horizon = horizon

    def _entry(self, alpha: Ordinal) -> EvaluableSet:
        return self.tree.a(self.x.node_at(alpha + 1))

    def witness(self, alpha, beta) -> CoherenceWitness:
        return self.tree.branch_witness(self.x, _coerce(alpha), _coerce(beta))


# ---------------------------------------------------------------------------
# axiom validation


@dataclass
class ValidationReport:
    """Per-axiom and per-branch verdicts; overall verdict is the first
    failure, else Verified."""

    axioms: dict
    branches: dict

    @property
    def verdict(self) -> Verdict:
        for v in list(self.axioms.values()) + list(self.branches.values()):
            if v.is_refuted:
                return v
        for v in list(self.axioms.values()) + list(self.branches.values()):
            if v.is_unknown:
                return v
        total = len(self.axioms) + len(self.branches)
        return Verdict.verified(f"{total} checks passed")

    def to_json(self) -> dict:
        return {"axioms": {k: v.to_json() for k, v in self.axioms.items()},
                "branches": {k: v.to_json() for k, v in self.branches.items()},
                "verdict": self.verdict.to_json()}


def _materialized_chains(tree: TTree) -> list[tuple]:
    chains: list[tuple] = [()]
    frontier: list[tuple] = [()]
    for stage in tree.stages[1:]:
        frontier = [c + (y,) for c in frontier for y in stage.Y
                    if y.grafts == c]
        chains.extend(frontier)
    return chains


def _tails(depth: int) -> Iterator[str]:
    yield ""
    stack = [""]
    for _ in range(depth):
        stack = [t + b for t in stack for b in "01"]
        yield from stack


def validate(tree: TTree, depth: int, branches: Iterable[Branch] = (),
             horizon: int = DEFAULT_HORIZON) -> ValidationReport:
    """Check the tree axioms on materialized nodes, and branch coherence
    and properness on the listed branches.

    Closure, twinning, empty non-successor levels and the twin-complement
    law are checked exactly where the generator stays on the cylinder
    tier; lazy generators are sampled below the horizon.  Branch checks
    go through the coherent-sequence machinery with the tree's witnesses.
    """
    axioms: dict[str, Verdict] = {}
    chains = _materialized_chains(tree)
    nodes = [Node(c, t) for c in chains for t in _tails(depth)]

    closed = True
    for node in nodes:
        if node.tail and not tree.contains_node(node.parent()):
            closed = False
        if not tree.contains_node(node.dagger()):
            axioms["twinned"] = Verdict.refuted(
                f"dagger of {node} missing", counterexample=node.label())
            closed = False
            break
    axioms.setdefault("closure", Verdict.verified(
        f"{len(nodes)} materialized nodes downward closed and twinned",
        exact=True) if closed else Verdict.refuted("closure fails"))
    axioms.setdefault("twinned", Verdict.verified(
        "every materialized node has its dagger", exact=True))

    worst_empty = None
    for node in (Node(c, "") for c in chains):
        v = is_empty_verdict(tree.a(node), horizon)
        if v.is_refuted:
            worst_empty = Verdict.refuted(
                f"generator at non-successor node {node} is not empty",
                counterexample=node.label())
            break
        if v.is_unknown:
            worst_empty = Verdict.unknown(
                f"emptiness at {node} unresolved below the horizon",
                horizon=horizon)
    axioms["empty_levels"] = worst_empty or Verdict.verified(
        f"{len(chains)} non-successor nodes carry the empty set", exact=True)

    all_exact = True
    failure = None
    blocked = None
    checked = 0
    for node in nodes:
        if not node.tail or node.tail[-1] == "1":
            continue
        a0, a1 = tree.a(node), tree.a(node.dagger())
        checked += 1
        if is_cylinder(a0) and is_cylinder(a1):
            if a1 != a0.complement():
                failure = node
                break
        else:
            all_exact = False
            bound = min(horizon, 4096)
            try:
                if any((k in a0) == (k in a1) for k in range(bound)):
                    failure = node
                    break
            except BudgetExceeded:
                blocked = node
    if failure is not None:
        axioms["complement"] = Verdict.refuted(
            f"twin of {failure} is not the complement",
            counterexample=failure.label(), exact=all_exact)
    elif blocked is not None:
        axioms["complement"] = Verdict.unknown(
            f"membership budget exhausted at {blocked}", horizon=horizon)
    else:
        axioms["complement"] = Verdict.verified(
            f"{checked} twin pairs complementary", exact=all_exact,
            horizon=None if all_exact else horizon)

    branch_reports: dict[str, Verdict] = {}
    for x in branches:
        seq = BranchSequence(tree, x, horizon)
        seq.materialize(depth * len(x.segments))
        coh = check_coherent(seq, seq.length, horizon)
        if not coh.is_verified:
            branch_reports[str(x)] = coh
            continue
        prop = check_proper(seq, seq.length, horizon)
        branch_reports[str(x)] = prop if not prop.is_verified else (
            Verdict.verified(f"coherent and proper to depth {depth}",
                             exact=coh.exact and prop.exact))
    return ValidationReport(axioms, branch_reports)


# ---------------------------------------------------------------------------
# ultrafilter duality


IN, OUT, UNKNOWN = "in", "out", "unknown"


@dataclass(frozen=True)
class Decision:
    """Answer of an ultrafilter membership query."""

    answer: str
    reason: str = ""

    def to_json(self) -> dict:
        return {"answer": self.answer, "reason": self.reason}


class UltrafilterHandle:
    """The ultrafilter a branch induces: complements of the generators
    along the branch form its base; finite intersections stay infinite
    because the branch sequence is proper."""

    def __init__(self, tree: TTree, branch: Branch,
                 horizon: int = DEFAULT_HORIZON):
        self.tree = tree
        self.branch = branch
        self.horizon = horizon

    def base_element(self, alpha: Union[Ordinal, int]) -> EvaluableSet:
        alpha = _coerce(alpha)
        return complement(self.tree.a(self.branch.node_at(alpha + 1)))

    def base_intersection(self, alphas: Iterable[Union[Ordinal, int]]
                          ) -> EvaluableSet:
        out: EvaluableSet = CylinderSet.full()
        for alpha in sorted(_coerce(a) for a in alphas):
            out = intersection(out, self.base_element(alpha))
        return out

    def spot_check(self, alphas: Iterable[Union[Ordinal, int]],
                   count: int = 3) -> Verdict:
        """Certify a finite base intersection nonempty (indeed it keeps
        `count` members below the horizon)."""
        got = list(iter_members(self.base_intersection(alphas), self.horizon))
        if len(got) >= count:
            return Verdict.verified(
                f"{len(got)} members below horizon", witnesses=tuple(got[:count]))
        return Verdict.refuted(
            "base intersection too thin below the horizon",
            horizon=self.horizon)

    def decide(self, sigma: Node, budget: int = DEFAULT_BUDGET) -> Decision:
        return ultrafilter_decide(self.tree, self.branch, sigma, budget)


def _canonical_completion(sigma: Node) -> Branch:
    return Branch(sigma.grafts, PeriodicBits(sigma.tail, "0"))


def ultrafilter_decide(tree: TTree, y: Branch, sigma: Node,
                       budget: int = DEFAULT_BUDGET) -> Decision:
    """Decide a_sigma against the branch ultrafilter.

    Along the branch the answer is structural: the restriction itself is
    out (its complement is a base element), the dagger of the restriction
    is in (it is a base element).  Off the branch, the coherence witness
    at the divergence level in sigma's own branch view settles it: an
    absorption witness traps a base intersection inside a_sigma, an
    almost-disjointness witness pushes one into the complement.  Only a
    node extending the whole branch needs a bounded dual search, and that
    may return Unknown.
    """
    if not sigma.tail:
        raise ValueError("sigma must sit at a successor level")
    if not tree.contains_node(sigma):
        raise ValueError(f"node {sigma} is not in the tree")
    level = sigma.level
    if level <= y.length:
        restriction = y.node_at(level)
        if restriction == sigma:
            return Decision(OUT, "complement of a_sigma is the base element "
                                 f"at level {level}")
        if restriction.dagger() == sigma:
            return Decision(IN, f"a_sigma is the base element at level {level}")
    delta = divergence(sigma, y)
    if delta is not None:
        alpha = Ordinal(len(sigma.grafts), len(sigma.tail) - 1)
        w = tree.branch_witness(_canonical_completion(sigma), delta, alpha)
        if w.kind == SUBSET_BELOW:
            return Decision(IN, f"subset witness above divergence level {delta}"
                                " traps a base intersection inside a_sigma")
        return Decision(OUT, f"cap witness above divergence level {delta} "
                             "pushes a base intersection into the complement")
    return _dual_search(tree, y, sigma, budget)


def _dual_search(tree: TTree, y: Branch, sigma: Node, budget: int) -> Decision:
    """Bounded two-sided search over finite base intersections for a node
    extending the whole branch."""
    from itertools import combinations

    from .coherent import verify_inclusion

    a_sigma = tree.a(sigma)
    handle = UltrafilterHandle(tree, y)
    levels = [Ordinal(j, r) for r in range(8) for j in range(y.length.limit_part)]
    work = 0
    for size in range(0, 3):
        for F in combinations(levels, size):
            work += 1
            if work > budget:
                return Decision(UNKNOWN,
                                f"budget exhausted after {work - 1} base "
                                "intersections on each side")
            base = handle.base_intersection(F)
            v = verify_inclusion(base, a_sigma, DEFAULT_HORIZON)
            if v.is_verified and v.exact:
                return Decision(IN, f"contains the base intersection over {F}")
            v = verify_inclusion(base, complement(a_sigma), DEFAULT_HORIZON)
            if v.is_verified and v.exact:
                return Decision(OUT, "complement contains the base "
                                     f"intersection over {F}")
    return Decision(UNKNOWN, "no decisive finite base intersection within "
                             "the search bound")


def branch_from_oracle(tree: TTree, oracle: Callable[[Node], bool],
                       depth: int) -> Node:
    """Recover the branch an ultrafilter determines: at each step descend
    into the child whose generator is outside the ultrafilter.  The twins
    are complementary, so exactly one child qualifies; an oracle claiming
    both or neither is rejected by name.
    """
    node = Node()
    for _ in range(depth):
        zero, one = node.child("0"), node.child("1")
        in0, in1 = bool(oracle(zero)), bool(oracle(one))
        if in0 == in1:
            raise ValueError(
                "oracle is inconsistent on the twin pair "
                f"{zero.label()} / {one.label()}: both {'in' if in0 else 'out'}")
        node = zero if not in0 else one
    return node


# ---------------------------------------------------------------------------
# divergence ordinal


def phi(tree: TTree, x: Branch, y: Branch) -> Ordinal:
    """The level where y leaves x: restrictions to that level + 1 are
    daggers of each other.  phi_x(x) is the whole domain lambda_x; a
    proper initial-segment relation admits no divergence level."""
    if x == y:
        return x.length
    xs, ys = x.segments, y.segments
    for i in range(min(len(xs), len(ys))):
        dev = xs[i].deviation(ys[i])
        if dev is not None:
            return Ordinal(i, dev)
    raise ValueError(
        "one branch is an initial segment of the other; no divergence level")


# ---------------------------------------------------------------------------
# hat disjointness


def hats_disjoint(tree: TTree, x: Branch, alpha: Union[Ordinal, int],
                  horizon: int = DEFAULT_HORIZON) -> Verdict:
    """Are the hats of the twins at level alpha disjoint?

    The two twins at x's level alpha are viewed along x and along the
    flipped branch; their hats live in the respective branch sequences.
    As nodes the tips differ, so only shared materialized levels strictly
    below alpha could witness an overlap.
    """
    alpha = _coerce(alpha)
    node_level = alpha + 1
    if not node_level < x.length:
        raise ValueError(f"level {node_level} not below branch domain "
                         f"{x.length}")
    sigma = x.node_at(node_level)
    if not sigma.tail:
        raise ValueError("generator at a non-successor level is empty; "
                         "its hat carries no twin pair")
    # Flipping inside a grafted segment leaves the registered family, so
    # both twin views live in the stage of the flipped level.
    j = alpha.limit_part
    stage_branch = x.chain[j]
    flipped = stage_branch.flip(alpha)
    seq_x = BranchSequence(tree, stage_branch, horizon)
    seq_f = BranchSequence(tree, flipped, horizon)
    count = (alpha.finite_part + 1) * (j + 1)
    seq_x.materialize(count)
    seq_f.materialize(count)
    hat_x = hat(seq_x, alpha, horizon)
    hat_f = hat(seq_f, alpha, horizon)
    shared = sorted(set(seq_x.materialized()) & set(seq_f.materialized()))
    blocked = None
    checked = 0
    for delta in shared:
        if not delta < alpha:
            continue
        checked += 1
        m_x, m_f = hat_x.member(delta), hat_f.member(delta)
        if m_x is True and m_f is True:
            return Verdict.refuted(
                f"level {delta} lies in the hats of both twins at {alpha}",
                counterexample=str(delta))
        if m_x is None or m_f is None:
            blocked = delta
    if blocked is not None:
        return Verdict.unknown(
            f"hat membership blocked at level {blocked}", horizon=horizon)
    return Verdict.verified(
        f"hats of {sigma.label()} and its dagger share no level "
        f"({checked} checked)", witnesses=(checked,))


# ---------------------------------------------------------------------------
# block tables


def first_entry_level(bits: str, pattern: PeriodicBits) -> Optional[int]:
    """The level whose branch entry first absorbs the node with these
    index bits, against a single-segment branch pattern.

    A node deviating from the pattern at position d enters at level d (it
    sits in the sibling cylinder there); a node lying on the pattern is
    swallowed at the next 1-bit of the pattern, and never if the pattern
    stays 0 from there on.
    """
    for i, ch in enumerate(bits):
        if int(ch) != pattern.bit(i):
            return i
    return pattern.first_one_at_or_after(len(bits))


class BlockTable:
    """Disjointified cells of one branch sequence: cell n is the level
    e(n) entry minus all earlier cells, for the canonical round-robin
    level enumeration e.  locator(m) finds the cell holding index m, with
    a closed form on single-segment branches and a bounded scan plus an
    exhaustion log otherwise."""

    def __init__(self, tree: TTree, branch: Branch,
                 scan_limit: int = 256,
                 locator_views: Optional[Callable[[int], Iterable[
                     Optional[int]]]] = None):
        if not tree.contains_branch(branch):
            raise ValueError(f"branch {branch} is not registered in the tree")
        self.tree = tree
        self.branch = branch
        self.enumeration = canonical_enumeration(branch.length)
        self.scan_limit = scan_limit
        self.exhausted: list[int] = []
        self._locator_views = locator_views
        self._blocks: list[EvaluableSet] = []
        self._union: EvaluableSet = CylinderSet.empty()
        self._lock = threading.Lock()

    def entry(self, n: int) -> EvaluableSet:
        level = self.enumeration(n)
        return self.tree.a(self.branch.node_at(level + 1))

    def block(self, n: int) -> EvaluableSet:
        with self._lock:
            while len(self._blocks) <= n:
                k = len(self._blocks)
                e = self.entry(k)
                self._blocks.append(difference(e, self._union))
                self._union = union(self._union, e)
            return self._blocks[n]

    def prefix_union(self, n: int) -> EvaluableSet:
        """Union of the first n cells = union of the first n entries."""
        out: EvaluableSet = CylinderSet.empty()
        for k in range(n):
            out = union(out, self.entry(k))
        return out

    def locator(self, m: int) -> Optional[int]:
        """Index of the cell containing m, None when no cell does.

        Cells disjointify the entries in enumeration order, so the cell
        of m is the first entry containing it.  On a single segment that
        is the deviation-or-next-1 closed form; multi-segment tables use
        per-segment transported views when provided, else scan cells up
        to the limit and log exhaustion.
        """
        segs = self.branch.segments
        if len(segs) == 1 and self.tree.stages[0].kind == "base":
            return first_entry_level(enumerate_node(m), segs[0])
        views = (self._locator_views(m) if self._locator_views is not None
                 else None)
        if views is not None:
            width = len(segs)
            hits = [t * width + i for i, t in enumerate(views) if t is not None]
            return min(hits) if hits else None
        for n in range(self.scan_limit):
            if m in self.block(n):
                return n
        self.exhausted.append(m)
        return None

    def L_member(self, n: int,
                 horizon: int = DEFAULT_HORIZON) -> Optional[bool]:
        """Is cell n nonempty?  Exact on the cylinder tier, first-member
        scan otherwise (None when the scan is silent)."""
        blk = self.block(n)
        if is_cylinder(blk):
            return not blk.is_empty
        if next(iter_members(blk, horizon), None) is not None:
            return True
        return None


# ---------------------------------------------------------------------------
# export


def tree_dot(tree: TTree, depth: int = 4) -> str:
    """Materialized tree diagram: solid child edges, dashed dagger pairing."""
    lines = ["digraph ttree {", "  rankdir=BT;"]
    for idx, chain in enumerate(_materialized_chains(tree)):
        indent = "  "
        if chain:
            lines.append(f"  subgraph cluster_{idx} {{")
            lines.append(f'    label="stage {len(chain)} above '
                         f'{chain[-1]}";')
            indent = "    "
        prefix = f"s{idx}_"
        for t in _tails(depth):
            name = prefix + (t or "root")
            label = t or ("·" if chain else "∅")
            lines.append(f'{indent}"{name}" [label="{label}"];')
            if t:
                parent = prefix + (t[:-1] or "root")
                lines.append(f'{indent}"{name}" -> "{parent}";')
            if t and t[-1] == "1":
                twin = prefix + t[:-1] + "0"
                lines.append(f'{indent}"{name}" -> "{twin}" '
                             "[style=dashed, dir=none];")
        if chain:
            lines.append("  }")
    lines.append("}")
    return "\n".join(lines)
