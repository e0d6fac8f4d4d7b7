"""Coherent and proper sequences of sets with machine-checkable witnesses.

A sequence ⟨a_alpha : alpha < lam⟩ of infinite subsets of omega is coherent
when every pair alpha <= beta is, modulo a finite union of strictly earlier
entries a_F, either almost disjoint (a_alpha ∩ a_beta ⊆ a_F) or almost
nested (a_alpha ⊆ a_beta ∪ a_F).  Existence of the finite F is not
decidable for arbitrary lazy sets, so sequences carry witnesses: every
constructor in this package emits the F it used, and the checkers verify
certificates instead of searching unboundedly.  A small bounded search
(subsets of materialized indices, size <= 3 by default) backs up missing
or failing witnesses.

The hat set of beta collects the alpha <= beta whose entry is absorbed by
a_beta modulo such an F; hats are the compact-open neighborhoods of the
ordinal topology built in stone_topology.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from itertools import combinations
from math import gcd
from typing import Iterable, Optional, Sequence, Union

from .omega_sets import (
    BudgetExceeded,
    CylinderSet,
    DEFAULT_HORIZON,
    EvaluableSet,
    Verdict,
    difference,
    intersection,
    is_cylinder,
    iter_members,
    union,
)
from .ordinals import Ordinal, canonical_enumeration

CAP_BELOW = "CapBelow"
SUBSET_BELOW = "SubsetBelow"

MAX_SEARCH_F = 3


# ---------------------------------------------------------------------------
# eventually periodic bit patterns (the materializable branches)


class PeriodicBits:
    """An eventually periodic infinite bit sequence, head then repeating cycle.

    Stored in canonical form (primitive cycle, head absorbed into the cycle
    wherever possible), so two instances describe the same sequence iff
    they compare equal.
    """

    __slots__ = ("head", "cycle")

    def __init__(self, head: str = "", cycle: str = "0"):
        if (head + cycle).strip("01") or not cycle:
            raise ValueError("head and cycle must be binary, cycle nonempty")
        for d in range(1, len(cycle) + 1):
            if len(cycle) % d == 0 and cycle[:d] * (len(cycle) // d) == cycle:
                cycle = cycle[:d]
                break
        while head and head[-1] == cycle[-1]:
            head = head[:-1]
            cycle = cycle[-1] + cycle[:-1]
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "cycle", cycle)

    def __setattr__(self, name, value):
        raise AttributeError("PeriodicBits is immutable")

    @staticmethod
    def zeros() -> "PeriodicBits":
        return PeriodicBits("", "0")

    @staticmethod
    def ones() -> "PeriodicBits":
        return PeriodicBits("", "1")

    @staticmethod
    def zeros_then_ones(n: int) -> "PeriodicBits":
        """n zeros followed by all ones."""
        return PeriodicBits("0" * n, "1")

    def bit(self, n: int) -> int:
        if n < 0:
            raise ValueError("bit position must be a natural number")
        if n < len(self.head):
            return int(self.head[n])
        return int(self.cycle[(n - len(self.head)) % len(self.cycle)])

    __getitem__ = bit

    def prefix(self, n: int) -> str:
        return "".join(str(self.bit(i)) for i in range(n))

    def flip(self, pos: int) -> "PeriodicBits":
        """The sequence with the bit at pos flipped."""
        head = self.prefix(pos + 1)
        head = head[:pos] + ("1" if head[pos] == "0" else "0")
        tail_start = pos + 1
        if tail_start < len(self.head):
            return PeriodicBits(head + self.head[tail_start:], self.cycle)
        shift = (tail_start - len(self.head)) % len(self.cycle)
        return PeriodicBits(head, self.cycle[shift:] + self.cycle[:shift])

    def deviation(self, other: "PeriodicBits") -> Optional[int]:
        """First position where the two sequences differ, None when equal."""
        bound = max(len(self.head), len(other.head)) + \
            (len(self.cycle) * len(other.cycle)) // gcd(len(self.cycle), len(other.cycle))
        for n in range(bound):
            if self.bit(n) != other.bit(n):
                return n
        return None

    def first_one_at_or_after(self, j: int) -> Optional[int]:
        """Least n >= j with bit 1, None when the tail is all zeros there."""
        bound = len(self.head) + len(self.cycle)
        for n in range(j, max(j, bound) + len(self.cycle)):
            if self.bit(n) == 1:
                return n
        return None

    @property
    def eventually_zero(self) -> bool:
        return self.cycle == "0"

    def __eq__(self, other) -> bool:
        return isinstance(other, PeriodicBits) and \
            self.head == other.head and self.cycle == other.cycle

    def __hash__(self) -> int:
        return hash((self.head, self.cycle))

    def __repr__(self) -> str:
        return f"PeriodicBits({self.head!r}, {self.cycle!r})"

    def __str__(self) -> str:
        return f"{self.head}({self.cycle})*"

    @staticmethod
    def parse(text: str) -> "PeriodicBits":
        """Inverse of str(): "001(10)*"; a bare bit string means head + (0)*."""
        text = text.strip()
        if "(" in text:
            head, _, rest = text.partition("(")
            cycle, _, star = rest.partition(")")
            if star != "*":
                raise ValueError(f"bad pattern literal: {text!r}")
            return PeriodicBits(head, cycle)
        return PeriodicBits(text, "0")


# ---------------------------------------------------------------------------
# witnesses


@dataclass(frozen=True)
class CoherenceWitness:
    """Certificate for one pair: kind CapBelow certifies a_alpha ∩ a_beta ⊆ a_F,
    SubsetBelow certifies a_alpha ⊆ a_beta ∪ a_F, with F a finite set of
    ordinals strictly below alpha."""

    kind: str
    F: frozenset = frozenset()
    note: str = ""

    def __post_init__(self):
        if self.kind not in (CAP_BELOW, SUBSET_BELOW):
            raise ValueError(f"unknown witness kind {self.kind!r}")

    def verify(self, seq: "CoherentSequence", alpha: Ordinal, beta: Ordinal,
               horizon: int = DEFAULT_HORIZON) -> Verdict:
        """Exact on the cylinder tier, horizon-bounded otherwise."""
        for gamma in self.F:
            if not gamma < alpha:
                return Verdict.refuted(
                    f"witness index {gamma} not below {alpha}", exact=True)
        a, b = seq.entry(alpha), seq.entry(beta)
        f_set = union_of_entries(seq, self.F)
        if self.kind == CAP_BELOW:
            left: EvaluableSet = intersection(a, b)
        else:
            left = a
            f_set = union(b, f_set)
        return verify_inclusion(left, f_set, horizon)

    def to_json(self) -> dict:
        return {"kind": self.kind,
                "F": sorted(str(g) for g in self.F),
                **({"note": self.note} if self.note else {})}


def union_of_entries(seq: "CoherentSequence", F: Iterable[Ordinal]) -> EvaluableSet:
    """a_F = union of the entries indexed by F (empty set for F = ∅)."""
    out: EvaluableSet = CylinderSet.empty()
    for gamma in sorted(F):
        out = union(out, seq.entry(gamma))
    return out


def verify_inclusion(left: EvaluableSet, right: EvaluableSet,
                     horizon: int = DEFAULT_HORIZON) -> Verdict:
    """Is left ⊆ right?  Exact when both exact; else scan members of left.

    A concrete escaping member refutes exactly; exhausting the horizon
    without one verifies to that horizon only.
    """
    if is_cylinder(left) and is_cylinder(right):
        residue = left.difference(right)
        if residue.is_empty:
            return Verdict.verified("difference normalises to empty", exact=True)
        return Verdict.refuted("nonempty difference",
                               counterexample=next(residue.members()), exact=True)
    try:
        for v in iter_members(left, horizon):
            if v not in right:
                return Verdict.refuted("escaping member found",
                                       counterexample=v, exact=True)
    except BudgetExceeded:
        return Verdict.unknown("membership budget exhausted", horizon=horizon)
    return Verdict.verified("no escape below horizon", horizon=horizon)


# ---------------------------------------------------------------------------
# sequences


class CoherentSequence:
    """Base class: length, entry, witness, and materialization tracking.

    Entries are immutable set views; implementations record which levels
    have been realized so checkers can quantify over a finite list.
    """

    length: Ordinal

    def __init__(self, length: Ordinal):
        self.length = length
        self._seen: set[Ordinal] = set()
        self._lock = threading.Lock()

    # -- to implement ---------------------------------------------------------

    def _entry(self, alpha: Ordinal) -> EvaluableSet:
        raise NotImplementedError

    def witness(self, alpha: Ordinal, beta: Ordinal) -> CoherenceWitness:
        """Certificate for alpha <= beta; alpha == beta is trivially SubsetBelow."""
        raise NotImplementedError

    # -- shared surface --------------------------------------------------------

    def entry(self, alpha: Ordinal) -> EvaluableSet:
        if isinstance(alpha, int):
            alpha = Ordinal.nat(alpha)
        if not alpha < self.length:
            raise ValueError(f"index {alpha} not below length {self.length}")
        with self._lock:
            self._seen.add(alpha)
        return self._entry(alpha)

    def materialized(self) -> tuple[Ordinal, ...]:
        with self._lock:
            return tuple(sorted(self._seen))

    def materialize(self, count: int) -> tuple[Ordinal, ...]:
        """Realize the first `count` scheduled levels and return the list."""
        if self.length.is_limit:
            e = canonical_enumeration(self.length)
            for n in range(count):
                self.entry(e(n))
        else:
            for n in range(min(count, self.length.finite_part)):
                self.entry(Ordinal.nat(n))
        return self.materialized()

    def restrict(self, up_to: Ordinal) -> "RestrictedSequence":
        return RestrictedSequence(self, up_to)


class RestrictedSequence(CoherentSequence):
    """Initial segment view of another sequence."""

    def __init__(self, base: CoherentSequence, up_to: Ordinal):
        if isinstance(up_to, int):
            up_to = Ordinal.nat(up_to)
        if base.length < up_to:
            raise ValueError(f"cannot restrict length {base.length} to {up_to}")
        super().__init__(up_to)
        self.base = base

    def _entry(self, alpha: Ordinal) -> EvaluableSet:
        return self.base.entry(alpha)

    def witness(self, alpha: Ordinal, beta: Ordinal) -> CoherenceWitness:
        return self.base.witness(alpha, beta)


class ListSequence(CoherentSequence):
    """Finite sequence from an explicit entry list, with optional stored
    witnesses; missing witnesses fall back to a bounded search."""

    def __init__(self, entries: Sequence[EvaluableSet],
                 witnesses: Optional[dict] = None,
                 horizon: int = DEFAULT_HORIZON):
        super().__init__(Ordinal.nat(len(entries)))
        self.entries = list(entries)
        self.stored = dict(witnesses or {})
        self.horizon = horizon
        for n in range(len(entries)):
            self._seen.add(Ordinal.nat(n))

    def _entry(self, alpha: Ordinal) -> EvaluableSet:
        return self.entries[alpha.finite_part]

    def witness(self, alpha: Ordinal, beta: Ordinal) -> CoherenceWitness:
        if isinstance(alpha, int):
            alpha = Ordinal.nat(alpha)
        if isinstance(beta, int):
            beta = Ordinal.nat(beta)
        if alpha == beta:
            return CoherenceWitness(SUBSET_BELOW, frozenset(), "reflexive pair")
        key = (alpha, beta)
        if key in self.stored:
            return self.stored[key]
        found = find_witness(self, alpha, beta, self.horizon)
        if found is not None:
            self.stored[key] = found
            return found
        return CoherenceWitness(CAP_BELOW, frozenset(), "no witness found")


def find_witness(seq: CoherentSequence, alpha: Ordinal, beta: Ordinal,
                 horizon: int = DEFAULT_HORIZON,
                 max_size: int = MAX_SEARCH_F) -> Optional[CoherenceWitness]:
    """Bounded search over F ⊆ materialized indices below alpha, |F| <= max_size.

    Returns the first witness whose claim verifies (exactly or to horizon).
    """
    below = [g for g in seq.materialized() if g < alpha]
    for size in range(0, max_size + 1):
        for F in combinations(below, size):
            for kind in (CAP_BELOW, SUBSET_BELOW):
                w = CoherenceWitness(kind, frozenset(F), "found by bounded search")
                if w.verify(seq, alpha, beta, horizon).is_verified:
                    return w
    return None


class BranchBaseSequence(CoherentSequence):
    """The length-omega sequence read off a branch of the depth-omega twinned
    tree over the identity permutation: entry n is the cylinder at the
    branch's level-n sibling when the branch bit is 0, and the complement
    of the level-(n+1) branch cylinder when the bit is 1.  All entries are
    exact, witnesses need no F, and every check is decidable.
    """

    def __init__(self, x: PeriodicBits):
        super().__init__(Ordinal.omega())
        self.x = x

    def _entry(self, alpha: Ordinal) -> CylinderSet:
        n = alpha.finite_part
        on_child = CylinderSet.cyl(self.x.prefix(n) + "1")
        return on_child if self.x.bit(n) == 0 else on_child.complement()

    def witness(self, alpha: Ordinal, beta: Ordinal) -> CoherenceWitness:
        if isinstance(alpha, int):
            alpha = Ordinal.nat(alpha)
        if isinstance(beta, int):
            beta = Ordinal.nat(beta)
        if alpha == beta:
            return CoherenceWitness(SUBSET_BELOW, frozenset(), "reflexive pair")
        kind = SUBSET_BELOW if self.x.bit(beta.finite_part) == 1 else CAP_BELOW
        return CoherenceWitness(kind, frozenset(), "branch bit rule")

    def block(self, n: int) -> CylinderSet:
        """The n-th disjointified cell: entry n minus all earlier entries.

        Closed form: the sibling cylinder at level n, plus the branch-prefix
        nodes swallowed when the bit is 1 (those since the previous 1-bit).
        """
        from .omega_sets import node_index
        x = self.x
        sibling = x.prefix(n) + ("1" if x.bit(n) == 0 else "0")
        spine: set[int] = set()
        if x.bit(n) == 1:
            j = n
            while j >= 0 and (j == n or x.bit(j) == 0):
                spine.add(node_index(x.prefix(j)))
                j -= 1
        return CylinderSet.make(positive=[sibling], plus=spine)


# ---------------------------------------------------------------------------
# checkers


def _coerce(o: Union[Ordinal, int]) -> Ordinal:
    return Ordinal.nat(o) if isinstance(o, int) else o


def check_coherent(seq: CoherentSequence, up_to: Union[Ordinal, int],
                   horizon: int = DEFAULT_HORIZON) -> Verdict:
    """Verify every materialized pair alpha <= beta < up_to.

    The stored witness is checked first; on failure a bounded search for a
    replacement runs before the pair is reported Refuted (exact tier) or
    Unknown (lazy tier).
    """
    up_to = _coerce(up_to)
    points = [g for g in seq.materialized() if g < up_to]
    all_exact = True
    for i, alpha in enumerate(points):
        for beta in points[i:]:
            w = seq.witness(alpha, beta)
            v = w.verify(seq, alpha, beta, horizon)
            if not v.is_verified:
                if (r := find_witness(seq, alpha, beta, horizon)) is not None:
                    v = r.verify(seq, alpha, beta, horizon)
                else:
                    v = _judge_failed_pair(seq, alpha, beta, points, horizon)
                    if not v.is_verified:
                        return v
            all_exact = all_exact and v.exact
    return Verdict.verified(f"{len(points)} levels, all pairs witnessed",
                            witnesses=(len(points),), exact=all_exact,
                            horizon=None if all_exact else horizon)


def _judge_failed_pair(seq: CoherentSequence, alpha: Ordinal, beta: Ordinal,
                       points: list, horizon: int) -> Verdict:
    """Last resort for a pair the bounded search could not certify.

    Both claims shrink as F grows, so the maximal materialized F below
    alpha is tried first as a witness; if both claims fail there with a
    concrete counterexample, they fail for every smaller F too, which
    refutes the pair outright provided every ordinal below alpha is
    materialized (otherwise an untried entry could still absorb).
    """
    max_f = frozenset(g for g in points if g < alpha)
    for kind in (CAP_BELOW, SUBSET_BELOW):
        v = CoherenceWitness(kind, max_f).verify(seq, alpha, beta, horizon)
        if v.is_verified:
            return v
        if not v.is_refuted:
            return Verdict.unknown(
                f"pair ({alpha}, {beta}) undecided at maximal F", horizon=horizon)
    complete_below = alpha.is_finite and len(max_f) == alpha.finite_part
    if complete_below:
        return Verdict.refuted(
            f"pair ({alpha}, {beta}) has no verifying witness for any F",
            counterexample=(str(alpha), str(beta)), exact=True)
    return Verdict.unknown(
        f"pair ({alpha}, {beta}) fails on materialized F; entries below "
        f"{alpha} are not all materialized", horizon=horizon)


def check_proper(seq: CoherentSequence, up_to: Union[Ordinal, int],
                 horizon: int = DEFAULT_HORIZON) -> Verdict:
    """No entry is swallowed by finitely many strictly earlier entries.

    Residue shrinks as F grows, so testing the maximal materialized F below
    each beta decides the claim for every smaller F at once.  Exact
    infiniteness on the cylinder tier; on the lazy tier a residue member
    found below the horizon passes the level, an empty scan refutes it at
    that horizon.
    """
    up_to = _coerce(up_to)
    points = [g for g in seq.materialized() if g < up_to]
    all_exact = True
    for beta in points:
        below = [g for g in points if g < beta]
        a_beta = seq.entry(beta)
        a_f = union_of_entries(seq, below)
        residue = difference(a_beta, a_f)
        if is_cylinder(residue):
            if residue.is_finite:
                return Verdict.refuted(
                    f"entry {beta} is covered by earlier entries modulo "
                    f"{len(residue.finite_members())} points",
                    counterexample=str(beta),
                    witnesses=tuple(str(g) for g in below), exact=True)
            continue
        all_exact = False
        try:
            member = next(iter_members(residue, horizon), None)
        except BudgetExceeded:
            return Verdict.unknown(f"budget exhausted at level {beta}",
                                   horizon=horizon)
        if member is None:
            return Verdict.refuted(
                f"entry {beta}: no residue member below horizon",
                counterexample=str(beta), horizon=horizon)
    return Verdict.verified(f"{len(points)} levels proper",
                            witnesses=(len(points),), exact=all_exact,
                            horizon=None if all_exact else horizon)


def proper_certificate(seq: CoherentSequence, beta: Union[Ordinal, int],
                       F: Iterable[Ordinal]) -> EvaluableSet:
    """The residue a_beta ∖ a_F itself, for use as a filter-base element."""
    beta = _coerce(beta)
    return difference(seq.entry(beta), union_of_entries(seq, F))


# ---------------------------------------------------------------------------
# hat sets


class HatSet:
    """â_beta: the alpha <= beta with a_alpha ∖ a_beta ⊆ a_F for some finite
    F ⊆ alpha.  Membership is three-valued: True/False when decided, None
    when the lazy tier blocks the decision.
    """

    def __init__(self, seq: CoherentSequence, beta: Ordinal,
                 horizon: int = DEFAULT_HORIZON):
        self.seq = seq
        self.beta = beta
        self.horizon = horizon
        self._memo: dict[Ordinal, Optional[bool]] = {}

    def member(self, alpha: Union[Ordinal, int]) -> Optional[bool]:
        alpha = _coerce(alpha)
        if alpha not in self._memo:
            self._memo[alpha] = self._decide(alpha)
        return self._memo[alpha]

    def _decide(self, alpha: Ordinal) -> Optional[bool]:
        if self.beta < alpha:
            return False
        if alpha == self.beta:
            return True
        w = self.seq.witness(alpha, self.beta)
        if w.kind == SUBSET_BELOW:
            return True
        # CapBelow stored: decide the absorption claim directly.  It is
        # monotone in F, so the maximal materialized F below alpha settles
        # existence in one exact verification when the tier allows.
        below = [g for g in self.seq.materialized() if g < alpha]
        fmax = frozenset(below)
        v = CoherenceWitness(SUBSET_BELOW, fmax).verify(
            self.seq, alpha, self.beta, self.horizon)
        if v.exact and v.is_verified:
            return True
        if v.exact and v.is_refuted:
            return False
        # inexact at the maximal F: a smaller F can still verify exactly
        # (never refute: smaller claims are weaker); otherwise blocked
        candidates = [w.F]
        for size in range(0, MAX_SEARCH_F + 1):
            candidates.extend(frozenset(F) for F in combinations(below, size))
        for F in candidates:
            if F == fmax:
                continue
            cv = CoherenceWitness(SUBSET_BELOW, F).verify(
                self.seq, alpha, self.beta, self.horizon)
            if cv.is_verified and cv.exact:
                return True
        return None

    def materialize(self, points: Optional[Iterable[Union[Ordinal, int]]] = None
                    ) -> list[Ordinal]:
        """Members among the given points (default: all materialized <= beta)."""
        if points is None:
            points = [g for g in self.seq.materialized()
                      if g < self.beta or g == self.beta]
        out = []
        for p in points:
            p = _coerce(p)
            if self.member(p) is True:
                out.append(p)
        return sorted(out)

    def to_json(self) -> dict:
        return {"beta": str(self.beta),
                "members": [str(g) for g in self.materialize()]}


def hat(seq: CoherentSequence, beta: Union[Ordinal, int],
        horizon: int = DEFAULT_HORIZON) -> HatSet:
    beta = _coerce(beta)
    if not beta < seq.length:
        raise ValueError(f"{beta} is not below sequence length {seq.length}")
    return HatSet(seq, beta, horizon)


def is_cover(seq: CoherentSequence, S: Iterable[Union[Ordinal, int]],
             F: Iterable[Union[Ordinal, int]] = (),
             horizon: int = DEFAULT_HORIZON,
             include_top: Optional[bool] = None) -> Verdict:
    """Do the hats indexed by S ∪ F cover the point range?

    Finite-length sequences are checked over their whole domain [0, length]
    including the top point; infinite ones over the materialized interior
    points.  Pass include_top to override either default.  Refuted carries
    the first uncovered point.
    """
    indices = sorted({_coerce(g) for g in S} | {_coerce(g) for g in F})
    for g in indices:
        if not g < seq.length:
            raise ValueError(f"cover index {g} not below length {seq.length}")
    hats = [hat(seq, g, horizon) for g in indices]
    if include_top is None:
        include_top = seq.length.is_finite
    if seq.length.is_finite:
        interior = [Ordinal.nat(n) for n in range(seq.length.finite_part)]
    else:
        interior = [g for g in seq.materialized() if g < seq.length]
    points = interior + ([seq.length] if include_top else [])
    blocked = None
    for p in points:
        hit = False
        for h in hats:
            m = h.member(p)
            if m is True:
                hit = True
                break
            if m is None:
                blocked = (p, h.beta)
        if not hit:
            if blocked:
                return Verdict.unknown(
                    f"membership of {blocked[0]} in hat of {blocked[1]} "
                    f"undecided", horizon=horizon)
            return Verdict.refuted("uncovered point", counterexample=str(p),
                                   exact=True)
    return Verdict.verified(f"{len(points)} points covered by {len(hats)} hats",
                            witnesses=(len(points),), exact=True)


# ---------------------------------------------------------------------------
# reporting


def coherence_report(seq: CoherentSequence, up_to: Union[Ordinal, int],
                     horizon: int = DEFAULT_HORIZON) -> dict:
    """Witness table, properness, and hat adjacency for the materialized range."""
    up_to = _coerce(up_to)
    points = [g for g in seq.materialized() if g < up_to]
    pairs = []
    for i, alpha in enumerate(points):
        for beta in points[i:]:
            w = seq.witness(alpha, beta)
            pairs.append({
                "alpha": str(alpha), "beta": str(beta),
                "witness": w.to_json(),
                "verdict": w.verify(seq, alpha, beta, horizon).to_json(),
            })
    hats = {str(beta): [str(a) for a in hat(seq, beta, horizon).materialize(points)]
            for beta in points}
    return {
        "length": str(seq.length),
        "materialized": [str(g) for g in points],
        "pairs": pairs,
        "proper": check_proper(seq, up_to, horizon).to_json(),
        "hats": hats,
    }
