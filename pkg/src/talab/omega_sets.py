"""Two-tier subsets of omega indexed by nodes of the infinite binary tree.

Every natural number k names a finite binary string: index 0 is the empty
string, and the strings are enumerated in length-then-lexicographic order
(equivalently, k+1 written in binary with the leading 1 stripped).  The
exact tier (CylinderSet) is the Boolean algebra generated by the cylinders
"all indices whose string extends tau" together with finite sets; it has a
canonical normal form, so equality of denotations is equality of
representations and emptiness/finiteness are decidable.  The lazy tier
(LazySet) is membership-by-predicate with optional soundness witnesses and
a per-query step budget.

Questions about lazy sets answer in three values, carried by Verdict:
verified and refuted answers always come with their justification, unknown
answers name the horizon that was exhausted.
"""
from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from itertools import count
from typing import Callable, Iterable, Iterator, Optional, Union

DEFAULT_HORIZON = 4096
DEFAULT_BUDGET = 10**6
DEFAULT_WITNESSES = 20


class BudgetExceeded(RuntimeError):
    """A lazy membership query ran out of its step budget."""


class Gas:
    """Mutable step counter threaded through one lazy membership query."""

    __slots__ = ("remaining",)

    def __init__(self, budget: int) -> None:
        self.remaining = budget

    def tick(self, cost: int = 1) -> None:
        self.remaining -= cost
        if self.remaining < 0:
            raise BudgetExceeded("step budget exhausted during membership query")


# ---------------------------------------------------------------------------
# node coding


def enumerate_node(k: int) -> str:
    """Return the k-th binary string in length-then-lex order.

    enumerate_node(0) == "".  For k >= 1 this is k+1 in binary with the
    leading 1 removed, which is the same ordering.  Decoding costs
    O(log k).
    """
    if k < 0:
        raise ValueError("node index must be a natural number")
    return format(k + 1, "b")[1:]


def node_index(bits: str) -> int:
    """Inverse of enumerate_node."""
    if bits.strip("01"):
        raise ValueError(f"not a binary string: {bits!r}")
    return int("1" + bits, 2) - 1


def node_extends(bits: str, root: str) -> bool:
    return bits.startswith(root)


def _cylinder_stream(root: str) -> Iterator[int]:
    """Members of one root cylinder, increasing.

    k extends root iff k+1 in binary reads "1" + root + suffix, so the
    members come in the consecutive blocks [a*2^t - 1, a*2^t + 2^t - 2]
    with a = int("1" + root, 2), one block per suffix length t.
    """
    a = int("1" + root, 2)
    t = 0
    while True:
        start = a << t
        yield from range(start - 1, start + (1 << t) - 1)
        t += 1


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Verdict:
    """Outcome of a decidable-or-bounded question.

    status is one of "verified", "refuted", "unknown".  Verified and
    refuted verdicts carry their justification in `reason` and
    `witnesses` (and `counterexample` for refutations); unknown verdicts
    record the horizon that was reached.  `exact` marks answers obtained
    by complete symbolic computation rather than sampling.
    """

    status: str
    reason: str = ""
    witnesses: tuple = ()
    counterexample: Optional[object] = None
    horizon: Optional[int] = None
    exact: bool = False

    @staticmethod
    def verified(reason: str = "", witnesses: tuple = (), exact: bool = False,
                 horizon: Optional[int] = None) -> "Verdict":
        return Verdict("verified", reason, tuple(witnesses), None, horizon, exact)

    @staticmethod
    def refuted(reason: str = "", counterexample: object = None,
                witnesses: tuple = (), exact: bool = False,
                horizon: Optional[int] = None) -> "Verdict":
        return Verdict("refuted", reason, tuple(witnesses), counterexample, horizon, exact)

    @staticmethod
    def unknown(reason: str = "", horizon: Optional[int] = None) -> "Verdict":
        return Verdict("unknown", reason, (), None, horizon, False)

    @property
    def is_verified(self) -> bool:
        return self.status == "verified"

    @property
    def is_refuted(self) -> bool:
        return self.status == "refuted"

    @property
    def is_unknown(self) -> bool:
        return self.status == "unknown"

    def to_json(self) -> dict:
        out: dict = {"status": self.status}
        if self.reason:
            out["reason"] = self.reason
        if self.witnesses:
            out["witnesses"] = [_jsonable(w) for w in self.witnesses]
        if self.counterexample is not None:
            out["counterexample"] = _jsonable(self.counterexample)
        if self.horizon is not None:
            out["horizon"] = self.horizon
        if self.exact:
            out["exact"] = True
        return out


def _jsonable(value):
    if isinstance(value, (int, str, bool, float)) or value is None:
        return value
    if isinstance(value, (tuple, list, set, frozenset)):
        items = list(value)
        if isinstance(value, (set, frozenset)):
            items = sorted(items, key=repr)
        return [_jsonable(v) for v in items]
    if hasattr(value, "to_json"):
        return value.to_json()
    return str(value)


# ---------------------------------------------------------------------------
# canonical antichains of cylinder roots
#
# A finite antichain of binary strings with no two siblings present is the
# canonical name for the clopen set it generates; the rewrite rules below
# (drop extensions, merge sibling pairs) reach that form from any finite
# root collection.


def _canonical_antichain(roots: Iterable[str]) -> tuple[str, ...]:
    pool = set(roots)
    changed = True
    while changed:
        changed = False
        for r in sorted(pool, key=lambda s: (-len(s), s)):
            if r not in pool:
                continue
            for shorter in pool:
                if shorter != r and r.startswith(shorter):
                    pool.discard(r)
                    changed = True
                    break
        for r in sorted(pool, key=lambda s: (-len(s), s)):
            if r and r in pool and (r[:-1] + ("1" if r[-1] == "0" else "0")) in pool:
                pool.discard(r)
                pool.discard(r[:-1] + ("1" if r[-1] == "0" else "0"))
                pool.add(r[:-1])
                changed = True
                break
    return tuple(sorted(pool, key=lambda s: (len(s), s)))


def _antichain_union(a: tuple[str, ...], b: tuple[str, ...]) -> tuple[str, ...]:
    return _canonical_antichain(set(a) | set(b))


def _antichain_intersection(a: tuple[str, ...], b: tuple[str, ...]) -> tuple[str, ...]:
    meets = set()
    for x in a:
        for y in b:
            if x.startswith(y):
                meets.add(x)
            elif y.startswith(x):
                meets.add(y)
    return _canonical_antichain(meets)


def _antichain_complement(a: tuple[str, ...]) -> tuple[str, ...]:
    roots = set(a)
    out: list[str] = []

    def walk(prefix: str) -> None:
        if any(prefix.startswith(r) for r in roots):
            return
        if any(r.startswith(prefix) for r in roots):
            walk(prefix + "0")
            walk(prefix + "1")
        else:
            out.append(prefix)

    walk("")
    return _canonical_antichain(out)


def _proper_prefix_indices(roots: Iterable[str]) -> set[int]:
    seen: set[int] = set()
    for r in roots:
        for j in range(len(r)):
            seen.add(node_index(r[:j]))
    return seen


# ---------------------------------------------------------------------------
# exact tier


class CylinderSet:
    """Canonical element of the algebra generated by cylinders and finite sets.

    Normal form: `roots` is the canonical antichain naming the clopen part
    (no root extends another, no two siblings both present), `plus` holds
    finitely many indices outside the clopen part that belong to the set,
    `minus` finitely many inside it that do not.  Root differences always
    normalise away, so the `negative` component of the construction surface
    is empty in normal form.  Two sets are equal iff their normal forms
    are equal.
    """

    __slots__ = ("roots", "plus", "minus")

    def __init__(self, roots: tuple[str, ...], plus: frozenset, minus: frozenset):
        self.roots = roots
        self.plus = plus
        self.minus = minus

    # -- constructors ------------------------------------------------------

    @staticmethod
    def make(positive: Iterable[str] = (), negative: Iterable[str] = (),
             plus: Iterable[int] = (), minus: Iterable[int] = ()) -> "CylinderSet":
        """Normalise an arbitrary (positive, negative, plus, minus) description."""
        pos = tuple(positive)
        neg = tuple(negative)
        plus = frozenset(plus)
        minus = frozenset(minus)
        pos_chain = _canonical_antichain(pos)
        neg_chain = _canonical_antichain(neg)
        roots = _antichain_intersection(pos_chain, _antichain_complement(neg_chain)) \
            if neg_chain else pos_chain

        def semantic(k: int) -> bool:
            s = enumerate_node(k)
            inside = any(s.startswith(r) for r in pos) and \
                not any(s.startswith(r) for r in neg)
            return (inside or k in plus) and k not in minus

        candidates = _proper_prefix_indices(set(pos) | set(neg) | set(roots))
        candidates |= plus | minus
        new_plus, new_minus = set(), set()
        for k in candidates:
            have = any(enumerate_node(k).startswith(r) for r in roots)
            want = semantic(k)
            if want and not have:
                new_plus.add(k)
            elif have and not want:
                new_minus.add(k)
        return CylinderSet(roots, frozenset(new_plus), frozenset(new_minus))

    @staticmethod
    def cyl(root: str = "") -> "CylinderSet":
        if root.strip("01"):
            raise ValueError(f"not a binary string: {root!r}")
        return CylinderSet((root,), frozenset(), frozenset())

    @staticmethod
    def finite(items: Iterable[int]) -> "CylinderSet":
        return CylinderSet((), frozenset(items), frozenset())

    @staticmethod
    def empty() -> "CylinderSet":
        return CylinderSet((), frozenset(), frozenset())

    @staticmethod
    def full() -> "CylinderSet":
        return CylinderSet(("",), frozenset(), frozenset())

    # -- spec surface for the construction fields ---------------------------

    @property
    def positive(self) -> tuple[str, ...]:
        return self.roots

    @property
    def negative(self) -> tuple[str, ...]:
        return ()

    # -- membership and size -----------------------------------------------

    def contains(self, k: int) -> bool:
        if any(enumerate_node(k).startswith(r) for r in self.roots):
            return k not in self.minus
        return k in self.plus

    __contains__ = contains

    @property
    def is_finite(self) -> bool:
        return not self.roots

    @property
    def is_empty(self) -> bool:
        return not self.roots and not self.plus

    @property
    def is_cofinite(self) -> bool:
        return self.complement().is_finite

    def finite_members(self) -> tuple[int, ...]:
        if not self.is_finite:
            raise ValueError("set is infinite")
        return tuple(sorted(self.plus))

    def members(self, limit: Optional[int] = None) -> Iterator[int]:
        """Yield members in increasing order; limit bounds the count.

        Closed form: root cylinders stream their index blocks directly,
        so deep members cost O(log k) each, never a scan up to k.
        """
        if self.is_finite:
            stream: Iterator[int] = iter(sorted(self.plus))
        else:
            # roots are an antichain and plus avoids their union, so the
            # merged streams never collide
            stream = heapq.merge(sorted(self.plus),
                                 *[_cylinder_stream(r) for r in self.roots])
        emitted = 0
        for k in stream:
            if limit is not None and emitted >= limit:
                return
            if k in self.minus:
                continue
            yield k
            emitted += 1

    def first_members(self, n: int) -> tuple[int, ...]:
        return tuple(self.members(limit=n))

    # -- Boolean operations --------------------------------------------------

    def _combine(self, other: "CylinderSet", roots: tuple[str, ...],
                 table: Callable[[bool, bool], bool]) -> "CylinderSet":
        candidates = _proper_prefix_indices(
            set(self.roots) | set(other.roots) | set(roots))
        candidates |= self.plus | self.minus | other.plus | other.minus
        plus, minus = set(), set()
        for k in candidates:
            want = table(self.contains(k), other.contains(k))
            have = any(enumerate_node(k).startswith(r) for r in roots)
            if want and not have:
                plus.add(k)
            elif have and not want:
                minus.add(k)
        return CylinderSet(roots, frozenset(plus), frozenset(minus))

    def union(self, other: "CylinderSet") -> "CylinderSet":
        return self._combine(other, _antichain_union(self.roots, other.roots),
                             lambda p, q: p or q)

    def intersection(self, other: "CylinderSet") -> "CylinderSet":
        return self._combine(other, _antichain_intersection(self.roots, other.roots),
                             lambda p, q: p and q)

    def difference(self, other: "CylinderSet") -> "CylinderSet":
        roots = _antichain_intersection(self.roots,
                                        _antichain_complement(other.roots))
        return self._combine(other, roots, lambda p, q: p and not q)

    def symmetric_difference(self, other: "CylinderSet") -> "CylinderSet":
        u = _antichain_union(self.roots, other.roots)
        i = _antichain_intersection(self.roots, other.roots)
        roots = _antichain_intersection(u, _antichain_complement(i))
        return self._combine(other, roots, lambda p, q: p != q)

    def complement(self) -> "CylinderSet":
        roots = _antichain_complement(self.roots)
        candidates = _proper_prefix_indices(set(self.roots) | set(roots))
        candidates |= self.plus | self.minus
        plus, minus = set(), set()
        for k in candidates:
            want = not self.contains(k)
            have = any(enumerate_node(k).startswith(r) for r in roots)
            if want and not have:
                plus.add(k)
            elif have and not want:
                minus.add(k)
        return CylinderSet(roots, frozenset(plus), frozenset(minus))

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __xor__ = symmetric_difference
    __invert__ = complement

    # -- identity ------------------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, CylinderSet) and self.roots == other.roots \
            and self.plus == other.plus and self.minus == other.minus

    def __hash__(self) -> int:
        return hash((self.roots, self.plus, self.minus))

    def __repr__(self) -> str:
        if self.is_empty:
            return "CylinderSet<empty>"
        parts = []
        if self.roots:
            parts.append("+".join(f"[{r or 'e'}]" for r in self.roots))
        if self.plus:
            parts.append("+{" + ",".join(map(str, sorted(self.plus))) + "}")
        if self.minus:
            parts.append("-{" + ",".join(map(str, sorted(self.minus))) + "}")
        return "CylinderSet<" + "".join(parts) + ">"

    def to_json(self) -> dict:
        return {
            "tier": "cylinder",
            "positive": list(self.roots),
            "negative": [],
            "plus": sorted(self.plus),
            "minus": sorted(self.minus),
        }


# ---------------------------------------------------------------------------
# lazy tier


class LazySet:
    """Membership-by-predicate set with optional soundness witnesses.

    `member` must be deterministic.  `inf_witness` / `coinf_witness`, when
    present, are zero-argument callables returning strictly increasing
    iterators of members / non-members; whoever installs them vouches for
    the stream being infinite, and consumers spot-check soundness against
    the predicate.  Each public membership query runs under a fresh step
    budget; exhaustion raises BudgetExceeded rather than guessing.
    """

    def __init__(self, member: Callable[[int, Gas], bool], name: str = "lazy",
                 budget: int = DEFAULT_BUDGET,
                 inf_witness: Optional[Callable[[], Iterator[int]]] = None,
                 coinf_witness: Optional[Callable[[], Iterator[int]]] = None):
        self._member = member
        self.name = name
        self.budget = budget
        self.inf_witness = inf_witness
        self.coinf_witness = coinf_witness

    @staticmethod
    def from_predicate(pred: Callable[[int], bool], name: str = "lazy",
                       budget: int = DEFAULT_BUDGET,
                       inf_witness=None, coinf_witness=None) -> "LazySet":
        def member(k: int, gas: Gas) -> bool:
            gas.tick()
            return bool(pred(k))
        return LazySet(member, name, budget, inf_witness, coinf_witness)

    def contains(self, k: int, gas: Optional[Gas] = None) -> bool:
        if gas is None:
            gas = Gas(self.budget)
        return self._member(k, gas)

    __contains__ = contains

    def spot_check_witnesses(self, samples: int = 100) -> Verdict:
        """Verify that the first values of each witness stream satisfy the predicate."""
        for label, stream, expect in (("inf", self.inf_witness, True),
                                      ("coinf", self.coinf_witness, False)):
            if stream is None:
                continue
            prev = -1
            for i, v in enumerate(stream()):
                if i >= samples:
                    break
                if v <= prev:
                    return Verdict.refuted(
                        f"{label} witness stream not strictly increasing",
                        counterexample=v)
                prev = v
                if self.contains(v) is not expect:
                    return Verdict.refuted(
                        f"{label} witness stream unsound", counterexample=v)
        return Verdict.verified(f"first {samples} witness values sound", exact=False)

    def __repr__(self) -> str:
        return f"LazySet<{self.name}>"

    def to_json(self) -> dict:
        return {
            "tier": "lazy",
            "name": self.name,
            "budget": self.budget,
            "inf_witness": self.inf_witness is not None,
            "coinf_witness": self.coinf_witness is not None,
        }


EvaluableSet = Union[CylinderSet, LazySet]


def is_cylinder(s: EvaluableSet) -> bool:
    return isinstance(s, CylinderSet)


class DigitSet(LazySet):
    """Indices whose i-th binary digit is 0.

    The digit family splits every infinite cylinder-tier set: inside any
    cylinder the indices with a fixed tail length form a run of consecutive
    integers whose length doubles with the tail, so both digit values recur.
    """

    def __init__(self, i: int, budget: int = DEFAULT_BUDGET):
        self.i = i
        block = 1 << (i + 1)
        half = 1 << i

        def stream(offset: int) -> Callable[[], Iterator[int]]:
            def gen() -> Iterator[int]:
                for b in count(0):
                    base = b * block + offset
                    for j in range(half):
                        yield base + j
            return gen

        super().__init__(
            lambda k, gas: (gas.tick(), (k >> i) & 1 == 0)[1],
            name=f"digit({i})", budget=budget,
            inf_witness=stream(0), coinf_witness=stream(half))

    def split_streams_in_cylinder(self, root: str) -> tuple[Callable[[], Iterator[int]],
                                                            Callable[[], Iterator[int]]]:
        """Strictly increasing streams of root-cylinder members with digit i
        equal to 0 resp. 1.  One representative is drawn from every tail
        length past i, so both streams are infinite by construction."""
        i = self.i

        def gen(want: int) -> Callable[[], Iterator[int]]:
            def it() -> Iterator[int]:
                prev = -1
                for ell in count(i + 1):
                    lo = node_index(root + "0" * ell)
                    hi = lo + (1 << ell)  # run of consecutive indices
                    k = lo
                    if (k >> i) & 1 != want:
                        k += (1 << i) - (k & ((1 << i) - 1)) if (k & ((1 << i) - 1)) \
                            else (1 << i)
                    while (k >> i) & 1 != want:
                        k += 1
                    if k < hi and k > prev:
                        prev = k
                        yield k
            return it
        return gen(0), gen(1)


# ---------------------------------------------------------------------------
# tier-dispatching Boolean operations


def _stream_of(s: EvaluableSet, want_members: bool = True):
    """Best-effort strictly increasing stream of (non-)members, or None."""
    if is_cylinder(s):
        base = s if want_members else s.complement()
        if base.is_finite:
            return None
        return lambda: base.members()
    return s.inf_witness if want_members else s.coinf_witness


def union(a: EvaluableSet, b: EvaluableSet) -> EvaluableSet:
    if is_cylinder(a) and is_cylinder(b):
        return a.union(b)

    def member(k: int, gas: Gas) -> bool:
        gas.tick()
        return _contains(a, k, gas) or _contains(b, k, gas)
    # Streams survive combination only when they pass through unfiltered:
    # an operand's members witness the union, an operand's non-members
    # witness the intersection's complement.  Filtered streams could stall
    # unboundedly between yields, so those are dropped and bounded scans
    # take over.
    inf = _stream_of(a) or _stream_of(b)
    return LazySet(member, f"({_name(a)} | {_name(b)})", _budget(a, b),
                   inf_witness=inf, coinf_witness=None)


def intersection(a: EvaluableSet, b: EvaluableSet) -> EvaluableSet:
    if is_cylinder(a) and is_cylinder(b):
        return a.intersection(b)

    def member(k: int, gas: Gas) -> bool:
        gas.tick()
        return _contains(a, k, gas) and _contains(b, k, gas)
    coinf = _stream_of(a, False) or _stream_of(b, False)
    return LazySet(member, f"({_name(a)} & {_name(b)})", _budget(a, b),
                   inf_witness=None, coinf_witness=coinf)


def complement(a: EvaluableSet) -> EvaluableSet:
    if is_cylinder(a):
        return a.complement()

    def member(k: int, gas: Gas) -> bool:
        gas.tick()
        return not _contains(a, k, gas)
    return LazySet(member, f"~{_name(a)}", a.budget,
                   inf_witness=a.coinf_witness, coinf_witness=a.inf_witness)


def difference(a: EvaluableSet, b: EvaluableSet) -> EvaluableSet:
    if is_cylinder(a) and is_cylinder(b):
        return a.difference(b)
    return intersection(a, complement(b))


def _contains(s: EvaluableSet, k: int, gas: Gas) -> bool:
    if is_cylinder(s):
        gas.tick()
        return s.contains(k)
    return s._member(k, gas)


def _name(s: EvaluableSet) -> str:
    return s.name if isinstance(s, LazySet) else repr(s)


def _budget(a: EvaluableSet, b: EvaluableSet) -> int:
    budgets = [s.budget for s in (a, b) if isinstance(s, LazySet)]
    return max(budgets) if budgets else DEFAULT_BUDGET


def set_contains(s: EvaluableSet, k: int) -> bool:
    return s.contains(k)


def certified_infinite(s: EvaluableSet) -> bool:
    """True when infinitude is decided (exact tier) or vouched for by a witness."""
    if is_cylinder(s):
        return not s.is_finite
    return s.inf_witness is not None


def iter_members(s: EvaluableSet, limit: int) -> Iterator[int]:
    """Up to limit members, increasing.  A lazy set without a witness
    stream is scanned over the index range [0, limit) instead, so the
    yield count may fall short of limit."""
    if is_cylinder(s):
        yield from s.members(limit=limit)
        return
    if s.inf_witness is not None:
        emitted = 0
        for v in s.inf_witness():
            if emitted >= limit:
                return
            yield v
            emitted += 1
        return
    for k in range(limit):
        if s.contains(k):
            yield k


# ---------------------------------------------------------------------------
# the workhorse relations


def almost_subset(a: EvaluableSet, b: EvaluableSet,
                  horizon: int = DEFAULT_HORIZON,
                  witnesses: int = DEFAULT_WITNESSES) -> Verdict:
    """Is a contained in b up to finitely many exceptions?

    Exact on the cylinder tier.  A finite `a` or cofinite cylinder `b`
    also settles it exactly.  Otherwise up to `horizon` members of `a`
    are examined: more than `witnesses` of them outside `b` refutes (the
    counterexamples are reported), anything less is unknown.
    """
    if is_cylinder(a) and is_cylinder(b):
        residue = a.difference(b)
        if residue.is_finite:
            return Verdict.verified("finite residue",
                                    witnesses=residue.finite_members(), exact=True)
        return Verdict.refuted("residue contains a whole cylinder",
                               counterexample=next(residue.members()),
                               witnesses=(residue.roots[0],), exact=True)
    if is_cylinder(a) and a.is_finite:
        residue = tuple(k for k in a.finite_members() if k not in b)
        return Verdict.verified("finite left side", witnesses=residue, exact=True)
    if is_cylinder(b) and b.is_cofinite:
        missing = b.complement().finite_members()
        return Verdict.verified("right side cofinite", witnesses=missing, exact=True)
    found: list[int] = []
    for v in iter_members(a, horizon):
        if v not in b:
            found.append(v)
            if len(found) > witnesses:
                return Verdict.refuted(
                    f"more than {witnesses} members of the left side escape",
                    counterexample=found[0], witnesses=tuple(found))
    return Verdict.unknown(
        f"{len(found)} escapes among first {horizon} members examined",
        horizon=horizon)


def splits(s: EvaluableSet, b: EvaluableSet,
           horizon: int = DEFAULT_HORIZON,
           witnesses: int = DEFAULT_WITNESSES) -> Verdict:
    """Does s split b, i.e. are both b & s and b - s infinite?

    Requires b certified infinite.  Exact when both sides are cylinder
    tier, and for digit sets against infinite cylinder sets (closed-form
    member streams on both sides).  Otherwise witness-based: verified once
    `witnesses` members land on each side, unknown at the horizon.
    """
    if not certified_infinite(b):
        raise ValueError("splits requires b certified infinite")
    if is_cylinder(s) and is_cylinder(b):
        inner = b.intersection(s)
        outer = b.difference(s)
        if not inner.is_finite and not outer.is_finite:
            return Verdict.verified(
                "both sides contain a cylinder",
                witnesses=(inner.roots[0], outer.roots[0]), exact=True)
        side = "b & s" if inner.is_finite else "b - s"
        finite_side = inner if inner.is_finite else outer
        return Verdict.refuted(f"{side} is finite",
                               witnesses=finite_side.finite_members(), exact=True)
    if isinstance(s, DigitSet) and is_cylinder(b) and not b.is_finite:
        zeros, ones = s.split_streams_in_cylinder(b.roots[0])
        ins = _collect(zeros(), b, witnesses)
        outs = _collect(ones(), b, witnesses)
        if len(ins) >= witnesses and len(outs) >= witnesses:
            return Verdict.verified(
                "closed-form member streams on both digit values",
                witnesses=(tuple(ins), tuple(outs)), exact=True)
    ins: list[int] = []
    outs: list[int] = []
    for v in iter_members(b, horizon):
        (ins if v in s else outs).append(v)
        if len(ins) >= witnesses and len(outs) >= witnesses:
            return Verdict.verified(
                f"{witnesses} witnesses on each side",
                witnesses=(tuple(ins[:witnesses]), tuple(outs[:witnesses])))
    return Verdict.unknown(
        f"sides {len(ins)}/{len(outs)} after {horizon} members", horizon=horizon)


def _collect(stream: Iterator[int], inside: EvaluableSet, n: int) -> list[int]:
    out: list[int] = []
    for v in stream:
        if v in inside:
            out.append(v)
            if len(out) >= n:
                break
    return out


def is_empty_verdict(s: EvaluableSet, horizon: int = DEFAULT_HORIZON) -> Verdict:
    """Emptiness: exact for cylinders, bounded scan for lazy sets."""
    if is_cylinder(s):
        if s.is_empty:
            return Verdict.verified("normal form empty", exact=True)
        return Verdict.refuted("nonempty normal form",
                               counterexample=next(s.members()), exact=True)
    if s.inf_witness is not None:
        v = next(s.inf_witness())
        if s.contains(v):
            return Verdict.refuted("witness stream member", counterexample=v)
    for k in range(horizon):
        if s.contains(k):
            return Verdict.refuted("member found by scan", counterexample=k)
    return Verdict.unknown("no member below horizon", horizon=horizon)


# ---------------------------------------------------------------------------
# textual set literals


_TOKEN = re.compile(r"""
    \s*(?:
      (?P<lparen>\() | (?P<rparen>\)) |
      (?P<op>[-+&^]) | (?P<tilde>~) |
      (?P<brace>\{[^}]*\}) |
      (?P<call>[A-Za-z_][A-Za-z_0-9]*\s*\((?:[^()]*)\)) |
      (?P<name>[A-Za-z_][A-Za-z_0-9]*)
    )""", re.VERBOSE)


def parse_set_literal(text: str, env: Optional[dict] = None) -> EvaluableSet:
    """Parse expressions such as  cyl("1") - cyl("101") + {3,7} - {2}.

    Atoms: cyl("bits") (cyl() is all of omega), omega, empty, digit(i),
    {n, m, ...}, names bound in env, parenthesised expressions.  Operators,
    loosest first: + (union), - (difference), ^ (symmetric difference);
    & (intersection) binds tighter; ~ (complement) is a prefix.
    """
    tokens = _tokenize(text)
    pos = [0]

    def peek() -> Optional[tuple[str, str]]:
        return tokens[pos[0]] if pos[0] < len(tokens) else None

    def take() -> tuple[str, str]:
        tok = tokens[pos[0]]
        pos[0] += 1
        return tok

    def atom() -> EvaluableSet:
        tok = peek()
        if tok is None:
            raise ValueError(f"unexpected end of set literal: {text!r}")
        kind, value = tok
        if kind == "tilde":
            take()
            return complement(atom())
        if kind == "lparen":
            take()
            e = expr()
            if peek() is None or take()[0] != "rparen":
                raise ValueError(f"unbalanced parentheses in {text!r}")
            return e
        if kind == "brace":
            take()
            body = value.strip("{} \t")
            if not body:
                return CylinderSet.empty()
            return CylinderSet.finite(int(p) for p in body.split(","))
        if kind == "call":
            take()
            fname, arg = value.split("(", 1)
            arg = arg.rstrip(")").strip().strip("\"'")
            fname = fname.strip()
            if fname == "cyl":
                return CylinderSet.cyl(arg)
            if fname == "digit":
                return DigitSet(int(arg))
            raise ValueError(f"unknown set constructor {fname!r}")
        if kind == "name":
            take()
            if value == "omega":
                return CylinderSet.full()
            if value == "empty":
                return CylinderSet.empty()
            if env and value in env:
                return env[value]
            raise ValueError(f"unknown set name {value!r}")
        raise ValueError(f"unexpected token {value!r} in {text!r}")

    def factor() -> EvaluableSet:
        left = atom()
        while peek() and peek()[0] == "op" and peek()[1] == "&":
            take()
            left = intersection(left, atom())
        return left

    def expr() -> EvaluableSet:
        left = factor()
        while peek() and peek()[0] == "op" and peek()[1] in "+-^":
            op = take()[1]
            right = factor()
            if op == "+":
                left = union(left, right)
            elif op == "-":
                left = difference(left, right)
            else:
                if not (is_cylinder(left) and is_cylinder(right)):
                    raise ValueError("symmetric difference needs exact operands")
                left = left.symmetric_difference(right)
        return left

    result = expr()
    if pos[0] != len(tokens):
        raise ValueError(f"trailing tokens in set literal {text!r}")
    return result


def _tokenize(text: str) -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if not m:
            raise ValueError(f"cannot tokenize set literal at {text[i:]!r}")
        i = m.end()
        for kind, value in m.groupdict().items():
            if value is not None:
                out.append((kind, value.strip()))
                break
    return out
