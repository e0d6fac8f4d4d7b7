"""Deterministic stand-in for a generic permutation of omega.

The permutation is grown from a finite injective condition.  Registered
requirements name dense targets; construction runs a fair schedule that
meets each one at a recorded stage, interleaving totality and
surjectivity steps so the limit object is a genuine permutation.  Later
queries extend the condition by a canonical rule (an argument keeps its
own value when that value is free, otherwise it takes the least free
one), which keeps replays reproducible.

Two requirement families are built in: cylinder hitting, which keeps
stage extensions valid, and convergence killing, which spreads the
block indices carrying a point sequence across both sides of a twin
pair.  The emulation is deliberately modest: it meets the countably
many requirements the constructions actually consult, nothing more.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .omega_sets import (
    EvaluableSet,
    certified_infinite,
    enumerate_node,
    iter_members,
    node_extends,
    set_contains,
)
from .stone_topology import AffinePoints, OrdinalSpace, converges
from .talgebra import (
    IN,
    Branch,
    BranchSequence,
    TTree,
    phi,
    ultrafilter_decide,
)
from .construct import blocks

__all__ = [
    "PermCondition",
    "DenseRequirement",
    "GenericPermutation",
    "schedule_requirements",
    "point_requirement",
    "hitting_requirements",
    "KillRequirements",
    "kill_requirements",
]


# ---------------------------------------------------------------------------
# conditions


@dataclass(frozen=True)
class PermCondition:
    """Finite injective partial map on omega; extension is map extension."""

    pairs: tuple = ()

    def __post_init__(self):
        pairs = tuple(sorted((int(k), int(v)) for k, v in self.pairs))
        keys = [k for k, _ in pairs]
        values = [v for _, v in pairs]
        if any(k < 0 for k in keys) or any(v < 0 for v in values):
            raise ValueError("assignments live on omega")
        if len(set(keys)) != len(keys):
            raise ValueError("an argument is assigned twice")
        if len(set(values)) != len(values):
            raise ValueError("assignments are not injective")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "_map", dict(pairs))
        object.__setattr__(self, "_used", frozenset(values))

    @classmethod
    def from_map(cls, mapping) -> "PermCondition":
        return cls(tuple(mapping.items()))

    def get(self, k: int) -> Optional[int]:
        return self._map.get(k)

    def __contains__(self, k: int) -> bool:
        return k in self._map

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def domain(self) -> frozenset:
        return frozenset(self._map)

    @property
    def targets(self) -> frozenset:
        return self._used

    def assign(self, k: int, v: int) -> "PermCondition":
        """Extend by one pair; refuses conflicts and reused targets."""
        k, v = int(k), int(v)
        if k in self._map:
            if self._map[k] == v:
                return self
            raise ValueError(f"{k} is already assigned to {self._map[k]}")
        if v in self._used:
            raise ValueError(f"target {v} is already used")
        return PermCondition(self.pairs + ((k, v),))

    def extends(self, other: "PermCondition") -> bool:
        return all(self._map.get(k) == v for k, v in other.pairs)

    def to_json(self) -> dict:
        return {str(k): v for k, v in self.pairs}


@dataclass(frozen=True)
class DenseRequirement:
    """A dense target: `meets` tests a condition, `extend` produces a
    meeting extension of it.

    Extension procedures must be effective.  They may refuse a specific
    condition by raising ValueError (a conflicting assignment already
    present), but they must succeed on the empty condition.
    """

    name: str
    meets: Callable[[PermCondition], bool]
    extend: Callable[[PermCondition], PermCondition]


_SAMPLES = (PermCondition(),
            PermCondition(((0, 1),)),
            PermCondition(((3, 0), (1, 5))))


def _registration_check(req: DenseRequirement) -> None:
    """Spot-check the extension contract on sample conditions.

    Injectivity is enforced by the condition type itself, so an
    extension that tries to break it cannot produce a condition at all;
    a refusal on a nonempty sample is tolerated, on the empty condition
    it is a rejection.
    """
    for i, sample in enumerate(_SAMPLES):
        try:
            ext = req.extend(sample)
        except ValueError as err:
            if i == 0:
                raise ValueError(
                    f"requirement {req.name!r} cannot extend the empty "
                    f"condition: {err}") from err
            continue
        if not isinstance(ext, PermCondition) or not ext.extends(sample):
            raise ValueError(
                f"requirement {req.name!r} does not extend its input")
        if not req.meets(ext):
            raise ValueError(
                f"requirement {req.name!r} returns an extension "
                "it does not meet")


# ---------------------------------------------------------------------------
# the permutation


class GenericPermutation:
    """A permutation of omega grown on demand from a finite condition.

    Construction runs the schedule: requirements are met in registration
    order, one stage each, and every stage also forces the least
    undefined argument and the least missing value.  Queries are locked,
    so concurrent use is safe; the same schedule and query order always
    rebuild the same map.
    """

    def __init__(self, requirements: Iterable[DenseRequirement] = (),
                 name: str = "generic"):
        self.name = name
        self._lock = threading.RLock()
        self._log: list[dict] = []
        reqs = tuple(requirements)
        for req in reqs:
            _registration_check(req)
        cond = PermCondition()
        for stage, req in enumerate(reqs):
            if req.meets(cond):
                action = "already met"
            else:
                try:
                    ext = req.extend(cond)
                except ValueError as err:
                    raise ValueError(
                        f"stage {stage}: requirement {req.name!r} "
                        f"blocked: {err}") from err
                if not (ext.extends(cond) and req.meets(ext)):
                    raise ValueError(
                        f"stage {stage}: requirement {req.name!r} "
                        "broke its extension contract")
                cond = ext
                action = "extended"
            self._log.append({"stage": stage, "requirement": req.name,
                              "action": action,
                              "assignments": cond.to_json()})
            cond = self._interleave(cond, stage)
        self._fwd = dict(cond.pairs)
        self._bwd = {v: k for k, v in cond.pairs}
        # scan floors: every value (key) below them is known used
        self._value_floor = 0
        self._key_floor = 0

    def _interleave(self, cond: PermCondition, stage: int) -> PermCondition:
        k = 0
        while k in cond:
            k += 1
        cond = cond.assign(k, self._pick_value(k, cond.targets))
        self._log.append({"stage": stage, "requirement": f"totality({k})",
                          "action": "extended",
                          "assignments": cond.to_json()})
        v = 0
        while v in cond.targets:
            v += 1
        key = v if v not in cond else self._pick_key(cond.domain)
        cond = cond.assign(key, v)
        self._log.append({"stage": stage, "requirement": f"surjectivity({v})",
                          "action": "extended",
                          "assignments": cond.to_json()})
        return cond

    @staticmethod
    def _pick_value(k: int, used: frozenset) -> int:
        if k not in used:
            return k
        v = 0
        while v in used:
            v += 1
        return v

    @staticmethod
    def _pick_key(domain: frozenset) -> int:
        k = 0
        while k in domain:
            k += 1
        return k

    def __call__(self, k: int) -> int:
        return self.query(k)

    def query(self, k: int) -> int:
        k = int(k)
        if k < 0:
            raise ValueError("arguments live on omega")
        with self._lock:
            if k in self._fwd:
                return self._fwd[k]
            if k not in self._bwd:
                v = k
            else:
                v = self._value_floor
                while v in self._bwd:
                    v += 1
                self._value_floor = v + 1
            self._fwd[k] = v
            self._bwd[v] = k
            return v

    def inverse(self, v: int) -> int:
        v = int(v)
        if v < 0:
            raise ValueError("values live on omega")
        with self._lock:
            if v in self._bwd:
                return self._bwd[v]
            if v not in self._fwd:
                k = v
            else:
                k = self._key_floor
                while k in self._fwd:
                    k += 1
                self._key_floor = k + 1
            self._fwd[k] = v
            self._bwd[v] = k
            return k

    def condition(self) -> PermCondition:
        """Snapshot of every assignment made so far."""
        with self._lock:
            return PermCondition(tuple(self._fwd.items()))

    def schedule_log(self) -> tuple:
        return tuple(dict(entry) for entry in self._log)

    def describe(self) -> str:
        with self._lock:
            return (f"{self.name} permutation: {len(self._log)} schedule "
                    f"entries, {len(self._fwd)} assignments")

    def __repr__(self) -> str:
        return f"<{self.describe()}>"


def schedule_requirements(reqs: Iterable[DenseRequirement],
                          name: str = "generic") -> GenericPermutation:
    """Build the permutation meeting every listed requirement in order."""
    return GenericPermutation(reqs, name)


# ---------------------------------------------------------------------------
# requirement families


def point_requirement(k: int, v: int) -> DenseRequirement:
    """Force one value: met exactly when k maps to v."""
    k, v = int(k), int(v)

    def meets(cond: PermCondition) -> bool:
        return cond.get(k) == v

    def extend(cond: PermCondition) -> PermCondition:
        return cond.assign(k, v)

    return DenseRequirement(f"point {k}->{v}", meets, extend)


def _tails_to(depth: int):
    yield ""
    layer = ["0", "1"]
    for _ in range(depth):
        for tail in layer:
            yield tail
        layer = [t + b for t in layer for b in "01"]


def _least_index_in(tail: str, used: frozenset) -> int:
    j = 0
    while j in used or not node_extends(enumerate_node(j), tail):
        j += 1
    return j


def _hitting_requirement(L: EvaluableSet, tail: str) -> DenseRequirement:
    def meets(cond: PermCondition) -> bool:
        return any(set_contains(L, k) and
                   node_extends(enumerate_node(v), tail)
                   for k, v in cond.pairs)

    def extend(cond: PermCondition) -> PermCondition:
        if meets(cond):
            return cond
        k = next(kk for kk in iter_members(L, len(cond) + 64)
                 if kk not in cond)
        return cond.assign(k, _least_index_in(tail, cond.targets))

    return DenseRequirement(f"hits cylinder <{tail}>", meets, extend)


def hitting_requirements(L: EvaluableSet, depth: int) -> list:
    """One requirement per node tail of length <= depth: some argument
    in the index set must map to a node inside that cylinder.  Extension
    takes the least unassigned member of the set and the least free
    index inside the cylinder.
    """
    if not certified_infinite(L):
        raise ValueError("the index set must be certified infinite")
    return [_hitting_requirement(L, tail) for tail in _tails_to(depth)]


# ---------------------------------------------------------------------------
# convergence killing


class KillRequirements(tuple):
    """The in/out requirement pair, carrying the block indices consulted
    and the points that had to be excluded."""

    relevant: tuple
    excluded: tuple

    def __new__(cls, reqs, relevant, excluded):
        self = super().__new__(cls, reqs)
        self.relevant = tuple(relevant)
        self.excluded = tuple(excluded)
        return self


def _side_requirement(relevant: Sequence[int], m: int,
                      inside: bool) -> DenseRequirement:
    side = "inside" if inside else "outside"

    def _hits(cond: PermCondition, k: int) -> bool:
        v = cond.get(k)
        return v is not None and node_extends(enumerate_node(v), "1") == inside

    def meets(cond: PermCondition) -> bool:
        return sum(1 for k in relevant if _hits(cond, k)) >= m

    def extend(cond: PermCondition) -> PermCondition:
        count = sum(1 for k in relevant if _hits(cond, k))
        for k in relevant:
            if count >= m:
                break
            if k in cond:
                continue
            j = 0
            while (j in cond.targets or
                   node_extends(enumerate_node(j), "1") != inside):
                j += 1
            cond = cond.assign(k, j)
            count += 1
        if count < m:
            raise ValueError(
                f"only {count} of the {len(relevant)} carried blocks can "
                f"still land {side} <1>")
        return cond

    return DenseRequirement(f"kill: {m} carried blocks {side} <1>",
                            meets, extend)


def kill_requirements(tree: TTree, x: Branch, points: Sequence[Branch],
                      m: int, convergence_depth: int = 6) -> KillRequirements:
    """Requirement pair spreading the listed points across a twin pair.

    Each point must ride its own block of x's table: its divergence
    level, pulled back through the table enumeration, names a block
    whose generator the point's ultrafilter contains.  Points that fail
    that carriage check (or repeat a block) are excluded and reported,
    not fatal.  Needs at least 2m distinct carried blocks, since a block
    lands on exactly one side.

    When the carried block positions form an affine progression the
    convergence of the points toward x is checked to `convergence_depth`
    first; a finite prefix can neither witness nor refute a tail claim
    in general, so other listings skip that gate.  The reduction from
    convergence killing to block placement is validated by the demos
    rather than derived from first principles.
    """
    if m < 0:
        raise ValueError("the side quota must be a natural number")
    table = blocks(tree, x)
    relevant: list[int] = []
    excluded: list[tuple] = []
    for pos, y in enumerate(points):
        try:
            level = phi(tree, x, y)
            k = table.enumeration.inverse(level)
        except ValueError as err:
            excluded.append((pos, str(err)))
            continue
        if k in relevant:
            excluded.append((pos, f"block {k} already taken"))
            continue
        decision = ultrafilter_decide(tree, y, x.node_at(level + 1))
        if decision.answer != IN:
            excluded.append((pos, f"block {k} does not carry the point: "
                                  f"{decision.reason}"))
            continue
        relevant.append(k)
    steps = {b - a for a, b in zip(relevant, relevant[1:])}
    if len(steps) == 1 and (step := steps.pop()) >= 1:
        seq = BranchSequence(tree, x)
        seq.materialize(convergence_depth)
        space = OrdinalSpace(seq)
        verdict = converges(space, AffinePoints(step, relevant[0]),
                            space.top, convergence_depth)
        if verdict.is_refuted:
            raise ValueError(
                f"the listed points do not converge to the branch: "
                f"{verdict.reason}")
    if len(relevant) < 2 * m:
        raise ValueError(
            f"killing with quota {m} needs {2 * m} distinct carried "
            f"blocks, only {len(relevant)} available (pigeonhole)")
    return KillRequirements(
        (_side_requirement(relevant, m, True),
         _side_requirement(relevant, m, False)),
        relevant, excluded)
