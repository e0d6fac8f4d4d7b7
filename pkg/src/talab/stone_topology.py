"""The compact scattered topology an absorption sequence puts on lam + 1.

A coherent sequence ⟨a_beta : beta < lam⟩ induces a topology on the ordinal
interval [0, lam] through its hat sets: the subbase consists of every â_beta
together with every complement (lam+1) ∖ â_beta.  Each â_beta is then
compact open, the space is Hausdorff (â_alpha separates alpha from any
larger point), and it is scattered because the minimum of any nonempty
subset is isolated in it.

Everything here works over the materialized point range of the sequence
plus the top point lam, so all verdicts are desk-scale checks: exact where
hat membership is exact, Unknown where the lazy tier blocks a step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from .coherent import CoherentSequence, HatSet, hat as _hat
from .omega_sets import DEFAULT_HORIZON, DEFAULT_WITNESSES, Verdict
from .ordinals import Ordinal


def _coerce(o: Union[Ordinal, int]) -> Ordinal:
    return Ordinal.nat(o) if isinstance(o, int) else o


class OrdinalSpace:
    """The interval [0, lam] under the hat-set topology of seq (length lam).

    with_top=False exposes the subspace [0, lam) instead; the sequence and
    its hats are shared either way.
    """

    def __init__(self, seq: CoherentSequence, with_top: bool = True,
                 horizon: int = DEFAULT_HORIZON):
        self.seq = seq
        self.with_top = with_top
        self.horizon = horizon
        self.top = seq.length
        self.domain = seq.length + 1
        self._hats: dict[Ordinal, HatSet] = {}
        self._memo: dict[tuple[Ordinal, Ordinal], Optional[bool]] = {}

    def hat(self, beta: Union[Ordinal, int]) -> HatSet:
        beta = _coerce(beta)
        if beta not in self._hats:
            self._hats[beta] = _hat(self.seq, beta, self.horizon)
        return self._hats[beta]

    def member(self, alpha: Union[Ordinal, int],
               beta: Union[Ordinal, int]) -> Optional[bool]:
        """Three-valued: is point alpha in â_beta?"""
        alpha, beta = _coerce(alpha), _coerce(beta)
        key = (alpha, beta)
        if key not in self._memo:
            self._memo[key] = self.hat(beta).member(alpha)
        return self._memo[key]

    def points(self) -> list[Ordinal]:
        """Materialized interior points, plus the top when exposed."""
        interior = sorted(g for g in self.seq.materialized() if g < self.top)
        if self.with_top:
            return interior + [self.top]
        return interior

    def interior_points(self) -> list[Ordinal]:
        return [p for p in self.points() if p < self.top]


# ---------------------------------------------------------------------------
# cover elements


@dataclass(frozen=True)
class CoverElement:
    """One open set usable in a cover.

    kind "hat" is the subbasic â_beta, kind "cohat" the subbasic
    (lam+1) ∖ â_beta, and kind "top" the basic cofinite-style set
    (lam+1) ∖ (â over F) for a finite tuple F (F = () is the whole space).
    """

    kind: str
    beta: Optional[Ordinal] = None
    F: tuple = ()

    def __post_init__(self):
        if self.kind not in ("hat", "cohat", "top"):
            raise ValueError(f"unknown cover element kind {self.kind!r}")
        if self.kind in ("hat", "cohat") and self.beta is None:
            raise ValueError(f"{self.kind} element needs an index")

    def member(self, space: OrdinalSpace,
               point: Union[Ordinal, int]) -> Optional[bool]:
        point = _coerce(point)
        if self.kind == "hat":
            return space.member(point, self.beta)
        if self.kind == "cohat":
            m = space.member(point, self.beta)
            return None if m is None else not m
        for gamma in self.F:
            m = space.member(point, gamma)
            if m is None:
                return None
            if m:
                return False
        return True

    def label(self) -> str:
        if self.kind == "top":
            return f"top({','.join(str(g) for g in self.F)})"
        return f"{self.kind}({self.beta})"

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.beta is not None:
            out["beta"] = str(self.beta)
        if self.kind == "top":
            out["F"] = [str(g) for g in self.F]
        return out


def _as_element(spec_item, length: Ordinal) -> CoverElement:
    kind, payload = spec_item
    if kind in ("hat", "cohat"):
        beta = _coerce(payload)
        if not beta < length:
            raise ValueError(f"{kind} index {beta} not below {length}")
        return CoverElement(kind, beta)
    if kind == "top":
        return CoverElement("top", None,
                            tuple(sorted(_coerce(g) for g in payload)))
    raise ValueError(f"unknown cover element kind {kind!r}")


class SubbasicCover:
    """A cover presented by subbase indices plus optional extras.

    hats and cohats list the beta of subbasic elements; tops lists finite F
    tuples for (lam+1) ∖ (â over F) elements; generator, when given, is a
    zero-argument callable yielding further ("hat"|"cohat"|"top", payload)
    pairs on demand, pulled lazily and at most `horizon` times.
    """

    def __init__(self, hats: Iterable[Union[Ordinal, int]] = (),
                 cohats: Iterable[Union[Ordinal, int]] = (),
                 tops: Iterable[Sequence] = (),
                 generator: Optional[Callable[[], Iterator]] = None,
                 horizon: int = DEFAULT_HORIZON):
        self.hats = [_coerce(b) for b in hats]
        self.cohats = [_coerce(b) for b in cohats]
        self.tops = [tuple(sorted(_coerce(g) for g in F)) for F in tops]
        self.generator = generator
        self.horizon = horizon
        self._pulled: list[CoverElement] = []
        self._source: Optional[Iterator] = None
        self._exhausted = generator is None

    def listed(self, length: Ordinal) -> list[CoverElement]:
        for beta in self.hats + self.cohats:
            if not beta < length:
                raise ValueError(f"cover index {beta} not below {length}")
        return ([CoverElement("hat", b) for b in self.hats]
                + [CoverElement("cohat", b) for b in self.cohats]
                + [CoverElement("top", None, F) for F in self.tops])

    def elements(self, length: Ordinal) -> Iterator[CoverElement]:
        """Listed elements first, then generator output (cached, bounded)."""
        yield from self.listed(length)
        yield from self._pulled
        if self._exhausted:
            return
        if self._source is None:
            self._source = iter(self.generator())
        while len(self._pulled) < self.horizon:
            try:
                item = next(self._source)
            except StopIteration:
                self._exhausted = True
                return
            elem = _as_element(item, length)
            self._pulled.append(elem)
            yield elem
        self._exhausted = True


# ---------------------------------------------------------------------------
# finite subcover


@dataclass
class Subcover:
    """A finite selection from a cover together with its descent log."""

    elements: list
    steps: list = field(default_factory=list)
    points: list = field(default_factory=list)
    verdict: Verdict = field(default_factory=lambda: Verdict.verified())

    def to_json(self) -> dict:
        return {"elements": [e.label() for e in self.elements],
                "steps": self.steps,
                "points": [str(p) for p in self.points],
                "verdict": self.verdict.to_json()}


def finite_subcover(space: OrdinalSpace, cover: SubbasicCover,
                    horizon: int = DEFAULT_HORIZON
                    ) -> Union[Subcover, Verdict]:
    """Select a finite subcover over the materialized points, top down.

    From the top point downward, each still-relevant point is matched
    against the cover in presentation order and the first element holding
    it is kept.  For a hat element the absorption witness of the pair is
    recorded in the step log (that is the well-founded descent step of the
    compactness argument: â_point ⊆ â_beta ∪ â_F allows the front to drop
    to max F).  Refuted with the first point no cover element holds;
    Unknown when a membership query blocks.
    """
    points = space.points()
    chosen: list[CoverElement] = []
    steps: list[dict] = []
    for point in reversed(points):
        found = None
        blocked = False
        for elem in cover.elements(space.seq.length):
            m = elem.member(space, point)
            if m is None:
                blocked = True
                continue
            if m:
                found = elem
                break
        if found is None:
            if blocked:
                return Verdict.unknown(
                    f"membership of point {point} blocked by the lazy tier",
                    horizon=horizon)
            return Verdict.refuted(
                f"no cover element holds point {point}",
                counterexample=str(point), exact=True)
        if found not in chosen:
            chosen.append(found)
        step = {"point": str(point), "element": found.label()}
        if found.kind == "hat" and point < found.beta:
            w = space.seq.witness(point, found.beta)
            step["witness"] = w.to_json()
            if w.F:
                step["descend_to"] = str(max(w.F))
        steps.append(step)
    # re-verify: every point must sit inside some chosen element
    for point in points:
        if not any(e.member(space, point) for e in chosen):
            return Verdict.refuted(
                f"re-verification failed at {point}", counterexample=str(point))
    verdict = Verdict.verified(
        f"{len(chosen)} elements cover {len(points)} points",
        witnesses=(len(chosen), len(points)))
    return Subcover(chosen, steps, points, verdict)


# ---------------------------------------------------------------------------
# neighborhood bases


@dataclass(frozen=True)
class BasicNeighborhood:
    """Canonical basic clopen set at a point: â_alpha ∖ (â over F), or for
    the top point (lam+1) ∖ (â over F)."""

    alpha: Ordinal
    F: tuple = ()
    is_top: bool = False

    def member(self, space: OrdinalSpace,
               point: Union[Ordinal, int]) -> Optional[bool]:
        point = _coerce(point)
        if not self.is_top:
            inside = space.member(point, self.alpha)
            if inside is not True:
                return inside
        for gamma in self.F:
            m = space.member(point, gamma)
            if m is None:
                return None
            if m:
                return False
        return True

    def label(self) -> str:
        f_text = ",".join(str(g) for g in self.F)
        if self.is_top:
            return f"top({f_text})"
        return f"hat({self.alpha})" + (f"\\hat({f_text})" if self.F else "")

    def materialize(self, space: OrdinalSpace) -> list[Ordinal]:
        return [p for p in space.points() if self.member(space, p) is True]

    def to_json(self) -> dict:
        return {"alpha": str(self.alpha), "F": [str(g) for g in self.F],
                "top": self.is_top}


def neighborhood_base(space: OrdinalSpace, alpha: Union[Ordinal, int],
                      k: int) -> list[BasicNeighborhood]:
    """First k canonical basic neighborhoods of alpha.

    The F sets grow through the materialized indices below alpha in order,
    so the list is nested decreasing.  A point with m materialized
    predecessors has only m+1 distinct base elements; the list stops there.
    """
    alpha = _coerce(alpha)
    if not (alpha < space.domain):
        raise ValueError(f"{alpha} outside domain {space.domain}")
    is_top = alpha == space.top
    below = sorted(g for g in space.seq.materialized() if g < alpha)
    out = []
    for j in range(min(k, len(below) + 1)):
        out.append(BasicNeighborhood(alpha, tuple(below[:j]), is_top))
    return out


# ---------------------------------------------------------------------------
# convergence


@dataclass(frozen=True)
class ConstantPoints:
    """The constant sequence at one point."""

    value: Union[Ordinal, int]

    def describe(self) -> str:
        return f"constant {self.value}"


@dataclass(frozen=True)
class CyclicPoints:
    """Round-robin over a finite tuple of points."""

    values: tuple

    def describe(self) -> str:
        return f"cycle {tuple(str(v) for v in self.values)}"


@dataclass(frozen=True)
class AffinePoints:
    """n ↦ step·n + offset, strictly increasing naturals; needs a
    limit-length space so the values stay inside the domain."""

    step: int
    offset: int = 0

    def describe(self) -> str:
        return f"n -> {self.step}*n+{self.offset}"


PointDescriptor = Union[ConstantPoints, CyclicPoints, AffinePoints]


def _tail_in_neighborhood(space: OrdinalSpace, points: PointDescriptor,
                          neigh: BasicNeighborhood
                          ) -> tuple[Optional[bool], object]:
    """(verdict, payload): True with a tail start, False with escapee
    indices, None when membership blocks."""
    if isinstance(points, ConstantPoints):
        m = neigh.member(space, _coerce(points.value))
        if m is None:
            return None, None
        return (True, 0) if m else (False, range(0, 3 * DEFAULT_WITNESSES))
    if isinstance(points, CyclicPoints):
        period = len(points.values)
        escapes = []
        for i, v in enumerate(points.values):
            m = neigh.member(space, _coerce(v))
            if m is None:
                return None, None
            if not m:
                escapes.append(i)
        if not escapes:
            return True, 0
        indices = sorted(i + period * r for i in escapes
                         for r in range(DEFAULT_WITNESSES))
        return False, indices
    # affine: scan a window honestly; nothing bounds a hat by its own level
    # (an excluded hat may catch the stream cofinally), so escapes are
    # counted, never assumed away
    a, b = points.step, points.offset
    if neigh.is_top:
        finite_excluded = [g.finite_part for g in neigh.F if g.is_finite]
        start = max(0, ceil((max(finite_excluded, default=-1) + 1 - b) / a))
    else:
        start = 0
    escapes = []
    for i in range(start, start + 3 * DEFAULT_WITNESSES):
        level = Ordinal.nat(b + a * i)
        if not level < space.seq.length:
            break
        m = neigh.member(space, level)
        if m is None:
            return None, None
        if not m:
            escapes.append(i)
    if len(escapes) >= DEFAULT_WITNESSES:
        return False, escapes
    if not escapes:
        return True, start
    return True, escapes[-1] + 1


def converges(space: OrdinalSpace, points: PointDescriptor,
              target: Union[Ordinal, int], depth: int = 4,
              horizon: int = DEFAULT_HORIZON) -> Verdict:
    """Does the sequence enter every canonical target neighborhood on a tail?

    Verified-to-depth checks the first `depth` base elements at the target;
    each must absorb a tail of the sequence.  Refuted names the neighborhood
    and carries infinitely many escaping indices in closed form (the first
    few listed as witnesses).  Only closed-form descriptors are accepted,
    so every tail claim is checkable.
    """
    if not isinstance(points, (ConstantPoints, CyclicPoints, AffinePoints)):
        raise TypeError("points must be a closed-form descriptor")
    if isinstance(points, AffinePoints):
        if points.step < 1:
            raise ValueError("affine descriptor needs step >= 1")
        if not space.seq.length.is_limit:
            raise ValueError("affine points need a limit-length space")
    target = _coerce(target)
    tail_starts = []
    for neigh in neighborhood_base(space, target, depth):
        verdict, payload = _tail_in_neighborhood(space, points, neigh)
        if verdict is None:
            return Verdict.unknown(
                f"membership in {neigh.label()} blocked", horizon=horizon)
        if verdict is False:
            escapees = list(payload)[:DEFAULT_WITNESSES]
            return Verdict.refuted(
                f"{points.describe()} escapes {neigh.label()} cofinally",
                counterexample=neigh.label(),
                witnesses=tuple(escapees))
        tail_starts.append(payload)
    return Verdict.verified(
        f"tails inside the first {len(tail_starts)} neighborhoods of {target}",
        witnesses=tuple(tail_starts))


# ---------------------------------------------------------------------------
# scattered rank


@dataclass
class CBResult:
    """Iterated isolated-point removal over the materialized points."""

    ranks: dict
    stages: list
    residue: list
    verdict: Verdict

    def to_json(self) -> dict:
        return {"ranks": {str(k): v for k, v in sorted(self.ranks.items())},
                "stages": [[str(p) for p in stage] for stage in self.stages],
                "residue": [str(p) for p in self.residue],
                "verdict": self.verdict.to_json()}


def _isolating_elements(space: OrdinalSpace,
                        point: Ordinal) -> Iterator[CoverElement]:
    if point < space.top:
        yield CoverElement("hat", point)
    for beta in space.interior_points():
        if beta != point:
            yield CoverElement("cohat", beta)


def cantor_bendixson(space: OrdinalSpace,
                     horizon: int = DEFAULT_HORIZON) -> CBResult:
    """Rank of each materialized point under subbasic isolation.

    A point is removed at stage r when some subbase element meets the
    stage-r residue in that point alone.  The minimum of any residue is
    always isolated this way (its own hat reaches no higher), so the
    process terminates on the materialized range; a stuck nonempty residue
    is reported Refuted, a blocked membership Unknown.
    """
    residue = space.points()
    ranks: dict[Ordinal, int] = {}
    stages: list[list[Ordinal]] = []
    rank = 0
    while residue:
        removed = []
        for p in residue:
            for elem in _isolating_elements(space, p):
                hit_only_p = True
                for q in residue:
                    m = elem.member(space, q)
                    if m is None:
                        return CBResult(ranks, stages, residue, Verdict.unknown(
                            f"membership of {q} blocked at rank {rank}",
                            horizon=horizon))
                    if m and q != p:
                        hit_only_p = False
                        break
                    if not m and q == p:
                        hit_only_p = False
                        break
                if hit_only_p:
                    removed.append(p)
                    break
        if not removed:
            return CBResult(ranks, stages, residue, Verdict.refuted(
                "no isolated point in nonempty residue",
                counterexample=str(residue[0])))
        for p in removed:
            ranks[p] = rank
        residue = [p for p in residue if p not in removed]
        stages.append(removed)
        rank += 1
    return CBResult(ranks, stages, [], Verdict.verified(
        f"scattered in {rank} stages", witnesses=(rank,)))


# ---------------------------------------------------------------------------
# invariants and export


def hausdorff_check(space: OrdinalSpace,
                    horizon: int = DEFAULT_HORIZON) -> Verdict:
    """alpha ∈ â_alpha and beta ∉ â_alpha for all materialized alpha < beta:
    â_alpha and its complement then separate the pair."""
    points = space.points()
    for i, alpha in enumerate(points):
        if alpha == space.top:
            continue
        if space.member(alpha, alpha) is not True:
            return Verdict.refuted(f"{alpha} missing from its own hat",
                                   counterexample=str(alpha))
        for beta in points[i + 1:]:
            if space.member(beta, alpha) is not False:
                return Verdict.refuted(
                    f"{beta} not separated from {alpha}",
                    counterexample=(str(alpha), str(beta)))
    return Verdict.verified(f"{len(points)} points pairwise separated",
                            exact=True)


def space_dot(space: OrdinalSpace) -> str:
    """Materialized neighborhood diagram: an edge alpha -> beta records
    alpha ∈ â_beta for distinct points."""
    lines = ["digraph space {", "  rankdir=BT;"]
    points = space.points()
    for p in points:
        shape = "doublecircle" if p == space.top else "circle"
        lines.append(f'  "{p}" [shape={shape}];')
    for p in points:
        for q in points:
            if p != q and q < space.top and space.member(p, q) is True:
                lines.append(f'  "{p}" -> "{q}";')
    lines.append("}")
    return "\n".join(lines)
