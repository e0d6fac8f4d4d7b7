"""Ordinals below omega*omega and the enumerations that schedule stages.

An ordinal is stored in the normal form omega*m + n.  The construction
machinery runs through a limit ordinal lam = omega*m one natural number at
a time, so it needs an explicit bijection e: omega -> lam; the canonical
choice interleaves the m segments in round-robin order, which keeps every
segment cofinal in the schedule.  A successor-only variant enumerates just
the successor ordinals below lam, used where limit levels are synthesised
rather than listed.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    """omega*limit_part + finite_part, in normal form."""

    limit_part: int
    finite_part: int

    def __post_init__(self) -> None:
        if self.limit_part < 0 or self.finite_part < 0:
            raise ValueError("ordinal parts must be natural numbers")

    @staticmethod
    def zero() -> "Ordinal":
        return Ordinal(0, 0)

    @staticmethod
    def nat(n: int) -> "Ordinal":
        return Ordinal(0, n)

    @staticmethod
    def omega() -> "Ordinal":
        return Ordinal(1, 0)

    @property
    def is_zero(self) -> bool:
        return self.limit_part == 0 and self.finite_part == 0

    @property
    def is_limit(self) -> bool:
        return self.finite_part == 0 and self.limit_part > 0

    @property
    def is_successor(self) -> bool:
        return self.finite_part > 0

    @property
    def is_finite(self) -> bool:
        return self.limit_part == 0

    def successor(self) -> "Ordinal":
        return Ordinal(self.limit_part, self.finite_part + 1)

    def predecessor(self) -> "Ordinal":
        if not self.is_successor:
            raise ValueError(f"{self} has no predecessor")
        return Ordinal(self.limit_part, self.finite_part - 1)

    def segment_start(self) -> "Ordinal":
        """The limit ordinal opening this ordinal's segment (zero on the first)."""
        return Ordinal(self.limit_part, 0)

    def __lt__(self, other: "Ordinal") -> bool:
        return (self.limit_part, self.finite_part) < (other.limit_part, other.finite_part)

    def __add__(self, n: int) -> "Ordinal":
        if n < 0:
            raise ValueError("can only add a natural number")
        return Ordinal(self.limit_part, self.finite_part + n)

    def __mul__(self, n: int) -> "Ordinal":
        # only omega * n is meaningful here
        if self != Ordinal.omega():
            raise TypeError("multiplication is only supported as omega * n")
        if n < 1:
            raise ValueError("omega * n needs n >= 1")
        return Ordinal(n, 0)

    def __str__(self) -> str:
        m, n = self.limit_part, self.finite_part
        if m == 0:
            return str(n)
        head = "w" if m == 1 else f"w*{m}"
        return head if n == 0 else f"{head}+{n}"

    def __repr__(self) -> str:
        return f"Ordinal({self})"

    def to_json(self) -> str:
        return str(self)


_ORD_RE = re.compile(r"^(?:(?P<nat>\d+)|w(?:\*(?P<m>[1-9]\d*))?(?:\+(?P<n>\d+))?)$")


def parse_ordinal(text: str) -> Ordinal:
    """Inverse of str(): accepts "0", "5", "w", "w+3", "w*2", "w*2+5"."""
    m = _ORD_RE.match(text.strip())
    if not m:
        raise ValueError(f"not an ordinal literal: {text!r}")
    if m.group("nat") is not None:
        return Ordinal.nat(int(m.group("nat")))
    limit = int(m.group("m") or 1)
    finite = int(m.group("n") or 0)
    return Ordinal(limit, finite)


class _ClosedFormEnumeration:
    """Bijection omega -> some set of ordinals, with inverse."""

    def __init__(self, lam: Ordinal, forward, backward, label: str):
        self.domain_sup = lam
        self._fwd = forward
        self._bwd = backward
        self.label = label

    def __call__(self, n: int) -> Ordinal:
        if n < 0:
            raise ValueError("enumeration index must be a natural number")
        return self._fwd(n)

    def inverse(self, alpha: Ordinal) -> int:
        if not alpha < self.domain_sup:
            raise ValueError(f"{alpha} is not below {self.domain_sup}")
        return self._bwd(alpha)

    def __repr__(self) -> str:
        return f"<{self.label} enumeration of {self.domain_sup}>"


def canonical_enumeration(lam: Ordinal) -> _ClosedFormEnumeration:
    """Round-robin bijection of omega onto all of lam = omega*m.

    e(n) = omega*(n mod m) + (n div m); for lam = omega this is the
    identity.  Every proper initial segment of lam meets the image of
    every tail of omega, which is what stage scheduling needs.
    """
    if not lam.is_limit:
        raise ValueError(f"enumeration needs a limit ordinal, got {lam}")
    m = lam.limit_part

    def fwd(n: int) -> Ordinal:
        return Ordinal(n % m, n // m)

    def bwd(alpha: Ordinal) -> int:
        return alpha.finite_part * m + alpha.limit_part

    return _ClosedFormEnumeration(lam, fwd, bwd, "round-robin")


def successor_enumeration(lam: Ordinal) -> _ClosedFormEnumeration:
    """Round-robin bijection of omega onto the successor ordinals below lam."""
    if not lam.is_limit:
        raise ValueError(f"enumeration needs a limit ordinal, got {lam}")
    m = lam.limit_part

    def fwd(n: int) -> Ordinal:
        return Ordinal(n % m, n // m + 1)

    def bwd(alpha: Ordinal) -> int:
        if not alpha.is_successor:
            raise ValueError(f"{alpha} is not a successor ordinal")
        return (alpha.finite_part - 1) * m + alpha.limit_part

    return _ClosedFormEnumeration(lam, fwd, bwd, "successor round-robin")
