"""Independent brute-force oracle for node-indexed subsets of omega.

Everything here is deliberately naive: nodes are generated in
length-then-lexicographic order and sets are plain Python sets over a
finite horizon.  Test modules compare the package's symbolic results
against these.
"""
from __future__ import annotations

from itertools import count, product


def brute_nodes(n: int) -> list[str]:
    """First n binary strings in length-then-lex order, starting with ''."""
    out: list[str] = []
    for length in count(0):
        if len(out) >= n:
            break
        for bits in product("01", repeat=length):
            out.append("".join(bits))
            if len(out) >= n:
                break
    return out


def brute_node(k: int) -> str:
    return brute_nodes(k + 1)[k]


def brute_index(bits: str) -> int:
    target = (len(bits), bits)
    idx = 0
    for length in count(0):
        for word in product("01", repeat=length):
            if (length, "".join(word)) == target:
                return idx
            idx += 1
    raise AssertionError("unreachable")


def brute_cyl(root: str, horizon: int) -> set[int]:
    nodes = brute_nodes(horizon)
    return {k for k in range(horizon) if nodes[k].startswith(root)}


def brute_eval(expr, horizon: int) -> set[int]:
    """Evaluate a tiny expression tree over plain sets.

    expr is one of:
      ("cyl", root)       cylinder below root
      ("fin", iterable)   finite set of indices
      ("omega",)          everything below the horizon
      ("union"|"inter"|"diff"|"xor", left, right)
      ("comp", sub)
    """
    tag = expr[0]
    if tag == "cyl":
        return brute_cyl(expr[1], horizon)
    if tag == "fin":
        return {k for k in expr[1] if k < horizon}
    if tag == "omega":
        return set(range(horizon))
    if tag == "comp":
        return set(range(horizon)) - brute_eval(expr[1], horizon)
    left = brute_eval(expr[1], horizon)
    right = brute_eval(expr[2], horizon)
    if tag == "union":
        return left | right
    if tag == "inter":
        return left & right
    if tag == "diff":
        return left - right
    if tag == "xor":
        return left ^ right
    raise ValueError(f"unknown tag {tag!r}")
