"""Ordinal arithmetic below omega^2 and the stage-scheduling enumerations."""
import pytest
from hypothesis import given, strategies as st

from talab.ordinals import (
    Ordinal,
    canonical_enumeration,
    parse_ordinal,
    successor_enumeration,
)

w = Ordinal.omega()


def test_basic_predicates():
    assert Ordinal.zero().is_zero
    assert not Ordinal.zero().is_limit and not Ordinal.zero().is_successor
    assert Ordinal.nat(3).is_successor
    assert w.is_limit
    assert (w * 2).is_limit
    assert (w + 5).is_successor


def test_order_and_arithmetic():
    assert Ordinal.nat(7) < w < w + 1 < w * 2 < w * 2 + 5
    assert (w + 5).successor() == w + 6
    assert (w + 1).predecessor() == w
    assert Ordinal.nat(0).successor() == Ordinal.nat(1)
    with pytest.raises(ValueError):
        w.predecessor()
    with pytest.raises(ValueError):
        Ordinal.zero().predecessor()


def test_text_forms():
    cases = {
        Ordinal.zero(): "0",
        Ordinal.nat(5): "5",
        w: "w",
        w + 3: "w+3",
        w * 2: "w*2",
        w * 2 + 5: "w*2+5",
    }
    for o, s in cases.items():
        assert str(o) == s
        assert parse_ordinal(s) == o


def test_parse_rejects_junk():
    for bad in ("", "w^2", "2*w", "w*0+1", "-1", "w+", "w*"):
        with pytest.raises(ValueError):
            parse_ordinal(bad)


@given(st.integers(0, 50), st.integers(0, 50))
def test_parse_roundtrip(m, n):
    o = Ordinal(m, n)
    assert parse_ordinal(str(o)) == o


# -- canonical stage enumeration ----------------------------------------------

def test_enumeration_identity_on_omega():
    e = canonical_enumeration(w)
    for n in range(30):
        assert e(n) == Ordinal.nat(n)
        assert e.inverse(Ordinal.nat(n)) == n


def test_enumeration_interleaves_segments():
    # frozen: lambda = w*2 interleaves the two segments
    e = canonical_enumeration(w * 2)
    got = [str(e(n)) for n in range(6)]
    assert got == ["0", "w", "1", "w+1", "2", "w+2"]
    assert e(5) == w + 2
    assert e.inverse(w + 2) == 5


def test_enumeration_requires_limit():
    with pytest.raises(ValueError):
        canonical_enumeration(w + 1)
    with pytest.raises(ValueError):
        canonical_enumeration(Ordinal.zero())


@given(st.integers(1, 6), st.integers(0, 400))
def test_enumeration_bijective(m, n):
    e = canonical_enumeration(Ordinal(m, 0))
    alpha = e(n)
    assert alpha < Ordinal(m, 0)
    assert e.inverse(alpha) == n


@given(st.integers(1, 5), st.integers(1, 8))
def test_enumeration_prefix_image(m, k):
    # the first m*k values enumerate exactly the grid {w*i+j : i<m, j<k}
    e = canonical_enumeration(Ordinal(m, 0))
    image = {e(n) for n in range(m * k)}
    assert image == {Ordinal(i, j) for i in range(m) for j in range(k)}


# -- successor-only enumeration -------------------------------------------------

def test_successor_enumeration_frozen():
    s = successor_enumeration(w * 2)
    got = [str(s(n)) for n in range(6)]
    assert got == ["1", "w+1", "2", "w+2", "3", "w+3"]
    assert s.inverse(w + 2) == 3


@given(st.integers(1, 6), st.integers(0, 400))
def test_successor_enumeration_bijective(m, n):
    s = successor_enumeration(Ordinal(m, 0))
    alpha = s(n)
    assert alpha.is_successor and alpha < Ordinal(m, 0)
    assert s.inverse(alpha) == n


def test_successor_enumeration_rejects_nonsuccessor():
    s = successor_enumeration(w * 2)
    with pytest.raises(ValueError):
        s.inverse(w)
