from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molanneal.sector import SectorBasis


@pytest.mark.parametrize("n,k", [(4, 2), (12, 6), (16, 8), (22, 3), (5, 0), (5, 5)])
def test_dimension(n, k):
    b = SectorBasis(n, k)
    assert len(b) == comb(n, k)
    assert np.all(np.diff(b.states) > 0)
    assert np.all(b.bits().sum(axis=1) == k)


@settings(deadline=None)
@given(st.integers(1, 24).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))), st.data())
def test_rank_unrank_roundtrip(nk, data):
    n, k = nk
    b = SectorBasis(n, k)
    i = data.draw(st.integers(0, len(b) - 1))
    assert b.rank(b.unrank(i)) == i


def test_outside_sector():
    b = SectorBasis(6, 3)
    assert b.ranks(np.array([0b1, 0b111]))[0] == -1
    with pytest.raises(KeyError):
        b.rank(0b1)
    with pytest.raises(ValueError):
        SectorBasis(3, 4)


def test_label():
    assert SectorBasis(4, 2).label(0b0101) == "udud"
