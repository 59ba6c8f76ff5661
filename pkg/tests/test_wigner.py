import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.physics.wigner import wigner_3j as sympy_3j

from molanneal.wigner import wigner_3j


def test_identity_case():
    assert wigner_3j(0, 0, 0, 0, 0, 0) == pytest.approx(1.0, abs=1e-15)


def test_known_value():
    assert wigner_3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1 / math.sqrt(3), abs=1e-15)


def test_odd_sum_with_zero_projections_vanishes():
    assert wigner_3j(1, 1, 1, 0, 0, 0) == 0.0


def test_selection_rules_return_zero():
    assert wigner_3j(1, 1, 3, 0, 0, 0) == 0.0  # triangle
    assert wigner_3j(1, 1, 1, 1, 0, 0) == 0.0  # m sum


def test_rejects_non_half_integers():
    with pytest.raises(ValueError):
        wigner_3j(0.3, 1, 1, 0, 0, 0)


half = st.integers(0, 8).map(lambda k: k / 2)


@settings(max_examples=300, deadline=None)
@given(j1=half, j2=half, j3=half, m1=st.integers(-8, 8), m2=st.integers(-8, 8))
def test_matches_sympy(j1, j2, j3, m1, m2):
    # projections must share the parity of their j
    m1 = m1 / 2 if (m1 % 2) == (2 * j1) % 2 else (m1 + 1) / 2
    m2 = m2 / 2 if (m2 % 2) == (2 * j2) % 2 else (m2 + 1) / 2
    m3 = -(m1 + m2)
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3 or (j1 + j2 + j3) % 1:
        return
    expected = float(sympy_3j(j1, j2, j3, m1, m2, m3))
    assert abs(wigner_3j(j1, j2, j3, m1, m2, m3) - expected) < 1e-12
