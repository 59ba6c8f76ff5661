import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molanneal.coupling import MAGIC_ANGLE
from molanneal.lattice import (
    IsingModel,
    LatticeConfig,
    brute_force_ground,
    build_coupling_tables,
    chain_1d,
    classify_states,
    cross_stack,
    effective_ising,
    grid_2d,
    head_to_head,
    stack_3d,
    two_qubit_rectangle,
)

E_Z = 7.3203
E_PERP = 6.7174


def test_config_validation():
    with pytest.raises(ValueError):
        LatticeConfig([(0, 0, 0), (0, 0, 1), (0, 0, 2)], [(0, 1)])  # molecule 2 unassigned
    with pytest.raises(ValueError):
        LatticeConfig([(0, 0, 0), (0, 0, 0)], [(0, 1)])
    with pytest.raises(ValueError):
        LatticeConfig([(0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 0, 3)], [(0, 1), (1, 2)], [(3, "up")])
    with pytest.raises(ValueError):
        LatticeConfig([(0, 0, 0), (0, 0, 1), (0, 0, 2)], [(0, 1)], [(2, "sideways")])


def test_magic_angle_pair_has_zero_entries():
    z = 500 * np.cos(MAGIC_ANGLE)
    x = 500 * np.sin(MAGIC_ANGLE)
    t = build_coupling_tables(LatticeConfig([(0, 0, 0), (x, 0, z)], [(0, 1)]), E_Z)
    assert np.all(t.Jperp == 0) and np.all(t.Jz == 0)


def test_tables_symmetric_zero_diagonal():
    t = build_coupling_tables(grid_2d(2, 2), E_PERP)
    for M in (t.Jperp, t.Jz):
        assert np.array_equal(M, M.T) and np.all(np.diag(M) == 0)


def test_rectangle_tables_and_bias():
    t = build_coupling_tables(two_qubit_rectangle(), E_PERP)
    assert t.Jperp[0, 1] == pytest.approx(-1034.3, rel=0.05)
    assert t.Jperp[0, 2] == pytest.approx(64.6, rel=0.05)
    assert t.h[0] == pytest.approx(t.h[1], abs=1e-6)
    model = effective_ising(two_qubit_rectangle(), E_Z)
    assert np.all(model.h == 0)
    assert model.J[0, 1] > 0
    assert brute_force_ground(model)[1] == ["01", "10"]


def test_inverting_orientation_flips_coupling():
    cfg = two_qubit_rectangle()
    J = effective_ising(cfg, E_Z).J[0, 1]
    assert effective_ising(cfg.flipped(1), E_Z).J[0, 1] == pytest.approx(-J, rel=1e-12)


def test_chain_couplings_positive_and_decaying():
    m = effective_ising(chain_1d(6), E_Z)
    assert np.allclose(m.h, 0, atol=1e-6)
    row = m.J[0, 1:]
    assert np.all(row > 0) and np.all(np.diff(row) < 0)
    assert brute_force_ground(m)[1] == ["010101", "101010"]


def test_ferro_chain():
    m = effective_ising(chain_1d(4, ferro=True), E_Z)
    assert np.all(m.J[np.triu_indices(4, 1)] < 0)
    assert brute_force_ground(m)[1] == ["0000", "1111"]


def test_grid_checkerboard():
    m = effective_ising(grid_2d(2, 3), E_Z)
    assert np.all(np.abs(m.h) < 1e-6)
    assert brute_force_ground(m)[1] == ["010101", "101010"]


def test_cross_and_head_to_head():
    side = effective_ising(two_qubit_rectangle(), E_Z).J[0, 1]
    assert abs(effective_ising(cross_stack(), E_Z).J[0, 1]) < 1e-12 * side
    assert 0 < effective_ising(head_to_head(), E_Z).J[0, 1] < side


def test_stack_layers():
    cfg = stack_3d(3, 2, 2)
    m = effective_ising(cfg, E_Z)
    layer = np.arange(12) // 4
    same = layer[:, None] == layer[None, :]
    nn = np.abs(m.J) > 1e-6
    assert np.all(m.J[same & nn] > 0)
    assert np.any(m.J[~same & nn] < 0)
    assert np.allclose(m.h[layer == 1], 0, atol=1e-6)
    assert np.allclose(m.h[layer == 0], -m.h[layer == 2], rtol=1e-9)


def test_spectator_bias():
    pos = [(0, 0, 0), (0, 0, 500), (0, 0, 1500)]
    up = effective_ising(LatticeConfig(pos, [(0, 1)], [(2, "up")]), E_Z)
    down = effective_ising(LatticeConfig(pos, [(0, 1)], [(2, "down")]), E_Z)
    t = build_coupling_tables(LatticeConfig(pos, [(0, 1)], [(2, "up")]), E_Z)
    assert up.h[0] - down.h[0] == pytest.approx(t.Jz[2, 0] - t.Jz[2, 1], rel=1e-9)
    assert up.h[0] != 0


def test_classification_counts():
    c = classify_states(two_qubit_rectangle())
    assert len(c.basis) == 6 and c.valid.sum() == 4
    bad = c.basis.rank(0b0011)  # molecules 0 and 1 both up
    assert not c.valid[bad] and c.config_string(bad) == "INVALID"
    c6 = classify_states(chain_1d(6))
    assert len(c6.basis) == 924 and c6.valid.sum() == 64


def test_brute_force_degenerate_and_limits():
    m = IsingModel(np.zeros(3), np.zeros((3, 3)), [])
    assert len(brute_force_ground(m)[1]) == 8
    with pytest.raises(ValueError):
        brute_force_ground(IsingModel(np.zeros(25), np.zeros((25, 25)), []))


def random_model(data, n):
    h = np.array(data.draw(st.lists(st.floats(-5, 5), min_size=n, max_size=n)))
    J = np.zeros((n, n))
    for a, b in itertools.combinations(range(n), 2):
        J[a, b] = J[b, a] = data.draw(st.floats(-5, 5))
    return IsingModel(h, J, [])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.data())
def test_brute_force_is_lower_bound(n, data):
    m = random_model(data, n)
    e0, ground = brute_force_ground(m)
    energies = [m.energy(format(c, f"0{n}b")) for c in range(2**n)]
    assert min(energies) == pytest.approx(e0, abs=1e-9)
    assert all(m.energy(g) == pytest.approx(e0, abs=1e-9) for g in ground)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.data())
def test_orientation_covariance(n, data):
    m = random_model(data, n)
    a = data.draw(st.integers(0, n - 1))
    h, J = m.h.copy(), m.J.copy()
    h[a] = -h[a]
    J[a, :] = -J[a, :]
    J[:, a] = -J[:, a]
    flipped = IsingModel(h, J, [])
    e0, g0 = brute_force_ground(m)
    e1, g1 = brute_force_ground(flipped)
    assert e0 == pytest.approx(e1, abs=1e-9)
    relabel = sorted(s[:a] + ("1" if s[a] == "0" else "0") + s[a + 1:] for s in g0)
    assert relabel == g1
