import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crow_eit.model import (
    KGrid,
    ModelParams,
    assemble_mode_matrix,
    bare_band,
    dispersion,
)

finite = st.floats(-10, 10, allow_nan=False)


def test_dispersion_band_center_vanishes():
    p = ModelParams(J=-1.0, delta1=0.7, delta2=0.7)
    assert dispersion(math.pi / 2, p) == pytest.approx(0.0, abs=1e-15)


def test_dispersion_zone_edge_values():
    assert dispersion(0.0, ModelParams(J=-1.0)) == -2.0
    # 0.4 * cos(pi/4)
    assert dispersion(math.pi / 4, ModelParams(J=0.2)) == pytest.approx(0.2828427124746190, rel=1e-12)
    assert bare_band(math.pi, ModelParams(J=-1.0, delta2=3.0)) == pytest.approx(5.0)


@given(k=finite, J=finite, d1=finite, d2=finite)
def test_bare_band_is_dispersion(k, J, d1, d2):
    p = ModelParams(J=J, delta1=d1, delta2=d2)
    assert bare_band(k, p) == dispersion(k, p)


@given(k=finite, J=finite, ell=st.floats(0.1, 5))
def test_dispersion_periodic(k, J, ell):
    p = ModelParams(J=J, ell=ell)
    assert dispersion(k + 2 * math.pi / ell, p) == pytest.approx(dispersion(k, p), abs=1e-12)


@given(q=finite, J=finite, d1=finite, d2=finite)
def test_dispersion_symmetric_about_band_center(q, J, d1, d2):
    p = ModelParams(J=J, delta1=d1, delta2=d2)
    k0 = p.k0
    total = dispersion(k0 + q, p) + dispersion(k0 - q, p)
    assert total == pytest.approx(2 * (d2 - d1), abs=1e-12)


def test_mode_matrix_decoupled_limit():
    p = ModelParams(J=-1.0, g1=0.0, g2=0.0, delta2=1.5)
    m = assemble_mode_matrix(0.3, p)
    np.testing.assert_array_equal(m, np.diag([dispersion(0.3, p), 1.5, 0.0]))


def test_mode_matrix_band_center():
    p = ModelParams(J=-1.0, g1=0.4, g2=0.9)
    m = assemble_mode_matrix(p.k0, p)
    expected = [[0.0, 0.4, 0.0], [0.4, 0.0, 0.9], [0.0, 0.9, 0.0]]
    np.testing.assert_allclose(m, expected, atol=1e-15)


def test_mode_matrix_direct_evaluation():
    p = ModelParams(J=0.2, ell=1.0, g1=1.0, g2=0.5, delta1=0.0, delta2=1.0)
    m = assemble_mode_matrix(math.pi / 4, p)
    expected = [[1.2828427124746190, 1, 0], [1, 1, 0.5], [0, 0.5, 0]]
    np.testing.assert_allclose(m, expected, rtol=1e-12)


@given(k=finite, J=finite, g1=st.floats(0, 10), n=st.floats(1, 1e4), g2=st.floats(0, 10), d2=finite)
def test_mode_matrix_exactly_symmetric(k, J, g1, n, g2, d2):
    m = assemble_mode_matrix(k, ModelParams(J=J, g1=g1, n_atoms=n, g2=g2, delta2=d2))
    assert np.array_equal(m, m.T)


@given(g1=st.floats(1e-6, 1e6), n=st.floats(1, 1e6))
def test_collective_coupling(g1, n):
    p = ModelParams(g1=g1, n_atoms=n)
    assert p.G1**2 == pytest.approx(g1**2 * n, rel=1e-12)


def test_collective_coupling_single_atom():
    assert ModelParams(g1=0.37, n_atoms=1).G1 == 0.37


def test_with_G1_round_trip():
    p = ModelParams(n_atoms=1e4).with_G1(2.5e11)
    assert p.G1 == pytest.approx(2.5e11, rel=1e-15)


@pytest.mark.parametrize("field,value", [("ell", 0.0), ("n_atoms", 0.5), ("g1", -1.0),
                                         ("g2", -0.1), ("gamma", -1e-3), ("gamma_a", -1.0),
                                         ("gamma_c", -1.0)])
def test_invalid_params(field, value):
    with pytest.raises(ValueError):
        ModelParams(**{field: value})


def test_derived_detunings():
    p = ModelParams(delta1=0.3, delta2=1.0)
    assert p.delta == pytest.approx(0.7)
    assert p.Delta == 0.3


def test_kgrid_layout():
    g = KGrid(8, ell=2.0)
    expected = -math.pi / 2 + 2 * math.pi * np.arange(8) / 16
    np.testing.assert_allclose(g.values, expected)
    assert np.all(np.diff(g.values) > 0)
    assert g.values[0] == pytest.approx(-math.pi / 2)
    assert g.values[-1] < math.pi / 2


@pytest.mark.parametrize("n", [4, 16, 64, 65, 100])
def test_kgrid_center_index(n):
    g = KGrid(n)
    idx = g.center_index()
    assert abs(g.values[idx] - math.pi / 2) <= g.spacing / 2 + 1e-12


def test_kgrid_rejects_small():
    with pytest.raises(ValueError):
        KGrid(1)
