import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinteleport.states import (
    GaussianSpinState,
    JointGaussianState,
    ProtocolParams,
    inseparability,
    make_coherent_state,
    make_epr_pair,
    make_squeezed_state,
    min_eigenvalue,
    product_state,
    validate_small_tilt,
)


def test_coherent_state_vacuum():
    s = make_coherent_state()
    assert (s.mean_x, s.mean_y, s.var_x, s.var_y, s.cov_xy) == (0, 0, 1, 1, 0)


def test_coherent_state_displaced():
    s = make_coherent_state(2, -1)
    assert (s.mean_x, s.mean_y) == (2, -1)
    assert s.var_x == s.var_y == 1


def test_coherent_state_saturates_uncertainty():
    assert make_coherent_state(3.0, 0.5).uncertainty_product() == 1.0


def test_unphysical_state_rejected():
    with pytest.raises(ValueError):
        GaussianSpinState(var_x=0.5, var_y=1.0)
    with pytest.raises(ValueError):
        GaussianSpinState(var_x=-1.0, var_y=-1.0)
    with pytest.raises(ValueError):
        GaussianSpinState(var_x=2.0, var_y=2.0, cov_xy=1.8)


def test_squeezed_state_is_minimum_uncertainty():
    s = make_squeezed_state(0.5)
    assert s.uncertainty_product() == pytest.approx(1.0, abs=1e-15)
    assert s.var_x < 1 < s.var_y


def test_raw_conversion():
    raw = make_coherent_state(1.0, 0.0).to_raw(1e6)
    assert raw["var_x"] == pytest.approx(1e6 / 4)
    assert raw["mean_x"] == pytest.approx(500.0)


def test_epr_pair_r0_is_identity():
    np.testing.assert_array_equal(make_epr_pair(0).cov, np.eye(4))


def test_epr_pair_r_half():
    cov = make_epr_pair(0.5).cov
    assert cov[0, 0] == pytest.approx(1.5430806348, abs=1e-10)
    assert cov[0, 2] == pytest.approx(1.1752011936, abs=1e-10)
    assert cov[1, 3] == pytest.approx(-1.1752011936, abs=1e-10)
    assert cov[0, 1] == cov[0, 3] == cov[1, 2] == 0


def test_epr_negative_r_rejected():
    with pytest.raises(ValueError):
        make_epr_pair(-0.1)


@given(st.floats(0, 5))
def test_epr_pair_physical(r):
    j = make_epr_pair(r)
    assert min_eigenvalue(j.cov) >= -1e-12 * math.cosh(2 * r)
    np.testing.assert_array_equal(j.cov, j.cov.T)
    for label in j.labels:
        m = j.marginal(label)
        assert m.uncertainty_product() >= 1 - 1e-9 * m.var_x**2


def test_inseparability_values():
    assert inseparability(make_epr_pair(0), (2, 3)) == 2.0
    assert inseparability(make_epr_pair(0.5), (2, 3)) == pytest.approx(0.73575888234, rel=1e-10)
    assert inseparability(make_epr_pair(12), (2, 3)) < 1e-6


@given(st.floats(0, 5))
def test_inseparability_closed_form(r):
    # float entries of size cosh(2r) limit the difference to ~ulp(cosh 2r)
    val = inseparability(make_epr_pair(r), (2, 3))
    assert abs(val - 2 * math.exp(-2 * r)) <= 1e-12 * math.cosh(2 * r)


@given(st.floats(0, 3))
def test_inseparability_symmetric_in_labels(r):
    j = make_epr_pair(r)
    assert inseparability(j, (2, 3)) == pytest.approx(inseparability(j, (3, 2)), abs=1e-13)


def test_inseparability_unknown_label():
    with pytest.raises(KeyError):
        inseparability(make_epr_pair(1), (2, 7))


def test_product_state_marginals():
    j = product_state({1: make_squeezed_state(0.3, 1.0, 2.0), 2: make_coherent_state()})
    assert j.marginal(1) == make_squeezed_state(0.3, 1.0, 2.0)
    assert inseparability(j, (1, 2)) == pytest.approx(0.5 * (math.exp(-0.6) + 1 + math.exp(0.6) + 1))


def test_joint_state_rejects_bad_covariance():
    with pytest.raises(ValueError):
        JointGaussianState((1,), np.zeros(2), np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        JointGaussianState((1,), np.zeros(2), -np.eye(2))
    with pytest.raises(ValueError):
        JointGaussianState((1, 1), np.zeros(4), np.eye(4))


def test_small_tilt():
    assert validate_small_tilt(make_coherent_state(1, 0), 1e6) == []
    msgs = validate_small_tilt(make_coherent_state(200, 0), 1e4)
    assert len(msgs) == 1 and "Jx" in msgs[0]
    for n in (1, 10, 1e4, 1e9):
        assert validate_small_tilt(make_coherent_state(0, 0), n) == []


def test_small_tilt_threshold_configurable():
    s = make_coherent_state(0, 20)
    # 20 * sqrt(1e4/4) = 1000 = 0.2 * N/2
    assert validate_small_tilt(s, 1e4) != []
    assert validate_small_tilt(s, 1e4, fraction=0.25) == []
    with pytest.warns(UserWarning):
        validate_small_tilt(s, 1e4, warn=True)


def test_protocol_params_validation():
    for bad in (dict(n_atoms=0), dict(cooperativity=-1), dict(gamma0=0), dict(squeezing_r=-1)):
        with pytest.raises(ValueError):
            ProtocolParams(**bad)
    assert ProtocolParams(cooperativity=math.inf).cooperativity == math.inf
